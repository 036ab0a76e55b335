import math

# discretisation
DEFAULT_NZ = 64
DEFAULT_DEPTH = 1.0
DEFAULT_HISTOGRAM_BINS = 16
DEFAULT_PLATEAU_MARGIN = 2.0
DEFAULT_RANGE_SAMPLES = 10_000
RANGE_REFINE_XTOL = 1e-10

# eigenvalue filtering
DEFAULT_MAGNITUDE_CUTOFF = 1e8
DEFAULT_IMAG_TOL = 1e-6
DEFAULT_GAP_WARNING = 1e-6
SEED_RESIDUAL_TOL = 1e-12
SEED_MIN_DIGITS = 20

# integration
DEFAULT_TOL = 1e-11
MIN_TOL = 1e-15
MAX_TOL = 1e-2
DEFAULT_MAX_STEPS = 100_000
STEP_SAFETY = 0.9
STEP_EXPONENT = 1.0 / 5.0
STEP_MIN_FACTOR = 0.2
STEP_MAX_FACTOR = 5.0
STEP_UNDERFLOW = 1e-14
INITIAL_STEP_FRACTION = 1e-2
# the step controller runs below the requested tolerance so that the
# accumulated error of a whole path stays within 10 x tol
PATH_TOL_FACTOR = 1e-2
PATH_TOL_FLOOR = 100 * 2.0 ** -52

# accuracy target -> (N_z, integrator tol)
ACCURACY_PRESETS = {
    1e-4: (24, 1e-5),
    1e-7: (40, 1e-8),
    1e-10: (64, 1e-11),
}

# adaptive depth
DEFAULT_DELTA = 2.0 ** -52
DEFAULT_C_MIN = 0.3
DEFAULT_C_MAX = 0.8

# polar field
DEFAULT_ANGLES = 64
DEFAULT_RADII = 64
FIELD_FORMAT_VERSION = 1
TWO_PI = 2.0 * math.pi

# cli
JOBS_ENV_VAR = "SHEARWAVE_JOBS"
CSV_DIGITS = 17
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
