from decimal import Decimal, InvalidOperation
from typing import List
from pydantic import BaseModel, validator

from ..consts import SEED_MIN_DIGITS


def significant_digits(text: str) -> int:
    """Number of significant decimal digits written in ``text``."""
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise ValueError(f"not a decimal string: {text!r}")
    if not value.is_finite():
        raise ValueError(f"not a finite decimal: {text!r}")
    digits = value.as_tuple().digits
    # leading zeros are never significant
    while len(digits) > 1 and digits[0] == 0:
        digits = digits[1:]
    return len(digits)


def _check_precise(text: str) -> str:
    if Decimal(text) != 0 and significant_digits(text) < SEED_MIN_DIGITS:
        raise ValueError(f"{text!r} carries fewer than {SEED_MIN_DIGITS} significant digits")
    return text


class SeedRecord(BaseModel):
    """
    An eigenpair written as decimal strings, typically produced in extended
    precision elsewhere and imported to start a path in double precision.

    Attributes
    ----------
    k : str
        Wavenumber.
    c : str
        Phase velocity.
    w : List[str]
        Eigenvector on the collocation nodes, surface first, bottom node excluded.
    N_z : int
        Order of the collocation operator the eigenvector lives on.
    h : str
        Depth of the collocation operator.
    profile_name : str
        Name of the profile the seed belongs to.
    F2 : str
        Froude number squared of that profile.
    """

    k: str
    c: str
    w: List[str]
    N_z: int
    h: str
    profile_name: str
    F2: str

    @validator("k", "c", "h", "F2")
    def _decimal_scalar(cls, v, field):
        significant_digits(v)
        if field.name in ("k", "c"):
            _check_precise(v)
        return v

    @validator("w", each_item=True)
    def _decimal_entry(cls, v):
        significant_digits(v)
        return _check_precise(v)

    @validator("N_z")
    def _order(cls, v):
        if v < 2:
            raise ValueError("N_z must be >= 2")
        return v
