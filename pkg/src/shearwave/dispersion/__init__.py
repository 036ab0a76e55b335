from importlib.metadata import version, PackageNotFoundError

try:
    __version__ = version("shearwave")
except PackageNotFoundError:
    __version__ = "dev"
