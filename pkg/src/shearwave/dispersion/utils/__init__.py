from .file_sha256 import file_sha256 as file_sha256, spec_sha256 as spec_sha256
from .errors import DispersionError as DispersionError
from .common import utc_timestamp as utc_timestamp

__all__ = [
    "file_sha256",
    "spec_sha256",
    "DispersionError",
    "utc_timestamp",
]
