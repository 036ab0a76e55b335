from datetime import datetime, timezone
from importlib import metadata as ilmd


def utc_timestamp(dt: datetime = None, fmt: str = "%Y-%m-%dT%H:%M:%SZ") -> str:
    """
    Format a datetime as a UTC timestamp for provenance records.

    Args:
        dt (datetime): A datetime object (UTC or naive). Defaults to now.
        fmt (str): Format string for strftime. Default: ISO 8601 with a Z suffix.

    Returns:
        str: Formatted UTC timestamp.
    """
    if dt is None:
        dt = datetime.now(timezone.utc)
    if dt.tzinfo is None:
        # Assume naive datetimes are in UTC
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).strftime(fmt)


def resolve_version(name: str) -> str:
    try:
        # Prefer installed distribution metadata
        return ilmd.version(name)
    except ilmd.PackageNotFoundError:
        # Fallback: try module __version__ (useful in editable/dev mode)
        try:
            mod = __import__(name)
            return getattr(mod, "__version__", "unknown")
        except Exception:
            return "unknown"
