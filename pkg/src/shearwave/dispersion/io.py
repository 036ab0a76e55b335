"""
File formats: profile specs, result tables and seed records.
"""
import csv
import json
import logging as log
import numbers
import sys
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import ValidationError

from .profiles import ShearProfile, profile_from_spec
from .utils.consts import CSV_DIGITS
from .utils.errors import InvalidArgumentError, SchemaError
from .utils.schemas.profile import ProfileSpec
from .utils.schemas.seed import SeedRecord

FORMATS = ("csv", "json")


def offending_field(e: ValidationError) -> Optional[str]:
    errors = e.errors()
    if not errors:
        return None
    loc = [str(part) for part in errors[0].get("loc", ()) if part != "__root__"]
    field = ".".join(loc) if loc else None
    if field is None:
        # root validators name the field in the message prefix
        msg = errors[0].get("msg", "")
        field = msg.split(":", 1)[0] if ":" in msg else None
    return field


def load_json(path: str) -> Any:
    try:
        with open(path, "r") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path} is not valid JSON: {e}")


def parse_profile_spec(data: Dict[str, Any]) -> ProfileSpec:
    try:
        return ProfileSpec.parse_obj(data)
    except ValidationError as e:
        field = offending_field(e)
        raise SchemaError(f"profile spec validation error in field '{field}': {e}", field=field)


def read_profile_spec(path: str) -> ShearProfile:
    """
    Read a profile-spec JSON file.

    Raises:
        SchemaError: malformed JSON or a schema violation; ``field`` names the
            offending field.
    """
    spec = parse_profile_spec(load_json(path))
    log.debug(f"Read profile spec '{spec.name}' from {path}")
    return profile_from_spec(spec)


def write_profile_spec(profile: Union[ShearProfile, ProfileSpec], path: str) -> None:
    spec = profile if isinstance(profile, ProfileSpec) else ProfileSpec.parse_obj(profile.to_spec())
    with open(path, "w") as f:
        json.dump(spec.dict(), f, indent=4)


def format_number(x: Any) -> str:
    """Numbers with 17 significant digits, which round-trips IEEE doubles."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, numbers.Integral):
        return str(int(x))
    if isinstance(x, numbers.Real):
        return format(float(x), f".{CSV_DIGITS}g")
    return str(x)


def _jsonable(x: Any) -> Any:
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def write_results(
    path: Optional[str],
    records: Sequence[Dict[str, Any]],
    format: str = "csv",
    columns: Optional[Sequence[str]] = None,
) -> None:
    """
    Write result records as CSV (scalar columns only) or JSON (full records).

    ``path`` of ``None`` or ``-`` writes to standard output. Rows are written
    in the given order.
    """
    if format not in FORMATS:
        raise InvalidArgumentError(f"unknown output format '{format}', expected one of {FORMATS}")
    to_stdout = path in (None, "-")
    f = sys.stdout if to_stdout else open(path, "w", newline="")
    try:
        if format == "json":
            json.dump(_jsonable(list(records)), f, indent=2)
            f.write("\n")
        else:
            cols = list(columns) if columns is not None else (list(records[0].keys()) if records else [])
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(cols)
            for rec in records:
                writer.writerow([format_number(rec.get(col, "")) for col in cols])
    finally:
        if not to_stdout:
            f.close()
    if not to_stdout:
        log.info(f"Wrote {len(records)} records to {path}")


def read_results_csv(path: str) -> List[Dict[str, float]]:
    """Parse a CSV written by ``write_results`` back into floats where possible."""
    out = []
    with open(path, "r", newline="") as f:
        for row in csv.DictReader(f):
            parsed = {}
            for key, value in row.items():
                try:
                    parsed[key] = float(value)
                except ValueError:
                    parsed[key] = value
            out.append(parsed)
    return out


def read_seed(path: str) -> SeedRecord:
    """
    Read a seed record file.

    Raises:
        SchemaError: malformed JSON or missing/invalid fields.
    """
    data = load_json(path)
    try:
        return SeedRecord.parse_obj(data)
    except ValidationError as e:
        field = offending_field(e)
        raise SchemaError(f"seed record validation error in field '{field}': {e}", field=field)


def write_seed(record: SeedRecord, path: str) -> None:
    with open(path, "w") as f:
        json.dump(record.dict(), f, indent=4)
    log.info(f"Wrote seed record to {path}")

