"""Deterministic CSV/JSON emission.

All files are UTF-8 with LF line endings; floats are printed with 9
significant digits so repeated runs and canonicalization round trips are
byte-identical.
"""

from __future__ import annotations

import math

from .errors import ValidationError


def format_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.9g}"


def _format_cell(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return format_float(x)


def write_csv(path, header: list[str], rows) -> None:
    """Write rows of numbers/strings under an exact header."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                if len(row) != len(header):
                    raise ValidationError(
                        f"row width {len(row)} != header width {len(header)}")
                fh.write(",".join(_format_cell(x) for x in row) + "\n")
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc}") from exc


def _json_dumps(obj, indent: int = 0) -> str:
    pad = " " * indent
    inner = " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(f'{inner}"{k}": {_json_dumps(v, indent + 2)}'
                           for k, v in obj.items())
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(f"{inner}{_json_dumps(v, indent + 2)}" for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            # JSON has no inf/nan literals; emit as strings
            return f'"{format_float(obj)}"'
        return format_float(obj)
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise ValidationError(f"cannot serialize {type(obj).__name__} to JSON")


def write_json(path, obj) -> None:
    """Write a JSON document with canonical float formatting."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(_json_dumps(obj) + "\n")
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc}") from exc


def emit(data, fmt: str, path, header: list[str] | None = None) -> None:
    """Emit a table (csv) or an object tree (json) to path."""
    if fmt == "csv":
        if header is None:
            raise ValidationError("csv emission needs a header")
        write_csv(path, header, data)
    elif fmt == "json":
        write_json(path, data)
    else:
        raise ValidationError(f"unknown format {fmt!r}")
