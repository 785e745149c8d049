"""Canonical report serialization.

Reports and campaign summaries are written as TOML documents through a
canonical writer: fixed key order (insertion order of the dicts), floats
rendered with shortest round-trip decimals via repr, LF line endings.
Parsing the output and re-serializing it reproduces the bytes exactly,
so downstream diffs are stable.
"""

from __future__ import annotations

import sys

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

__all__ = ["dumps_report", "loads_report", "write_csv"]


def _fmt_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not np.isfinite(v):
            raise ValueError(f"non-finite value {v!r} cannot be serialized")
        text = repr(v)
        # TOML requires a decimal point or exponent in floats
        if "." not in text and "e" not in text and "E" not in text:
            text += ".0"
        return text
    if isinstance(value, str):
        escaped = (
            value.replace("\\", "\\\\")
            .replace('"', '\\"')
            .replace("\n", "\\n")
            .replace("\t", "\\t")
        )
        return f'"{escaped}"'
    raise TypeError(f"cannot serialize {type(value).__name__} scalar")


def _fmt_value(value) -> str:
    if isinstance(value, (list, tuple, np.ndarray)):
        items = [_fmt_scalar(v) for v in value]
        return "[" + ", ".join(items) + "]"
    return _fmt_scalar(value)


def _is_table(value) -> bool:
    return isinstance(value, dict)


def _emit(table: dict, path: list[str], lines: list[str]) -> None:
    plain = {k: v for k, v in table.items() if not _is_table(v) and v is not None}
    subs = {k: v for k, v in table.items() if _is_table(v)}
    if path and (plain or not subs):
        lines.append("[" + ".".join(path) + "]")
    for key, value in plain.items():
        lines.append(f"{key} = {_fmt_value(value)}")
    if plain or (path and not subs):
        lines.append("")
    for key, sub in subs.items():
        _emit(sub, path + [key], lines)


def dumps_report(doc: dict) -> str:
    """Serialize a nested dict to canonical TOML text (LF endings)."""
    lines: list[str] = []
    _emit(doc, [], lines)
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines) + "\n"


def loads_report(text: str) -> dict:
    """Parse a report produced by dumps_report back into nested dicts."""
    return _toml.loads(text)


def write_csv(path, header: list[str], rows) -> None:
    """Comma-delimited table with one header row and repr-formatted cells."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for value in row:
                if value is None:
                    cells.append("")
                elif isinstance(value, bool):
                    cells.append("true" if value else "false")
                elif isinstance(value, (float, np.floating)):
                    cells.append(repr(float(value)))
                else:
                    cells.append(str(value))
            fh.write(",".join(cells) + "\n")
