"""CSV records: 12 significant digits, comma separated, Unix newlines.

Every file starts with a ``#`` comment echoing the configuration, followed by
a header naming the columns (with units).
"""
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError
from .sta import STARamp

FMT = "{:.12g}"


def format_value(v) -> str:
    if isinstance(v, str):
        if "," in v or "\n" in v:
            raise InvalidArgumentError(f"text field {v!r} contains a separator")
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if np.isnan(v):
        return "nan"
    if np.isinf(v):
        return "inf" if v > 0 else "-inf"
    return FMT.format(v)


def write_csv(path, columns, rows, comment="", time_series=False):
    """Write ``rows`` under ``columns``; ``time_series`` requires increasing t."""
    rows = [list(r) for r in rows]
    if any(len(r) != len(columns) for r in rows):
        raise InvalidArgumentError("row width does not match the header")
    if time_series and len(rows) > 1:
        t = np.array([float(r[0]) for r in rows])
        if np.any(np.diff(t) <= 0):
            raise InvalidArgumentError("time column must increase strictly")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if comment:
        lines.append("# " + comment.replace("\n", " "))
    lines.append(",".join(columns))
    lines.extend(",".join(format_value(v) for v in r) for r in rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_csv(path):
    """Return ``(columns, data)`` with ``data`` a float array of shape (rows, cols).

    Text fields (such as ramp labels) read as NaN.
    """
    with open(path, encoding="utf-8") as fh:
        lines = [l.rstrip("\n") for l in fh if not l.startswith("#")]
    columns = lines[0].split(",")
    data = np.array([[_to_float(v) for v in l.split(",")] for l in lines[1:] if l], dtype=float)
    return columns, data.reshape(-1, len(columns))


def _to_float(text):
    try:
        return float(text)
    except ValueError:
        return float("nan")


def write_ramp(path, ramp: STARamp, comment=""):
    meta = f"n={ramp.n}; q={ramp.q}; lam_i={ramp.lam_i:.12g}; lam_f={ramp.lam_f:.12g}; t_f={ramp.t_f:.12g}"
    comment = f"{comment}; {meta}" if comment else meta
    return write_csv(path, ["t", "lambda"], zip(ramp.times, ramp.values), comment, time_series=True)


def read_ramp(path) -> STARamp:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    meta = {}
    for part in first.lstrip("# ").split(";"):
        if "=" in part:
            k, v = part.split("=", 1)
            meta[k.strip()] = v.strip()
    _, data = read_csv(path)
    return STARamp(data[:, 0], data[:, 1], int(meta.get("n", -1)), int(meta.get("q", 2)),
                   float(data[0, 1]), float(data[-1, 1]), float(data[-1, 0]))
