"""Serialisation helpers: JSON reports, CSV tables and gnuplot data/script pairs.

Output is deterministic: JSON keeps insertion order, floats are written
with ``repr`` precision and non-finite numbers become the strings
``"inf"``, ``"-inf"`` and ``"nan"`` so the files stay valid JSON.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import mpmath
import numpy as np


def _float(x: float):
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def to_jsonable(obj):
    """Recursively convert reports, numpy values and mpmath numbers to JSON types."""
    if hasattr(obj, "to_dict") and callable(obj.to_dict):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, mpmath.mpf):
        return mpmath.nstr(obj, 50)
    if isinstance(obj, Path):
        return str(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return repr(obj)


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    return v


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """CSV with a header row and minimal RFC 4180 quoting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_gnuplot(stem, columns: Sequence[str], rows: Iterable[Sequence[float]], *,
                  title: str = "", xlabel: str = "", ylabel: str = "",
                  series: Sequence[tuple] = ((1, 2),), logscale_y: bool = False,
                  blocks: Sequence[str] = ()):
    """Write ``stem.dat`` and a ``stem.plt`` script that plots it.

    ``series`` lists ``(xcol, ycol)`` pairs (1-based) drawn as lines with
    points.  When ``blocks`` is non-empty, ``rows`` must be a list of row
    lists, one per block; blocks are separated by two blank lines and
    selected with ``index`` in the script.
    """
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    dat = stem.with_suffix(".dat")
    plt = stem.with_suffix(".plt")

    def fmt(v):
        v = float(v)
        return repr(v) if math.isfinite(v) else "NaN"

    lines = ["# " + " ".join(columns)]
    if blocks:
        for name, block in zip(blocks, rows):
            lines.append(f"# block {name}")
            lines.extend(" ".join(fmt(v) for v in r) for r in block)
            lines.extend(["", ""])
    else:
        lines.extend(" ".join(fmt(v) for v in r) for r in rows)
    dat.write_text("\n".join(lines) + "\n")

    script = [f"set title {json.dumps(title)}", f"set xlabel {json.dumps(xlabel)}",
              f"set ylabel {json.dumps(ylabel)}", "set key left top", "set grid"]
    if logscale_y:
        script.append("set logscale y")
    parts = []
    if blocks:
        for i, name in enumerate(blocks):
            for x, y in series:
                parts.append(f"'{dat.name}' index {i} using {x}:{y} with linespoints title {json.dumps(name)}")
    else:
        for x, y in series:
            parts.append(f"'{dat.name}' using {x}:{y} with linespoints title {json.dumps(columns[y - 1])}")
    script.append("plot " + ", \\\n     ".join(parts))
    plt.write_text("\n".join(script) + "\n")
    return dat, plt
