"""CSV/JSON writers with atomic replace, plus readers for field files.

All CSVs have a header row, comma delimiters, LF line endings and 1-based
vertex labels.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .solver import PotentialField


def atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_json(path: str | Path, obj) -> None:
    atomic_write(path, dumps(obj))


def sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _num(x: float) -> str:
    return "" if np.isnan(x) else f"{x:.17g}"


def field_csv(field: PotentialField) -> str:
    rows = ["vertex,potential,defined"]
    for v, (x, d) in enumerate(zip(field.values.tolist(), field.defined.tolist())):
        rows.append(f"{v + 1},{_num(x) if d else ''},{int(d)}")
    return "\n".join(rows) + "\n"


def read_field_csv(path: str | Path) -> PotentialField:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "vertex,potential,defined":
        raise ValueError(f"{path}: not a field CSV")
    n = len(lines) - 1
    values = np.full(n, np.nan)
    defined = np.zeros(n, dtype=bool)
    for line in lines[1:]:
        label, pot, d = line.split(",")
        v = int(label) - 1
        defined[v] = d.strip() == "1"
        if pot:
            values[v] = float(pot)
    return PotentialField(values, defined, float("nan"), 0, method="file")


def table_csv(header: list[str], rows: list[list]) -> str:
    out = [",".join(header)]
    for r in rows:
        out.append(",".join(_num(x) if isinstance(x, float) else str(x) for x in r))
    return "\n".join(out) + "\n"
