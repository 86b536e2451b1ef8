"""Plain-text generating-vector files.

::

    b m s
    j w_j z_j ztilde_j      (one line per component, j = 1..s)
"""
from __future__ import annotations

from pathlib import Path

from ..errors import ValidationError
from ..number_theory import Modulus
from .types import GeneratingVector, ReductionSchedule


def format_vector(gv: GeneratingVector) -> str:
    lines = [f"{gv.mod.b} {gv.mod.m} {gv.s}"]
    zt = gv.z_tilde
    for j, (w, z) in enumerate(zip(gv.schedule.w, gv.z), start=1):
        lines.append(f"{j} {w} {z} {int(zt[j - 1])}")
    return "\n".join(lines) + "\n"


def parse_vector(text: str) -> GeneratingVector:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise ValidationError("empty vector file")
    try:
        header = [int(x) for x in rows[0]]
        body = [[int(x) for x in r] for r in rows[1:]]
    except ValueError as exc:
        raise ValidationError(f"non-integer entry in vector file: {exc}") from None
    if len(header) != 3:
        raise ValidationError("header must read 'b m s'")
    b, m, s = header
    if len(body) != s:
        raise ValidationError(f"header announces s={s} components, found {len(body)}")
    mod = Modulus(b, m)
    w, z = [], []
    for i, r in enumerate(body, start=1):
        if len(r) != 4:
            raise ValidationError(f"line {i + 1}: expected 'j w_j z_j ztilde_j'")
        j, wj, zj, ztj = r
        if j != i:
            raise ValidationError(f"line {i + 1}: component index {j}, expected {i}")
        expected = (b ** min(wj, m) * zj) % mod.n if wj < m else 0
        if ztj != expected:
            raise ValidationError(f"line {i + 1}: ztilde={ztj} but b^w z mod b^m = {expected}")
        w.append(wj)
        z.append(zj)
    return GeneratingVector(mod, ReductionSchedule(tuple(w)), tuple(z))


def write_vector(path, gv: GeneratingVector):
    Path(path).write_text(format_vector(gv))


def read_vector(path) -> GeneratingVector:
    return parse_vector(Path(path).read_text())
