"""Parameter scans over the relative amplitudes k, l and CSV output.

CSV files start with ``#`` comment rows recording the scan parameters,
followed by one column-header row. Floats are written with ``.17g`` so the
text round-trips exactly and does not depend on locale.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .model import (
    EUCLIDEAN,
    AdmissibilityError,
    MomentumParams,
    action_kl,
    laplacian_spectrum,
)


@dataclass(frozen=True)
class Grid:
    """Points ``start, start + step, ..., <= stop`` on one axis."""

    start: float
    stop: float
    step: float

    @classmethod
    def parse(cls, text: str) -> "Grid":
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        return cls(start, stop, step)

    def values(self) -> np.ndarray:
        if not self.step > 0:
            raise ValueError("grid step must be positive")
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        if n < 1:
            raise ValueError("empty grid")
        # rounding keeps 0.1-spaced grids landing on exact decimals like 0.0
        pts = np.round(self.start + self.step * np.arange(n), 12)
        if np.any(np.abs(pts) >= 1):
            raise AdmissibilityError(
                f"grid {self.start}:{self.stop}:{self.step} reaches |k| or |l| >= 1")
        return pts


def action_scan(ks, ls, k0: float, l0: float, signature: str = EUCLIDEAN) -> list:
    """Rows ``(k, l, action)`` in k-major order."""
    return [(float(k), float(l), float(action_kl(MomentumParams.from_relative(k0, l0, k, l, signature))))
            for k in ks for l in ls]


def spectrum_scan(values, k0: float, l0: float, q, fixed: float, axis: str = "l",
                  signature: str = EUCLIDEAN) -> list:
    """Rows ``(x, Re l1..l4, Im l1..l4)`` along ``axis`` with the other amplitude fixed.

    Eigenvalues are the four of the Laplacian, sorted by real then imaginary
    part.
    """
    if axis not in ("k", "l"):
        raise ValueError(f"axis must be 'k' or 'l', got {axis!r}")
    rows = []
    for x in values:
        k, l = (fixed, x) if axis == "l" else (x, fixed)
        m = MomentumParams.from_relative(k0, l0, k, l, signature)
        ev = laplacian_spectrum(m, q).eigenvalues
        rows.append((float(x), *map(float, ev.real), *map(float, ev.imag)))
    return rows


def spectrum_columns(axis: str = "l") -> list:
    return [axis] + [f"re_lambda{i}" for i in range(1, 5)] + [f"im_lambda{i}" for i in range(1, 5)]


ACTION_COLUMNS = ["k", "l", "action"]


def _fmt(x) -> str:
    return format(float(x), ".17g")


def to_csv(columns, rows, meta: dict | None = None) -> str:
    out = io.StringIO()
    for key, value in (meta or {}).items():
        out.write(f"# {key}={value}\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(_fmt(v) for v in row) + "\n")
    return out.getvalue()


def read_csv(text: str) -> tuple:
    """Inverse of :func:`to_csv`: ``(meta, columns, rows as float array)``."""
    meta, lines = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        elif line.strip():
            lines.append(line)
    columns = lines[0].split(",")
    rows = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    return meta, columns, rows
