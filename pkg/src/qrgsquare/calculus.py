"""Differential calculus of the square graph (Cayley graph of Z2 x Z2).

Array conventions, used throughout the package. The last axis always runs
over the sites in binary order 00, 01, 10, 11; any leading axes are batch
axes and broadcast.

========== ================ =========================================
object     shape            meaning
========== ================ =========================================
function   ``(..., 4)``     f(x)
1-form     ``(..., 2, 4)``  ``w[i]`` is the left coefficient of e_{i+1}
2-form     ``(..., 4)``     left coefficient of Vol = e1 ^ e2
bitensor   ``(..., 2, 2, 4)`` ``T[i, j]`` on e_{i+1} (x) e_{j+1}
========== ================ =========================================

Coefficients always sit to the left of the basis. Moving a function across
a basis form shifts it: ``e_i f = (R_i f) e_i``.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .scalars import FLOAT, Regime, conj, exact, is_exact_array, to_complex

SITES = ("00", "01", "10", "11")

# R_1 flips the first bit, R_2 the second.
_SHIFT = {1: np.array([2, 3, 0, 1]), 2: np.array([1, 0, 3, 2])}


def site_index(i: int, j: int) -> int:
    return 2 * i + j


def shift(direction: int, f):
    if direction not in _SHIFT:
        raise ValueError(f"direction must be 1 or 2, got {direction!r}")
    return np.asarray(f)[..., _SHIFT[direction]]


def shift_both(f):
    return shift(1, shift(2, f))


def partial(direction: int, f):
    """Finite difference ``R_i f - f``."""
    return shift(direction, f) - np.asarray(f)


def plane_waves(regime: Regime = FLOAT):
    """The four characters ``1, phi, psi, chi`` of Z2 x Z2."""
    one = regime.array([1, 1, 1, 1])
    phi = regime.array([1, 1, -1, -1])
    psi = regime.array([1, -1, 1, -1])
    return one, phi, psi, phi * psi


def constant(c, regime: Regime = FLOAT):
    return regime.array([c] * 4)


# -- 1-forms ---------------------------------------------------------------

def basis_form(i: int, regime: Regime = FLOAT):
    """e_i as a 1-form array (i is 1 or 2)."""
    w = regime.zeros((2, 4))
    w[i - 1] = w[i - 1] + 1
    return w


def d0(f):
    """Exterior derivative of a function: ``(d^1 f) e1 + (d^2 f) e2``."""
    return np.stack([partial(1, f), partial(2, f)], axis=-2)


def left_multiply(f, w):
    return np.asarray(f)[..., None, :] * w


def right_multiply(w, f):
    return np.stack([w[..., 0, :] * shift(1, f), w[..., 1, :] * shift(2, f)], axis=-2)


def wedge(w, v):
    """Wedge of two 1-forms, returned as the coefficient of Vol."""
    return w[..., 0, :] * shift(1, v[..., 1, :]) - w[..., 1, :] * shift(2, v[..., 0, :])


def d1(w):
    """Exterior derivative of a 1-form. Uses d e_i = 0."""
    return partial(1, w[..., 1, :]) - partial(2, w[..., 0, :])


def star0(f):
    return conj(f)


def star1(w):
    """``(c_i e_i)* = e_i* c_i* = -(R_i conj c_i) e_i``."""
    c = conj(w)
    return -np.stack([shift(1, c[..., 0, :]), shift(2, c[..., 1, :])], axis=-2)


# -- 2-forms ---------------------------------------------------------------

def form2_right_multiply(v, f):
    return np.asarray(v) * shift_both(f)


# -- bitensors ------------------------------------------------------------

def basis_bitensor(i: int, j: int, regime: Regime = FLOAT):
    t = regime.zeros((2, 2, 4))
    t[i - 1, j - 1] = t[i - 1, j - 1] + 1
    return t


def tensor(w, v):
    """``w (x) v`` for 1-forms: ``c_i e_i (x) d_j e_j = c_i R_i(d_j) e_i (x) e_j``."""
    rows = [
        np.stack([w[..., i, :] * shift(i + 1, v[..., j, :]) for j in range(2)], axis=-2)
        for i in range(2)
    ]
    return np.stack(rows, axis=-3)


def bitensor_right_multiply(t, f):
    """``(e_i (x) e_j) f = (R_i R_j f) e_i (x) e_j``."""
    f = np.asarray(f)
    r12 = shift_both(f)
    factors = [[f, r12], [r12, f]]  # R_i R_j with R_i^2 = id
    rows = [np.stack([t[..., i, j, :] * factors[i][j] for j in range(2)], axis=-2)
            for i in range(2)]
    return np.stack(rows, axis=-3)


def bitensor_wedge(t):
    """Contract a bitensor with the wedge product into a 2-form."""
    return t[..., 0, 1, :] - t[..., 1, 0, :]


def dagger(t):
    """``(w (x) v)^dagger = v* (x) w*`` on bitensors.

    For a single term ``f e_i (x) e_j`` this gives ``(R_j R_i conj f) e_j (x) e_i``.
    """
    c = conj(t)
    out = [[None, None], [None, None]]
    for i in range(2):
        for j in range(2):
            coeff = c[..., i, j, :]
            coeff = shift(i + 1, coeff)
            coeff = shift(j + 1, coeff)
            out[j][i] = coeff
    return np.stack([np.stack(row, axis=-2) for row in out], axis=-3)


# -- general graph calculus ---------------------------------------------

def square_arrows():
    """The eight arrows x -> y of the bi-directed square, as site-index pairs."""
    arrows = []
    for x in range(4):
        for direction in (1, 2):
            arrows.append((x, int(_SHIFT[direction][x])))
    return arrows


def graph_d(f) -> dict:
    """``df = sum_{x->y} (f(y) - f(x)) omega_{x->y}`` as a dict over arrows."""
    f = np.asarray(f)
    return {(x, y): f[..., y] - f[..., x] for x, y in square_arrows()}


def graph_to_cayley(coeffs: dict, regime: Regime = FLOAT):
    """Rewrite ``sum c_{x->y} omega_{x->y}`` in the basis e1, e2.

    ``omega_{x->y} = delta_x e_i`` where y is x shifted in direction i, so the
    coefficient function of e_i at x is the coefficient on the arrow leaving x
    in direction i. Arrows missing from ``coeffs`` count as zero.
    """
    w = regime.zeros((2, 4))
    for (x, y), c in coeffs.items():
        for direction in (1, 2):
            if _SHIFT[direction][x] == y:
                w[direction - 1, x] = w[direction - 1, x] + c
                break
        else:
            raise ValueError(f"{SITES[x]}->{SITES[y]} is not an arrow of the square")
    return w


def cayley_to_graph(w) -> dict:
    return {(x, int(_SHIFT[d][x])): w[d - 1, x] for x in range(4) for d in (1, 2)}


# -- serialization -------------------------------------------------------

def _encode_scalar(v):
    if isinstance(v, (complex, float, int, np.number)):
        c = complex(v)
        return [c.real, c.imag]
    re, im = v.x, v.y
    return [str(Fraction(int(re.numerator), int(re.denominator))),
            str(Fraction(int(im.numerator), int(im.denominator)))]


def sitefn_to_list(f) -> list:
    """A function as four ``[re, im]`` pairs; exact values become fraction strings."""
    f = np.asarray(f)
    if f.shape != (4,):
        raise ValueError(f"expected shape (4,), got {f.shape}")
    return [_encode_scalar(v) for v in f]


def sitefn_from_list(data, regime: Regime = FLOAT):
    if len(data) != 4:
        raise ValueError(f"a site function has 4 values, got {len(data)}")
    values = []
    for pair in data:
        re, im = pair
        if regime.exact:
            values.append(exact(re) + exact(im) * exact(1j))
        else:
            values.append(complex(float(Fraction(re)) if isinstance(re, str) else re,
                                  float(Fraction(im)) if isinstance(im, str) else im))
    return regime.array(values)


def sitefn_to_json(f) -> str:
    return json.dumps(sitefn_to_list(f))


def sitefn_from_json(text: str, regime: Regime = FLOAT):
    return sitefn_from_list(json.loads(text), regime)


def as_float(arr):
    return to_complex(arr) if is_exact_array(arr) else np.asarray(arr, dtype=complex)
