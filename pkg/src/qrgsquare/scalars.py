"""Scalar regimes: exact Gaussian rationals and tolerant complex floats.

Every coefficient field in the package is a numpy array whose trailing axis
runs over the four sites. In the exact regime the array has ``object`` dtype
and holds sympy ``QQ_I`` elements; in the floating regime it is
``complex128``. Arithmetic is plain numpy arithmetic in both cases, so the
geometry code never branches on the regime. Only comparisons do.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from numbers import Number

import numpy as np
from sympy import QQ_I, Rational
from sympy.polys.domains.gaussiandomains import GaussianRational

DEFAULT_TOL = 1e-9
RESIDUAL_TOL = 1e-12


class RegimeMismatch(TypeError):
    """Exact and floating values were combined in a comparison."""


class InvalidInput(ValueError):
    pass


@dataclass(frozen=True)
class Regime:
    """Arithmetic regime of a session.

    ``tol`` is the equality tolerance of the floating regime and is ignored
    when ``exact`` is true.
    """

    exact: bool = False
    tol: float = DEFAULT_TOL

    def with_tol(self, tol: float) -> "Regime":
        return replace(self, tol=tol)

    def scalar(self, value):
        return exact(value) if self.exact else complex(value)

    def array(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=object if self.exact else complex)
        if self.exact:
            return _exact_vec(values).astype(object) if values.size else values
        return values

    def zeros(self, shape) -> np.ndarray:
        if self.exact:
            out = np.empty(shape, dtype=object)
            out.fill(QQ_I(0, 0))
            return out
        return np.zeros(shape, dtype=complex)

    def ones(self, shape) -> np.ndarray:
        return self.zeros(shape) + 1

    def is_zero(self, arr, tol: float | None = None) -> bool:
        arr = np.asarray(arr)
        if self.exact:
            _require_exact(arr)
            return all(exact(v) == QQ_I(0, 0) for v in arr.ravel())
        _require_float(arr)
        return bool(np.all(np.abs(arr) <= (self.tol if tol is None else tol)))

    def close(self, x, y, tol: float | None = None) -> bool:
        x, y = np.asarray(x), np.asarray(y)
        if self.exact:
            _require_exact(x)
            _require_exact(y)
        else:
            _require_float(x)
            _require_float(y)
        return self.is_zero(x - y, tol)


FLOAT = Regime(exact=False)
EXACT = Regime(exact=True, tol=0.0)


def exact(value) -> GaussianRational:
    """Convert ``value`` to a Gaussian rational without rounding.

    Floats are read through their shortest decimal repr, so ``0.1`` becomes
    1/10 rather than the nearest binary fraction.
    """
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise InvalidInput("booleans are not scalars")
    if isinstance(value, (int, np.integer)):
        return QQ_I(int(value), 0)
    if isinstance(value, Fraction):
        return QQ_I.convert(Rational(value.numerator, value.denominator))
    if isinstance(value, Rational):
        return QQ_I.convert(value)
    if isinstance(value, str):
        return exact(Fraction(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise InvalidInput(f"non-finite value {value!r} has no exact form")
        return exact(Fraction(repr(float(value))))
    if isinstance(value, (complex, np.complexfloating)):
        re, im = exact(value.real), exact(value.imag)
        return re + im * QQ_I(0, 1)
    raise InvalidInput(f"cannot make an exact scalar from {type(value).__name__}")


_exact_vec = np.vectorize(exact, otypes=[object])


def is_exact_array(arr) -> bool:
    arr = np.asarray(arr)
    return arr.dtype == object


def _require_exact(arr):
    if arr.dtype != object:
        raise RegimeMismatch("floating value used in the exact regime")
    for v in arr.ravel():
        if isinstance(v, (float, complex, np.floating, np.complexfloating)):
            raise RegimeMismatch("floating value used in the exact regime")


def _require_float(arr):
    if arr.dtype == object:
        raise RegimeMismatch("exact value used in the floating regime")


def regime_of(arr, tol: float = DEFAULT_TOL) -> Regime:
    if is_exact_array(arr) or isinstance(arr, GaussianRational):
        return EXACT
    return Regime(exact=False, tol=tol)


def _kind(x) -> str:
    if isinstance(x, GaussianRational):
        return "exact"
    if isinstance(x, (Fraction, Rational)) or (
        isinstance(x, (int, np.integer)) and not isinstance(x, bool)
    ):
        return "either"
    if isinstance(x, Number):
        return "float"
    raise InvalidInput(f"not a scalar: {x!r}")


def approx_equal(x, y, tol: float = DEFAULT_TOL) -> bool:
    """Equality of two scalars under their common regime.

    Exact values compare by identity of value; floats by ``|x - y| <= tol``.
    Comparing an exact value against a float raises ``RegimeMismatch``.
    """
    kx, ky = _kind(x), _kind(y)
    if {kx, ky} == {"exact", "float"}:
        raise RegimeMismatch(f"cannot compare exact {x!r} with floating {y!r}")
    if "float" in (kx, ky):
        return abs(complex(x) - complex(y)) <= tol
    return exact(x) == exact(y)


def to_complex(x):
    """Float view of a scalar or array in either regime."""
    if isinstance(x, np.ndarray):
        if x.dtype == object:
            return np.vectorize(to_complex, otypes=[complex])(x)
        return x.astype(complex)
    if isinstance(x, GaussianRational):
        return complex(float(x.x), float(x.y))
    return complex(x)


def _conj_scalar(x):
    if isinstance(x, GaussianRational):
        return QQ_I(x.x, -x.y)
    return complex(x).conjugate()


_conj_vec = np.vectorize(_conj_scalar, otypes=[object])


def conj(arr):
    arr = np.asarray(arr)
    if arr.dtype == object:
        return _conj_vec(arr) if arr.size else arr
    return np.conj(arr)


def real_part(x):
    """Real part as a Fraction (exact) or float."""
    if isinstance(x, GaussianRational):
        return Fraction(int(x.x.numerator), int(x.x.denominator))
    return complex(x).real


@dataclass(frozen=True)
class Phase:
    """A point q on the unit circle, kept with its angle."""

    theta: float
    value: object

    @property
    def exact(self) -> bool:
        return isinstance(self.value, GaussianRational)

    def inverse(self) -> "Phase":
        if self.exact:
            return Phase(-self.theta, 1 / self.value)
        return Phase(-self.theta, cmath.exp(-1j * self.theta))

    def __complex__(self):
        return to_complex(self.value)


def make_phase(theta: float, regime: Regime = FLOAT) -> Phase:
    """q = exp(i theta). Angles 0 and pi are exact when ``regime`` is exact."""
    try:
        theta = float(theta)
    except (TypeError, ValueError) as err:
        raise InvalidInput(f"theta must be a real number, got {theta!r}") from err
    if not math.isfinite(theta):
        raise InvalidInput(f"theta must be finite, got {theta!r}")
    if regime.exact:
        turns = theta / math.pi
        if turns == round(turns):
            return Phase(theta, QQ_I(1 if round(turns) % 2 == 0 else -1, 0))
    return Phase(theta, cmath.exp(1j * theta))
