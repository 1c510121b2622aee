"""Functional integral over the relative amplitudes (k, l) in (-1, 1)^2.

The weight is ``exp(i S(k, l))`` with S the momentum-space action. S blows
up at the boundary, so the weight oscillates without bound there and a
plain tensor rule on the real square converges slowly. The default
``contour`` rule avoids this. Per axis, substitute ``s = k / sqrt(1 - k^2)``,
which turns ``c k^2 / (1 - k^2)`` into ``c s^2`` and ``dk`` into
``(1 + s^2)^(-3/2) ds`` over the whole real line, then rotate
``s = exp(+-i pi/4) t`` so that ``exp(i c s^2) = exp(-|c| t^2)``. The
integrand is analytic in the swept sector (its only singularities are at
s = +-i), so the rotation is exact and the rotated integral is a smooth
Gaussian-weighted one. A further ``t = sinh(v)`` keeps the algebraic tail
short when |c| is small. Observables must then be analytic in k and l, which
holds for polynomials and for the action itself.

``legendre`` (plain Gauss-Legendre on (-1, 1)) and ``tanh`` (k = tanh u)
are kept for comparison and for non-analytic observables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .model import EUCLIDEAN, MINKOWSKI, SignatureError

RULES = ("contour", "legendre", "tanh")
ILL_CONDITIONED = 1e-12
# exp(-40) ~ 4e-18: the rotated Gaussian is negligible beyond |c| t^2 = 40.
_GAUSS_CUTOFF = 40.0
# 1 - tanh(15)^2 ~ 4e-13 is still resolved in double precision.
_TANH_CUTOFF = 15.0


class ConvergenceError(RuntimeError):
    """Refinement did not reach the target; ``trace`` lists each rule tried."""

    def __init__(self, message: str, trace: list):
        super().__init__(message)
        self.trace = trace


class IllConditionedNormalization(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor rule on (-1, 1)^2, refined by ``n -> 2n - 1`` points per axis.

    With the defaults the sequence is 51, 101, 201.
    """

    rule: str = "contour"
    points: int = 51
    max_refinements: int = 2
    target_rel_error: float = 1e-4
    deterministic: bool = False

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"rule must be one of {RULES}, got {self.rule!r}")
        if self.points < 2:
            raise ValueError("need at least 2 points per axis")
        if self.max_refinements < 1:
            raise ValueError("need at least one refinement to estimate the error")
        if not self.target_rel_error > 0:
            raise ValueError("target_rel_error must be positive")

    def sequence(self) -> list:
        n, out = self.points, [self.points]
        for _ in range(self.max_refinements):
            n = 2 * n - 1
            out.append(n)
        return out


@dataclass
class IntegralResult:
    value: complex
    estimated_error: float
    nodes_used: int
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "value": [self.value.real, self.value.imag],
            "estimated_error": self.estimated_error,
            "nodes_used": self.nodes_used,
        }


def couplings(k0: float, l0: float, signature: str = EUCLIDEAN) -> tuple:
    """Coefficients (c_k, c_l) with ``S = c_k k^2/(1-k^2) + c_l l^2/(1-l^2)``."""
    if signature == EUCLIDEAN:
        if not (k0 > 0 and l0 > 0):
            raise SignatureError("Euclidean couplings need k0 > 0 and l0 > 0")
        return 8.0 * k0, 8.0 * l0
    if signature == MINKOWSKI:
        if not (k0 < 0 and l0 > 0):
            raise SignatureError("Minkowski couplings need k0 < 0 and l0 > 0")
        return 8.0 * -k0, -8.0 * l0
    raise SignatureError(f"unknown signature {signature!r}")


def action(k, l, k0: float, l0: float, signature: str = EUCLIDEAN):
    """Momentum-space action on arrays; accepts complex k, l."""
    ck, cl = couplings(k0, l0, signature)
    k, l = np.asarray(k), np.asarray(l)
    return ck * k**2 / (1 - k**2) + cl * l**2 / (1 - l**2)


def integrand(k, l, k0: float, l0: float, signature: str = EUCLIDEAN):
    return np.exp(1j * action(k, l, k0, l0, signature))


def axis_rule(rule: str, n: int, c: float) -> tuple:
    """Nodes in k (possibly complex) and weights including the Jacobian."""
    t, w = roots_legendre(n)
    if rule == "legendre":
        return t.astype(complex), w.astype(complex)
    if rule == "tanh":
        u, wu = _TANH_CUTOFF * t, _TANH_CUTOFF * w
        return np.tanh(u).astype(complex), (wu / np.cosh(u) ** 2).astype(complex)
    if rule == "contour":
        # t = sinh(v) compresses the algebraic tail that matters for small |c|
        half = math.asinh(math.sqrt(_GAUSS_CUTOFF / abs(c)))
        v, wv = half * t, half * w
        rot = np.exp(1j * math.copysign(math.pi / 4, c))
        s = rot * np.sinh(v)
        root = np.sqrt(1 + s**2)
        return s / root, rot * np.cosh(v) * wv / root**3
    raise ValueError(f"unknown rule {rule!r}")


def _tensor_sum(values, wk, wl, deterministic: bool) -> tuple:
    """Weighted sum and a bound on its rounding error."""
    terms = wk[:, None] * wl[None, :] * values
    rounding = 4 * terms.size * float(np.finfo(float).eps) * float(np.abs(terms).max())
    if deterministic:
        flat = terms.ravel()
        return complex(math.fsum(flat.real), math.fsum(flat.imag)), rounding
    return complex(terms.sum()), rounding


def _rule_value(spec: QuadratureSpec, n: int, k0, l0, signature, observable) -> tuple:
    ck, cl = couplings(k0, l0, signature)
    k, wk = axis_rule(spec.rule, n, ck)
    l, wl = axis_rule(spec.rule, n, cl)
    K, L = np.meshgrid(k, l, indexing="ij")
    weight = integrand(K, L, k0, l0, signature)
    if observable is not None:
        weight = weight * np.broadcast_to(observable(K, L), K.shape)
    return _tensor_sum(weight, wk, wl, spec.deterministic)


def _refine(spec: QuadratureSpec, evaluate, what: str, relative: bool) -> IntegralResult:
    """Run the refinement sequence until two successive rules agree.

    The error estimate is the last change, floored by the rounding bound of
    the finer sum. With ``relative`` false the tolerance is absolute for
    values below one, so expectations that vanish by symmetry converge.
    """
    trace = []
    prev = None
    for n in spec.sequence():
        value, rounding = evaluate(n)
        err = None if prev is None else max(abs(value - prev), rounding)
        trace.append({"points": n, "value": [value.real, value.imag], "change": err})
        scale = abs(value) if relative else max(abs(value), 1.0)
        if err is not None and err <= spec.target_rel_error * scale:
            return IntegralResult(value, err, n, trace)
        prev = value
    raise ConvergenceError(
        f"{what} did not reach relative error {spec.target_rel_error:g} "
        f"with rule {spec.rule!r} by {trace[-1]['points']} points per axis", trace)


def partition_integral(spec: QuadratureSpec, k0: float, l0: float,
                       signature: str = EUCLIDEAN) -> IntegralResult:
    """``Z = int int dk dl exp(i S(k, l))`` with a refinement error estimate."""
    return _refine(spec, lambda n: _rule_value(spec, n, k0, l0, signature, None),
                   "partition integral", relative=True)


def expectation(observable, spec: QuadratureSpec, k0: float, l0: float,
                signature: str = EUCLIDEAN) -> IntegralResult:
    """``<O> = int O e^{iS} / int e^{iS}`` using the same rule for both.

    The estimated error is the change of the ratio under refinement.
    Expectations below one in magnitude are judged in absolute terms, so
    odd observables, which vanish by symmetry, still converge.
    """
    def ratio(n):
        z, z_round = _rule_value(spec, n, k0, l0, signature, None)
        if abs(z) < ILL_CONDITIONED:
            raise IllConditionedNormalization(
                f"|Z| = {abs(z):.3e} is below {ILL_CONDITIONED:g}; expectation undefined")
        num, num_round = _rule_value(spec, n, k0, l0, signature, observable)
        value = num / z
        return value, (num_round + abs(value) * z_round) / abs(z)

    return _refine(spec, ratio, "expectation", relative=False)


def _obs_action(k0, l0, signature):
    return lambda k, l: action(k, l, k0, l0, signature)


OBSERVABLES = {
    "1": lambda k, l: np.ones_like(k),
    "k": lambda k, l: k,
    "l": lambda k, l: l,
    "k2": lambda k, l: k**2,
    "l2": lambda k, l: l**2,
}


def named_observable(name: str, k0: float, l0: float, signature: str = EUCLIDEAN):
    if name == "action":
        return _obs_action(k0, l0, signature)
    try:
        return OBSERVABLES[name]
    except KeyError:
        raise ValueError(f"unknown observable {name!r}; choose from "
                         f"{sorted([*OBSERVABLES, 'action'])}") from None
