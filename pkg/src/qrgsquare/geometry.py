"""Quantum Riemannian geometry on the square calculus.

A connection is stored by its left coefficients ``C[i, j, k]`` with
``nabla e_i = sum_jk C[i, j, k] e_j (x) e_k`` (indices 0-based here, so
``C[0]`` describes nabla e1). Its generalised braiding, when it exists, is
``sigma[i, j, k, l]``: the coefficient of ``e_k (x) e_l`` in
``sigma(e_i (x) e_j)``. Leading batch axes broadcast everywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .calculus import (
    bitensor_right_multiply,
    bitensor_wedge,
    d0,
    d1,
    dagger,
    partial,
    plane_waves,
    shift,
    sitefn_from_list,
    sitefn_to_list,
)
from .scalars import FLOAT, RESIDUAL_TOL, Regime, regime_of, to_complex


class DegenerateMetric(ValueError):
    pass


class NotBimoduleConnection(ValueError):
    pass


# -- metric ---------------------------------------------------------------

@dataclass(frozen=True)
class Metric:
    """``g = a e1 (x) e1 + b e2 (x) e2`` with a, b nowhere zero."""

    a: np.ndarray
    b: np.ndarray

    @property
    def regime(self) -> Regime:
        return regime_of(self.a)

    def component(self, i: int):
        return self.a if i == 0 else self.b

    def bitensor(self):
        zero = self.a * 0
        return np.stack([np.stack([self.a, zero], axis=-2),
                         np.stack([zero, self.b], axis=-2)], axis=-3)

    def inverse(self):
        """``(e_i, e_j)`` as a ``(..., 2, 2, 4)`` array: diag(1/R1 a, 1/R2 b)."""
        inv_a, inv_b = 1 / shift(1, self.a), 1 / shift(2, self.b)
        zero = inv_a * 0
        return np.stack([np.stack([inv_a, zero], axis=-2),
                         np.stack([zero, inv_b], axis=-2)], axis=-3)

    def pair(self, t):
        """Apply the inverse metric ``( , )`` to a bitensor."""
        inv = self.inverse()
        return sum(t[..., i, j, :] * inv[..., i, j, :] for i in range(2) for j in range(2))

    @property
    def symmetric(self) -> bool:
        """Edge weights independent of arrow direction: d^1 a = d^2 b = 0."""
        return self.regime.is_zero(partial(1, self.a)) and self.regime.is_zero(partial(2, self.b))

    def is_central(self) -> bool:
        g = self.bitensor()
        return all(self.regime.is_zero(bitensor_right_multiply(g, f) - f * g)
                   for f in plane_waves(self.regime)[1:])

    def is_quantum_symmetric(self) -> bool:
        return self.regime.is_zero(bitensor_wedge(self.bitensor()))

    def is_real(self) -> bool:
        g = self.bitensor()
        return self.regime.is_zero(dagger(g) - g)


def make_metric(a, b, regime: Regime | None = None) -> Metric:
    regime = regime or (regime_of(a) if np.asarray(a).dtype == object else FLOAT)
    a, b = regime.array(a), regime.array(b)
    for name, v in (("a", a), ("b", b)):
        if v.shape[-1] != 4:
            raise ValueError(f"{name} must have 4 site values")
        if any(regime.is_zero(np.asarray([x]), 0.0) for x in v.ravel()):
            raise DegenerateMetric(f"metric coefficient {name} vanishes at some site")
    g = Metric(a, b)
    # Automatic for a diagonal metric on this calculus; kept as guards.
    if not g.is_central():
        raise DegenerateMetric("metric is not central")
    if not g.is_quantum_symmetric():
        raise DegenerateMetric("metric is not quantum symmetric")
    return g


# i(Vol) = (e1 (x) e2 - e2 (x) e1)/2, kept as integers over 2 so exact stays exact.
LIFT = np.array([[0, 1], [-1, 0]])
LIFT_DENOMINATOR = 2


# -- connections ------------------------------------------------------------

@dataclass(frozen=True)
class Connection:
    C: np.ndarray
    sigma: np.ndarray | None = None
    q_fit: complex | None = None
    info: dict = field(default_factory=dict, compare=False)

    @property
    def regime(self) -> Regime:
        return regime_of(self.C)

    def with_sigma(self, tol: float | None = None) -> "Connection":
        if self.sigma is not None:
            return self
        return Connection(self.C, derive_sigma(self, tol), self.q_fit, self.info)

    def to_dict(self) -> dict:
        if self.C.ndim != 4:
            raise ValueError("only unbatched connections serialize")
        out = {"C": [[[sitefn_to_list(self.C[i, j, k]) for k in range(2)]
                      for j in range(2)] for i in range(2)]}
        sigma = self.sigma
        out["sigma"] = None if sigma is None else [
            [sitefn_to_list(sigma[r // 2, r % 2, c // 2, c % 2]) for c in range(4)]
            for r in range(4)]
        out["q_fit"] = None if self.q_fit is None else [complex(self.q_fit).real,
                                                        complex(self.q_fit).imag]
        return out

    @classmethod
    def from_dict(cls, data: dict, regime: Regime = FLOAT) -> "Connection":
        C = np.stack([np.stack([np.stack([sitefn_from_list(data["C"][i][j][k], regime)
                                          for k in range(2)]) for j in range(2)])
                      for i in range(2)])
        sigma = None
        if data.get("sigma") is not None:
            sigma = regime.zeros((2, 2, 2, 2, 4))
            for r in range(4):
                for c in range(4):
                    sigma[r // 2, r % 2, c // 2, c % 2] = sitefn_from_list(data["sigma"][r][c], regime)
        q = data.get("q_fit")
        return cls(C, sigma, None if q is None else complex(q[0], q[1]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _coeffs(conn) -> np.ndarray:
    return conn.C if isinstance(conn, Connection) else np.asarray(conn)


def apply_connection(conn, w):
    """``nabla(c_i e_i) = d c_i (x) e_i + c_i nabla e_i``."""
    C = _coeffs(conn)
    dpart = np.stack([np.stack([partial(m + 1, w[..., i, :]) for i in range(2)], axis=-2)
                      for m in range(2)], axis=-3)
    cpart = sum(w[..., i, None, None, :] * C[..., i, :, :, :] for i in range(2))
    return dpart + cpart


def _right_leibniz_defect(C, i: int, f):
    """``nabla(e_i f) - (nabla e_i) f`` for a fixed function f."""
    regime = regime_of(C)
    w = regime.zeros((2, 4))
    w[i] = shift(i + 1, f)
    return apply_connection(C, w) - bitensor_right_multiply(C[..., i, :, :, :], f)


def sigma_candidate(conn) -> np.ndarray:
    """Solve ``sigma(e_i (x) df) = nabla(e_i f) - (nabla e_i) f`` on f = phi, psi.

    ``e_i (x) d phi = R_i(d^1 phi) e_i (x) e1`` with an invertible coefficient,
    and likewise psi for e2, so every ``sigma(e_i (x) e_j)`` is pinned down.
    """
    C = _coeffs(conn)
    _, phi, psi, _ = plane_waves(regime_of(C))
    blocks = []
    for i in range(2):
        row = []
        for m, f in enumerate((phi, psi)):
            row.append(_right_leibniz_defect(C, i, f) / shift(i + 1, partial(m + 1, f)))
        blocks.append(np.stack(row, axis=-4))
    return np.stack(blocks, axis=-5)


def apply_sigma(sigma, t):
    """``sigma(T^{ij} e_i (x) e_j) = T^{ij} sigma(e_i (x) e_j)``."""
    return sum(t[..., i, j, None, None, :] * sigma[..., i, j, :, :, :]
               for i in range(2) for j in range(2))


def sigma_residuals(conn, sigma) -> np.ndarray:
    """Flat array of defects; all zero iff sigma is a valid bimodule map.

    Two checks: the right Leibniz rule on f = chi (phi and psi were used to
    build sigma), and right-linearity ``sigma(t f) = sigma(t) f`` on the
    basis for f in phi, psi, chi.
    """
    C = _coeffs(conn)
    regime = regime_of(C)
    _, phi, psi, chi = plane_waves(regime)
    parts = []
    for i in range(2):
        predicted = sum(shift(i + 1, partial(m + 1, chi))[..., None, None, :] * sigma[..., i, m, :, :, :]
                        for m in range(2))
        parts.append(_right_leibniz_defect(C, i, chi) - predicted)
    for f in (phi, psi, chi):
        for i in range(2):
            for j in range(2):
                shifted = shift(i + 1, shift(j + 1, f))
                lhs = sigma[..., i, j, :, :, :] * shifted
                rhs = bitensor_right_multiply(sigma[..., i, j, :, :, :], f)
                parts.append(lhs - rhs)
    batch = np.broadcast_shapes(*(p.shape[:-3] for p in parts))
    return np.concatenate([np.broadcast_to(p, batch + p.shape[-3:]).reshape(batch + (-1,))
                           for p in parts], axis=-1)


def derive_sigma(conn, tol: float | None = None) -> np.ndarray:
    """Braiding of a bimodule connection; raises if none exists."""
    C = _coeffs(conn)
    sigma = sigma_candidate(C)
    regime = regime_of(C)
    if not regime.is_zero(sigma_residuals(C, sigma), tol if tol is not None else regime.tol):
        raise NotBimoduleConnection("no bimodule map sigma satisfies the right Leibniz rule")
    return sigma


def _require_sigma(conn) -> np.ndarray:
    if not isinstance(conn, Connection) or conn.sigma is None:
        raise NotBimoduleConnection("sigma has not been derived for this connection")
    return conn.sigma


# -- torsion, cotorsion, curvature -------------------------------------------

def torsion(conn):
    """``T e_i = wedge(nabla e_i) - d e_i`` as Vol coefficients, shape (..., 2, 4)."""
    return bitensor_wedge(_coeffs(conn))


def d_minus_wedge_nabla(conn, t):
    """``(d (x) id - id ^ nabla) t`` for a bitensor t; Vol (x) e_n coefficients.

    The left leg is differentiated with d e_i = 0; the right-hand term is
    ``T^{ij} R_i(C_j^{mn}) (e_i ^ e_m) (x) e_n``.
    """
    C = _coeffs(conn)
    out = []
    for n in range(2):
        term = d1(t[..., :, n, :])
        for j in range(2):
            term = term - (t[..., 0, j, :] * shift(1, C[..., j, 1, n, :])
                           - t[..., 1, j, :] * shift(2, C[..., j, 0, n, :]))
        out.append(term)
    return np.stack(out, axis=-2)


def cotorsion(conn, metric: Metric):
    return d_minus_wedge_nabla(conn, metric.bitensor())


def curvature(conn):
    """``rho[i, n]`` with ``R e_i = rho_in Vol (x) e_n``."""
    C = _coeffs(conn)
    return np.stack([d_minus_wedge_nabla(C, C[..., i, :, :, :]) for i in range(2)], axis=-3)


def nabla_bitensor(conn, t):
    """Tensor-product extension of nabla to a bitensor; shape (..., 2, 2, 2, 4).

    ``nabla(w (x) v) = nabla w (x) v + (sigma (x) id)(w (x) nabla v)``.
    """
    C = _coeffs(conn)
    sigma = _require_sigma(conn)
    terms = []
    for i in range(2):
        for j in range(2):
            tij = t[..., i, j, :]
            first = apply_connection(C, _slot(tij, i))  # nabla(T^{ij} e_i)
            terms.append(_outer_last(first, j))
            for m in range(2):
                for n in range(2):
                    coeff = tij * shift(i + 1, C[..., j, m, n, :])
                    terms.append(_outer_last(coeff[..., None, None, :] * sigma[..., i, m, :, :, :], n))
    return sum(terms)


def _slot(f, i):
    zero = f * 0
    return np.stack([f, zero] if i == 0 else [zero, f], axis=-2)


def _outer_last(t, n):
    """Bitensor t (x) e_n as a rank-3 array."""
    zero = t * 0
    return np.stack([t, zero] if n == 0 else [zero, t], axis=-2)


def nabla_g(conn, metric: Metric):
    return nabla_bitensor(conn, metric.bitensor())


def ricci(conn, metric: Metric):
    """``((,) (x) id)(id (x) i (x) id)(id (x) R)(g)`` with the fixed lift i(Vol).

    For ``g = sum g_i e_i (x) e_i`` this is
    ``Ricci^{rn} = sum_i g_i R_i(rho_in) L^{ir} / R_i(g_i)`` with L the lift.
    """
    rho = curvature(conn)
    rows = []
    for r in range(2):
        row = []
        for n in range(2):
            acc = 0
            for i in range(2):
                if LIFT[i, r] == 0:
                    continue
                g_i = metric.component(i)
                acc = acc + int(LIFT[i, r]) * g_i * shift(i + 1, rho[..., i, n, :]) / shift(i + 1, g_i)
            row.append(acc / LIFT_DENOMINATOR)
        rows.append(np.stack(row, axis=-2))
    return np.stack(rows, axis=-3)



def scalar_curvature(ric, metric: Metric):
    return metric.pair(ric)


def laplacian(conn, metric: Metric, f):
    """``Delta f = ( , ) nabla d f``."""
    return metric.pair(apply_connection(conn, d0(f)))


def reality_defect(conn):
    """``nabla(e_i*) - sigma(dagger(nabla e_i))`` for i = 1, 2.

    Checking the basis suffices: the condition then holds on all 1-forms
    because sigma is a bimodule map and d commutes with *.
    """
    C = _coeffs(conn)
    sigma = _require_sigma(conn)
    return np.stack([-C[..., i, :, :, :] - apply_sigma(sigma, dagger(C[..., i, :, :, :]))
                     for i in range(2)], axis=-4)


def connection_reality(conn, tol: float | None = None) -> bool:
    regime = regime_of(_coeffs(conn))
    return regime.is_zero(reality_defect(conn), tol if tol is not None else regime.tol)


def qlc_residuals(conn, metric: Metric) -> dict:
    """Largest defect of each QLC condition (floats)."""
    conn = conn if isinstance(conn, Connection) else Connection(np.asarray(conn))
    sigma = conn.sigma if conn.sigma is not None else sigma_candidate(conn)
    conn = Connection(conn.C, sigma, conn.q_fit)
    return {
        "torsion": _maxabs(torsion(conn)),
        "nabla_g": _maxabs(nabla_g(conn, metric)),
        "sigma": _maxabs(sigma_residuals(conn, sigma)),
    }


def _maxabs(arr) -> float:
    arr = np.asarray(arr)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(to_complex(arr))))


def is_qlc(conn, metric: Metric, tol: float = RESIDUAL_TOL) -> bool:
    if np.asarray(_coeffs(conn)).dtype == object:
        conn = conn if isinstance(conn, Connection) else Connection(np.asarray(conn))
        sigma = sigma_candidate(conn)
        c = Connection(conn.C, sigma)
        regime = regime_of(conn.C)
        return (regime.is_zero(torsion(c)) and regime.is_zero(nabla_g(c, metric))
                and regime.is_zero(sigma_residuals(c, sigma)))
    return max(qlc_residuals(conn, metric).values()) <= tol
