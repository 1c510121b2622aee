"""Numerical search for quantum Levi-Civita connections of a symmetric metric.

Unknowns are the 32 complex values ``C_i^{jk}(x)``. Torsion freedom is the
linear condition ``C_i^{12} = C_i^{21}``, imposed by parametrising only the
symmetric part (24 unknowns). The remaining conditions, nabla g = 0 and the
existence of a bimodule braiding, are polynomial of degree two in C because
sigma depends affinely on C. They are solved by damped Gauss-Newton from
random seeds, with a metric-deformation continuation as fallback.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    Connection,
    Metric,
    nabla_g,
    qlc_residuals,
    sigma_candidate,
    sigma_residuals,
    torsion,
)
from .model import ModelParams, params_from_metric, qlc_family, qlc_family_coefficients
from .scalars import FLOAT, RESIDUAL_TOL, to_complex

log = logging.getLogger(__name__)

N_UNKNOWNS = 24
POLISH_TOL = 1e-14
# Newton lands within ~sqrt(residual) of the family, which is a singular
# part of the solution set; points this close are snapped onto it.
SNAP_TOL = 1e-5


class NonSymmetricMetric(ValueError):
    pass


class SolverFailure(RuntimeError):
    def __init__(self, message: str, best_residual: float):
        super().__init__(message)
        self.best_residual = best_residual


def unpack(x) -> np.ndarray:
    """(..., 24) unknowns -> (..., 2, 2, 2, 4) torsion-free coefficients."""
    x = np.asarray(x).reshape(x.shape[:-1] + (2, 3, 4))
    C = np.empty(x.shape[:-3] + (2, 2, 2, 4), dtype=complex)
    C[..., 0, 0, :] = x[..., 0, :]
    C[..., 0, 1, :] = x[..., 1, :]
    C[..., 1, 0, :] = x[..., 1, :]
    C[..., 1, 1, :] = x[..., 2, :]
    return C


def pack(C) -> np.ndarray:
    C = np.asarray(C)
    sym = (C[..., 0, 1, :] + C[..., 1, 0, :]) / 2
    return np.stack([C[..., 0, 0, :], sym, C[..., 1, 1, :]], axis=-2).reshape(C.shape[:-4] + (N_UNKNOWNS,))


def residual(x, metric: Metric) -> np.ndarray:
    """Stacked defects of nabla g = 0 and sigma consistency, batched over x."""
    C = unpack(x)
    sigma = sigma_candidate(C)
    conn = Connection(C, sigma)
    batch = C.shape[:-4]
    ng = nabla_g(conn, metric).reshape(batch + (-1,))
    return np.concatenate([ng, sigma_residuals(C, sigma),
                           torsion(C).reshape(batch + (-1,))], axis=-1)


def jacobian(x, metric: Metric) -> np.ndarray:
    """Exact Jacobian of the quadratic residual by unit central differences.

    For a polynomial of degree two, ``(r(x + e) - r(x - e)) / 2`` equals the
    directional derivative exactly, so no step-size tuning is involved.
    Batched: x of shape (..., 24) gives (..., n_residuals, 24).
    """
    x = np.asarray(x, dtype=complex)
    eye = np.eye(N_UNKNOWNS, dtype=complex)
    plus = residual(x[..., None, :] + eye, metric)
    minus = residual(x[..., None, :] - eye, metric)
    return np.swapaxes((plus - minus) / 2, -1, -2)


def _maxabs_rows(r) -> np.ndarray:
    return np.max(np.abs(r), axis=-1)


def _newton(x, metric: Metric, tol: float, max_iter: int):
    """Damped Gauss-Newton with minimum-norm steps, batched over seeds.

    Steps are accepted when they lower the 2-norm of the residual; the
    stopping test uses the sup norm. Iteration continues past ``tol`` down to
    ``POLISH_TOL`` while the residual keeps shrinking, since convergence
    onto a singular part of the solution set is only linear. Returns the
    final points and their sup residuals.
    """
    x = np.array(x, dtype=complex)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    target = min(tol, POLISH_TOL)
    r = residual(x, metric)
    err = _maxabs_rows(r)
    merit = np.linalg.norm(r, axis=-1)
    slow = np.zeros(len(x), dtype=int)
    active = np.ones(len(x), dtype=bool)
    for _ in range(max_iter):
        active &= ~((err < target) | ((err < tol) & (slow >= 3)))
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        J = jacobian(x[idx], metric)
        step = -np.einsum("sij,sj->si", np.linalg.pinv(J, rcond=1e-12), r[idx])
        t = np.ones(idx.size)
        pending = np.ones(idx.size, dtype=bool)
        x_new, r_new = x[idx].copy(), r[idx].copy()
        for _ in range(20):
            p = np.flatnonzero(pending)
            if p.size == 0:
                break
            cand = x[idx[p]] + t[p, None] * step[p]
            rc = residual(cand, metric)
            ok = np.linalg.norm(rc, axis=-1) < merit[idx[p]]
            x_new[p[ok]], r_new[p[ok]] = cand[ok], rc[ok]
            pending[p[ok]] = False
            t[p[~ok]] /= 2
        # no descent along the Gauss-Newton direction: the seed has stalled
        active[idx[pending]] = False
        moved = idx[~pending]
        e_new = _maxabs_rows(r_new[~pending])
        slow[moved] = np.where(e_new > 0.5 * err[moved], slow[moved] + 1, 0)
        x[moved], r[moved], err[moved] = x_new[~pending], r_new[~pending], e_new
        merit[moved] = np.linalg.norm(r[moved], axis=-1)
    return (x[0], float(err[0])) if single else (x, err)


def _family_point(a, b, q) -> np.ndarray:
    return pack(qlc_family_coefficients(ModelParams(a[0], a[1], b[0], b[2], q)))


def _continuation(x_seeds, metric: Metric, q_seeds, tol: float, max_iter: int,
                  steps: int = 20, nudge: float = 1e-3):
    """Deform from the averaged constant metric to ``metric``, correcting by Newton.

    Each seed starts on the family at its own q, displaced slightly towards
    its random start. The predictor moves every point by the change of the
    family member at its current fitted q, so points on the family stay on
    it and points near it stay near it.
    """
    a, b = metric.a, metric.b
    a_bar, b_bar = np.full(4, a.mean()), np.full(4, b.mean())
    q = np.asarray(q_seeds, dtype=complex)
    x = np.array([_family_point(a_bar, b_bar, qk) for qk in q]).reshape(-1, N_UNKNOWNS)
    x = x + nudge * (x_seeds - x_seeds.mean(axis=-1, keepdims=True))
    err = np.full(len(x), np.inf)
    prev_a, prev_b = a_bar, b_bar
    for t in np.linspace(0.0, 1.0, steps + 1)[1:]:
        a_t, b_t = (1 - t) * a_bar + t * a, (1 - t) * b_bar + t * b
        for k in range(len(x)):
            qk = fit_q(unpack(x[k])) or q[k]
            x[k] = x[k] + _family_point(a_t, b_t, qk) - _family_point(prev_a, prev_b, qk)
        x, err = _newton(x, Metric(a_t, b_t), tol, max_iter)
        prev_a, prev_b = a_t, b_t
    return x, err


@dataclass
class Solution:
    connection: Connection
    residuals: dict
    q_fit: complex | None
    family_distance: float | None
    in_family: bool
    seed: int
    method: str

    @property
    def residual(self) -> float:
        return max(self.residuals.values())

    def to_dict(self) -> dict:
        out = self.connection.to_dict()
        out.update({
            "residuals": self.residuals,
            "family_distance": self.family_distance,
            "in_family": self.in_family,
            "seed": self.seed,
            "method": self.method,
        })
        return out


@dataclass
class SolveReport:
    solutions: list
    best_residual: float
    seeds: int
    converged: int
    findings: list = field(default_factory=list)


def fit_q(C) -> complex | None:
    """q from the e1 (x) e1 coefficient of nabla e1 at site 00, which is 1 + 1/q."""
    c = complex(C[0, 0, 0, 0]) - 1
    return None if abs(c) < 1e-14 else 1 / c


def family_distance(C, metric: Metric, q) -> float | None:
    if q is None:
        return None
    ref = qlc_family_coefficients(params_from_metric(metric, q))
    return float(np.max(np.abs(np.asarray(C) - ref)))


def _seed_points(n: int, rng: np.random.Generator, radius: float, center: np.ndarray):
    dirs = rng.normal(size=(n, 2 * N_UNKNOWNS))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = radius * rng.uniform(size=(n, 1)) ** (1 / (2 * N_UNKNOWNS))
    v = dirs * radii
    return center + v[:, :N_UNKNOWNS] + 1j * v[:, N_UNKNOWNS:], rng.uniform(0, 2 * np.pi, n)


def qlc_solve(metric: Metric, seeds: int = 32, tol: float = RESIDUAL_TOL, *,
              rng: int | np.random.Generator = 0, radius: float = 1.0,
              max_iter: int = 60, match_tol: float = 1e-8, dedupe_tol: float = 1e-6) -> SolveReport:
    """Search for QLCs of a symmetric metric from ``seeds`` random starts.

    Seeds are uniform in a ball of ``radius`` around the q = 1 member of the
    closed-form family. Each converged solution is tagged with the q fitted
    from its coefficients and its sup-distance to the family member at that
    q; solutions farther than ``match_tol`` are kept and reported in
    ``findings`` rather than dropped. Seeds are independent and run as one
    vectorised batch; the result order depends only on the solutions.
    """
    if metric.regime.exact:
        metric = Metric(to_complex(metric.a), to_complex(metric.b))
    if not metric.symmetric:
        raise NonSymmetricMetric(
            "QLC search is only defined for symmetric metrics (d^1 a = d^2 b = 0)")
    rng = np.random.default_rng(rng)
    center = pack(qlc_family_coefficients(params_from_metric(metric, 1)))
    starts, phases = _seed_points(seeds, rng, radius, center)

    xs, errs = _newton(starts, metric, tol, max_iter)
    methods = ["newton"] * seeds
    failed = np.flatnonzero(~(errs < tol))
    if failed.size:
        log.info("%d of %d seeds stalled; trying continuation", failed.size, seeds)
        x_c, err_c = _continuation(starts[failed], metric, np.exp(1j * phases[failed]), tol, max_iter)
        for n, k in enumerate(failed):
            if err_c[n] < errs[k]:
                xs[k], errs[k], methods[k] = x_c[n], err_c[n], "continuation"
    results = [(k, xs[k], float(errs[k]), methods[k]) for k in range(seeds)]

    best = min(err for _, _, err, _ in results)
    found = []
    for k, x, err, method in results:
        if not err < tol:
            log.debug("seed %d stalled at residual %.3e", k, err)
            continue
        found.append(_classify(unpack(x), metric, k, method, tol, match_tol))
    if not found:
        raise SolverFailure(f"no seed reached residual {tol:g}; best was {best:.3e}", best)

    found.sort(key=_sort_key)
    unique = []
    for sol in found:
        if all(np.max(np.abs(sol.connection.C - u.connection.C)) > dedupe_tol for u in unique):
            unique.append(sol)

    findings = [
        f"seed {s.seed}: QLC outside the closed-form family "
        f"(q_fit={_fmt(s.q_fit)}, distance {s.family_distance:.3e}, residual {s.residual:.1e})"
        for s in unique if not s.in_family and s.family_distance is not None
    ]
    findings += [f"seed {s.seed}: QLC with no finite fitted q" for s in unique if s.q_fit is None]
    return SolveReport(unique, best, seeds, len(found), findings)


def _classify(C, metric: Metric, seed: int, method: str, tol: float, match_tol: float) -> Solution:
    q = fit_q(C)
    dist = family_distance(C, metric, q)
    info = {"raw_family_distance": dist}
    if dist is not None and match_tol < dist <= SNAP_TOL:
        snapped = qlc_family_coefficients(params_from_metric(metric, q))
        if max(qlc_residuals(Connection(snapped), metric).values()) < tol:
            C, info["snapped"] = snapped, True
            dist = family_distance(C, metric, q)
    conn = Connection(C, sigma_candidate(C), q, info)
    return Solution(
        connection=conn,
        residuals=qlc_residuals(conn, metric),
        q_fit=q,
        family_distance=dist,
        in_family=dist is not None and dist <= match_tol,
        seed=seed,
        method=method,
    )


def _sort_key(sol: Solution):
    q = sol.q_fit if sol.q_fit is not None else complex(np.inf, np.inf)
    coeffs = sol.connection.C.ravel()
    return (round(q.real, 9), round(q.imag, 9),
            tuple(np.round(coeffs.real, 9)), tuple(np.round(coeffs.imag, 9)))


def _fmt(q) -> str:
    return "none" if q is None else f"{q.real:.6g}{q.imag:+.6g}j"


def family_solution(metric: Metric, q) -> Connection:
    """Closed-form member at ``q`` in the metric's regime."""
    return qlc_family(params_from_metric(metric, q))


__all__ = [
    "NonSymmetricMetric", "SolverFailure", "Solution", "SolveReport", "qlc_solve",
    "residual", "jacobian", "pack", "unpack", "fit_q", "family_distance", "family_solution",
    "FLOAT",
]
