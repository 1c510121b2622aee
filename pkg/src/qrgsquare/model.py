"""Closed-form gravity model on the square: the QLC family and its invariants."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import partial, plane_waves, shift
from .geometry import (
    Connection,
    Metric,
    curvature,
    laplacian,
    make_metric,
    ricci,
    scalar_curvature,
)
from .scalars import FLOAT, EXACT, Phase, Regime, exact, real_part, to_complex


class SignatureError(ValueError):
    pass


class AdmissibilityError(ValueError):
    pass


EUCLIDEAN = "euclidean"
MINKOWSKI = "minkowski"


@dataclass(frozen=True)
class ModelParams:
    """Symmetric metric ``a = (a00, a01, a00, a01)``, ``b = (b00, b00, b10, b10)`` and q.

    ``q`` may be a :class:`Phase` or any nonzero number; off the unit circle
    the connection is still a QLC but fails the reality condition.
    """

    a00: object
    a01: object
    b00: object
    b10: object
    q: object = 1
    regime: Regime = FLOAT

    def __post_init__(self):
        for name in ("a00", "a01", "b00", "b10"):
            if real_part(self.regime.scalar(getattr(self, name))) == 0:
                raise ValueError(f"metric value {name} must be nonzero")

    @property
    def q_value(self):
        q = self.q.value if isinstance(self.q, Phase) else self.q
        return self.regime.scalar(q)

    @property
    def a(self):
        return self.regime.array([self.a00, self.a01, self.a00, self.a01])

    @property
    def b(self):
        return self.regime.array([self.b00, self.b00, self.b10, self.b10])

    @property
    def Q(self):
        q = self.q_value
        return self.regime.array([q, 1 / q, 1 / q, q])

    @property
    def alpha(self):
        a00, a01 = self.regime.scalar(self.a00), self.regime.scalar(self.a01)
        return self.regime.array([a01 / a00, 1, 1, a00 / a01])

    @property
    def beta(self):
        b00, b10 = self.regime.scalar(self.b00), self.regime.scalar(self.b10)
        return self.regime.array([1, b10 / b00, b00 / b10, 1])

    def metric(self) -> Metric:
        return make_metric(self.a, self.b, self.regime)

    def with_q(self, q) -> "ModelParams":
        return ModelParams(self.a00, self.a01, self.b00, self.b10, q, self.regime)


def params_from_metric(metric: Metric, q=1) -> ModelParams:
    if not metric.symmetric:
        raise ValueError("metric is not in the symmetric case")
    a, b = metric.a, metric.b
    return ModelParams(a[0], a[1], b[0], b[2], q, metric.regime)


def qlc_family_coefficients(p: ModelParams) -> np.ndarray:
    a, b, Q, al, be = p.a, p.b, p.Q, p.alpha, p.beta
    C = p.regime.zeros((2, 2, 2, 4))
    C[0, 0, 0] = 1 + 1 / Q
    C[0, 0, 1] = C[0, 1, 0] = 1 - al
    C[0, 1, 1] = -(b / a) * (shift(2, be) - 1)
    C[1, 0, 0] = -(a / b) * (shift(1, al) - 1)
    C[1, 0, 1] = C[1, 1, 0] = 1 - be
    C[1, 1, 1] = 1 - Q
    return C


def sigma_matrix(p: ModelParams) -> np.ndarray:
    """The site-dependent 4x4 braiding, multi-index order 11, 12, 21, 22.

    Columns are inputs, rows outputs: column 11 lists sigma(e1 (x) e1).
    Returned with shape (4, 4, 4), the last axis over sites.
    """
    a, b, Q, al, be = p.a, p.b, p.Q, p.alpha, p.beta
    zero = a * 0
    rows = [
        [-1 / Q, zero, zero, a * (shift(1, al) - 1) / b],
        [zero, al - 1, be, zero],
        [zero, al, be - 1, zero],
        [b * (shift(2, be) - 1) / a, zero, zero, Q],
    ]
    return np.array([[np.asarray(entry) for entry in row] for row in rows])


def sigma_from_matrix(mat) -> np.ndarray:
    """Reshape a (4, 4, 4) braiding matrix to ``sigma[i, j, k, l]`` form."""
    sigma = np.empty((2, 2, 2, 2, 4), dtype=mat.dtype)
    for r in range(4):
        for c in range(4):
            sigma[c // 2, c % 2, r // 2, r % 2] = mat[r, c]
    return sigma


def qlc_family(p: ModelParams) -> Connection:
    """The one-parameter family of quantum Levi-Civita connections, in closed form."""
    return Connection(qlc_family_coefficients(p), sigma_from_matrix(sigma_matrix(p)),
                      complex(to_complex(p.q_value)))


def sigma_spectrum(p: ModelParams) -> list:
    """Eigenvalues of the braiding matrix at each site (floating)."""
    mat = to_complex(sigma_matrix(p))
    return [np.linalg.eigvals(mat[:, :, x]) for x in range(4)]


def sigma_spectrum_expected(p: ModelParams) -> list:
    Q, ab = to_complex(p.Q), to_complex(p.alpha * p.beta)
    return [np.array([-1, ab[x], -1 / Q[x], Q[x]]) for x in range(4)]


# -- curvature in closed form ------------------------------------------------

def rho_first_row(a, b, Q, al, be, R1, R2) -> tuple:
    """Closed-form ``(rho_11, rho_12)`` with the shifts passed in.

    Passing swapped arguments (b, a, -1/Q, beta, alpha, R2, R1) gives the
    interchanged expressions, which is how the second row is obtained.
    """
    r11 = (R1(al) / Q - Q * al + (1 - al) * (R1(be) - 1)
           + R2(a) / a * (R2(be) - 1) * (R2(R1(al)) - 1))
    r12 = ((1 - al) / Q + al * (R2(al) - 1) + R1(b) / a * (1 / be - 1) / Q
           + b / a * (R2(be) - 1) * R2(be))
    return r11, r12


def _R1(f):
    return shift(1, f)


def _R2(f):
    return shift(2, f)


def curvature_closed_form(p: ModelParams) -> np.ndarray:
    """``rho[i, n]`` from the closed-form expressions for R e1.

    R e2 follows by the interchange e1<->e2, R1<->R2, alpha<->beta, a<->b,
    Q -> -1/Q, under which Vol changes sign.
    """
    a, b, Q, al, be = p.a, p.b, p.Q, p.alpha, p.beta
    r11, r12 = rho_first_row(a, b, Q, al, be, _R1, _R2)
    s11, s12 = rho_first_row(b, a, -1 / Q, be, al, _R2, _R1)
    return np.array([[r11, r12], [-s12, -s11]])


def ricci_q1_closed_form(p: ModelParams) -> np.ndarray:
    """Ricci coefficients at q = 1 as a (2, 2, 4) array."""
    a, b, al, be = p.a, p.b, p.alpha, p.beta
    chi = plane_waves(p.regime)[3]
    d2a, d1b = partial(2, a), partial(1, b)
    diag_core = -d2a / al + chi * d1b / be
    return np.array([
        [diag_core / b / 2, -d1b / b * (al + 1 / al - chi - 2) / 2],
        [-d2a / a * (be + 1 / be - chi - 2) / 2, diag_core / a / 2],
    ])


def scalar_curvature_q1_closed_form(p: ModelParams):
    """Pointwise scalar curvature from the closed-form general-q expression.

    Only valid at q = 1; for other q it disagrees with the curvature it is
    meant to contract (see ``scalar_curvature_closed_form``).
    """
    a, b, al, be = p.a, p.b, p.alpha, p.beta
    q = p.q_value
    chi = plane_waves(p.regime)[3]
    return -((3 + q + (1 - q) * chi) * partial(2, a) / al
             + (1 - 1 / q - (3 + 1 / q) * chi) * partial(1, b) / be) / (4 * a * b)


def scalar_curvature_closed_form(p: ModelParams):
    """``S = (-R2 rho21 / a + R1 rho12 / b) / 2`` from the closed-form rho."""
    rho = curvature_closed_form(p)
    return (-shift(2, rho[1, 0]) / p.a + shift(1, rho[0, 1]) / p.b) / 2


def scalar_curvature_of(p: ModelParams):
    """S computed through the full pipeline: family, curvature, Ricci, contraction."""
    conn = qlc_family(p)
    g = p.metric()
    return scalar_curvature(ricci(conn, g), g)


def laplacian_closed_form(p: ModelParams, f):
    a, b, Q, al, be = p.a, p.b, p.Q, p.alpha, p.beta
    return (1 / Q - shift(2, be)) / a * partial(1, f) - (Q + shift(1, al)) / b * partial(2, f)


# -- action -------------------------------------------------------------------

def signature_of(p: ModelParams) -> str:
    return _signature_of_values(*(real_part(p.regime.scalar(v))
                                  for v in (p.a00, p.a01, p.b00, p.b10)))


def _check_signature(p: ModelParams, signature: str | None) -> str:
    actual = signature_of(p)
    if signature is not None and signature != actual:
        raise SignatureError(f"declared {signature} but metric signs are {actual}")
    return actual


def measure(p: ModelParams, kind: str = "abs_ab"):
    """Integration measure: ``|ab|`` (default), ``1`` or ``sqrt|ab|``."""
    ab = p.a * p.b
    sign = 1 if signature_of(p) == EUCLIDEAN else -1
    if kind == "abs_ab":
        return sign * ab
    if kind == "one":
        return ab * 0 + 1
    if kind == "sqrt_abs_ab":
        return np.sqrt(np.abs(to_complex(ab)))
    raise ValueError(f"unknown measure {kind!r}")


def _signature_of_values(a00, a01, b00, b10) -> str:
    a_pos, b_pos = (a00 > 0, a01 > 0), (b00 > 0, b10 > 0)
    if all(a_pos) and all(b_pos):
        return EUCLIDEAN
    if not any(a_pos) and all(b_pos):
        return MINKOWSKI
    raise SignatureError("metric signs match neither a, b > 0 nor a < 0 < b")


def eh_action_closed_form(a00, a01, b00, b10, signature: str | None = None):
    """``sum mu S`` in closed form. Minkowski (mu = -ab) flips the overall sign."""
    actual = _signature_of_values(a00, a01, b00, b10)
    if signature is not None and signature != actual:
        raise SignatureError(f"declared {signature} but metric signs are {actual}")
    value = (a00 - a01) ** 2 * (1 / a00 + 1 / a01) + (b00 - b10) ** 2 * (1 / b00 + 1 / b10)
    return value if actual == EUCLIDEAN else -value


def eh_action(p: ModelParams, signature: str | None = None, measure_kind: str = "abs_ab"):
    """``sum_x mu(x) S(x)`` via the curvature pipeline for the QLC at ``p.q``.

    With the default measure the result is real: a Fraction in the exact
    regime, a float otherwise. Other measures return the complex sum.
    """
    _check_signature(p, signature)
    total = np.sum(measure(p, measure_kind) * scalar_curvature_of(p))
    if measure_kind != "abs_ab":
        return complex(to_complex(total))
    if p.regime.exact:
        total = exact(total)
        if total.y != 0:
            raise ArithmeticError("action acquired an imaginary part")
        return real_part(total)
    return complex(to_complex(total)).real


# -- momentum space -----------------------------------------------------------

@dataclass(frozen=True)
class MomentumParams:
    """``a = k0 + k1 psi``, ``b = l0 + l1 phi`` with a signature."""

    k0: float
    k1: float
    l0: float
    l1: float
    signature: str = EUCLIDEAN

    def __post_init__(self):
        if self.signature not in (EUCLIDEAN, MINKOWSKI):
            raise ValueError(f"unknown signature {self.signature!r}")
        if self.signature == EUCLIDEAN:
            ok = self.k0 > 0 and self.l0 > 0 and abs(self.k1) < self.k0 and abs(self.l1) < self.l0
        else:
            ok = self.k0 < 0 and self.l0 > 0 and abs(self.k1) < -self.k0 and abs(self.l1) < self.l0
        if not ok:
            raise AdmissibilityError(
                f"({self.k0}, {self.k1}, {self.l0}, {self.l1}) is not admissible "
                f"for {self.signature} signature (need |k| < 1, |l| < 1 and the sign pattern)")

    @classmethod
    def from_relative(cls, k0, l0, k, l, signature: str = EUCLIDEAN) -> "MomentumParams":
        return cls(k0, k * k0, l0, l * l0, signature)

    @property
    def k(self):
        return self.k1 / self.k0

    @property
    def l(self):
        return self.l1 / self.l0

    @property
    def k0_tilde(self):
        return -self.k0


def momentum_to_metric(m: MomentumParams) -> tuple:
    """``(a00, a01, b00, b10)``: psi is +1 at 00 and -1 at 01, phi is -1 at 10."""
    return (m.k0 + m.k1, m.k0 - m.k1, m.l0 + m.l1, m.l0 - m.l1)


def metric_to_momentum(a00, a01, b00, b10, signature: str | None = None) -> MomentumParams:
    if signature is None:
        signature = EUCLIDEAN if a00 > 0 else MINKOWSKI
    return MomentumParams((a00 + a01) / 2, (a00 - a01) / 2, (b00 + b10) / 2,
                          (b00 - b10) / 2, signature)


def action_kl(m: MomentumParams):
    k, l = m.k, m.l
    if m.signature == EUCLIDEAN:
        return 8 * (m.k0 * k ** 2 / (1 - k ** 2) + m.l0 * l ** 2 / (1 - l ** 2))
    return 8 * (m.k0_tilde * k ** 2 / (1 - k ** 2) - m.l0 * l ** 2 / (1 - l ** 2))


def action_kl_series(m: MomentumParams, order: int = 6):
    """Geometric expansion of ``action_kl`` truncated after k^order, l^order."""
    kc = m.k0 if m.signature == EUCLIDEAN else m.k0_tilde
    lc = m.l0 if m.signature == EUCLIDEAN else -m.l0
    powers = range(2, order + 1, 2)
    return 8 * (kc * sum(m.k ** n for n in powers) + lc * sum(m.l ** n for n in powers))


# -- Laplacian spectrum ---------------------------------------------------------

def laplacian_matrix(m: MomentumParams, q) -> np.ndarray:
    """Matrix of Delta in the site basis (column s is Delta of delta_s)."""
    p = ModelParams(*momentum_to_metric(m), q)
    conn, g = qlc_family(p), p.metric()
    return np.stack([laplacian(conn, g, np.eye(4, dtype=complex)[s]) for s in range(4)], axis=1)


def _plane_wave_basis() -> np.ndarray:
    one, phi, psi, chi = plane_waves(FLOAT)
    return np.stack([one, phi, psi, chi], axis=1)


def laplacian_plane_wave_block(m: MomentumParams, q) -> np.ndarray:
    """3x3 block of Delta on span(phi, psi, chi).

    Delta(1) = 0, so in the basis (1, phi, psi, chi) the matrix is block upper
    triangular and this block carries the three nonzero branches.
    """
    P = _plane_wave_basis()
    M = np.linalg.solve(P, laplacian_matrix(m, q) @ P)
    return M[1:, 1:]


def sort_eigenvalues(values, decimals: int = 9) -> np.ndarray:
    """Ascending real part, ties broken by imaginary part."""
    values = np.asarray(values, dtype=complex)
    order = np.lexsort((np.round(values.imag, decimals), np.round(values.real, decimals)))
    return values[order]


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray      # all four, sorted
    branches: np.ndarray         # the three from the plane-wave block, sorted
    complex_pair: bool           # True if two branches are a non-real conjugate pair


def laplacian_spectrum(m: MomentumParams, q, imag_tol: float = 1e-9) -> Spectrum:
    full = sort_eigenvalues(np.linalg.eigvals(laplacian_matrix(m, q)))
    branches = sort_eigenvalues(np.linalg.eigvals(laplacian_plane_wave_block(m, q)))
    nonreal = np.abs(branches.imag) > imag_tol
    return Spectrum(full, branches, bool(nonreal.sum() == 2))


def spectra_match(x, y, tol: float = 1e-9) -> bool:
    """Multiset equality of two eigenvalue lists by greedy nearest matching."""
    remaining = list(np.asarray(y, dtype=complex))
    for v in np.asarray(x, dtype=complex):
        if not remaining:
            return False
        j = int(np.argmin([abs(v - w) for w in remaining]))
        if abs(v - remaining[j]) > tol * max(1.0, abs(v)):
            return False
        remaining.pop(j)
    return not remaining


def dual_momentum(m: MomentumParams, q) -> tuple:
    """The partner (l0, k0, -q; l, -k) with the same Laplacian eigenvalues."""
    return MomentumParams.from_relative(m.l0, m.k0, m.l, -m.k), -complex(q)
