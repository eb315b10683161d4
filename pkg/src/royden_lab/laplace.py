"""Harmonic analysis on circular domains.

Harmonic functions are represented as

    u(w) = Re(sum_k c_k B_k(w)) + sum_j b_j log|w - c_j| + sum_p q_p log|w - p|

with ``B_k`` the scaled Laurent basis of :mod:`royden_lab.series` and the
last sum a fixed set of point sources off the closed domain (used to absorb
the logarithmic singularity of Green's functions).

Sign convention: normal derivatives point into the domain, and the period of
``u`` around hole ``j`` is the flux ``∫_{Γ_j} ∂u/∂n ds``.  Equivalently it is
``-∫_γ ∂u/∂n ds`` over a counterclockwise loop ``γ`` around the hole with
normal ``i·t``, which fixes ``Per(log|w - c_j|, γ_j) = 2π``.  With this
choice the period matrix entry ``p_jk = ∫_Γ h_j ∂h_k/∂n ds`` equals the
period of ``h_k`` around hole ``j``, and the matrix is negative definite.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .config import Tolerances, default_nodes, default_tolerances
from .errors import (
    DomainError,
    IllConditionedError,
    MassError,
    NonzeroPeriodError,
    PeriodMismatchError,
    ResidualError,
    ShapeError,
    SingularMatrixError,
)
from .geometry import BoundaryField, BoundarySampling, CircularDomain, sample_boundary
from .series import AnalyticRep, basis_size, laurent_derivative_matrix, laurent_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HarmonicRep:
    domain: CircularDomain
    K: int
    coeffs: np.ndarray = field(repr=False)  # analytic basis; coeffs[0] is the real constant
    log_coeffs: np.ndarray
    sources: tuple[tuple[complex, float], ...] = ()
    residual: float = 0.0
    condition: float = 1.0

    @property
    def constant(self) -> float:
        return float(self.coeffs[0].real)

    @property
    def outer_coeffs(self) -> np.ndarray:
        return self.coeffs[1 : self.K + 1]

    @property
    def hole_coeffs(self) -> list[np.ndarray]:
        K = self.K
        return [self.coeffs[j * K + 1 : (j + 1) * K + 1] for j in range(1, self.domain.n + 1)]

    def _value(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        u = (laurent_matrix(self.domain, self.K, w) @ self.coeffs).real
        for (c, _), b in zip(self.domain.holes, self.log_coeffs):
            u = u + b * np.log(np.abs(w - c))
        for p, q in self.sources:
            u = u + q * np.log(np.abs(w - p))
        return u

    def complex_gradient(self, w) -> np.ndarray:
        """Derivative ``G`` of the local analytic completion; ``∇u = conj(G)``."""
        w = np.asarray(w, dtype=complex)
        g = laurent_derivative_matrix(self.domain, self.K, w) @ self.coeffs
        for (c, _), b in zip(self.domain.holes, self.log_coeffs):
            g = g + b / (w - c)
        for p, q in self.sources:
            g = g + q / (w - p)
        return g

    def trace(self, s: BoundarySampling) -> BoundaryField:
        return BoundaryField(s, self._value(s.points))

    def __call__(self, w):
        return evaluate_harmonic(self, w)

    def __add__(self, other: "HarmonicRep") -> "HarmonicRep":
        return combine([self, other], [1.0, 1.0])

    def scale(self, factor: float) -> "HarmonicRep":
        return combine([self], [factor])

    def total_log_weight(self, j: int) -> float:
        """Coefficient of ``log|w - c_j|`` plus sources inside hole ``j``."""
        c, r = self.domain.holes[j - 1]
        extra = sum(q for p, q in self.sources if abs(p - c) < r)
        return float(self.log_coeffs[j - 1] + extra)


def _pad(coeffs: np.ndarray, domain: CircularDomain, K_from: int, K_to: int) -> np.ndarray:
    out = np.zeros(basis_size(domain, K_to), dtype=complex)
    out[0] = coeffs[0]
    m = min(K_from, K_to)
    for j in range(domain.n + 1):
        out[j * K_to + 1 : j * K_to + 1 + m] = coeffs[j * K_from + 1 : j * K_from + 1 + m]
    return out


def combine(reps, weights) -> HarmonicRep:
    """Real linear combination of harmonic representations on one domain."""
    reps = list(reps)
    domain = reps[0].domain
    K = max(r.K for r in reps)
    coeffs = np.zeros(basis_size(domain, K), dtype=complex)
    logs = np.zeros(domain.n)
    sources: dict[complex, float] = {}
    residual = 0.0
    for rep, wt in zip(reps, weights):
        coeffs += wt * _pad(rep.coeffs, domain, rep.K, K)
        logs += wt * np.asarray(rep.log_coeffs)
        for p, q in rep.sources:
            sources[p] = sources.get(p, 0.0) + wt * q
        residual += abs(wt) * rep.residual
    srcs = tuple((p, q) for p, q in sources.items() if q != 0.0)
    return HarmonicRep(domain, K, coeffs, logs, srcs, residual)


@dataclass(frozen=True)
class HarmonicUnit:
    """Coefficients ``a`` of the harmonic unit ``sum_j a_j h_j``."""

    a: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.a)):
            raise ValueError("harmonic unit coefficients must be finite")

    def rep(self, basis: list[HarmonicRep]) -> HarmonicRep | None:
        if not len(self.a):
            return None
        return combine(basis, self.a)

    def __neg__(self):
        return HarmonicUnit(-self.a)


@dataclass(frozen=True)
class PeriodMatrix:
    p: np.ndarray
    asymmetry: float
    min_singular_value: float


@dataclass(frozen=True)
class OmegaDensity:
    """Harmonic measure density ``dω/ds`` at the nodes."""

    sampling: BoundarySampling
    values: np.ndarray
    mass: float

    @property
    def weights(self) -> np.ndarray:
        """ω-mass carried by each node."""
        return self.values * self.sampling.weights

    def component_masses(self) -> np.ndarray:
        return self.weights.sum(axis=1)


def _harmonic_columns(domain: CircularDomain, K: int, w: np.ndarray) -> np.ndarray:
    B = laurent_matrix(domain, K, w)
    cols = [np.ones(w.shape + (1,)), B[..., 1:].real, -B[..., 1:].imag]
    if domain.n:
        cols.append(np.stack([np.log(np.abs(w - c)) for c, _ in domain.holes], axis=-1))
    return np.concatenate(cols, axis=-1)


def solve_dirichlet(
    domain: CircularDomain,
    boundary_data: BoundaryField,
    K: int,
    sources=(),
    tol: Tolerances | None = None,
    check_residual: bool = True,
) -> HarmonicRep:
    """Least-squares series solution of the Dirichlet problem.

    ``sources`` are fixed ``(point, weight)`` pairs whose logarithmic
    potentials are subtracted from the data before the fit and kept in the
    returned representation.
    """
    tol = tol or default_tolerances()
    s = boundary_data.sampling
    if s.domain != domain:
        raise ShapeError("boundary data sampled on a different domain")
    if 2 * K + 2 > s.M:
        raise IllConditionedError(f"K={K} needs at least {2 * K + 2} nodes per circle, have {s.M}")
    data = np.asarray(boundary_data.values)
    if np.iscomplexobj(data):
        if np.max(np.abs(data.imag)) > 0:
            raise ValueError("Dirichlet data must be real")
        data = data.real
    w = s.points
    rhs = data.astype(float).copy()
    for p, q in sources:
        rhs -= q * np.log(np.abs(w - p))

    A = _harmonic_columns(domain, K, w).reshape(-1, 1 + 2 * K * (domain.n + 1) + domain.n)
    b = rhs.ravel()
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = 1.0
    Q, R = linalg.qr(A / norms, mode="economic")
    cond = np.linalg.cond(R)
    if not np.isfinite(cond) or cond > tol.condition:
        raise IllConditionedError(f"collocation condition number {cond:.3e} exceeds {tol.condition:.1e}")
    x = linalg.solve_triangular(R, Q.T @ b) / norms

    scale = max(1.0, float(np.max(np.abs(data))))
    residual = float(np.max(np.abs(A @ x - b)) / scale)
    if check_residual and residual > tol.residual:
        raise ResidualError(f"boundary misfit {residual:.3e} exceeds {tol.residual:.1e}; increase K")

    nK = K * (domain.n + 1)
    coeffs = np.empty(1 + nK, dtype=complex)
    coeffs[0] = x[0]
    coeffs[1:] = x[1 : 1 + nK] + 1j * x[1 + nK : 1 + 2 * nK]
    logs = x[1 + 2 * nK :]
    return HarmonicRep(domain, K, coeffs, logs, tuple(sources), residual, float(cond))


def evaluate_harmonic(rep: HarmonicRep, w):
    """Value of ``rep`` at points strictly inside the domain."""
    inside = rep.domain.contains(w)
    if not np.all(inside):
        raise DomainError("evaluation point outside the open domain")
    out = rep._value(w)
    return float(out) if np.ndim(out) == 0 else out


def normal_derivative(rep: HarmonicRep, s: BoundarySampling) -> BoundaryField:
    """Into-domain normal derivative at the nodes, by term-wise differentiation."""
    if s.domain != rep.domain:
        raise ShapeError("sampling belongs to a different domain")
    return BoundaryField(s, (rep.complex_gradient(s.points) * s.normals).real)


def image_sources(domain: CircularDomain, pole: complex) -> tuple[tuple[complex, float], ...]:
    """Reflections of ``pole`` in every boundary circle, with unit weight.

    On circle ``j``, ``log|w - pole|`` differs from ``log|w - p_j|`` by a
    constant, so subtracting these potentials leaves smooth data whose
    series converge fast even for poles close to the boundary.
    """
    out = []
    for c, r in zip(domain.centers, domain.radii):
        d = pole - c
        if abs(d) < 1e-14 * r:
            continue  # reflection at infinity only adds a constant
        out.append((complex(c + r * r / np.conj(d)), 1.0))
    return tuple(out)


@dataclass(frozen=True)
class GreensFunction:
    """``g(w) = -log|w - pole| + regular(w)``."""

    pole: complex
    regular: HarmonicRep
    singular: str = "-log|w - pole|"

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        out = -np.log(np.abs(w - self.pole)) + self.regular._value(w)
        return float(out) if out.ndim == 0 else out

    def complex_gradient(self, w):
        return -1.0 / (np.asarray(w) - self.pole) + self.regular.complex_gradient(w)

    def normal_derivative(self, s: BoundarySampling) -> BoundaryField:
        return BoundaryField(s, (self.complex_gradient(s.points) * s.normals).real)


def greens_function(
    domain: CircularDomain,
    pole: complex,
    K: int = 32,
    M: int | None = None,
    images: bool = True,
    tol: Tolerances | None = None,
) -> GreensFunction:
    if not domain.contains(pole):
        raise DomainError("pole must lie in the open domain")
    s = sample_boundary(domain, M or default_nodes(K))
    data = s.apply(lambda w: np.log(np.abs(w - pole)))
    sources = image_sources(domain, pole) if images else ()
    reg = solve_dirichlet(domain, data, K, sources=sources, tol=tol)
    return GreensFunction(complex(pole), reg)


def harmonic_measure_density(
    domain: CircularDomain, s: BoundarySampling, K: int = 32, tol: Tolerances | None = None
) -> OmegaDensity:
    """``dω/ds = (1/2π) ∂g/∂n`` for the Green's function with pole at the base point."""
    tol = tol or default_tolerances()
    g = greens_function(domain, domain.base_point, K=K, M=s.M, tol=tol)
    dens = g.normal_derivative(s).values / (2 * np.pi)
    mass = float(np.sum(dens * s.weights))
    if np.min(dens) <= 0:
        raise MassError("harmonic measure density is not positive; the solve is under-resolved")
    if abs(mass - 1.0) > tol.mass:
        raise MassError(f"harmonic measure mass {mass!r} differs from 1 by more than {tol.mass:.1e}")
    return OmegaDensity(s, dens, mass)


def harmonic_unit_basis(
    domain: CircularDomain,
    K: int,
    s: BoundarySampling | None = None,
    include_outer: bool = False,
    tol: Tolerances | None = None,
) -> list[HarmonicRep]:
    """``h_1..h_n`` (``h_0..h_n`` with ``include_outer``) solving for indicator data."""
    s = s or sample_boundary(domain, default_nodes(K))
    start = 0 if include_outer else 1
    return [solve_dirichlet(domain, s.indicator(j), K, tol=tol) for j in range(start, domain.n + 1)]


def integrate_omega(f: BoundaryField, density: OmegaDensity, s: BoundarySampling | None = None):
    s = s or density.sampling
    if f.sampling.shape != s.shape or density.sampling.shape != s.shape:
        raise ShapeError("field, density and sampling must share nodes")
    return np.sum(np.asarray(f.values) * density.weights)


def q_functions(
    domain: CircularDomain,
    s: BoundarySampling,
    K: int = 32,
    density: OmegaDensity | None = None,
    basis: list[HarmonicRep] | None = None,
) -> list[BoundaryField]:
    """``Q_j = (∂h_j/∂n) / (dω/ds)`` at the nodes, ``j = 1..n``."""
    if domain.n == 0:
        return []
    density = density or harmonic_measure_density(domain, s, K)
    basis = basis or harmonic_unit_basis(domain, K, s)
    return [BoundaryField(s, normal_derivative(h, s).values / density.values) for h in basis]


def period(u: HarmonicRep, j: int, s: BoundarySampling, tol: Tolerances | None = None) -> float:
    """Period of the conjugate of ``u`` around hole ``j`` (1-based).

    Computed as the quadrature flux through ``Γ_j`` and cross-checked against
    ``2π`` times the logarithmic weight inside the hole.
    """
    tol = tol or default_tolerances()
    if not 1 <= j <= u.domain.n:
        raise IndexError(f"hole index {j} out of range 1..{u.domain.n}")
    flux = float(np.sum(normal_derivative(u, s).values[j] * s.weights[j]))
    from_logs = 2 * np.pi * u.total_log_weight(j)
    if abs(flux - from_logs) > tol.period * max(1.0, abs(from_logs)):
        raise PeriodMismatchError(
            f"hole {j}: quadrature period {flux!r} vs log-coefficient period {from_logs!r}"
        )
    return flux


def periods(u: HarmonicRep, s: BoundarySampling, tol: Tolerances | None = None) -> np.ndarray:
    return np.array([period(u, j, s, tol) for j in range(1, u.domain.n + 1)])


def period_matrix(
    domain: CircularDomain,
    K: int,
    s: BoundarySampling,
    basis: list[HarmonicRep] | None = None,
    tol: Tolerances | None = None,
) -> PeriodMatrix:
    tol = tol or default_tolerances()
    basis = basis or harmonic_unit_basis(domain, K, s, tol=tol)
    n = domain.n
    if n == 0:
        return PeriodMatrix(np.zeros((0, 0)), 0.0, float("inf"))
    traces = np.array([h.trace(s).values for h in basis])
    fluxes = np.array([normal_derivative(h, s).values for h in basis])
    p = np.einsum("jab,kab,ab->jk", traces, fluxes, s.weights)
    asym = float(np.max(np.abs(p - p.T)))
    smin = float(linalg.svdvals(p).min())
    if smin < tol.singular_value * max(1.0, float(np.max(np.abs(p)))):
        raise SingularMatrixError(f"period matrix smallest singular value {smin:.3e}")
    return PeriodMatrix(p, asym, smin)


def conjugation_correction(
    u: HarmonicRep, P: PeriodMatrix, s: BoundarySampling, tol: Tolerances | None = None
) -> HarmonicUnit:
    """Harmonic unit ``a`` with ``u + sum a_j h_j`` free of periods."""
    tol = tol or default_tolerances()
    if u.domain.n == 0:
        return HarmonicUnit(np.zeros(0))
    if P.min_singular_value < tol.singular_value:
        raise SingularMatrixError("period matrix is not invertible")
    return HarmonicUnit(linalg.solve(P.p, -periods(u, s, tol)))


def analytic_completion(u: HarmonicRep, tol: Tolerances | None = None) -> AnalyticRep:
    """Analytic ``f`` with ``Re f = u`` and ``Im f(ŵ) = 0``.

    Requires vanishing logarithmic weights; conjugation is exact term-wise.
    """
    tol = tol or default_tolerances()
    if any(abs(q) > 0 for _, q in u.sources):
        raise NonzeroPeriodError("point sources have no single-valued conjugate in the series basis")
    if u.domain.n and np.max(np.abs(u.log_coeffs)) * 2 * np.pi > tol.period:
        raise NonzeroPeriodError(f"log coefficients {u.log_coeffs} carry nonzero periods")
    coeffs = u.coeffs.copy()
    coeffs[0] = u.constant
    v_hat = (laurent_matrix(u.domain, u.K, u.domain.base_point) @ coeffs).imag
    coeffs[0] = u.constant - 1j * v_hat
    return AnalyticRep(u.domain, u.K, coeffs, u.residual)


def remove_periods(
    u: HarmonicRep,
    s: BoundarySampling,
    basis: list[HarmonicRep] | None = None,
    P: PeriodMatrix | None = None,
    tol: Tolerances | None = None,
) -> tuple[HarmonicRep, HarmonicUnit]:
    """Return ``u + u_a`` with zero periods together with the unit ``a``."""
    if u.domain.n == 0:
        return u, HarmonicUnit(np.zeros(0))
    basis = basis or harmonic_unit_basis(u.domain, u.K, s, tol=tol)
    P = P or period_matrix(u.domain, u.K, s, basis=basis, tol=tol)
    a = conjugation_correction(u, P, s, tol)
    corrected = combine([u] + basis, np.concatenate([[1.0], a.a]))
    return corrected, a
