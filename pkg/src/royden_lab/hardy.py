"""Inner and outer functions, factorizations and divisibility.

Functions may be passed as :class:`AnalyticRep`, :class:`ZeroFreeForm` or any
vectorised callable of a complex array; a domain must accompany plain
callables.  Factorizations use ``K = 96`` and ``M = 256`` by default, which
resolves zeros down to roughly distance 0.2 from the boundary at double
precision.

Normalization: the inner factor has modulus 1 on the outer circle and is
rotated so that its value at the first outer node, ``c0 + r0``, is real and
positive.  The outer factor absorbs the conjugate rotation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .config import Tolerances, default_tolerances
from .errors import (
    BoundaryZeroError,
    FitError,
    UnboundedDataError,
    ZeroAtBasePointError,
    ZeroLocalizationError,
    ZeroOnBoundaryError,
)
from .geometry import BoundaryField, BoundarySampling, CircularDomain, sample_boundary
from .laplace import (
    HarmonicRep,
    HarmonicUnit,
    OmegaDensity,
    analytic_completion,
    harmonic_measure_density,
    harmonic_unit_basis,
    integrate_omega,
    period_matrix,
    remove_periods,
    solve_dirichlet,
)
from .series import AnalyticRep, fit_analytic
from .zeros import circle_winding, count_zeros, locate_zeros, winding_report

logger = logging.getLogger(__name__)

DEFAULT_K = 96
DEFAULT_M = 256
DIVIDES_TOL = 1e-6
OUTER_TOL = 1e-6
LOG_BOUND = 50.0


@dataclass(frozen=True)
class ZeroFreeForm:
    """``Π_j (w - a_j)^{k_j} · exp(g(w))`` with ``g`` single-valued analytic."""

    k: np.ndarray
    anchors: np.ndarray
    exponent: AnalyticRep

    @classmethod
    def exp(cls, g: AnalyticRep) -> "ZeroFreeForm":
        n = g.domain.n
        return cls(np.zeros(n, dtype=int), np.array([c for c, _ in g.domain.holes], dtype=complex), g)

    @property
    def domain(self) -> CircularDomain:
        return self.exponent.domain

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        out = np.exp(self.exponent(w))
        for a, k in zip(self.anchors, self.k):
            if k:
                out = out * (w - a) ** int(k)
        return out

    def trace(self, s: BoundarySampling) -> BoundaryField:
        return BoundaryField(s, self(s.points))

    def reciprocal(self) -> "ZeroFreeForm":
        return ZeroFreeForm(-self.k, self.anchors, -self.exponent)

    def rotate(self, phase: complex) -> "ZeroFreeForm":
        g = self.exponent
        coeffs = g.coeffs.copy()
        coeffs[0] += np.log(phase)
        return ZeroFreeForm(self.k, self.anchors, AnalyticRep(g.domain, g.K, coeffs, g.residual))

    def to_analytic(self, s: BoundarySampling, K: int, rtol: float | None = None) -> AnalyticRep:
        return fit_analytic(self.trace(s), K, rtol)


@dataclass(frozen=True)
class ModulusProfile:
    means: np.ndarray
    deviations: np.ndarray


@dataclass(frozen=True)
class InnerCheck:
    inner: bool
    moduli: np.ndarray  # rescaled so the outer circle carries 1
    scale: float  # the Γ₀ mean modulus that was divided out
    deviations: np.ndarray

    def __bool__(self):
        return self.inner


@dataclass(frozen=True)
class OuterCheck:
    outer: bool
    log_value: float  # log|f(ŵ)|
    log_integral: float  # ∫ log|f| dω
    gap: float
    zero_at_base_point: bool = False

    def __bool__(self):
        return self.outer


@dataclass(frozen=True)
class InvertibleCheck:
    invertible: bool
    zero_count: int
    min_probe_modulus: float
    outer: bool

    @property
    def consistent(self) -> bool:
        return self.invertible == self.outer

    def __bool__(self):
        return self.invertible


@dataclass(frozen=True)
class InnerOuterResult:
    inner: ZeroFreeForm | AnalyticRep
    outer: ZeroFreeForm
    component_moduli: np.ndarray
    residual: float
    unit: HarmonicUnit
    winding: np.ndarray
    zero_count: int


@dataclass(frozen=True)
class DivisibilityCheck:
    divides: bool
    residual: float
    bounded: bool
    quotient: AnalyticRep | None = None

    def __bool__(self):
        return self.divides


@dataclass(frozen=True)
class SaitoSplit:
    psi: BoundaryField
    h: ZeroFreeForm
    unit: HarmonicUnit
    psi_deviation: np.ndarray
    alpha_inverse_h: float


@dataclass(frozen=True)
class BlaschkeSplit:
    blaschke: AnalyticRep
    singular: ZeroFreeForm
    zeros: list
    singular_invertible: bool


@dataclass(frozen=True)
class AffiliatedGraph:
    a: AnalyticRep
    b: AnalyticRep
    F: ZeroFreeForm
    psi: object
    eta: object
    c: float
    C: float
    component_constants: np.ndarray
    fit_residuals: tuple[float, float]
    sampling: BoundarySampling = field(repr=False)

    def graph(self, g):
        """``Φ(g) = (η b g, ψ a g)`` at the boundary nodes."""
        w = self.sampling.points
        gv = g.values if isinstance(g, BoundaryField) else np.asarray(g(w) if callable(g) else g)
        first = self.eta(w) * self.b(w) * gv
        second = self.psi(w) * self.a(w) * gv
        return BoundaryField(self.sampling, first), BoundaryField(self.sampling, second)


def _domain_of(f, domain: CircularDomain | None) -> CircularDomain:
    if domain is not None:
        return domain
    if isinstance(f, (AnalyticRep, ZeroFreeForm)):
        return f.domain
    raise ValueError("a domain is required for plain callables")


def _sampling(domain: CircularDomain, K: int, M: int | None) -> BoundarySampling:
    return sample_boundary(domain, M or max(DEFAULT_M, 2 * K + 2 + (2 * K + 2) % 4))


@lru_cache(maxsize=32)
def _machinery(domain: CircularDomain, K: int, M: int, tol: Tolerances):
    s = sample_boundary(domain, M)
    basis = harmonic_unit_basis(domain, K, s, tol=tol)
    P = period_matrix(domain, K, s, basis=basis, tol=tol) if domain.n else None
    return basis, P


@lru_cache(maxsize=32)
def _density(domain: CircularDomain, M: int, tol: Tolerances) -> OmegaDensity:
    return harmonic_measure_density(domain, sample_boundary(domain, M), tol=tol)


def omega_density(domain: CircularDomain, M: int = DEFAULT_M) -> OmegaDensity:
    """Cached harmonic measure density on ``M`` nodes per circle."""
    return _density(domain, M, default_tolerances())


def probe_grid(domain: CircularDomain, n: int = 41, margin: float = 1e-3) -> np.ndarray:
    c, r = domain.outer_center, domain.outer_radius
    t = np.linspace(-r, r, n)
    pts = (c + t[:, None] + 1j * t[None, :]).ravel()
    return pts[domain.contains(pts, margin)]


def boundary_modulus_profile(f, s: BoundarySampling, density: OmegaDensity | None = None) -> ModulusProfile:
    """Mean of ``|f|`` on each circle and the max relative deviation from it."""
    mod = np.abs(np.asarray(f.values if isinstance(f, BoundaryField) else f(s.points)))
    wts = density.weights if density is not None else s.weights
    means = np.sum(mod * wts, axis=1) / np.sum(wts, axis=1)
    spread = np.max(np.abs(mod - means[:, None]), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        devs = np.where(means > 0, spread / np.where(means > 0, means, 1.0), spread)
    return ModulusProfile(means, devs)


def is_inner(f, s: BoundarySampling, density: OmegaDensity | None = None, tol: float = 1e-8) -> InnerCheck:
    prof = boundary_modulus_profile(f, s, density)
    if np.all(prof.means == 0):
        return InnerCheck(True, np.zeros_like(prof.means), 0.0, prof.deviations)
    scale = float(prof.means[0])
    moduli = prof.means / scale if scale > 0 else prof.means
    return InnerCheck(bool(np.all(prof.deviations < tol)), moduli, scale, prof.deviations)


def is_outer(f, density: OmegaDensity, tol: float = OUTER_TOL) -> OuterCheck:
    """Jensen equality test at the base point."""
    s = density.sampling
    w_hat = s.domain.base_point
    boundary = np.abs(np.asarray(f(s.points)))
    if np.all(boundary == 0):
        raise ZeroAtBasePointError("function vanishes identically")
    with np.errstate(divide="ignore"):
        integral = float(integrate_omega(BoundaryField(s, np.log(boundary)), density))
    value = abs(complex(np.asarray(f(np.array([w_hat])))[0]))
    if value == 0:
        return OuterCheck(False, float("-inf"), integral, float("inf"), zero_at_base_point=True)
    log_value = float(np.log(value))
    gap = integral - log_value
    return OuterCheck(bool(gap <= tol), log_value, integral, gap)


def winding_vector(f, s: BoundarySampling) -> np.ndarray:
    rep = winding_report(f, s.domain, n0=s.M)
    logger.debug("winding %s, outer winding %d, zeros in domain %d", rep.k, rep.outer_winding, rep.zero_count)
    return rep.k


def outer_from_log_modulus(
    domain: CircularDomain,
    log_modulus: BoundaryField,
    K: int = DEFAULT_K,
    bound: float = LOG_BOUND,
) -> tuple[ZeroFreeForm, HarmonicUnit]:
    """Outer ``h`` and unit ``u0 = Σ a_j h_j`` with ``|h| = exp(log_modulus - u0)`` on Γ."""
    data = np.asarray(log_modulus.values, dtype=float)
    if not np.all(np.isfinite(data)) or np.max(np.abs(data)) > bound:
        raise UnboundedDataError(f"log-modulus data must be finite and within ±{bound}")
    s = log_modulus.sampling
    tol = default_tolerances()
    basis, P = _machinery(domain, K, s.M, tol)
    u = solve_dirichlet(domain, log_modulus, K, tol=tol)
    corrected, corr = remove_periods(u, s, basis=basis, P=P, tol=tol)
    return ZeroFreeForm.exp(analytic_completion(corrected, tol)), -corr


def _as_zero_free(values: BoundaryField, K: int, k: np.ndarray | None = None) -> ZeroFreeForm:
    """Zero-free form matching nodal values of a zero-free analytic function."""
    s = values.sampling
    d = s.domain
    k = winding_vector(_NodeInterp(values), s) if k is None else k
    anchors = np.array([c for c, _ in d.holes], dtype=complex)
    power = np.ones(s.shape, dtype=complex)
    for a, kj in zip(anchors, k):
        power *= (s.points - a) ** int(kj)
    ratio = values.values / power
    tol = default_tolerances()
    basis, P = _machinery(d, K, s.M, tol)
    u = solve_dirichlet(d, BoundaryField(s, np.log(np.abs(ratio))), K, tol=tol)
    corrected, corr = remove_periods(u, s, basis=basis, P=P, tol=tol)
    if np.any(np.abs(corr.a) > tol.period):
        raise FitError(f"winding {k} leaves periods {corr.a}; values are not from a zero-free function")
    g = analytic_completion(corrected, tol)
    phase = np.angle(ratio[0, 0] / np.exp(g(s.points[0, 0])))
    coeffs = g.coeffs.copy()
    coeffs[0] += 1j * phase
    return ZeroFreeForm(np.asarray(k, dtype=int), anchors, AnalyticRep(d, K, coeffs, g.residual))


class _NodeInterp:
    """Winding of nodal data: trigonometric interpolation on each circle."""

    def __init__(self, values: BoundaryField):
        self.values = values

    def __call__(self, w):
        s = self.values.sampling
        w = np.asarray(w)
        for j, (c, r) in enumerate(zip(s.domain.centers, s.domain.radii)):
            if np.allclose(np.abs(w - c), r):
                return _trig_interp(self.values.values[j], np.angle(w - c))
        raise ValueError("nodal data only known on the boundary circles")


def _trig_interp(vals: np.ndarray, theta: np.ndarray) -> np.ndarray:
    M = len(vals)
    coef = np.fft.fft(vals) / M
    freq = np.fft.fftfreq(M, 1.0 / M)
    return np.exp(1j * np.outer(theta, freq)) @ coef


def _off_node(s: BoundarySampling) -> np.ndarray:
    shift = np.exp(1j * (s.angles + np.pi / s.M))
    return s.domain.centers[:, None] + s.domain.radii[:, None] * shift[None, :]


def inner_outer_factor(
    f, domain: CircularDomain | None = None, K: int = DEFAULT_K, M: int | None = None
) -> InnerOuterResult:
    """``f = φ g`` with ``φ`` normalized inner and ``g`` outer."""
    domain = _domain_of(f, domain)
    s = _sampling(domain, K, M)
    vals = np.asarray(f(s.points), dtype=complex)
    top = float(np.max(np.abs(vals)))
    if top == 0 or np.min(np.abs(vals)) <= 1e-12 * top:
        raise BoundaryZeroError("f vanishes at a boundary node")
    g, unit = outer_from_log_modulus(domain, BoundaryField(s, np.log(np.abs(vals))), K)
    phi_vals = vals / g(s.points)
    phase = phi_vals[0, 0] / abs(phi_vals[0, 0])
    phi_vals = phi_vals / phase
    g = g.rotate(phase)

    report = winding_report(f, domain, n0=s.M)
    if report.zero_count == 0:
        inner = _as_zero_free(BoundaryField(s, phi_vals), K, report.k)
    else:
        inner = fit_analytic(BoundaryField(s, phi_vals), K)
        if inner.residual > 1e-8:
            raise FitError(f"inner factor fit residual {inner.residual:.2e}; increase K")
    w_check = _off_node(s)
    residual = float(np.max(np.abs(np.asarray(f(w_check)) - inner(w_check) * g(w_check))))
    moduli = np.concatenate([[1.0], np.exp(unit.a)])
    return InnerOuterResult(inner, g, moduli, residual, unit, report.k, report.zero_count)


def is_invertible_inner(phi, domain: CircularDomain | None = None, density: OmegaDensity | None = None) -> InvertibleCheck:
    domain = _domain_of(phi, domain)
    density = density or omega_density(domain)
    zeros = count_zeros(phi, domain)
    probes = probe_grid(domain)
    min_mod = float(np.min(np.abs(phi(probes)))) if len(probes) else float("inf")
    outer = bool(is_outer(phi, density))
    invertible = zeros == 0 and min_mod > 0
    if invertible != outer:
        logger.warning("invertibility (%s) and outerness (%s) disagree", invertible, outer)
    return InvertibleCheck(invertible, zeros, min_mod, outer)


def _normalize_zero_set(zeros) -> list[tuple[complex, int]]:
    items = zeros.items() if isinstance(zeros, dict) else zeros
    out = []
    for item in items:
        z, nu = (item, 1) if np.isscalar(item) else item
        if int(nu) != nu or nu < 1:
            raise ValueError(f"multiplicity must be a positive integer, got {nu}")
        out.append((complex(z), int(nu)))
    return out


def zero_based_inner(domain: CircularDomain, zeros, K: int = DEFAULT_K) -> AnalyticRep:
    """Normalized inner function with exactly the given zeros and multiplicities."""
    zs = _normalize_zero_set(zeros)
    if not zs:
        return AnalyticRep.constant(domain, 1.0, K)
    for z, _ in zs:
        if not domain.contains(z):
            raise ZeroOnBoundaryError(f"zero {z} is not in the open domain")

    def poly(w):
        w = np.asarray(w, dtype=complex)
        out = np.ones_like(w)
        for z, nu in zs:
            out = out * (w - z) ** nu
        return out

    phi = inner_outer_factor(poly, domain, K).inner
    pts = np.array([z for z, _ in zs])
    for i, (z, nu) in enumerate(zs):
        others = np.delete(pts, i)
        rad = float(domain.boundary_distance(z))
        if len(others):
            rad = min(rad, float(np.min(np.abs(others - z))))
        got = circle_winding(phi, z, 0.5 * rad)
        if round(got) != nu:
            raise ZeroLocalizationError(f"inner factor has winding {got:.3f} around {z}, expected {nu}")
    return phi


def gcd_zero_based(domain: CircularDomain, *zero_sets, K: int = DEFAULT_K, atol: float = 1e-8) -> AnalyticRep:
    """Greatest common divisor of zero-based inner functions: minimum multiplicities."""
    sets = [_normalize_zero_set(zs) for zs in zero_sets]
    if not sets:
        return AnalyticRep.constant(domain, 1.0, K)
    common = []
    for z, nu in sets[0]:
        mult = nu
        for other in sets[1:]:
            match = [m for y, m in other if abs(y - z) <= atol]
            mult = min(mult, match[0]) if match else 0
        if mult:
            common.append((z, mult))
    return zero_based_inner(domain, common, K)


def blaschke_singular_split(phi, domain: CircularDomain | None = None, K: int = DEFAULT_K) -> BlaschkeSplit:
    """Split off the zeros of ``φ``.

    With series data the remaining factor is always invertible inner; a
    genuine singular inner factor needs boundary singularities that finite
    series cannot carry.
    """
    domain = _domain_of(phi, domain)
    found = locate_zeros(phi, domain)
    phi0 = zero_based_inner(domain, found, K)
    s = _sampling(domain, K, None)
    q = np.asarray(phi(s.points)) / phi0(s.points)
    phi1 = _as_zero_free(BoundaryField(s, q), K)
    check = is_invertible_inner(phi1, domain)
    if not is_inner(phi1, s, tol=1e-6) or not check:
        raise ZeroLocalizationError("quotient by the located zeros is not invertible inner")
    return BlaschkeSplit(phi0, phi1, found, bool(check))


def divides(phi, psi, domain: CircularDomain | None = None, K: int = 64, tol: float = DIVIDES_TOL) -> DivisibilityCheck:
    """Whether ``ψ/φ`` extends analytically (and boundedly) to the domain."""
    domain = _domain_of(phi, domain)
    s = _sampling(domain, K, None)
    den = np.asarray(phi(s.points), dtype=complex)
    if np.max(np.abs(den)) == 0:
        raise ValueError("divisor vanishes identically")
    if np.min(np.abs(den)) == 0:
        raise BoundaryZeroError("divisor vanishes at a boundary node")
    quot = np.asarray(psi(s.points), dtype=complex) / den
    q = fit_analytic(BoundaryField(s, quot), K)
    probes = probe_grid(domain)
    with np.errstate(divide="ignore", invalid="ignore"):
        inside = np.asarray(psi(probes)) / np.asarray(phi(probes))
    bounded = bool(np.all(np.isfinite(inside)) and np.max(np.abs(inside)) <= 10 * np.max(np.abs(quot)))
    return DivisibilityCheck(bool(q.residual < tol and bounded), q.residual, bounded, q)


def equivalent_inner(phi, psi, domain: CircularDomain | None = None, K: int = 64, tol: float = DIVIDES_TOL) -> bool:
    return bool(divides(phi, psi, domain, K, tol)) and bool(divides(psi, phi, domain, K, tol))


def saito_split(b: BoundaryField, alpha=None, K: int | None = None) -> SaitoSplit:
    """``b = ψ h`` on the nodes with ``h`` outer and ``|ψ|`` constant on each circle."""
    from .gauge import GaugeNormSpec, gauge_eval

    s = b.sampling
    vals = np.asarray(b.values, dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise UnboundedDataError("b must be bounded")
    if np.min(np.abs(vals)) == 0:
        raise UnboundedDataError("b vanishes at a node, 1/b has no finite gauge norm")
    K = K or min(DEFAULT_K, (s.M - 2) // 2)
    h, unit = outer_from_log_modulus(s.domain, BoundaryField(s, np.log(np.abs(vals))), K)
    psi = BoundaryField(s, vals / h(s.points))
    prof = boundary_modulus_profile(psi, s)
    dens = _density(s.domain, s.M, default_tolerances())
    alpha = alpha or GaugeNormSpec.p_norm(1)
    norm = float(gauge_eval(alpha, BoundaryField(s, 1 / h(s.points)), dens))
    return SaitoSplit(psi, h, unit, prof.deviations, norm)


def affiliated_graph(psi, eta, u, v, domain: CircularDomain | None = None, K: int = 64) -> AffiliatedGraph:
    """Build ``a = u/F``, ``b = v/F`` with ``F`` outer of modulus ``|u| + |v|``."""
    domain = _domain_of(u, domain)
    s = _sampling(domain, K, None)
    uv, vv = np.asarray(u(s.points), dtype=complex), np.asarray(v(s.points), dtype=complex)
    if np.max(np.abs(uv)) == 0:
        raise ZeroAtBasePointError("u vanishes identically and is not outer")
    F, _ = outer_from_log_modulus(domain, BoundaryField(s, np.log(np.abs(uv) + np.abs(vv))), K)
    Fv = F(s.points)
    a = fit_analytic(BoundaryField(s, uv / Fv), K)
    b = fit_analytic(BoundaryField(s, vv / Fv), K)
    w = _off_node(s)
    total = np.concatenate([np.abs(a(s.points)) + np.abs(b(s.points)), np.abs(a(w)) + np.abs(b(w))], axis=1)
    return AffiliatedGraph(
        a, b, F, psi, eta,
        c=float(np.min(total)),
        C=float(np.max(total)),
        component_constants=total.mean(axis=1),
        fit_residuals=(a.residual, b.residual),
        sampling=s,
    )
