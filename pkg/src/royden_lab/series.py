"""Laurent-type series on circular domains.

The analytic basis of truncation ``K`` is, in order::

    1,  ((w - c0)/r0)^k  for k = 1..K,  (rj/(w - cj))^k  for j = 1..n, k = 1..K

Scaling by the radii keeps every basis function of modulus one on its own
circle and below one in the domain, which keeps the collocation matrices
well conditioned for large ``K``.  Unscaled coefficients of ``(w - c0)^k``
and ``(w - cj)^-k`` are available from :meth:`AnalyticRep.raw_coefficients`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FitError, ShapeError
from .geometry import BoundaryField, BoundarySampling, CircularDomain


def basis_size(domain: CircularDomain, K: int) -> int:
    return 1 + K * (domain.n + 1)


def basis_labels(domain: CircularDomain, K: int) -> list[tuple[int, int]]:
    """``(component, signed degree)``; holes carry negative degrees."""
    labels = [(0, 0)] + [(0, k) for k in range(1, K + 1)]
    for j in range(1, domain.n + 1):
        labels += [(j, -k) for k in range(1, K + 1)]
    return labels


def _powers(z: np.ndarray, K: int) -> np.ndarray:
    out = np.empty(z.shape + (K,), dtype=complex)
    if K == 0:
        return out
    out[..., 0] = z
    for k in range(1, K):
        out[..., k] = out[..., k - 1] * z
    return out


def laurent_matrix(domain: CircularDomain, K: int, w) -> np.ndarray:
    """Analytic basis evaluated at ``w``; shape ``w.shape + (basis_size,)``."""
    w = np.asarray(w, dtype=complex)
    blocks = [np.ones(w.shape + (1,), dtype=complex)]
    blocks.append(_powers((w - domain.outer_center) / domain.outer_radius, K))
    for c, r in domain.holes:
        blocks.append(_powers(r / (w - c), K))
    return np.concatenate(blocks, axis=-1)


def laurent_derivative_matrix(domain: CircularDomain, K: int, w) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    ks = np.arange(1, K + 1)
    blocks = [np.zeros(w.shape + (1,), dtype=complex)]
    z = (w - domain.outer_center) / domain.outer_radius
    lower = np.concatenate([np.ones(w.shape + (1,), dtype=complex), _powers(z, K - 1)], axis=-1)
    blocks.append(lower * ks / domain.outer_radius)
    for c, r in domain.holes:
        blocks.append(-_powers(r / (w - c), K) * ks / (w - c)[..., None])
    return np.concatenate(blocks, axis=-1)


@dataclass(frozen=True)
class AnalyticRep:
    """Single-valued analytic function as a truncated Laurent-type series."""

    domain: CircularDomain
    K: int
    coeffs: np.ndarray = field(repr=False)
    residual: float = 0.0

    def __post_init__(self):
        if np.shape(self.coeffs) != (basis_size(self.domain, self.K),):
            raise ShapeError(
                f"expected {basis_size(self.domain, self.K)} coefficients, got {np.shape(self.coeffs)}"
            )

    @classmethod
    def constant(cls, domain: CircularDomain, value: complex, K: int = 0) -> "AnalyticRep":
        coeffs = np.zeros(basis_size(domain, K), dtype=complex)
        coeffs[0] = value
        return cls(domain, K, coeffs)

    @classmethod
    def from_raw(cls, domain, K, constant=0.0, outer=(), holes=None) -> "AnalyticRep":
        """Build from unscaled coefficients of ``(w-c0)^k`` and ``(w-cj)^-k``."""
        coeffs = np.zeros(basis_size(domain, K), dtype=complex)
        coeffs[0] = constant
        for k, a in enumerate(outer, start=1):
            coeffs[k] = a * domain.outer_radius**k
        for j, row in enumerate(holes or [], start=1):
            r = domain.holes[j - 1][1]
            for k, a in enumerate(row, start=1):
                coeffs[j * K + k] = a / r**k
        return cls(domain, K, coeffs)

    def raw_coefficients(self) -> dict:
        K, d = self.K, self.domain
        ks = np.arange(1, K + 1)
        out = {"constant": complex(self.coeffs[0]), "outer": self.coeffs[1 : K + 1] / d.outer_radius**ks}
        out["holes"] = [
            self.coeffs[j * K + 1 : (j + 1) * K + 1] * d.holes[j - 1][1] ** ks for j in range(1, d.n + 1)
        ]
        return out

    def __call__(self, w):
        return laurent_matrix(self.domain, self.K, w) @ self.coeffs

    def derivative(self, w):
        return laurent_derivative_matrix(self.domain, self.K, w) @ self.coeffs

    def trace(self, s: BoundarySampling) -> BoundaryField:
        return BoundaryField(s, self(s.points))

    def __add__(self, other: "AnalyticRep") -> "AnalyticRep":
        a, b = _common_k(self, other)
        return AnalyticRep(self.domain, a.K, a.coeffs + b.coeffs)

    def __neg__(self):
        return AnalyticRep(self.domain, self.K, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor: complex) -> "AnalyticRep":
        return AnalyticRep(self.domain, self.K, self.coeffs * factor, self.residual * abs(factor))

    def truncate(self, K: int) -> "AnalyticRep":
        return _resize(self, K)


def _resize(rep: AnalyticRep, K: int) -> AnalyticRep:
    if K == rep.K:
        return rep
    d = rep.domain
    new = np.zeros(basis_size(d, K), dtype=complex)
    m = min(K, rep.K)
    new[0] = rep.coeffs[0]
    for j in range(d.n + 1):
        new[j * K + 1 : j * K + 1 + m] = rep.coeffs[j * rep.K + 1 : j * rep.K + 1 + m]
    return AnalyticRep(d, K, new, rep.residual)


def _common_k(a: AnalyticRep, b: AnalyticRep):
    K = max(a.K, b.K)
    return _resize(a, K), _resize(b, K)


def fit_analytic(field: BoundaryField, K: int, rtol: float | None = None) -> AnalyticRep:
    """Least-squares Laurent fit of boundary values.

    The attached ``residual`` is the max boundary misfit relative to the max
    modulus of the data.  With ``rtol`` set, a larger residual raises
    :class:`FitError`.
    """
    s = field.sampling
    if 2 * K + 2 > s.M:
        raise FitError(f"truncation K={K} is not resolved by M={s.M} nodes per circle")
    A = laurent_matrix(s.domain, K, s.points).reshape(-1, basis_size(s.domain, K))
    b = np.asarray(field.values, dtype=complex).ravel()
    coeffs, *_ = np.linalg.lstsq(A, b, rcond=None)
    scale = max(np.max(np.abs(b)), np.finfo(float).tiny)
    residual = float(np.max(np.abs(A @ coeffs - b)) / scale)
    if rtol is not None and residual > rtol:
        raise FitError(f"series fit residual {residual:.3e} exceeds {rtol:.1e}; increase K")
    return AnalyticRep(s.domain, K, coeffs, residual)


def fit_function(func, s: BoundarySampling, K: int, rtol: float | None = None) -> AnalyticRep:
    return fit_analytic(s.apply(func), K, rtol)
