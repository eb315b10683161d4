"""Finite-dimensional model of L²(Γ, ω) and invariant subspaces.

Every function is handled through its values at the boundary nodes.  The
ω-weighted inner product is realised by scaling nodal values with the square
root of the node masses, so Gram-orthonormal sets become ordinary
orthonormal columns.  The model space is spanned by three blocks:

``h2``
    the analytic Laurent basis of degree ``K``;
``conj``
    conjugates of the nonconstant analytic basis functions, shifted to
    vanish at the base point;
``n``
    the fields ``Q_1..Q_n``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import factorial

import numpy as np
from scipy import linalg

from .errors import ExtremalDegenerateError, IllConditionedError, RankCollapseError, ResolutionError
from .geometry import BoundaryField, BoundarySampling, CircularDomain
from .hardy import InnerCheck, is_inner, zero_based_inner
from .laplace import OmegaDensity, q_functions
from .series import AnalyticRep, basis_labels, fit_analytic, laurent_matrix
from .zeros import locate_zeros

logger = logging.getLogger(__name__)

RANK_RTOL = 1e-10


def _orthonormal(vectors: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    if vectors.shape[1] == 0:
        return vectors
    u, sv, _ = linalg.svd(vectors, full_matrices=False)
    if sv[0] == 0:
        return u[:, :0]
    return u[:, : int(np.sum(sv > rtol * sv[0]))]


@dataclass(frozen=True)
class GalerkinSpace:
    domain: CircularDomain
    K: int
    sampling: BoundarySampling
    density: OmegaDensity
    labels: list
    raw: dict = field(repr=False)  # block -> weighted basis columns
    frames: dict = field(repr=False)  # block -> orthonormal columns
    gram_min_eigenvalue: float = 0.0
    n_orthogonality: float = 0.0

    @property
    def sqrt_mass(self) -> np.ndarray:
        w = self.density.weights.ravel()
        return np.sqrt(w / w.sum())

    def weighted(self, f) -> np.ndarray:
        """Nodal values of ``f`` scaled into the Euclidean picture."""
        if isinstance(f, BoundaryField):
            vals = f.values
        elif callable(f):
            vals = f(self.sampling.points)
        else:
            vals = f
        return np.asarray(vals, dtype=complex).ravel() * self.sqrt_mass

    def unweighted(self, x: np.ndarray) -> BoundaryField:
        return BoundaryField(self.sampling, (x / self.sqrt_mass).reshape(self.sampling.shape))

    def projector(self, block: str) -> np.ndarray:
        Q = self.frames[block]
        return Q @ Q.conj().T

    @property
    def model(self) -> np.ndarray:
        return np.concatenate([self.frames[b] for b in ("h2", "conj", "n")], axis=1)

    def inner(self, f, g) -> complex:
        return complex(np.vdot(self.weighted(g), self.weighted(f)))


def build_space(domain: CircularDomain, K: int, density: OmegaDensity, s: BoundarySampling | None = None) -> GalerkinSpace:
    s = s or density.sampling
    if s.M < 4 * K:
        raise ResolutionError(f"M={s.M} nodes do not resolve degree K={K} (need M >= 4K)")
    sq = np.sqrt(density.weights.ravel() / density.weights.sum())
    B = laurent_matrix(domain, K, s.points).reshape(-1, 1 + K * (domain.n + 1))
    B_hat = laurent_matrix(domain, K, domain.base_point)
    conj = np.conj(B[:, 1:] - B_hat[1:])
    Q = [q.values.ravel() for q in q_functions(domain, s, K=32, density=density)]
    raw = {
        "h2": B * sq[:, None],
        "conj": conj * sq[:, None],
        "n": (np.array(Q).T if Q else np.zeros((B.shape[0], 0))) * sq[:, None],
    }
    labels = [("h2", j, k) for j, k in basis_labels(domain, K)]
    labels += [("conj", j, k) for j, k in basis_labels(domain, K)[1:]]
    labels += [("n", j, 0) for j in range(1, domain.n + 1)]
    full = np.concatenate([raw["h2"], raw["conj"], raw["n"]], axis=1)
    # Gram of the column-normalized basis: its smallest eigenvalue measures independence
    normed = full / np.linalg.norm(full, axis=0)
    eig = np.linalg.eigvalsh(normed.conj().T @ normed)
    if eig[0] < 1e-13:
        raise IllConditionedError(f"Gram matrix is numerically singular (min eigenvalue {eig[0]:.2e})")
    frames = {b: _orthonormal(v) for b, v in raw.items()}
    analytic = raw["h2"][:, 1:]
    n_orth = 0.0
    if domain.n:
        nv = raw["n"] / np.linalg.norm(raw["n"], axis=0)
        an = analytic / np.linalg.norm(analytic, axis=0)
        n_orth = float(np.max(np.abs(nv.conj().T @ np.concatenate([an.real, an.imag], axis=1))))
    return GalerkinSpace(domain, K, s, density, labels, raw, frames, float(eig[0]), n_orth)


@dataclass(frozen=True)
class Decomposition:
    h2: BoundaryField
    conj: BoundaryField
    n: BoundaryField
    residual: float
    n_coefficients: np.ndarray


def decompose(f, space: GalerkinSpace) -> Decomposition:
    x = space.weighted(f)
    parts = {b: space.projector(b) @ x for b in ("h2", "conj", "n")}
    rest = x - sum(parts.values())
    raw_n = space.raw["n"]
    coef = np.linalg.lstsq(raw_n, parts["n"], rcond=None)[0] if raw_n.shape[1] else np.zeros(0)
    norm = max(np.linalg.norm(x), np.finfo(float).tiny)
    return Decomposition(
        space.unweighted(parts["h2"]),
        space.unweighted(parts["conj"]),
        space.unweighted(parts["n"]),
        float(np.linalg.norm(rest) / norm),
        coef,
    )


@dataclass(frozen=True)
class SubspaceModel:
    basis: np.ndarray  # orthonormal weighted columns
    D: int
    generator: str = ""
    singular_values: np.ndarray = field(default=None, repr=False)
    leakage: float = 0.0  # part of the columns outside the ambient analytic block

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T


def multiplier_matrix(space: GalerkinSpace, D: int) -> np.ndarray:
    """Nodal values of the analytic basis of degree ``D`` (unweighted)."""
    s = space.sampling
    return laurent_matrix(space.domain, D, s.points).reshape(-1, 1 + D * (space.domain.n + 1))


def generate_invariant_subspace(f, space: GalerkinSpace, D: int, label: str = "") -> SubspaceModel:
    """Orthonormal span of ``r f`` over multipliers ``r`` of degree at most ``D``."""
    if 2 * D > space.K:
        raise ValueError(f"multiplier degree D={D} exceeds K/2 = {space.K / 2}")
    x = space.weighted(f)
    if np.linalg.norm(x) < 1e-14:
        raise RankCollapseError("generator is numerically zero")
    cols = multiplier_matrix(space, D) * x[:, None]
    u, sv, _ = linalg.svd(cols, full_matrices=False)
    rank = int(np.sum(sv > RANK_RTOL * sv[0]))
    basis = u[:, :rank]
    amb = space.frames["h2"]
    leak = float(np.linalg.norm(basis - amb @ (amb.conj().T @ basis), 2)) if rank else 0.0
    return SubspaceModel(basis, D, label, sv, leak)


def product_subspace(phi, space: GalerkinSpace, degree: int | None = None) -> np.ndarray:
    """Orthonormal basis of ``φ`` times the analytic block of the given degree."""
    degree = space.K if degree is None else degree
    x = space.weighted(phi)
    return _orthonormal(multiplier_matrix(space, degree) * x[:, None])


def containment_angle(A: np.ndarray, B: np.ndarray) -> float:
    """Largest angle between a unit vector of span A and the subspace span B."""
    if A.shape[1] == 0:
        return 0.0
    rest = A - B @ (B.conj().T @ A)
    return float(np.arcsin(min(1.0, np.linalg.norm(rest, 2))))


def principal_angles(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Principal angles between orthonormal column spaces, ascending."""
    sv = np.clip(linalg.svdvals(A.conj().T @ B), 0.0, 1.0)
    return np.sort(np.arccos(sv))


def beurling_angle(model: SubspaceModel, phi, space: GalerkinSpace) -> float:
    """Distance in angle between the model and ``φ`` times the analytic block.

    The larger of: how far the model sticks out of ``φ·H²_K``, and how far
    ``φ`` itself is from the model.  Both vanish when the model equals the
    truncation of ``φ H²`` that contains ``φ``.
    """
    target = product_subspace(phi, space)
    x = space.weighted(phi)
    x = x / np.linalg.norm(x)
    P = model.basis
    out_of_model = np.linalg.norm(x - P @ (P.conj().T @ x))
    return max(containment_angle(P, target), float(np.arcsin(min(1.0, out_of_model))))


def cyclicity_distance(f, space: GalerkinSpace, D: int) -> float:
    """ω-distance from the constant 1 to the generated invariant subspace."""
    model = generate_invariant_subspace(f, space, D)
    one = space.weighted(np.ones(space.sampling.shape))
    return float(np.linalg.norm(one - model.basis @ (model.basis.conj().T @ one)))


def cyclicity_sweep(f, space: GalerkinSpace, degrees) -> np.ndarray:
    dist = np.array([cyclicity_distance(f, space, D) for D in degrees])
    if np.any(np.diff(dist) > 1e-10):
        logger.warning("cyclicity distance increased along %s: %s", list(degrees), dist)
    return dist


def taylor_functional(space: GalerkinSpace, m: int) -> np.ndarray:
    """Weighted vector ``L`` with ``<F, L> = F^(m)(ŵ)`` for analytic ``F``.

    Trapezoidal Cauchy integral over the positively oriented boundary.
    """
    s = space.sampling
    d = space.domain
    w = s.points
    # dw along each circle; holes are traversed clockwise
    dw = 1j * (w - d.centers[:, None]) * (2 * np.pi / s.M)
    dw[1:] *= -1
    kernel = factorial(m) / (2j * np.pi) * dw / (w - d.base_point) ** (m + 1)
    return np.conj(kernel.ravel() / space.sqrt_mass)


@dataclass(frozen=True)
class Extraction:
    phi: AnalyticRep
    extremal: AnalyticRep
    order: int  # Taylor order of the functional that was maximized
    common_zeros: list
    extremal_inner: InnerCheck
    fit_residual: float


def extract_inner_generator(
    model: SubspaceModel, space: GalerkinSpace, K: int = 96, max_order: int = 8, zero_tol: float = 1e-6
) -> Extraction:
    """Inner generator of a model subspace through an extremal problem.

    The unit vector of the model maximizing ``|F^(m)(ŵ)|`` for the first
    order ``m`` whose functional does not vanish on the model is the
    normalized projection of the functional.  Its zeros that every model
    column shares are kept; the returned generator is the normalized inner
    function with exactly those zeros.  The extremal element itself need not
    be inner on a multiply connected domain; its verdict is reported.
    """
    P = model.basis
    if P.shape[1] == 0:
        raise ExtremalDegenerateError("model subspace is trivial")
    for m in range(max_order + 1):
        L = taylor_functional(space, m)
        proj = P @ (P.conj().T @ L)
        if np.linalg.norm(proj) > 1e-8 * np.linalg.norm(L):
            break
    else:
        raise ExtremalDegenerateError(f"all Taylor functionals up to order {max_order} vanish on the model")
    field_ = space.unweighted(proj / np.linalg.norm(proj))
    fit_K = min(K, (space.sampling.M - 2) // 2)
    extremal = fit_analytic(field_, fit_K)
    common = []
    scale = np.max(np.abs(field_.values))
    column_reps = None
    for z, mult in locate_zeros(extremal, space.domain):
        if column_reps is None:
            cols = [space.unweighted(P[:, i]) for i in range(P.shape[1])]
            column_reps = [(fit_analytic(c, fit_K), np.max(np.abs(c.values))) for c in cols]
        vals = [abs(rep(np.array([z]))[0]) / top for rep, top in column_reps]
        if max(vals) < zero_tol:
            common.append((z, mult))
    phi = zero_based_inner(space.domain, common, K)
    verdict = is_inner(extremal, space.sampling, tol=1e-6)
    logger.debug("extremal order %d, common zeros %s, extremal inner %s", m, common, bool(verdict))
    return Extraction(phi, extremal, m, common, verdict, extremal.residual * scale)
