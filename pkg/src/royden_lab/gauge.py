"""Gauge norms on the discrete measure space (Γ, ω).

The nodes carry the ω-weights of an :class:`OmegaDensity`, renormalized to
total mass one, so ``α(1) = 1`` is exact for every p-norm.  All statements
here are about this discrete measure.

Supported kinds:

* ``p``: ``‖f‖_p`` with ``1 <= p <= inf``
* ``max``: ``max_i w_i ‖f‖_{p_i}``
* ``sum``: ``sum_i w_i ‖f‖_{p_i}``
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import AxiomViolation, ConfigError, ConvergenceError
from .geometry import BoundaryField
from .laplace import OmegaDensity

logger = logging.getLogger(__name__)

KINDS = ("p", "max", "sum")
STALL_GAP = 1e-6  # accepted certificate when rounding stops further descent


@dataclass(frozen=True)
class GaugeNormSpec:
    kind: str
    terms: tuple[tuple[float, float], ...]  # (weight, p)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown gauge kind {self.kind!r}")
        if not self.terms:
            raise ConfigError("gauge spec needs at least one term")
        for w, p in self.terms:
            if not (np.isfinite(w) and w > 0):
                raise ConfigError(f"term weight must be positive, got {w}")
            if not p >= 1:
                raise ConfigError(f"exponent must lie in [1, inf], got {p}")
        if self.kind == "p" and len(self.terms) != 1:
            raise ConfigError("kind 'p' takes a single term")

    @classmethod
    def p_norm(cls, p: float, weight: float = 1.0) -> "GaugeNormSpec":
        return cls("p", ((float(weight), float(p)),))

    @classmethod
    def max_of(cls, terms) -> "GaugeNormSpec":
        return cls("max", tuple((float(w), float(p)) for w, p in terms))

    @classmethod
    def sum_of(cls, terms) -> "GaugeNormSpec":
        return cls("sum", tuple((float(w), float(p)) for w, p in terms))

    @classmethod
    def from_config(cls, raw: dict) -> "GaugeNormSpec":
        try:
            kind = raw["kind"]
            if kind == "p":
                return cls.p_norm(_exponent(raw["p"]), raw.get("w", 1.0))
            terms = [(float(t["w"]), _exponent(t["p"])) for t in raw["terms"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed gauge spec {raw!r}: {exc}") from None
        return cls(kind, tuple(terms))

    def to_config(self) -> dict:
        def p_out(p):
            return "inf" if np.isinf(p) else p

        if self.kind == "p":
            w, p = self.terms[0]
            return {"kind": "p", "p": p_out(p)} if w == 1.0 else {"kind": "p", "p": p_out(p), "w": w}
        return {"kind": self.kind, "terms": [{"w": w, "p": p_out(p)} for w, p in self.terms]}


def _exponent(raw) -> float:
    if isinstance(raw, str) and raw.strip().lower() in ("inf", "infinity", "∞"):
        return float("inf")
    return float(raw)


def _mu(density: OmegaDensity) -> np.ndarray:
    wts = density.weights.ravel()
    return wts / wts.sum()


def _pnorm(x: np.ndarray, mu: np.ndarray, p: float) -> float:
    if np.isinf(p):
        return float(np.max(x[mu > 0])) if np.any(mu > 0) else 0.0
    if p == 1:
        return float(np.sum(mu * x))
    top = np.max(x)
    if top == 0:
        return 0.0
    return float(top * np.sum(mu * (x / top) ** p) ** (1 / p))


def _term_values(spec: GaugeNormSpec, x: np.ndarray, mu: np.ndarray) -> np.ndarray:
    return np.array([w * _pnorm(x, mu, p) for w, p in spec.terms])


def _combine(spec: GaugeNormSpec, vals: np.ndarray) -> float:
    return float(np.max(vals)) if spec.kind == "max" else float(np.sum(vals))


def gauge_eval(spec: GaugeNormSpec, f, density: OmegaDensity, s=None) -> float:
    """``α(f)`` with ``f`` a :class:`BoundaryField` or nodal array."""
    vals = f.values if isinstance(f, BoundaryField) else f
    x = np.abs(np.asarray(vals)).ravel()
    mu = _mu(density)
    if x.shape != mu.shape:
        raise ValueError(f"field has {x.size} nodes, density has {mu.size}")
    return _combine(spec, _term_values(spec, x, mu))


@dataclass(frozen=True)
class AxiomReport:
    alpha_one: float
    dominating_margin: float
    arc_masses: np.ndarray
    continuity: np.ndarray
    failures: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def shrinking_arcs(density: OmegaDensity) -> list[np.ndarray]:
    """Nested node sets on Γ₀ halving in size down to a single node."""
    s = density.sampling
    arcs = []
    count = s.M // 2
    while count >= 1:
        mask = np.zeros(s.shape, dtype=bool)
        mask[0, :count] = True
        arcs.append(mask)
        count //= 2
    return arcs


def probe_fields(density: OmegaDensity, count: int = 32, seed: int = 0) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    shape = density.sampling.shape
    probes = [np.ones(shape)]
    for arc in shrinking_arcs(density):
        probes.append(arc.astype(float))
    for _ in range(count):
        probes.append(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        probes.append(rng.exponential(size=shape) ** 3)
    return probes


def check_gauge_axioms(spec: GaugeNormSpec, density: OmegaDensity, tol: float = 1e-12) -> AxiomReport:
    """Normalization, domination of ``‖·‖₁`` on probes and continuity on shrinking arcs."""
    failures = []
    mu = _mu(density)
    alpha_one = gauge_eval(spec, np.ones(mu.size), density)
    if abs(alpha_one - 1) > tol:
        failures.append(f"alpha(1) = {alpha_one!r}, not 1")
    margins = []
    for f in probe_fields(density):
        x = np.abs(f).ravel()
        margins.append(gauge_eval(spec, x, density) - float(np.sum(mu * x)))
    margin = float(min(margins))
    if margin < -tol * max(1.0, alpha_one):
        failures.append(f"not dominating: alpha(f) - ||f||_1 = {margin!r} on a probe")
    arcs = shrinking_arcs(density)
    masses = np.array([float(np.sum(mu[a.ravel()])) for a in arcs])
    cont = np.array([gauge_eval(spec, a.astype(float), density) for a in arcs])
    if np.any(np.diff(cont) >= -1e-12 * cont[:-1]):
        failures.append("alpha(chi_E) is not strictly decreasing on shrinking arcs")
    report = AxiomReport(alpha_one, margin, masses, cont, tuple(failures))
    if failures:
        raise AxiomViolation("; ".join(failures), report)
    return report


@dataclass(frozen=True)
class DualNormResult:
    value: float
    gap: float  # relative Frank-Wolfe gap certificate
    iterations: int
    closed_form: float | None = None


def _term_grads(spec, x, mu):
    """Values and gradients of each weighted term at ``x >= 0``."""
    vals, grads = [], []
    for w, p in spec.terms:
        if np.isinf(p):
            g = np.zeros_like(x)
            g[np.argmax(x)] = 1.0
            vals.append(w * float(np.max(x)))
        elif p == 1:
            g = mu.copy()
            vals.append(w * float(np.sum(mu * x)))
        else:
            nrm = _pnorm(x, mu, p)
            g = mu * (x / nrm) ** (p - 1) if nrm > 0 else np.zeros_like(x)
            vals.append(w * nrm)
        grads.append(w * g)
    return np.array(vals), np.array(grads)


_FLOOR = 700.0  # log-range kept below the largest weight


def _coordinate_targets(spec, lam, c, mu, s, phi):
    """Log of the ``s_i`` solving ``g_i(s_i) = φ`` with the term norms frozen.

    Each ``g_i`` is a constant (from p = 1 terms) plus increasing powers of
    ``s_i``, so the equation is monotone; coordinates whose constant part
    already exceeds ``φ`` go to the floor.  For a single p-norm this is the
    exact minimizer.
    """
    x = s / c
    a = np.zeros_like(s)
    powers, coefs = [], []
    for (w, p), l in zip(spec.terms, lam):
        if l == 0:
            continue
        if p == 1:
            a += l * w * mu / c
        else:
            nrm = _pnorm(x, mu, p)
            powers.append(p - 1)
            coefs.append(l * w * mu / (c**p * nrm ** (p - 1)))
    rhs = phi - a
    live = rhs > 0
    out = np.full(s.shape, -np.inf)
    if not powers or not np.any(live):
        out[np.argmin(a)] = 0.0  # linear objective: a vertex is optimal
        return out
    r = rhs[live]
    roots = np.array([np.log(r / b[live]) / q for q, b in zip(powers, coefs)])
    hi = roots.min(axis=0)
    if len(powers) == 1:
        out[live] = hi
        return out
    lo = np.array([np.log(r / (len(powers) * b[live])) / q for q, b in zip(powers, coefs)]).min(axis=0)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        val = sum(b[live] * np.exp(q * mid) for q, b in zip(powers, coefs))
        too_big = val > r
        hi = np.where(too_big, mid, hi)
        lo = np.where(too_big, lo, mid)
    out[live] = 0.5 * (lo + hi)
    return out


def _min_over_simplex(spec, lam, c, mu, s0, budget, rtol, strict=True):
    """Minimize ``Σ λ_i α_i(s/c)`` over the probability simplex.

    Each step moves ``log s`` towards the coordinate-wise stationary point of
    :func:`_coordinate_targets` (sup-norm terms fall back to the multiplicative
    step ``s (g/φ)^(-1)``), with backtracking on the step length.  Stops on a
    relative Frank-Wolfe gap below ``rtol``.
    """
    smooth = not any(np.isinf(p) for _, p in spec.terms)

    def weights(logs):
        s = np.exp(logs - logs.max())
        return s / s.sum()

    def objective(s):
        vals, grads = _term_grads(spec, s / c, mu)
        return float(lam @ vals), (lam @ grads) / c, vals

    logs = np.log(s0)
    logs = np.maximum(logs, logs.max() - _FLOOR)
    s = weights(logs)
    phi, grad, vals = objective(s)
    it = flat = 0
    for it in range(1, budget + 1):
        gap = (phi - float(np.min(grad))) / phi
        if gap <= rtol:
            return s, phi, vals, gap, it
        if smooth:
            target = _coordinate_targets(spec, lam, c, mu, s, phi)
        else:
            target = logs - np.log(np.maximum(grad, 1e-300 * phi) / phi)
        target = np.maximum(target, np.max(target) - _FLOOR)
        eta = 1.0
        while True:
            trial_logs = logs + eta * (target - logs)
            trial = weights(trial_logs)
            phi_t, grad_t, vals_t = objective(trial)
            if phi_t <= phi or eta < 1e-12:
                break
            eta *= 0.5
        if not phi_t <= phi:
            break  # no representable decrease left
        flat = flat + 1 if phi - phi_t <= 1e-15 * phi else 0
        logs, s, phi, grad, vals = trial_logs, trial, phi_t, grad_t, vals_t
        if flat >= 20:
            break  # stuck at the rounding floor
    gap = (phi - float(np.min(grad))) / phi
    if strict and gap > STALL_GAP:
        raise ConvergenceError(f"dual norm solver stopped with relative gap {gap:.2e} after {it} steps")
    return s, phi, vals, gap, it


def dual_norm_report(
    spec: GaugeNormSpec, f, density: OmegaDensity, budget: int | None = None, rtol: float = 1e-9
) -> DualNormResult:
    """``α′(f) = sup{|∫ f h dω| : α(h) <= 1}`` by iterative optimization.

    With ``c = |f| μ`` the supremum equals ``1 / min α(s/c)`` over the
    simplex restricted to the support of ``c``.  For a ``max`` spec the
    minimum of the max is taken through its concave dual in the term
    weights.  p-norm specs are additionally evaluated in closed form.
    """
    vals = f.values if isinstance(f, BoundaryField) else f
    mu_all = _mu(density)
    c_all = np.abs(np.asarray(vals)).ravel() * mu_all
    closed = _closed_form(spec, np.abs(np.asarray(vals)).ravel(), mu_all)
    support = c_all > 0
    if not np.any(support):
        return DualNormResult(0.0, 0.0, 0, closed)
    c, mu = c_all[support], mu_all[support]
    budget = budget or 10 * mu_all.size
    if spec.kind == "p" and np.isinf(spec.terms[0][1]):
        # the sup-norm objective is not smooth; its minimizer s ∝ c is explicit
        return DualNormResult(closed, 0.0, 0, closed)
    s0 = c / c.sum()
    m = len(spec.terms)
    if spec.kind != "max" or m == 1:
        _, phi, _, gap, it = _min_over_simplex(spec, np.ones(m), c, mu, s0, budget, rtol)
        return DualNormResult(1.0 / phi, gap, it, closed)

    state = {"s": s0, "iterations": 0}

    def inner(lam):
        # a pure warm start keeps coordinates parked at the log floor, which
        # then take many steps to revive; mixing in s0 keeps them all alive
        start = 0.5 * (state["s"] + s0)
        s, H, tv, gap, it = _min_over_simplex(spec, lam, c, mu, start, budget, rtol)
        state.update(s=s, tv=tv, iterations=state["iterations"] + it)
        # phi (1 - gap) is a certified lower bound by homogeneity
        return H * (1 - max(gap, 0.0))

    s_bar, H = _cutting_planes(inner, state, m, budget, rtol)
    worst = float(np.max(_term_values(spec, s_bar / c, mu)))
    gap = (worst - H) / H
    if gap > STALL_GAP:
        raise ConvergenceError(f"max-gauge dual stopped with saddle gap {gap:.2e}")
    # 1/worst is attained by a feasible h, so it is a certified lower bound
    return DualNormResult(1.0 / worst, gap, state["iterations"], closed)


def _cutting_planes(inner, state, m, budget, rtol):
    """Kelley's method for the concave inner minimum over term weights.

    Every inner solve at ``λ`` gives the cut ``H(λ') <= λ'·α(s)``.  The LP
    over the cuts bounds the maximum from above, and its dual multipliers
    average the visited points into a simplex point whose largest term is at
    most that bound.  Returns the averaged point and the best lower value.
    """
    lam = np.full(m, 1.0 / m)
    cuts, points = [], []
    best, theta, since = -np.inf, None, 0
    for _ in range(max(50, budget // 10)):
        H = inner(lam)
        since = 0 if H > best * (1 + rtol) else since + 1
        best = max(best, H)
        cuts.append(state["tv"])
        points.append(state["s"])
        k = len(cuts)
        scale = best  # cut values of order one keep the LP tolerances meaningful
        res = optimize.linprog(
            np.r_[np.zeros(m), -1.0],
            A_ub=np.hstack([-np.array(cuts) / scale, np.ones((k, 1))]),
            b_ub=np.zeros(k),
            A_eq=np.r_[np.ones(m), 0.0][None, :],
            b_eq=[1.0],
            bounds=[(0, None)] * m + [(None, None)],
            method="highs",
            options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
        )
        if res.status != 0:
            raise ConvergenceError(f"cutting-plane LP failed: {res.message}")
        theta = np.clip(-res.ineqlin.marginals, 0.0, None)
        upper = -res.fun * scale
        new = np.clip(res.x[:m], 0.0, None)
        new /= new.sum()
        # cuts are only as sharp as the inner solves; stop once they stop moving
        if (upper - best) / best <= rtol or np.max(np.abs(new - lam)) < 1e-12 or since >= 20:
            break
        lam = new
    theta /= theta.sum()
    s_bar = np.sum(theta[:, None] * np.array(points), axis=0)
    return s_bar / s_bar.sum(), best


def dual_norm(spec: GaugeNormSpec, f, density: OmegaDensity, budget: int | None = None) -> float:
    res = dual_norm_report(spec, f, density, budget)
    if res.closed_form is not None and abs(res.value - res.closed_form) > 1e-6 * max(1.0, res.closed_form):
        raise ConvergenceError(f"iterative dual {res.value!r} disagrees with exact {res.closed_form!r}")
    return res.value


def _closed_form(spec: GaugeNormSpec, x: np.ndarray, mu: np.ndarray) -> float | None:
    if spec.kind != "p":
        return None
    w, p = spec.terms[0]
    q = np.inf if p == 1 else (1.0 if np.isinf(p) else p / (p - 1))
    return _pnorm(x, mu, q) / w


def h_alpha_membership(f, spec: GaugeNormSpec, density: OmegaDensity) -> tuple[bool, float]:
    """Membership of a series function in the discrete Hᵅ, with its norm."""
    vals = np.asarray(f(density.sampling.points))
    norm = gauge_eval(spec, vals, density)
    return bool(np.isfinite(norm)), norm
