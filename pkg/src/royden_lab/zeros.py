"""Argument-principle zero counting and quadtree zero localisation."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import NonIntegerWindingError, ZeroLocalizationError
from .geometry import CircularDomain

logger = logging.getLogger(__name__)

_MAX_STEP = np.pi / 4


def _arg_increment(values: np.ndarray) -> tuple[float, float]:
    """Total change of argument along a closed sampled path and the largest step."""
    ratio = np.roll(values, -1) / values
    steps = np.angle(ratio)
    return float(steps.sum()), float(np.max(np.abs(steps)))


def _closed_path_winding(func, path_fn, n0: int = 64, n_max: int = 1 << 16) -> float:
    n = n0
    while True:
        t = np.arange(n) / n
        vals = np.asarray(func(path_fn(t)), dtype=complex)
        if np.any(vals == 0) or not np.all(np.isfinite(vals)):
            return float("nan")
        total, biggest = _arg_increment(vals)
        if biggest < _MAX_STEP or n >= n_max:
            return total / (2 * np.pi)
        n *= 2


def circle_winding(func, center: complex, radius: float, n0: int = 64) -> float:
    """Winding number of ``func`` along the counterclockwise circle."""
    return _closed_path_winding(func, lambda t: center + radius * np.exp(2j * np.pi * t), n0)


@dataclass(frozen=True)
class WindingReport:
    k: np.ndarray  # winding around each hole, counterclockwise
    outer_winding: int
    zero_count: int
    max_defect: float


def boundary_windings(func, domain: CircularDomain, n0: int = 64) -> np.ndarray:
    return np.array(
        [circle_winding(func, c, r, n0) for c, r in zip(domain.centers, domain.radii)]
    )


def winding_report(func, domain: CircularDomain, n0: int = 64) -> WindingReport:
    raw = boundary_windings(func, domain, n0)
    if not np.all(np.isfinite(raw)):
        raise NonIntegerWindingError("function vanishes on the boundary")
    rounded = np.rint(raw).astype(int)
    defect = float(np.max(np.abs(raw - rounded)))
    if defect >= 0.1:
        raise NonIntegerWindingError(f"winding defect {defect:.3f}; zeros too close to Γ or under-sampled")
    k = rounded[1:]
    return WindingReport(k, int(rounded[0]), int(rounded[0] - k.sum()), defect)


def count_zeros(func, domain: CircularDomain, n0: int = 64) -> int:
    """Zeros in the domain, with multiplicity, by the argument principle on Γ."""
    return winding_report(func, domain, n0).zero_count


def _rect_path(x0, y0, x1, y1):
    corners = np.array([x0 + 1j * y0, x1 + 1j * y0, x1 + 1j * y1, x0 + 1j * y1])

    def path(t):
        seg = np.minimum((t * 4).astype(int), 3)
        frac = t * 4 - seg
        return corners[seg] + (corners[(seg + 1) % 4] - corners[seg]) * frac

    return path


def _rect_outside(domain: CircularDomain, x0, y0, x1, y1) -> bool:
    corners = np.array([x0 + 1j * y0, x1 + 1j * y0, x1 + 1j * y1, x0 + 1j * y1])
    for c, r in domain.holes:
        if np.all(np.abs(corners - c) <= r):
            return True
    c0 = domain.outer_center
    nearest = complex(np.clip(c0.real, x0, x1), np.clip(c0.imag, y0, y1))
    return abs(nearest - c0) >= domain.outer_radius


def _rect_straddles(domain: CircularDomain, x0, y0, x1, y1) -> bool:
    corners = np.array([x0 + 1j * y0, x1 + 1j * y0, x1 + 1j * y1, x0 + 1j * y1])
    if np.any(np.abs(corners - domain.outer_center) >= domain.outer_radius):
        return True
    for c, r in domain.holes:
        nearest = complex(np.clip(c.real, x0, x1), np.clip(c.imag, y0, y1))
        if abs(nearest - c) <= r:
            return True
    return False


def _newton(func, z: complex, h: float = 1e-7, steps: int = 4) -> complex:
    for _ in range(steps):
        fz = complex(func(np.array([z]))[0])
        df = complex((func(np.array([z + h]))[0] - func(np.array([z - h]))[0]) / (2 * h))
        if df == 0:
            break
        z_new = z - fz / df
        if abs(z_new - z) > 10 * h:
            break
        z = z_new
    return z


def locate_zeros(
    func,
    domain: CircularDomain,
    min_size: float = 1e-6,
    expected: int | None = None,
    seed: int = 0,
) -> list[tuple[complex, int]]:
    """Zeros of ``func`` in the domain with multiplicities.

    Rectangles are split into four until they are below ``min_size``.  A
    rectangle is counted with the argument principle only once it is clear of
    the hole centres (where truncated series have poles); rectangles whose
    contour passes too close to a zero are re-split at a jittered point.
    """
    rng = np.random.default_rng(seed)
    if expected is None:
        expected = count_zeros(func, domain)
    if expected == 0:
        return []
    straddle_limit = 0.25 * float(np.min(domain.radii))
    c0, r0 = domain.outer_center, domain.outer_radius
    stack = [(c0.real - r0, c0.imag - r0, c0.real + r0, c0.imag + r0)]
    found: list[tuple[complex, int]] = []
    evaluations = 0
    while stack:
        x0, y0, x1, y1 = stack.pop()
        size = max(x1 - x0, y1 - y0)
        if _rect_outside(domain, x0, y0, x1, y1):
            continue
        count = None
        if not (_rect_straddles(domain, x0, y0, x1, y1) and size > straddle_limit):
            w = _closed_path_winding(func, _rect_path(x0, y0, x1, y1), n0=32)
            evaluations += 1
            if np.isfinite(w) and abs(w - round(w)) < 0.1:
                count = int(round(w))
                if count <= 0:
                    continue
                if size < min_size:
                    z = _newton(func, complex((x0 + x1) / 2, (y0 + y1) / 2))
                    if domain.contains(z):
                        found.append((z, count))
                    continue
        if size < min_size * 1e-3:
            raise ZeroLocalizationError("quadtree subdivision did not isolate the zeros")
        jitter = 0.0 if count is not None else 0.05
        fx = 0.5 + jitter * rng.uniform(-1, 1)
        fy = 0.5 + jitter * rng.uniform(-1, 1)
        xm, ym = x0 + fx * (x1 - x0), y0 + fy * (y1 - y0)
        stack += [(x0, y0, xm, ym), (xm, y0, x1, ym), (x0, ym, xm, y1), (xm, ym, x1, y1)]
    total = sum(m for _, m in found)
    if total != expected:
        raise ZeroLocalizationError(f"located {total} zeros, argument principle on Γ gives {expected}")
    logger.debug("located %d zeros with %d contour counts", total, evaluations)
    return found
