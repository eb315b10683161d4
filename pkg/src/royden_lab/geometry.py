"""Circular multiply connected domains and their boundary samplings.

Boundary components are indexed ``0..n`` with ``0`` the outer circle.  All
normal derivatives in the package use the normal pointing into the domain:
``-(w - c0)/r0`` on the outer circle and ``(w - cj)/rj`` on hole ``j``.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path

import numpy as np

from .errors import (
    BasePointError,
    ConfigError,
    ContainmentError,
    OverlapError,
    ResolutionError,
    ShapeError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CircularDomain:
    """Outer disk minus ``n`` closed hole disks, with a base point.

    Use :func:`validate_domain` to build one from raw numbers; the
    constructor itself does not re-check the invariants.
    """

    outer_center: complex
    outer_radius: float
    holes: tuple[tuple[complex, float], ...]
    base_point: complex
    simply_connected: bool = field(default=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.holes)

    @property
    def centers(self) -> np.ndarray:
        return np.array([self.outer_center] + [c for c, _ in self.holes], dtype=complex)

    @property
    def radii(self) -> np.ndarray:
        return np.array([self.outer_radius] + [r for _, r in self.holes], dtype=float)

    def contains(self, w, margin: float = 0.0) -> np.ndarray | bool:
        """True where ``w`` lies in the open domain, at least ``margin`` from Γ."""
        w = np.asarray(w, dtype=complex)
        inside = np.abs(w - self.outer_center) < self.outer_radius - margin
        for c, r in self.holes:
            inside &= np.abs(w - c) > r + margin
        return inside if inside.ndim else bool(inside)

    def boundary_distance(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        d = self.outer_radius - np.abs(w - self.outer_center)
        for c, r in self.holes:
            d = np.minimum(d, np.abs(w - c) - r)
        return d

    def to_config(self) -> dict:
        def pt(z):
            return [repr(float(z.real)), repr(float(z.imag))]

        return {
            "outer": {"center": pt(self.outer_center), "radius": repr(float(self.outer_radius))},
            "holes": [{"center": pt(c), "radius": repr(float(r))} for c, r in self.holes],
            "base_point": pt(self.base_point),
        }


def _dec(value, what: str) -> Decimal:
    try:
        return Decimal(str(value))
    except (InvalidOperation, TypeError, ValueError):
        raise ConfigError(f"cannot parse {what}: {value!r}") from None


def _point(raw, what: str) -> tuple[Decimal, Decimal]:
    if isinstance(raw, (list, tuple)) and len(raw) == 2:
        return _dec(raw[0], what), _dec(raw[1], what)
    if isinstance(raw, (int, float, str, Decimal)):
        return _dec(raw, what), Decimal(0)
    raise ConfigError(f"{what} must be a pair [x, y], got {raw!r}")


def validate_domain(raw: dict) -> CircularDomain:
    """Check a raw geometry description and return a :class:`CircularDomain`.

    ``raw`` has the JSON config layout ``{"outer": {"center": [x, y],
    "radius": r}, "holes": [...], "base_point": [x, y]}``.  Numbers may be
    given as decimal strings; the inequality checks are done in exact decimal
    arithmetic on squared distances.
    """
    try:
        outer = raw["outer"]
        holes_raw = raw.get("holes", [])
        bp_raw = raw["base_point"]
    except (KeyError, TypeError, AttributeError) as exc:
        raise ConfigError(f"malformed domain description: missing {exc}") from None

    ox, oy = _point(outer.get("center", [0, 0]), "outer center")
    r0 = _dec(outer.get("radius"), "outer radius")
    if r0 <= 0:
        raise ConfigError("outer radius must be positive")

    holes = []
    for i, h in enumerate(holes_raw, start=1):
        hx, hy = _point(h.get("center"), f"hole {i} center")
        rh = _dec(h.get("radius"), f"hole {i} radius")
        if rh <= 0:
            raise ConfigError(f"hole {i} radius must be positive")
        gap = r0 - rh
        if gap <= 0 or (hx - ox) ** 2 + (hy - oy) ** 2 >= gap**2:
            raise ContainmentError(f"hole {i} is not strictly inside the outer circle")
        holes.append((hx, hy, rh))

    for i in range(len(holes)):
        for j in range(i + 1, len(holes)):
            xi, yi, ri = holes[i]
            xj, yj, rj = holes[j]
            if (xi - xj) ** 2 + (yi - yj) ** 2 <= (ri + rj) ** 2:
                raise OverlapError(f"holes {i + 1} and {j + 1} intersect or touch")

    bx, by = _point(bp_raw, "base point")
    if (bx - ox) ** 2 + (by - oy) ** 2 >= r0**2:
        raise BasePointError("base point is not inside the outer circle")
    for i, (hx, hy, rh) in enumerate(holes, start=1):
        if (bx - hx) ** 2 + (by - hy) ** 2 <= rh**2:
            raise BasePointError(f"base point lies in closed hole {i}")

    if not holes:
        logger.warning("domain has no holes; N(Γ) and the period machinery are trivial")

    return CircularDomain(
        outer_center=complex(float(ox), float(oy)),
        outer_radius=float(r0),
        holes=tuple((complex(float(x), float(y)), float(r)) for x, y, r in holes),
        base_point=complex(float(bx), float(by)),
        simply_connected=not holes,
    )


def load_domain(path) -> CircularDomain:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read domain config {path}: {exc}") from None
    return validate_domain(raw)


def annulus(inner_radius: float = 0.5, base_point: complex = 0.75) -> CircularDomain:
    """Zero-centred annulus ``inner_radius < |w| < 1``."""
    return validate_domain(
        {
            "outer": {"center": [0, 0], "radius": 1},
            "holes": [{"center": [0, 0], "radius": repr(float(inner_radius))}],
            "base_point": [repr(complex(base_point).real), repr(complex(base_point).imag)],
        }
    )


def unit_disk(base_point: complex = 0.0) -> CircularDomain:
    return validate_domain(
        {
            "outer": {"center": [0, 0], "radius": 1},
            "holes": [],
            "base_point": [repr(complex(base_point).real), repr(complex(base_point).imag)],
        }
    )


@dataclass(frozen=True)
class BoundarySampling:
    """Equiangular nodes on every boundary circle, ``M`` per component."""

    domain: CircularDomain
    M: int

    @property
    def n_components(self) -> int:
        return self.domain.n + 1

    @property
    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.M) / self.M

    @property
    def unit(self) -> np.ndarray:
        return np.exp(1j * self.angles)

    @property
    def points(self) -> np.ndarray:
        """Node coordinates, shape ``(n + 1, M)``."""
        return self.domain.centers[:, None] + self.domain.radii[:, None] * self.unit[None, :]

    @property
    def weights(self) -> np.ndarray:
        """Arclength weights ``r_j 2π/M``, shape ``(n + 1, M)``."""
        return np.repeat(self.domain.radii[:, None] * (2 * np.pi / self.M), self.M, axis=1)

    @property
    def normals(self) -> np.ndarray:
        """Unit normals pointing into the domain, shape ``(n + 1, M)``."""
        nrm = np.repeat(self.unit[None, :], self.n_components, axis=0)
        nrm[0] = -nrm[0]
        return nrm

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_components, self.M)

    def field(self, values) -> "BoundaryField":
        return BoundaryField(self, np.asarray(values))

    def apply(self, func) -> "BoundaryField":
        """Sample ``func`` (vectorised over complex points) at the nodes."""
        return BoundaryField(self, np.asarray(func(self.points)))

    def indicator(self, j: int) -> "BoundaryField":
        vals = np.zeros(self.shape)
        vals[j] = 1.0
        return BoundaryField(self, vals)


def sample_boundary(domain: CircularDomain, M: int) -> BoundarySampling:
    if M < 8 or M % 2:
        raise ResolutionError(f"nodes per component must be even and >= 8, got {M}")
    return BoundarySampling(domain, int(M))


@dataclass(frozen=True)
class BoundaryField:
    """Complex or real values at the nodes of a :class:`BoundarySampling`."""

    sampling: BoundarySampling
    values: np.ndarray

    def __post_init__(self):
        if np.shape(self.values) != self.sampling.shape:
            raise ShapeError(
                f"field shape {np.shape(self.values)} does not match sampling {self.sampling.shape}"
            )

    def map(self, func) -> "BoundaryField":
        return BoundaryField(self.sampling, func(self.values))

    def __mul__(self, other):
        other = other.values if isinstance(other, BoundaryField) else other
        return BoundaryField(self.sampling, self.values * other)

    __rmul__ = __mul__

    def __add__(self, other):
        other = other.values if isinstance(other, BoundaryField) else other
        return BoundaryField(self.sampling, self.values + other)

    def __sub__(self, other):
        other = other.values if isinstance(other, BoundaryField) else other
        return BoundaryField(self.sampling, self.values - other)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["component", "angle", "re", "im"])
            vals = np.asarray(self.values, dtype=complex)
            for j in range(self.sampling.n_components):
                for k, t in enumerate(self.sampling.angles):
                    z = vals[j, k]
                    writer.writerow([j, f"{t:.17g}", f"{z.real:.17g}", f"{z.imag:.17g}"])

    @classmethod
    def from_csv(cls, path, sampling: BoundarySampling) -> "BoundaryField":
        vals = np.zeros(sampling.shape, dtype=complex)
        seen = np.zeros(sampling.shape, dtype=bool)
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                j = int(row["component"])
                k = int(round(float(row["angle"]) * sampling.M / (2 * np.pi))) % sampling.M
                if j >= sampling.n_components:
                    raise ShapeError(f"component {j} not in sampling")
                vals[j, k] = complex(float(row["re"]), float(row["im"]))
                seen[j, k] = True
        if not seen.all():
            raise ShapeError(f"CSV covers {seen.sum()} of {seen.size} nodes")
        if not np.any(vals.imag):
            vals = vals.real
        return cls(sampling, vals)


def integrate_arclength(f: BoundaryField, s: BoundarySampling):
    """Trapezoidal value of the boundary integral of ``f`` against ``ds``."""
    if f.sampling.shape != s.shape:
        raise ShapeError(f"field on {f.sampling.shape} nodes, sampling has {s.shape}")
    return np.sum(f.values * s.weights)
