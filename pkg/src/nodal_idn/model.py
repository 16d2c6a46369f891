"""Model domains, nodal identifications, charge families and genericity.

A nodal model is a planar domain (disk or annulus) together with groups of
identified interior points and complex charges that sum to zero per group.
Genericity and partition inference are exact exhaustive searches with hard
size caps; node counts in practice are tiny.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import jsonio
from .errors import ModelError, PartitionError
from .spectral import fourier_derivative, parameter_grid

MODEL_SCHEMA = "nodal-idn/model/1"
MAX_GENERIC_POINTS = 20
MAX_PARTITION_POINTS = 16
INTERIOR_MARGIN = 0.05


@dataclass(frozen=True)
class BoundaryCurve:
    """Closed oriented curve sampled at t_k = 2*pi*k/N with derivatives."""

    positions: np.ndarray
    derivatives: np.ndarray
    orientation: int = 1

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=complex)
        der = np.asarray(self.derivatives, dtype=complex)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "derivatives", der)
        n = pos.size
        if n < 4 or n % 2 != 0:
            raise ModelError("sample count must be a positive even integer >= 4")
        if der.size != n:
            raise ModelError("positions and derivatives must have equal length")
        if np.min(np.abs(der)) == 0.0:
            raise ModelError("curve derivative vanishes at a sample")
        gaps = np.abs(pos[:, None] - pos[None, :])
        np.fill_diagonal(gaps, np.inf)
        if np.min(gaps) == 0.0:
            raise ModelError("curve samples are not pairwise distinct")
        if self.orientation not in (1, -1):
            raise ModelError("orientation must be +1 or -1")
        if _polygon_self_intersects(pos):
            raise ModelError("polygonal closure of the samples self-intersects")

    @property
    def n(self) -> int:
        return self.positions.size

    @property
    def parameters(self) -> np.ndarray:
        return parameter_grid(self.n)

    @property
    def unit_tangent(self) -> np.ndarray:
        return self.derivatives / np.abs(self.derivatives)

    @property
    def outward_normal(self) -> np.ndarray:
        # (normal, tangent) is a positively oriented frame with the domain
        # on the left of the travel direction.
        return -1j * self.unit_tangent

    def second_derivatives(self) -> np.ndarray:
        return fourier_derivative(self.derivatives)

    def spectral_consistency(self) -> float:
        """Relative sup-norm gap between stored and re-derived derivatives."""
        rederived = fourier_derivative(self.positions)
        scale = np.max(np.abs(self.derivatives))
        return float(np.max(np.abs(rederived - self.derivatives)) / scale)

    def reversed(self) -> "BoundaryCurve":
        """Same geometric curve with the opposite orientation."""
        idx = (-np.arange(self.n)) % self.n
        return BoundaryCurve(self.positions[idx], -self.derivatives[idx],
                             -self.orientation)

    def distance_to(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.min(np.abs(z[..., None] - self.positions), axis=-1)

    @staticmethod
    def circle(radius: float, n: int, center: complex = 0.0,
               orientation: int = 1) -> "BoundaryCurve":
        t = parameter_grid(n)
        if orientation == 1:
            pos = center + radius * np.exp(1j * t)
            der = 1j * radius * np.exp(1j * t)
        else:
            pos = center + radius * np.exp(-1j * t)
            der = -1j * radius * np.exp(-1j * t)
        return BoundaryCurve(pos, der, orientation)

    @staticmethod
    def ellipse(a: float, b: float, n: int) -> "BoundaryCurve":
        t = parameter_grid(n)
        pos = a * np.cos(t) + 1j * b * np.sin(t)
        der = -a * np.sin(t) + 1j * b * np.cos(t)
        return BoundaryCurve(pos, der, 1)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "positions": jsonio.encode_complex_array(self.positions),
            "derivatives": jsonio.encode_complex_array(self.derivatives),
            "orientation": self.orientation,
        }

    @staticmethod
    def from_json(doc: dict) -> "BoundaryCurve":
        return BoundaryCurve(jsonio.decode_complex_array(doc["positions"]),
                             jsonio.decode_complex_array(doc["derivatives"]),
                             int(doc.get("orientation", 1)))


def _polygon_self_intersects(pos: np.ndarray) -> bool:
    """Segment-intersection scan of the closed polygon through the samples."""
    n = pos.size
    a = pos
    b = np.roll(pos, -1)
    ax, ay = a.real, a.imag
    bx, by = b.real, b.imag

    def cross(ox, oy, px, py, qx, qy):
        return (px - ox) * (qy - oy) - (py - oy) * (qx - ox)

    d1 = cross(ax[:, None], ay[:, None], bx[:, None], by[:, None],
               ax[None, :], ay[None, :])
    d2 = cross(ax[:, None], ay[:, None], bx[:, None], by[:, None],
               bx[None, :], by[None, :])
    d3 = cross(ax[None, :], ay[None, :], bx[None, :], by[None, :],
               ax[:, None], ay[:, None])
    d4 = cross(ax[None, :], ay[None, :], bx[None, :], by[None, :],
               bx[:, None], by[:, None])
    proper = (d1 * d2 < 0) & (d3 * d4 < 0)
    idx = np.arange(n)
    diff = (idx[:, None] - idx[None, :]) % n
    adjacent = (diff == 0) | (diff == 1) | (diff == n - 1)
    return bool(np.any(proper & ~adjacent))


@dataclass(frozen=True)
class DiskDomain:
    radius: float
    center: complex = 0.0 + 0.0j

    kind = "disk"

    def contains(self, z, margin: float = 0.0) -> np.ndarray:
        r = np.abs(np.asarray(z, dtype=complex) - self.center)
        return r < self.radius - margin

    def boundary(self, n: int) -> BoundaryCurve:
        return BoundaryCurve.circle(self.radius, n, self.center)

    def to_json(self) -> dict:
        return {"kind": "disk", "radius": self.radius,
                "center": jsonio.encode_complex(self.center)}


@dataclass(frozen=True)
class AnnulusDomain:
    inner_radius: float
    outer_radius: float
    center: complex = 0.0 + 0.0j

    kind = "annulus"

    def __post_init__(self):
        if not 0 < self.inner_radius < self.outer_radius:
            raise ModelError("annulus radii must satisfy 0 < r < R")

    def contains(self, z, margin: float = 0.0) -> np.ndarray:
        r = np.abs(np.asarray(z, dtype=complex) - self.center)
        return (r > self.inner_radius + margin) & (r < self.outer_radius - margin)

    def boundaries(self, n: int) -> tuple[BoundaryCurve, BoundaryCurve]:
        """Outer (ccw) and inner (cw) components, domain on the left of both."""
        outer = BoundaryCurve.circle(self.outer_radius, n, self.center, 1)
        inner = BoundaryCurve.circle(self.inner_radius, n, self.center, -1)
        return outer, inner

    def to_json(self) -> dict:
        return {"kind": "annulus", "inner_radius": self.inner_radius,
                "outer_radius": self.outer_radius,
                "center": jsonio.encode_complex(self.center)}


def domain_from_json(doc: dict):
    if doc["kind"] == "disk":
        return DiskDomain(float(doc["radius"]), jsonio.decode_complex(doc["center"]))
    if doc["kind"] == "annulus":
        return AnnulusDomain(float(doc["inner_radius"]), float(doc["outer_radius"]),
                             jsonio.decode_complex(doc["center"]))
    raise ModelError(f"unknown domain kind {doc['kind']!r}")


@dataclass(frozen=True)
class AdmissibleFamily:
    """Per node group, complex charges summing to zero."""

    charges: tuple

    def __post_init__(self):
        groups = tuple(np.asarray(g, dtype=complex) for g in self.charges)
        object.__setattr__(self, "charges", groups)
        for g in groups:
            if g.size < 2:
                raise ModelError("each node group needs at least 2 charges")
            scale = np.max(np.abs(g))
            if scale == 0.0:
                continue
            if abs(np.sum(g)) > 1e-12 * scale:
                raise ModelError("charges within a node group must sum to zero")

    @property
    def group_sizes(self) -> tuple:
        return tuple(g.size for g in self.charges)

    @property
    def total_points(self) -> int:
        return sum(self.group_sizes)

    def flat(self) -> np.ndarray:
        return np.concatenate([g for g in self.charges]) if self.charges \
            else np.zeros(0, dtype=complex)

    def scaled(self, factor: complex) -> "AdmissibleFamily":
        return AdmissibleFamily(tuple(g * factor for g in self.charges))

    def to_json(self) -> list:
        return [jsonio.encode_complex_array(g) for g in self.charges]

    @staticmethod
    def from_json(items) -> "AdmissibleFamily":
        return AdmissibleFamily(tuple(jsonio.decode_complex_array(g) for g in items))


@dataclass(frozen=True)
class NodalDomainModel:
    """Planar model domain with identified interior points and charges."""

    domain: object
    boundary: BoundaryCurve
    node_groups: tuple = ()
    auxiliary_poles: tuple = field(default=())

    def __post_init__(self):
        groups = tuple(np.asarray(g, dtype=complex) for g in self.node_groups)
        object.__setattr__(self, "node_groups", groups)
        aux = tuple((complex(p), complex(r)) for p, r in self.auxiliary_poles)
        object.__setattr__(self, "auxiliary_poles", aux)
        margin = INTERIOR_MARGIN * _domain_scale(self.domain)
        seen = []
        for g in groups:
            if g.size < 2:
                raise ModelError("a node group must identify at least 2 points")
            if not np.all(self.domain.contains(g, margin=margin)):
                raise ModelError("node-group point too close to the boundary "
                                 "or outside the domain")
            pair = np.abs(g[:, None] - g[None, :])
            np.fill_diagonal(pair, np.inf)
            if np.min(pair) == 0.0:
                raise ModelError("points within a node group must be distinct")
            seen.extend(g.tolist())
        if seen:
            arr = np.array(seen)
            pair = np.abs(arr[:, None] - arr[None, :])
            np.fill_diagonal(pair, np.inf)
            if np.min(pair) == 0.0:
                raise ModelError("node groups must be pairwise disjoint")
        if aux:
            pts = np.array([p for p, _ in aux])
            res = np.array([r for _, r in aux])
            if not np.all(self.domain.contains(pts, margin=margin)):
                raise ModelError("auxiliary pole outside the domain interior")
            if abs(np.sum(res)) > 1e-12 * max(1.0, np.max(np.abs(res))):
                raise ModelError("auxiliary-pole residues must sum to zero")

    def check_family(self, family: AdmissibleFamily) -> None:
        if family.group_sizes != tuple(g.size for g in self.node_groups):
            raise ModelError("family group sizes do not match the node groups")

    def all_points(self) -> np.ndarray:
        if not self.node_groups:
            return np.zeros(0, dtype=complex)
        return np.concatenate(self.node_groups)

    def to_json(self) -> dict:
        return {
            "schema": MODEL_SCHEMA,
            "domain": self.domain.to_json(),
            "boundary": self.boundary.to_json(),
            "node_groups": [jsonio.encode_complex_array(g) for g in self.node_groups],
            "auxiliary_poles": [[jsonio.encode_complex(p), jsonio.encode_complex(r)]
                                for p, r in self.auxiliary_poles],
        }

    @staticmethod
    def from_json(doc: dict) -> "NodalDomainModel":
        jsonio.require_schema(doc, MODEL_SCHEMA)
        groups = tuple(jsonio.decode_complex_array(g) for g in doc["node_groups"])
        aux = tuple((jsonio.decode_complex(p), jsonio.decode_complex(r))
                    for p, r in doc.get("auxiliary_poles", []))
        return NodalDomainModel(domain_from_json(doc["domain"]),
                                BoundaryCurve.from_json(doc["boundary"]),
                                groups, aux)


def _domain_scale(domain) -> float:
    if isinstance(domain, DiskDomain):
        return domain.radius
    if isinstance(domain, AnnulusDomain):
        return domain.outer_radius
    return 1.0


def is_generic_family(family: AdmissibleFamily,
                      tol: float = 1e-12) -> tuple[bool, list | None]:
    """Exhaustively test the proper-subset-sum genericity condition.

    Returns (True, None) when every choice of proper subsets T_a of the
    groups, not all empty, has nonzero total charge sum; otherwise returns
    (False, witness) with one violating subset family (indices per group).
    """
    if family.total_points > MAX_GENERIC_POINTS:
        raise ModelError(f"more than {MAX_GENERIC_POINTS} identified points")
    scale = max(np.max(np.abs(g)) for g in family.charges) if family.charges else 1.0
    per_group = []
    for g in family.charges:
        options = []
        for r in range(g.size):  # proper subsets only: size < group size
            for combo in itertools.combinations(range(g.size), r):
                options.append((combo, complex(np.sum(g[list(combo)]))))
        per_group.append(options)
    for choice in itertools.product(*per_group):
        if all(len(c[0]) == 0 for c in choice):
            continue
        total = sum(c[1] for c in choice)
        if abs(total) <= tol * max(scale, 1e-300):
            return False, [list(c[0]) for c in choice]
    return True, None


def _zero_sum_masks(values: np.ndarray, tol: float) -> list[int]:
    """Bitmasks of all nonempty subsets with |sum| <= tol."""
    n = values.size
    sums = np.zeros(1 << n, dtype=complex)
    for mask in range(1, 1 << n):
        low = mask & (-mask)
        sums[mask] = sums[mask ^ low] + values[low.bit_length() - 1]
    return [m for m in range(1, 1 << n) if abs(sums[m]) <= tol]


def finest_zero_sum_partition(residues, tol: float | None = None):
    """Partition points into minimal nonempty zero-sum groups.

    ``residues`` is a sequence of (point, value) pairs or a plain sequence of
    values.  Returns (partitions, unique) where ``partitions`` is a list of
    partitions (each a list of index tuples) that consist solely of minimal
    zero-sum groups, and ``unique`` is True when exactly one exists.
    """
    if len(residues) and isinstance(residues[0], (tuple, list)):
        values = np.array([v for _, v in residues], dtype=complex)
    else:
        values = np.asarray(residues, dtype=complex)
    n = values.size
    if n == 0:
        return [[]], True
    if n > MAX_PARTITION_POINTS:
        raise PartitionError(f"more than {MAX_PARTITION_POINTS} points")
    scale = float(np.max(np.abs(values)))
    if tol is None:
        tol = 1e-6 * max(scale, 1e-300)
    if abs(np.sum(values)) > max(tol * n, tol):
        raise PartitionError("not admissible within tolerance")
    zero_masks = set(_zero_sum_masks(values, tol))
    minimal = [m for m in zero_masks
               if not any(s != m and (s & m) == s for s in zero_masks)]

    partitions: list[list[int]] = []

    def extend(used: int, parts: list[int]):
        if used == (1 << n) - 1:
            partitions.append(sorted(parts))
            return
        rest = ~used & ((1 << n) - 1)
        low = rest & (-rest)
        for m in minimal:
            if (m & low) and not (m & used):
                extend(used | m, parts + [m])

    extend(0, [])
    if not partitions:
        raise PartitionError("not admissible within tolerance")
    unique_parts = []
    for p in partitions:
        if p not in unique_parts:
            unique_parts.append(p)
    as_indices = [[tuple(i for i in range(n) if mask >> i & 1) for mask in p]
                  for p in unique_parts]
    return as_indices, len(as_indices) == 1


def zero_sum_subsets(values, tol: float) -> list[tuple[int, ...]]:
    """All nonempty zero-sum index subsets (test support)."""
    vals = np.asarray(values, dtype=complex)
    return [tuple(i for i in range(vals.size) if m >> i & 1)
            for m in _zero_sum_masks(vals, tol)]


def has_distinct_pair_magnitudes(family: AdmissibleFamily,
                                 tol: float = 1e-12) -> bool:
    """Genericity predicate for bipolar pairs: |c_j| pairwise distinct.

    Applies to families whose groups are all charge pairs (c, -c); this is
    a different condition from the subset-sum genericity and neither
    implies the other.
    """
    mags = []
    for group in family.charges:
        if group.size != 2 or abs(group[0] + group[1]) > tol * max(
                1.0, float(np.max(np.abs(group)))):
            raise ModelError("predicate applies to bipolar pair families")
        mags.append(abs(group[0]))
    mags = np.asarray(mags)
    gaps = np.abs(mags[:, None] - mags[None, :])
    np.fill_diagonal(gaps, np.inf)
    return bool(np.min(gaps) > tol * max(1.0, float(np.max(mags))))
