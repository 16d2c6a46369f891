"""Singularity analysis of the reconstructed curve.

Double points of the image curve are located by intersecting recovered
sheets, refined by Newton iteration on their difference.  Around each
candidate a small contour in the base coordinate is tracked; the monodromy
permutation splits the sheets into cycles, one per local irreducible
branch.  A branch belongs to a node exactly when some contour residue of a
recovered form quotient is nonzero, in which case that residue is the
charge of the branch; zero-residue branches are spurious intersections (or
carry undetectable zero charges).  A logarithmic-divergence test of the
Dirichlet energy on shrinking annuli gives a second, independent verdict.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jsonio
from .dirichlet import DNDatum
from .errors import FiberError, MonodromyError, PartitionError
from .model import finest_zero_sum_partition, is_generic_family
from .moments import (FiberWindow, MomentEngine, ReconstructedCurve,
                      continue_fibers, recover_form_quotient)

NODES_SCHEMA = "nodal-idn/nodes/1"
DEFAULT_CONTOUR_RADIUS = 0.05
DEFAULT_CONTOUR_NODES = 128
SLOPE_CAP = 50.0


@dataclass
class SingularPointCandidate:
    """A transverse sheet crossing in the image curve."""

    xi: complex
    h: complex
    window_index: int
    sheet_pair: tuple
    slopes: tuple

    @property
    def point(self) -> tuple:
        return (self.h, self.xi)


def _fit_sheet_polynomial(window: FiberWindow, j: int, degree: int = 5):
    """Least-squares polynomial model of sheet j over the window grid."""
    x = (window.grid - window.center) / window.radius
    basis = np.vander(x, degree + 1, increasing=True)
    coeffs, *_ = np.linalg.lstsq(basis, window.roots[:, j], rcond=None)
    resid = float(np.max(np.abs(basis @ coeffs - window.roots[:, j])))
    return coeffs, resid


def _sheet_values_at(engine: MomentEngine, window: FiberWindow, xi: complex,
                     steps: int = 12) -> np.ndarray:
    """Continuation of all window sheets from the nearest grid point to xi."""
    k = int(np.argmin(np.abs(window.grid - xi)))
    start_xi = window.grid[k]
    start = window.roots[k]
    if abs(xi - start_xi) == 0.0:
        return start.copy()
    path = start_xi + (xi - start_xi) * (np.arange(1, steps + 1) / steps)
    return continue_fibers(engine, window.p, path, start_roots=start)[-1]


class _SheetTracker:
    """Incremental fiber continuation with a persistent current position."""

    def __init__(self, engine: MomentEngine, window: FiberWindow, xi0: complex):
        self.engine = engine
        self.p = window.p
        self.xi = complex(xi0)
        self.roots = _sheet_values_at(engine, window, self.xi)

    def at(self, xi: complex) -> np.ndarray:
        xi = complex(xi)
        if xi != self.xi:
            path = self.xi + (xi - self.xi) * (np.arange(1, 3) / 2.0)
            self.roots = continue_fibers(self.engine, self.p, path,
                                         start_roots=self.roots)[-1]
            self.xi = xi
        return self.roots


def locate_singularities(curve: ReconstructedCurve, datum: DNDatum,
                         tau_factor: float = 1e-4,
                         fit_degree: int = 3) -> list[SingularPointCandidate]:
    """Transverse double-point candidates from pairwise sheet crossings.

    Per window, the difference of every sheet pair is modelled by a low
    degree polynomial whose roots seed Newton refinement on the true sheet
    difference; candidates where the difference cannot be driven below
    tau_sing = tau_factor * window radius (branch-point collisions) are
    discarded, as are pairs with near-equal or runaway slopes.
    """
    engine = MomentEngine.from_datum(datum)
    candidates: list[SingularPointCandidate] = []
    for widx, window in enumerate(curve.windows):
        if window.p < 2:
            continue
        tau_sing = tau_factor * window.radius
        scale_h = max(1.0, float(np.max(np.abs(window.roots))))
        x = (window.grid - window.center) / window.radius
        basis = np.vander(x, fit_degree + 1, increasing=True)
        for j in range(window.p):
            for k in range(j + 1, window.p):
                diff = window.roots[:, j] - window.roots[:, k]
                coeffs, *_ = np.linalg.lstsq(basis, diff, rcond=None)
                from .oracles import polynomial_roots
                for root in polynomial_roots(coeffs):
                    if abs(root) > 3.0:
                        continue
                    seed = window.center + root * window.radius
                    refined = _refine_crossing(engine, window, j, k, seed,
                                               tau_sing * scale_h)
                    if refined is not None:
                        candidates.append(SingularPointCandidate(
                            refined[0], refined[1], widx, (j, k),
                            (refined[2], refined[3])))
    return _cluster_candidates(candidates)


def _refine_crossing(engine, window, j, k, seed, tol, iterations: int = 3,
                     circle_nodes: int = 16):
    """Locate the zero of h_j - h_k from fits on small circles.

    Sheets cannot be tracked into the collision itself, so the difference is
    modelled by a quadratic fitted on a circle around the current estimate
    and the model root re-centers the circle.  Branch-point collisions leave
    a large fit residual (a square-root singularity inside the circle) and
    are rejected, as are non-transverse slope pairs.
    """
    from .errors import MomentError
    center = complex(seed)
    rho = 0.05 * window.radius
    ang = 2 * np.pi * np.arange(circle_nodes) / circle_nodes
    fit = None
    try:
        for _ in range(iterations):
            start = center + rho * np.exp(1j * ang[0])
            seed_roots = _sheet_values_at(engine, window, start)
            circle = center + rho * np.exp(1j * ang[1:])
            rows = continue_fibers(engine, window.p, circle,
                                   start_roots=seed_roots)
            values = np.vstack([seed_roots[None, :], rows])
            fit = _circle_fit(center, rho, ang, values, j, k)
            if fit is None:
                return None
            step = fit["root"] - center
            center = fit["root"]
            if abs(step) > 5 * rho:   # model untrustworthy that far out
                rho = min(abs(step), window.radius)
            elif abs(step) < 0.05 * rho:
                break
            rho = max(2 * abs(step), 0.2 * rho)
    except (FiberError, MomentError):
        return None
    if fit is None or fit["gap"] > tol:
        return None
    slope_j, slope_k = fit["slopes"]
    # branch-point collisions have runaway or coincident slopes
    if max(abs(slope_j), abs(slope_k)) > SLOPE_CAP:
        return None
    if abs(slope_j - slope_k) < 1e-3 * (1.0 + max(abs(slope_j), abs(slope_k))):
        return None
    return center, fit["h"], slope_j, slope_k


def _circle_fit(center, rho, ang, values, j, k):
    """Quadratic models of two sheets on a circle; their common value."""
    x = np.exp(1j * ang)     # (xi - center)/rho on the circle
    basis = np.vander(x, 3, increasing=True)
    cj, *_ = np.linalg.lstsq(basis, values[:, j], rcond=None)
    ck, *_ = np.linalg.lstsq(basis, values[:, k], rcond=None)
    resid = max(float(np.max(np.abs(basis @ cj - values[:, j]))),
                float(np.max(np.abs(basis @ ck - values[:, k]))))
    scale = float(np.max(np.abs(values[:, j] - values[:, k]))) + 1e-300
    if resid > 0.02 * scale:
        return None              # not analytic across the circle: branch point
    d = cj - ck
    from .oracles import polynomial_roots
    roots = polynomial_roots(d[::1])
    if roots.size == 0:
        root_x = 0.0 + 0.0j
    else:
        root_x = roots[np.argmin(np.abs(roots))]
    xi_root = center + rho * root_x
    gap = abs(d[0] + d[1] * root_x + d[2] * root_x**2)
    hj = cj[0] + cj[1] * root_x + cj[2] * root_x**2
    hk = ck[0] + ck[1] * root_x + ck[2] * root_x**2
    slopes = ((cj[1] + 2 * cj[2] * root_x) / rho,
              (ck[1] + 2 * ck[2] * root_x) / rho)
    return {"root": xi_root, "gap": gap, "h": 0.5 * (hj + hk),
            "slopes": slopes}


def _cluster_candidates(candidates, tol: float = 1e-3):
    out: list[SingularPointCandidate] = []
    for c in candidates:
        for seen in out:
            if abs(c.xi - seen.xi) < tol and abs(c.h - seen.h) < tol:
                break
        else:
            out.append(c)
    return out


@dataclass
class BranchContour:
    """A tracked circle in the base coordinate around a singular value."""

    center: complex
    radius: float
    angles: np.ndarray
    roots: np.ndarray           # (nodes + 1, p); last row = first after a loop
    permutation: np.ndarray     # sheet monodromy after one loop
    cycles: list                # list of tuples of sheet indices

    def cycle_of(self, sheet: int) -> tuple:
        for cyc in self.cycles:
            if sheet in cyc:
                return cyc
        raise FiberError(f"sheet {sheet} not tracked on this contour")


def track_branch_contour(engine: MomentEngine, p: int, center: complex,
                         radius: float, seed_roots: np.ndarray,
                         nodes: int = DEFAULT_CONTOUR_NODES) -> BranchContour:
    """Track all fibers once around the contour and decompose the monodromy."""
    ang = 2 * np.pi * np.arange(nodes + 1) / nodes
    path = center + radius * np.exp(1j * ang)
    start = continue_fibers(engine, p, np.array([path[0]]),
                            start_roots=seed_roots)[0]
    rows = continue_fibers(engine, p, path, start_roots=start)
    final = rows[-1]
    dist = np.abs(start[:, None] - final[None, :])
    perm = np.argmin(dist, axis=0)   # sheet s ends where sheet perm[s] started
    if np.unique(perm).size != perm.size:
        raise MonodromyError("monodromy: sheet tracking did not close into a "
                             "permutation; branch point too close to contour")
    cycles = _permutation_cycles(perm)
    return BranchContour(center, radius, ang, rows, perm, cycles)


def _permutation_cycles(perm: np.ndarray) -> list:
    seen = set()
    cycles = []
    for s in range(perm.size):
        if s in seen:
            continue
        cyc = [s]
        seen.add(s)
        t = int(perm[s])
        while t != s:
            cyc.append(t)
            seen.add(t)
            t = int(perm[t])
        cycles.append(tuple(cyc))
    return cycles


def branch_passes_through(contour: BranchContour, cycle: tuple,
                          h_star: complex, tol: float = 1e-3) -> bool:
    """Does the local branch (monodromy cycle) pass through (h_star, center)?

    The cycle's elementary symmetric functions are single-valued on the
    punctured disk and bounded, so their mean over the contour is their
    value at the center; the branch is incident iff every root of the
    extended local polynomial equals h_star.
    """
    vals = contour.roots[:-1][:, list(cycle)]
    length = len(cycle)
    sums = {m: np.sum(vals ** m, axis=1) for m in range(1, length + 1)}
    from .moments import newton_power_sums_to_coefficients
    mean_sums = np.array([np.mean(sums[m]) for m in range(1, length + 1)])
    e = newton_power_sums_to_coefficients(mean_sums)
    coeffs = np.zeros(length + 1, dtype=complex)
    coeffs[length] = 1.0
    for m in range(1, length + 1):
        coeffs[length - m] = (-1) ** m * e[m - 1]
    from .oracles import polynomial_roots
    roots = polynomial_roots(coeffs)
    scale = max(1.0, abs(h_star))
    return bool(np.all(np.abs(roots - h_star) < tol * scale))


def branch_residue(datum: DNDatum, contour: BranchContour, cycle: tuple,
                   ell: int) -> complex:
    """Residue (1/2*pi*i) * contour integral of the branch's form quotient.

    For a multi-sheet cycle the quotients of all its sheets are summed,
    which is the well-defined pushforward on the irreducible local branch.
    """
    engine = MomentEngine.from_datum(datum)
    return _cycle_residue(engine, contour, cycle, ell)


def _cycle_residue(engine: MomentEngine, contour: BranchContour, cycle: tuple,
                   ell: int) -> complex:
    n = contour.angles.size - 1
    total = 0.0 + 0.0j
    for i in range(n):
        xi = contour.center + contour.radius * np.exp(1j * contour.angles[i])
        roots = contour.roots[i]
        g = recover_form_quotient(engine, ell, complex(xi), roots)
        dxi = 1j * contour.radius * np.exp(1j * contour.angles[i])
        total += np.sum(g[list(cycle)]) * dxi
    return complex(total / (1j * n))


@dataclass
class EnergyGrowthReport:
    contributions: list
    ratios: list
    verdict: str                # "divergent" | "convergent" | "undetermined"

    @property
    def divergent(self) -> bool:
        return self.verdict == "divergent"


def dirichlet_energy_growth(datum: DNDatum, contour: BranchContour,
                            cycle: tuple, ell: int, halvings: int = 4,
                            radial_nodes: int = 4,
                            angular_nodes: int = 64) -> EnergyGrowthReport:
    """Energy of the recovered form on shrinking annuli around the center.

    Logarithmically divergent totals (annulus contributions roughly
    constant) flag a charged node branch; decaying contributions flag a
    spurious branch.
    """
    engine = MomentEngine.from_datum(datum)
    return _energy_reports(engine, contour, [cycle], halvings, radial_nodes,
                           angular_nodes)[0][ell]


def _energy_reports(engine: MomentEngine, contour: BranchContour, cycles: list,
                    halvings: int = 4, radial_nodes: int = 4,
                    angular_nodes: int = 64) -> list:
    """EnergyGrowthReport per (cycle, potential) in one tracking pass."""
    p = contour.roots.shape[1]
    ang = 2 * np.pi * np.arange(angular_nodes) / angular_nodes
    ref_roots = np.zeros((angular_nodes, p), dtype=complex)
    for i, a in enumerate(ang):
        j = int(np.argmin(np.abs((contour.angles[:-1] - a + np.pi) % (2 * np.pi)
                                 - np.pi)))
        ref_roots[i] = contour.roots[j]
    contributions = np.zeros((len(cycles), 3, halvings + 1))
    outer_roots = ref_roots
    outer_radius = contour.radius
    for k in range(halvings + 1):
        eps = contour.radius / 2.0 ** k
        radii = eps / 2.0 + (eps / 2.0) * (np.arange(radial_nodes) + 0.5) / radial_nodes
        for r in sorted(radii, reverse=True):
            ring = contour.center + r * np.exp(1j * ang)
            ring_roots = np.zeros_like(outer_roots)
            for i in range(angular_nodes):
                path = contour.center + np.linspace(outer_radius, r, 4)[1:] \
                    * np.exp(1j * ang[i])
                ring_roots[i] = continue_fibers(engine, p, path,
                                                start_roots=outer_roots[i])[-1]
            dr = (eps / 2.0) / radial_nodes
            weight = r * dr * (2 * np.pi / angular_nodes)
            for i in range(angular_nodes):
                for ell in range(3):
                    g = recover_form_quotient(engine, ell, complex(ring[i]),
                                              ring_roots[i])
                    for ci, cyc in enumerate(cycles):
                        contributions[ci, ell, k] += \
                            float(np.sum(np.abs(g[list(cyc)]) ** 2)) * weight
            outer_roots = ring_roots
            outer_radius = r
    out = []
    for ci in range(len(cycles)):
        per_ell = []
        for ell in range(3):
            contr = contributions[ci, ell].tolist()
            ratios = [contr[k + 1] / contr[k] if contr[k] > 0 else 0.0
                      for k in range(halvings)]
            if not ratios:
                verdict = "undetermined"
            elif 0.8 <= ratios[-1] <= 1.25:
                verdict = "divergent"
            elif ratios[-1] < 0.8:
                verdict = "convergent"
            else:
                verdict = "undetermined"
            per_ell.append(EnergyGrowthReport(contr, ratios, verdict))
        out.append(per_ell)
    return out


@dataclass
class BranchReport:
    cycle: tuple
    residues: np.ndarray        # shape (3,)
    classification: str = "undetermined"
    energy_verdicts: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"cycle": [int(s) for s in self.cycle],
                "residues": jsonio.encode_complex_array(self.residues),
                "classification": self.classification,
                "energy_verdicts": list(self.energy_verdicts)}


@dataclass
class SingularPointReport:
    h: complex
    xi: complex
    contour_radius: float
    branches: list

    @property
    def point(self) -> tuple:
        return (self.h, self.xi)

    def to_json(self) -> dict:
        return {"h": jsonio.encode_complex(self.h),
                "xi": jsonio.encode_complex(self.xi),
                "contour_radius": self.contour_radius,
                "branches": [b.to_json() for b in self.branches]}


def analyze_singular_point(datum: DNDatum, curve: ReconstructedCurve,
                           candidate: SingularPointCandidate,
                           contour_radius: float = DEFAULT_CONTOUR_RADIUS,
                           nodes: int = DEFAULT_CONTOUR_NODES,
                           with_energy: bool = True) -> SingularPointReport:
    """Track a contour around the candidate and measure branch residues."""
    engine = MomentEngine.from_datum(datum)
    window = curve.windows[candidate.window_index]
    start = _sheet_values_at(engine, window,
                             candidate.xi + contour_radius)
    contour = track_branch_contour(engine, window.p, candidate.xi,
                                   contour_radius, start, nodes)
    incident = [cyc for cyc in contour.cycles
                if branch_passes_through(contour, cyc, candidate.h)]
    energy = _energy_reports(engine, contour, incident) if with_energy else None
    branches = []
    for ci, cyc in enumerate(incident):
        res = np.array([_cycle_residue(engine, contour, cyc, ell)
                        for ell in range(3)])
        report = BranchReport(cyc, res)
        if energy is not None:
            report.energy_verdicts = [energy[ci][ell].verdict for ell in range(3)]
        branches.append(report)
    return SingularPointReport(candidate.h, candidate.xi, contour_radius,
                               branches)


@dataclass
class NodeInventory:
    """Recovered nodes, charges, genericity and uniqueness verdicts."""

    points: list                # (h, xi) per singular point analyzed
    nodes: list                 # dicts: point, branch cycles, charges (3 x width)
    spurious: list              # points with all-zero residues
    family_generic: list        # per ell
    partition_unique: bool
    isomorphism_class: str      # "full" | "rough"
    tau_res: float
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "schema": NODES_SCHEMA,
            "points": [[jsonio.encode_complex(h), jsonio.encode_complex(x)]
                       for h, x in self.points],
            "nodes": [{
                "point": [jsonio.encode_complex(nd["point"][0]),
                          jsonio.encode_complex(nd["point"][1])],
                "branches": [list(map(int, c)) for c in nd["branches"]],
                "charges": [jsonio.encode_complex_array(row)
                            for row in nd["charges"]],
            } for nd in self.nodes],
            "spurious": [[jsonio.encode_complex(h), jsonio.encode_complex(x)]
                         for h, x in self.spurious],
            "family_generic": list(self.family_generic),
            "partition_unique": self.partition_unique,
            "isomorphism_class": self.isomorphism_class,
            "tau_res": self.tau_res,
            "notes": list(self.notes),
        }


def classify_and_partition(reports: list, datum: DNDatum | None = None,
                           tau_factor: float = 1e-4) -> NodeInventory:
    """Classify branches, infer the node partition and check genericity.

    A branch is a node branch iff some residue exceeds tau_res; the node
    grouping is the finest zero-sum partition of the residues per image
    point, cross-checked across the three potentials.
    """
    all_res = [abs(r) for rep in reports for b in rep.branches for r in b.residues]
    scale = max(all_res) if all_res else 1.0
    # the absolute floor keeps pure-noise residues of spurious points from
    # masquerading as charges
    tau_res = max(tau_factor * scale, 1e-6)

    points, nodes, spurious, notes = [], [], [], []
    groups_per_ell: dict[int, list] = {0: [], 1: [], 2: []}
    unique_all = True
    for rep in reports:
        points.append(rep.point)
        node_branches = []
        for b in rep.branches:
            if np.max(np.abs(b.residues)) > tau_res:
                b.classification = "node-branch"
                node_branches.append(b)
            else:
                b.classification = "spurious"
            if b.energy_verdicts:
                energy_says_node = any(v == "divergent" for v in b.energy_verdicts)
                if energy_says_node != (b.classification == "node-branch"):
                    notes.append(f"diagnostics disagree at {rep.point} cycle "
                                 f"{b.cycle}: residues say {b.classification}, "
                                 f"energy says {b.energy_verdicts}")
        if not node_branches:
            spurious.append(rep.point)
            continue

        partitions_by_ell = {}
        for ell in range(3):
            vals = [b.residues[ell] for b in node_branches]
            detectable = [i for i, v in enumerate(vals) if abs(v) > tau_res]
            if len(detectable) != len(vals):
                notes.append(f"zero-charge branches for potential {ell} at "
                             f"{rep.point}: undetectable by this potential")
            parts, unique = finest_zero_sum_partition(
                [vals[i] for i in detectable], tol=tau_res)
            mapped = [tuple(sorted(detectable[i] for i in grp)) for grp in parts[0]]
            partitions_by_ell[ell] = (sorted(mapped), unique, parts)
            unique_all = unique_all and unique

        base = None
        for ell, (mapped, unique, parts) in partitions_by_ell.items():
            if base is None:
                base = mapped
            elif mapped != base:
                raise PartitionError(
                    f"inconsistent partitions across potentials at {rep.point}: "
                    f"{base} vs {mapped}")
        for grp in base:
            charges = np.array([[node_branches[i].residues[ell] for i in grp]
                                for ell in range(3)])
            nodes.append({
                "point": rep.point,
                "branches": [node_branches[i].cycle for i in grp],
                "charges": charges,
            })
            for ell in range(3):
                groups_per_ell[ell].append(charges[ell])

    family_generic = []
    for ell in range(3):
        groups = groups_per_ell[ell]
        if not groups:
            family_generic.append(False)
            continue
        centered = tuple(np.asarray(g) - np.mean(g) for g in groups)
        try:
            from .model import AdmissibleFamily
            ok, _ = is_generic_family(AdmissibleFamily(centered), tol=1e-6)
        except Exception:
            ok = False
        family_generic.append(bool(ok))

    iso = "full" if (any(family_generic) and unique_all and nodes) else "rough"
    return NodeInventory(points, nodes, spurious, family_generic, unique_all,
                         iso, tau_res, notes)
