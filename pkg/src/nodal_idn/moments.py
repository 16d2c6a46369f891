"""Cauchy moments, fiber recovery via Newton identities, window sweeps.

The moment of order m at xi is the contour integral

    M_m(xi) = (1/2*pi*i) int_gamma f1^m (f2 - xi)^(-1) df2

which equals the fiber power sum sum_j h_j(xi)^m plus a polynomial part;
test curves live in the bounded regime where the polynomial part vanishes,
which is asserted through far-field probes.  Power sums are converted to
roots through Newton's identities and companion-matrix eigenvalues, and the
form quotients dU_ell / dF2 at the fiber points come from a Vandermonde
solve against theta-weighted moments.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import jsonio
from .dirichlet import DNDatum
from .errors import FiberError, MomentError, SolveError
from .model import BoundaryCurve
from .spectral import fourier_derivative

CURVE_SCHEMA = "nodal-idn/curve/1"
MAX_MOMENT_ORDER = 32
SHEET_INTEGRALITY_TOL = 1e-4
BRANCH_SEPARATION_FLOOR = 1e-4
VANDERMONDE_CONDITION_LIMIT = 1e10
POWER_SUM_TOL = 1e-6


class MomentEngine:
    """Moment integrals for a fixed projection (f1, f2) and the theta rows."""

    def __init__(self, curve: BoundaryCurve, f1: np.ndarray, f2: np.ndarray,
                 theta: np.ndarray | None = None, df2: np.ndarray | None = None,
                 spacings: float = 6.0):
        self.curve = curve
        self.f1 = np.asarray(f1, dtype=complex)
        self.f2 = np.asarray(f2, dtype=complex)
        self.df2 = fourier_derivative(self.f2) if df2 is None else np.asarray(df2)
        self.theta = theta
        self.spacings = spacings
        self._dgamma = curve.derivatives

    @staticmethod
    def from_datum(datum: DNDatum) -> "MomentEngine":
        return MomentEngine(datum.curve, datum.f[0], datum.f[1], datum.theta)

    def check_off_curve(self, xi) -> None:
        """Trust plain quadrature only when the pole of (f2 - xi)^(-1) stays
        several grid spacings away from the parameter line."""
        xi = np.atleast_1d(np.asarray(xi, dtype=complex))
        ratio = np.abs(xi[:, None] - self.f2[None, :]) / np.abs(self.df2)[None, :]
        if np.any(np.min(ratio, axis=1) < self.spacings * 2 * np.pi / self.curve.n):
            raise MomentError("on-curve evaluation: xi too close to f2(gamma)")

    def moments(self, orders, xi) -> np.ndarray:
        """M_m(xi) for every m in orders; returns shape (len(orders), len(xi))."""
        orders = list(orders)
        if any(m > MAX_MOMENT_ORDER for m in orders):
            raise MomentError(f"moment order exceeds {MAX_MOMENT_ORDER}")
        xi = np.atleast_1d(np.asarray(xi, dtype=complex))
        self.check_off_curve(xi)
        base = self.df2[None, :] / (self.f2[None, :] - xi[:, None])
        out = np.empty((len(orders), xi.size), dtype=complex)
        for row, m in enumerate(orders):
            out[row] = np.sum(self.f1[None, :] ** m * base, axis=1) / (1j * self.curve.n)
        return out

    def moment(self, m: int, xi: complex) -> complex:
        return complex(self.moments([m], [xi])[0, 0])

    def theta_moments(self, ell: int, orders, xi) -> np.ndarray:
        """A_m(xi) = (1/2*pi*i) int f1^m (f2-xi)^(-1) theta_ell."""
        if self.theta is None:
            raise MomentError("no theta rows attached to this projection")
        orders = list(orders)
        xi = np.atleast_1d(np.asarray(xi, dtype=complex))
        self.check_off_curve(xi)
        pullback = self.theta[ell] * self._dgamma
        base = pullback[None, :] / (self.f2[None, :] - xi[:, None])
        out = np.empty((len(orders), xi.size), dtype=complex)
        for row, m in enumerate(orders):
            out[row] = np.sum(self.f1[None, :] ** m * base, axis=1) / (1j * self.curve.n)
        return out

    def far_probe_points(self, count: int) -> np.ndarray:
        center = complex(np.mean(self.f2))
        radius = 4.0 * float(np.max(np.abs(self.f2 - center)))
        ang = 2 * np.pi * (np.arange(count) + 0.37) / count
        return center + radius * np.exp(1j * ang)


def compute_moment(datum: DNDatum, m: int, xi: complex) -> complex:
    return MomentEngine.from_datum(datum).moment(m, xi)


@dataclass
class MomentTable:
    """Moments over a square window grid around a center."""

    center: complex
    radius: float
    grid: np.ndarray            # flattened complex grid, row-major
    grid_shape: tuple
    moments: dict               # order -> flattened values
    max_order: int
    sheet_method: str = ""

    def holomorphy_residual(self, m: int) -> float:
        vals = self.moments[m].reshape(self.grid_shape)
        spacing = float(np.abs(self.grid[1] - self.grid[0]))
        return _cr_residual(vals, spacing)


class SheetCountEstimate(NamedTuple):
    p: int
    method: str

    def __int__(self) -> int:
        return self.p


def window_grid(center: complex, radius: float, grid_n: int) -> tuple[np.ndarray, tuple]:
    """Square grid inscribed in the window disk, row-major flattened."""
    half = radius / np.sqrt(2.0)
    axis = np.linspace(-half, half, grid_n)
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    return (center + gx + 1j * gy).ravel(), (grid_n, grid_n)


def build_moment_table(datum_or_engine, center: complex, radius: float,
                       grid_n: int = 9, max_order: int | None = None) -> MomentTable:
    engine = datum_or_engine if isinstance(datum_or_engine, MomentEngine) \
        else MomentEngine.from_datum(datum_or_engine)
    grid, shape = window_grid(center, radius, grid_n)
    dist = np.min(np.abs(grid[:, None] - engine.f2[None, :]), axis=1)
    if np.any(dist < 0.05 * radius):
        raise MomentError("window grid too close to the image curve f2(gamma)")
    m0 = engine.moments([0], grid)[0]
    table = MomentTable(center, radius, grid, shape, {0: m0}, 0)
    estimate = estimate_sheet_count(table)
    p = estimate.p
    table.sheet_method = estimate.method
    order = max_order if max_order is not None else max(2 * p, 1)
    if order >= 1:
        rows = engine.moments(range(1, order + 1), grid)
        for m in range(1, order + 1):
            table.moments[m] = rows[m - 1]
    table.max_order = order
    return table


def estimate_sheet_count(table: MomentTable) -> SheetCountEstimate:
    """Sheet count from M_0, with a Hankel-rank fallback.

    In the bounded regime M_0 is the integer fiber cardinality; otherwise a
    rank test on the Hankel matrix of the power sums decides.
    """
    if 0 not in table.moments:
        raise MomentError("table has no order-0 moments")
    m0 = table.moments[0]
    p = int(np.rint(np.median(m0.real)))
    if np.max(np.abs(m0 - p)) < SHEET_INTEGRALITY_TOL and p >= 0:
        return SheetCountEstimate(p, "m0-integrality")
    orders = sorted(k for k in table.moments if k >= 1)
    if len(orders) >= 3:
        k = (len(orders) + 1) // 2
        center_idx = table.grid.size // 2
        h = np.empty((k, k), dtype=complex)
        for i in range(k):
            for j in range(k):
                h[i, j] = table.moments[orders[min(i + j, len(orders) - 1)]][center_idx]
        sv = np.linalg.svd(h, compute_uv=False)
        if sv[0] > 0:
            rank = int(np.sum(sv > 1e-8 * sv[0]))
            return SheetCountEstimate(rank, "hankel-rank")
    raise MomentError("sheet count ambiguous: move window")


class EliminationResult(NamedTuple):
    s_values: np.ndarray
    p_coefficients: np.ndarray
    fit_residual: float


def eliminate_polynomial_part(xi: np.ndarray, values: np.ndarray, m: int,
                              far_xi: np.ndarray | None = None,
                              far_values: np.ndarray | None = None,
                              taylor_center: complex | None = None,
                              taylor_order: int = 8,
                              regime: str = "bounded") -> EliminationResult:
    """Split M_m into the fiber power sum S and the polynomial part P.

    Bounded regime (default): P is identified on far-field probes where the
    fiber is empty, asserted to vanish, and S = M.  General regime
    (experimental): joint least squares against the basis
    {xi^j, j<=m} + {(xi-c)^(-i), i<=k} with c = taylor_center, a decaying
    local model of S on windows in the unbounded component.
    """
    xi = np.asarray(xi, dtype=complex)
    values = np.asarray(values, dtype=complex)
    if xi.size < m + 2 + (taylor_order if regime == "general" else 0):
        raise MomentError("not enough grid points to separate the polynomial part")
    if np.unique(xi).size != xi.size:
        raise MomentError("grid points must be mutually distinct")
    scale = max(1.0, float(np.max(np.abs(values))))
    if regime == "bounded":
        if far_values is not None:
            far_xi = np.asarray(far_xi, dtype=complex)
            far_values = np.asarray(far_values, dtype=complex)
            basis = np.vander(far_xi / np.max(np.abs(far_xi)), m + 1, increasing=True)
            coeffs, *_ = np.linalg.lstsq(basis, far_values, rcond=None)
            resid = float(np.max(np.abs(far_values)))
        else:
            coeffs = np.zeros(m + 1, dtype=complex)
            resid = 0.0
        if np.max(np.abs(coeffs)) > 1e-6 * scale:
            raise MomentError("polynomial part does not vanish: not in the "
                              "bounded-curve regime")
        return EliminationResult(values.copy(), np.zeros(m + 1, dtype=complex), resid)
    if regime != "general":
        raise MomentError(f"unknown regime {regime!r}")
    if taylor_center is None:
        raise MomentError("general regime requires a taylor_center")
    poly_basis = np.vander(xi, m + 1, increasing=True)
    decay = 1.0 / (xi[:, None] - taylor_center) ** np.arange(1, taylor_order + 1)[None, :]
    basis = np.hstack([poly_basis, decay])
    norms = np.linalg.norm(basis, axis=0)
    scaled = basis / norms[None, :]
    sv = np.linalg.svd(scaled, compute_uv=False)
    if sv[-1] == 0 or sv[0] / sv[-1] > 1e10:
        raise MomentError("ill-conditioned separation: enlarge window or raise k")
    sol, *_ = np.linalg.lstsq(scaled, values, rcond=None)
    sol = sol / norms
    p_coeffs = sol[:m + 1]
    p_vals = poly_basis @ p_coeffs
    resid = float(np.max(np.abs(basis @ sol - values)))
    return EliminationResult(values - p_vals, p_coeffs, resid)


def newton_power_sums_to_coefficients(power_sums: np.ndarray) -> np.ndarray:
    """Elementary symmetric e_1..e_p from power sums S_1..S_p."""
    s = np.asarray(power_sums, dtype=complex)
    p = s.size
    e = np.zeros(p + 1, dtype=complex)
    e[0] = 1.0
    for k in range(1, p + 1):
        acc = 0.0 + 0.0j
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * s[i - 1]
        e[k] = acc / k
    return e[1:]


def roots_from_power_sums(power_sums: np.ndarray) -> np.ndarray:
    """Monic-polynomial roots whose power sums are the given S_1..S_p."""
    e = newton_power_sums_to_coefficients(power_sums)
    p = e.size
    # z^p - e1 z^(p-1) + e2 z^(p-2) - ... ; ascending coefficients
    coeffs = np.zeros(p + 1, dtype=complex)
    coeffs[p] = 1.0
    for k in range(1, p + 1):
        coeffs[p - k] = (-1) ** k * e[k - 1]
    from .oracles import polynomial_roots
    return polynomial_roots(coeffs)


def match_roots(previous: np.ndarray, new: np.ndarray) -> np.ndarray:
    """Order ``new`` to follow ``previous`` by nearest neighbor.

    Raises on assignment collisions (two predecessors claiming one root).
    """
    if previous is None:
        return np.sort_complex(new)
    dist = np.abs(previous[:, None] - new[None, :])
    choice = np.argmin(dist, axis=1)
    if np.unique(choice).size != choice.size:
        raise FiberError("root matching collision: decrease grid step")
    return new[choice]


def recover_fibers(power_sums: np.ndarray, p: int,
                   previous: np.ndarray | None = None) -> np.ndarray:
    """Fiber roots h_1..h_p from power sums, continuation-ordered."""
    if p < 1:
        raise FiberError("sheet count must be at least 1")
    s = np.asarray(power_sums, dtype=complex)[:p]
    roots = roots_from_power_sums(s)
    matched = match_roots(previous, roots)
    for m in range(1, min(2 * p, s.size) + 1):
        target = power_sums[m - 1]
        got = np.sum(matched ** m)
        if abs(got - target) > POWER_SUM_TOL * max(1.0, abs(target)):
            raise FiberError(f"power-sum consistency failed at order {m}: "
                             f"{abs(got - target):.3e}")
    return matched


def recover_form_quotient(datum_or_engine, ell: int, xi: complex,
                          roots: np.ndarray) -> np.ndarray:
    """Values g_j = dU_ell/dF2 at the fiber points above xi.

    Solves the Vandermonde system sum_j h_j^m g_j = A_m(xi), m = 0..p-1.
    """
    engine = datum_or_engine if isinstance(datum_or_engine, MomentEngine) \
        else MomentEngine.from_datum(datum_or_engine)
    roots = np.asarray(roots, dtype=complex)
    p = roots.size
    if p == 0:
        return np.zeros(0, dtype=complex)
    seps = np.abs(roots[:, None] - roots[None, :])
    np.fill_diagonal(seps, np.inf)
    if np.min(seps) < 1e-6:
        raise FiberError("near branch point: move xi")
    a = engine.theta_moments(ell, range(p), [xi])[:, 0]
    v = roots[None, :] ** np.arange(p)[:, None]
    if p > 1:
        cond = np.linalg.cond(v)
        if cond > VANDERMONDE_CONDITION_LIMIT:
            raise FiberError("near branch point: move xi")
    return np.linalg.solve(v, a)


@dataclass
class FiberWindow:
    """Recovered fibers and form quotients over one window grid."""

    center: complex
    radius: float
    grid: np.ndarray
    grid_shape: tuple
    p: int
    roots: np.ndarray           # (grid, p)
    quotients: np.ndarray       # (3, grid, p)
    min_root_separation: float
    sheet_method: str
    relocated_from: complex | None = None

    def roots_grid(self) -> np.ndarray:
        return self.roots.reshape(self.grid_shape + (self.p,))

    def sheet_holomorphy_residual(self, j: int) -> float:
        vals = self.roots_grid()[..., j]
        spacing = float(np.abs(self.grid[1] - self.grid[0]))
        return _cr_residual(vals, spacing)

    def to_json(self) -> dict:
        return {
            "center": jsonio.encode_complex(self.center),
            "radius": self.radius,
            "grid_shape": list(self.grid_shape),
            "grid": jsonio.encode_complex_array(self.grid),
            "p": self.p,
            "roots": jsonio.encode_complex_array(self.roots),
            "quotients": jsonio.encode_complex_array(self.quotients),
            "min_root_separation": self.min_root_separation,
            "sheet_method": self.sheet_method,
            "relocated_from": (jsonio.encode_complex(self.relocated_from)
                               if self.relocated_from is not None else None),
        }

    @staticmethod
    def from_json(doc: dict) -> "FiberWindow":
        shape = tuple(doc["grid_shape"])
        g = int(np.prod(shape))
        p = int(doc["p"])
        roots = jsonio.decode_complex_array(doc["roots"]).reshape(g, p) \
            if p else np.zeros((g, 0), dtype=complex)
        quot = jsonio.decode_complex_array(doc["quotients"]).reshape(3, g, p) \
            if p else np.zeros((3, g, 0), dtype=complex)
        reloc = doc.get("relocated_from")
        return FiberWindow(jsonio.decode_complex(doc["center"]), doc["radius"],
                           jsonio.decode_complex_array(doc["grid"]), shape, p,
                           roots, quot, doc["min_root_separation"],
                           doc.get("sheet_method", ""),
                           jsonio.decode_complex(reloc) if reloc else None)


def analyze_window(datum_or_engine, center: complex, radius: float,
                   grid_n: int = 9, max_order: int | None = None) -> FiberWindow:
    """Full per-window pipeline: moments, sheet count, fibers, quotients."""
    engine = datum_or_engine if isinstance(datum_or_engine, MomentEngine) \
        else MomentEngine.from_datum(datum_or_engine)
    table = build_moment_table(engine, center, radius, grid_n, max_order)
    p = int(np.rint(np.median(table.moments[0].real)))
    grid = table.grid
    g = grid.size
    if p == 0:
        return FiberWindow(center, radius, grid, table.grid_shape, 0,
                           np.zeros((g, 0), complex), np.zeros((3, g, 0), complex),
                           np.inf, table.sheet_method)

    far = engine.far_probe_points(max(table.max_order, 1) + 3)
    far_rows = engine.moments(range(0, table.max_order + 1), far)
    power_sums = {}
    for m in range(1, table.max_order + 1):
        power_sums[m] = eliminate_polynomial_part(
            grid, table.moments[m], m, far_xi=far, far_values=far_rows[m]).s_values
    snake = _snake_order(table.grid_shape)
    roots = np.zeros((g, p), dtype=complex)
    prev = None
    for idx in snake:
        roots[idx] = recover_fibers(
            np.array([power_sums[m][idx] for m in range(1, table.max_order + 1)]),
            p, previous=prev)
        if prev is not None and p > 1:
            seps = np.abs(prev[:, None] - prev[None, :])
            np.fill_diagonal(seps, np.inf)
            if np.any(np.abs(roots[idx] - prev) > 0.5 * np.min(seps, axis=1)):
                raise FiberError("continuation step exceeds half the root "
                                 "separation: decrease grid step")
        prev = roots[idx]
    seps = np.abs(roots[:, :, None] - roots[:, None, :])
    seps[:, np.arange(p), np.arange(p)] = np.inf
    min_sep = float(np.min(seps)) if p > 1 else np.inf

    quot = np.zeros((3, g, p), dtype=complex)
    if engine.theta is not None:
        amat = {ell: engine.theta_moments(ell, range(p), grid) for ell in range(3)}
        powers = np.arange(p)
        for idx in range(g):
            v = roots[idx][None, :] ** powers[:, None]
            rhs = np.stack([amat[ell][:, idx] for ell in range(3)], axis=1)
            quot[:, idx, :] = np.linalg.solve(v, rhs).T
    return FiberWindow(center, radius, grid, table.grid_shape, p, roots, quot,
                       min_sep, table.sheet_method)


def _snake_order(shape: tuple) -> list[int]:
    """Row-major snake through a rectangular grid (adjacent steps only)."""
    rows, cols = shape
    order = []
    for r in range(rows):
        cs = range(cols) if r % 2 == 0 else range(cols - 1, -1, -1)
        order.extend(r * cols + c for c in cs)
    return order


@dataclass
class WindowPlan:
    centers: list
    radius: float
    grid_n: int = 9
    max_order: int | None = None

    @staticmethod
    def ring(center: complex, ring_radius: float, count: int,
             window_radius: float, grid_n: int = 9) -> "WindowPlan":
        ang = 2 * np.pi * np.arange(count) / count
        centers = (center + ring_radius * np.exp(1j * ang)).tolist()
        return WindowPlan(centers, window_radius, grid_n)

    def to_json(self) -> dict:
        return {"centers": jsonio.encode_complex_array(np.array(self.centers)),
                "radius": self.radius, "grid_n": self.grid_n,
                "max_order": self.max_order}

    @staticmethod
    def from_json(doc: dict) -> "WindowPlan":
        return WindowPlan(list(jsonio.decode_complex_array(doc["centers"])),
                          float(doc["radius"]), int(doc.get("grid_n", 9)),
                          doc.get("max_order"))


@dataclass
class ReconstructedCurve:
    """Stitched fiber windows with sheet correspondences and provenance."""

    windows: list
    permutations: list          # sigma[k] maps window k sheets -> window k+1
    failures: list              # (center, message)
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "schema": CURVE_SCHEMA,
            "windows": [w.to_json() for w in self.windows],
            "permutations": [list(map(int, s)) for s in self.permutations],
            "failures": [[jsonio.encode_complex(c), msg] for c, msg in self.failures],
            "notes": list(self.notes),
        }

    @staticmethod
    def from_json(doc: dict) -> "ReconstructedCurve":
        jsonio.require_schema(doc, CURVE_SCHEMA)
        return ReconstructedCurve(
            [FiberWindow.from_json(w) for w in doc["windows"]],
            [np.array(s, dtype=int) for s in doc["permutations"]],
            [(jsonio.decode_complex(c), msg) for c, msg in doc["failures"]],
            list(doc.get("notes", [])),
        )


def sweep_windows(datum: DNDatum, plan: WindowPlan, jobs: int = 1) -> ReconstructedCurve:
    """Run the window pipeline over the plan, re-centering near branch points.

    Window analyses are independent; with jobs > 1 the first pass runs in a
    thread pool and results are gathered in plan order, so the output is
    identical to a serial run.
    """
    engine = MomentEngine.from_datum(datum)

    def first_attempt(center):
        try:
            return analyze_window(engine, complex(center), plan.radius,
                                  plan.grid_n, plan.max_order)
        except (MomentError, FiberError, SolveError) as exc:
            return exc

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            first = list(pool.map(first_attempt, plan.centers))
    else:
        first = [first_attempt(c) for c in plan.centers]

    windows: list[FiberWindow] = []
    failures = []
    notes = []
    for center, outcome in zip(plan.centers, first):
        center = complex(center)
        window = None
        attempt_center = center
        last_error = None
        for attempt in range(3):
            if attempt > 0:
                attempt_center = attempt_center + plan.radius * 0.5 * (0.6 + 0.8j)
                outcome = first_attempt(attempt_center)
            if isinstance(outcome, MomentError):
                # off the valid region entirely: re-centering will not help
                failures.append((attempt_center, str(outcome)))
                last_error = None
                break
            if isinstance(outcome, Exception):
                # continuation collapse: typical branch-point straddle
                last_error = str(outcome)
                continue
            if outcome.min_root_separation >= BRANCH_SEPARATION_FLOOR:
                window = outcome
                if attempt_center != center:
                    window.relocated_from = center
                    notes.append(f"window at {center} re-centered to "
                                 f"{attempt_center} (branch-point straddle)")
                break
            last_error = "root separation collapsed"
        else:
            failures.append((center, last_error or "window straddles a branch point"))
        if window is not None:
            windows.append(window)
    if len(failures) > len(plan.centers) // 2:
        raise FiberError(f"more than half of the windows failed: {failures}")

    permutations = []
    for a, b in zip(windows[:-1], windows[1:]):
        permutations.append(_stitch_pair(a, b))
    if len(windows) > 2 and windows[0].p == windows[-1].p and windows[0].p:
        closing = _stitch_pair(windows[-1], windows[0])
        comp = np.arange(windows[0].p)
        for s in permutations:
            comp = s[comp]
        comp = closing[comp]
        if not np.array_equal(comp, np.arange(windows[0].p)):
            notes.append("ring monodromy: closing the window chain permutes "
                         f"sheets as {comp.tolist()}")
    return ReconstructedCurve(windows, permutations, failures, notes)


def _stitch_pair(a: FiberWindow, b: FiberWindow) -> np.ndarray:
    """Sheet correspondence between overlapping windows by proximity."""
    if a.p == 0 or b.p == 0:
        return np.arange(min(a.p, b.p))
    if a.p != b.p:
        raise FiberError(f"sheet count changes between windows at {a.center} "
                         f"({a.p}) and {b.center} ({b.p})")
    dist = np.abs(a.grid[:, None] - b.grid[None, :])
    ia, ib = np.unravel_index(int(np.argmin(dist)), dist.shape)
    ra, rb = a.roots[ia], b.roots[ib]
    gap = np.abs(ra[:, None] - rb[None, :])
    sigma = np.argmin(gap, axis=1)
    if np.unique(sigma).size != sigma.size:
        raise FiberError("stitching collision between windows: refine plan")
    return sigma


def continue_fibers(engine: MomentEngine, p: int, path: np.ndarray,
                    start_roots: np.ndarray | None = None,
                    max_halvings: int = 6) -> np.ndarray:
    """Track the p fiber roots along a path of xi values.

    The step is recursively halved when nearest-neighbor matching collides.
    """
    path = np.asarray(path, dtype=complex)
    out = np.zeros((path.size, p), dtype=complex)
    prev = start_roots
    prev_xi = None
    for i, xi in enumerate(path):
        prev = _step_fiber(engine, p, prev_xi, prev, xi, max_halvings)
        out[i] = prev
        prev_xi = xi
    return out


def _step_fiber(engine: MomentEngine, p: int, xi_from, roots_from,
                xi_to, budget: int) -> np.ndarray:
    s = engine.moments(range(1, 2 * p + 1), [xi_to])[:, 0]
    try:
        return recover_fibers(s, p, previous=roots_from)
    except FiberError:
        if budget <= 0 or xi_from is None:
            raise
    mid = 0.5 * (xi_from + xi_to)
    middle = _step_fiber(engine, p, xi_from, roots_from, mid, budget - 1)
    return _step_fiber(engine, p, mid, middle, xi_to, budget - 1)


def _cr_residual(values: np.ndarray, spacing: float) -> float:
    """Fourth-order discrete Cauchy-Riemann residual on a square grid."""
    v = np.asarray(values)
    if v.shape[0] < 5 or v.shape[1] < 5:
        raise MomentError("grid too small for the holomorphy cross-check")
    c = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    dx = sum(c[k + 2] * v[2 + k:v.shape[0] - 2 + k or None, 2:-2]
             for k in range(-2, 3)) / spacing
    dy = sum(c[k + 2] * v[2:-2, 2 + k:v.shape[1] - 2 + k or None]
             for k in range(-2, 3)) / spacing
    dbar = 0.5 * (dx + 1j * dy)
    return float(np.max(np.abs(dbar)))
