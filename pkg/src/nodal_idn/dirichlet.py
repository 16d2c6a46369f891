"""Nodal Dirichlet problems, the DN operator, theta traces and DN-data.

A harmonic distribution on a nodal model is represented as

    U = Eu + sum_{a,j} 4*pi * c_{a,j} * G(. , a_j)

where E is the harmonic extension of the boundary data (closed-form Poisson
solve on the disk, Fredholm solve otherwise) and G is the principal Green
function of the model domain.  Near an identified point U - 2c ln|z - a|
extends harmonically and dU has a simple pole with residue c, so contour
residues of dU recover the charges directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jsonio
from .errors import ModelError, SolveError
from .greens import (AnnulusHarmonicSolver, AnnulusPrincipalGreen,
                     DiskHarmonicSolver, disk_green, disk_green_dz)
from .model import (AdmissibleFamily, AnnulusDomain, BoundaryCurve, DiskDomain,
                    NodalDomainModel)
from .oracles import RationalFunction
from .spectral import fourier_derivative

DATUM_SCHEMA = "nodal-idn/datum/1"
INJECTIVITY_GAP = 1e-6
IMMERSION_FLOOR = 1e-8
THETA_CROSSCHECK_TOL = 1e-6


class _DiskCharges:
    """Charge-part evaluators on a disk model (closed-form Green)."""

    def __init__(self, domain: DiskDomain, points: np.ndarray, weights: np.ndarray):
        self.domain = domain
        self.points = points
        self.weights = weights  # 4*pi*c per point

    def value(self, z):
        out = 0.0
        for a, w in zip(self.points, self.weights):
            out = out + w * disk_green(z, a, self.domain.radius, self.domain.center)
        return out

    def dz(self, z):
        out = 0.0
        for a, w in zip(self.points, self.weights):
            out = out + w * disk_green_dz(z, a, self.domain.radius, self.domain.center)
        return out

    def dzbar(self, z):
        out = 0.0
        for a, w in zip(self.points, self.weights):
            out = out + w * np.conj(disk_green_dz(z, a, self.domain.radius,
                                                  self.domain.center))
        return out


class _FredholmCharges:
    """Charge part via principal Green functions built by Fredholm solves."""

    def __init__(self, green, points: np.ndarray, weights: np.ndarray):
        self.green = green
        self.points = points
        self.weights = weights

    def value(self, z):
        out = 0.0
        for a, w in zip(self.points, self.weights):
            out = out + w * self.green(a, z)
        return out

    def dz(self, z):
        out = 0.0
        for a, w in zip(self.points, self.weights):
            out = out + w * self.green.dz_second(a, z)
        return out

    def dzbar(self, z):
        out = 0.0
        for a, w in zip(self.points, self.weights):
            out = out + w * np.conj(self.green.dz_second(a, z))
        return out

    def boundary_dz(self) -> np.ndarray:
        out = 0.0
        for a, w in zip(self.points, self.weights):
            out = out + w * self.green.dz_second_on_boundary(a)
        return out


class HarmonicDistribution:
    """Charged harmonic extension with value/derivative evaluators."""

    def __init__(self, model: NodalDomainModel, family: AdmissibleFamily | None,
                 boundary_values: np.ndarray, ext_re, ext_im, charges,
                 charge_boundary_dz):
        self.model = model
        self.family = family
        self.boundary_values = np.asarray(boundary_values, dtype=complex)
        self._ext_re = ext_re
        self._ext_im = ext_im
        self._charges = charges
        self._charge_boundary_dz = charge_boundary_dz
        self.is_real = bool(np.max(np.abs(self.boundary_values.imag)) == 0.0)

    @property
    def curve(self) -> BoundaryCurve:
        return self.model.boundary

    @property
    def charge_points(self) -> np.ndarray:
        return self._charges.points if self._charges else np.zeros(0, dtype=complex)

    @property
    def charge_values(self) -> np.ndarray:
        if not self._charges:
            return np.zeros(0, dtype=complex)
        return np.asarray(self._charges.weights) / (4 * np.pi)

    def value(self, z):
        out = self._ext_re.value(z) + 1j * self._ext_im.value(z)
        if self._charges:
            out = out + self._charges.value(z)
        return out

    def dz(self, z):
        """Coefficient of dz of the distribution at interior points."""
        out = self._ext_re.dz(z) + 1j * self._ext_im.dz(z)
        if self._charges:
            out = out + self._charges.dz(z)
        return out

    def dzbar(self, z):
        out = np.conj(self._ext_re.dz(z)) + 1j * np.conj(self._ext_im.dz(z))
        if self._charges:
            out = out + self._charges.dzbar(z)
        return out

    def boundary_dz(self) -> np.ndarray:
        out = self._boundary_dz_ext()
        if self._charges:
            out = out + self._charge_boundary_dz
        return out

    def _boundary_dz_ext(self) -> np.ndarray:
        re = self._ext_re.boundary_dz()
        im = self._ext_im.boundary_dz()
        if isinstance(re, tuple):  # annulus: (outer, inner); outer carries gamma
            return re[0] + 1j * im[0]
        return re + 1j * im

    def boundary_dzbar(self) -> np.ndarray:
        re = self._ext_re.boundary_dz()
        im = self._ext_im.boundary_dz()
        if isinstance(re, tuple):
            re, im = re[0], im[0]
        out = np.conj(re) + 1j * np.conj(im)
        if self._charges:
            pts = self.curve.positions
            acc = 0.0
            for a, w in zip(self._charges.points, self._charges.weights):
                if isinstance(self._charges, _DiskCharges):
                    acc = acc + w * np.conj(disk_green_dz(pts, a,
                                                          self.model.domain.radius,
                                                          self.model.domain.center))
                else:
                    acc = acc + w * np.conj(self._charges.green.dz_second_on_boundary(a))
            out = out + acc
        return out

    def residue_at(self, point: complex, eps: float | None = None,
                   nodes: int = 64) -> complex:
        """(1/2*pi*i) contour integral of dU around the point."""
        point = complex(point)
        if eps is None:
            gaps = [float(np.min(np.abs(self.curve.positions - point)))]
            for other in self.charge_points:
                d = abs(other - point)
                if d > 1e-12:
                    gaps.append(d)
            eps = 0.01 * min(gaps)
        ang = 2 * np.pi * np.arange(nodes) / nodes
        ring = point + eps * np.exp(1j * ang)
        dz_ring = 1j * eps * np.exp(1j * ang)
        vals = self.dz(ring) * dz_ring
        return complex(np.sum(vals) / (1j * nodes))


def solve_nodal_dirichlet(model: NodalDomainModel, family: AdmissibleFamily | None,
                          u: np.ndarray) -> HarmonicDistribution:
    """Charged Dirichlet solve: U = Eu + sum 4*pi*c*G(., a)."""
    u = np.asarray(u, dtype=complex)
    if u.size != model.boundary.n:
        raise ModelError("boundary data length does not match the model boundary")
    points, weights = _collect_charges(model, family)

    if isinstance(model.domain, DiskDomain):
        solver = DiskHarmonicSolver(model.domain, model.boundary.n)
        ext_re = solver.extend(u.real.astype(complex))
        ext_im = solver.extend(u.imag.astype(complex))
        charges = _DiskCharges(model.domain, points, weights) if points.size else None
        charge_bdz = charges.dz(model.boundary.positions) if charges else None
    elif isinstance(model.domain, AnnulusDomain):
        solver = AnnulusHarmonicSolver(model.domain, model.boundary.n)
        # boundary data on the inner component defaults to zero unless the
        # caller passes a stacked array of length 2n
        if u.size == 2 * solver.n:
            uo, ui = u[:solver.n], u[solver.n:]
        else:
            uo, ui = u, np.zeros_like(u)
        ext_re = solver.extend(uo.real.astype(complex), ui.real.astype(complex))
        ext_im = solver.extend(uo.imag.astype(complex), ui.imag.astype(complex))
        if points.size:
            green = AnnulusPrincipalGreen(solver)
            charges = _FredholmCharges(green, points, weights)
            charge_bdz = charges.boundary_dz()
        else:
            charges = None
            charge_bdz = None
    else:
        raise ModelError(f"unsupported domain {model.domain!r}")

    return HarmonicDistribution(model, family, u, ext_re, ext_im, charges, charge_bdz)


def _collect_charges(model: NodalDomainModel, family: AdmissibleFamily | None):
    pts, wts = [], []
    if family is not None and len(family.charges):
        model.check_family(family)
        for group_pts, group_charges in zip(model.node_groups, family.charges):
            pts.extend(group_pts.tolist())
            wts.extend((4 * np.pi * group_charges).tolist())
    for p, r in model.auxiliary_poles:
        pts.append(p)
        wts.append(4 * np.pi * r)
    return np.array(pts, dtype=complex), np.array(wts, dtype=complex)


def apply_dn(dist: HarmonicDistribution) -> np.ndarray:
    """Normal derivative of the charged extension on the boundary."""
    curve = dist.curve
    nu = curve.outward_normal
    out = nu * dist.boundary_dz() + np.conj(nu) * dist.boundary_dzbar()
    if dist.is_real:
        return out.real
    return out


def tangential_derivative(curve: BoundaryCurve, u: np.ndarray) -> np.ndarray:
    """Arc-length derivative of boundary samples."""
    return fourier_derivative(np.asarray(u, dtype=complex)) / np.abs(curve.derivatives)


def compute_theta(dist: HarmonicDistribution) -> np.ndarray:
    """dz-coefficient samples of theta(u) = (dU)|_gamma.

    Cross-checked against the operator identity theta u = (Lu)(nu* + i tau*)
    with L = (N - iT)/2; the two sides agree exactly for true DN data.
    """
    direct = dist.boundary_dz()
    curve = dist.curve
    nu_samples = apply_dn(dist)
    tu = tangential_derivative(curve, dist.boundary_values)
    lu = 0.5 * (nu_samples - 1j * tu)
    via_l = lu * 1j * np.conj(curve.unit_tangent)
    scale = max(1.0, float(np.max(np.abs(direct))))
    gap = float(np.max(np.abs(via_l - direct))) / scale
    if gap > THETA_CROSSCHECK_TOL:
        raise SolveError(f"theta/N operator identity violated: gap {gap:.3e}")
    return direct


@dataclass
class HolomorphyReport:
    residues: list
    declared: list
    residues_match: bool
    zero_sum: bool
    bounded_after_polar: bool
    growth_factors: list

    @property
    def passed(self) -> bool:
        return self.residues_match and self.zero_sum and self.bounded_after_polar


def verify_weak_holomorphy(form_dz, points, charges, eps: float = 0.02,
                           halvings: int = 4, nodes: int = 64,
                           tol: float = 1e-6) -> HolomorphyReport:
    """Check the log-singularity model of a (1,0)-form near identified points.

    (i) contour residues match the declared charges, (ii) they sum to zero,
    (iii) the form minus its polar part stays bounded on shrinking circles.
    """
    points = np.asarray(points, dtype=complex)
    charges = np.asarray(charges, dtype=complex)
    ang = 2 * np.pi * np.arange(nodes) / nodes
    unit = np.exp(1j * ang)
    residues = []
    growth_factors = []
    bounded = True
    for a, c in zip(points, charges):
        ring = a + eps * unit
        res = complex(np.sum(form_dz(ring) * 1j * eps * unit) / (1j * nodes))
        residues.append(res)
        sups = []
        for k in range(halvings + 1):
            r = eps / 2**k
            ring = a + r * unit
            sups.append(float(np.max(np.abs(form_dz(ring) - res / (r * unit)))))
        # ratios of sups at roundoff level are noise, not growth
        floor = 1e-9 * max(abs(res) / eps, 1.0)
        factors = [sups[k + 1] / sups[k] if sups[k] > floor else 0.0
                   for k in range(halvings)]
        growth_factors.append(factors)
        if factors and max(factors) > 1.5:
            bounded = False
    scale = max(1.0, float(np.max(np.abs(charges))) if charges.size else 1.0)
    match = all(abs(r - c) < tol * scale for r, c in zip(residues, charges))
    # the zero-sum requirement binds only when the declared charges form a
    # complete node group (a partial set of branches may be checked alone)
    declared_zero = abs(np.sum(charges)) < tol * scale if charges.size else True
    zero = (not declared_zero) or abs(np.sum(residues)) < tol * scale
    return HolomorphyReport(residues, charges.tolist(), match, zero, bounded,
                            growth_factors)


@dataclass
class HypothesisAReport:
    injective: bool
    min_image_gap: float
    immersive: bool
    min_speed: float
    offending_pairs: list = field(default_factory=list)
    zero_theta0_samples: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.injective and self.immersive and not self.zero_theta0_samples

    def to_json(self) -> dict:
        return {
            "injective": self.injective,
            "min_image_gap": self.min_image_gap,
            "immersive": self.immersive,
            "min_speed": self.min_speed,
            "offending_pairs": [[int(i), int(j)] for i, j in self.offending_pairs],
            "zero_theta0_samples": [int(i) for i in self.zero_theta0_samples],
        }

    @staticmethod
    def from_json(doc: dict) -> "HypothesisAReport":
        return HypothesisAReport(doc["injective"], doc["min_image_gap"],
                                 doc["immersive"], doc["min_speed"],
                                 [tuple(p) for p in doc["offending_pairs"]],
                                 list(doc["zero_theta0_samples"]))


@dataclass
class DNDatum:
    """Boundary triple (gamma, u, theta u) with the derived embedding f."""

    curve: BoundaryCurve
    u: np.ndarray          # shape (3, n)
    theta: np.ndarray      # shape (3, n), dz coefficients
    f: np.ndarray          # shape (2, n)
    hypothesis_a: HypothesisAReport

    @property
    def n(self) -> int:
        return self.curve.n

    @property
    def f2_derivative(self) -> np.ndarray:
        return fourier_derivative(self.f[1])

    @property
    def f1_derivative(self) -> np.ndarray:
        return fourier_derivative(self.f[0])

    def image_curve(self) -> np.ndarray:
        """Samples of delta = f(gamma) in C^2 as rows (f1, f2)."""
        return self.f

    def reversed(self) -> "DNDatum":
        idx = (-np.arange(self.n)) % self.n
        return DNDatum(self.curve.reversed(), self.u[:, idx], self.theta[:, idx],
                       self.f[:, idx], self.hypothesis_a)

    def to_json(self) -> dict:
        return {
            "schema": DATUM_SCHEMA,
            "curve": self.curve.to_json(),
            "u": [jsonio.encode_complex_array(row) for row in self.u],
            "theta": [jsonio.encode_complex_array(row) for row in self.theta],
            "f": [jsonio.encode_complex_array(row) for row in self.f],
            "hypothesisA": self.hypothesis_a.to_json(),
        }

    @staticmethod
    def from_json(doc: dict) -> "DNDatum":
        jsonio.require_schema(doc, DATUM_SCHEMA)
        return DNDatum(
            BoundaryCurve.from_json(doc["curve"]),
            np.array([jsonio.decode_complex_array(r) for r in doc["u"]]),
            np.array([jsonio.decode_complex_array(r) for r in doc["theta"]]),
            np.array([jsonio.decode_complex_array(r) for r in doc["f"]]),
            HypothesisAReport.from_json(doc["hypothesisA"]),
        )


def check_hypothesis_a(curve: BoundaryCurve, theta: np.ndarray,
                       raise_on_failure: bool = True) -> tuple[np.ndarray, HypothesisAReport]:
    """Derive f = (theta1/theta0, theta2/theta0) and test the embedding."""
    theta0 = theta[0]
    zero_idx = np.nonzero(np.abs(theta0) < 1e-12 * max(np.max(np.abs(theta0)), 1e-300))[0]
    if zero_idx.size:
        report = HypothesisAReport(False, 0.0, False, 0.0, [],
                                   zero_idx.tolist())
        if raise_on_failure:
            raise ModelError(f"theta0 u0 vanishes at samples {zero_idx.tolist()}")
        return np.zeros((2, curve.n), dtype=complex), report

    f = np.vstack([theta[1] / theta0, theta[2] / theta0])
    n = curve.n
    for row in f:
        # a constant coordinate degenerates the embedding (and the moment
        # engine downstream), so it counts as an immersion failure
        if np.max(np.abs(row - np.mean(row))) < 1e-10 * max(1.0, abs(np.mean(row))):
            report = HypothesisAReport(False, 0.0, False, 0.0, [], [])
            if raise_on_failure:
                raise ModelError("hypothesis A failed: constant component in f")
            return f, report
    gaps = np.abs(f[0][:, None] - f[0][None, :]) + np.abs(f[1][:, None] - f[1][None, :])
    idx = np.arange(n)
    circ = (idx[:, None] - idx[None, :]) % n
    nonadjacent = (circ >= 2) & (circ <= n - 2)
    masked = np.where(nonadjacent, gaps, np.inf)
    min_gap = float(np.min(masked))
    injective = min_gap > INJECTIVITY_GAP
    offending = []
    if not injective:
        i, j = np.unravel_index(int(np.argmin(masked)), masked.shape)
        offending.append((int(i), int(j)))

    speed = np.abs(fourier_derivative(f[0])) + np.abs(fourier_derivative(f[1]))
    min_speed = float(np.min(speed))
    immersive = min_speed > IMMERSION_FLOOR

    report = HypothesisAReport(injective, min_gap, immersive, min_speed, offending, [])
    if raise_on_failure and not report.passed:
        raise ModelError(f"hypothesis A failed: injective={injective} "
                         f"(min gap {min_gap:.3e}), immersive={immersive} "
                         f"(min speed {min_speed:.3e}), pairs={offending}")
    return f, report


def build_dn_datum(model: NodalDomainModel,
                   families: tuple,
                   boundary_values: tuple | None = None,
                   prescriptions: tuple | None = None,
                   raise_on_failure: bool = True) -> DNDatum:
    """Assemble a DN datum from three boundary potentials or prescribed forms.

    The physical path solves three nodal Dirichlet problems; the synthetic
    path takes dz-coefficient prescriptions (rational forms) directly so
    inverse-module tests have closed-form oracles; residue admissibility is
    enforced against the model's node groups either way.
    """
    curve = model.boundary
    if prescriptions is not None:
        if boundary_values is None:
            raise ModelError("synthetic path requires boundary potential samples")
        theta = np.vstack([np.asarray(p(curve.positions), dtype=complex)
                           for p in prescriptions])
        for ell, p in enumerate(prescriptions):
            _check_prescription(model, families[ell] if families else None, p)
        u = np.vstack([np.asarray(v, dtype=complex) for v in boundary_values])
    else:
        if boundary_values is None:
            raise ModelError("physical path requires boundary potentials")
        rows_u, rows_t = [], []
        for ell in range(3):
            fam = families[ell] if families else None
            dist = solve_nodal_dirichlet(model, fam, boundary_values[ell])
            rows_u.append(dist.boundary_values)
            rows_t.append(compute_theta(dist))
        u = np.vstack(rows_u)
        theta = np.vstack(rows_t)

    f, report = check_hypothesis_a(curve, theta, raise_on_failure=raise_on_failure)
    return DNDatum(curve, u, theta, f, report)


def _check_prescription(model: NodalDomainModel, family: AdmissibleFamily | None,
                        prescription) -> None:
    if not isinstance(prescription, RationalFunction):
        return
    node_pts = model.all_points().tolist()
    aux_pts = [p for p, _ in model.auxiliary_poles]
    flat_charges = family.flat().tolist() if family is not None else []
    for pole, res in zip(prescription.poles, prescription.residues):
        if not bool(np.all(model.domain.contains(complex(pole)))):
            continue    # poles outside the domain are data, not charges
        dists = [abs(pole - q) for q in node_pts]
        if dists and min(dists) < 1e-9:
            k = int(np.argmin(dists))
            if abs(res - flat_charges[k]) > 1e-9 * max(1.0, abs(res)):
                raise ModelError("prescription residue disagrees with the "
                                 "admissible family at a node point")
        elif not any(abs(pole - q) < 1e-9 for q in aux_pts):
            raise ModelError(f"prescription pole {pole} is not a model node "
                             "or auxiliary pole")
