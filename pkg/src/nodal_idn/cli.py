"""Command-line pipelines: forward, invert, residues, characterize, compact.

All inputs and outputs are UTF-8 JSON with schema-version fields.  Exit
codes: 2 bad datum, 3 inversion failure, 4 cross-potential inconsistency,
5 characterization failure.  Outputs are byte-deterministic for identical
configs (fixed summation order, fixed seeds).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import jsonio
from .characterize import CharacterizationError, characterize
from .dirichlet import DNDatum, build_dn_datum
from .errors import FiberError, ModelError, MomentError, PartitionError
from .model import AdmissibleFamily, BoundaryCurve, DiskDomain, NodalDomainModel
from .moments import ReconstructedCurve, WindowPlan, sweep_windows
from .nodes import (analyze_singular_point, classify_and_partition,
                    locate_singularities)
from .oracles import RationalFunction

log = logging.getLogger("nodal_idn.cli")

EXIT_BAD_DATUM = 2
EXIT_INVERSION = 3
EXIT_INCONSISTENT = 4
EXIT_CHARACTERIZATION = 5


@dataclass
class PipelineConfig:
    command: str
    doc: dict
    out: str | None
    jobs: int = 1
    base_dir: str = "."

    def path(self, key: str, default=None):
        """Config values; path-like entries resolve against the config dir."""
        value = self.doc.get(key, default)
        if isinstance(value, str) and not os.path.isabs(value):
            return os.path.join(self.base_dir, value)
        return value


def _decode_prescription(doc: dict) -> RationalFunction:
    return RationalFunction(
        poles=tuple(jsonio.decode_complex_array(doc.get("poles", []))),
        residues=tuple(jsonio.decode_complex_array(doc.get("residues", []))),
        poly=tuple(jsonio.decode_complex_array(doc.get("poly", [0.0]))),
    )


def _decode_families(items) -> tuple | None:
    if not items:
        return None
    return tuple(AdmissibleFamily.from_json(f) if f else AdmissibleFamily(())
                 for f in items)


def _decode_samples(rows) -> tuple:
    return tuple(jsonio.decode_complex_array(r) for r in rows)


def cmd_forward(cfg: PipelineConfig) -> int:
    model = NodalDomainModel.from_json(jsonio.load(cfg.path("model")))
    families = _decode_families(cfg.path("families"))
    boundary = _decode_samples(cfg.path("boundary_values"))
    prescriptions = None
    if cfg.path("prescriptions"):
        prescriptions = tuple(_decode_prescription(p)
                              for p in cfg.path("prescriptions"))
    try:
        datum = build_dn_datum(model, families, boundary_values=boundary,
                               prescriptions=prescriptions)
    except ModelError as exc:
        print(f"forward: bad datum: {exc}", file=sys.stderr)
        return EXIT_BAD_DATUM
    jsonio.dump(datum.to_json(), cfg.out or "datum.json")
    log.info("forward: wrote %s", cfg.out or "datum.json")
    return 0


def cmd_invert(cfg: PipelineConfig) -> int:
    datum = DNDatum.from_json(jsonio.load(cfg.path("datum")))
    plan = WindowPlan.from_json(cfg.path("windows"))
    try:
        curve = sweep_windows(datum, plan, jobs=cfg.jobs)
    except (FiberError, MomentError) as exc:
        print(f"invert: {exc}", file=sys.stderr)
        return EXIT_INVERSION
    out = cfg.out or "curve.json"
    jsonio.dump(curve.to_json(), out)
    report_lines = [f"windows analyzed: {len(curve.windows)}"]
    for w in curve.windows:
        line = (f"window center {w.center:.6g} radius {w.radius:.6g}: "
                f"p={w.p} ({w.sheet_method}), min sheet separation "
                f"{w.min_root_separation:.3e}")
        if w.relocated_from is not None:
            line += f" [re-centered from {w.relocated_from:.6g}]"
        report_lines.append(line)
    for center, msg in curve.failures:
        report_lines.append(f"window at {center:.6g} failed: {msg}")
    for k, sigma in enumerate(curve.permutations):
        report_lines.append(f"stitch {k}->{k + 1}: sheet map "
                            f"{list(map(int, sigma))}")
    report_lines.extend(curve.notes)
    report_lines.append(f"self-consistency residual: "
                        f"{_self_consistency(datum, curve):.3e}")
    with open(out + ".report.txt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(report_lines) + "\n")
    return 0


def _self_consistency(datum: DNDatum, curve: ReconstructedCurve) -> float:
    """Max power-sum defect of the recovered fibers against fresh moments."""
    from .moments import MomentEngine
    engine = MomentEngine.from_datum(datum)
    worst = 0.0
    for w in curve.windows:
        if w.p == 0:
            continue
        sums = engine.moments(range(1, w.p + 1), w.grid)
        for m in range(1, w.p + 1):
            got = np.sum(w.roots ** m, axis=1)
            worst = max(worst, float(np.max(np.abs(got - sums[m - 1]))))
    return worst


def cmd_residues(cfg: PipelineConfig) -> int:
    datum = DNDatum.from_json(jsonio.load(cfg.path("datum")))
    curve = ReconstructedCurve.from_json(jsonio.load(cfg.path("curve")))
    radius = float(cfg.path("contour_radius", 0.05))
    candidates = locate_singularities(curve, datum)
    reports = [analyze_singular_point(datum, curve, c, contour_radius=radius)
               for c in candidates]
    try:
        inventory = classify_and_partition(reports, datum)
    except PartitionError as exc:
        print(f"residues: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    jsonio.dump(inventory.to_json(), cfg.out or "nodes.json")
    return 0


def cmd_characterize(cfg: PipelineConfig) -> int:
    datum = DNDatum.from_json(jsonio.load(cfg.path("datum")))
    window = cfg.path("window")
    center = (jsonio.decode_complex(window["center"][0]),
              jsonio.decode_complex(window["center"][1]))
    extent = float(window["extent"])
    cand = cfg.path("candidates")
    points = charges = None
    if cand:
        points = jsonio.decode_complex_array(cand["points"])
        charges = np.vstack([jsonio.decode_complex_array(r)
                             for r in cand["charges"]])
    try:
        report = characterize(datum, center, extent, points, charges,
                              probe_count=int(cfg.path("probes", 20)),
                              seed=int(cfg.path("seed", 7)),
                              thresholds=cfg.path("thresholds"))
    except CharacterizationError as exc:
        print(f"characterize: {exc}", file=sys.stderr)
        return EXIT_CHARACTERIZATION
    jsonio.dump(report.to_json(), cfg.out or "caract.json")
    return 0 if report.passed else EXIT_CHARACTERIZATION


def _compact_potentials(cfg_doc: dict):
    """Closed-form boundary data of the compact scenario on gamma = bS."""
    rho = float(cfg_doc["rho"])
    n = int(cfg_doc.get("n", 512))
    margin = 0.05 * rho
    charges = jsonio.decode_complex_array(cfg_doc["charges"])
    poles = [tuple(jsonio.decode_complex_array(p)) for p in cfg_doc["poles"]]
    aux = cfg_doc.get("aux") or [[], [], []]
    curve = BoundaryCurve.circle(rho, n)
    z = curve.positions

    def log_pole_potential(point: complex, residue: complex) -> np.ndarray:
        """Boundary samples of 2*Re(residue * log(z - point)), taking the
        branch whose cut points away from the disk."""
        phat = point / abs(point)
        log_branch = np.log(np.abs(z - point)) \
            + 1j * np.angle((z - point) * np.conj(-phat)) \
            + 1j * np.angle(-phat)
        return 2 * (residue * log_branch).real

    us, prescriptions = [], []
    for ell in range(3):
        aminus, aplus = poles[ell]
        for a in (aminus, aplus):
            if abs(a) <= rho + margin:
                raise ModelError(f"charge point {a} is not inside the "
                                 "measurement subdomain")
        c = charges[ell]
        u = log_pole_potential(aplus, c) + log_pole_potential(aminus, -c)
        w_poles = [aplus, aminus]
        w_res = [c, -c]
        for item in aux[ell]:
            p = jsonio.decode_complex(item[0])
            kappa = jsonio.decode_complex(item[1])
            if abs(p) <= rho + margin:
                raise ModelError(f"auxiliary pole {p} is not inside the "
                                 "measurement subdomain")
            u = u + log_pole_potential(p, kappa)
            w_poles.append(p)
            w_res.append(kappa)
        us.append(u.astype(complex))
        prescriptions.append(RationalFunction(poles=tuple(w_poles),
                                              residues=tuple(w_res)))
    model = NodalDomainModel(DiskDomain(rho), curve)
    return model, tuple(us), tuple(prescriptions)


def cmd_compact(cfg: PipelineConfig) -> int:
    doc = cfg.doc
    prefix = cfg.out or cfg.path("out_prefix", "compact")
    try:
        model, us, prescriptions = _compact_potentials(doc)
        datum = build_dn_datum(model, None, boundary_values=us,
                               prescriptions=prescriptions)
    except ModelError as exc:
        print(f"compact: bad scenario: {exc}", file=sys.stderr)
        return EXIT_BAD_DATUM
    jsonio.dump(datum.to_json(), f"{prefix}.datum.json")
    plan = WindowPlan.from_json(doc["windows"])
    try:
        curve = sweep_windows(datum, plan)
    except (FiberError, MomentError) as exc:
        print(f"compact: inversion failed: {exc}", file=sys.stderr)
        return EXIT_INVERSION
    jsonio.dump(curve.to_json(), f"{prefix}.curve.json")
    candidates = locate_singularities(curve, datum)
    reports = [analyze_singular_point(datum, curve, c,
                                      contour_radius=float(
                                          doc.get("contour_radius", 0.05)))
               for c in candidates]
    try:
        inventory = classify_and_partition(reports, datum)
    except PartitionError as exc:
        print(f"compact: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    jsonio.dump(inventory.to_json(), f"{prefix}.nodes.json")
    summary = {
        "schema": "nodal-idn/compact/1",
        "windows": len(curve.windows),
        "sheet_counts": [w.p for w in curve.windows],
        "singular_points": len(inventory.points),
        "recovered_nodes": len(inventory.nodes),
        "spurious_points": len(inventory.spurious),
    }
    jsonio.dump(summary, f"{prefix}.report.json")
    return 0


COMMANDS = {
    "forward": cmd_forward,
    "invert": cmd_invert,
    "residues": cmd_residues,
    "characterize": cmd_characterize,
    "compact": cmd_compact,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nodal-idn",
        description="Forward/inverse Dirichlet-to-Neumann engine for nodal curves")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--out", default=None)
    args = parser.parse_args(argv)

    level = os.environ.get("NODAL_IDN_LOG", "error").lower()
    logging.basicConfig(level={"error": logging.ERROR, "info": logging.INFO,
                               "debug": logging.DEBUG}.get(level, logging.ERROR))
    try:
        doc = jsonio.load(args.config)
    except (OSError, ValueError) as exc:
        print(f"nodal-idn: cannot read config {args.config}: {exc}",
              file=sys.stderr)
        return 1
    base_dir = os.path.dirname(os.path.abspath(args.config))
    out = args.out
    if out is None and isinstance(doc.get("out"), str):
        out = doc["out"] if os.path.isabs(doc["out"]) \
            else os.path.join(base_dir, doc["out"])
    cfg = PipelineConfig(args.command, doc, out, max(1, args.jobs), base_dir)
    try:
        return COMMANDS[args.command](cfg)
    except (OSError, ValueError, KeyError) as exc:
        print(f"nodal-idn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
