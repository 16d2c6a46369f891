import numpy as np
import pytest

from nodal_idn.dirichlet import (DNDatum, apply_dn, build_dn_datum,
                                 compute_theta, solve_nodal_dirichlet,
                                 verify_weak_holomorphy)
from nodal_idn.errors import ModelError
from nodal_idn.greens import disk_green
from nodal_idn.model import (AdmissibleFamily, AnnulusDomain, DiskDomain,
                             NodalDomainModel)
from nodal_idn.oracles import RationalFunction


@pytest.fixture(scope="module")
def unit_disk_model():
    dom = DiskDomain(1.0)
    return NodalDomainModel(dom, dom.boundary(256))


@pytest.fixture(scope="module")
def dipole_model():
    dom = DiskDomain(1.0)
    return NodalDomainModel(dom, dom.boundary(256),
                            (np.array([0.5 + 0j, -0.5 + 0j]),))


@pytest.fixture(scope="module")
def dipole_dist(dipole_model):
    fam = AdmissibleFamily((np.array([1.0, -1.0]),))
    return solve_nodal_dirichlet(dipole_model, fam, np.zeros(256))


class TestNodalDirichlet:
    def test_harmonic_monomial(self, unit_disk_model):
        t = unit_disk_model.boundary.parameters
        dist = solve_nodal_dirichlet(unit_disk_model, None, np.cos(t))
        assert abs(dist.value(0.3 + 0.2j) - 0.3) < 1e-12
        assert abs(dist.dz(0.1 - 0.4j) - 0.5) < 1e-12

    def test_dipole_antisymmetry_at_center(self, dipole_dist):
        assert abs(dipole_dist.value(0.0 + 0.0j)) < 1e-13

    def test_dipole_closed_form(self, dipole_dist):
        expected = 4 * np.pi * (disk_green(0.25, 0.5, 1.0)
                                - disk_green(0.25, -0.5, 1.0))
        assert abs(dipole_dist.value(0.25 + 0.0j) - expected) < 1e-12

    def test_residue_contract(self, dipole_dist):
        assert abs(dipole_dist.residue_at(0.5) - 1.0) < 1e-6
        assert abs(dipole_dist.residue_at(-0.5) + 1.0) < 1e-6
        # also at the fixed circle radius of the type invariant
        assert abs(dipole_dist.residue_at(0.5, eps=0.01) - 1.0) < 1e-6

    def test_boundary_trace(self, dipole_model):
        # the charge part vanishes on the rim by the principal-Green
        # construction, so the trace is the boundary data itself
        fam = AdmissibleFamily((np.array([1.0, -1.0]),))
        t = dipole_model.boundary.parameters
        u = np.cos(2 * t) + 0.3
        dist = solve_nodal_dirichlet(dipole_model, fam, u)
        trace = dist.value(dipole_model.boundary.positions)
        assert np.max(np.abs(trace - u)) < 1e-7

    def test_linearity_in_data_and_family(self, dipole_model, rng):
        fam = AdmissibleFamily((np.array([1.0, -1.0]),))
        zero = AdmissibleFamily((np.array([0.0, 0.0]),))
        t = dipole_model.boundary.parameters
        u1 = np.cos(t) + 0.2 * np.sin(3 * t)
        u2 = np.sin(2 * t) - 0.1
        a, b = 0.7, -1.3
        d1 = solve_nodal_dirichlet(dipole_model, fam, u1)
        d2 = solve_nodal_dirichlet(dipole_model, zero, u2)
        fam_scaled = AdmissibleFamily((np.array([a, -a]),))
        combo = solve_nodal_dirichlet(dipole_model, fam_scaled, a * u1 + b * u2)
        pts = 0.6 * np.exp(1j * rng.uniform(0, 2 * np.pi, 12))
        expected = a * d1.value(pts) + b * d2.value(pts)
        assert np.max(np.abs(combo.value(pts) - expected)) < 1e-9

    def test_maximum_principle(self, unit_disk_model, rng):
        t = unit_disk_model.boundary.parameters
        u = np.cos(3 * t) + 0.5 * np.sin(t) - 0.2
        dist = solve_nodal_dirichlet(unit_disk_model, None, u)
        xs = np.arange(-0.8, 0.81, 0.08)
        grid = (xs[:, None] + 1j * xs[None, :]).ravel()
        grid = grid[np.abs(grid) < 0.85]
        interior_max = np.max(dist.value(grid).real)
        assert interior_max <= np.max(u) + 1e-7

    def test_charge_on_boundary_rejected(self):
        dom = DiskDomain(1.0)
        with pytest.raises(ModelError):
            NodalDomainModel(dom, dom.boundary(64),
                             (np.array([1.0 + 0j, -0.5 + 0j]),))

    def test_annulus_charged_solve(self):
        dom = AnnulusDomain(0.4, 1.2)
        outer, _ = dom.boundaries(160)
        model = NodalDomainModel(dom, outer, (np.array([0.7, -0.7]),))
        fam = AdmissibleFamily((np.array([1.0, -1.0]),))
        dist = solve_nodal_dirichlet(model, fam, np.zeros(160))
        assert abs(dist.residue_at(0.7, eps=0.02) - 1.0) < 1e-6
        assert abs(dist.residue_at(-0.7, eps=0.02) + 1.0) < 1e-6


class TestDNOperator:
    def test_cosine(self, unit_disk_model):
        t = unit_disk_model.boundary.parameters
        dist = solve_nodal_dirichlet(unit_disk_model, None, np.cos(t))
        nu = apply_dn(dist)
        assert nu.dtype.kind == "f"
        assert np.max(np.abs(nu - np.cos(t))) < 1e-7

    def test_constant(self, unit_disk_model):
        dist = solve_nodal_dirichlet(unit_disk_model, None,
                                     2.5 * np.ones(256))
        assert np.max(np.abs(apply_dn(dist))) < 1e-10

    def test_complex_data_accepted(self, unit_disk_model):
        # the engine is linear over C; u = e^{it} extends to z with dU = dz
        t = unit_disk_model.boundary.parameters
        dist = solve_nodal_dirichlet(unit_disk_model, None, np.exp(1j * t))
        nu = apply_dn(dist)
        assert nu.dtype.kind == "c"
        assert np.max(np.abs(nu - np.exp(1j * t))) < 1e-7
        assert abs(dist.value(0.3 + 0.1j) - (0.3 + 0.1j)) < 1e-12

    def test_charged_radial_derivative(self, dipole_dist, dipole_model):
        # finite-difference radial derivative of the closed form
        t = dipole_model.boundary.parameters
        h = 1e-4

        def field(r):
            return 4 * np.pi * (disk_green(r * np.exp(1j * t), 0.5, 1.0)
                                - disk_green(r * np.exp(1j * t), -0.5, 1.0))

        oracle = (3 * field(1.0) - 4 * field(1.0 - h) + field(1.0 - 2 * h)) \
            / (2 * h)
        nu = apply_dn(dipole_dist)
        assert np.max(np.abs(nu - oracle)) < 1e-5


class TestTheta:
    def test_cosine_coefficient(self, unit_disk_model):
        t = unit_disk_model.boundary.parameters
        dist = solve_nodal_dirichlet(unit_disk_model, None, np.cos(t))
        theta = compute_theta(dist)
        assert np.max(np.abs(theta - 0.5)) < 1e-7

    def test_constant_vanishes(self, unit_disk_model):
        dist = solve_nodal_dirichlet(unit_disk_model, None, np.ones(256))
        assert np.max(np.abs(compute_theta(dist))) < 1e-10

    def test_charged_closed_form(self, dipole_dist, dipole_model):
        theta = compute_theta(dipole_dist)
        z = dipole_model.boundary.positions
        exact = (1.0 / (z - 0.5) + 0.5 / (1 - 0.5 * z)
                 - 1.0 / (z + 0.5) + 0.5 / (1 + 0.5 * z))
        assert np.max(np.abs(theta - exact)) < 1e-8

    def test_dn_theta_consistency(self, dipole_dist, dipole_model):
        theta = compute_theta(dipole_dist)
        nu_vec = dipole_model.boundary.outward_normal
        reconstructed = 2 * (nu_vec * theta).real
        assert np.max(np.abs(reconstructed - apply_dn(dipole_dist))) < 1e-7


class TestWeakHolomorphy:
    def test_simple_pole_passes(self):
        rep = verify_weak_holomorphy(lambda z: 1.0 / (z - 0.3), [0.3], [1.0])
        assert rep.passed

    def test_double_pole_fails(self):
        rep = verify_weak_holomorphy(lambda z: 1.0 / (z - 0.3) ** 2,
                                     [0.3], [0.0])
        assert not rep.passed
        assert not rep.bounded_after_polar
        assert max(rep.growth_factors[0]) > 1.5

    def test_forward_form_passes(self, dipole_dist):
        rep = verify_weak_holomorphy(dipole_dist.dz, [0.5, -0.5], [1.0, -1.0],
                                     eps=0.01)
        assert rep.passed
        assert abs(rep.residues[0] - 1.0) < 1e-6
        assert abs(rep.residues[1] + 1.0) < 1e-6


class TestBuildDatum:
    def test_synthetic_polynomial_example(self):
        dom = DiskDomain(1.5)
        curve = dom.boundary(256)
        model = NodalDomainModel(dom, curve)
        w0 = RationalFunction(poly=(1.0,))
        w1 = RationalFunction(poly=(-1.0, 0.0, 1.0))
        w2 = RationalFunction(poly=(0.0, -1.0, 0.0, 1.0))
        z = curve.positions
        us = (2 * z.real, 2 * (z**3 / 3 - z).real,
              2 * (z**4 / 4 - z**2 / 2).real)
        datum = build_dn_datum(model, None, boundary_values=us,
                               prescriptions=(w0, w1, w2))
        assert datum.hypothesis_a.passed
        assert np.max(np.abs(datum.f[0] - (z**2 - 1))) < 1e-12
        assert np.max(np.abs(datum.f[1] - (z**3 - z))) < 1e-12

    def test_degenerate_constant_component(self):
        dom = DiskDomain(1.0)
        curve = dom.boundary(128)
        model = NodalDomainModel(dom, curve)
        w0 = RationalFunction(poly=(1.0,))
        w2 = RationalFunction(poly=(0.0, 1.0))
        z = curve.positions
        us = (2 * z.real, 2 * z.real, (z**2).real)
        with pytest.raises(ModelError):
            build_dn_datum(model, None, boundary_values=us,
                           prescriptions=(w0, w0, w2))

    def test_charged_node_image(self, charged_datum):
        # both node preimages map to (2, 3); verified at 200 extra samples
        assert charged_datum.hypothesis_a.passed
        f1 = 2 + np.array([1.0, -1.0]) ** 3 - np.array([1.0, -1.0])
        f2 = 3 + np.array([1.0, -1.0]) ** 4 - np.array([1.0, -1.0]) ** 2
        assert np.allclose(f1, [2.0, 2.0]) and np.allclose(f2, [3.0, 3.0])
        z = charged_datum.curve.positions[::2][:200]
        assert np.max(np.abs(charged_datum.f[0][::2][:200]
                             - (2 + z**3 - z))) < 1e-10

    def test_physical_path_matches_synthetic(self, charged_scenario,
                                             charged_datum):
        physical = build_dn_datum(charged_scenario.model,
                                  charged_scenario.families,
                                  boundary_values=charged_scenario.boundary_values)
        assert np.max(np.abs(physical.theta - charged_datum.theta)) < 1e-8

    def test_prescription_pole_must_be_node(self):
        dom = DiskDomain(1.5)
        curve = dom.boundary(128)
        model = NodalDomainModel(dom, curve)
        stray = RationalFunction(poles=(0.4,), residues=(1.0,))
        w0 = RationalFunction(poly=(1.0,))
        z = curve.positions
        us = (2 * z.real,) * 3
        with pytest.raises(ModelError):
            build_dn_datum(model, None, boundary_values=us,
                           prescriptions=(w0, stray, w0))

    def test_json_round_trip(self, charged_datum, tmp_path):
        from nodal_idn import jsonio
        path = tmp_path / "datum.json"
        jsonio.dump(charged_datum.to_json(), path)
        back = DNDatum.from_json(jsonio.load(path))
        assert np.allclose(back.theta, charged_datum.theta)
        assert np.allclose(back.f, charged_datum.f)
        assert back.hypothesis_a.passed


class TestReversal:
    def test_reversed_datum_geometry(self, charged_datum):
        rev = charged_datum.reversed()
        assert np.allclose(rev.curve.positions[0], charged_datum.curve.positions[0])
        back = rev.reversed()
        assert np.allclose(back.f, charged_datum.f)
        assert np.allclose(back.curve.derivatives, charged_datum.curve.derivatives)
