import math

import numpy as np
import pytest
import scipy.linalg as sla

from gapeig import (
    ApsSpec,
    DiracSpec,
    RandomSpec,
    SpecInvalid,
    analytic_dirac_energy,
    aps_sigma_min,
    build_aps_cylinder,
    build_dirac_coulomb,
    gap_spectrum,
    hardy_check,
    lambda0,
    lambda1_certificate,
    lambda_k,
    random_gapped,
)
from gapeig.models import forward_difference, radial_grid


class TestDiracSpec:
    def test_validation(self):
        with pytest.raises(SpecInvalid):
            DiracSpec(nu=-0.1, kappa=-1, n=64, r_max=20.0)
        with pytest.raises(SpecInvalid):
            DiracSpec(nu=1.5, kappa=-1, n=64, r_max=20.0)
        with pytest.raises(SpecInvalid):
            DiracSpec(nu=0.5, kappa=0, n=64, r_max=20.0)
        with pytest.raises(SpecInvalid):
            DiracSpec(nu=0.5, kappa=-1, n=8, r_max=20.0)
        with pytest.raises(SpecInvalid):
            DiracSpec(nu=0.5, kappa=-1, n=64, r_max=0.0)
        with pytest.raises(SpecInvalid):
            DiracSpec(nu=0.5, kappa=-1, n=64, r_max=20.0, grading="cubic")

    def test_grading_defaults(self):
        assert DiracSpec(nu=0.5, kappa=-1, n=64, r_max=20.0).grading == "uniform"
        assert DiracSpec(nu=0.7, kappa=-1, n=64, r_max=20.0).grading == "uniform"
        assert DiracSpec(nu=0.9, kappa=-1, n=64, r_max=20.0).grading == "quadratic"
        explicit = DiracSpec(nu=0.9, kappa=-1, n=64, r_max=20.0, grading="uniform")
        assert explicit.grading == "uniform"


class TestDiracGrid:
    def test_last_node_exact(self):
        for grading in ("uniform", "quadratic"):
            spec = DiracSpec(nu=0.5, kappa=-1, n=50, r_max=17.0, grading=grading)
            r = radial_grid(spec)
            assert r[-1] == 17.0
            assert r[0] > 0.0
            assert np.all(np.diff(r) > 0.0)

    def test_lambda0_exact(self):
        spec = DiracSpec(nu=0.9, kappa=1, n=48, r_max=25.0)
        op = build_dirac_coulomb(spec)
        assert lambda0(op) == pytest.approx(-1.0 - 0.9 / 25.0, abs=1e-14)

    def test_coupling_structure(self):
        spec = DiracSpec(nu=0.5, kappa=-2, n=32, r_max=10.0)
        op = build_dirac_coulomb(spec)
        r = radial_grid(spec)
        d = op.c + 2.0 * np.diag(1.0 / r)
        assert np.linalg.norm(d + d.T) <= 1e-12 * np.linalg.norm(d)
        assert np.count_nonzero(op.p - np.diag(np.diagonal(op.p))) == 0


class TestDiracEnergies:
    def test_ground_state_quadratic_grid(self):
        spec = DiracSpec(nu=0.5, kappa=-1, n=96, r_max=30.0, grading="quadratic")
        lam1 = lambda_k(build_dirac_coulomb(spec), 1).lambda_k
        assert abs(lam1 - math.sqrt(3.0) / 2.0) <= 1e-10

    def test_ground_state_uniform_grid(self):
        spec = DiracSpec(nu=0.5, kappa=-1, n=200, r_max=30.0)
        lam1 = lambda_k(build_dirac_coulomb(spec), 1).lambda_k
        assert abs(lam1 - math.sqrt(3.0) / 2.0) <= 1e-3

    def test_free_channel_continuum_edge(self):
        spec = DiracSpec(nu=0.0, kappa=-1, n=300, r_max=30.0)
        lam1 = lambda_k(build_dirac_coulomb(spec), 1).lambda_k
        assert 1.0 - 1e-9 <= lam1 <= 1.1

    def test_certificate(self):
        spec = DiracSpec(nu=0.5, kappa=-1, n=64, r_max=20.0)
        cert = lambda1_certificate(build_dirac_coulomb(spec))
        assert cert.valid
        assert cert.lambda0 < 0.0 < cert.lambda1


class TestAnalyticOracle:
    def test_ground_state(self):
        assert analytic_dirac_energy(0.5, -1, 0) == pytest.approx(
            math.sqrt(3.0) / 2.0, abs=1e-15)

    def test_free_limit(self):
        assert analytic_dirac_energy(0.0, -1, 1) == 1.0

    def test_first_excited(self):
        assert analytic_dirac_energy(0.5, -1, 1) == pytest.approx(
            0.96592582628906829, abs=1e-15)

    def test_validation(self):
        with pytest.raises(SpecInvalid):
            analytic_dirac_energy(0.5, 0, 1)
        with pytest.raises(SpecInvalid):
            analytic_dirac_energy(1.0, -1, 0)
        with pytest.raises(SpecInvalid):
            analytic_dirac_energy(0.5, -1, -1)
        with pytest.raises(SpecInvalid):
            analytic_dirac_energy(0.5, 1, 0)
        assert analytic_dirac_energy(0.5, 1, 1) == pytest.approx(
            0.96592582628906829, abs=1e-15)


class TestApsCylinder:
    def test_validation(self):
        with pytest.raises(SpecInvalid):
            ApsSpec(modes=(), length_l=math.pi, n=32)
        with pytest.raises(SpecInvalid):
            ApsSpec(modes=(0.0,), length_l=0.0, n=32)
        with pytest.raises(SpecInvalid):
            ApsSpec(modes=(0.0,), length_l=math.pi, n=4)

    def test_sigma_min_closed_form(self):
        for n, length in ((12, math.pi), (33, 2.0)):
            smallest = sla.svdvals(forward_difference(n, length))[-1]
            assert smallest == pytest.approx(aps_sigma_min(n, length), rel=1e-12)

    def test_zero_mode_reaches_sigma_min(self):
        spec = ApsSpec(modes=(0.0,), length_l=math.pi, n=32)
        op = build_aps_cylinder(spec)
        assert lambda0(op) == 0.0
        lam1 = lambda_k(op, 1).lambda_k
        assert lam1 == pytest.approx(aps_sigma_min(32, math.pi), abs=1e-10)

    def test_higher_mode_shifts_in_quadrature(self):
        spec = ApsSpec(modes=(3.0,), length_l=math.pi, n=32)
        lam1 = lambda_k(build_aps_cylinder(spec), 1).lambda_k
        expected = math.hypot(3.0, aps_sigma_min(32, math.pi))
        assert lam1 == pytest.approx(expected, abs=1e-10)

    def test_extra_modes_keep_lambda1(self):
        lone = lambda_k(build_aps_cylinder(ApsSpec(modes=(0.0,), length_l=math.pi, n=24)), 1)
        jointly = lambda_k(build_aps_cylinder(ApsSpec(modes=(0.0, 2.0), length_l=math.pi, n=24)), 1)
        assert jointly.lambda_k == pytest.approx(lone.lambda_k, abs=1e-10)

    def test_sorted_union_of_mode_levels(self):
        n, length = 16, math.pi
        spec = ApsSpec(modes=(0.0, 1.0), length_l=length, n=n)
        op = build_aps_cylinder(spec)
        sigmas = [2.0 * (n + 1) / length * math.sin(j * math.pi / (2 * (n + 1)))
                  for j in range(1, n + 1)]
        expected = sorted([s for s in sigmas] + [math.hypot(1.0, s) for s in sigmas])
        results = gap_spectrum(op, 6)
        for res, want in zip(results, expected[:6]):
            assert res.lambda_k == pytest.approx(want, abs=1e-9)


class TestHardy:
    def test_values_decline_with_coupling(self):
        reports = [hardy_check(nu, 1500, 30.0) for nu in (0.0, 0.5, 1.0)]
        assert all(r.passed for r in reports)
        values = [r.value for r in reports]
        assert values[0] >= 0.99
        assert values[1] >= 0.5
        assert values[2] >= 0.0
        assert values[0] > values[1] > values[2]

    def test_report_shape(self):
        report = hardy_check(0.9, 600, 30.0)
        assert report.check == "hardy"
        assert report.params["grading"] == "quadratic"
        assert report.passed


class TestRandomGapped:
    def test_certificate_holds(self):
        op = random_gapped(RandomSpec(n_plus=9, n_minus=7, gap_target=1.0, seed=42))
        cert = lambda1_certificate(op)
        assert cert.valid
        assert cert.lambda1 - cert.lambda0 >= 0.5

    def test_deterministic(self):
        a = random_gapped(RandomSpec(n_plus=6, n_minus=5, gap_target=2.0, seed=11))
        b = random_gapped(RandomSpec(n_plus=6, n_minus=5, gap_target=2.0, seed=11))
        assert np.array_equal(a.p, b.p)
        assert np.array_equal(a.c, b.c)
        assert np.array_equal(a.amm, b.amm)

    def test_distinct_seeds_differ(self):
        a = random_gapped(RandomSpec(n_plus=6, n_minus=5, seed=1))
        b = random_gapped(RandomSpec(n_plus=6, n_minus=5, seed=2))
        assert not np.array_equal(a.c, b.c)

    def test_gap_scales_with_target(self):
        op = random_gapped(RandomSpec(n_plus=6, n_minus=5, gap_target=4.0, seed=3))
        assert lambda0(op) <= -4.0 + 1e-12

    def test_validation(self):
        with pytest.raises(SpecInvalid):
            RandomSpec(n_plus=0, n_minus=5)
        with pytest.raises(SpecInvalid):
            RandomSpec(n_plus=5, n_minus=5, gap_target=0.0)
