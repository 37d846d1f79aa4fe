import math

import numpy as np
import pytest

import carnotiso as ci
from carnotiso.geodesics import GeodesicParams, sphere_point_arrays
from carnotiso.groups import GroupError

H1 = ci.heisenberg(1)
H2 = ci.heisenberg(2)
CC = ci.CCMetric(H1)


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


class TestSpherePoint:
    def test_flat_segment(self):
        chi = unit([0.6, 0.8])
        p = ci.cc_sphere_point(H1, GeodesicParams(chi, 0.0, 1.0))
        assert np.allclose(p.layer1, chi)
        assert p.t == 0.0

    def test_full_turn_hits_center(self):
        p = ci.cc_sphere_point(H1, GeodesicParams(unit([1, 0]), math.pi, 1.0))
        assert np.allclose(p.layer1, [0, 0], atol=1e-15)
        assert p.t == pytest.approx(1 / math.pi)
        # consistent with the center distance formula
        assert CC.norm(p) == pytest.approx(1.0, abs=1e-12)

    def test_roundtrip(self):
        rng = np.random.default_rng(0)
        n = 5000
        chi = rng.standard_normal((n, 2))
        chi /= np.linalg.norm(chi, axis=1, keepdims=True)
        phi = rng.uniform(-(math.pi - 1e-6), math.pi - 1e-6, n)
        r = 10 ** rng.uniform(-2, 2, n)
        z, t = sphere_point_arrays(1, chi, phi, r)
        assert np.max(np.abs(CC.norm_arrays(z, t) - r)) < 1e-8

    def test_phi_symmetry(self):
        chi = unit([0.28, -0.96])
        plus = ci.cc_sphere_point(H1, GeodesicParams(chi, 1.3, 2.0))
        minus = ci.cc_sphere_point(H1, GeodesicParams(chi, -1.3, 2.0))
        assert np.allclose(plus.layer1, minus.layer1)
        assert plus.t == pytest.approx(-minus.t)

    def test_param_validation(self):
        with pytest.raises(GroupError):
            GeodesicParams(np.array([2.0, 0.0]), 0.5, 1.0)  # not unit
        with pytest.raises(GroupError):
            GeodesicParams(unit([1, 0]), 4.0, 1.0)  # |phi| > pi
        with pytest.raises(GroupError):
            GeodesicParams(unit([1, 0]), 0.5, 0.0)  # r <= 0

    def test_higher_n(self):
        cc2 = ci.CCMetric(H2)
        rng = np.random.default_rng(1)
        for _ in range(200):
            chi = unit(rng.standard_normal(4))
            phi = rng.uniform(-math.pi + 1e-6, math.pi - 1e-6)
            r = float(10 ** rng.uniform(-1, 1))
            p = ci.cc_sphere_point(H2, GeodesicParams(chi, phi, r))
            assert cc2.norm(p) == pytest.approx(r, abs=1e-9)


class TestGeodesicCurve:
    def test_endpoints(self):
        gp = GeodesicParams(unit([1, 1]), 2.2, 1.7)
        start = ci.cc_geodesic_sample(H1, gp, 0.0)
        assert np.allclose(start.layer1, 0) and start.t == 0
        end = ci.cc_geodesic_sample(H1, gp, gp.r)
        target = ci.cc_sphere_point(H1, gp)
        assert end.close_to(target, tol=1e-12)

    def test_constant_speed(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            chi = unit(rng.standard_normal(2))
            phi = rng.uniform(-math.pi, math.pi)
            r = float(rng.uniform(0.2, 5.0))
            gp = GeodesicParams(chi, phi, r)
            s1, s2 = sorted(rng.uniform(0, r, 2))
            a = ci.cc_geodesic_sample(H1, gp, s1)
            b = ci.cc_geodesic_sample(H1, gp, s2)
            assert CC.dist(a, b) == pytest.approx(s2 - s1, abs=1e-7 * max(1, r))

    def test_constant_speed_h2(self):
        cc2 = ci.CCMetric(H2)
        rng = np.random.default_rng(3)
        for _ in range(50):
            gp = GeodesicParams(unit(rng.standard_normal(4)),
                                rng.uniform(-math.pi, math.pi),
                                float(rng.uniform(0.5, 3.0)))
            s1, s2 = sorted(rng.uniform(0, gp.r, 2))
            a = ci.cc_geodesic_sample(H2, gp, s1)
            b = ci.cc_geodesic_sample(H2, gp, s2)
            assert cc2.dist(a, b) == pytest.approx(s2 - s1, abs=1e-7)

    def test_arc_out_of_range(self):
        gp = GeodesicParams(unit([1, 0]), 1.0, 1.0)
        with pytest.raises(GroupError):
            ci.cc_geodesic_sample(H1, gp, -0.1)
        with pytest.raises(GroupError):
            ci.cc_geodesic_sample(H1, gp, 1.1)

    def test_minimality_spot_check(self):
        # no sampled two-leg detour beats the geodesic for |phi| < pi
        rng = np.random.default_rng(4)
        for _ in range(200):
            gp = GeodesicParams(unit(rng.standard_normal(2)),
                                rng.uniform(-math.pi + 1e-3, math.pi - 1e-3),
                                1.0)
            end = ci.cc_sphere_point(H1, gp)
            mid = ci.point(rng.uniform(-1, 1, 2), rng.uniform(-0.5, 0.5, 1))
            two_leg = CC.dist(ci.identity(H1), mid) + CC.dist(mid, end)
            assert two_leg >= 1.0 - 1e-9


class TestCutPoint:
    def test_unit_cut_point(self):
        x = ci.cut_point(H1, 1.0)
        assert np.allclose(x.layer1, 0)
        assert x.t == pytest.approx(1 / math.pi)
        assert CC.norm(x) == pytest.approx(1.0, abs=1e-14)

    def test_distance_scaling(self):
        for rho in (0.5, 1.0, 3.7):
            assert CC.norm(ci.cut_point(H1, rho)) == pytest.approx(rho, abs=1e-12)

    def test_dilation_relation(self):
        assert ci.dilate(H1, ci.cut_point(H1, 1.0), 2.5).close_to(ci.cut_point(H1, 2.5))

    def test_bad_rho(self):
        with pytest.raises(GroupError):
            ci.cut_point(H1, 0.0)


class TestAssumptionC:
    def test_report(self):
        rep = ci.verify_assumption_C(H1, sample_budget=200000, seed=0)
        assert rep.margin > 0
        assert rep.sampled_max_roundtrip < 2.0
        # the cut point itself is at distance 1 < 2
        assert CC.norm(rep.cut_point) == pytest.approx(1.0, abs=1e-12)
        # geodesic continuation point sits at distance exactly 2
        assert rep.continuation_distance == pytest.approx(2.0, abs=1e-12)
        assert rep.continuation_point.t == pytest.approx(4 / math.pi)
        assert rep.samples == 200000 and rep.seed == 0

    def test_deterministic(self):
        a = ci.verify_assumption_C(H1, sample_budget=50000, seed=7)
        b = ci.verify_assumption_C(H1, sample_budget=50000, seed=7)
        assert a.sampled_max_roundtrip == b.sampled_max_roundtrip

    def test_json_roundtrip(self):
        import json
        rep = ci.verify_assumption_C(H1, sample_budget=10000, seed=1)
        doc = json.loads(json.dumps(rep.to_dict()))
        assert doc["margin"] == rep.margin
