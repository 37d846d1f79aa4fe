import math

import numpy as np
import pytest

import carnotiso as ci
from carnotiso.groups import GroupError, standard_symplectic
from carnotiso.isodiametric import BumpParams, CertificateError, max_certified_rho
from carnotiso.measures import BoundingBox
from carnotiso.metrics import MetricError

H1 = ci.heisenberg(1)
HT = ci.h_type(standard_symplectic())

DINF = ci.DinfMetric(H1)
GAUGE = ci.GaugeMetric(HT)
CC = ci.CCMetric(H1)

SQRT2 = math.sqrt(2.0)


def half_ball(metric):
    """Unit ball cut to t >= 0; keeps the horizontal diameter pair."""
    base = ci.ball_set(metric)
    box = base.bounding_box
    cut = BoundingBox(box.lo1, box.hi1, np.zeros_like(box.lo2), box.hi2)

    def member(l1, l2):
        return base.membership(l1, l2) & np.all(l2 >= 0, axis=-1)

    return ci.SampledSet(member, cut, metric.spec, diameter_hint=(2.0, "exact"))


class TestRatio:
    @pytest.mark.parametrize("metric", [DINF, GAUGE, CC], ids=["dinf", "gauge", "cc"])
    def test_ball_scores_one(self, metric):
        res = ci.isodiametric_ratio(ci.ball_set(metric), metric, 300000, seed=0)
        assert abs(res.ratio.value - 1.0) < 3.5 * res.ratio.error
        assert res.diameter_used == 2.0 and res.diameter_kind == "exact"

    def test_dilated_ball_scores_one(self):
        res = ci.isodiametric_ratio(ci.ball_set(DINF, radius=1.5), DINF, 300000, seed=1)
        assert abs(res.ratio.value - 1.0) < 3.5 * res.ratio.error

    def test_translated_ball_scores_one(self):
        center = ci.point([0.4, -0.2], [0.3])
        res = ci.isodiametric_ratio(ci.ball_set(DINF, center=center), DINF,
                                    300000, seed=2)
        assert abs(res.ratio.value - 1.0) < 3.5 * res.ratio.error

    def test_half_ball_scores_half(self):
        res = ci.isodiametric_ratio(half_ball(DINF), DINF, 300000, seed=3)
        assert abs(res.ratio.value - 0.5) < 3.5 * res.ratio.error

    def test_half_ball_diameter_is_two(self):
        # the horizontal pair (+-1, 0, 0) survives the cut
        rng = np.random.default_rng(4)
        l1 = rng.uniform(-1, 1, (3000, 2))
        l2 = rng.uniform(0, 1, (3000, 1))
        keep = DINF.norm_arrays(l1, l2) <= 1
        l1 = np.vstack([l1[keep], [[1, 0]], [[-1, 0]]])
        l2 = np.vstack([l2[keep], [[0]], [[0]]])
        d = ci.set_diameter((l1, l2), DINF)
        assert d == pytest.approx(2.0, abs=1e-12)

    def test_missing_diameter_hint(self):
        s = ci.ball_set(DINF)
        s.diameter_hint = None
        with pytest.raises(ValueError):
            ci.isodiametric_ratio(s, DINF, 1000, seed=0)


class TestApexReach:
    def test_dinf(self):
        rep = ci.apex_reach(DINF, budget=200000, seed=0)
        assert rep.analytic_bound == pytest.approx(SQRT2)
        assert rep.reach == pytest.approx(SQRT2)
        assert rep.sampled_sup <= SQRT2 + 1e-9
        assert rep.sampled_sup >= SQRT2 - 1e-2

    def test_gauge(self):
        rep = ci.apex_reach(GAUGE, budget=200000, seed=0)
        assert rep.analytic_bound == pytest.approx(SQRT2)
        assert rep.sampled_sup <= SQRT2 + 1e-9

    def test_cc(self):
        rep = ci.apex_reach(CC, budget=200000, seed=0)
        assert rep.analytic_bound is None
        assert 1.3 < rep.sampled_sup < SQRT2
        assert rep.reach == pytest.approx(rep.sampled_sup + 1e-3)

    def test_report_dict(self):
        rep = ci.apex_reach(DINF, budget=10000, seed=1)
        doc = rep.to_dict()
        assert doc["certified_reach"] == rep.reach
        assert doc["samples"] == 10000


class TestBump:
    def test_certified_rho(self):
        assert max_certified_rho(DINF, SQRT2) == pytest.approx(2 - SQRT2)
        assert max_certified_rho(DINF, SQRT2, radius=2.0) == pytest.approx(2 * (2 - SQRT2))

    def test_zero_rho_is_exact_one(self):
        apex = ci.point([0, 0], [1.0])
        res = ci.bump_ratio(BumpParams(apex=apex, rho=0.0), DINF, 1000, seed=0,
                            reach=SQRT2)
        assert res.ratio.value == 1.0 and res.ratio.error == 0.0
        assert res.ratio.method == "closed_form"

    def test_oversized_rho_rejected(self):
        apex = ci.point([0, 0], [1.0])
        with pytest.raises(CertificateError):
            ci.bump_ratio(BumpParams(apex=apex, rho=0.7), DINF, 1000, seed=0,
                          reach=SQRT2)
        with pytest.raises(CertificateError):
            ci.bump_ratio(BumpParams(apex=apex, rho=-0.1), DINF, 1000, seed=0,
                          reach=SQRT2)

    def test_off_center_base_rejected(self):
        apex = ci.point([0, 0], [1.0])
        with pytest.raises(GroupError):
            ci.bump_ratio(BumpParams(apex=apex, rho=0.1,
                                     center=ci.point([1, 0], [0])),
                          DINF, 1000, seed=0, reach=SQRT2)

    def test_dinf_bump_beats_ball(self):
        apex = ci.point([0, 0], [1.0])
        rho = 2 - SQRT2
        res = ci.bump_ratio(BumpParams(apex=apex, rho=rho), DINF, 400000, seed=5,
                            reach=SQRT2)
        assert res.ratio.value > 1.0 + 3.0 * res.ratio.error
        assert res.ratio.value == pytest.approx(1.0588, abs=5e-3)

    def test_bump_diameter_certificate(self):
        # sampled points of ball-plus-bump stay within diameter 2
        apex = ci.point([0, 0], [1.0])
        rho = 2 - SQRT2
        rng = np.random.default_rng(6)
        ball = ci.ball_set(DINF)
        bump = ci.ball_set(DINF, center=apex, radius=rho)
        pts1, pts2 = [], []
        for s in (ball, bump):
            lo, hi = s.bounding_box.lo, s.bounding_box.hi
            draw = rng.uniform(lo, hi, size=(4000, len(lo)))
            keep = s.membership(draw[:, :2], draw[:, 2:])
            pts1.append(draw[keep, :2])
            pts2.append(draw[keep, 2:])
        d = ci.set_diameter((np.vstack(pts1), np.vstack(pts2)), DINF)
        assert d <= 2.0 + 1e-9

    def test_maximize_bump(self):
        res = ci.maximize_bump(DINF, budget=200000, seed=0)
        assert res.ratio.value > 1.0 + 3.0 * res.ratio.error
        search = res.set_descriptor["search"]
        assert search["certified_rho_max"] == pytest.approx(2 - SQRT2)
        assert max(search["grid"]) <= search["certified_rho_max"] + 1e-12


class TestAnalyticBounds:
    def test_cdinf(self):
        assert ci.cdinf_upper_bound(1) == 2.0
        with pytest.raises(GroupError):
            ci.cdinf_upper_bound(0)

    def test_cdc_frozen_values(self):
        assert ci.cdc_upper_bound(1) == pytest.approx(1.2108358735762523, abs=1e-10)
        assert ci.cdc_upper_bound(8) == pytest.approx(1.9732925687335445, abs=1e-9)
        assert ci.cdc_upper_bound(9) == pytest.approx(2.0678860271939445, abs=1e-9)

    def test_cdc_paper_window(self):
        assert 1.0 < ci.cdc_upper_bound(1) <= 1.22
        assert ci.cdc_upper_bound(8) <= 1.98
        assert ci.cdc_upper_bound(9) > 2.0

    def test_cdc_monotone(self):
        vals = [ci.cdc_upper_bound(n) for n in range(1, 10)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_cdc_identity_with_volume(self):
        # (4 alpha_2n / pi) / vol, checked against the quadrature value
        for n in (1, 3):
            vol = ci.cc_unit_ball_volume(n).value
            expect = 4 * ci.alpha(2 * n) / math.pi / vol
            assert ci.cdc_upper_bound(n) == pytest.approx(expect, rel=1e-12)


class TestSigma:
    def test_interval(self):
        sb = ci.sigma_bounds(1.0, 2.0)
        assert sb.sigma_interval == (0.5, 1.0)

    def test_point_interval(self):
        assert ci.sigma_bounds(1.0, 1.0).sigma_interval == (1.0, 1.0)

    def test_inconsistent(self):
        with pytest.raises(ValueError):
            ci.sigma_bounds(2.5, 2.0)
        with pytest.raises(ValueError):
            ci.sigma_bounds(0.5, 2.0)

    def test_dinf_interval(self):
        sb = ci.sigma_bounds_for(DINF, budget=200000, seed=0)
        lo, hi = sb.sigma_interval
        assert lo == 0.5
        assert hi < 1.0  # the bump pushes C strictly above 1

    def test_cc_interval(self):
        sb = ci.sigma_bounds_for(CC, budget=200000, seed=0)
        lo, hi = sb.sigma_interval
        assert lo == pytest.approx(1 / 1.2108358735762523, abs=1e-9)
        assert lo > 0.5
        assert hi <= 1.0

    def test_gauge_unsupported(self):
        with pytest.raises(MetricError):
            ci.sigma_bounds_for(GAUGE, budget=1000, seed=0)

    def test_dict(self):
        doc = ci.sigma_bounds(1.1, 1.5).to_dict()
        assert doc["sigma_interval"] == [1 / 1.5, 1 / 1.1]
