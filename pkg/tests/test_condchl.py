"""Interior-time law given the full (close, high, low) triple.

The two independent evaluation routes (Gaussian-lattice closed forms and
quadrature of the factored product density) act as each other's oracles.
The coefficient identities that make the closed route work at all -- the
aggregate slope sums and the boundary cancellation -- are asserted at
machine precision on their own.
"""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ohlcbridge.condchl import (
    MAX_WINDOW,
    barrier_series_Q,
    boundary_cancellation_check,
    conditional_curve_chl,
    conditional_curve_hl,
    conditional_density_chl,
    conditional_density_hl,
    distribution_hl,
    generator_G,
    moments_chl,
    moments_hl,
    quadrature_moments_chl,
    term_table,
    window_half_width,
)
from ohlcbridge.errors import DomainError, TruncationError
from ohlcbridge.extrema import HighLowCloseStat, density_hl, density_hlc
from ohlcbridge.params import ModelParams

STATS = [
    HighLowCloseStat(high=1.0, low=-0.8, close=0.3),
    HighLowCloseStat(high=0.5, low=-1.5, close=-1.0),
    HighLowCloseStat(high=2.0, low=-0.3, close=1.2),
]

triples = st.tuples(
    st.floats(0.3, 2.5),  # high
    st.floats(-2.5, -0.3),  # low
    st.floats(-0.9, 0.9),  # close fraction of the range
)


def stat_from(triple):
    h, low, frac = triple
    c = 0.5 * (h + low) + 0.5 * frac * (h - low)
    return HighLowCloseStat(high=h, low=low, close=c)


class TestWindow:
    def test_grows_with_scale_to_range_ratio(self):
        a = window_half_width(1.0, 1.0, 1e-12)
        b = window_half_width(0.5, 1.0, 1e-12)
        c = window_half_width(1.0, 2.0, 1e-12)
        assert b > a and c > a

    def test_at_least_one(self):
        assert window_half_width(50.0, 1.0, 1e-12) >= 1


class TestTermTable:
    def test_center_family_at_origin_matches_single_barrier(self):
        # the (j=0, k=0) high-centered family reduces to the four
        # (close, high) endpoints: a in {0, 2h}, b in {c, 2h - c}
        s = STATS[0]
        terms = term_table(0.3, s, j=0, k=0, center="high")
        assert [tm.sign for tm in terms] == [1.0, -1.0, -1.0, 1.0]
        assert {tm.a for tm in terms} == {0.0, 2.0 * s.high}
        assert {round(tm.b, 12) for tm in terms} == {
            round(s.close, 12),
            round(2.0 * s.high - s.close, 12),
        }

    @pytest.mark.parametrize("j,k", [(0, 0), (1, 0), (0, 1), (-2, 3), (3, -2), (5, 5)])
    def test_aggregate_slope_sums(self, j, k):
        # summed over the four family members, the products of barrier
        # slopes collapse to closed polynomials in (j, k) -- this is what
        # lets the full lattice series telescope
        t, p = 0.37, ModelParams(sigma=1.1)
        for s in STATS:
            h, low, c = s.high, s.low, s.close
            delta = s.range
            for center, want_a, want_b in [
                (
                    "high",
                    (32 * j * k + 8 * (j - k)) * t * (1 - t),
                    (-32 * j * k * delta - 8 * (h - c) * j + 8 * h * k) / p.sigma_sq,
                ),
                (
                    "low",
                    (32 * j * k - 8 * (j - k)) * t * (1 - t),
                    (32 * j * k * delta + 8 * (low - c) * j - 8 * low * k) / p.sigma_sq,
                ),
            ]:
                terms = term_table(t, s, p, j=j, k=k, center=center)
                got_a = sum(tm.sign * tm.coefficients.A for tm in terms)
                got_b = sum(tm.sign * tm.coefficients.B for tm in terms)
                scale_a = max(1.0, abs(want_a))
                scale_b = max(1.0, abs(want_b))
                assert abs(got_a - want_a) < 1e-10 * scale_a
                assert abs(got_b - want_b) < 1e-10 * scale_b

    @pytest.mark.parametrize("j,k", [(0, 0), (1, 0), (0, 1), (-1, 2), (2, -1), (4, 4)])
    def test_boundary_cancellation(self, j, k):
        # the terms that would make the moment formulas blow up at the
        # barriers cancel within each (j, k) block
        for s in STATS:
            residual = boundary_cancellation_check(0.41, s, j=j, k=k)
            assert abs(residual) < 1e-10

    def test_needs_interior_time(self):
        with pytest.raises(DomainError):
            term_table(0.0, STATS[0])


class TestMomentsChl:
    @pytest.mark.parametrize("stat", STATS)
    def test_m0_reproduces_terminal_density(self, stat):
        want = density_hlc(stat)
        for t in np.linspace(0.1, 0.9, 9):
            got = moments_chl(float(t), stat)
            assert got.m0 == pytest.approx(want, rel=1e-9)

    @pytest.mark.parametrize("stat", STATS)
    @pytest.mark.parametrize("t", [0.2, 0.5, 0.8])
    def test_routes_agree(self, stat, t):
        a = moments_chl(t, stat)
        b = quadrature_moments_chl(t, stat)
        scale = max(abs(a.m0), abs(a.m1), abs(a.m2))
        assert a.m0 == pytest.approx(b.m0, abs=1e-8 * scale)
        assert a.m1 == pytest.approx(b.m1, abs=1e-8 * scale)
        assert a.m2 == pytest.approx(b.m2, abs=1e-8 * scale)

    def test_endpoint_limits(self):
        s = STATS[0]
        m0 = density_hlc(s)
        start = moments_chl(0.0, s)
        assert (start.m0, start.m1, start.m2) == (m0, 0.0, 0.0)
        end = moments_chl(1.0, s)
        assert end.m1 == pytest.approx(s.close * m0)

    def test_mean_continuous_into_the_endpoints(self):
        s = STATS[0]
        near_end = moments_chl(1.0 - 1e-6, s)
        assert near_end.mean == pytest.approx(s.close, abs=1e-3)
        near_start = moments_chl(1e-6, s)
        assert near_start.mean == pytest.approx(0.0, abs=1e-3)

    def test_tiny_range_falls_back_to_quadrature(self):
        s = HighLowCloseStat(high=0.006, low=-0.006, close=0.0)
        assert window_half_width(s.range, 1.0, 1e-12) > MAX_WINDOW
        trip = moments_chl(0.5, s)
        assert trip.m0 > 0.0 and math.isfinite(trip.m1) and math.isfinite(trip.m2)
        assert abs(trip.mean) < s.high

    def test_time_validation(self):
        with pytest.raises(DomainError):
            moments_chl(1.5, STATS[0])


class TestGenerator:
    def test_forms_agree(self):
        s = STATS[0]
        for x, t in [(0.0, 0.3), (0.25, 0.6), (-0.5, 0.9)]:
            checked = generator_G(x, t, s.high, s.low, s.close, form="checked")
            prod = generator_G(x, t, s.high, s.low, s.close, form="product")
            assert checked == prod

    def test_vanishes_on_the_barriers(self):
        s = STATS[0]
        assert generator_G(s.high, 0.4, s.high, s.low, s.close) == pytest.approx(0.0, abs=1e-13)
        assert generator_G(s.low, 0.4, s.high, s.low, s.close) == pytest.approx(0.0, abs=1e-13)

    def test_positive_inside(self):
        s = STATS[0]
        assert generator_G(0.1, 0.5, s.high, s.low, s.close) > 0.0

    def test_unknown_form_rejected(self):
        with pytest.raises(ValueError):
            generator_G(0.0, 0.5, 1.0, -1.0, 0.0, form="exact")

    def test_barrier_series_validates(self):
        with pytest.raises(DomainError):
            barrier_series_Q(1.5, 0.5, 1.0, -1.0)


class TestConditionalDensityChl:
    @pytest.mark.parametrize("stat", STATS)
    @pytest.mark.parametrize("t", [0.25, 0.5, 0.75])
    def test_normalized_and_consistent_with_moments(self, stat, t):
        nodes, weights = np.polynomial.legendre.leggauss(120)
        xs = 0.5 * (stat.low + stat.high) + 0.5 * stat.range * nodes
        ws = 0.5 * stat.range * weights
        dens = np.array([conditional_density_chl(float(x), t, stat) for x in xs])
        mass = float(np.sum(ws * dens))
        mean = float(np.sum(ws * xs * dens))
        trip = moments_chl(t, stat)
        assert mass == pytest.approx(1.0, abs=1e-9)
        assert mean == pytest.approx(trip.mean, abs=1e-9 * max(1.0, abs(trip.mean)))

    def test_nonnegative_across_the_support(self):
        s = STATS[1]
        for x in np.linspace(s.low, s.high, 33):
            assert conditional_density_chl(float(x), 0.6, s) >= 0.0

    def test_narrow_range_raises(self):
        s = HighLowCloseStat(high=0.006, low=-0.006, close=0.0)
        with pytest.raises(TruncationError):
            conditional_density_chl(0.0, 0.5, s)


class TestConditionalCurveChl:
    def test_endpoints_pinned(self):
        s = STATS[0]
        curve = conditional_curve_chl(s)
        assert curve.mean[0] == 0.0 and curve.variance[0] == 0.0
        assert curve.mean[-1] == s.close and curve.variance[-1] == 0.0
        assert np.all(curve.variance >= 0.0)
        assert np.all(curve.mean <= s.high) and np.all(curve.mean >= s.low)

    def test_tighter_than_plain_bridge(self):
        s = STATS[0]
        grid = np.linspace(0.0, 1.0, 201)
        curve = conditional_curve_chl(s, grid=grid)
        bridge_avg = 1.0 / 6.0  # sigma^2 t(1-t) averaged, sigma = 1
        assert curve.time_average_variance() < bridge_avg

    def test_degenerate_stats_evaluate(self):
        for h, low, c in [(0.8, -0.5, 0.8), (0.8, -0.5, -0.5), (1.0, -1.0, 0.0)]:
            curve = conditional_curve_chl(HighLowCloseStat(high=h, low=low, close=c))
            assert np.all(np.isfinite(curve.mean))
            assert np.all(np.isfinite(curve.variance))

    @settings(max_examples=25, deadline=None)
    @given(triple=triples)
    def test_reflection_symmetry(self, triple):
        s = stat_from(triple)
        assume(s.range > 0.25)
        mirrored = HighLowCloseStat(high=-s.low, low=-s.high, close=-s.close)
        grid = np.array([0.0, 0.21, 0.5, 0.83, 1.0])
        a = conditional_curve_chl(s, grid=grid)
        b = conditional_curve_chl(mirrored, grid=grid)
        np.testing.assert_allclose(a.mean, -b.mean, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(a.variance, b.variance, rtol=1e-9, atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(triple=triples, lam=st.floats(0.25, 4.0))
    def test_scale_equivariance(self, triple, lam):
        s = stat_from(triple)
        assume(s.range > 0.25)
        scaled = HighLowCloseStat(high=lam * s.high, low=lam * s.low, close=lam * s.close)
        grid = np.array([0.3, 0.7])
        a = conditional_curve_chl(s, params=ModelParams(sigma=1.0), grid=grid)
        b = conditional_curve_chl(scaled, params=ModelParams(sigma=lam), grid=grid)
        np.testing.assert_allclose(b.mean, lam * a.mean, rtol=1e-9)
        np.testing.assert_allclose(b.variance, lam * lam * a.variance, rtol=1e-9)


class TestHighLowOnly:
    def test_distribution_vanishes_on_barriers(self):
        h, low = 1.0, -0.8
        edge = distribution_hl(np.array([h, low]), 0.4, h, low)
        assert np.all(np.abs(edge) < 1e-12)

    @pytest.mark.parametrize("t", [0.3, 0.6])
    def test_density_normalized_and_matches_moments(self, t):
        h, low = 1.0, -0.8
        nodes, weights = np.polynomial.legendre.leggauss(120)
        xs = 0.5 * (low + h) + 0.5 * (h - low) * nodes
        ws = 0.5 * (h - low) * weights
        dens = conditional_density_hl(xs, t, h, low)
        mass = float(np.sum(ws * dens))
        mean = float(np.sum(ws * xs * dens))
        trip = moments_hl(t, h, low)
        assert mass == pytest.approx(1.0, abs=1e-9)
        assert mean == pytest.approx(trip.mean, abs=1e-9)

    def test_m0_reproduces_terminal_hl_density(self):
        h, low = 1.0, -0.8
        want = density_hl(h, low)
        for t in [0.2, 0.5, 0.8]:
            assert moments_hl(t, h, low).m0 == pytest.approx(want, rel=1e-8)

    def test_close_not_pinned_at_terminal_time(self):
        with pytest.raises(DomainError):
            moments_hl(1.0, 1.0, -0.8)

    def test_curve_starts_pinned_ends_free(self):
        curve = conditional_curve_hl(1.0, -0.8, grid=np.linspace(0.0, 0.98, 25))
        assert curve.mean[0] == 0.0 and curve.variance[0] == 0.0
        assert np.all(curve.variance[1:] > 0.0)
        # terminal variance approaches the close-given-extremes spread,
        # not zero: the close is unknown here
        assert curve.variance[-1] > 0.05
