"""Parameter containers and the moment/curve result types."""

import math

import numpy as np
import pytest

from ohlcbridge.curves import ConditionalCurve, MomentTriple, floor_variance
from ohlcbridge.errors import DomainError, NumericError, OhlcBridgeError
from ohlcbridge.params import ModelParams, QuadratureControl, SeriesControl


class TestModelParams:
    def test_interior_scale(self):
        p = ModelParams(sigma=2.0)
        assert p.sigma_sq == 4.0
        assert p.sigma_t(0.5) == pytest.approx(2.0 * 0.5)
        assert p.sigma_t_sq(0.25) == pytest.approx(4.0 * 0.25 * 0.75)
        assert p.sigma_t(0.0) == 0.0
        assert p.sigma_t(1.0) == 0.0

    def test_from_sigma_sq_round_trip(self):
        p = ModelParams.from_sigma_sq(2.25)
        assert p.sigma == 1.5

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
    def test_rejects_bad_sigma(self, bad):
        with pytest.raises(DomainError):
            ModelParams(sigma=bad)
        with pytest.raises(DomainError):
            ModelParams.from_sigma_sq(bad)

    def test_frozen(self):
        p = ModelParams()
        with pytest.raises(AttributeError):
            p.sigma = 3.0


class TestControls:
    def test_defaults_valid(self):
        SeriesControl()
        QuadratureControl()

    def test_rejects_nonsense(self):
        with pytest.raises(DomainError):
            SeriesControl(max_terms=0)
        with pytest.raises(DomainError):
            SeriesControl(tail_tolerance=0.0)
        with pytest.raises(DomainError):
            QuadratureControl(panels=0)
        with pytest.raises(DomainError):
            QuadratureControl(nodes=1)


class TestFloorVariance:
    def test_passes_positive_through(self):
        assert floor_variance(0.3) == 0.3

    def test_clamps_tiny_negative(self):
        assert floor_variance(-1e-14) == 0.0

    def test_scale_widens_the_band(self):
        # -1e-9 is fatal at unit scale but tolerable at scale 1e4
        with pytest.raises(NumericError):
            floor_variance(-1e-9)
        assert floor_variance(-1e-9, scale=1e4) == 0.0

    def test_array_input(self):
        out = floor_variance(np.array([0.5, -1e-15]))
        assert out[0] == 0.5 and out[1] == 0.0


class TestMomentTriple:
    def test_mean_and_variance(self):
        # moments of a unit Gaussian scaled by an arbitrary M0
        t = MomentTriple(m0=2.0, m1=2.0 * 0.3, m2=2.0 * (1.0 + 0.09))
        assert t.mean == pytest.approx(0.3)
        assert t.variance == pytest.approx(1.0)

    def test_variance_cancellation_clamped(self):
        t = MomentTriple(m0=1.0, m1=1.0, m2=1.0 - 1e-14)
        assert t.variance == 0.0


class TestConditionalCurve:
    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ConditionalCurve(times=np.zeros(3), mean=np.zeros(3), variance=np.zeros(4))

    def test_time_average_of_bridge_variance_is_one_sixth(self):
        t = np.linspace(0.0, 1.0, 2001)
        curve = ConditionalCurve(times=t, mean=np.zeros_like(t), variance=t * (1.0 - t))
        assert curve.time_average_variance() == pytest.approx(1.0 / 6.0, rel=1e-6)

    def test_time_average_needs_increasing_grid(self):
        z = np.zeros(2)
        with pytest.raises(ValueError):
            ConditionalCurve(times=z, mean=z, variance=z).time_average_variance()


def test_all_errors_share_a_base():
    for exc in (DomainError, NumericError):
        assert issubclass(exc, OhlcBridgeError)
    assert issubclass(DomainError, ValueError)
