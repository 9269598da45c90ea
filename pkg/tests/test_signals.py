import numpy as np
import pytest

from singlerange.signals import (
    IntegralTrace,
    SampledSignal,
    SinusoidInput,
    integrate,
    literature_profile,
)


def reference_sinusoid():
    # harmonics (1,2,3), omega = 1e-2*pi, 0.5 m/s max speed per axis
    return SinusoidInput.from_max_speed(0.5, np.array([1, 2, 3]),
                                        0.01 * np.pi)


class TestSinusoidInput:
    def test_value_at_zero_is_max_speed(self):
        sig = reference_sinusoid()
        assert np.allclose(sig(0.0), [0.5, 0.5, 0.5])

    def test_zero_amplitudes(self):
        sig = SinusoidInput(np.zeros(3), np.array([1, 2, 3]), 0.5)
        t = np.linspace(0.0, 100.0, 50)
        assert np.all(sig(t) == 0.0)

    def test_quarter_period_zero_crossing(self):
        # first axis: cos(1 * 1e-2*pi * 50) = cos(pi/2) = 0
        sig = reference_sinusoid()
        assert abs(sig(50.0)[0]) < 1e-12

    def test_max_speed_property(self):
        sig = reference_sinusoid()
        assert np.allclose(sig.max_speed, 0.5)
        t = np.linspace(0.0, sig.base_period, 2000)
        assert np.abs(sig(t)).max() <= 0.5 + 1e-12

    def test_base_period_relation(self):
        sig = SinusoidInput.from_base_period(np.ones(3), np.array([1, 2, 3]),
                                             n0=20000, ts=0.01)
        assert np.isclose(sig.base_period, 200.0)
        assert np.isclose(sig.omega, 0.01 * np.pi)

    def test_rejects_repeated_harmonics(self):
        with pytest.raises(ValueError, match="distinct"):
            SinusoidInput(np.ones(3), np.array([1, 2, 2]), 1.0)

    def test_rejects_nonpositive_harmonics(self):
        with pytest.raises(ValueError, match="positive"):
            SinusoidInput(np.ones(3), np.array([0, 1, 2]), 1.0)


class TestLiteratureProfile:
    def test_at_zero(self):
        assert np.allclose(literature_profile(0.0), [2.0, 0.0, 1.0])

    def test_at_pi(self):
        # (2cos(pi), -4sin(2pi), cos(pi/2)) = (-2, 0, 0)
        assert np.allclose(literature_profile(np.pi), [-2.0, 0.0, 0.0],
                           atol=1e-12)

    def test_at_two_pi(self):
        # (2cos(2pi), -4sin(4pi), cos(pi)) = (2, 0, -1)
        assert np.allclose(literature_profile(2 * np.pi), [2.0, 0.0, -1.0],
                           atol=1e-12)


class TestIntegrate:
    def test_constant_input(self):
        sig = SampledSignal(1.0, np.tile([1.0, 0.0, 0.0], (3, 1)))
        trace = integrate(sig)
        expected = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]], dtype=float)
        assert np.array_equal(trace.values, expected)

    def test_zero_input(self):
        sig = SampledSignal(0.5, np.zeros((10, 3)))
        assert np.all(integrate(sig).values == 0.0)

    def test_cosine_quarter_period(self):
        # integral of cos over [0, pi/2] is sin(pi/2) = 1
        ts = 1e-3
        steps = int(round((np.pi / 2) / ts))
        t = ts * np.arange(steps + 1)
        sig = SampledSignal(ts, np.stack(
            [np.cos(t), np.zeros_like(t), np.zeros_like(t)], axis=-1))
        trace = integrate(sig)
        assert abs(trace.values[-1, 0] - 1.0) < 1e-3

    def test_linearity(self):
        rng = np.random.default_rng(7)
        ts = 0.05
        u = rng.normal(size=(200, 3))
        w = rng.normal(size=(200, 3))
        alpha, beta = 1.7, -0.3
        combined = integrate(SampledSignal(ts, alpha * u + beta * w)).values
        separate = (alpha * integrate(SampledSignal(ts, u)).values
                    + beta * integrate(SampledSignal(ts, w)).values)
        scale = np.abs(separate).max()
        assert np.abs(combined - separate).max() <= 1e-12 * scale

    def test_rejects_nonzero_start(self):
        with pytest.raises(ValueError, match="zero"):
            IntegralTrace(1.0, np.ones((4, 3)))

    def test_truncated(self):
        sig = SampledSignal(0.5, np.ones((11, 3)))
        trace = integrate(sig)
        short = trace.truncated(2.0)
        assert len(short.values) == 5
        assert np.array_equal(short.values, trace.values[:5])


def test_diagonal_normal_matrix_over_full_window():
    # over a whole base period the integral columns are orthogonal, so
    # H^T H is diagonal to within discretization error
    ts = 0.01
    sig = SinusoidInput.from_max_speed(0.5, np.array([1, 2, 3]), 0.01 * np.pi)
    n0 = int(round(sig.base_period / ts))
    sampled = SampledSignal.from_function(sig, ts, n0)
    H = integrate(sampled).values
    hth = H.T @ H
    diag = np.diag(hth)
    off = np.abs(hth - np.diag(diag)).max()
    assert off <= 1e-2 * diag.min()
