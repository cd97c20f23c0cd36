import math

import numpy as np
import pytest

from services.averaging_service import (
    PulseDrive, PulseTiming, effective_g, g_profile, g_sign, log_balance
)
from services.errors import DomainError, RateOverflowError
from services.model_service import LOG_FLOAT_MAX, ModelParams, evolution_rate, log_rate_magnitude

P = ModelParams()
BISTABLE = PulseDrive(v_plus=0.54, v_minus=-0.6)


def test_default_drive():
    """Test the default drive is the bistable one with tau = 0.1 T."""
    d = PulseDrive()

    assert (d.v_plus, d.v_minus) == (0.54, -0.6)
    assert (d.tau_plus, d.tau_minus, d.period) == (1e-10, 1e-10, 1e-9)
    assert d.timing == PulseTiming()


def test_pulse_widths_must_fit_in_period():
    with pytest.raises(DomainError):
        PulseTiming(tau_plus=6e-10, tau_minus=6e-10, period=1e-9)


def test_pulse_widths_may_fill_period():
    timing = PulseTiming(tau_plus=5e-10, tau_minus=5e-10, period=1e-9)

    assert timing.log_width_ratio == 0.0


@pytest.mark.parametrize("kwargs", [{"v_plus": 0.0}, {"v_plus": -0.5}, {"v_minus": 0.3}, {"v_minus": 0.0}, {"period": -1.0}])
def test_invalid_drive_rejected(kwargs):
    with pytest.raises(DomainError):
        PulseDrive(**kwargs)


def test_with_amplitudes_keeps_timing():
    d = PulseDrive(tau_plus=2e-11, tau_minus=2e-11).with_amplitudes(0.6, -0.8)

    assert (d.v_plus, d.v_minus) == (0.6, -0.8)
    assert d.tau_plus == 2e-11


@pytest.mark.parametrize("x, expected", [(0.05, 1), (0.15, -1), (0.3, 1), (0.6, -1)])
def test_g_sign_between_fixed_points(x, expected):
    """Test the sign pattern around the three roots 0.106, 0.237, 0.371."""
    assert g_sign(P, BISTABLE, x) == expected


def test_g_sign_array_matches_scalar():
    x = np.linspace(0.01, 1.0, 50)
    signs = g_sign(P, BISTABLE, x)

    assert signs.dtype.kind == "i"
    assert list(signs) == [g_sign(P, BISTABLE, float(xi)) for xi in x]


def test_effective_g_matches_definition():
    """Test g = (f+ tau+ + f- tau-) / T where the rates are finite."""
    x = 0.3
    expected = (evolution_rate(P, x, 0.54) * 1e-10 + evolution_rate(P, x, -0.6) * 1e-10) / 1e-9

    assert effective_g(P, BISTABLE, x) == pytest.approx(expected, rel=1e-10)


def test_effective_g_sign_agrees_with_g_sign():
    x = np.linspace(0.02, 1.0, 200)
    g = effective_g(P, BISTABLE, x)
    signs = g_sign(P, BISTABLE, x)
    nonzero = g != 0

    assert np.all(np.sign(g[nonzero]) == signs[nonzero])


def test_effective_g_overflow_raises_but_sign_survives():
    """Test a drive whose on-branch rate exceeds the double range."""
    d = PulseDrive(v_plus=3.0, v_minus=-0.6)

    with pytest.raises(RateOverflowError):
        effective_g(P, d, 1.0)
    assert g_sign(P, d, 1.0) == 1


def test_effective_g_overflow_counts_the_period():
    """Test tau |f| fits in a double at V+ = 1.2667 but tau |f| / T does not."""
    d = PulseDrive(v_plus=1.2667, v_minus=-0.6)
    x = np.linspace(0.05, 1.0, 20)
    weighted = log_rate_magnitude(P, x, d.v_plus) + math.log(d.tau_plus)

    assert np.max(weighted) < LOG_FLOAT_MAX
    with pytest.raises(RateOverflowError):
        effective_g(P, d, x)
    assert np.all(np.isin(g_sign(P, d, x), (-1, 0, 1)))


def test_g_sign_monotone_in_negative_amplitude():
    """Test a stronger negative pulse never turns g from negative back to positive."""
    x = np.geomspace(1e-3, 1.0, 40)
    v_minus = np.linspace(-0.05, -1.0, 60)
    for v_plus in np.linspace(0.3, 0.8, 6):
        signs = np.array([g_sign(P, PulseDrive(v_plus=v_plus, v_minus=v), x) for v in v_minus])
        assert np.all(np.diff(signs, axis=0) <= 0)


def test_log_balance_sign_matches_g_sign():
    x = np.array([0.05, 0.15, 0.3, 0.6])

    assert list(np.sign(log_balance(P, BISTABLE, x)).astype(int)) == list(g_sign(P, BISTABLE, x))


@pytest.mark.parametrize("x", [0.0, -0.2, 1.2])
def test_state_outside_interior_rejected(x):
    with pytest.raises(DomainError):
        g_sign(P, BISTABLE, x)


def test_g_profile_matches_linear_g():
    """Test log10|g| from the log domain against the linear value."""
    x = np.array([0.05, 0.15, 0.3, 0.6])
    profile = g_profile(P, BISTABLE, x)
    linear = effective_g(P, BISTABLE, x)

    assert list(profile.sign) == list(np.sign(linear).astype(int))
    assert np.allclose(profile.log10_abs_g, np.log10(np.abs(linear)), rtol=1e-9)


def test_g_profile_finite_where_linear_overflows():
    profile = g_profile(P, PulseDrive(v_plus=3.0, v_minus=-0.6), np.array([0.5, 1.0]))

    assert np.all(np.isfinite(profile.log10_abs_g))
    assert profile.log10_abs_g[1] > math.log10(np.finfo(float).max)
