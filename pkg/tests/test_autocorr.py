import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from plctdr.autocorr import (
    AcfCurve,
    acf,
    acf_css,
    acf_curve,
    acf_hsofdm,
    acf_hsofdm_as_printed,
    acf_numeric,
    acf_uwb1,
    acf_uwb2,
    fresnel,
    oracle_report,
)
from plctdr.errors import AcfDomainError
from plctdr.pulses import PulseSpec, duration_for_bandwidth, eval_pulse, sample_pulse, transmit_signal
from plctdr.signals import SampledSignal

# Frozen reference values (hand-derived closed forms).
UWB1_R0_SIGMA1 = 0.14104739588693907  # 1 / (4 sqrt(pi))
UWB2_R0_SIGMA1 = 0.21157109383040862  # 12 / (32 sqrt(pi))
UWB1_SIDELOBE_RATIO = 0.44626032029685964  # 2 exp(-3/2)


def _quad_acf(spec, tau):
    """Direct quadrature of p(t) p(t - tau) over the overlap."""
    a = abs(tau)
    lo, hi = -spec.T / 2 + a, spec.T / 2
    f = lambda t: eval_pulse(spec, t) * eval_pulse(spec, t - a)
    val, _ = integrate.quad(f, lo, hi, limit=2000, epsabs=0, epsrel=1e-12)
    return val


def test_uwb1_frozen_values():
    assert acf_uwb1(1.0, 0.0) == pytest.approx(UWB1_R0_SIGMA1, rel=1e-12)
    for sigma in (1e-6, 1.0, 3.0):
        assert abs(acf_uwb1(sigma, math.sqrt(2) * sigma)) < 1e-12 * acf_uwb1(sigma, 0.0)
    ratio = abs(acf_uwb1(1.0, math.sqrt(6))) / acf_uwb1(1.0, 0.0)
    assert ratio == pytest.approx(UWB1_SIDELOBE_RATIO, rel=1e-12)
    assert 20 * math.log10(ratio) == pytest.approx(-7.01, abs=0.005)


def test_uwb2_frozen_values():
    assert acf_uwb2(1.0, 0.0) == pytest.approx(UWB2_R0_SIGMA1, rel=1e-12)
    for sigma in (1e-6, 1.0, 2.5):
        z = sigma * math.sqrt(6 - 2 * math.sqrt(6))
        assert abs(acf_uwb2(sigma, z)) < 1e-12 * acf_uwb2(sigma, 0.0)
    tau_ext = math.sqrt((20 - math.sqrt(160)) / 2)
    ratio = abs(acf_uwb2(1.0, tau_ext)) / acf_uwb2(1.0, 0.0)
    assert 20 * math.log10(ratio) == pytest.approx(-4.18, abs=0.005)
    # derivative vanishes at the extremum
    h = 1e-6
    assert abs(acf_uwb2(1.0, tau_ext + h) - acf_uwb2(1.0, tau_ext - h)) < 1e-9


@pytest.mark.parametrize("fn", [acf_uwb1, acf_uwb2])
def test_uwb_domain(fn):
    with pytest.raises(AcfDomainError):
        fn(1.0, 7.0)
    with pytest.raises(AcfDomainError):
        fn(1.0, np.array([0.0, -8.0]))


def test_uwb_closed_forms_match_untruncated_quadrature():
    for fn, d in ((acf_uwb1, 1), (acf_uwb2, 2)):
        sigma = 0.7
        g = lambda t: np.exp(-t * t / (2 * sigma**2)) / (math.sqrt(2 * math.pi) * sigma)
        if d == 1:
            p = lambda t: -t / sigma**2 * g(t)
        else:
            p = lambda t: (t * t - sigma**2) / sigma**4 * g(t)
        for tau in (0.0, 0.3, 1.1, 2.9):
            val, _ = integrate.quad(lambda t: p(t) * p(t - tau), -np.inf, np.inf, epsabs=1e-14)
            assert fn(sigma, tau) == pytest.approx(val, rel=1e-9, abs=1e-13)


def test_fresnel_limits_and_parity():
    assert fresnel(0.0) == (0.0, 0.0)
    c, s = fresnel(1e8)
    assert c == pytest.approx(0.5, abs=1e-8) and s == pytest.approx(0.5, abs=1e-8)
    x = np.linspace(-4, 4, 17)
    c, s = fresnel(x)
    np.testing.assert_allclose(c, -c[::-1], atol=1e-15)
    np.testing.assert_allclose(s, -s[::-1], atol=1e-15)


@pytest.mark.parametrize("x", [0.3, 1.0, 2.7])
def test_fresnel_against_quadrature(x):
    c, s = fresnel(x)
    cq, _ = integrate.quad(lambda t: math.cos(math.pi * t * t / 2), 0, x, epsabs=1e-14)
    sq, _ = integrate.quad(lambda t: math.sin(math.pi * t * t / 2), 0, x, epsabs=1e-14)
    assert abs(c - cq) < 1e-10 and abs(s - sq) < 1e-10


def test_css_zero_lag_is_energy():
    for B, T in ((1e3, 0.05), (1e6, 512e-6), (2.0, 3.0)):
        spec = PulseSpec.css(B, T)
        energy, _ = integrate.quad(lambda t: math.cos(math.pi * spec.mu * t * t) ** 2, -T / 2, T / 2,
                                   limit=5000, epsabs=0, epsrel=1e-12)
        assert acf_css(spec.mu, T, 0.0) == pytest.approx(energy, rel=1e-9)


@pytest.mark.parametrize("frac", [0.013, 0.1, 0.37, 0.5, 0.81, 0.99])
def test_css_matches_quadrature(frac):
    spec = PulseSpec.css(20.0, 1.0)
    tau = frac * spec.T
    assert acf_css(spec.mu, spec.T, tau) == pytest.approx(_quad_acf(spec, tau), abs=1e-10)


def test_css_down_chirp_and_symmetry():
    up = PulseSpec.css(50.0, 1.0)
    down = PulseSpec.css(50.0, 1.0, up=False)
    tau = np.linspace(-0.99, 0.99, 199)
    np.testing.assert_allclose(acf(up, tau), acf(down, tau), rtol=0, atol=1e-14)
    np.testing.assert_array_equal(acf(up, tau), acf(up, -tau))


def test_css_degenerate_and_domain():
    with pytest.raises(AcfDomainError):
        acf_css(0.0, 1.0, 0.1)
    with pytest.raises(AcfDomainError):
        acf_css(1.0, 1.0, 1.0)


def test_hsofdm_zero_lag_is_quadrature_energy():
    spec = PulseSpec.hs_ofdm(1.0, n=512)
    f = lambda t: eval_pulse(spec, t) ** 2
    energy, _ = integrate.quad(f, -0.5, 0.5, limit=20000, epsabs=0, epsrel=1e-12)
    assert acf(spec, 0.0) == pytest.approx(energy, rel=1e-3)
    assert acf(spec, 0.0) == pytest.approx(energy, rel=1e-9)


@pytest.mark.parametrize("n, frac", [(2, 0.5), (3, 0.25), (8, 0.71), (33, 0.05)])
def test_hsofdm_matches_quadrature(n, frac):
    spec = PulseSpec.hs_ofdm(1.0, n=n, seed=n)
    assert acf(spec, frac) == pytest.approx(_quad_acf(spec, frac), rel=1e-9, abs=1e-9)


def test_hsofdm_two_carriers_half_lag_against_discrete_correlation():
    spec = PulseSpec.hs_ofdm(1.0, symbols=[1, 1])
    rate = 20000.0
    sig = sample_pulse(spec, rate)
    curve = acf_numeric(sig)
    k = int(np.argmin(np.abs(curve.tau - 0.5)))
    assert curve.values[k] == pytest.approx(acf_hsofdm(spec.symbols, 1.0, curve.tau[k]), rel=1e-3)


def test_hsofdm_vanishes_at_support_edge():
    spec = PulseSpec.hs_ofdm(1.0, n=16, seed=3)
    edge = acf(spec, np.array([1 - 1e-9, -(1 - 1e-9)]))
    assert np.all(np.abs(edge) < 1e-6 * acf(spec, 0.0))
    with pytest.raises(AcfDomainError):
        acf(spec, 1.0)


def test_hsofdm_delta_f_must_match_duration():
    with pytest.raises(ValueError):
        acf_hsofdm((1.0, -1.0), 1.0, 0.1, delta_f=2.0)


def test_printed_hsofdm_form_disagrees_with_quadrature():
    # Kept only as an audit of the transcribed formula.
    spec = PulseSpec.hs_ofdm(1.0, symbols=[1, 1])
    printed = acf_hsofdm_as_printed(spec.symbols, 1.0, 0.5)
    assert abs(printed - _quad_acf(spec, 0.5)) > 1e-2
    assert acf(spec, 0.5) == pytest.approx(_quad_acf(spec, 0.5), rel=1e-12)


def test_rectangle_gives_triangle():
    rate, m = 1000.0, 500
    curve = acf_numeric(SampledSignal(np.ones(m), rate))
    assert curve.peak == pytest.approx(m / rate)
    expected = (m - np.abs(np.round(curve.tau * rate))) / rate
    np.testing.assert_allclose(curve.values, expected, atol=1e-12)


def test_numeric_acf_carries_spec():
    spec = duration_for_bandwidth("css", 1e6, n=32)
    curve = acf_numeric(transmit_signal(spec))
    assert curve.spec == spec and curve.family is spec.family


@pytest.mark.parametrize("family, limit", [("uwb1", 1e-6), ("uwb2", 1e-6), ("hs-ofdm", 1e-3), ("css", 1e-3)])
def test_oracle_equivalence(family, limit):
    spec = duration_for_bandwidth(family, 1e6)
    rep = oracle_report(spec)
    assert rep["grid_points"] >= 10_000
    assert rep["max_rel_err"] <= limit


def test_uwb_truncation_error_is_visible():
    rep = oracle_report(PulseSpec.uwb1(1e-6), truncated=True)
    assert rep["max_rel_err"] > 1e-4


def test_sampled_uwb1_at_100mhz():
    spec = PulseSpec.uwb1(1e-6)
    rep = oracle_report(spec, 100e6)
    assert rep["max_rel_err"] <= 1e-6


def test_css_bt1024_oracle():
    spec = PulseSpec.css(1024.0, 1.0)
    assert oracle_report(spec)["max_rel_err"] <= 1e-3


def test_numeric_acf_spectrum_is_nonnegative(family_spec):
    curve = acf_numeric(transmit_signal(family_spec))
    spec = np.fft.fft(np.fft.ifftshift(curve.values))
    peak = curve.peak
    assert np.max(np.abs(spec.imag)) <= 1e-6 * peak * curve.values.size
    assert np.min(spec.real) >= -1e-6 * peak * curve.values.size


def test_curve_validation_and_csv(tmp_path):
    with pytest.raises(ValueError):
        AcfCurve([0.0, 1.0, 2.0], [1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        AcfCurve([-1.0, 1.0, 0.0], [0.0, 1.0, 0.0])
    curve = acf_curve(PulseSpec.uwb2(1e-6), 101)
    path = tmp_path / "acf.csv"
    curve.to_csv(path)
    text = path.read_text().splitlines()
    assert any(line.startswith("tau_s,value,value_normalized") for line in text)
    assert curve.normalize().peak == pytest.approx(1.0)


def _random_spec(draw_family, x, seed):
    if draw_family == "uwb1":
        return PulseSpec.uwb1(x)
    if draw_family == "uwb2":
        return PulseSpec.uwb2(x)
    if draw_family == "css":
        return PulseSpec.css(1.0 / x, 40 * x)
    return PulseSpec.hs_ofdm(40 * x, n=40, seed=seed)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["uwb1", "uwb2", "css", "hs-ofdm"]), st.floats(1e-8, 1e-2), st.integers(0, 10_000))
def test_symmetry_and_peak_dominance(family, x, seed):
    spec = _random_spec(family, x, seed)
    tau = np.linspace(0, spec.T, 10_002)[1:-1]
    pos = np.asarray(acf(spec, tau))
    neg = np.asarray(acf(spec, -tau))
    r0 = acf(spec, 0.0)
    np.testing.assert_allclose(pos, neg, rtol=1e-9, atol=1e-12 * r0)
    assert np.all(np.abs(pos) <= r0 * (1 + 1e-12))
