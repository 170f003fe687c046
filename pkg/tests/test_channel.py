import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plctdr.channel import (
    OPEN,
    Branch,
    CableParams,
    Fault,
    FrequencyGrid,
    Load,
    NetworkTopology,
    Section,
    export_gamma_csv,
    gamma_in,
    impulse_response,
    input_impedance,
    line_input_impedance,
    load_topology,
    parse_topology,
    reflection_coefficient,
    secondary_params,
)
from plctdr.errors import AliasingError, ChannelError
from plctdr.io import read_csv

V = 1.5e8
Z0 = 50.0
CABLE = CableParams.lossless(Z0, V, "lv")


def bounce_series(z0, zp, zl, n):
    """Echo amplitudes of a lossless line: source spike then the geometric train."""
    rho = (z0 - zp) / (z0 + zp)
    gl = 1.0 if math.isinf(abs(zl)) else (zl - z0) / (zl + z0)
    return [rho] + [(1 - rho**2) * (-rho) ** (k - 1) * gl**k for k in range(1, n)]


def single_line(length, zl, zp=None, cable=CABLE):
    term = Load.open() if math.isinf(abs(zl)) else Load.constant(zl)
    return NetworkTopology((Section(length, cable),), termination=term, z_plc=zp)


def test_lossless_secondary_params():
    f = np.array([0.0, 1e3, 1e6, 3e7])
    z0, gamma = secondary_params(CABLE, f)
    np.testing.assert_allclose(z0, Z0, rtol=1e-12)
    np.testing.assert_allclose(gamma, 1j * 2 * np.pi * f / V, rtol=1e-12)
    assert gamma[0] == 0
    with pytest.raises(ChannelError):
        secondary_params(CABLE, -1.0)


def test_lossy_line_principal_branch():
    cab = CableParams(R=1e-3, L=3e-7, G=1e-9, C=1e-10)
    f = np.logspace(0, 8, 50)
    z0, gamma = secondary_params(cab, f)
    assert np.all(gamma.real >= 0) and np.all(gamma.imag > 0) and np.all(z0.real > 0)
    rdc = CableParams(R=1e-3, L=3e-7, G=0.0, C=1e-10)
    z0dc, gdc = secondary_params(rdc, 0.0)
    assert math.isinf(abs(z0dc)) and gdc == 0


def test_phase_velocity_of_lossless_cable():
    assert CABLE.nominal_velocity == pytest.approx(V, rel=1e-12)
    np.testing.assert_allclose(CABLE.phase_velocity(np.array([1e3, 1e7])), V, rtol=1e-12)


def test_frequency_dependent_parameters():
    cab = CableParams(R=lambda f: 1e-3 * np.sqrt(f + 1), L=3e-7, G=0.0, C=1e-10)
    z0, gamma = secondary_params(cab, np.array([1e3, 1e6]))
    assert gamma.real[1] > gamma.real[0] > 0
    assert not cab.is_constant


@pytest.mark.parametrize("bad", [dict(L=0.0), dict(C=-1.0), dict(R=-1.0), dict(G=-1e-3)])
def test_cable_validation(bad):
    with pytest.raises(ChannelError):
        CableParams(**{**dict(R=0.0, L=1e-6, G=0.0, C=1e-10), **bad})


def test_matched_line_is_transparent():
    top = single_line(123.4, Z0)
    f = np.linspace(0, 1e7, 101)
    np.testing.assert_allclose(input_impedance(top, f), Z0, rtol=1e-12)


def test_quarter_wave_transformer():
    f = 1e6
    length = V / (4 * f)
    for zl in (10.0, 25 + 5j, 200.0):
        zin = input_impedance(single_line(length, zl), f)
        assert zin == pytest.approx(Z0**2 / zl, rel=1e-9)


def test_tanh_form_agreement():
    f = np.array([1.3e5, 7.1e5, 2.2e6])
    cab = CableParams(R=2e-3, L=3e-7, G=1e-8, C=1e-10)
    z0, g = secondary_params(cab, f)
    zt = 30 - 12j
    ell = 321.0
    th = np.tanh(g * ell)
    ref = z0 * (zt + z0 * th) / (z0 + zt * th)
    np.testing.assert_allclose(line_input_impedance(z0, g, ell, zt), ref, rtol=1e-10)


def test_zero_length_and_singularity():
    assert line_input_impedance(Z0, 1j, 0.0, 17 + 2j) == 17 + 2j
    # half-wave open stub looks open again: unbounded sentinel
    f = 1e6
    z = input_impedance(single_line(V / (2 * f), OPEN), f)
    assert math.isinf(abs(z)) or abs(z) > 1e12


def test_reflection_limits():
    assert reflection_coefficient(50.0, 50.0) == 0
    assert reflection_coefficient(OPEN, 50.0) == 1
    assert reflection_coefficient(0.0, 50.0) == -1
    with pytest.raises(ChannelError):
        reflection_coefficient(-50.0, 50.0)


def test_passive_impedances_give_bounded_reflection(rng):
    z = rng.exponential(100, 10_000) * np.exp(1j * rng.uniform(-np.pi / 2, np.pi / 2, 10_000))
    zp = rng.uniform(1, 500, 10_000)
    g = reflection_coefficient(z, zp)
    assert np.max(np.abs(g)) <= 1 + 1e-12


def random_topology(draw_rng, lossy=False):
    cab = CableParams(R=1e-3, L=3e-7, G=1e-9, C=1e-10) if lossy else CABLE
    n = int(draw_rng.integers(1, 4))
    sections = tuple(Section(float(draw_rng.uniform(5, 300)), cab) for _ in range(n))
    branches = tuple(Branch(int(draw_rng.integers(0, n)), float(draw_rng.uniform(5, 100)), cab,
                            Load.rlc(float(draw_rng.uniform(0, 100)), float(draw_rng.uniform(0, 1e-4)),
                                     float(draw_rng.uniform(1e-9, 1e-6))))
                     for _ in range(int(draw_rng.integers(0, 3))))
    fault = None
    if draw_rng.uniform() < 0.5:
        s = int(draw_rng.integers(0, n))
        fault = Fault(s, float(draw_rng.uniform(0, sections[s].length)), Load.constant(float(draw_rng.uniform(0.1, 500))),
                      "shunt" if draw_rng.uniform() < 0.5 else "series")
    term = Load.constant(complex(draw_rng.uniform(0, 300), draw_rng.uniform(-300, 300)))
    return NetworkTopology(sections, branches, term, float(draw_rng.uniform(5, 200)), fault)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_passivity_random_networks(seed, lossy):
    top = random_topology(np.random.default_rng(seed), lossy)
    g = gamma_in(top, FrequencyGrid(5e6, 2049))
    assert np.max(np.abs(g)) <= 1 + 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_impulse_response_is_real(seed):
    top = random_topology(np.random.default_rng(seed), True)
    grid = FrequencyGrid(5e6, 4097)
    g = gamma_in(top, grid)
    full = np.concatenate([g, np.conj(g[-2:0:-1])])
    full[grid.n_f - 1] = full[grid.n_f - 1].real
    h_complex = np.fft.ifft(full)
    assert np.max(np.abs(h_complex.imag)) <= 1e-10 * np.max(np.abs(h_complex.real))
    h = impulse_response(top, grid)
    np.testing.assert_allclose(h.samples, h_complex.real, atol=1e-12)


def test_flat_spectrum_gives_single_tap():
    top = single_line(10.0, Z0, zp=Z0)
    grid = FrequencyGrid(1e6, 1025)
    h = impulse_response(top, grid, z_plc=Z0 * 3)  # constant Gamma = (50 - 150)/(50 + 150)
    assert h.samples[0] == pytest.approx(-0.5)
    assert np.max(np.abs(h.samples[1:])) < 1e-14
    assert h.sample_rate == 2e6 and h.duration == pytest.approx(grid.duration)


@pytest.mark.parametrize("zl, zp", [(OPEN, Z0), (0.0, Z0), (OPEN, 75.0), (0.0, 20.0), (150.0, 30.0), (10.0, 90.0)])
def test_bounce_diagram_oracle(zl, zp):
    grid = FrequencyGrid(4e6, 2**13 + 1)
    m = 37
    length = m * V / (2 * grid.sample_rate)
    h = impulse_response(single_line(length, zl, zp), grid).samples
    ref = bounce_series(Z0, zp, zl, 6)
    np.testing.assert_allclose([h[k * m] for k in range(6)], ref, atol=1e-9)


@pytest.mark.parametrize("length", [10.0, 100.0, 1000.0])
def test_first_echo_delay_within_one_sample(length):
    grid = FrequencyGrid(20e6, 2**15 + 1)
    h = impulse_response(single_line(length, OPEN), grid)
    k = int(np.argmax(np.abs(h.samples)))
    assert abs(h.times[k] - 2 * length / V) <= 1 / h.sample_rate


@pytest.mark.parametrize("m", [17, 66, 301])
def test_causality_source_matched(m):
    # sample-aligned delay; fractional delays carry the grid's sinc tails
    grid = FrequencyGrid(10e6, 2**14 + 1)
    length = m * V / (2 * grid.sample_rate)
    h = impulse_response(single_line(length, 0.0), grid)
    energy = np.sum(h.samples**2)
    early = np.sum(h.samples[1:m] ** 2)
    assert early <= 1e-6 * energy


def test_fault_removal_limit():
    grid = FrequencyGrid(5e6, 1025)
    base = NetworkTopology((Section(400.0, CABLE), Section(200.0, CABLE)),
                           (Branch(0, 50.0, CABLE, Load.constant(80.0)),), Load.constant(20.0), 40.0)
    faulted = base.with_fault(Fault(1, 120.0, Load.open(), "shunt"))
    np.testing.assert_allclose(gamma_in(faulted, grid), gamma_in(base, grid), atol=1e-9)
    huge = base.with_fault(Fault(0, 10.0, Load.constant(1e15), "shunt"))
    np.testing.assert_allclose(gamma_in(huge, grid), gamma_in(base, grid), atol=1e-9)
    series_short = base.with_fault(Fault(0, 10.0, Load.short(), "series"))
    np.testing.assert_allclose(gamma_in(series_short, grid), gamma_in(base, grid), atol=1e-9)


def test_shunt_fault_echo_is_negative():
    grid = FrequencyGrid(4e6, 2**13 + 1)
    m = 40
    offset = m * V / (2 * grid.sample_rate)
    top = NetworkTopology((Section(3 * offset, CABLE),), termination=Load.constant(Z0),
                          fault=Fault(0, offset, Load.constant(10.0)))
    h = impulse_response(top, grid).samples
    assert h[m] == pytest.approx(-Z0 / (2 * 10.0 + Z0), rel=1e-9)


def test_dc_extrapolation_logged(caplog):
    # shorted lossless line and an inductive source are both 0 ohm at DC
    top = single_line(50.0, 0.0, zp=Load.rlc(R=0.0, L=1e-6))
    grid = FrequencyGrid(1e6, 257)
    with caplog.at_level("WARNING"):
        g = gamma_in(top, grid)
    assert np.isfinite(g[0]) and g[0].imag == 0
    assert any("DC" in r.message for r in caplog.records)


def test_aliasing_guard():
    grid = FrequencyGrid(1e6, 17)  # window 16 us
    with pytest.raises(AliasingError) as err:
        impulse_response(single_line(2000.0, OPEN), grid)
    assert err.value.required_spacing == pytest.approx(V / 4000.0)


def test_topology_validation():
    with pytest.raises(ChannelError):
        Section(0.0, CABLE)
    with pytest.raises(ChannelError):
        NetworkTopology((Section(10.0, CABLE),), fault=Fault(0, 11.0, Load.short()))
    with pytest.raises(ChannelError):
        NetworkTopology((Section(10.0, CABLE),), (Branch(3, 1.0, CABLE),))
    with pytest.raises(ChannelError):
        Load.constant(-5.0).impedance(np.array([1.0]))


DOC = {
    "cables": {"mine": {"z0": 50.0, "v_p": 1.5e8}},
    "sections": [{"length_m": 300.0, "cable_ref": "mine"}, {"length_m": 200.0, "cable_ref": "LV"}],
    "branches": [{"at_junction": 0, "length_m": 40.0, "cable_ref": "mine",
                  "load": {"model": "rlc", "params": {"R": 30.0, "L": 1e-6, "C": 1e-8}}}],
    "termination": {"model": "open"},
    "z_plc": {"re": 45.0, "im": 0.0},
    "fault": {"section": 1, "offset_m": 50.0, "kind": "shunt", "impedance": {"model": "constant", "params": {"value": 5.0}}},
}


def test_parse_topology_document(tmp_path):
    top = parse_topology(DOC)
    assert len(top.sections) == 2 and top.branches[0].load.model == "rlc"
    assert top.fault_distance() == 350.0 and top.z_plc == 45.0
    path = tmp_path / "net.json"
    path.write_text(json.dumps(DOC))
    assert load_topology(path) == top
    assert top.hash() == parse_topology(DOC).hash()


@pytest.mark.parametrize("mutate, field", [
    (lambda d: d["sections"][0].update(length_m=-1.0), "sections/0/length_m"),
    (lambda d: d["sections"][1].pop("cable_ref"), "sections/1"),
    (lambda d: d["fault"].update(kind="sideways"), "fault/kind"),
    (lambda d: d.update(extra=1), "<root>"),
])
def test_schema_errors_name_the_field(mutate, field):
    doc = json.loads(json.dumps(DOC))
    mutate(doc)
    with pytest.raises(ChannelError) as err:
        parse_topology(doc)
    assert field in str(err.value)


def test_unknown_cable_and_bad_json(tmp_path):
    doc = json.loads(json.dumps(DOC))
    doc["sections"][0]["cable_ref"] = "nope"
    with pytest.raises(ChannelError, match="sections/0/cable_ref"):
        parse_topology(doc)
    path = tmp_path / "bad.json"
    path.write_text('{\n  "sections": [\n}')
    with pytest.raises(ChannelError, match="line 3"):
        load_topology(path)


def test_gamma_export(tmp_path):
    grid = FrequencyGrid(1e6, 9)
    g = gamma_in(parse_topology(DOC), grid)
    path = tmp_path / "g.csv"
    export_gamma_csv(path, grid.freqs, g, {"seed": 0})
    _, cols = read_csv(path)
    assert list(cols) == ["f_hz", "re", "im"]
    np.testing.assert_allclose(cols["re"] + 1j * cols["im"], g, rtol=1e-11, atol=1e-12)
