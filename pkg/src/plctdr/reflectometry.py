"""End-to-end TDR chain: echo synthesis, pulse compression, fault location."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import signal as _signal

from . import io as _io
from .channel import FrequencyGrid, NetworkTopology, impulse_response
from .errors import AxisMismatchError
from .pulses import PulseSpec, occupied_bandwidth, transmit_signal
from .signals import SampledSignal


def _same_rate(a: SampledSignal, b: SampledSignal, what: str) -> None:
    if not math.isclose(a.sample_rate, b.sample_rate, rel_tol=1e-12):
        raise AxisMismatchError(f"{what}: sample rates differ ({a.sample_rate:.12g} vs {b.sample_rate:.12g} Hz)")


def received_power(y: SampledSignal, pulse_samples: int) -> float:
    """Mean power of ``y`` per sample over one pulse length."""
    return float(np.sum(y.samples**2) / max(1, pulse_samples))


def simulate_echo(x: SampledSignal, h: SampledSignal, *, noise_power: float = 0.0, snr_db: float | None = None,
                  seed: int | np.random.SeedSequence | None = None) -> SampledSignal:
    """Received signal ``y = x * h + v``.

    ``h`` holds discrete channel taps at the rate of ``x``. The noise is
    white Gaussian with per-sample variance ``noise_power``; alternatively
    ``snr_db`` sets that variance against the mean received echo power over
    one pulse length.
    """
    _same_rate(x, h, "simulate_echo")
    if noise_power < 0:
        raise ValueError("noise power must be non-negative")
    clean = _signal.convolve(x.samples, h.samples, method="auto") if len(h) > 1 else x.samples * h.samples[0]
    variance = float(noise_power)
    if snr_db is not None:
        variance = received_power(SampledSignal(clean, x.sample_rate), len(x)) / 10 ** (snr_db / 10)
    out = np.array(clean, dtype=float)
    if variance > 0:
        rng = np.random.default_rng(seed)
        out = out + rng.normal(0.0, math.sqrt(variance), out.size)
    meta = dict(x.meta)
    meta["noise"] = {"seed": seed if isinstance(seed, (int, type(None))) else str(seed.entropy),
                     "variance": variance, "snr_db": snr_db}
    return SampledSignal(out, x.sample_rate, x.t0 + h.t0, meta)


@dataclass(frozen=True)
class Reflectogram:
    """Compressed trace on a round-trip time axis; ``distance = v_p t / 2``."""

    time: np.ndarray
    values: np.ndarray
    v_p: float
    meta: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        t = np.array(self.time, dtype=float).reshape(-1)
        v = np.array(self.values, dtype=float).reshape(-1)
        if t.size != v.size or t.size == 0:
            raise AxisMismatchError("time and values must be non-empty and of equal length")
        if not self.v_p > 0:
            raise ValueError("phase velocity must be positive")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "time", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "meta", dict(self.meta))

    @property
    def distance(self) -> np.ndarray:
        return self.time * (self.v_p / 2)

    @property
    def dt(self) -> float:
        return float(self.time[1] - self.time[0]) if self.time.size > 1 else math.nan

    def to_csv(self, path, header: dict | None = None) -> None:
        hdr = {"v_p_m_per_s": self.v_p}
        for k, v in self.meta.items():
            if isinstance(v, (int, float, str, bool)) or v is None:
                hdr[k] = v
        hdr.update(header or {})
        _io.write_csv(path, {"t_s": self.time, "d_m": self.distance, "value": self.values}, hdr)

    @classmethod
    def from_csv(cls, path) -> "Reflectogram":
        hdr, cols = _io.read_csv(path)
        return cls(cols["t_s"], cols["value"], float(hdr["v_p_m_per_s"]), {})


def compress(y: SampledSignal, p: SampledSignal, v_p: float = 1.5e8) -> Reflectogram:
    """Matched filter ``rho = y (x) p / ||p||`` with the discrete 2-norm.

    The time axis is the round-trip delay: a copy of ``p`` delayed by
    ``t0`` in ``y`` peaks at ``t0``.
    """
    _same_rate(y, p, "compress")
    norm = p.norm
    if norm == 0:
        raise ValueError("pulse compression filter has zero energy")
    filt = p.samples / norm
    rho = _signal.correlate(y.samples, filt, mode="full", method="auto")
    m = filt.size
    shift = np.arange(-(m - 1), y.samples.size)
    t = (y.t0 - p.t0) + shift / y.sample_rate
    meta = {k: v for k, v in y.meta.items()}
    meta["compressed"] = True
    return Reflectogram(t, rho, v_p, meta)


def differential_reflectogram(rho_fault: Reflectogram, rho_normal: Reflectogram) -> Reflectogram:
    """``rho_fault - rho_normal`` on their shared axis."""
    a, b = rho_fault, rho_normal
    if a.time.size != b.time.size or not np.array_equal(a.time, b.time) or a.v_p != b.v_p:
        raise AxisMismatchError("reflectograms do not share time axis and phase velocity")
    if a.meta.get("pulse") != b.meta.get("pulse"):
        raise AxisMismatchError("reflectograms were made with different pulses")
    meta = {k: v for k, v in a.meta.items() if k != "noise"}
    meta["differential"] = True
    return Reflectogram(a.time, a.values - b.values, a.v_p, meta)


@dataclass(frozen=True)
class FaultReport:
    detected: bool
    d_fault: float | None
    peak_amplitude: float | None
    threshold: float
    peaks: tuple[float, ...] = ()
    polarity: str = "abs"

    def __post_init__(self):
        if self.detected != (self.d_fault is not None):
            raise ValueError("d_fault must be given exactly when a fault is detected")
        if self.d_fault is not None and self.d_fault < 0:
            raise ValueError("d_fault must be non-negative")

    def to_dict(self) -> dict:
        return {"detected": self.detected, "d_fault_m": self.d_fault, "peak_amplitude": self.peak_amplitude,
                "threshold": self.threshold, "polarity": self.polarity, "peaks_m": list(self.peaks)}

    def write(self, path, header: dict | None = None) -> None:
        _io.write_kv(path, self.to_dict(), header)


def _refine(v: np.ndarray, i: int) -> float:
    if i <= 0 or i >= v.size - 1:
        return 0.0
    y0, y1, y2 = v[i - 1], v[i], v[i + 1]
    den = y0 - 2 * y1 + y2
    if den >= 0:
        return 0.0
    return float(np.clip(0.5 * (y0 - y2) / den, -0.5, 0.5))


def locate_fault(delta: Reflectogram, xi: float, polarity: str = "abs") -> FaultReport:
    """First local maximum of the differential trace above ``xi`` at ``d >= 0``.

    A shunt fault to ground returns a negative echo, so by default peaks of
    ``|delta|`` are searched. ``polarity="positive"`` searches ``delta``
    itself and ``"negative"`` searches ``-delta``. The winning peak is
    refined by three-point parabolic interpolation.
    """
    if not xi > 0:
        raise ValueError("threshold xi must be positive")
    if polarity not in ("abs", "positive", "negative"):
        raise ValueError(f"polarity must be 'abs', 'positive' or 'negative', got {polarity!r}")
    vals = delta.values
    v = np.abs(vals) if polarity == "abs" else (vals if polarity == "positive" else -vals)
    d = delta.distance
    if v.size < 3:
        return FaultReport(False, None, None, xi, (), polarity)
    inner = np.arange(1, v.size - 1)
    is_peak = (v[inner] > v[inner - 1]) & (v[inner] >= v[inner + 1]) & (v[inner] > xi) & (d[inner] >= 0)
    idx = inner[is_peak]
    if idx.size == 0:
        return FaultReport(False, None, None, xi, (), polarity)
    step = d[1] - d[0]
    peaks = tuple(float(d[i] + _refine(v, i) * step) for i in idx)
    first = int(idx[0])
    return FaultReport(True, max(0.0, peaks[0]), float(vals[first]), xi, peaks, polarity)


def suggest_threshold(delta: Reflectogram, pslr_db: float) -> float:
    """Threshold halfway between the largest sidelobe and the largest peak of ``|delta|``.

    A threshold below the sidelobe level lets a sidelobe ahead of the main
    lobe be reported as the fault.
    """
    peak = float(np.max(np.abs(delta.values)))
    side = 10 ** (pslr_db / 20) if math.isfinite(pslr_db) else 0.0
    return max(peak * (1 + side) / 2, np.finfo(float).tiny)


def interframe_leakage(y: SampledSignal, delta_T_p: float) -> float:
    """Largest ``|y|`` at or after ``delta_T_p`` relative to the peak of ``y``.

    Zero means the next frame, launched ``delta_T_p`` later, sees nothing
    of this one.
    """
    peak = float(np.max(np.abs(y.samples)))
    if peak == 0:
        return 0.0
    late = y.times >= delta_T_p - 1e-12 / y.sample_rate
    return float(np.max(np.abs(y.samples[late]), initial=0.0) / peak)


@dataclass(frozen=True)
class ScanResult:
    rho_fault: Reflectogram
    rho_normal: Reflectogram
    delta: Reflectogram
    transmit: SampledSignal


def fault_scan(topology: NetworkTopology, spec: PulseSpec, *, grid: FrequencyGrid | None = None,
               snr_db: float | None = None, noise_power: float = 0.0, seed: int | None = None,
               v_p: float | None = None) -> ScanResult:
    """Simulate the faulted and healthy network with the same pulse and compress both.

    The two traces get independent noise streams derived from ``seed``.
    """
    grid = grid or FrequencyGrid.for_band(occupied_bandwidth(spec))
    x = transmit_signal(spec, grid.sample_rate)
    if v_p is None:
        v_p = float(topology.sections[0].cable.phase_velocity(np.array([occupied_bandwidth(spec)]))[0])
    h_fault = impulse_response(topology, grid)
    h_normal = impulse_response(topology.with_fault(None), grid)
    if snr_db is not None:
        # one noise level for both traces, set by the faulted echo
        clean = simulate_echo(x, h_fault)
        noise_power = received_power(clean, len(x)) / 10 ** (snr_db / 10)
    s_fault, s_normal = np.random.SeedSequence(seed).spawn(2)
    y_f = simulate_echo(x, h_fault, noise_power=noise_power, seed=s_fault)
    y_n = simulate_echo(x, h_normal, noise_power=noise_power, seed=s_normal)
    for y, top in ((y_f, topology), (y_n, topology.with_fault(None))):
        y.meta["noise"].update(seed=seed, snr_db=snr_db)
        y.meta["topology_hash"] = top.hash()
    rho_f = compress(y_f, x, v_p)
    rho_n = compress(y_n, x, v_p)
    return ScanResult(rho_f, rho_n, differential_reflectogram(rho_f, rho_n), x)
