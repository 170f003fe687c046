"""The four PLC pulse families and their duration/bandwidth relations.

Every pulse lives on ``-T/2 <= t <= T/2`` and is zero elsewhere:

* HS-OFDM: real multicarrier pulse from a BPSK symbol vector through a
  Hermitian-symmetric mapping, subcarrier spacing ``1/T``.
* UWB-1 / UWB-2: first and second derivatives of a Gaussian of width
  ``sigma``, truncated to an effective duration ``T = 7 sigma``.
* CSS: baseband linear chirp ``cos(pi mu t^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import PulseSpecError, UndersamplingError
from .signals import SampledSignal

# Occupied-bandwidth constants of the Gaussian derivatives (30 dB criterion).
UWB1_BANDWIDTH_CONSTANT = 1599.49e-3  # B = const / (pi sigma)
UWB2_BANDWIDTH_CONSTANT = 564.65e-3  # B = const / sigma
UWB_DURATION_FACTOR = 7.0  # T = 7 sigma

DEFAULT_SUBCARRIERS = 512
DEFAULT_SYMBOL_SEED = 2019
DEFAULT_OVERSAMPLING = 8.0
MIN_OVERSAMPLING = 2.0


class Family(str, Enum):
    HS_OFDM = "hs-ofdm"
    UWB1 = "uwb1"
    UWB2 = "uwb2"
    CSS = "css"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, Family):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {
            "hs-ofdm": cls.HS_OFDM, "hsofdm": cls.HS_OFDM, "ofdm": cls.HS_OFDM,
            "uwb1": cls.UWB1, "uwb-1": cls.UWB1,
            "uwb2": cls.UWB2, "uwb-2": cls.UWB2,
            "css": cls.CSS, "chirp": cls.CSS,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown pulse family {value!r}") from None

    @property
    def label(self) -> str:
        return {"hs-ofdm": "HS-OFDM", "uwb1": "UWB-1", "uwb2": "UWB-2", "css": "CSS"}[self.value]


def bpsk_symbols(n: int, seed: int | None = DEFAULT_SYMBOL_SEED) -> tuple[float, ...]:
    """``n`` BPSK symbols; ``seed=None`` gives the all-ones vector."""
    if seed is None:
        return (1.0,) * n
    rng = np.random.default_rng(seed)
    return tuple(float(s) for s in rng.choice((-1.0, 1.0), size=n))


@dataclass(frozen=True)
class PulseSpec:
    """Parametric description of one pulse.

    Use the family constructors (:meth:`hs_ofdm`, :meth:`uwb1`, :meth:`uwb2`,
    :meth:`css`, :meth:`css_from_rate`) rather than the raw initialiser.

    Attributes:
        family: pulse family.
        T: pulse duration in seconds.
        energy: transmit energy E used by :func:`transmit_signal`.
        n: HS-OFDM subcarrier count N.
        symbols: HS-OFDM BPSK symbols P_0..P_{N-1}.
        seed: seed the symbols were drawn with (None for explicit symbols or
            the all-ones vector).
        sigma: Gaussian width for UWB families, seconds.
        mu: chirp rate for CSS, Hz/s; the sign is the sweep direction.
    """

    family: Family
    T: float
    energy: float = 1.0
    n: int | None = None
    symbols: tuple[float, ...] | None = field(default=None, repr=False)
    seed: int | None = None
    sigma: float | None = None
    mu: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if self.symbols is not None:
            object.__setattr__(self, "symbols", tuple(float(s) for s in self.symbols))
        self.validate()

    # -- constructors -------------------------------------------------------
    @classmethod
    def hs_ofdm(cls, T, n=DEFAULT_SUBCARRIERS, symbols=None, seed=DEFAULT_SYMBOL_SEED, energy=1.0):
        if symbols is None:
            if not isinstance(n, (int, np.integer)) or n < 1:
                raise PulseSpecError("n", f"subcarrier count must be a positive integer, got {n!r}")
            symbols = bpsk_symbols(int(n), seed)
        else:
            seed = None
            n = len(symbols)
        return cls(Family.HS_OFDM, T, energy, n=int(n), symbols=tuple(symbols), seed=seed)

    @classmethod
    def uwb1(cls, sigma, energy=1.0):
        return cls(Family.UWB1, UWB_DURATION_FACTOR * sigma, energy, sigma=sigma)

    @classmethod
    def uwb2(cls, sigma, energy=1.0):
        return cls(Family.UWB2, UWB_DURATION_FACTOR * sigma, energy, sigma=sigma)

    @classmethod
    def css(cls, B, T, energy=1.0, up=True):
        """Chirp sweeping ``-B..B`` in ``T`` seconds (canonical form)."""
        if not (B > 0):
            raise PulseSpecError("B", f"bandwidth must be positive, got {B!r}")
        if not (T > 0):
            raise PulseSpecError("T", f"duration must be positive, got {T!r}")
        mu = 2.0 * B / T
        return cls(Family.CSS, T, energy, mu=mu if up else -mu)

    @classmethod
    def css_from_rate(cls, mu, T, energy=1.0):
        return cls(Family.CSS, T, energy, mu=mu)

    # -- derived quantities -------------------------------------------------
    @property
    def delta_f(self) -> float:
        """HS-OFDM subcarrier spacing, ``1/T``."""
        return 1.0 / self.T

    @property
    def bandwidth(self) -> float:
        return occupied_bandwidth(self)

    def with_energy(self, energy: float) -> "PulseSpec":
        return replace(self, energy=energy)

    def validate(self) -> None:
        def positive(name, value):
            if value is None or not np.isfinite(value) or not value > 0:
                raise PulseSpecError(name, f"must be a positive finite number, got {value!r}")

        positive("T", self.T)
        positive("energy", self.energy)
        fam = self.family
        if fam is Family.HS_OFDM:
            if self.symbols is None or self.n is None:
                raise PulseSpecError("symbols", "HS-OFDM needs a symbol vector")
            if len(self.symbols) != self.n:
                raise PulseSpecError("symbols", f"expected {self.n} symbols, got {len(self.symbols)}")
            if self.n < 1:
                raise PulseSpecError("n", "subcarrier count must be positive")
            if any(abs(s) != 1.0 for s in self.symbols):
                raise PulseSpecError("symbols", "BPSK symbols must be +1 or -1")
        elif fam in (Family.UWB1, Family.UWB2):
            positive("sigma", self.sigma)
            if not math.isclose(self.T, UWB_DURATION_FACTOR * self.sigma, rel_tol=1e-12):
                raise PulseSpecError("T", f"UWB pulses need T = 7 sigma, got T={self.T!r}, sigma={self.sigma!r}")
        elif fam is Family.CSS:
            if self.mu is None or not np.isfinite(self.mu) or self.mu == 0:
                raise PulseSpecError("mu", f"chirp rate must be finite and non-zero, got {self.mu!r}")

    # -- serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        """Flat key/value form (family, T_s, E, N, seed, sigma_s, mu_hz_per_s)."""
        doc = {
            "family": self.family.value,
            "T_s": self.T,
            "E": self.energy,
            "N": self.n,
            "seed": self.seed,
            "sigma_s": self.sigma,
            "mu_hz_per_s": self.mu,
            "B_hz": self.bandwidth,
        }
        if self.family is Family.HS_OFDM and self.seed is None and any(s != 1.0 for s in self.symbols):
            doc["symbols"] = [int(s) for s in self.symbols]
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "PulseSpec":
        fam = Family.parse(doc["family"])
        energy = float(doc.get("E", 1.0))
        if fam is Family.HS_OFDM:
            if doc.get("symbols") is not None:
                return cls.hs_ofdm(float(doc["T_s"]), symbols=doc["symbols"], energy=energy)
            return cls.hs_ofdm(float(doc["T_s"]), n=int(doc["N"]), seed=doc.get("seed"), energy=energy)
        if fam is Family.UWB1:
            return cls.uwb1(float(doc["sigma_s"]), energy)
        if fam is Family.UWB2:
            return cls.uwb2(float(doc["sigma_s"]), energy)
        return cls.css_from_rate(float(doc["mu_hz_per_s"]), float(doc["T_s"]), energy)


def hsofdm_cosine_amplitudes(symbols) -> np.ndarray:
    """Amplitudes ``a_k`` of ``p(t) = sum_k a_k cos(2 pi k t / T)``, k = 0..N-2.

    The Hermitian-symmetric mapping of real symbols gives ``2 P_k`` on
    subcarrier k; the DC bin also carries ``Re{P_{N-1}}``.
    """
    P = np.asarray(symbols, dtype=float)
    if P.size < 2:
        return np.array([P[-1]]) if P.size else np.zeros(1)
    a = 2.0 * P[:-1]
    a[0] += P[-1]
    return a


def _shape(spec: PulseSpec, t: np.ndarray) -> np.ndarray:
    """Untruncated pulse shape."""
    fam = spec.family
    if fam is Family.UWB1:
        s = spec.sigma
        return -t / (math.sqrt(2 * math.pi) * s**3) * np.exp(-0.5 * (t / s) ** 2)
    if fam is Family.UWB2:
        s = spec.sigma
        return (t**2 - s**2) / (math.sqrt(2 * math.pi) * s**5) * np.exp(-0.5 * (t / s) ** 2)
    if fam is Family.CSS:
        return np.cos(math.pi * spec.mu * t**2)
    a = hsofdm_cosine_amplitudes(spec.symbols)
    k = np.arange(a.size)
    out = np.empty(t.shape)
    flat_t = t.reshape(-1)
    flat_out = out.reshape(-1)
    step = max(1, (1 << 21) // a.size)
    for i in range(0, flat_t.size, step):
        phase = (2 * math.pi / spec.T) * np.outer(flat_t[i:i + step], k)
        flat_out[i:i + step] = np.cos(phase) @ a
    return out


def eval_pulse(spec: PulseSpec, t):
    """Evaluate the pulse at time(s) ``t``; zero for ``|t| > T/2``."""
    tt = np.asarray(t, dtype=float)
    inside = np.abs(tt) <= spec.T / 2
    out = np.zeros(tt.shape)
    if np.any(inside):
        out[inside] = _shape(spec, tt[inside])
    return float(out) if out.ndim == 0 else out


def occupied_bandwidth(spec: PulseSpec) -> float:
    """One-sided occupied bandwidth B in Hz (the spectrum spans ``-B..B``)."""
    fam = spec.family
    if fam is Family.HS_OFDM:
        return spec.n * spec.delta_f
    if fam is Family.UWB1:
        return UWB1_BANDWIDTH_CONSTANT / (math.pi * spec.sigma)
    if fam is Family.UWB2:
        return UWB2_BANDWIDTH_CONSTANT / spec.sigma
    return abs(spec.mu) * spec.T / 2


def duration_for_bandwidth(family, B, n=DEFAULT_SUBCARRIERS, seed=DEFAULT_SYMBOL_SEED, energy=1.0) -> PulseSpec:
    """Build the pulse of ``family`` occupying bandwidth ``B``.

    HS-OFDM uses ``T = N/B``. CSS reuses that duration (so both multicarrier
    and chirp pulses share T at a given B) with ``mu = 2B/T``.
    """
    fam = Family.parse(family)
    if not (np.isfinite(B) and B > 0):
        raise PulseSpecError("B", f"bandwidth must be positive, got {B!r}")
    if fam in (Family.HS_OFDM, Family.CSS):
        if not isinstance(n, (int, np.integer)) or n < 2:
            raise PulseSpecError("n", f"need at least 2 subcarriers, got {n!r}")
        T = n / B
        if fam is Family.HS_OFDM:
            return PulseSpec.hs_ofdm(T, n=int(n), seed=seed, energy=energy)
        return PulseSpec.css(B, T, energy)
    if fam is Family.UWB1:
        return PulseSpec.uwb1(UWB1_BANDWIDTH_CONSTANT / (math.pi * B), energy)
    return PulseSpec.uwb2(UWB2_BANDWIDTH_CONSTANT / B, energy)


def minimum_sample_rate(spec: PulseSpec, oversampling: float = MIN_OVERSAMPLING) -> float:
    return oversampling * 2.0 * occupied_bandwidth(spec)


def aligned_sample_rate(T: float, min_rate: float) -> float:
    """Smallest rate >= ``min_rate`` that fits a whole number of samples in ``T``.

    With that rate the sample grid of :func:`sample_pulse` is the midpoint
    grid of ``[-T/2, T/2]``.
    """
    return math.ceil(T * min_rate - 1e-9) / T


def _symmetric_grid(span: float, sample_rate: float) -> np.ndarray:
    m = max(1, int(math.floor(span * sample_rate + 1e-9)))
    return (np.arange(m) - (m - 1) / 2) / sample_rate


def sample_pulse(spec: PulseSpec, sample_rate: float, span: float | None = None) -> SampledSignal:
    """Sample the raw pulse (no energy scaling) on a grid symmetric about 0.

    ``span`` defaults to T. A larger span samples the *untruncated* shape,
    which is what the closed-form UWB autocorrelations describe.
    """
    t = _symmetric_grid(spec.T if span is None else span, sample_rate)
    values = eval_pulse(spec, t) if span is None else _shape(spec, t)
    return SampledSignal(np.atleast_1d(values), sample_rate, float(t[0]))


def transmit_signal(spec: PulseSpec, sample_rate: float | None = None, *, oversampling: float | None = None) -> SampledSignal:
    """Energy-normalised transmit pulse ``x = sqrt(E) p / ||p||``.

    Args:
        spec: pulse description.
        sample_rate: Hz. Defaults to ``oversampling * 2B`` with oversampling 8.
        oversampling: required ratio of sample rate to ``2B``; at least 2.
            When omitted, an explicit ``sample_rate`` is only checked against
            the floor of 2.

    Raises:
        UndersamplingError: rate below ``oversampling * 2B``.
    """
    factor = DEFAULT_OVERSAMPLING if (oversampling is None and sample_rate is None) else (oversampling or MIN_OVERSAMPLING)
    if factor < MIN_OVERSAMPLING:
        raise PulseSpecError("oversampling", f"must be at least {MIN_OVERSAMPLING}, got {factor}")
    minimum = minimum_sample_rate(spec, factor)
    if sample_rate is None:
        sample_rate = minimum
    if sample_rate < minimum * (1 - 1e-12):
        raise UndersamplingError(sample_rate, minimum)
    raw = sample_pulse(spec, sample_rate)
    norm = math.sqrt(raw.energy)
    if norm == 0:
        raise PulseSpecError("T", "pulse has no energy on the sample grid")
    x = raw.samples * (math.sqrt(spec.energy) / norm)
    return SampledSignal(x, sample_rate, raw.t0, {"pulse": spec.to_dict()})
