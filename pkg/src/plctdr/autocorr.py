"""Autocorrelation functions of the PLC pulses.

Closed forms for all four families plus a brute-force numeric correlation
that serves as an independent oracle.

Conventions:
    R(tau) = integral of p(t) p(t - tau) dt, for real pulses on [-T/2, T/2].
    Fresnel integrals are C(x) = int_0^x cos(pi t^2 / 2) dt and
    S(x) = int_0^x sin(pi t^2 / 2) dt, both tending to 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import signal as _signal
from scipy import special as _special

from . import io as _io
from .errors import AcfDomainError
from .pulses import (
    DEFAULT_OVERSAMPLING,
    Family,
    PulseSpec,
    aligned_sample_rate,
    hsofdm_cosine_amplitudes,
    occupied_bandwidth,
    sample_pulse,
)
from .signals import SampledSignal

_SQRT_PI = math.sqrt(math.pi)


def _lags(tau):
    arr = np.asarray(tau, dtype=float)
    return arr, np.abs(arr)


def _check_domain(abs_tau, limit, what):
    if np.any(abs_tau >= limit) or np.any(~np.isfinite(abs_tau)):
        bad = float(np.max(abs_tau))
        raise AcfDomainError(f"|tau| must be below {what} = {limit:.6g} s, got {bad:.6g} s")


def _ret(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


# -- UWB --------------------------------------------------------------------

def acf_uwb1(sigma: float, tau):
    """ACF of the first Gaussian derivative, defined for ``|tau| < 7 sigma``."""
    t, a = _lags(tau)
    _check_domain(a, 7.0 * sigma, "7 sigma")
    r = -(t**2 - 2 * sigma**2) * np.exp(-(t**2) / (4 * sigma**2)) / (8 * _SQRT_PI * sigma**5)
    return _ret(r)


def acf_uwb2(sigma: float, tau):
    """ACF of the second Gaussian derivative, defined for ``|tau| < 7 sigma``."""
    t, a = _lags(tau)
    _check_domain(a, 7.0 * sigma, "7 sigma")
    poly = t**4 - 12 * sigma**2 * t**2 + 12 * sigma**4
    r = poly * np.exp(-(t**2) / (4 * sigma**2)) / (32 * _SQRT_PI * sigma**9)
    return _ret(r)


# -- CSS --------------------------------------------------------------------

def fresnel(x):
    """Fresnel integrals ``(C(x), S(x))`` in the ``pi t^2 / 2`` convention."""
    s, c = _special.fresnel(np.asarray(x, dtype=float))
    return _ret(c), _ret(s)


def _css_lambda(t, tau, mu):
    root = math.sqrt(mu)
    c, s = fresnel(root * (2 * t - tau))
    half = math.pi * mu * tau**2 / 2
    return (np.cos(half) * c - np.sin(half) * s) / (4 * root)


def acf_css(mu: float, T: float, tau):
    """ACF of ``cos(pi mu t^2)`` on ``[-T/2, T/2]``, defined for ``|tau| < T``.

    For ``tau >= 0`` the two pulses overlap on ``[tau - T/2, T/2]``; the
    product splits into a chirp-sum part (Fresnel integrals, through
    ``Lambda``) and a beat part that integrates to a sinc. The beat term
    ``sin(pi mu tau (T - tau)) / (2 pi mu tau)`` is written with ``np.sinc``
    so ``tau = 0`` needs no special case. The down-chirp has the same ACF.
    """
    if mu == 0 or not np.isfinite(mu):
        raise AcfDomainError(f"degenerate chirp: mu must be finite and non-zero, got {mu!r}")
    _, a = _lags(tau)
    _check_domain(a, T, "T")
    m = abs(mu)
    chirp = _css_lambda(T / 2, a, m) - _css_lambda(a - T / 2, a, m)
    beat = 0.5 * (T - a) * np.sinc(m * a * (T - a))
    return _ret(chirp + beat)


# -- HS-OFDM ----------------------------------------------------------------

class HsOfdmAcf:
    """Exact ACF of the HS-OFDM pulse for a fixed symbol vector.

    Write the pulse as ``sum_k c_k exp(j 2 pi k t / T)`` for ``|k| <= K``
    with real ``c_{-k} = c_k``. Integrating the lagged product over the
    overlap gives, with ``x = |tau| / T``::

        R(tau) = (T - |tau|) sum_k c_k^2 cos(2 pi k x)
                 + (2T / pi) sum_{k>=1} c_k g_k sin(2 pi k x)

        g_k = sum_{m != -k} c_m (-1)^(k+m+1) / (k + m)

    Building ``g`` costs one O(K^2) convolution. After that each lag costs
    O(K).
    """

    def __init__(self, symbols, T: float):
        if not T > 0:
            raise AcfDomainError(f"T must be positive, got {T!r}")
        self.T = float(T)
        a = hsofdm_cosine_amplitudes(symbols)
        K = a.size - 1
        c = np.concatenate([a[:0:-1] / 2, a[:1], a[1:] / 2])  # k = -K..K
        j = np.arange(-2 * K, 2 * K + 1)
        s = np.zeros(j.size)
        nz = j != 0
        s[nz] = np.where(j[nz] % 2 == 0, -1.0, 1.0) / j[nz]
        # g_k = sum_m c_m s(k+m) = (c * s)(k) since c is even; full index
        # runs -3K..3K, so k sits at offset 3K + k.
        g = np.convolve(c, s)
        ks = np.arange(1, K + 1)
        gk = g[3 * K + ks]
        self.k = ks
        self.cos_coef = np.concatenate([[a[0] ** 2], 0.5 * a[1:] ** 2])
        self.sin_coef = (2 * self.T / math.pi) * (a[1:] / 2) * gk

    @property
    def energy(self) -> float:
        return self.T * float(self.cos_coef.sum())

    def __call__(self, tau):
        t, a = _lags(tau)
        _check_domain(a, self.T, "T")
        flat = a.reshape(-1)
        out = np.empty(flat.shape)
        kk = np.arange(self.cos_coef.size)
        step = max(1, (1 << 21) // max(kk.size, 1))
        for i in range(0, flat.size, step):
            x = flat[i:i + step, None] / self.T
            cos_part = np.cos(2 * math.pi * x * kk) @ self.cos_coef
            sin_part = np.sin(2 * math.pi * x * self.k) @ self.sin_coef if self.k.size else 0.0
            out[i:i + step] = (self.T - flat[i:i + step]) * cos_part + sin_part
        return _ret(out.reshape(a.shape))


def acf_hsofdm(symbols, T: float, tau, delta_f: float | None = None):
    """ACF of the HS-OFDM pulse, defined for ``|tau| < T``.

    ``delta_f`` is optional; when given it must equal ``1/T``.
    """
    if delta_f is not None and not math.isclose(delta_f * T, 1.0, rel_tol=1e-9):
        raise AcfDomainError(f"subcarrier spacing must be 1/T: delta_f*T = {delta_f * T!r}")
    return HsOfdmAcf(symbols, T)(tau)


def acf_hsofdm_as_printed(symbols, T: float, tau):
    """Literal evaluation of the published double-sum expression.

    Kept for auditing only: it does not agree with direct correlation of
    the pulse (see tests). Removable singularities at ``l = 0``,
    ``l + m = 0`` and ``l = m`` take their analytic limits.
    """
    P = np.asarray(symbols, dtype=float)
    pn, pl = P[-1], P[:-1]
    df = 1.0 / T
    a = abs(float(tau))
    _check_domain(np.array(a), T, "T")
    l = np.arange(pl.size, dtype=float)
    w = 2 * math.pi * df
    with np.errstate(divide="ignore", invalid="ignore"):
        single = (np.sin(w * l * T) + np.sin(w * l * (T - a)) + np.sin(w * l * (2 * T - a))) / (math.pi * df * l)
    single[l == 0] = 8 * T - 4 * a
    L, M = np.meshgrid(l, l, indexing="ij")
    arg = w * (T - a)
    sl, sm = np.sin(arg * L), np.sin(arg * M)
    with np.errstate(divide="ignore", invalid="ignore"):
        plus = (sl + sm) / (math.pi * df * (L + M))
        minus = (sl - sm) / (math.pi * df * (L - M))
    plus[(L + M) == 0] = 2 * (T - a)
    diag = L == M
    minus[diag] = 2 * (T - a) * np.cos(arg * L[diag])
    return float(pn**2 * (2 * T - a) + pn * np.dot(pl, single) + pl @ (plus + minus) @ pl)


# -- dispatch -----------------------------------------------------------------

def acf_function(spec: PulseSpec) -> Callable:
    """Closed-form ACF of ``spec`` as a callable of the lag (raw, not normalised)."""
    fam = spec.family
    if fam is Family.UWB1:
        return lambda tau: acf_uwb1(spec.sigma, tau)
    if fam is Family.UWB2:
        return lambda tau: acf_uwb2(spec.sigma, tau)
    if fam is Family.CSS:
        return lambda tau: acf_css(spec.mu, spec.T, tau)
    return HsOfdmAcf(spec.symbols, spec.T)


def acf(spec: PulseSpec, tau):
    return acf_function(spec)(tau)


@dataclass(frozen=True)
class AcfCurve:
    """Autocorrelation sampled on a lag grid symmetric about zero.

    ``func`` optionally carries the exact evaluator the samples came from so
    metric routines can refine extrema off-grid; it is not serialized.
    """

    tau: np.ndarray
    values: np.ndarray
    family: Family | None = None
    spec: PulseSpec | None = None
    normalized: bool = False
    func: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        tau = np.array(self.tau, dtype=float).reshape(-1)
        vals = np.array(self.values, dtype=float).reshape(-1)
        if tau.size != vals.size or tau.size < 3:
            raise ValueError("tau and values must have equal length >= 3")
        if np.any(np.diff(tau) <= 0):
            raise ValueError("lag grid must be strictly increasing")
        scale = float(np.max(np.abs(tau)))
        if np.max(np.abs(tau + tau[::-1])) > 1e-9 * scale:
            raise ValueError("lag grid must be symmetric about zero")
        tau.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "values", vals)

    @property
    def peak(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def value_normalized(self) -> np.ndarray:
        return self.values / self.peak

    def normalize(self) -> "AcfCurve":
        p = self.peak
        func = None if self.func is None else (lambda tau, f=self.func: np.asarray(f(tau)) / p)
        return AcfCurve(self.tau, self.values / p, self.family, self.spec, True, func)

    def scaled(self, factor: float) -> "AcfCurve":
        func = None if self.func is None else (lambda tau, f=self.func: np.asarray(f(tau)) * factor)
        return AcfCurve(self.tau, self.values * factor, self.family, self.spec, self.normalized, func)

    def __call__(self, tau):
        if self.func is not None:
            return self.func(tau)
        return _ret(np.interp(np.asarray(tau, dtype=float), self.tau, self.values))

    def to_csv(self, path: str | Path, header: dict | None = None) -> None:
        hdr = {"family": self.family.value if self.family else "numeric"}
        if self.spec is not None:
            hdr.update({f"pulse.{k}": v for k, v in self.spec.to_dict().items() if v is not None and k != "symbols"})
        hdr.update(header or {})
        _io.write_csv(path, {"tau_s": self.tau, "value": self.values, "value_normalized": self.value_normalized}, hdr)


def lag_grid(T: float, n_points: int = 10_000) -> np.ndarray:
    """``n_points`` lags strictly inside ``(-T, T)``, symmetric about zero."""
    return T * np.linspace(-1.0, 1.0, n_points + 2)[1:-1]


def acf_curve(spec: PulseSpec, n_points: int = 10_000) -> AcfCurve:
    f = acf_function(spec)
    tau = lag_grid(spec.T, n_points)
    return AcfCurve(tau, f(tau), spec.family, spec, False, f)


def acf_numeric(signal: SampledSignal) -> AcfCurve:
    """Discrete linear autocorrelation scaled by ``1/sample_rate``.

    Converges to the continuous ACF as the rate grows. Lags span
    ``+-(len - 1) / sample_rate``.
    """
    x = signal.samples
    r = _signal.correlate(x, x, mode="full", method="auto") / signal.sample_rate
    r = 0.5 * (r + r[::-1])
    m = x.size
    tau = np.arange(-(m - 1), m) / signal.sample_rate
    spec = None
    fam = None
    if "pulse" in signal.meta:
        spec = PulseSpec.from_dict(signal.meta["pulse"])
        fam = spec.family
    return AcfCurve(tau, r, fam, spec)


def oracle_sample_rate(spec: PulseSpec, oversampling: float = DEFAULT_OVERSAMPLING, min_lags: int = 10_000) -> float:
    """Rate used for oracle checks.

    It is at least ``oversampling * 2B`` and gives at least ``min_lags``
    lags over ``(-T, T)``. It is aligned so a whole number of samples fits
    in ``T``.
    """
    rate = max(oversampling * 2 * occupied_bandwidth(spec), (min_lags / 2 + 1) / spec.T)
    return aligned_sample_rate(spec.T, rate)


def oracle_report(spec: PulseSpec, sample_rate: float | None = None, *, truncated: bool | None = None) -> dict:
    """Compare the closed form with :func:`acf_numeric` of the sampled pulse.

    UWB closed forms describe the untruncated Gaussian derivatives, so by
    default UWB pulses are sampled over ``+-T`` (untruncated);
    ``truncated=True`` samples only ``[-T/2, T/2]`` and exposes the
    truncation error instead. HS-OFDM and CSS are always truncated at
    ``T/2`` by definition.

    Returns:
        dict with ``max_abs_err``, ``max_rel_err`` (relative to the peak),
        ``peak``, ``grid_points``, ``sample_rate_hz`` and the pulse params.
    """
    rate = sample_rate or oracle_sample_rate(spec)
    uwb = spec.family in (Family.UWB1, Family.UWB2)
    if truncated is None:
        truncated = not uwb
    span = None if truncated else 2 * spec.T
    sig = sample_pulse(spec, rate, span)
    curve = acf_numeric(sig)
    inside = np.abs(curve.tau) < spec.T * (1 - 1e-12)
    tau = curve.tau[inside]
    closed = acf(spec, tau)
    numeric = curve.values[inside]
    peak = float(np.max(np.abs(closed)))
    err = float(np.max(np.abs(closed - numeric)))
    doc = {
        "max_abs_err": err,
        "max_rel_err": err / peak,
        "peak": peak,
        "grid_points": int(tau.size),
        "sample_rate_hz": rate,
        "truncated": bool(truncated),
    }
    doc.update({f"pulse.{k}": v for k, v in spec.to_dict().items() if k != "symbols"})
    return doc
