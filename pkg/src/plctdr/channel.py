"""Branched power-line network as cascaded two-conductor lines.

The network seen from the reflectometer is reduced to an input impedance
by walking from the far end back to the source. Each line section is
handled in reflection form: the load reflection ``(Z - Z0)/(Z + Z0)`` is
rotated by ``exp(-2 gamma l)`` and mapped back to an impedance. That form
copes with open (infinite) terminations, which the tanh form does not.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Union

import jsonschema
import numpy as np

from . import io as _io
from .errors import AliasingError, ChannelError
from .signals import SampledSignal

log = logging.getLogger(__name__)

Number = Union[float, complex]
ParamValue = Union[float, Callable[[np.ndarray], np.ndarray]]

OPEN = complex(math.inf, 0.0)
DEFAULT_GRID_POINTS = 2**16
DEFAULT_BAND_FACTOR = 4.0


def _eval_param(value: ParamValue, f: np.ndarray) -> np.ndarray:
    if callable(value):
        return np.broadcast_to(np.asarray(value(f), dtype=float), f.shape)
    return np.full(f.shape, float(value))


def _freqs(f) -> np.ndarray:
    arr = np.asarray(f, dtype=float)
    if np.any(arr < 0) or np.any(~np.isfinite(arr)):
        raise ChannelError("frequencies must be finite and non-negative")
    return arr


def _ret(arr):
    return complex(arr) if np.ndim(arr) == 0 else arr


@dataclass(frozen=True)
class CableParams:
    """Per-unit-length line constants (ohm/m, H/m, S/m, F/m).

    Each constant may also be a callable of frequency in Hz.
    """

    R: ParamValue = 0.0
    L: ParamValue = 1e-6
    G: ParamValue = 0.0
    C: ParamValue = 1e-10
    name: str = ""

    def __post_init__(self):
        for key in ("R", "L", "G", "C"):
            val = getattr(self, key)
            if callable(val):
                continue
            if not np.isfinite(val):
                raise ChannelError(f"cable {key}' must be finite, got {val!r}")
            if key in ("L", "C") and not val > 0:
                raise ChannelError(f"cable {key}' must be positive, got {val!r}")
            if key in ("R", "G") and val < 0:
                raise ChannelError(f"cable {key}' must be non-negative, got {val!r}")

    @classmethod
    def lossless(cls, z0: float, v_p: float, name: str = "") -> "CableParams":
        """Lossless line with characteristic impedance ``z0`` and speed ``v_p``."""
        if not (z0 > 0 and v_p > 0):
            raise ChannelError("z0 and v_p must be positive")
        return cls(0.0, z0 / v_p, 0.0, 1.0 / (z0 * v_p), name)

    def at(self, f) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        f = _freqs(f)
        r, l, g, c = (_eval_param(getattr(self, k), f) for k in ("R", "L", "G", "C"))
        if np.any(l <= 0) or np.any(c <= 0) or np.any(r < 0) or np.any(g < 0):
            raise ChannelError(f"cable {self.name or '?'} has non-physical parameters in the evaluated band")
        return r, l, g, c

    @property
    def is_constant(self) -> bool:
        return not any(callable(getattr(self, k)) for k in ("R", "L", "G", "C"))

    @property
    def nominal_velocity(self) -> float:
        """``1/sqrt(L'C')`` for constant parameters."""
        if callable(self.L) or callable(self.C):
            raise ChannelError("nominal velocity needs constant L' and C'; use phase_velocity(f)")
        return 1.0 / math.sqrt(self.L * self.C)

    def phase_velocity(self, f) -> np.ndarray:
        f = _freqs(f)
        _, gamma = secondary_params(self, f)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = 2 * np.pi * f / np.imag(gamma)
        return v

    def to_dict(self) -> dict:
        doc = {"name": self.name}
        for k in ("R", "L", "G", "C"):
            v = getattr(self, k)
            doc[k] = repr(v) if callable(v) else float(v)
        return doc


def secondary_params(cable: CableParams, f):
    """Characteristic impedance and propagation constant at ``f``.

    ``Z0 = sqrt(Z'/Y')`` and ``gamma = sqrt(Z' Y')`` with ``Z' = R' + j w L'``
    and ``Y' = G' + j w C'``, principal branch (``Re gamma >= 0``). At DC a
    lossless line has ``Z0 = sqrt(L'/C')``; a line with ``R' > 0`` and
    ``G' = 0`` has an unbounded DC ``Z0`` (returned as inf).
    """
    f = _freqs(f)
    r, l, g, c = cable.at(f)
    w = 2 * np.pi * f
    zs = r + 1j * w * l
    ys = g + 1j * w * c
    gamma = np.sqrt(zs * ys)
    with np.errstate(divide="ignore", invalid="ignore"):
        z0 = np.sqrt(zs / ys)
    both_zero = (zs == 0) & (ys == 0)
    z0 = np.where(both_zero, np.sqrt(l / c) + 0j, z0)
    z0 = np.where((ys == 0) & (zs != 0), OPEN, z0)
    # keep Re Z0 >= 0 on the principal branch
    z0 = np.where(np.real(z0) < 0, -z0, z0)
    return _ret(z0), _ret(gamma)


# -- loads ----------------------------------------------------------------------

@dataclass(frozen=True)
class Load:
    """Lumped impedance: constant, open, short, series RLC or a callable of f."""

    model: str = "constant"
    value: complex = 0j
    R: float = 0.0
    L: float = 0.0
    C: float | None = None
    func: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.model not in ("constant", "open", "short", "rlc", "function"):
            raise ChannelError(f"unknown load model {self.model!r}")
        if self.model == "rlc" and (self.R < 0 or self.L < 0 or (self.C is not None and self.C <= 0)):
            raise ChannelError("RLC load needs R, L >= 0 and C > 0 (or no capacitor)")
        if self.model == "function" and self.func is None:
            raise ChannelError("function load needs a callable")

    @classmethod
    def constant(cls, z: Number) -> "Load":
        z = complex(z)
        return cls("open") if math.isinf(abs(z)) else cls("constant", z)

    @classmethod
    def open(cls) -> "Load":
        return cls("open")

    @classmethod
    def short(cls) -> "Load":
        return cls("short")

    @classmethod
    def rlc(cls, R: float = 0.0, L: float = 0.0, C: float | None = None) -> "Load":
        """Series R-L-C branch; ``C=None`` leaves the capacitor out."""
        return cls("rlc", R=R, L=L, C=C)

    @classmethod
    def from_function(cls, func: Callable) -> "Load":
        return cls("function", func=func)

    def impedance(self, f) -> np.ndarray:
        f = _freqs(f)
        if self.model == "open":
            z = np.full(f.shape, OPEN)
        elif self.model == "short":
            z = np.zeros(f.shape, complex)
        elif self.model == "constant":
            z = np.full(f.shape, complex(self.value))
        elif self.model == "function":
            z = np.broadcast_to(np.asarray(self.func(f), dtype=complex), f.shape).copy()
        else:
            w = 2 * np.pi * f
            z = self.R + 1j * w * self.L + 0j
            if self.C is not None:
                with np.errstate(divide="ignore"):
                    zc = np.where(w > 0, 1.0 / (1j * w * self.C + (w == 0)), 0j)
                z = np.where(w > 0, z + zc, OPEN)
        finite = np.isfinite(z)
        if np.any(np.real(z[finite]) < -1e-12 * np.maximum(1.0, np.abs(z[finite]))):
            raise ChannelError(f"load {self.model!r} is not passive (negative resistance) in the evaluated band")
        return z

    def to_dict(self) -> dict:
        if self.model == "constant":
            return {"model": "constant", "params": {"re": self.value.real, "im": self.value.imag}}
        if self.model == "rlc":
            return {"model": "rlc", "params": {"R": self.R, "L": self.L, "C": self.C}}
        if self.model == "function":
            return {"model": "function", "params": {"repr": repr(self.func)}}
        return {"model": self.model}


# -- topology ---------------------------------------------------------------------

@dataclass(frozen=True)
class Section:
    length: float
    cable: CableParams

    def __post_init__(self):
        if not (np.isfinite(self.length) and self.length > 0):
            raise ChannelError(f"section length must be positive, got {self.length!r}")


@dataclass(frozen=True)
class Branch:
    """Stub line hanging off the end of main-line section ``at_junction``."""

    at_junction: int
    length: float
    cable: CableParams
    load: Load = field(default_factory=Load.open)

    def __post_init__(self):
        if not (np.isfinite(self.length) and self.length > 0):
            raise ChannelError(f"branch length must be positive, got {self.length!r}")


@dataclass(frozen=True)
class Fault:
    """Fault impedance at ``offset`` metres into main-line section ``section``."""

    section: int
    offset: float
    impedance: Load
    kind: str = "shunt"

    def __post_init__(self):
        if self.kind not in ("shunt", "series"):
            raise ChannelError(f"fault kind must be 'shunt' or 'series', got {self.kind!r}")
        if not self.offset >= 0:
            raise ChannelError(f"fault offset must be non-negative, got {self.offset!r}")


@dataclass(frozen=True)
class NetworkTopology:
    """Main line of sections, stubs at junctions, a far-end termination and an optional fault.

    ``z_plc`` is the reflectometer output impedance. ``None`` matches it to
    the characteristic impedance of the first section at every frequency.
    """

    sections: tuple[Section, ...]
    branches: tuple[Branch, ...] = ()
    termination: Load = field(default_factory=Load.open)
    z_plc: Number | Load | None = None
    fault: Fault | None = None

    def __post_init__(self):
        object.__setattr__(self, "sections", tuple(self.sections))
        object.__setattr__(self, "branches", tuple(self.branches))
        if not self.sections:
            raise ChannelError("topology needs at least one section")
        n = len(self.sections)
        for b in self.branches:
            if not 0 <= b.at_junction < n:
                raise ChannelError(f"branch junction {b.at_junction} outside 0..{n - 1}")
        if self.fault is not None:
            fl = self.fault
            if not 0 <= fl.section < n:
                raise ChannelError(f"fault section {fl.section} outside 0..{n - 1}")
            if fl.offset > self.sections[fl.section].length:
                raise ChannelError("fault offset lies beyond its host section")

    def with_fault(self, fault: Fault | None) -> "NetworkTopology":
        return NetworkTopology(self.sections, self.branches, self.termination, self.z_plc, fault)

    @property
    def main_length(self) -> float:
        return float(sum(s.length for s in self.sections))

    def fault_distance(self) -> float | None:
        if self.fault is None:
            return None
        return float(sum(s.length for s in self.sections[: self.fault.section]) + self.fault.offset)

    def source_impedance(self, f) -> np.ndarray:
        f = _freqs(f)
        if self.z_plc is None:
            z0, _ = secondary_params(self.sections[0].cable, f)
            return np.broadcast_to(np.asarray(z0, complex), f.shape)
        if isinstance(self.z_plc, Load):
            return self.z_plc.impedance(f)
        return np.full(f.shape, complex(self.z_plc))

    def slowest_velocity(self, f_ref: float) -> float:
        cables = [s.cable for s in self.sections] + [b.cable for b in self.branches]
        return float(min(np.min(c.phase_velocity(np.array([f_ref]))) for c in cables))

    def longest_path(self) -> float:
        """Longest one-way distance from the source to any discontinuity."""
        edges = np.cumsum([s.length for s in self.sections])
        best = float(edges[-1])
        for b in self.branches:
            best = max(best, float(edges[b.at_junction]) + b.length)
        return best

    def to_dict(self) -> dict:
        doc = {
            "sections": [{"length_m": s.length, "cable": s.cable.to_dict()} for s in self.sections],
            "branches": [{"at_junction": b.at_junction, "length_m": b.length, "cable": b.cable.to_dict(),
                          "load": b.load.to_dict()} for b in self.branches],
            "termination": self.termination.to_dict(),
        }
        if isinstance(self.z_plc, Load):
            doc["z_plc"] = self.z_plc.to_dict()
        elif self.z_plc is None:
            doc["z_plc"] = "matched"
        else:
            z = complex(self.z_plc)
            doc["z_plc"] = {"re": z.real, "im": z.imag}
        if self.fault is not None:
            doc["fault"] = {"section": self.fault.section, "offset_m": self.fault.offset,
                            "kind": self.fault.kind, "impedance": self.fault.impedance.to_dict()}
        return doc

    def hash(self) -> str:
        return _io.input_hash(self.to_dict())


# -- impedance algebra --------------------------------------------------------------

def _to_gamma(z, z0):
    with np.errstate(invalid="ignore", divide="ignore"):
        g = (z - z0) / (z + z0)
    g = np.where(np.isinf(z), 1.0 + 0j, g)
    g = np.where(np.isinf(z0) & ~np.isinf(z), -1.0 + 0j, g)
    return g


def _from_gamma(g, z0):
    den = 1 - g
    with np.errstate(invalid="ignore", divide="ignore"):
        z = z0 * (1 + g) / den
    return np.where(np.abs(den) < 1e-15, OPEN, z)


def line_input_impedance(z0, gamma, length: float, z_term):
    """Input impedance of a line of ``length`` metres closed by ``z_term``.

    Equivalent to ``Z0 (Z_t + Z0 tanh gl) / (Z0 + Z_t tanh gl)``. Where
    that expression is singular the result is ``inf`` (unbounded sentinel).
    """
    z0 = np.asarray(z0, complex)
    gamma = np.asarray(gamma, complex)
    z_term = np.asarray(z_term, complex)
    if length == 0:
        return _ret(np.broadcast_to(z_term, np.broadcast(z0, z_term).shape).copy())
    g = _to_gamma(z_term, z0) * np.exp(-2 * gamma * length)
    return _ret(_from_gamma(g, z0))


def parallel(z1, z2):
    z1 = np.asarray(z1, complex)
    z2 = np.asarray(z2, complex)
    with np.errstate(invalid="ignore", divide="ignore"):
        z = z1 * z2 / (z1 + z2)
    z = np.where(np.isinf(z1), z2, z)
    z = np.where(np.isinf(z2), z1, z)
    z = np.where((z1 == 0) | (z2 == 0), 0j, z)
    return z


def _series(z1, z2):
    return np.where(np.isinf(z1) | np.isinf(z2), OPEN, z1 + z2)


def _through(section_cable, length, z, f):
    z0, gamma = secondary_params(section_cable, f)
    return line_input_impedance(np.asarray(z0), np.asarray(gamma), length, z)


def input_impedance(topology: NetworkTopology, f):
    """Impedance seen at the source terminals of ``topology`` at ``f``."""
    f = _freqs(f)
    scalar = f.ndim == 0
    f = np.atleast_1d(f)
    z = topology.termination.impedance(f)
    for i in range(len(topology.sections) - 1, -1, -1):
        for b in topology.branches:
            if b.at_junction == i:
                zb = _through(b.cable, b.length, b.load.impedance(f), f)
                z = parallel(z, zb)
        sec = topology.sections[i]
        fault = topology.fault if topology.fault is not None and topology.fault.section == i else None
        if fault is None:
            z = _through(sec.cable, sec.length, z, f)
            continue
        z = _through(sec.cable, sec.length - fault.offset, z, f)
        zf = fault.impedance.impedance(f)
        z = parallel(z, zf) if fault.kind == "shunt" else _series(z, zf)
        z = _through(sec.cable, fault.offset, z, f)
    z = np.asarray(z, complex)
    return complex(z[0]) if scalar else z


def reflection_coefficient(z_in, z_plc):
    """``(Z_in - Z_PLC) / (Z_in + Z_PLC)``; an open input gives +1."""
    z_in = np.asarray(z_in, complex)
    z_plc = np.asarray(z_plc, complex)
    den = z_in + z_plc
    if np.any((den == 0) & ~np.isinf(z_in)):
        raise ChannelError("Z_in + Z_PLC vanishes: reflection coefficient undefined")
    with np.errstate(invalid="ignore"):
        g = (z_in - z_plc) / den
    g = np.where(np.isinf(z_in), 1.0 + 0j, g)
    return _ret(g)


# -- frequency grid / impulse response ------------------------------------------------

@dataclass(frozen=True)
class FrequencyGrid:
    """``n_f`` uniformly spaced frequencies from 0 to ``f_max`` inclusive."""

    f_max: float
    n_f: int = DEFAULT_GRID_POINTS + 1

    def __post_init__(self):
        if not (self.f_max > 0 and np.isfinite(self.f_max)):
            raise ChannelError("f_max must be positive")
        if self.n_f < 2:
            raise ChannelError("frequency grid needs at least 2 points")

    @classmethod
    def for_band(cls, B: float, n_f: int = DEFAULT_GRID_POINTS + 1, factor: float = DEFAULT_BAND_FACTOR) -> "FrequencyGrid":
        """Grid reaching ``factor * B`` (default 4B)."""
        return cls(factor * B, n_f)

    @property
    def df(self) -> float:
        return self.f_max / (self.n_f - 1)

    @property
    def freqs(self) -> np.ndarray:
        return np.linspace(0.0, self.f_max, self.n_f)

    @property
    def sample_rate(self) -> float:
        return 2.0 * self.f_max

    @property
    def n_time(self) -> int:
        return 2 * (self.n_f - 1)

    @property
    def duration(self) -> float:
        return 1.0 / self.df


def gamma_in(topology: NetworkTopology, grid: FrequencyGrid, z_plc=None) -> np.ndarray:
    """Input reflection coefficient on ``grid``.

    A non-finite DC value (purely reactive network at f = 0) is replaced by
    the real part of the first non-zero frequency and logged.
    """
    f = grid.freqs
    zp = topology.source_impedance(f) if z_plc is None else np.broadcast_to(np.asarray(z_plc, complex), f.shape)
    zin = np.asarray(input_impedance(topology, f), complex)
    g = np.empty(f.shape, complex)
    g[1:] = reflection_coefficient(zin[1:], zp[1:])
    try:
        with np.errstate(invalid="ignore", divide="ignore"):
            g[0] = reflection_coefficient(zin[0], zp[0])
    except ChannelError:
        g[0] = np.nan
    if not np.isfinite(g[0]) or abs(g[0].imag) > 1e-12:
        log.warning("reflection coefficient undefined or complex at DC; extrapolated from %.6g Hz", f[1])
        g[0] = g[1].real
    if not np.all(np.isfinite(g)):
        raise ChannelError("reflection coefficient is not finite on the frequency grid")
    return g


def impulse_response(topology: NetworkTopology, grid: FrequencyGrid, z_plc=None, *, check_aliasing: bool = True) -> SampledSignal:
    """Reflection-channel taps ``h = IDFT(Gamma_in)`` at rate ``2 f_max``.

    ``Gamma`` is extended Hermitian-symmetrically, so ``h`` is real and
    convolving a pulse sampled at the same rate with ``h`` gives the echo.

    Raises:
        AliasingError: the farthest first echo arrives after ``1/df``.
    """
    if check_aliasing:
        v = topology.slowest_velocity(grid.f_max)
        delay = 2.0 * topology.longest_path() / v
        if delay >= grid.duration:
            raise AliasingError(delay, grid.duration, 1.0 / delay)
    g = gamma_in(topology, grid, z_plc)
    h = np.fft.irfft(g, n=grid.n_time)
    meta = {"topology_hash": topology.hash(), "f_max_hz": grid.f_max, "n_f": grid.n_f}
    return SampledSignal(h, grid.sample_rate, 0.0, meta)


def export_gamma_csv(path, f: np.ndarray, gamma: np.ndarray, header: Mapping | None = None) -> None:
    g = np.asarray(gamma, complex)
    _io.write_csv(path, {"f_hz": np.asarray(f, float), "re": g.real, "im": g.imag}, header)


# -- topology documents -------------------------------------------------------------

_LOAD_SCHEMA = {
    "type": "object",
    "required": ["model"],
    "properties": {
        "model": {"enum": ["constant", "rlc", "open", "short"]},
        "params": {"type": "object"},
    },
    "additionalProperties": False,
}

_COMPLEX_SCHEMA = {
    "oneOf": [
        {"type": "number"},
        {"type": "object", "required": ["re"], "properties": {"re": {"type": "number"}, "im": {"type": "number"}},
         "additionalProperties": False},
    ]
}

_CABLE_SCHEMA = {
    "type": "object",
    "properties": {
        "preset": {"type": "string"},
        "z0": {"type": "number", "exclusiveMinimum": 0},
        "v_p": {"type": "number", "exclusiveMinimum": 0},
        "R": {"type": "number", "minimum": 0},
        "L": {"type": "number", "exclusiveMinimum": 0},
        "G": {"type": "number", "minimum": 0},
        "C": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}

TOPOLOGY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["sections"],
    "properties": {
        "cables": {"type": "object", "additionalProperties": _CABLE_SCHEMA},
        "sections": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["length_m", "cable_ref"],
                "properties": {"length_m": {"type": "number", "exclusiveMinimum": 0}, "cable_ref": {"type": "string"}},
                "additionalProperties": False,
            },
        },
        "branches": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["at_junction", "length_m", "load"],
                "properties": {
                    "at_junction": {"type": "integer", "minimum": 0},
                    "length_m": {"type": "number", "exclusiveMinimum": 0},
                    "cable_ref": {"type": "string"},
                    "load": _LOAD_SCHEMA,
                },
                "additionalProperties": False,
            },
        },
        "termination": _LOAD_SCHEMA,
        "z_plc": {"oneOf": [{"const": "matched"}, _COMPLEX_SCHEMA]},
        "fault": {
            "type": "object",
            "required": ["section", "offset_m", "impedance"],
            "properties": {
                "section": {"type": "integer", "minimum": 0},
                "offset_m": {"type": "number", "minimum": 0},
                "kind": {"enum": ["shunt", "series"]},
                "impedance": {"oneOf": [_LOAD_SCHEMA, _COMPLEX_SCHEMA]},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


def _complex(doc) -> complex:
    if isinstance(doc, (int, float)):
        return complex(doc)
    return complex(doc["re"], doc.get("im", 0.0))


def _load(doc, where: str) -> Load:
    if not isinstance(doc, dict):
        return Load.constant(_complex(doc))
    model = doc["model"]
    params = doc.get("params", {})
    try:
        if model == "constant":
            if "value" in params:
                return Load.constant(_complex(params["value"]))
            return Load.constant(complex(params["re"], params.get("im", 0.0)))
        if model == "rlc":
            return Load.rlc(params.get("R", 0.0), params.get("L", 0.0), params.get("C"))
        return Load(model)
    except (KeyError, TypeError, ChannelError) as exc:
        raise ChannelError(f"{where}: invalid load parameters ({exc})") from None


def _cable(doc: dict, name: str, presets: Mapping[str, CableParams]) -> CableParams:
    if "preset" in doc:
        key = doc["preset"]
        if key not in presets:
            raise ChannelError(f"cables/{name}: unknown preset {key!r}")
        return presets[key]
    if "z0" in doc or "v_p" in doc:
        if not ("z0" in doc and "v_p" in doc):
            raise ChannelError(f"cables/{name}: give both z0 and v_p")
        return CableParams.lossless(doc["z0"], doc["v_p"], name)
    try:
        return CableParams(doc.get("R", 0.0), doc["L"], doc.get("G", 0.0), doc["C"], name)
    except KeyError as exc:
        raise ChannelError(f"cables/{name}: missing {exc.args[0]}") from None


def _default_cables() -> dict[str, CableParams]:
    from .scenarios import CABLE_PRESETS  # local import: scenarios builds on this module
    lib = {}
    for key, preset in CABLE_PRESETS.items():
        lib[key] = preset.params
        lib[key.lower()] = preset.params
    return lib


def parse_topology(doc: Mapping, cables: Mapping[str, CableParams] | None = None) -> NetworkTopology:
    """Build a topology from its JSON document.

    Cable references resolve first against the document's ``cables`` table,
    then against ``cables`` (default: the shipped LV/MV presets).

    Raises:
        ChannelError: schema violation, with the offending field path.
    """
    validator = jsonschema.Draft202012Validator(TOPOLOGY_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = []
        for e in errors[:5]:
            path = "/".join(str(p) for p in e.absolute_path) or "<root>"
            msgs.append(f"field {path}: {e.message}")
        raise ChannelError("invalid topology: " + "; ".join(msgs))
    presets = dict(_default_cables() if cables is None else cables)
    lib = dict(presets)
    for name, cdoc in doc.get("cables", {}).items():
        lib[name] = _cable(cdoc, name, presets)

    def ref(name, where):
        if name not in lib:
            raise ChannelError(f"{where}: unknown cable_ref {name!r}")
        return lib[name]

    try:
        sections = [Section(s["length_m"], ref(s["cable_ref"], f"sections/{i}/cable_ref"))
                    for i, s in enumerate(doc["sections"])]
        branches = []
        for i, b in enumerate(doc.get("branches", [])):
            cable = ref(b["cable_ref"], f"branches/{i}/cable_ref") if "cable_ref" in b else sections[0].cable
            branches.append(Branch(b["at_junction"], b["length_m"], cable, _load(b["load"], f"branches/{i}/load")))
        term = _load(doc["termination"], "termination") if "termination" in doc else Load.open()
        zp = doc.get("z_plc", "matched")
        z_plc = None if zp == "matched" else _complex(zp)
        fault = None
        if "fault" in doc:
            fd = doc["fault"]
            fault = Fault(fd["section"], fd["offset_m"], _load(fd["impedance"], "fault/impedance"), fd.get("kind", "shunt"))
        return NetworkTopology(tuple(sections), tuple(branches), term, z_plc, fault)
    except ChannelError as exc:
        raise ChannelError(f"invalid topology: {exc}") from None


def load_topology(path, cables: Mapping[str, CableParams] | None = None) -> NetworkTopology:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChannelError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_topology(doc, cables)
