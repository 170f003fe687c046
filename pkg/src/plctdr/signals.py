"""Uniformly sampled real signals."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as _io


@dataclass(frozen=True)
class SampledSignal:
    """Real-valued time series on a uniform grid.

    Attributes:
        samples: sample values (copied into a read-only float array).
        sample_rate: samples per second.
        t0: time of the first sample, seconds.
    """

    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float, copy=True).reshape(-1)
        if arr.size == 0:
            raise ValueError("samples: sequence must be non-empty")
        if not (np.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise ValueError(f"sample_rate: must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples: values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))
        object.__setattr__(self, "t0", float(self.t0))

    def __len__(self):
        return self.samples.size

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) / self.sample_rate

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    @property
    def energy(self) -> float:
        """Discrete energy, sum of squares divided by the sample rate."""
        return float(np.dot(self.samples, self.samples) / self.sample_rate)

    @property
    def norm(self) -> float:
        """Plain 2-norm of the sample vector."""
        return float(np.sqrt(np.dot(self.samples, self.samples)))

    def scaled(self, factor: float) -> "SampledSignal":
        return SampledSignal(self.samples * factor, self.sample_rate, self.t0, dict(self.meta))

    def to_csv(self, path: str | Path, header: dict | None = None) -> None:
        """Write two columns ``t_s, amplitude`` with 12 significant digits."""
        hdr = dict(header or {})
        hdr.setdefault("sample_rate_hz", self.sample_rate)
        _io.write_csv(path, {"t_s": self.times, "amplitude": self.samples}, hdr)

    @classmethod
    def from_csv(cls, path: str | Path) -> "SampledSignal":
        header, cols = _io.read_csv(path)
        t = cols["t_s"]
        if "sample_rate_hz" in header:
            rate = float(header["sample_rate_hz"])
        elif t.size > 1:
            rate = 1.0 / float(np.mean(np.diff(t)))
        else:
            raise ValueError(f"{path}: cannot infer sample rate from one sample")
        return cls(cols["amplitude"], rate, float(t[0]))
