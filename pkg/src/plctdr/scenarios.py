"""Regulatory bands, cable presets and the published-table harness.

Every table cell is recomputed from the pulse, ACF and metric modules and
compared with a stored expectation. The expectations, with per-cell
tolerances, live in ``data/expectations.csv`` so any mismatch is visible in
one place.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Iterable

import numpy as np

from . import io as _io
from .channel import CableParams, NetworkTopology, parse_topology
from .metrics import (
    Convention,
    analytic_zero_crossing,
    max_unambiguous_range,
    metrics_report,
    pcr,
    rayleigh_resolution,
    repetition_interval,
    zero_crossing,
)
from .pulses import DEFAULT_SUBCARRIERS, DEFAULT_SYMBOL_SEED, Family, duration_for_bandwidth

FAMILY_ORDER = (Family.HS_OFDM, Family.UWB1, Family.UWB2, Family.CSS)


@dataclass(frozen=True)
class RegulatoryBand:
    name: str
    B: float
    kind: str
    label: str


BANDS = {
    "CENELEC": RegulatoryBand("CENELEC", 148.5e3, "NB", "CENELEC"),
    "ARIB": RegulatoryBand("ARIB", 450e3, "NB", "ARIB"),
    "FCC": RegulatoryBand("FCC", 490e3, "NB", "FCC"),
    "EU_BB": RegulatoryBand("EU_BB", 30e6, "BB", "European"),
    "BR_BB": RegulatoryBand("BR_BB", 50e6, "BB", "Brazilian"),
    "HOMEPLUG_AV2": RegulatoryBand("HOMEPLUG_AV2", 86e6, "BB", "HomePlug"),
}
NB_BANDS = ("CENELEC", "ARIB", "FCC")
BB_BANDS = ("EU_BB", "BR_BB", "HOMEPLUG_AV2")

_BAND_ALIASES = {
    "european": "EU_BB", "eu": "EU_BB",
    "brazilian": "BR_BB", "br": "BR_BB",
    "homeplug": "HOMEPLUG_AV2", "homeplug-av2": "HOMEPLUG_AV2", "av2": "HOMEPLUG_AV2",
}


def preset_band(name: str) -> RegulatoryBand:
    key = str(name).strip()
    key = _BAND_ALIASES.get(key.lower(), key.upper().replace("-", "_"))
    try:
        return BANDS[key]
    except KeyError:
        raise KeyError(f"unknown band {name!r}; known: {', '.join(BANDS)}") from None


@dataclass(frozen=True)
class CablePreset:
    name: str
    params: CableParams
    v_p: float
    z0: float


# Lossless placeholders: only v_p is published; Z0 is a documented choice.
CABLE_PRESETS = {
    "LV": CablePreset("LV", CableParams.lossless(50.0, 1.50e8, "LV"), 1.50e8, 50.0),
    "MV": CablePreset("MV", CableParams.lossless(400.0, 2.56e8, "MV"), 2.56e8, 400.0),
}


def preset_cable(name: str) -> CablePreset:
    try:
        return CABLE_PRESETS[str(name).strip().upper()]
    except KeyError:
        raise KeyError(f"unknown cable {name!r}; known: {', '.join(CABLE_PRESETS)}") from None


D_MAX = {"LV": 1e3, "MV": 10e3}
DELTA_T_P_PRESETS = (0.01e-3, 0.1e-3, 1e-3, 10e-3)
SWEEP_RANGES = {"nb": (1e3, 500e3), "bb": (1.7e6, 86e6)}
# Table 2 values do not depend on B for a fixed N; any band gives the same dB.
TABLE2_BANDWIDTH = 1e6


# -- expectations ---------------------------------------------------------------------

@dataclass(frozen=True)
class Expectation:
    table: int
    row: str
    col: str
    expected: float
    tolerance: float
    abs_tolerance: float
    unit: str


def load_expectations(path=None) -> list[Expectation]:
    if path is None:
        text = resources.files("plctdr").joinpath("data/expectations.csv").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    rows = csv.DictReader(line for line in text.splitlines() if line and not line.startswith("#"))
    return [Expectation(int(r["table"]), r["row"], r["col"], float(r["expected"]), float(r["tolerance"]),
                        float(r["abs_tolerance"]), r["unit"]) for r in rows]


@dataclass(frozen=True)
class CellResult:
    table: int
    row: str
    col: str
    computed: float
    expected: float
    rel_err: float
    tolerance: float
    abs_tolerance: float
    passed: bool


def check_cell(exp: Expectation, computed: float) -> CellResult:
    diff = abs(computed - exp.expected)
    rel = diff / abs(exp.expected) if exp.expected else math.inf * (diff > 0)
    ok = bool(diff <= max(exp.tolerance * abs(exp.expected), exp.abs_tolerance))
    return CellResult(exp.table, exp.row, exp.col, computed, exp.expected, rel, exp.tolerance, exp.abs_tolerance, ok)


@dataclass(frozen=True)
class TableReport:
    table: int
    convention: str
    cells: tuple[CellResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cells)

    @property
    def n_failed(self) -> int:
        return sum(not c.passed for c in self.cells)

    def rows(self) -> list[dict]:
        return [{"table": c.table, "row": c.row, "col": c.col, "computed": c.computed, "expected": c.expected,
                 "rel_err": c.rel_err, "pass": c.passed} for c in self.cells]

    def to_csv(self, path, header: dict | None = None) -> None:
        hdr = {"table": self.table, "convention": self.convention}
        hdr.update(header or {})
        _io.write_rows(path, ["table", "row", "col", "computed", "expected", "rel_err", "pass"], self.rows(), hdr)


# -- cell computation ------------------------------------------------------------------

def _spec(family, band: str, n=DEFAULT_SUBCARRIERS, seed=DEFAULT_SYMBOL_SEED):
    return duration_for_bandwidth(family, BANDS[band].B, n=n, seed=seed)


def compute_cell(table: int, row: str, col: str, *, convention=Convention.FULL, n: int = DEFAULT_SUBCARRIERS,
                 seed: int | None = DEFAULT_SYMBOL_SEED, _cache: dict | None = None) -> float:
    """Recompute one published cell in its printed unit (us, m, dB or ratio)."""
    if table == 1:
        spec = _spec(row, "CENELEC", n, seed)
        return pcr(spec.T, analytic_zero_crossing(spec))
    if table == 2:
        cache = {} if _cache is None else _cache
        key = ("t2", row, n, seed)
        if key not in cache:
            spec = duration_for_bandwidth(row, TABLE2_BANDWIDTH, n=n, seed=seed)
            cache[key] = metrics_report(spec, CABLE_PRESETS["LV"].v_p)
        rep = cache[key]
        return rep.pslr_db if col == "pslr_db" else rep.islr_db
    if table == 3:
        return _spec(row, col, n, seed).T * 1e6
    cable, family = row.split(":")
    preset = CABLE_PRESETS[cable]
    spec = _spec(family, col, n, seed)
    if table == 4:
        return rayleigh_resolution(analytic_zero_crossing(spec), preset.v_p, convention)
    if table == 5:
        return repetition_interval(D_MAX[cable], spec.T, preset.v_p) * 1e6
    raise ValueError(f"unknown table {table!r}")


def reproduce_table(table_id: int, convention=None, *, n: int = DEFAULT_SUBCARRIERS,
                    seed: int | None = DEFAULT_SYMBOL_SEED, expectations: Iterable[Expectation] | None = None) -> TableReport:
    """Recompute every cell of a published table and compare it with its expectation.

    Resolution cells use the closed-form first zero crossings and the FULL
    convention unless ``convention`` says otherwise; HALF is the audit mode.
    """
    if table_id not in (1, 2, 3, 4, 5):
        raise ValueError(f"table id must be 1..5, got {table_id!r}")
    conv = Convention.parse(convention or Convention.FULL)
    exps = [e for e in (expectations or load_expectations()) if e.table == table_id]
    cache: dict = {}
    cells = tuple(check_cell(e, compute_cell(table_id, e.row, e.col, convention=conv, n=n, seed=seed, _cache=cache))
                  for e in exps)
    return TableReport(table_id, conv.value, cells)


# -- sweeps -------------------------------------------------------------------------------

def sweep(family, band_range=SWEEP_RANGES["nb"], n_points: int = 60, *, n: int = DEFAULT_SUBCARRIERS,
          delta_T_p: Iterable[float] = DELTA_T_P_PRESETS, zero_crossing_method: str = "analytic") -> list[dict]:
    """Log-spaced B sweep: duration, resolution on LV/MV and d_max per repetition interval.

    ``d_max`` is NaN where the repetition interval is shorter than the pulse.
    """
    if isinstance(band_range, str):
        band_range = SWEEP_RANGES[band_range.lower()]
    lo, hi = band_range
    if n_points < 1 or not (0 < lo <= hi):
        raise ValueError("sweep needs n_points >= 1 and 0 < B_min <= B_max")
    fam = Family.parse(family)
    rows = []
    for B in np.logspace(math.log10(lo), math.log10(hi), n_points):
        spec = duration_for_bandwidth(fam, float(B), n=n)
        td = zero_crossing(spec, zero_crossing_method)
        row = {"family": fam.value, "B_hz": float(B), "T_s": spec.T, "T_delta_s": td}
        for cable, preset in CABLE_PRESETS.items():
            row[f"delta_{cable.lower()}_m"] = rayleigh_resolution(td, preset.v_p, Convention.HALF)
        for dtp in delta_T_p:
            for cable, preset in CABLE_PRESETS.items():
                key = f"dmax_{cable.lower()}_m@{dtp * 1e3:g}ms"
                row[key] = max_unambiguous_range(dtp, spec.T, preset.v_p) if dtp >= spec.T else math.nan
        rows.append(row)
    return rows


def write_sweep(path, rows: list[dict], header: dict | None = None) -> None:
    if not rows:
        raise ValueError("empty sweep")
    _io.write_rows(path, list(rows[0]), rows, header)


# -- demo network -------------------------------------------------------------------------

def demo_topology_doc() -> dict:
    return json.loads(resources.files("plctdr").joinpath("data/demo_lv.json").read_text())


def demo_topology() -> NetworkTopology:
    """LV single 1000 m line, matched at both ends, 10 ohm shunt fault at 500 m."""
    return parse_topology(demo_topology_doc())


__all__ = [
    "BANDS", "CABLE_PRESETS", "CablePreset", "CellResult", "D_MAX", "DELTA_T_P_PRESETS", "Expectation",
    "RegulatoryBand", "SWEEP_RANGES", "TableReport", "check_cell", "compute_cell", "demo_topology",
    "load_expectations", "preset_band", "preset_cable", "reproduce_table", "sweep", "write_sweep",
]

