"""Batch command-line front end.

Every command writes plain-text outputs into ``--out`` (default: current
directory) and echoes the main key/value document on stdout. Each file
starts with ``#`` header lines carrying the toolkit version, the command,
the seed and a hash of the inputs, so reruns are byte-identical.

Exit codes: 0 success, 1 usage, 2 validation, 3 numerical guard,
4 table reproduction failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from . import io as _io
from .autocorr import acf_curve, acf_function
from .channel import FrequencyGrid, load_topology, parse_topology
from .errors import NumericalGuardError
from .metrics import Convention, metrics_report, pslr, zero_crossing
from .pulses import DEFAULT_SUBCARRIERS, DEFAULT_SYMBOL_SEED, Family, PulseSpec, duration_for_bandwidth, \
    occupied_bandwidth, transmit_signal
from .reflectometry import Reflectogram, fault_scan, locate_fault, suggest_threshold
from .scenarios import demo_topology_doc, preset_band, preset_cable, reproduce_table, sweep, write_sweep

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_GUARD, EXIT_REPRODUCTION = 0, 1, 2, 3, 4

log = logging.getLogger("plctdr")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for validation here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed_arg(text: str):
    return None if text.lower() == "none" else int(text)


def _pulse_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_argument_group("pulse")
    g.add_argument("--family", required=required, help="hs-ofdm, uwb1, uwb2 or css")
    g.add_argument("--band", default="CENELEC", help="regulatory band preset (default CENELEC)")
    g.add_argument("--bandwidth", type=float, help="occupied bandwidth B in Hz; overrides --band")
    g.add_argument("--n", type=int, default=DEFAULT_SUBCARRIERS, help="HS-OFDM subcarriers / CSS N = BT")
    g.add_argument("--sigma", type=float, help="UWB Gaussian width in s; overrides the band")
    g.add_argument("--mu", type=float, help="CSS chirp rate in Hz/s (needs --t)")
    g.add_argument("--t", type=float, help="duration T in s for HS-OFDM or CSS")
    g.add_argument("--symbol-seed", type=_seed_arg, default=DEFAULT_SYMBOL_SEED,
                   help="HS-OFDM BPSK seed; 'none' for all-ones symbols")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--format", choices=("csv", "kv"), default="kv", help="format of the summary document")
    p.add_argument("--seed", type=_seed_arg, default=0, help="noise seed")
    p.add_argument("--log-level", default="WARNING")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="plctdr", description="Pulse-compression TDR for power line networks.")
    parser.add_argument("--version", action="version", version=f"plctdr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("pulse", help="sample a pulse and write its spec")
    _pulse_args(p)
    _common(p)
    p.add_argument("--oversampling", type=float, default=8.0)

    p = sub.add_parser("acf", help="evaluate the closed-form autocorrelation")
    _pulse_args(p)
    _common(p)
    p.add_argument("--points", type=int, default=10_000)

    p = sub.add_parser("metrics", help="resolution, PCR, PSLR, ISLR and range")
    _pulse_args(p)
    _common(p)
    p.add_argument("--cable", default="LV")
    p.add_argument("--convention", choices=("half", "full"), default="half")
    p.add_argument("--delta-t-p", type=float, help="pulse repetition interval in s")
    p.add_argument("--zero-crossing", choices=("analytic", "numeric"), default="analytic",
                   help="how T_delta is obtained (sidelobes always use the numeric crossing)")

    p = sub.add_parser("simulate", help="fault scan over a network topology")
    _pulse_args(p)
    _common(p)
    p.add_argument("--topology", help="topology JSON file (default: shipped LV demo)")
    p.add_argument("--snr-db", type=float, help="SNR of the faulted echo; noise-free when omitted")
    p.add_argument("--xi", type=float, help="detection threshold; default halfway above the PSLR level")
    p.add_argument("--n-f", type=int, default=2**16 + 1, help="frequency grid points 0..4B")

    p = sub.add_parser("tables", help="reproduce published tables")
    p.add_argument("--id", type=int, action="append", choices=range(1, 6), help="table id, repeatable (default all)")
    p.add_argument("--convention", choices=("half", "full"), default="full")
    p.add_argument("--n", type=int, default=DEFAULT_SUBCARRIERS)
    p.add_argument("--symbol-seed", type=_seed_arg, default=DEFAULT_SYMBOL_SEED)
    _common(p)

    p = sub.add_parser("sweep", help="bandwidth sweep of duration, resolution and range")
    p.add_argument("--family", required=True)
    p.add_argument("--range", choices=("nb", "bb"), default="nb")
    p.add_argument("--points", type=int, default=60)
    p.add_argument("--n", type=int, default=DEFAULT_SUBCARRIERS)
    _common(p)
    return parser


# -- helpers ---------------------------------------------------------------------------

def build_spec(args) -> PulseSpec:
    fam = Family.parse(args.family)
    if fam in (Family.UWB1, Family.UWB2) and args.sigma is not None:
        return PulseSpec.uwb1(args.sigma) if fam is Family.UWB1 else PulseSpec.uwb2(args.sigma)
    if fam is Family.CSS and args.mu is not None:
        if args.t is None:
            raise UsageError("--mu needs --t")
        return PulseSpec.css_from_rate(args.mu, args.t)
    if fam is Family.HS_OFDM and args.t is not None:
        return PulseSpec.hs_ofdm(args.t, n=args.n, seed=args.symbol_seed)
    B = args.bandwidth if args.bandwidth is not None else preset_band(args.band).B
    if fam is Family.CSS and args.t is not None:
        return PulseSpec.css(B, args.t)
    return duration_for_bandwidth(fam, B, n=args.n, seed=args.symbol_seed)


def _header(args, extra_inputs=None) -> dict:
    inputs = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "log_level")}
    if extra_inputs is not None:
        inputs["_inputs"] = extra_inputs
    return {"plctdr_version": __version__, "command": args.command, "seed": args.seed,
            "input_hash": _io.input_hash(inputs)}


def _emit(args, out: Path, stem: str, doc: dict, header: dict) -> None:
    if args.format == "csv":
        _io.write_rows(out / f"{stem}.csv", list(doc), [doc], header)
    else:
        _io.write_kv(out / f"{stem}.txt", doc, header)
    for k, v in doc.items():
        print(f"{k} = {json.dumps(v) if isinstance(v, (list, dict)) else _io.fmt(v)}")


# -- commands --------------------------------------------------------------------------

def cmd_pulse(args, out: Path) -> int:
    spec = build_spec(args)
    hdr = _header(args)
    x = transmit_signal(spec, oversampling=args.oversampling)
    x.to_csv(out / "pulse.csv", hdr)
    doc = spec.to_dict()
    doc["T_us"] = spec.T * 1e6
    doc["sample_rate_hz"] = x.sample_rate
    doc["n_samples"] = len(x)
    _emit(args, out, "pulse_spec", doc, hdr)
    return EXIT_OK


def cmd_acf(args, out: Path) -> int:
    spec = build_spec(args)
    hdr = _header(args)
    acf_curve(spec, args.points).to_csv(out / "acf.csv", hdr)
    _emit(args, out, "acf_spec", spec.to_dict(), hdr)
    return EXIT_OK


def cmd_metrics(args, out: Path) -> int:
    spec = build_spec(args)
    cable = preset_cable(args.cable)
    rep = metrics_report(spec, cable.v_p, args.convention, delta_T_p=args.delta_t_p,
                         zero_crossing_method=args.zero_crossing)
    doc = rep.to_dict()
    doc["cable"] = cable.name
    doc["delta_m"] = doc.pop("delta")
    doc["T_delta_s"] = doc.pop("T_delta")
    if doc["d_max"] is not None:
        doc["d_max_m"] = doc.pop("d_max")
    _emit(args, out, "metrics", doc, _header(args))
    return EXIT_OK


def cmd_simulate(args, out: Path) -> int:
    if args.topology:
        topo = load_topology(args.topology)
        topo_src = Path(args.topology).read_bytes().decode()
    else:
        doc = demo_topology_doc()
        topo = parse_topology(doc)
        topo_src = doc
    if topo.fault is None:
        raise ValueError("field fault: topology has no fault to locate")
    spec = build_spec(args)
    hdr = _header(args, topo_src)
    grid = FrequencyGrid.for_band(occupied_bandwidth(spec), n_f=args.n_f)
    scan = fault_scan(topo, spec, grid=grid, snr_db=args.snr_db, seed=args.seed)
    if args.xi is not None:
        xi = args.xi
    else:
        xi = suggest_threshold(scan.delta, pslr(acf_function(spec), zero_crossing(spec), spec.T))
    report = locate_fault(scan.delta, xi)
    # keep the plotted trace to the network extent
    d = scan.delta.distance
    keep = (d >= 0) & (d <= 1.5 * topo.longest_path())
    Reflectogram(scan.delta.time[keep], scan.delta.values[keep], scan.delta.v_p, scan.delta.meta).to_csv(
        out / "reflectogram.csv", hdr)
    doc = report.to_dict()
    doc["truth_m"] = topo.fault_distance()
    doc["v_p_m_per_s"] = scan.delta.v_p
    _emit(args, out, "fault", doc, hdr)
    return EXIT_OK


def cmd_tables(args, out: Path) -> int:
    ids = sorted(set(args.id or [1, 2, 3, 4, 5]))
    hdr = _header(args)
    failed = 0
    for tid in ids:
        rep = reproduce_table(tid, Convention.parse(args.convention), n=args.n, seed=args.symbol_seed)
        rep.to_csv(out / f"table{tid}.csv", hdr)
        for c in rep.cells:
            if not c.passed:
                print(f"table {tid} {c.row} {c.col}: computed {_io.fmt(c.computed)} expected {_io.fmt(c.expected)} "
                      f"(ratio {_io.fmt(c.computed / c.expected)})")
        print(f"table {tid}: {len(rep.cells) - rep.n_failed}/{len(rep.cells)} cells pass "
              f"({rep.convention} convention)")
        failed += rep.n_failed
    return EXIT_REPRODUCTION if failed else EXIT_OK


def cmd_sweep(args, out: Path) -> int:
    rows = sweep(args.family, args.range, args.points, n=args.n)
    write_sweep(out / f"sweep_{Family.parse(args.family).value}_{args.range}.csv", rows, _header(args))
    print(f"rows = {len(rows)}")
    return EXIT_OK


COMMANDS = {"pulse": cmd_pulse, "acf": cmd_acf, "metrics": cmd_metrics, "simulate": cmd_simulate,
            "tables": cmd_tables, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"plctdr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalGuardError as exc:
        print(f"plctdr: numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"plctdr: invalid input: {msg}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
