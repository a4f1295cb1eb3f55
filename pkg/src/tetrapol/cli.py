"""Command-line front end: ``tetrapol design|calibrate|reconstruct|sweep``.

Exit status: 0 success, 2 config error, 3 numerical error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .calibration import reconstruct
from .errors import PolarimetryError
from .experiment import EXACT, SweepConfig, run_sweep, simulate_calibration, summarize
from .fileio import (FORMAT_VERSION, CalibrationFileError, ConfigError, DeviceConfig,
                     parse_device_config,
                     read_calibration, write_calibration, write_sweep)
from .instrument import (effective_frame, instrument_matrix, maximize_determinant,
                         optimal_splitting_ratio, PolarimeterModel)

EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 2, 3, 4


def _counts_arg(text: str):
    if text == EXACT:
        return EXACT
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number or 'exact', got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("--counts must be positive")
    return int(value) if value.is_integer() else value


def _grid_arg(text: str):
    try:
        hwp, qwp = text.split(",")
        h = tuple(float(v) for v in hwp.split(":"))
        q = tuple(float(v) for v in qwp.split(":"))
        if len(h) != 3 or len(q) != 3:
            raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"grid must look like 'H0:H1:HSTEP,Q0:Q1:QSTEP' (degrees), got {text!r}") from None
    return h, q


def _load_device(path: str | None) -> DeviceConfig:
    if path is None:
        return DeviceConfig.optimal()
    return parse_device_config(Path(path).read_text())


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_design(args) -> int:
    closed, _ = optimal_splitting_ratio()
    numeric = maximize_determinant(tolerance=args.tolerance)
    model = PolarimeterModel.optimal()
    frame = effective_frame(model)
    record = {
        "x_sq_closed_form": closed,
        "x_sq_numeric": numeric,
        "difference": numeric - closed,
        "tolerance": args.tolerance,
        "frame_pairwise_dots": [float(d) for d in frame.pairwise_dots()],
        "condition_number": instrument_matrix(model).cond,
    }
    print(f"optimal x^2 (closed form)   : {closed:.9f}")
    print(f"optimal x^2 (max |det B|)   : {numeric:.9f}")
    print(f"difference                  : {record['difference']:.3e}")
    print("frame pairwise dot products : " + " ".join(f"{d:+.12f}" for d in record["frame_pairwise_dots"]))
    print(f"instrument matrix cond      : {record['condition_number']:.12f}")
    line = json.dumps(record, sort_keys=True)
    print(line)
    if args.out:
        Path(args.out).write_text(line + "\n")
    return 0


def cmd_calibrate(args) -> int:
    device = _load_device(args.config)
    cal = simulate_calibration(device.to_model(), args.counts, args.seed)
    _write(args.out, write_calibration(cal, device, args.seed, args.counts))
    return 0


def cmd_reconstruct(args) -> int:
    cal = read_calibration(Path(args.calibration).read_text())
    res = reconstruct(args.n, cal)
    r, p = res.reduced.as_array(), res.projected.as_array()
    print("raw stokes      : " + " ".join(f"{v:+.6f}" for v in res.raw.as_array()))
    print("sigma (raw)     : " + " ".join(f"{v:.6f}" for v in res.sigma))
    print("reduced         : " + " ".join(f"{v:+.6f}" for v in r))
    print("sigma (reduced) : " + " ".join(f"{v:.6f}" for v in res.sigma_reduced))
    print(f"|reduced|       : {np.linalg.norm(r):.6f} +- {res.sigma_norm:.6f}")
    print(f"physical        : {res.physical}")
    print("projected       : " + " ".join(f"{v:+.6f}" for v in p))
    return 0


def cmd_sweep(args) -> int:
    device = _load_device(args.config)
    model = device.to_model()
    if args.calibration:
        cal = read_calibration(Path(args.calibration).read_text())
        cal_source = "file"
    else:
        cal = simulate_calibration(model, EXACT, 0)
        cal_source = "exact"
    hwp, qwp = args.grid
    try:
        cfg = SweepConfig(hwp, qwp, args.counts, args.misalign_mrad * 1e-3, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = run_sweep(model, cal, cfg, jobs=args.jobs)
    summary = summarize(rows)
    header = [
        "tetrapol fidelity map",
        f"format_version = {FORMAT_VERSION}",
        f"seed = {args.seed}",
        "seeding = SeedSequence(seed, spawn_key=(hwp_index, qwp_index)) per point",
        f"counts = {args.counts}",
        f"misalign_mrad = {args.misalign_mrad!r}",
        f"hwp_grid_deg = {hwp[0]!r}:{hwp[1]!r}:{hwp[2]!r}",
        f"qwp_grid_deg = {qwp[0]!r}:{qwp[1]!r}:{qwp[2]!r}",
        f"calibration = {cal_source}",
        f"calibration_cond = {cal.cond!r}",
    ] + [f"config.{line}" for line in device.echo()]
    _write(args.out, write_sweep(rows, header))
    stream = sys.stderr if args.out is None else sys.stdout
    print(f"points        : {summary['points']}", file=stream)
    print(f"mean fidelity : {summary['mean']!r}", file=stream)
    print(f"min fidelity  : {summary['min']!r}", file=stream)
    print(f"max fidelity  : {summary['max']!r}", file=stream)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tetrapol", description="Four-detector photon-counting polarimeter simulator")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="optimal splitting ratio by determinant maximization")
    d.add_argument("--tolerance", type=float, default=1e-7)
    d.add_argument("--out", help="write the JSON record here")
    d.set_defaults(func=cmd_design)

    c = sub.add_parser("calibrate", help="simulate a quartet calibration and write a calibration file")
    c.add_argument("--config", help="device config (default: ideal optimal device)")
    c.add_argument("--counts", type=_counts_arg, default=100000, help="photons per calibration state, or 'exact'")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", help="output path (default: stdout)")
    c.set_defaults(func=cmd_calibrate)

    r = sub.add_parser("reconstruct", help="reconstruct a Stokes vector from four counts")
    r.add_argument("--calibration", required=True)
    r.add_argument("n", type=float, nargs=4, metavar="N", help="detector counts n1 n2 n3 n4")
    r.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("sweep", help="HWP/QWP fidelity map")
    s.add_argument("--config", help="device config (default: ideal optimal device)")
    s.add_argument("--calibration", help="calibration file (default: noiseless calibration of the device)")
    s.add_argument("--grid", type=_grid_arg, default=((0.0, 87.0, 3.0), (0.0, 174.0, 6.0)),
                   help="'H0:H1:HSTEP,Q0:Q1:QSTEP' in degrees, inclusive (default 30x30)")
    s.add_argument("--counts", type=_counts_arg, default=100000, help="mean photons per point, or 'exact'")
    s.add_argument("--misalign-mrad", type=float, default=0.0, help="waveplate offset sigma in mrad")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--jobs", type=int, default=1, help="worker processes")
    s.add_argument("--out", help="output CSV (default: stdout)")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CalibrationFileError as exc:
        print(f"calibration file error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PolarimetryError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
