"""Command-line front end: one subcommand per experiment.

Every tabular output starts with ``#``-prefixed JSON lines holding the
schema, package version, seed and full configuration, followed by a CSV
header and rows (or a single JSON document with ``--format json``). Wall
clock information goes to a ``<out>.meta.json`` sidecar so the main output
is byte-identical across reruns with the same seed.

Exit codes: 0 success, 2 usage or input error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__, analysis, codec
from .errors import InvariantViolation
from .evaluation import WORKERS_ENV, default_workers, defect_counts, direct_mc
from .lattice import CodeLattice
from .matching import BACKEND, DefectGraph, timed_mwpm
from .noise import sample_error, syndrome_of, trial_rng
from .predecoder import PredecoderParams, predecode
from .rare_event import ChainConfig, splitting_ladder

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVARIANT = 3

COLUMNS = {
    "threshold": ["d", "p", "r", "trials", "failures", "failures_x", "failures_y", "f", "stderr"],
    "density": ["scheme", "r", "p", "rho_hat", "rho_model", "n_trials"],
    "histogram": ["M", "count", "poisson_expected"],
    "runtime": ["p", "V", "W", "rt_ns"],
    "rare-event": ["d", "p", "r", "f", "log_f", "log_se", "ess", "flagged"],
    "analysis": ["p", "f_target", "scheme", "d_required", "qubit_ratio", "d_effective"],
}


class UsageError(ValueError):
    pass


# -- parsing helpers ----------------------------------------------------------

def _split(text: str) -> list[str]:
    return [t for t in text.replace(",", " ").split() if t]


def int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in _split(text)]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from exc


def float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in _split(text)]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from exc


def radius(text: str):
    try:
        return PredecoderParams.parse(text).r
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad radius {text!r}") from exc


def radius_list(text: str) -> list:
    return [radius(t) for t in _split(text)]


def _scheme_name(r) -> str:
    return PredecoderParams(r).label


def _fmt(x):
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else str(x)
    if x is None:
        return "inf"
    return x


# -- output -------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def emit(command: str, args, rows: list[dict], summary: dict | None = None) -> str:
    config = {k: v for k, v in vars(args).items() if k not in ("func", "out", "format", "workers")}
    header = {"schema": f"capredecode/{command}/1", "version": __version__,
              "seed": args.seed, "config": config}
    cols = COLUMNS[command]
    if args.format == "json":
        doc = dict(header, columns=cols, rows=[{c: r[c] for c in cols} for r in rows],
                   summary=summary or {})
        text = json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"
    else:
        buf = io.StringIO()
        buf.write("# " + json.dumps(_jsonable(header), sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in cols])
        if summary:
            buf.write("# summary " + json.dumps(_jsonable(summary), sort_keys=True) + "\n")
        text = buf.getvalue()
    return text


def _write(args, text: str, started: float) -> None:
    if args.out in (None, "-"):
        sys.stdout.write(text)
        return
    with open(args.out, "w") as fh:
        fh.write(text)
    meta = {
        "finished_utc": datetime.now(timezone.utc).isoformat(),
        "wall_seconds": time.monotonic() - started,
        "matcher_backend": BACKEND,
        "workers": args.workers,
    }
    with open(args.out + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=2)


# -- subcommands ----------------------------------------------------------------

def _lattices(ds) -> list[CodeLattice]:
    if not ds:
        raise UsageError("need at least one code distance")
    return [CodeLattice(d) for d in ds]


def _need(values, what):
    if not values:
        raise UsageError(f"empty {what} list")


def cmd_threshold(args):
    _need(args.p, "error-rate")
    lattices = _lattices(args.d)
    rows = []
    for lat in lattices:
        for k, p in enumerate(args.p):
            st = direct_mc(lat, p, args.r, min_failures=args.min_failures,
                           max_trials=args.max_trials, seed=args.seed + 1000 * lat.d + k,
                           workers=args.workers)
            rows.append({"d": lat.d, "p": p, "r": args.r, "trials": st.trials, "failures": st.failures,
                         "failures_x": st.failures_x, "failures_y": st.failures_y,
                         "f": st.f, "stderr": st.stderr})
    curves = {}
    for row in rows:
        curves.setdefault(row["d"], []).append((row["p"], row["f"]))
    summary = {"threshold": analysis.threshold_estimate(curves)}
    pts = [(row["d"], row["p"], row["f"]) for row in rows]
    try:
        fit = analysis.fit_scaling(pts)
        summary["scaling"] = {"k": fit.k, "p_th": fit.p_th, "C": fit.C, "slopes": fit.slopes}
    except ValueError:
        summary["scaling"] = None
    return rows, summary


def cmd_density(args):
    _need(args.p, "error-rate")
    _need(args.r, "radius")
    if len(set(args.d)) < 2:
        raise UsageError("density fit needs at least two distinct distances")
    from .evaluation import defect_density

    lattices = _lattices(args.d)
    rows = []
    for r in args.r:
        for k, p in enumerate(args.p):
            fit = defect_density(lattices, p, r, args.trials, seed=args.seed + 7919 * k)
            model = analysis.density_model(p, r)
            rows.append({"scheme": _scheme_name(r), "r": r, "p": p, "rho_hat": fit.rho_hat,
                         "rho_model": model.rho, "n_trials": args.trials})
    return rows, {"volume_unit": "fault locations (edges of the decoding lattice)"}


def cmd_histogram(args):
    lat = CodeLattice(args.d)
    _, after = defect_counts(lat, args.p, args.r, args.trials, seed=args.seed)
    values, expected, lam = analysis.poisson_expected(after)
    hist = np.bincount(after, minlength=values[-1] + 1)
    rows = [{"M": int(m), "count": int(hist[m]), "poisson_expected": float(e)}
            for m, e in zip(values, expected)]
    summary = {"mean_M": float(after.mean()), "lambda": lam}
    try:
        chi = analysis.poisson_chi_square(after)
        summary.update(chi2=chi.statistic, dof=chi.dof, p_value=chi.p_value)
    except ValueError:
        pass
    return rows, summary


def cmd_runtime(args):
    _need(args.p, "error-rate")
    lattices = _lattices(args.d)
    rows = []
    for lat in lattices:
        for k, p in enumerate(args.p):
            for i in range(args.trials):
                rng = trial_rng(args.seed + 1000 * lat.d + k, i)
                s = syndrome_of(lat, sample_error(lat, p, rng))
                if args.r is not None:
                    s = predecode(lat, s, args.r).modified_syndrome
                g = DefectGraph.from_syndrome(lat, s)
                _, ns = timed_mwpm(g)
                rows.append({"p": p, "V": lat.V, "W": g.size, "rt_ns": ns})
    fits = analysis.runtime_fit([(r["p"], r["V"], r["W"], r["rt_ns"]) for r in rows])
    summary = {str(p): {"A": f.A, "exponent_V": f.exponent, "exponent_W": f.exponent_w,
                        "flagged": f.flagged} for p, f in fits.items()}
    return rows, summary


def cmd_rare_event(args):
    _need(args.ladder, "ladder")
    cfg = ChainConfig(samples=args.samples, burn_in=args.burn_in, thin=args.thin)
    rows = []
    for lat in _lattices(args.d):
        res = splitting_ladder(lat, args.r, args.ladder, cfg, seed=args.seed + lat.d,
                               anchor_failures=args.anchor_failures)
        for rung in res.rungs:
            rows.append({"d": lat.d, "p": rung.p, "r": args.r, "f": rung.f, "log_f": rung.log_f,
                         "log_se": rung.log_se,
                         "ess": rung.ratio.ess if rung.ratio else float("nan"),
                         "flagged": int(rung.flagged)})
    summary = {}
    try:
        fit = analysis.fit_scaling([(r["d"], r["p"], r["f"]) for r in rows])
        summary["scaling"] = {"k": fit.k, "p_th": fit.p_th, "C": fit.C}
    except ValueError:
        summary["scaling"] = None
    return rows, summary


def _read_points(path):
    pts = []
    with open(path) as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        for row in reader:
            pts.append((int(row["d"]), float(row["p"]), float(row["f"])))
    return pts


def cmd_analysis(args):
    _need(args.p, "error-rate")
    _need(args.r, "radius")
    alpha = args.alpha
    model = args.model
    summary = {"model": model}
    if args.fit_alpha:
        alpha = analysis.fit_alpha(_read_points(args.fit_alpha), 0)
        model = analysis.REFINED
        summary.update(model=model, alpha_fitted=alpha)
    if model == analysis.REFINED:
        summary["alpha"] = alpha
    rows = []
    for p in args.p:
        d_mw = analysis.required_distance(p, args.f_target, None)
        for r in args.r:
            d = analysis.required_distance(p, args.f_target, r, model, alpha)
            d_eff = float(d) if r is None else analysis.effective_mwpm_distance(d, p, r, model, alpha)
            rows.append({"p": p, "f_target": args.f_target, "scheme": _scheme_name(r),
                         "d_required": d, "qubit_ratio": (d / d_mw) ** 2, "d_effective": d_eff})
    return rows, summary


def cmd_codec(args):
    if args.action == "compress":
        lat = CodeLattice(args.d)
        addrs = _read_addresses(args.input)
        s = np.zeros(lat.V, dtype=bool)
        if len(addrs) and (addrs.min() < 0 or addrs.max() >= lat.V):
            raise UsageError(f"address out of range [0, {lat.V})")
        np.logical_xor.at(s, addrs, True)
        msg = codec.compress(lat, s)
        if msg.count % 2:
            raise UsageError("a syndrome history must contain an even number of defects")
        if not args.out or args.out == "-":
            raise UsageError("compress needs --out FILE.synz")
        if not args.out.endswith(codec.SUFFIX):
            raise UsageError(f"output file must end in {codec.SUFFIX}")
        codec.write_synz(args.out, msg)
        return None
    msg = codec.read_synz(args.input)
    lat = CodeLattice(msg.d)
    s = codec.decompress(lat, msg)
    if args.action == "decompress":
        text = "".join(f"{a}\n" for a in np.flatnonzero(s))
    else:
        bw = codec.bandwidth_report(lat, msg)
        info = {"version": msg.version, "d": msg.d, "rounds": msg.rounds, "count": msg.count,
                "V": bw.volume, "address_bits": bw.address_bits, "ideal_bits": bw.ideal_bits,
                "model16_bits": bw.model16_bits, "uncompressed_bits": bw.uncompressed_bits,
                "wire_bits": bw.wire_bits}
        text = json.dumps(info, indent=2) + "\n"
    if args.out and args.out != "-":
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return None


def _read_addresses(path) -> np.ndarray:
    if path.endswith(".npy"):
        a = np.load(path)
        if a.dtype == bool:
            return np.flatnonzero(a)
        return np.asarray(a, dtype=np.int64).ravel()
    with open(path) as fh:
        try:
            return np.array([int(t) for t in fh.read().split()], dtype=np.int64)
        except ValueError as exc:
            raise UsageError(f"{path}: expected whitespace-separated integer addresses") from exc


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--workers", type=int, default=default_workers(),
                        help=f"worker processes (default ${WORKERS_ENV} or 1)")
    common.add_argument("--out", default="-", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = argparse.ArgumentParser(prog="capredecode", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", parents=[common], help="failure probability over a (d, p) grid")
    p.add_argument("--d", type=int_list, default=[4, 6, 8, 10])
    p.add_argument("--p", type=float_list, default=[0.015, 0.02, 0.025])
    p.add_argument("--r", type=radius, default=0, help="isolation radius or 'none'")
    p.add_argument("--min-failures", type=int, default=10)
    p.add_argument("--max-trials", type=int, default=10**7)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("density", parents=[common], help="fitted defect density per scheme")
    p.add_argument("--d", type=int_list, default=[8, 10, 12])
    p.add_argument("--p", type=float_list, default=[0.001, 0.002, 0.005, 0.01, 0.02])
    p.add_argument("--r", type=radius_list, default=[None, 0, 1, 2])
    p.add_argument("--trials", type=int, default=10000)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("histogram", parents=[common], help="defect-count histogram vs Poisson")
    p.add_argument("--d", type=int, default=20)
    p.add_argument("--p", type=float, default=0.005)
    p.add_argument("--r", type=radius, default=0)
    p.add_argument("--trials", type=int, default=10000)
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser("runtime", parents=[common], help="matcher wall time vs volume")
    p.add_argument("--d", type=int_list, default=[8, 10, 12, 14, 16])
    p.add_argument("--p", type=float_list, default=[0.02])
    p.add_argument("--r", type=radius, default=None)
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=cmd_runtime)

    p = sub.add_parser("rare-event", parents=[common], help="splitting-method ladder")
    p.add_argument("--d", type=int_list, default=[4, 6, 8])
    p.add_argument("--ladder", type=float_list, default=[0.02, 0.01, 0.005])
    p.add_argument("--r", type=radius, default=0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--burn-in", type=float, default=10.0, help="burn-in sweeps (units of N edges)")
    p.add_argument("--thin", type=float, default=1.0, help="sweeps between samples")
    p.add_argument("--anchor-failures", type=int, default=100)
    p.set_defaults(func=cmd_rare_event)

    p = sub.add_parser("analysis", parents=[common], help="required and effective distances")
    p.add_argument("--p", type=float_list, default=[1e-4, 3e-4, 1e-3, 3e-3, 1e-2])
    p.add_argument("--f-target", type=float, default=1e-15)
    p.add_argument("--r", type=radius_list, default=[0, 1, 2, None])
    p.add_argument("--model", choices=(analysis.ROUGH, analysis.REFINED), default=analysis.ROUGH)
    p.add_argument("--alpha", type=float, default=4.0)
    p.add_argument("--fit-alpha", metavar="CSV", help="fit alpha from a threshold/rare-event CSV")
    p.set_defaults(func=cmd_analysis)

    p = sub.add_parser("codec", parents=[common], help="compress/decompress .synz files")
    p.add_argument("action", choices=("compress", "decompress", "inspect"))
    p.add_argument("input", help="address list (.txt/.npy) to compress, or a .synz file")
    p.add_argument("--d", type=int, help="code distance (compress only)")
    p.set_defaults(func=cmd_codec)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers < 1:
        parser.error("--workers must be at least 1")
    if args.command == "codec" and args.action == "compress" and args.d is None:
        parser.error("codec compress needs --d")
    started = time.monotonic()
    try:
        result = args.func(args)
        if result is not None:
            rows, summary = result
            _write(args, emit(args.command, args, rows, summary), started)
    except InvariantViolation as exc:
        print(f"capredecode: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, OSError) as exc:
        print(f"capredecode: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
