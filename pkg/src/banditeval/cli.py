"""Command-line interface.

Subcommands: generate, replay, bred, ground-truth, sweep, windowed,
plot.  Every flag can also come from a key=value config file passed with
--config; explicit flags override the file.  Exit codes: 0 success, 1
evaluator error, 2 usage error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .algorithms import parse_algorithm
from .bred import BredConfig, bred_evaluate, default_bandwidth
from .core import BanditEvalError, rng_stream
from .dataio import load_dataset, save_dataset
from .plotting import emit_plot
from .replay import permutation_ground_truth, replay_evaluate
from .sweep import (AGG_COLUMNS, LONG_COLUMNS, METHODS, SweepSpec,
                    run_error_sweep, write_csv)
from .synthetic import (DEFAULT_M, DEFAULT_NUISANCE_SD, DEFAULT_SIGNAL_SD,
                        DEFAULT_WEIGHT_SD, generate_model, ground_truth_ctr,
                        load_model, save_model, simulate_log)
from .windows import make_multipool_dataset, run_windowed_experiment


def _jitter_value(text: str) -> float | None:
    if text == "auto":
        return None
    if text == "none":
        return 0.0
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"jitter must be 'auto', 'none', or a bandwidth, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("jitter bandwidth must be >= 0")
    return value


def _sizes_value(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None


def _methods_value(text: str) -> tuple[str, ...]:
    methods = tuple(part.strip() for part in text.split(",") if part.strip())
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown methods {sorted(unknown)}")
    return methods


def _add_common(parser: argparse.ArgumentParser, algo: bool = True) -> None:
    parser.add_argument("--config", type=Path, default=None,
                        help="key=value file supplying defaults for any flag")
    parser.add_argument("--seed", type=int, default=0, help="master RNG seed")
    if algo:
        parser.add_argument("--algo", nargs="+", required=True,
                            metavar=("NAME", "KEY=VALUE"),
                            help="learner name plus parameters, e.g. linucb alpha=1 ridge=1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="banditeval",
        description="Offline evaluation of contextual bandit algorithms.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit a synthetic model and uniform log")
    _add_common(p, algo=False)
    p.add_argument("--T", type=int, default=10000, help="records to generate")
    p.add_argument("--m", type=int, default=DEFAULT_M, help="relevant weights per specific item")
    p.add_argument("--weight-sd", type=float, default=DEFAULT_WEIGHT_SD)
    p.add_argument("--signal-sd", type=float, default=DEFAULT_SIGNAL_SD)
    p.add_argument("--nuisance-sd", type=float, default=DEFAULT_NUISANCE_SD)
    p.add_argument("--model-out", type=Path, default=None)
    p.add_argument("--data-out", type=Path, required=True)
    p.add_argument("--multipool", action="store_true",
                   help="concatenate segments with fresh models and distinct action pools")
    p.add_argument("--segments", type=int, default=5)
    p.add_argument("--segment-len", type=int, default=2000)
    p.add_argument("--pool-size", type=int, default=5)

    p = sub.add_parser("replay", help="classical replay estimate on a logged dataset")
    _add_common(p)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--permutations", type=int, default=0,
                   help="average over this many random data orderings instead")
    p.add_argument("--force", action="store_true", help="allow non-uniform logging tags")
    p.add_argument("--trace", type=Path, default=None,
                   help="write accepted record indices, one per line")

    p = sub.add_parser("bred", help="bootstrapped replay on expanded data")
    _add_common(p)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--B", type=int, default=30, help="bootstrap replicates")
    p.add_argument("--jitter", type=_jitter_value, default=None,
                   help="'auto' (50/sqrt(T)), 'none', or a bandwidth")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--force", action="store_true")
    p.add_argument("--replicates-csv", type=Path, default=None,
                   help="write per-replicate rows (b, g_b, T_b)")

    p = sub.add_parser("ground-truth", help="direct play against a synthetic model")
    _add_common(p)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--runs", type=int, default=50)
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("sweep", help="estimator error vs dataset size")
    _add_common(p)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--sizes", type=_sizes_value, required=True,
                   help="comma-separated dataset sizes, increasing")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--methods", type=_methods_value, default=("replay", "bred"))
    p.add_argument("--B", type=int, default=30)
    p.add_argument("--jitter", type=_jitter_value, default=None)
    p.add_argument("--truth-runs", type=int, default=50)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out-long", type=Path, required=True)
    p.add_argument("--out-agg", type=Path, required=True)

    p = sub.add_parser("windowed", help="per-window truth vs estimators on pooled streams")
    _add_common(p)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--permutations", type=int, default=100)
    p.add_argument("--B", type=int, default=30)
    p.add_argument("--jitter", type=_jitter_value, default=None)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("plot", help="render an aggregated sweep CSV to SVG")
    _add_common(p, algo=False)
    p.add_argument("--csv", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)

    parser._command_parsers = dict(sub.choices)
    return parser


def apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    """Parse argv, letting a --config file supply defaults.

    Config lines are ``key=value`` with keys named after long flags
    (without the leading dashes); values for multi-token flags such as
    ``algo`` are whitespace-separated.  Explicit flags win.  A config
    value can also satisfy an otherwise required flag.
    """
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path, default=None)
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if not a.startswith("-")), None)
    if known.config is None or command not in parser._command_parsers:
        return parser.parse_args(argv)
    subparser = parser._command_parsers[command]
    actions = {}
    for action in subparser._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                actions[opt[2:]] = action
    defaults = {}
    for lineno, line in enumerate(known.config.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            parser.error(f"{known.config}:{lineno}: expected key=value, got {line!r}")
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        action = actions.get(key)
        if action is None:
            parser.error(f"{known.config}:{lineno}: unknown option {key!r} "
                         f"for command {command!r}")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[action.dest] = raw.lower() in ("1", "true", "yes")
        elif action.nargs == "+":
            defaults[action.dest] = raw.split()
        elif action.type is not None:
            try:
                defaults[action.dest] = action.type(raw)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                parser.error(f"{known.config}:{lineno}: {exc}")
        else:
            defaults[action.dest] = raw
        action.required = False
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def _summary(pairs: list[tuple[str, object]]) -> str:
    parts = []
    for key, value in pairs:
        if isinstance(value, float):
            parts.append(f"{key}={value:.6g}")
        else:
            parts.append(f"{key}={value}")
    return " ".join(parts)


def cmd_generate(args) -> int:
    rng = rng_stream(args.seed)
    if args.multipool:
        dataset, _ = make_multipool_dataset(rng, args.segments, args.segment_len,
                                            args.pool_size, m=args.m)
        save_dataset(dataset, args.data_out)
        print(_summary([("generated", len(dataset)), ("segments", args.segments),
                        ("data", args.data_out)]))
        return 0
    model_rng, log_rng = rng.spawn(2)
    model = generate_model(model_rng, args.m, weight_sd=args.weight_sd,
                           signal_sd=args.signal_sd, nuisance_sd=args.nuisance_sd)
    if args.model_out is not None:
        save_model(model, args.model_out)
    dataset = simulate_log(model, args.T, log_rng)
    save_dataset(dataset, args.data_out)
    print(_summary([("generated", len(dataset)), ("mean_q", float(model.q.mean())),
                    ("model", args.model_out), ("data", args.data_out)]))
    return 0


def cmd_replay(args) -> int:
    algo = parse_algorithm(args.algo)
    dataset = load_dataset(args.data)
    rng = rng_stream(args.seed)
    if args.permutations > 0:
        mean, std_err = permutation_ground_truth(dataset, algo, args.permutations,
                                                 rng, force=args.force)
        print(_summary([("g_hat", mean), ("std_err", std_err),
                        ("permutations", args.permutations)]))
        return 0
    result = replay_evaluate(algo, dataset, rng, force=args.force,
                             trace=args.trace is not None)
    if args.trace is not None:
        args.trace.write_text(
            "\n".join(str(i) for i in result.accepted_indices) + "\n")
    print(_summary([("g_hat", result.g_hat), ("accepted", result.accepted),
                    ("total", result.total)]))
    return 0


def cmd_bred(args) -> int:
    algo = parse_algorithm(args.algo)
    dataset = load_dataset(args.data)
    config = BredConfig(b=args.B, h=args.jitter, level=args.level)
    report = bred_evaluate(algo, dataset, config, rng_stream(args.seed),
                           threads=args.threads, force=args.force)
    if args.replicates_csv is not None:
        rows = []
        estimates = iter(report.replicate_estimates)
        for b, count in enumerate(report.accepted_counts, start=1):
            g_b = next(estimates) if count > 0 else None
            rows.append({"b": b, "g_b": g_b, "T_b": int(count)})
        write_csv(rows, ("b", "g_b", "T_b"), args.replicates_csv)
    h = args.jitter if args.jitter is not None else default_bandwidth(len(dataset))
    pairs = [("g_hat", report.g_hat), ("sigma_hat", report.sigma_hat),
             ("B", args.B), ("h", h), ("excluded", report.excluded_replicates)]
    if report.confidence_region is not None:
        lo, hi, level = report.confidence_region
        pairs += [("lo", lo), ("hi", hi), ("level", level)]
    else:
        pairs += [("degenerate", True)]
    print(_summary(pairs))
    return 0


def cmd_ground_truth(args) -> int:
    algo = parse_algorithm(args.algo)
    model = load_model(args.model)
    mean, std_err = ground_truth_ctr(model, algo, args.T, args.runs,
                                     rng_stream(args.seed), threads=args.threads)
    print(_summary([("g", mean), ("std_err", std_err), ("T", args.T),
                    ("runs", args.runs)]))
    return 0


def cmd_sweep(args) -> int:
    algo = parse_algorithm(args.algo)
    model = load_model(args.model)
    spec = SweepSpec(sizes=args.sizes, seeds=args.seeds, methods=args.methods,
                     algo=algo, b=args.B, h=args.jitter,
                     truth_runs=args.truth_runs, level=args.level)
    long_rows, agg_rows = run_error_sweep(model, spec, rng_stream(args.seed),
                                          threads=args.threads)
    write_csv(long_rows, LONG_COLUMNS, args.out_long)
    write_csv(agg_rows, AGG_COLUMNS, args.out_agg)
    failed = sum(1 for r in long_rows if r["status"] != "ok")
    print(_summary([("cells", len(long_rows)), ("failed", failed),
                    ("long", args.out_long), ("agg", args.out_agg)]))
    return 0


def cmd_windowed(args) -> int:
    algo = parse_algorithm(args.algo)
    dataset = load_dataset(args.data)
    config = BredConfig(b=args.B, h=args.jitter, level=args.level)
    rows = run_windowed_experiment(dataset, algo, rng_stream(args.seed),
                                   n_perm=args.permutations, config=config)
    columns = ("window", "t_i", "k_i", "truth", "replay_est", "bred_est",
               "bred_lo", "bred_hi", "status")
    write_csv(rows, columns, args.out)
    done = sum(1 for r in rows if r["status"] == "ok")
    print(_summary([("windows", len(rows)), ("evaluated", done), ("out", args.out)]))
    return 0


def cmd_plot(args) -> int:
    emit_plot(args.csv, args.out)
    print(_summary([("plot", args.out)]))
    return 0


_COMMANDS = {
    "generate": cmd_generate,
    "replay": cmd_replay,
    "bred": cmd_bred,
    "ground-truth": cmd_ground_truth,
    "sweep": cmd_sweep,
    "windowed": cmd_windowed,
    "plot": cmd_plot,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = apply_config(parser, sys.argv[1:] if argv is None else argv)
    try:
        return _COMMANDS[args.command](args)
    except BanditEvalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        parser.error(str(exc))  # exits with code 2


if __name__ == "__main__":
    sys.exit(main())
