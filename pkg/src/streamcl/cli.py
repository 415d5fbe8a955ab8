"""Command-line entry point: run experiments, sweep hyperparameters, rebuild reports."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from streamcl.classifier import TrainConfig
from streamcl.featurizer import FeaturizerConfig
from streamcl.harness import RunConfig, load_corpus, run_experiment, split_domains
from streamcl.reports import (
    format_float,
    read_result_csv,
    render_heatmap_svg,
    write_timeline_csv,
)
from streamcl.strategies import GemConfig, Strategy, StrategyKind
from streamcl.synthetic import SyntheticSpec, make_synthetic_stream

GEM_LAMBDA_GRID = (0.1, 0.3, 0.5, 0.7, 1.0)
MEMORY_GRID = (25, 50, 70)


def _parse_synthetic(raw: str) -> SyntheticSpec:
    """Parse ``mode:T`` or ``mode:T:train/dev/test``, e.g. ``conflict:5:200/50/200``."""
    parts = raw.split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"--synthetic expects 'mode:T[:train/dev/test]', got {raw!r}")
    mode, domains = parts[0], parts[1]
    sizes = (200, 50, 200)
    if len(parts) == 3:
        pieces = parts[2].split("/")
        if len(pieces) != 3:
            raise ValueError(f"sizes must be 'train/dev/test', got {parts[2]!r}")
        sizes = tuple(int(p) for p in pieces)
    return SyntheticSpec(
        mode=mode,
        num_domains=int(domains),
        train_size=sizes[0],
        dev_size=sizes[1],
        test_size=sizes[2],
    )


def _parse_orders(raw: str) -> int | tuple[tuple[int, ...], ...]:
    """An integer count, one comma-separated permutation, or several joined by ';'."""
    if ";" in raw or "," in raw:
        return tuple(
            tuple(int(v) for v in chunk.split(",")) for chunk in raw.split(";") if chunk
        )
    return int(raw)


def _parse_seeds(raw: str) -> tuple[int, ...]:
    return tuple(int(v) for v in raw.split(",") if v)


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--data", type=Path, help="JSONL corpus path")
    source.add_argument(
        "--synthetic",
        type=str,
        help="synthetic stream spec 'mode:T[:train/dev/test]' with mode disjoint|conflict",
    )
    parser.add_argument(
        "--strategy", choices=[s.value for s in Strategy], required=True
    )
    parser.add_argument(
        "--ttokens", action="store_true", help="prepend a domain-tag token to every example"
    )
    parser.add_argument("--memory", type=int, default=25, help="episodic memory budget")
    parser.add_argument(
        "--memory-scope",
        choices=["per-domain", "total"],
        default="per-domain",
        help="whether --memory counts per domain or across the whole stream",
    )
    parser.add_argument("--gem-lambda", type=float, default=0.5)
    parser.add_argument("--lr", type=float, default=0.01)
    parser.add_argument("--batch", type=int, default=4)
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument(
        "--orders",
        type=str,
        default="3",
        help="count of random domain orders, or explicit permutations like '2,0,1;1,2,0'",
    )
    parser.add_argument("--order-seed", type=int, default=0)
    parser.add_argument("--seeds", type=str, default="0", help="comma-separated run seeds")
    parser.add_argument("--dim", type=int, default=8192, help="feature vector dimension")
    parser.add_argument("--hash-seed", type=int, default=0)
    parser.add_argument("--split-seed", type=int, default=0)
    parser.add_argument("--out", type=Path, default=None, help="report output directory")


def _build_config(args: argparse.Namespace, output_dir: Path | None) -> RunConfig:
    return RunConfig(
        strategy=StrategyKind(kind=Strategy(args.strategy), ttokens=args.ttokens),
        featurizer=FeaturizerConfig(dimension=args.dim, hash_seed=args.hash_seed),
        train=TrainConfig(
            learning_rate=args.lr, batch_size=args.batch, max_epochs=args.epochs
        ),
        gem=GemConfig(lambda_margin=args.gem_lambda),
        memory_budget=args.memory,
        memory_scope=args.memory_scope,
        domain_orders=_parse_orders(args.orders),
        order_seed=args.order_seed,
        seeds=_parse_seeds(args.seeds),
        output_dir=output_dir,
    )


def _build_stream(args: argparse.Namespace):
    if args.data is not None:
        examples = load_corpus(args.data)
        return split_domains(examples, seed=args.split_seed)
    return make_synthetic_stream(_parse_synthetic(args.synthetic), seed=args.split_seed)


def _cmd_run(args: argparse.Namespace) -> int:
    config = _build_config(args, args.out)
    stream = _build_stream(args)
    experiment = run_experiment(config, stream)
    summary = experiment.summary
    print(
        f"{config.strategy.describe()}: {len(experiment.runs)} runs, "
        f"acc {format_float(summary['acc_mean'])} ± {format_float(summary['acc_std'])}, "
        f"bwt {format_float(summary['bwt_mean'])} ± {format_float(summary['bwt_std'])}"
    )
    if args.out is not None:
        print(f"reports written to {args.out}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    """Grid search selected on dev-set accuracy at the end of the stream."""
    strategy = Strategy(args.strategy)
    if args.values:
        values = [float(v) for v in args.values.split(",")]
    elif strategy is Strategy.GEM:
        values = list(GEM_LAMBDA_GRID)
    elif strategy is Strategy.REPLAY:
        values = [float(m) for m in MEMORY_GRID]
    else:
        raise ValueError("sweep supports --strategy replay (memory grid) or gem (lambda grid)")

    stream = _build_stream(args)
    rows = []
    for value in values:
        config = _build_config(args, None)
        if strategy is Strategy.GEM:
            config = replace(config, gem=GemConfig(lambda_margin=value))
        else:
            config = replace(config, memory_budget=int(value))
        dev_scores = []
        for run in run_experiment(config, _dev_as_test(stream)).runs:
            dev_scores.append(run.metrics["acc"])
        rows.append((value, float(np.mean(dev_scores)), float(np.std(dev_scores))))
        print(f"value {format_float(value)}: dev acc {format_float(rows[-1][1])}")

    best = max(rows, key=lambda r: r[1])
    print(f"best value {format_float(best[0])} (dev acc {format_float(best[1])})")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        lines = ["value,dev_acc_mean,dev_acc_std"]
        lines += [",".join(format_float(c) for c in row) for row in rows]
        (args.out / "sweep.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"sweep table written to {args.out / 'sweep.csv'}")
    return 0


def _dev_as_test(stream):
    """Swap dev in as the scored split so sweeps never select on test data."""
    from streamcl.harness import DomainDataset, DomainStream

    domains = []
    for domain in stream.domains:
        if not domain.dev:
            raise ValueError(f"domain {domain.tag!r} has no dev examples to sweep on")
        domains.append(
            DomainDataset(tag=domain.tag, train=domain.train, dev=(), test=domain.dev)
        )
    return DomainStream(domains=tuple(domains))


def _cmd_report(args: argparse.Namespace) -> int:
    """Rebuild timeline.csv and heatmap.svg from stored per-run R matrices."""
    from streamcl.harness import RunResult, aggregate
    from streamcl.evaluation import average_accuracy, backward_transfer

    run_dirs = sorted((args.runs / "runs").glob("run-*"))
    if not run_dirs:
        raise ValueError(f"no runs/run-* directories under {args.runs}")
    runs = []
    for run_dir in run_dirs:
        result = read_result_csv(run_dir / "R.csv")
        meta = json.loads((run_dir / "run.json").read_text(encoding="utf-8"))
        metrics = {
            "acc": average_accuracy(result),
            "bwt": backward_transfer(result) if result.num_domains > 1 else float("nan"),
        }
        runs.append(
            RunResult(
                strategy=StrategyKind(Strategy(meta["strategy"]), meta["ttokens"]),
                order=tuple(meta["order"]),
                seed=meta["seed"],
                result=result,
                metrics=metrics,
            )
        )
    out = args.out or args.runs
    out.mkdir(parents=True, exist_ok=True)
    summary = aggregate(runs)
    write_timeline_csv(runs, out / "timeline.csv")
    render_heatmap_svg(summary["mean_matrix"], list(summary["aligned_tags"]), out / "heatmap.svg")
    print(f"rebuilt timeline.csv and heatmap.svg in {out} from {len(runs)} stored runs")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streamcl",
        description="Continual-learning experiments over labelled text-domain streams",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="train one strategy across orders and seeds")
    _add_run_flags(run_parser)
    run_parser.set_defaults(handler=_cmd_run)

    sweep_parser = commands.add_parser(
        "sweep", help="grid-search gem lambda or replay memory on dev accuracy"
    )
    _add_run_flags(sweep_parser)
    sweep_parser.add_argument(
        "--values", type=str, default=None, help="override the default comma-separated grid"
    )
    sweep_parser.set_defaults(handler=_cmd_sweep)

    report_parser = commands.add_parser(
        "report", help="regenerate CSV/SVG artifacts from stored run matrices"
    )
    report_parser.add_argument("--runs", type=Path, required=True, help="experiment output dir")
    report_parser.add_argument("--out", type=Path, default=None)
    report_parser.set_defaults(handler=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except Exception as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
