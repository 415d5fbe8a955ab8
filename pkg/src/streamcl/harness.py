"""Experiment harness: corpus ingestion, splits, stream orders, run loop.

A corpus is JSONL with fields ``id``, ``text``, ``label`` (true / false /
unverified, case-insensitive), and ``domain``. Ingestion is strict and
every rejection names the offending line. Domains are split
train/dev/test by ratio with floor arithmetic, streams can be reordered
per run, and ``run_experiment`` drives the full loop: featurize, train
each domain with the configured strategy, commit memory, and score every
domain's test set after every step. Everything is deterministic given
the config.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from streamcl.classifier import LinearModel, TrainConfig, loss
from streamcl.evaluation import (
    ResultMatrix,
    average_accuracy,
    backward_transfer,
    evaluate_row,
    timeline_accuracy,
)
from streamcl.featurizer import NUM_CLASSES, Example, FeaturizerConfig, Label, encode_dataset
from streamcl.memory import EpisodicMemory
from streamcl.strategies import GemConfig, StrategyKind, train_domain

MEMORY_SCOPES = ("per-domain", "total")


@dataclass(frozen=True)
class DomainDataset:
    """One domain's split corpus. Test must be non-empty; ids must not repeat."""

    tag: str
    train: tuple[Example, ...]
    dev: tuple[Example, ...]
    test: tuple[Example, ...]

    def __post_init__(self) -> None:
        if not self.tag:
            raise ValueError("domain tag must be non-empty")
        if not self.test:
            raise ValueError(f"domain {self.tag!r} has an empty test set")
        ids = [ex.id for ex in self.train + self.dev + self.test]
        if len(set(ids)) != len(ids):
            raise ValueError(f"domain {self.tag!r} has duplicate example ids across splits")


@dataclass(frozen=True)
class DomainStream:
    domains: tuple[DomainDataset, ...]

    def __post_init__(self) -> None:
        if not self.domains:
            raise ValueError("stream must contain at least one domain")
        tags = [d.tag for d in self.domains]
        if len(set(tags)) != len(tags):
            raise ValueError("stream contains duplicate domain tags")

    @property
    def tags(self) -> list[str]:
        return [d.tag for d in self.domains]

    def __len__(self) -> int:
        return len(self.domains)


@dataclass(frozen=True)
class RunConfig:
    strategy: StrategyKind
    featurizer: FeaturizerConfig = FeaturizerConfig()
    train: TrainConfig = TrainConfig()
    gem: GemConfig = GemConfig()
    memory_budget: int = 25
    memory_scope: str = "per-domain"
    split_ratios: tuple[float, float, float] = (0.4, 0.1, 0.5)
    domain_orders: int | tuple[tuple[int, ...], ...] = 3
    order_seed: int = 0
    seeds: tuple[int, ...] = (0,)
    output_dir: Optional[Path] = None

    def __post_init__(self) -> None:
        if self.memory_budget < 1:
            raise ValueError(f"memory_budget must be >= 1, got {self.memory_budget}")
        if self.memory_scope not in MEMORY_SCOPES:
            raise ValueError(
                f"memory_scope must be one of {MEMORY_SCOPES}, got {self.memory_scope!r}"
            )
        ratios = self.split_ratios
        if len(ratios) != 3 or any(r <= 0.0 for r in ratios):
            raise ValueError(f"split_ratios must be three positive floats, got {ratios!r}")
        if abs(sum(ratios) - 1.0) > 1e-9:
            raise ValueError(f"split_ratios must sum to 1, got {sum(ratios)!r}")
        if isinstance(self.domain_orders, int):
            if self.domain_orders < 1:
                raise ValueError("domain_orders count must be >= 1")
        elif not self.domain_orders:
            raise ValueError("domain_orders list must not be empty")
        if not self.seeds:
            raise ValueError("seeds must not be empty")


@dataclass
class RunResult:
    """One (order, seed) execution: the accuracy grid plus summary metrics and logs."""

    strategy: StrategyKind
    order: tuple[int, ...]
    seed: int
    result: ResultMatrix
    metrics: dict[str, float]
    logs: list[dict] = field(default_factory=list)


@dataclass
class ExperimentResult:
    runs: list[RunResult]
    summary: dict[str, float]


def load_corpus(path: str | Path) -> list[Example]:
    """Read a JSONL corpus strictly; every error names the offending line."""
    examples: list[Example] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as err:
                raise ValueError(f"line {lineno}: invalid JSON ({err.msg})") from None
            if not isinstance(record, dict):
                raise ValueError(f"line {lineno}: expected a JSON object")
            for fieldname in ("id", "text", "label", "domain"):
                if fieldname not in record:
                    raise ValueError(f"line {lineno}: missing field {fieldname!r}")
            example_id = str(record["id"])
            if example_id in seen_ids:
                raise ValueError(f"line {lineno}: duplicate id {example_id!r}")
            seen_ids.add(example_id)
            text = str(record["text"])
            if not text.strip():
                raise ValueError(f"line {lineno}: empty text")
            domain = str(record["domain"])
            if not domain.strip():
                raise ValueError(f"line {lineno}: empty domain")
            try:
                label = Label.from_string(str(record["label"]))
            except ValueError as err:
                raise ValueError(f"line {lineno}: {err}") from None
            examples.append(Example(id=example_id, text=text, label=label, domain=domain))
    return examples


def domain_counts(examples: Sequence[Example]) -> dict[str, dict[str, int]]:
    """Per-domain example counts by label plus totals, keyed by domain tag."""
    counts: dict[str, dict[str, int]] = {}
    for example in examples:
        slot = counts.setdefault(
            example.domain, {label.name.lower(): 0 for label in Label} | {"total": 0}
        )
        slot[example.label.name.lower()] += 1
        slot["total"] += 1
    return counts


def split_domains(
    examples: Sequence[Example],
    ratios: tuple[float, float, float] = (0.4, 0.1, 0.5),
    seed: int = 0,
) -> DomainStream:
    """Group by domain and split train/dev/test with floor arithmetic.

    Counts are floor(ratio * n) for train and dev; test takes the
    remainder. Domains keep first-appearance order; within a domain the
    examples are shuffled once with the split seed. Domains with fewer
    than 3 examples cannot populate the splits and are rejected.
    """
    if abs(sum(ratios) - 1.0) > 1e-9 or any(r <= 0.0 for r in ratios):
        raise ValueError(f"ratios must be positive and sum to 1, got {ratios!r}")
    by_domain: dict[str, list[Example]] = {}
    for example in examples:
        by_domain.setdefault(example.domain, []).append(example)
    if not by_domain:
        raise ValueError("corpus contains no examples")
    rng = np.random.default_rng(seed)
    domains = []
    for tag, members in by_domain.items():
        count = len(members)
        if count < 3:
            raise ValueError(f"domain {tag!r} has only {count} examples (minimum 3)")
        order = rng.permutation(count)
        shuffled = [members[i] for i in order]
        n_train = math.floor(ratios[0] * count)
        n_dev = math.floor(ratios[1] * count)
        domains.append(
            DomainDataset(
                tag=tag,
                train=tuple(shuffled[:n_train]),
                dev=tuple(shuffled[n_train : n_train + n_dev]),
                test=tuple(shuffled[n_train + n_dev :]),
            )
        )
    return DomainStream(domains=tuple(domains))


def order_stream(
    stream: DomainStream,
    permutation: Optional[Sequence[int]] = None,
    order_seed: Optional[int] = None,
) -> DomainStream:
    """Reorder domains by an explicit permutation or by a seeded draw."""
    size = len(stream)
    if (permutation is None) == (order_seed is None):
        raise ValueError("pass exactly one of permutation or order_seed")
    if permutation is None:
        permutation = tuple(int(i) for i in np.random.default_rng(order_seed).permutation(size))
    else:
        permutation = tuple(int(i) for i in permutation)
        if sorted(permutation) != list(range(size)):
            raise ValueError(
                f"permutation {permutation!r} is not a permutation of 0..{size - 1}"
            )
    return DomainStream(domains=tuple(stream.domains[i] for i in permutation))


def _resolve_orders(config: RunConfig, size: int) -> list[tuple[int, ...]]:
    if isinstance(config.domain_orders, int):
        rng = np.random.default_rng(config.order_seed)
        return [tuple(int(i) for i in rng.permutation(size)) for _ in range(config.domain_orders)]
    orders = []
    for perm in config.domain_orders:
        perm = tuple(int(i) for i in perm)
        if sorted(perm) != list(range(size)):
            raise ValueError(f"order {perm!r} is not a permutation of 0..{size - 1}")
        orders.append(perm)
    return orders


def _resolve_budget(config: RunConfig, stream_size: int) -> int:
    """Per-slot budget: the configured number per domain, or an equal share of a total."""
    if config.memory_scope == "per-domain":
        return config.memory_budget
    return max(1, config.memory_budget // stream_size)


def _stream_sets(
    stream: DomainStream, featurizer: FeaturizerConfig
) -> tuple[list[tuple[np.ndarray, np.ndarray]], list[tuple[np.ndarray, np.ndarray]]]:
    train_sets = [encode_dataset(list(d.train), featurizer) for d in stream.domains]
    test_sets = [encode_dataset(list(d.test), featurizer) for d in stream.domains]
    return train_sets, test_sets


def _check_isolation(stream: DomainStream) -> None:
    train_ids = {ex.id for d in stream.domains for ex in d.train}
    test_ids = {ex.id for d in stream.domains for ex in d.test}
    leaked = train_ids & test_ids
    if leaked:
        raise ValueError(f"{len(leaked)} example ids appear in both train and test")


def run_single(config: RunConfig, stream: DomainStream, seed: int) -> RunResult:
    """Train through ``stream`` in its given order with one seed; score after each step.

    The strategy's tag flag overrides the featurizer's, so tagged and
    untagged variants share the rest of the config. Memory commits
    happen after training a domain and only for strategies that use
    memory, so a domain's own batch never competes with its memory copy.
    """
    _check_isolation(stream)
    featurizer = replace(config.featurizer, ttokens_enabled=config.strategy.ttokens)
    train_sets, test_sets = _stream_sets(stream, featurizer)
    if any(labels.shape[0] == 0 for _, labels in train_sets):
        raise ValueError("every domain must have a non-empty training set")

    rng = np.random.default_rng(seed)
    model = LinearModel.zeros(NUM_CLASSES, featurizer.dimension)
    memory = EpisodicMemory(_resolve_budget(config, len(stream)))
    result = ResultMatrix(domain_order=stream.tags)
    logs: list[dict] = []

    for step, domain in enumerate(stream.domains):
        record: dict = {
            "step": step,
            "domain": domain.tag,
            "train_size": train_sets[step][1].shape[0],
            "memory_size": memory.size,
        }
        if memory.size > 0:
            record["memory_loss_before"] = loss(model, *memory.all_samples())
        model = train_domain(
            model,
            train_sets[step],
            memory,
            config.strategy.kind,
            config.train,
            config.gem,
            rng=rng,
        )
        if memory.size > 0:
            record["memory_loss_after"] = loss(model, *memory.all_samples())
        if config.strategy.kind.uses_memory:
            memory = memory.commit_domain(domain.tag, *train_sets[step], rng=rng)
        result.write_row(evaluate_row(model, test_sets))
        record["timeline_accuracy"] = float(timeline_accuracy(result)[-1])
        logs.append(record)

    metrics = {
        "acc": average_accuracy(result),
        "bwt": backward_transfer(result) if len(stream) > 1 else float("nan"),
        "final_step_accuracy": float(result.values[-1, -1]),
    }
    return RunResult(
        strategy=config.strategy,
        order=tuple(range(len(stream))),
        seed=seed,
        result=result,
        metrics=metrics,
        logs=logs,
    )


def run_experiment(config: RunConfig, stream: DomainStream) -> ExperimentResult:
    """Run every (order, seed) pair in the config and aggregate the results.

    Orders come from ``config.domain_orders`` (explicit permutations, or
    a count drawn deterministically from ``order_seed``); each order is
    paired with every seed. When ``output_dir`` is set, reports are
    written there; a failure mid-run still flushes partial results along
    with a FAILED marker before the error propagates.
    """
    from streamcl.reports import emit_reports

    orders = _resolve_orders(config, len(stream))
    runs: list[RunResult] = []
    failure: Exception | None = None
    try:
        for order in orders:
            ordered = order_stream(stream, permutation=order)
            for seed in config.seeds:
                run = run_single(config, ordered, seed)
                run.order = order
                runs.append(run)
    except Exception as err:
        failure = err
    summary = aggregate(runs) if runs else {}
    if config.output_dir is not None:
        emit_reports(runs, summary, config.output_dir, failed=failure is not None)
    if failure is not None:
        raise failure
    return ExperimentResult(runs=runs, summary=summary)


def _aligned_mean_matrix(runs: list[RunResult]) -> tuple[list[str], np.ndarray]:
    """Cell-wise mean of the run matrices with rows/columns aligned by domain tag."""
    reference = runs[0].result.domain_order
    canonical = sorted(reference)
    size = len(canonical)
    total = np.zeros((size, size), dtype=np.float64)
    for run in runs:
        tags = run.result.domain_order
        if sorted(tags) != canonical:
            raise ValueError("runs cover different domain sets; cannot align matrices")
        indices = [tags.index(tag) for tag in canonical]
        total += run.result.values[np.ix_(indices, indices)]
    return canonical, total / len(runs)


def aggregate(runs: list[RunResult]) -> dict:
    """Mean and sample standard deviation of the per-run metrics.

    The aggregated accuracy is the mean of per-run accuracies (not the
    accuracy of a mean matrix). A single run reports deviation 0.
    """
    if not runs:
        raise ValueError("no runs to aggregate")

    def stats(values: list[float]) -> tuple[float, float]:
        clean = [v for v in values if not math.isnan(v)]
        if not clean:
            return float("nan"), float("nan")
        mean = float(np.mean(clean))
        std = float(np.std(clean, ddof=1)) if len(clean) > 1 else 0.0
        return mean, std

    acc_mean, acc_std = stats([run.metrics["acc"] for run in runs])
    bwt_mean, bwt_std = stats([run.metrics["bwt"] for run in runs])
    tags, mean_matrix = _aligned_mean_matrix(runs)
    return {
        "num_runs": len(runs),
        "acc_mean": acc_mean,
        "acc_std": acc_std,
        "bwt_mean": bwt_mean,
        "bwt_std": bwt_std,
        "aligned_tags": tags,
        "mean_matrix": mean_matrix,
    }


__all__ = [
    "DomainDataset",
    "DomainStream",
    "ExperimentResult",
    "RunConfig",
    "RunResult",
    "aggregate",
    "domain_counts",
    "load_corpus",
    "order_stream",
    "run_experiment",
    "run_single",
    "split_domains",
]
