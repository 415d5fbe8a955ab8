"""Synthetic domain streams with controllable cross-domain interference.

Two generator modes:

- ``disjoint``: every domain draws from its own private vocabulary, so
  domains can only interfere through the shared classifier weights (in
  practice, the bias). Per-domain class priors are mildly skewed and
  rotate across domains, which gives sequential fine-tuning something
  to drift on while rehearsal stays flat.

- ``conflict``: all domains share one small set of per-class anchor
  tokens, but each domain maps anchors to labels through its own
  permutation, so every domain's training repurposes the same dense
  coordinates and sequential fine-tuning overwrites old mappings at
  full volume. Each example also carries a doubled context token from
  a thin per-(domain, class) pool: too weak to carry the fit on its
  own while the anchor is being learned, but rehearsable afterwards,
  which is the only signal an untagged memory strategy can use to keep
  old domains partially right. A domain-tagged model can instead key
  the mapping off the (tag, anchor) pair directly and sidestep the
  conflict entirely. A small "wire" flavor uses a fixed template, so
  identical untagged texts with different labels are guaranteed to
  exist across domains.

Both modes are fully deterministic given the spec and seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from streamcl.featurizer import Example, Label
from streamcl.harness import DomainDataset, DomainStream

MODES = ("disjoint", "conflict")

TOKENS_PER_EXAMPLE = 10

# disjoint mode: private 50-token vocabularies, 20-token preferred subsets
# per class, tokens drawn 80/20 preferred/other, rotating skewed priors.
_DISJOINT_VOCAB = 50
_DISJOINT_PREFERRED = 20
_DISJOINT_PREFERRED_MASS = 0.8
_DISJOINT_PRIOR = (0.4, 0.3, 0.3)

# conflict mode: one shared anchor token per class slot, relabeled by
# every domain's permutation, plus a doubled context token from a thin
# per-(domain, slot) pool and one shared noise token. The anchor is the
# densest coordinate in each domain's training, so it wins the co-fit
# race and sequential fine-tuning rests its fit there, only to have the
# next domain flip it; the doubled context token is what rehearsal can
# rebuild afterwards. Pool size balances that rebuilding (smaller is
# easier to defend) against how much residual context signal
# fine-tuning retains on its own (smaller leaves more).
_CONFLICT_SLICE = 30
_CONFLICT_NOISE = 400
_CONFLICT_NOISE_POSITIONS = 1
_CONFLICT_P_WIRE = 0.04  # fixed-template flavor; guarantees identical
# untagged texts with different labels across domains.


@dataclass(frozen=True)
class SyntheticSpec:
    mode: str
    num_domains: int
    train_size: int = 200
    dev_size: int = 50
    test_size: int = 200
    num_classes: int = 3

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.num_domains < 1:
            raise ValueError(f"num_domains must be >= 1, got {self.num_domains}")
        if not 2 <= self.num_classes <= len(Label):
            raise ValueError(
                f"num_classes must be between 2 and {len(Label)}, got {self.num_classes}"
            )
        if self.train_size < 1 or self.test_size < 1 or self.dev_size < 0:
            raise ValueError("train and test sizes must be >= 1, dev size >= 0")


@dataclass(frozen=True)
class DisjointDesign:
    vocabularies: tuple[tuple[str, ...], ...]  # [domain] -> private tokens
    preferred: tuple[tuple[tuple[str, ...], ...], ...]  # [domain][class] -> subset
    priors: tuple[tuple[float, ...], ...]  # [domain] -> class prior


@dataclass(frozen=True)
class ConflictDesign:
    anchors: tuple[str, ...]  # [slot] -> shared anchor token
    noise: tuple[str, ...]  # shared across all domains and slots
    slices: tuple[tuple[tuple[str, ...], ...], ...]  # [domain][slot] -> context pool
    label_maps: tuple[tuple[int, ...], ...]  # [domain][slot] -> class index


def _domain_tag(index: int) -> str:
    return f"dom{index:02d}"


def build_disjoint_design(spec: SyntheticSpec, rng: np.random.Generator) -> DisjointDesign:
    vocabularies = []
    preferred = []
    priors = []
    base = _DISJOINT_PRIOR[: spec.num_classes]
    base = tuple(p / sum(base) for p in base)
    for d in range(spec.num_domains):
        vocab = tuple(f"d{d:02d}w{j:02d}" for j in range(_DISJOINT_VOCAB))
        vocabularies.append(vocab)
        # Cyclic stride 17 spreads the forced subset overlap (3 x 20
        # picks from 50 tokens) evenly across class pairs, 3-4 shared
        # tokens each; stacking it all on one pair makes that pair's
        # confusability dominate per-domain accuracy variance.
        shuffled = rng.permutation(_DISJOINT_VOCAB)
        subsets = []
        for c in range(spec.num_classes):
            start = c * 17
            chosen = [shuffled[(start + j) % _DISJOINT_VOCAB] for j in range(_DISJOINT_PREFERRED)]
            subsets.append(tuple(vocab[j] for j in sorted(chosen)))
        preferred.append(tuple(subsets))
        shift = d % spec.num_classes
        priors.append(tuple(base[(c - shift) % spec.num_classes] for c in range(spec.num_classes)))
    return DisjointDesign(
        vocabularies=tuple(vocabularies), preferred=tuple(preferred), priors=tuple(priors)
    )


def _conflict_permutations(num_classes: int) -> list[tuple[int, ...]]:
    identity = tuple(range(num_classes))
    others = [p for p in permutations(range(num_classes)) if p != identity]
    # With 3+ classes the non-identity maps already disagree pairwise
    # somewhere; with 2 classes alternate swap and identity instead so
    # consecutive domains still conflict.
    return others if num_classes >= 3 else [others[0], identity]


def build_conflict_design(spec: SyntheticSpec) -> ConflictDesign:
    slots = spec.num_classes
    anchors = tuple(f"slot{g}" for g in range(slots))
    noise = tuple(f"n{j:02d}" for j in range(_CONFLICT_NOISE))
    slices = tuple(
        tuple(
            tuple(f"d{d:02d}g{g}x{j:02d}" for j in range(_CONFLICT_SLICE))
            for g in range(slots)
        )
        for d in range(spec.num_domains)
    )
    perms = _conflict_permutations(spec.num_classes)
    label_maps = tuple(perms[d % len(perms)] for d in range(spec.num_domains))
    return ConflictDesign(anchors=anchors, noise=noise, slices=slices, label_maps=label_maps)


def _pick(rng: np.random.Generator, pool: tuple[str, ...]) -> str:
    return pool[int(rng.integers(len(pool)))]


def _disjoint_example(
    design: DisjointDesign, domain: int, spec: SyntheticSpec, rng: np.random.Generator
) -> tuple[str, int]:
    klass = int(rng.choice(spec.num_classes, p=design.priors[domain]))
    subset = design.preferred[domain][klass]
    others = tuple(t for t in design.vocabularies[domain] if t not in set(subset))
    # Exact 80/20 split per example; a per-position Bernoulli leaves a
    # binomial tail of off-class-heavy examples whose frequency varies
    # by domain and dominates per-domain accuracy variance.
    preferred_count = round(TOKENS_PER_EXAMPLE * _DISJOINT_PREFERRED_MASS)
    tokens = [_pick(rng, subset) for _ in range(preferred_count)]
    tokens += [_pick(rng, others) for _ in range(TOKENS_PER_EXAMPLE - preferred_count)]
    return " ".join(tokens), klass


def _conflict_example(
    design: ConflictDesign, domain: int, spec: SyntheticSpec, rng: np.random.Generator
) -> tuple[str, int]:
    slot = int(rng.integers(spec.num_classes))
    klass = design.label_maps[domain][slot]
    anchor = design.anchors[slot]
    if rng.random() < _CONFLICT_P_WIRE:
        return f"{anchor} wirex wirey", klass
    s = _pick(rng, design.slices[domain][slot])
    tokens = [anchor, s, s]
    tokens += [_pick(rng, design.noise) for _ in range(_CONFLICT_NOISE_POSITIONS)]
    return " ".join(tokens), klass


def make_synthetic_stream(spec: SyntheticSpec, seed: int = 0) -> DomainStream:
    """Generate a fully split domain stream for the given mode, spec, and seed."""
    rng = np.random.default_rng(seed)
    if spec.mode == "disjoint":
        disjoint = build_disjoint_design(spec, rng)

        def draw(domain: int) -> tuple[str, int]:
            return _disjoint_example(disjoint, domain, spec, rng)

    else:
        conflict = build_conflict_design(spec)

        def draw(domain: int) -> tuple[str, int]:
            return _conflict_example(conflict, domain, spec, rng)

    domains = []
    sizes = (("train", spec.train_size), ("dev", spec.dev_size), ("test", spec.test_size))
    for d in range(spec.num_domains):
        tag = _domain_tag(d)
        splits: dict[str, list[Example]] = {}
        for split_name, size in sizes:
            members = []
            for i in range(size):
                text, klass = draw(d)
                members.append(
                    Example(
                        id=f"{spec.mode}-{tag}-{split_name}-{i:04d}",
                        text=text,
                        label=Label(klass),
                        domain=tag,
                    )
                )
            splits[split_name] = members
        domains.append(
            DomainDataset(
                tag=tag,
                train=tuple(splits["train"]),
                dev=tuple(splits["dev"]),
                test=tuple(splits["test"]),
            )
        )
    return DomainStream(domains=tuple(domains))
