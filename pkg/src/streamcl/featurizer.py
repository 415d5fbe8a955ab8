"""Deterministic text featurization: hashed n-gram count vectors.

A fixed, platform-stable hash turns token n-grams into bucket indices:
the n-gram's tokens are UTF-8 encoded, joined with the 0x1F separator
byte, and digested with keyed BLAKE2b (``hashlib.blake2b``,
``digest_size=8``, key = the 64-bit ``hash_seed`` packed little-endian).
The 8-byte digest, read little-endian, modulo the vector dimension gives
the bucket. No use of Python's randomized ``hash()`` anywhere, so equal
inputs produce bitwise-equal vectors on every run and platform.

Domain tagging prepends one synthetic token ``⟨dom:<domain>⟩`` to the
token sequence before hashing, so the tag contributes its own unigram
plus a (tag, first-word) bigram. The model can then condition on the
domain an example came from.
"""

from __future__ import annotations

import hashlib
import struct
import unicodedata
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

NUM_CLASSES = 3

_NGRAM_SEPARATOR = b"\x1f"
_SEED_MASK = 0xFFFFFFFFFFFFFFFF


class Label(IntEnum):
    """Veracity classes; the integer value is the classifier row index."""

    TRUE = 0
    FALSE = 1
    UNVERIFIED = 2

    @classmethod
    def from_string(cls, raw: str) -> "Label":
        try:
            return cls[raw.strip().upper()]
        except KeyError:
            allowed = ", ".join(m.name.lower() for m in cls)
            raise ValueError(f"unknown label {raw!r} (expected one of: {allowed})") from None


@dataclass(frozen=True)
class Example:
    """One labelled text drawn from a named domain."""

    id: str
    text: str
    label: Label
    domain: str


@dataclass(frozen=True)
class FeaturizerConfig:
    dimension: int = 8192
    ngram_orders: tuple[int, ...] = (1, 2)
    hash_seed: int = 0
    ttokens_enabled: bool = False

    def __post_init__(self) -> None:
        orders = tuple(sorted(set(int(n) for n in self.ngram_orders)))
        object.__setattr__(self, "ngram_orders", orders)
        if self.dimension < NUM_CLASSES:
            raise ValueError(f"dimension must be >= {NUM_CLASSES}, got {self.dimension}")
        if not orders:
            raise ValueError("ngram_orders must not be empty")
        if orders[0] < 1:
            raise ValueError(f"ngram orders must be >= 1, got {orders[0]}")


def _is_punctuation(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_edge_punctuation(token: str) -> str:
    start, end = 0, len(token)
    while start < end and _is_punctuation(token[start]):
        start += 1
    while end > start and _is_punctuation(token[end - 1]):
        end -= 1
    return token[start:end]


def tokenize(text: str) -> list[str]:
    """Lowercase, split on Unicode whitespace, strip edge punctuation, drop empties."""
    tokens = []
    for raw in text.lower().split():
        token = _strip_edge_punctuation(raw)
        if token:
            tokens.append(token)
    return tokens


def domain_tag_token(domain: str) -> str:
    return f"⟨dom:{domain}⟩"


def apply_ttokens(example: Example) -> list[str]:
    """Tokenize with the example's domain tag prepended as a synthetic token."""
    if not example.domain.strip():
        raise ValueError(f"example {example.id!r} has an empty domain; cannot tag it")
    return [domain_tag_token(example.domain)] + tokenize(example.text)


def hash_bucket(ngram: tuple[str, ...], hash_seed: int, dimension: int) -> int:
    """Bucket index of one n-gram under the keyed BLAKE2b scheme (see module docstring)."""
    key = struct.pack("<Q", hash_seed & _SEED_MASK)
    data = _NGRAM_SEPARATOR.join(tok.encode("utf-8") for tok in ngram)
    digest = hashlib.blake2b(data, digest_size=8, key=key).digest()
    return int.from_bytes(digest, "little") % dimension


def featurize(tokens: list[str], config: FeaturizerConfig) -> np.ndarray:
    """Hashed n-gram counts over ``tokens``, L2-normalized unless all-zero."""
    vec = np.zeros(config.dimension, dtype=np.float64)
    for order in config.ngram_orders:
        for i in range(len(tokens) - order + 1):
            bucket = hash_bucket(tuple(tokens[i : i + order]), config.hash_seed, config.dimension)
            vec[bucket] += 1.0
    norm = float(np.linalg.norm(vec))
    if norm > 0.0:
        vec /= norm
    return vec


def encode_example(example: Example, config: FeaturizerConfig) -> np.ndarray:
    """Featurize one example, tagging it with its domain when enabled."""
    if config.ttokens_enabled:
        tokens = apply_ttokens(example)
    else:
        tokens = tokenize(example.text)
    return featurize(tokens, config)


def encode_dataset(
    examples: list[Example], config: FeaturizerConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Stack featurized examples into an (n, d) matrix plus an (n,) label vector."""
    features = np.zeros((len(examples), config.dimension), dtype=np.float64)
    labels = np.zeros(len(examples), dtype=np.int64)
    for i, example in enumerate(examples):
        features[i] = encode_example(example, config)
        labels[i] = int(example.label)
    return features, labels


def load_embeddings(path: str | Path) -> dict[str, np.ndarray]:
    """Parse a precomputed-embedding file: ``id<TAB>v1 v2 ... vd`` per line.

    All vectors must share one dimension. Raises ValueError naming the
    offending line on a malformed record, a dimension mismatch, or a
    duplicate id.
    """
    vectors: dict[str, np.ndarray] = {}
    dimension: int | None = None
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise ValueError(f"line {lineno}: expected '<id>\\t<values>', got no tab")
            example_id, _, payload = line.partition("\t")
            if not example_id:
                raise ValueError(f"line {lineno}: empty id")
            if example_id in vectors:
                raise ValueError(f"line {lineno}: duplicate id {example_id!r}")
            try:
                values = np.array([float(v) for v in payload.split()], dtype=np.float64)
            except ValueError:
                raise ValueError(f"line {lineno}: non-numeric embedding value") from None
            if values.size == 0:
                raise ValueError(f"line {lineno}: no embedding values")
            if dimension is None:
                dimension = values.size
            elif values.size != dimension:
                raise ValueError(
                    f"line {lineno}: dimension {values.size} != expected {dimension}"
                )
            vectors[example_id] = values
    return vectors
