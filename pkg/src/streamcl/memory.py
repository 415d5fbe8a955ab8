"""Episodic memory: a per-domain store of featurized training samples.

Each domain gets one slot, filled exactly once with a uniform
without-replacement draw from that domain's training set. Slots are
never touched again, so committing a new domain cannot disturb what
rehearsal or gradient projection see for older domains.
"""

from __future__ import annotations

import numpy as np

Slot = tuple[np.ndarray, np.ndarray]


class EpisodicMemory:
    def __init__(self, budget_per_domain: int = 25):
        if budget_per_domain < 1:
            raise ValueError(f"budget_per_domain must be >= 1, got {budget_per_domain}")
        self.budget_per_domain = budget_per_domain
        self._slots: dict[str, Slot] = {}

    @property
    def domains(self) -> list[str]:
        return list(self._slots)

    @property
    def size(self) -> int:
        return sum(labels.shape[0] for _, labels in self._slots.values())

    def commit_domain(
        self,
        domain: str,
        features: np.ndarray,
        labels: np.ndarray,
        rng: np.random.Generator,
    ) -> "EpisodicMemory":
        """Return a new memory with ``domain`` filled; existing slots are shared as-is.

        Draws min(budget, n) samples uniformly without replacement.
        Committing an already-stored domain or an empty training set is
        an error.
        """
        if domain in self._slots:
            raise ValueError(f"domain {domain!r} was already committed to memory")
        count = features.shape[0]
        if count == 0:
            raise ValueError(f"cannot commit empty training set for domain {domain!r}")
        take = min(self.budget_per_domain, count)
        chosen = np.sort(rng.choice(count, size=take, replace=False))
        updated = EpisodicMemory(self.budget_per_domain)
        updated._slots = dict(self._slots)
        updated._slots[domain] = (features[chosen].copy(), labels[chosen].copy())
        return updated

    def per_domain_samples(self) -> list[tuple[str, Slot]]:
        """Slots in commit order as (domain, (features, labels)) pairs."""
        return [(domain, slot) for domain, slot in self._slots.items()]

    def all_samples(self) -> Slot:
        """All stored samples concatenated in commit order; empty arrays when empty."""
        if not self._slots:
            return np.zeros((0, 0), dtype=np.float64), np.zeros(0, dtype=np.int64)
        features = np.concatenate([slot[0] for slot in self._slots.values()], axis=0)
        labels = np.concatenate([slot[1] for slot in self._slots.values()], axis=0)
        return features, labels
