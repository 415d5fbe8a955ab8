"""Synthetic stream generators: determinism, structure, and interference modes."""

from collections import defaultdict

import numpy as np
import pytest

from streamcl.harness import RunConfig, run_single
from streamcl.strategies import Strategy, StrategyKind
from streamcl.synthetic import (
    SyntheticSpec,
    build_conflict_design,
    make_synthetic_stream,
)


def _all_examples(stream):
    for domain in stream.domains:
        for example in domain.train + domain.dev + domain.test:
            yield example


def _tokens(stream):
    tokens = set()
    for example in _all_examples(stream):
        tokens.update(example.text.split())
    return tokens


class TestSpecValidation:
    def test_rejects_unknown_mode(self):
        with pytest.raises(ValueError, match="mode"):
            SyntheticSpec(mode="adversarial", num_domains=3)

    def test_rejects_zero_domains(self):
        with pytest.raises(ValueError, match="num_domains"):
            SyntheticSpec(mode="conflict", num_domains=0)

    def test_rejects_bad_class_count(self):
        with pytest.raises(ValueError, match="num_classes"):
            SyntheticSpec(mode="conflict", num_domains=2, num_classes=1)
        with pytest.raises(ValueError, match="num_classes"):
            SyntheticSpec(mode="conflict", num_domains=2, num_classes=4)

    def test_rejects_empty_train_or_test(self):
        with pytest.raises(ValueError, match="sizes"):
            SyntheticSpec(mode="disjoint", num_domains=2, train_size=0)
        with pytest.raises(ValueError, match="sizes"):
            SyntheticSpec(mode="disjoint", num_domains=2, test_size=0)

    def test_dev_may_be_empty(self):
        spec = SyntheticSpec(mode="disjoint", num_domains=2, dev_size=0)
        stream = make_synthetic_stream(spec, seed=0)
        assert all(len(d.dev) == 0 for d in stream.domains)


class TestStreamShape:
    def test_default_sizes_and_domain_count(self):
        spec = SyntheticSpec(mode="conflict", num_domains=5)
        stream = make_synthetic_stream(spec, seed=0)
        assert len(stream.domains) == 5
        for domain in stream.domains:
            assert len(domain.train) == 200
            assert len(domain.dev) == 50
            assert len(domain.test) == 200

    def test_ids_unique_across_stream(self):
        spec = SyntheticSpec(mode="conflict", num_domains=3)
        stream = make_synthetic_stream(spec, seed=0)
        ids = [ex.id for ex in _all_examples(stream)]
        assert len(ids) == len(set(ids))

    def test_examples_carry_their_domain_tag(self):
        spec = SyntheticSpec(mode="disjoint", num_domains=3)
        stream = make_synthetic_stream(spec, seed=0)
        for domain in stream.domains:
            for example in domain.train + domain.dev + domain.test:
                assert example.domain == domain.tag

    def test_domain_tags_are_ordered(self):
        spec = SyntheticSpec(mode="conflict", num_domains=4)
        stream = make_synthetic_stream(spec, seed=0)
        assert [d.tag for d in stream.domains] == ["dom00", "dom01", "dom02", "dom03"]


class TestDeterminism:
    @pytest.mark.parametrize("mode", ["disjoint", "conflict"])
    def test_same_seed_reproduces_stream(self, mode):
        spec = SyntheticSpec(mode=mode, num_domains=3)
        a = make_synthetic_stream(spec, seed=7)
        b = make_synthetic_stream(spec, seed=7)
        for left, right in zip(_all_examples(a), _all_examples(b)):
            assert left == right

    @pytest.mark.parametrize("mode", ["disjoint", "conflict"])
    def test_seed_changes_stream(self, mode):
        spec = SyntheticSpec(mode=mode, num_domains=3)
        a = make_synthetic_stream(spec, seed=0)
        b = make_synthetic_stream(spec, seed=1)
        texts_a = [ex.text for ex in _all_examples(a)]
        texts_b = [ex.text for ex in _all_examples(b)]
        assert texts_a != texts_b


class TestDisjointMode:
    def test_two_domain_vocabularies_are_disjoint(self):
        spec = SyntheticSpec(mode="disjoint", num_domains=2)
        stream = make_synthetic_stream(spec, seed=0)
        first = set()
        second = set()
        for ex in stream.domains[0].train + stream.domains[0].dev + stream.domains[0].test:
            first.update(ex.text.split())
        for ex in stream.domains[1].train + stream.domains[1].dev + stream.domains[1].test:
            second.update(ex.text.split())
        assert first
        assert second
        assert first.isdisjoint(second)

    def test_examples_have_ten_tokens(self):
        spec = SyntheticSpec(mode="disjoint", num_domains=2)
        stream = make_synthetic_stream(spec, seed=0)
        for example in _all_examples(stream):
            assert len(example.text.split()) == 10

    def test_all_classes_appear(self):
        spec = SyntheticSpec(mode="disjoint", num_domains=2)
        stream = make_synthetic_stream(spec, seed=0)
        for domain in stream.domains:
            labels = {int(ex.label) for ex in domain.train}
            assert labels == {0, 1, 2}

    def test_sequential_training_drops_first_domain(self):
        spec = SyntheticSpec(mode="disjoint", num_domains=2)
        stream = make_synthetic_stream(spec, seed=0)
        cfg = RunConfig(strategy=StrategyKind(Strategy("naive")))
        result = run_single(cfg, stream, seed=0)
        grid = result.result.values
        assert grid[1][0] < grid[0][0]


class TestConflictMode:
    def test_identical_texts_with_different_labels_exist(self):
        spec = SyntheticSpec(mode="conflict", num_domains=2)
        stream = make_synthetic_stream(spec, seed=0)
        labels_by_text = defaultdict(set)
        for example in _all_examples(stream):
            labels_by_text[example.text].add(int(example.label))
        conflicting = [t for t, labels in labels_by_text.items() if len(labels) > 1]
        assert conflicting

    def test_label_maps_are_permutations_and_differ(self):
        spec = SyntheticSpec(mode="conflict", num_domains=5)
        design = build_conflict_design(spec)
        for label_map in design.label_maps:
            assert sorted(label_map) == [0, 1, 2]
        for earlier, later in zip(design.label_maps, design.label_maps[1:]):
            assert earlier != later

    def test_anchor_tokens_are_shared_across_domains(self):
        spec = SyntheticSpec(mode="conflict", num_domains=3)
        design = build_conflict_design(spec)
        stream = make_synthetic_stream(spec, seed=0)
        anchors = set(design.anchors)
        for domain in stream.domains:
            seen = set()
            for ex in domain.train:
                seen.update(anchors & set(ex.text.split()))
            assert seen == anchors

    def test_context_tokens_are_domain_private(self):
        spec = SyntheticSpec(mode="conflict", num_domains=3)
        design = build_conflict_design(spec)
        stream = make_synthetic_stream(spec, seed=0)
        for d, domain in enumerate(stream.domains):
            own = {t for group in design.slices[d] for t in group}
            foreign = {
                t
                for other, per_domain in enumerate(design.slices)
                if other != d
                for group in per_domain
                for t in group
            }
            used = set()
            for ex in domain.train + domain.dev + domain.test:
                used.update(ex.text.split())
            assert used & own
            assert not (used & foreign)

    def test_example_follows_anchor_context_noise_shape(self):
        spec = SyntheticSpec(mode="conflict", num_domains=2)
        design = build_conflict_design(spec)
        stream = make_synthetic_stream(spec, seed=0)
        anchors = set(design.anchors)
        wire_count = 0
        for example in _all_examples(stream):
            tokens = example.text.split()
            assert tokens[0] in anchors
            if tokens[1:] == ["wirex", "wirey"]:
                wire_count += 1
                continue
            assert len(tokens) == 4
            assert tokens[1] == tokens[2]
            assert tokens[1].startswith("d")
            assert tokens[3].startswith("n")
        assert wire_count > 0

    def test_labels_follow_the_domain_map(self):
        spec = SyntheticSpec(mode="conflict", num_domains=3)
        design = build_conflict_design(spec)
        stream = make_synthetic_stream(spec, seed=0)
        slot_of_anchor = {a: g for g, a in enumerate(design.anchors)}
        for d, domain in enumerate(stream.domains):
            for ex in domain.train + domain.dev + domain.test:
                slot = slot_of_anchor[ex.text.split()[0]]
                assert int(ex.label) == design.label_maps[d][slot]

    def test_single_domain_stream_generates(self):
        spec = SyntheticSpec(
            mode="conflict", num_domains=1, train_size=40, dev_size=5, test_size=20
        )
        stream = make_synthetic_stream(spec, seed=0)
        assert len(stream.domains) == 1
        assert len(stream.domains[0].train) == 40

    def test_two_class_streams_still_conflict(self):
        spec = SyntheticSpec(
            mode="conflict",
            num_domains=2,
            num_classes=2,
            train_size=40,
            dev_size=5,
            test_size=20,
        )
        design = build_conflict_design(spec)
        assert design.label_maps[0] != design.label_maps[1]
        stream = make_synthetic_stream(spec, seed=0)
        labels = {int(ex.label) for ex in _all_examples(stream)}
        assert labels == {0, 1}
