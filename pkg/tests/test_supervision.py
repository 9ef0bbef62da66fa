"""Annotation invariants and language/weight exactness of compiled automata."""

import itertools
import math

import numpy as np
import pytest

from weaklattice.automaton import accepts
from weaklattice.errors import InvalidSpec, UnsupportedCardinality
from weaklattice.oracle import labeling_weight
from weaklattice.supervision import (
    ClassPrior,
    FullLabels,
    LabelProportion,
    MultiClassLabelProportion,
    MultiClassMultiInstance,
    MultiInstance,
    PairwiseComparison,
    PairwiseSimilarity,
    PartialLabel,
    PositiveConfidence,
    Unconstrained,
    WeightedPair,
    compile_spec,
    from_dict,
    one_vs_rest,
    to_dict,
)


def language(nfa, length, num_classes):
    out = {}
    for y in itertools.product(range(num_classes), repeat=length):
        w = accepts(nfa, y)
        if w is not None:
            out[y] = w
    return out


def assert_language_matches_predicate(spec, num_classes):
    """Compiled language == direct predicate re-implementation, weights too."""
    nfa = compile_spec(spec, num_classes)
    got = language(nfa, spec.length, num_classes)
    for y in itertools.product(range(num_classes), repeat=spec.length):
        w = labeling_weight(spec, y)
        if w == 0.0:
            assert y not in got, f"{spec} wrongly accepts {y}"
        else:
            assert y in got, f"{spec} wrongly rejects {y}"
            assert got[y] == pytest.approx(math.log(w), abs=1e-12)


CASES = [
    (PartialLabel(((0, 1), (2,), (0, 2))), 3),
    (PartialLabel(((0,), (0, 1))), 2),
    (MultiInstance(True, 4), 2),
    (MultiInstance(False, 3), 2),
    (LabelProportion(2, 5), 2),
    (LabelProportion(0, 3), 2),
    (LabelProportion(3, 3), 2),
    (PairwiseComparison(), 2),
    (PairwiseSimilarity(True), 2),
    (PairwiseSimilarity(False), 2),
    (PairwiseSimilarity(True, 0.8), 2),
    (PairwiseSimilarity(False, 0.3), 2),
    (WeightedPair((0.1, 0.4, 0.0, 0.9)), 2),
    (PositiveConfidence((0.9, 0.2, 0.5)), 2),
    (ClassPrior(0.4, 5), 2),
    (FullLabels((2, 0, 1)), 3),
    (Unconstrained(3), 3),
]


@pytest.mark.parametrize("spec,num_classes", CASES, ids=lambda v: str(v)[:40])
def test_language_exactness(spec, num_classes):
    assert_language_matches_predicate(spec, num_classes)


def test_language_exactness_randomized():
    from weaklattice.verify import KINDS, random_case

    rng = np.random.default_rng(17)
    for kind in KINDS:
        for _ in range(20):
            spec, probs = random_case(kind, rng, max_len=6)
            assert_language_matches_predicate(spec, probs.shape[1])


class TestCompile:
    def test_count_automaton_has_m_plus_one_states(self):
        nfa = compile_spec(LabelProportion(2, 4), 2)
        assert nfa.num_states == 3
        assert nfa.accepting == frozenset({2})

    def test_unrestricted_candidates_accept_everything(self):
        spec = PartialLabel(((0, 1, 2),) * 3)
        nfa = compile_spec(spec, 3)
        assert len(language(nfa, 3, 3)) == 27

    def test_class_prior_rounds_half_to_even(self):
        assert ClassPrior(0.4, 10).expected_positives == 4
        assert ClassPrior(0.5, 5).expected_positives == 2  # 2.5 -> 2
        assert ClassPrior(0.5, 7).expected_positives == 4  # 3.5 -> 4

    def test_class_prior_matches_count_automaton(self):
        got = language(compile_spec(ClassPrior(0.4, 10), 2), 10, 2)
        want = language(compile_spec(LabelProportion(4, 10), 2), 10, 2)
        assert got == want

    def test_full_labels_accepts_exactly_one(self):
        lang = language(compile_spec(FullLabels((1, 0, 1)), 2), 3, 2)
        assert lang == {(1, 0, 1): 0.0}

    def test_binary_only_kinds_reject_multiclass(self):
        for spec in (
            MultiInstance(True, 2),
            LabelProportion(1, 2),
            PairwiseComparison(),
            PairwiseSimilarity(True),
            WeightedPair((1, 1, 1, 1)),
            PositiveConfidence((0.5,)),
            ClassPrior(0.5, 4),
        ):
            with pytest.raises(UnsupportedCardinality):
                compile_spec(spec, 3)

    def test_invalid_specs_rejected(self):
        with pytest.raises(InvalidSpec):
            compile_spec(PartialLabel(((),)), 2)
        with pytest.raises(InvalidSpec):
            compile_spec(LabelProportion(4, 3), 2)
        with pytest.raises(InvalidSpec):
            compile_spec(WeightedPair((0.0, 0.0, 0.0, 0.0)), 2)
        with pytest.raises(InvalidSpec):
            compile_spec(WeightedPair((0.5, 0.5, 0.5, 1.5)), 2)
        with pytest.raises(InvalidSpec):
            compile_spec(ClassPrior(1.5, 4), 2)
        with pytest.raises(InvalidSpec):
            compile_spec(PositiveConfidence((0.5, -0.1)), 2)
        with pytest.raises(InvalidSpec):
            compile_spec(FullLabels((0, 3)), 2)


class TestOneVsRest:
    def test_presence_projection(self):
        spec = MultiClassMultiInstance((True, True, False), 5)
        assert one_vs_rest(spec, 2) == MultiInstance(False, 5)
        assert one_vs_rest(spec, 0) == MultiInstance(True, 5)

    def test_count_projection(self):
        spec = MultiClassLabelProportion((2, 1, 1), 4)
        assert one_vs_rest(spec, 0) == LabelProportion(2, 4)

    def test_counts_must_partition_the_group(self):
        with pytest.raises(InvalidSpec):
            one_vs_rest(MultiClassLabelProportion((2, 1, 1), 5), 0)

    def test_no_multiclass_form(self):
        with pytest.raises(InvalidSpec):
            one_vs_rest(PairwiseComparison(), 0)


class TestSerialization:
    @pytest.mark.parametrize("spec,_", CASES, ids=lambda v: str(v)[:40])
    def test_round_trip(self, spec, _):
        assert from_dict(to_dict(spec)) == spec

    def test_multiclass_round_trip(self):
        for spec in (
            MultiClassMultiInstance((True, False), 3),
            MultiClassLabelProportion((1, 2), 3),
        ):
            assert from_dict(to_dict(spec)) == spec

    def test_malformed_record(self):
        with pytest.raises(InvalidSpec):
            from_dict({"kind": "no_such_kind"})
        with pytest.raises(InvalidSpec):
            from_dict({"kind": "label_proportion"})
