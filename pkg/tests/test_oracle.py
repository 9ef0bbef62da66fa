"""Hand-checked values for the enumeration oracle itself."""

import math

import numpy as np
import pytest

from weaklattice.errors import InfeasibleSupervision, TooLarge
from weaklattice.losses import em_losses
from weaklattice.oracle import enumerate_losses, enumerate_posteriors
from weaklattice.supervision import (
    FullLabels,
    LabelProportion,
    PartialLabel,
    Unconstrained,
    WeightedPair,
)
from weaklattice.verify import KINDS, random_case


class TestEnumerate:
    def test_count_uniform_symmetry(self):
        out = enumerate_posteriors(LabelProportion(1, 3), np.full((3, 2), 0.5))
        assert out.log_z == pytest.approx(-0.9808292530117262, abs=1e-12)  # log 0.375
        np.testing.assert_allclose(out.targets[:, 1], 1 / 3, atol=1e-12)

    def test_candidate_renormalization(self):
        out = enumerate_posteriors(
            PartialLabel(((0, 2),)), np.array([[0.2, 0.3, 0.5]])
        )
        assert out.log_z == pytest.approx(-0.35667494393873245, abs=1e-12)  # log 0.7
        np.testing.assert_allclose(out.targets, [[2 / 7, 0.0, 5 / 7]], atol=1e-12)

    def test_weighted_pair_two_term_sum(self):
        spec = WeightedPair((0.0, 1.0, 1.0, 0.0))
        probs = np.array([[0.6, 0.4], [0.3, 0.7]])
        out = enumerate_posteriors(spec, probs)
        # 0.6*0.7 + 0.4*0.3 = 0.54
        assert out.log_z == pytest.approx(-0.616186139423817, abs=1e-12)
        np.testing.assert_allclose(out.targets[0], [0.42 / 0.54, 0.12 / 0.54])

    def test_guard(self):
        with pytest.raises(TooLarge):
            enumerate_posteriors(Unconstrained(30), np.full((30, 2), 0.5))

    def test_infeasible(self):
        with pytest.raises(InfeasibleSupervision):
            enumerate_posteriors(FullLabels((1,)), np.array([[1.0, 0.0]]))


class TestEnumerateLosses:
    def test_full_labels_cross_entropy(self):
        probs = np.array([[0.3, 0.7], [0.8, 0.2]])
        out = enumerate_losses(FullLabels((1, 0)), probs)
        assert out.l_s == pytest.approx(-math.log(0.56), abs=1e-12)

    def test_unconstrained_supervised_term_zero(self):
        out = enumerate_losses(Unconstrained(2), np.full((2, 2), 0.5))
        assert out.l_s == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("kind", KINDS)
    def test_agrees_with_lattice_losses(self, kind):
        # 100 draws x 10 kinds = 1,000 random comparisons
        rng = np.random.default_rng(77)
        for _ in range(100):
            spec, probs = random_case(kind, rng, max_len=6)
            ref = enumerate_losses(spec, probs)
            got = em_losses(spec, probs)
            assert got.l_u == pytest.approx(ref.l_u, abs=1e-9)
            assert got.l_s == pytest.approx(ref.l_s, abs=1e-9)


class TestPartitions:
    def test_presence_and_count_masses_partition(self):
        from weaklattice.supervision import LabelProportion as LP
        from weaklattice.supervision import MultiInstance as MI

        rng = np.random.default_rng(88)
        for _ in range(20):
            length = int(rng.integers(1, 8))
            probs = rng.dirichlet(np.ones(2), size=length)
            total = 0.0
            for present in (True, False):
                try:
                    total += math.exp(enumerate_posteriors(MI(present, length), probs).log_z)
                except InfeasibleSupervision:
                    pass
            assert total == pytest.approx(1.0, abs=1e-12)
            total = sum(
                math.exp(enumerate_posteriors(LP(m, length), probs).log_z)
                for m in range(length + 1)
            )
            assert total == pytest.approx(1.0, abs=1e-10)
