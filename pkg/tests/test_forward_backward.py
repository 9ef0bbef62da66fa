"""Score recursions, posterior targets, and likelihood identities."""

import math

import numpy as np
import pytest

from weaklattice.automaton import build_trellis
from weaklattice.errors import InfeasibleSupervision, ShapeMismatch
from weaklattice.forward_backward import (
    backward,
    forward,
    posteriors,
    symbol_log_mass,
)
from weaklattice.oracle import enumerate_posteriors
from weaklattice.supervision import (
    FullLabels,
    LabelProportion,
    MultiInstance,
    PairwiseComparison,
    Unconstrained,
    compile_spec,
)
from weaklattice.verify import KINDS, random_case

UNIFORM2 = np.log(np.full((2, 2), 0.5))


def trellis_for(spec, num_classes=2, length=None):
    return build_trellis(compile_spec(spec, num_classes), length or spec.length)


def node_value(trellis, table, position, state, symbol):
    lo, hi = int(trellis.node_offsets[position]), int(trellis.node_offsets[position + 1])
    for i in range(lo, hi):
        if trellis.node_state[i] == state and trellis.node_symbol[i] == symbol:
            return table[i]
    raise AssertionError(f"node ({state},{symbol}) absent at position {position}")


class TestForward:
    def test_presence_uniform_alpha(self):
        trellis = trellis_for(MultiInstance(True, 2))
        alpha = forward(trellis, UNIFORM2)
        assert node_value(trellis, alpha, 0, 1, 1) == pytest.approx(math.log(0.5))
        final = alpha[int(trellis.node_offsets[1]):]
        total = np.logaddexp.reduce(final)
        assert total == pytest.approx(math.log(0.75), abs=1e-12)

    def test_full_labels_single_path_product(self):
        trellis = trellis_for(FullLabels((1, 0)))
        lp = np.log(np.array([[0.3, 0.7], [0.8, 0.2]]))
        alpha = forward(trellis, lp)
        assert alpha[-1] == pytest.approx(math.log(0.56), abs=1e-12)

    def test_empty_trellis_all_neg_inf(self):
        trellis = build_trellis(compile_spec(LabelProportion(5, 5), 2), 3)
        alpha = forward(trellis, np.log(np.full((3, 2), 0.5)))
        assert alpha.size == 0

    def test_shape_mismatch(self):
        trellis = trellis_for(MultiInstance(True, 2))
        with pytest.raises(ShapeMismatch):
            forward(trellis, np.zeros((3, 2)))


class TestBackward:
    def test_last_position_is_zero_for_live_nodes(self):
        trellis = trellis_for(LabelProportion(1, 4))
        beta = backward(trellis, np.log(np.full((4, 2), 0.5)))
        last = beta[int(trellis.node_offsets[3]):]
        assert np.all(last == 0.0)

    def test_presence_boundary_value(self):
        trellis = trellis_for(MultiInstance(True, 2))
        beta = backward(trellis, UNIFORM2)
        # from (q0, 0) at position 0 a positive must still be emitted
        assert node_value(trellis, beta, 0, 0, 0) == pytest.approx(math.log(0.5))

    def test_unconstrained_future_mass_is_one(self):
        trellis = trellis_for(Unconstrained(4))
        rng = np.random.default_rng(3)
        lp = np.log(rng.dirichlet(np.ones(2), size=4))
        beta = backward(trellis, lp)
        assert np.allclose(beta, 0.0, atol=1e-12)


class TestPosteriors:
    def test_pairwise_comparison_uniform(self):
        out = posteriors(trellis_for(PairwiseComparison()), UNIFORM2)
        assert out.log_z == pytest.approx(math.log(0.75), abs=1e-12)
        np.testing.assert_allclose(
            out.targets, [[1 / 3, 2 / 3], [2 / 3, 1 / 3]], atol=1e-12
        )

    def test_presence_uniform(self):
        out = posteriors(trellis_for(MultiInstance(True, 3)), np.log(np.full((3, 2), 0.5)))
        assert out.log_z == pytest.approx(math.log(0.875), abs=1e-12)
        np.testing.assert_allclose(out.targets[:, 1], 4 / 7, atol=1e-12)

    def test_absent_bag_forces_one_hot_negative(self):
        rng = np.random.default_rng(5)
        probs = rng.dirichlet(np.ones(2), size=4)
        out = posteriors(trellis_for(MultiInstance(False, 4)), np.log(probs))
        np.testing.assert_array_equal(out.targets[:, 1], 0.0)
        np.testing.assert_array_equal(out.targets[:, 0], 1.0)
        assert out.log_z == pytest.approx(np.log(probs[:, 0]).sum(), abs=1e-12)

    def test_unconstrained_returns_predictions(self):
        rng = np.random.default_rng(6)
        probs = rng.dirichlet(np.ones(3), size=5)
        out = posteriors(trellis_for(Unconstrained(5), num_classes=3), np.log(probs))
        np.testing.assert_allclose(out.targets, probs, atol=1e-12)
        assert out.log_z == pytest.approx(0.0, abs=1e-12)

    def test_impossible_symbols_get_exact_zero(self):
        out = posteriors(trellis_for(FullLabels((1, 0))), UNIFORM2)
        assert out.targets[0, 0] == 0.0 and out.targets[1, 1] == 0.0

    def test_infeasible_raises(self):
        trellis = build_trellis(compile_spec(LabelProportion(5, 5), 2), 3)
        with pytest.raises(InfeasibleSupervision):
            posteriors(trellis, np.log(np.full((3, 2), 0.5)))

    def test_zero_probability_infeasible(self):
        trellis = trellis_for(FullLabels((1, 1)))
        with np.errstate(divide="ignore"):
            lp = np.log(np.array([[1.0, 0.0], [0.5, 0.5]]))
        with pytest.raises(InfeasibleSupervision):
            posteriors(trellis, lp)

    def test_degenerate_confidences_force_one_hot(self):
        from weaklattice.oracle import enumerate_posteriors
        from weaklattice.supervision import PositiveConfidence

        spec = PositiveConfidence((1.0, 0.0))
        probs = np.array([[0.4, 0.6], [0.7, 0.3]])
        with np.errstate(divide="ignore"):
            out = posteriors(trellis_for(spec), np.log(probs))
        np.testing.assert_array_equal(out.targets, [[0.0, 1.0], [1.0, 0.0]])
        ref = enumerate_posteriors(spec, probs)
        assert out.log_z == pytest.approx(ref.log_z, abs=1e-12)


class TestOracleEquivalence:
    @pytest.mark.parametrize("kind", KINDS)
    def test_matches_enumeration(self, kind):
        rng = np.random.default_rng(202)
        for _ in range(40):
            spec, probs = random_case(kind, rng, max_len=8)
            trellis = trellis_for(spec, probs.shape[1])
            out = posteriors(trellis, np.log(probs))
            ref = enumerate_posteriors(spec, probs)
            np.testing.assert_allclose(out.targets, ref.targets, atol=1e-9)
            assert out.log_z == pytest.approx(ref.log_z, abs=1e-9)

    @pytest.mark.parametrize("kind", KINDS)
    def test_mass_conserved_across_positions(self, kind):
        rng = np.random.default_rng(404)
        for _ in range(40):
            spec, probs = random_case(kind, rng, max_len=8)
            trellis = trellis_for(spec, probs.shape[1])
            lp = np.log(probs)
            out = posteriors(trellis, lp)
            mass = symbol_log_mass(trellis, lp)
            row = np.logaddexp.reduce(mass, axis=1)
            np.testing.assert_allclose(row, out.log_z, atol=1e-10)


class TestPartitions:
    def test_presence_present_plus_absent_is_one(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            length = int(rng.integers(1, 11))
            probs = rng.dirichlet(np.ones(2), size=length)
            lp = np.log(probs)
            z = 0.0
            for present in (True, False):
                trellis = trellis_for(MultiInstance(present, length))
                try:
                    z += math.exp(posteriors(trellis, lp).log_z)
                except InfeasibleSupervision:
                    pass
            assert z == pytest.approx(1.0, abs=1e-12)

    def test_count_likelihoods_partition(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            length = int(rng.integers(1, 11))
            probs = rng.dirichlet(np.ones(2), size=length)
            lp = np.log(probs)
            z = sum(
                math.exp(posteriors(trellis_for(LabelProportion(m, length)), lp).log_z)
                for m in range(length + 1)
            )
            assert z == pytest.approx(1.0, abs=1e-10)


class TestDegeneracy:
    def test_full_labels_posterior_one_hot_and_cross_entropy(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            length = int(rng.integers(1, 9))
            num_classes = int(rng.integers(2, 5))
            labels = tuple(int(v) for v in rng.integers(0, num_classes, size=length))
            probs = rng.dirichlet(np.ones(num_classes), size=length)
            out = posteriors(
                trellis_for(FullLabels(labels), num_classes), np.log(probs)
            )
            expect = np.zeros((length, num_classes))
            expect[np.arange(length), labels] = 1.0
            np.testing.assert_array_equal(out.targets, expect)
            ce = -sum(math.log(probs[j, labels[j]]) for j in range(length))
            assert -out.log_z == pytest.approx(ce, abs=1e-12)
