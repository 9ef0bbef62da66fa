"""Randomized equivalence harness: lattice engine against the enumeration oracle.

Draws seeded random (annotation, probability-table) cases per supervision
kind and compares posterior targets, accepted log-likelihood, and the
per-position mass identity. Used by the verification command and by the
acceptance tests, which pin the tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .automaton import build_trellis
from .errors import TooLarge
from .forward_backward import posteriors, symbol_log_mass
from .supervision import (
    ClassPrior,
    FullLabels,
    LabelProportion,
    MultiInstance,
    PairwiseComparison,
    PairwiseSimilarity,
    PartialLabel,
    PositiveConfidence,
    Unconstrained,
    WeightedPair,
    compile_spec,
)

KINDS = (
    "partial_label",
    "multi_instance",
    "label_proportion",
    "pairwise_comparison",
    "pairwise_similarity",
    "weighted_pair",
    "positive_confidence",
    "class_prior",
    "full_labels",
    "unconstrained",
)

# Kinds exercised at more than two classes.
_MULTICLASS_OK = ("partial_label", "full_labels", "unconstrained")


def random_case(kind: str, rng, max_len: int = 8):
    """One random annotation of the given kind plus a matching ProbTable."""
    if kind in ("pairwise_comparison", "pairwise_similarity", "weighted_pair"):
        length = 2
    else:
        length = int(rng.integers(1, max_len + 1))
    num_classes = int(rng.integers(2, 5)) if kind in _MULTICLASS_OK else 2

    if kind == "partial_label":
        sets = []
        for _ in range(length):
            members = [k for k in range(num_classes) if rng.random() < 0.5]
            if not members:
                members = [int(rng.integers(0, num_classes))]
            sets.append(tuple(members))
        spec = PartialLabel(tuple(sets))
    elif kind == "multi_instance":
        spec = MultiInstance(bool(rng.random() < 0.5), length)
    elif kind == "label_proportion":
        spec = LabelProportion(int(rng.integers(0, length + 1)), length)
    elif kind == "pairwise_comparison":
        spec = PairwiseComparison()
    elif kind == "pairwise_similarity":
        conf = None if rng.random() < 1 / 3 else float(rng.uniform(0.05, 0.95))
        spec = PairwiseSimilarity(bool(rng.random() < 0.5), conf)
    elif kind == "weighted_pair":
        weights = rng.uniform(0.0, 1.0, size=4)
        if rng.random() < 0.3:
            weights[rng.integers(0, 4)] = 0.0
        if not weights.any():
            weights[0] = 1.0
        spec = WeightedPair(tuple(weights))
    elif kind == "positive_confidence":
        spec = PositiveConfidence(tuple(rng.uniform(0.02, 0.98, size=length)))
    elif kind == "class_prior":
        spec = ClassPrior(float(rng.uniform(0.15, 0.85)), length)
    elif kind == "full_labels":
        spec = FullLabels(tuple(rng.integers(0, num_classes, size=length)))
    elif kind == "unconstrained":
        spec = Unconstrained(length)
    else:
        raise ValueError(f"unknown kind {kind!r}")

    probs = rng.dirichlet(np.ones(num_classes), size=length)
    return spec, probs


@dataclass
class VerifyReport:
    trials: int = 0
    max_target_dev: float = 0.0
    max_logz_dev: float = 0.0
    max_mass_dev: float = 0.0
    failures: list = field(default_factory=list)

    def merge_case(self, kind, trial, target_dev, logz_dev, mass_dev, tol):
        self.trials += 1
        self.max_target_dev = max(self.max_target_dev, target_dev)
        self.max_logz_dev = max(self.max_logz_dev, logz_dev)
        self.max_mass_dev = max(self.max_mass_dev, mass_dev)
        if target_dev > tol or logz_dev > tol:
            self.failures.append(
                {"kind": kind, "trial": trial, "target_dev": target_dev,
                 "logz_dev": logz_dev}
            )

    @property
    def passed(self) -> bool:
        return not self.failures


def run_trials(kinds, trials: int, max_len: int, seed: int,
               tolerance: float = 1e-9, inject_fault: bool = False) -> VerifyReport:
    """Compare engine and oracle on seeded random cases for each kind."""
    if 4**max_len > oracle.ENUMERATION_GUARD:
        raise TooLarge(
            f"max length {max_len} would enumerate up to 4^{max_len} labelings"
        )
    report = VerifyReport()
    for kind in kinds:
        rng = np.random.default_rng([seed, KINDS.index(kind)])
        for trial in range(trials):
            spec, probs = random_case(kind, rng, max_len)
            trellis = build_trellis(compile_spec(spec, probs.shape[1]), spec.length)
            with np.errstate(divide="ignore"):
                log_probs = np.log(probs)
            out = posteriors(trellis, log_probs)
            ref = oracle.enumerate_posteriors(spec, probs)
            targets = out.targets
            if inject_fault and trial == 0:
                targets = targets + 1e-6
            mass = symbol_log_mass(trellis, log_probs)
            row_mass = np.logaddexp.reduce(mass, axis=1)
            report.merge_case(
                kind,
                trial,
                float(np.abs(targets - ref.targets).max()),
                abs(out.log_z - ref.log_z),
                float(np.abs(row_mass - out.log_z).max()),
                tolerance,
            )
    return report
