"""Exhaustive ground truth for targets, likelihoods, and losses.

Enumerates all K^L labelings and scores each annotation by a direct
predicate on the labeling, deliberately avoiding the automaton, trellis,
and forward-backward code paths so it can serve as an independent check.
Exponential by construction; a hard guard keeps it at test scale.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import InfeasibleSupervision, ShapeMismatch, TooLarge
from .forward_backward import EmOutput
from .losses import LossOutput
from .supervision import (
    ClassPrior,
    FullLabels,
    LabelProportion,
    MultiInstance,
    PairwiseComparison,
    PairwiseSimilarity,
    PartialLabel,
    PositiveConfidence,
    SupervisionSpec,
    Unconstrained,
    WeightedPair,
)

ENUMERATION_GUARD = 10**7


def labeling_weight(spec: SupervisionSpec, labeling) -> float:
    """Weight the annotation assigns to one labeling (0 means inconsistent)."""
    y = tuple(labeling)
    if isinstance(spec, PartialLabel):
        return float(all(v in s for v, s in zip(y, spec.candidates)))
    if isinstance(spec, FullLabels):
        return float(y == spec.labels)
    if isinstance(spec, Unconstrained):
        return 1.0
    if isinstance(spec, MultiInstance):
        return float(any(v == 1 for v in y) == spec.present)
    if isinstance(spec, LabelProportion):
        return float(sum(v == 1 for v in y) == spec.positives)
    if isinstance(spec, ClassPrior):
        return float(sum(v == 1 for v in y) == spec.expected_positives)
    if isinstance(spec, PairwiseComparison):
        return float(y[0] >= y[1])
    if isinstance(spec, PairwiseSimilarity):
        c = 1.0 if spec.confidence is None else spec.confidence
        same = y[0] == y[1]
        if spec.similar:
            return c if same else 1.0 - c
        return 1.0 - c if same else c
    if isinstance(spec, WeightedPair):
        return spec.weights[y[0] * 2 + y[1]]
    if isinstance(spec, PositiveConfidence):
        w = 1.0
        for v, c in zip(y, spec.confidences):
            w *= c if v == 1 else 1.0 - c
        return w
    raise ShapeMismatch(f"no direct predicate for {type(spec).__name__}")


def enumerate_posteriors(spec: SupervisionSpec, probs) -> EmOutput:
    """Exact targets and accepted log-likelihood by full enumeration."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[0] != spec.length:
        raise ShapeMismatch(
            f"probs shape {probs.shape} incompatible with group length {spec.length}"
        )
    length, num_classes = probs.shape
    if num_classes**length > ENUMERATION_GUARD:
        raise TooLarge(
            f"{num_classes}^{length} labelings exceed guard {ENUMERATION_GUARD}"
        )
    spec.check(num_classes)

    total = 0.0
    mass = np.zeros((length, num_classes))
    for y in itertools.product(range(num_classes), repeat=length):
        w = labeling_weight(spec, y)
        if w == 0.0:
            continue
        for j in range(length):
            w *= probs[j, y[j]]
        if w == 0.0:
            continue
        total += w
        for j in range(length):
            mass[j, y[j]] += w
    if total == 0.0:
        raise InfeasibleSupervision(
            "no labeling with positive probability satisfies the supervision"
        )
    return EmOutput(targets=mass / total, log_z=math.log(total))


def enumerate_losses(spec: SupervisionSpec, probs) -> LossOutput:
    """Loss terms from the enumerated posteriors (same formulas as em_losses)."""
    probs = np.asarray(probs, dtype=np.float64)
    out = enumerate_posteriors(spec, probs)
    with np.errstate(divide="ignore"):
        log_p = np.log(probs)
    l_u = float(-np.sum(out.targets * np.where(out.targets > 0.0, log_p, 0.0)))
    return LossOutput(l_u=l_u, l_s=-out.log_z, targets=out.targets)
