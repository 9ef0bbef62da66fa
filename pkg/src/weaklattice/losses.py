"""The two-term training loss and its analytic gradients.

The consistency term scores predictions against the posterior targets of
the current snapshot (targets are constants of that snapshot); the
supervised term is the negative accepted log-likelihood. With shared
snapshot semantics the combined gradient with respect to pre-softmax
logits collapses to 2 * (predictions - targets) per row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .automaton import build_trellis
from .errors import ShapeMismatch
from .forward_backward import EmOutput, posteriors
from .supervision import (
    MultiClassLabelProportion,
    MultiClassMultiInstance,
    SupervisionSpec,
    compile_spec,
    one_vs_rest,
)

_MULTICLASS = (MultiClassMultiInstance, MultiClassLabelProportion)


@dataclass(frozen=True)
class LossOutput:
    """Consistency term, supervised term, and the targets they used."""

    l_u: float
    l_s: float
    targets: np.ndarray

    def total(self, u_weight: float = 1.0, s_weight: float = 1.0) -> float:
        return u_weight * self.l_u + s_weight * self.l_s


def _check_probs(spec: SupervisionSpec, probs) -> np.ndarray:
    probs = np.ascontiguousarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[0] != spec.length:
        raise ShapeMismatch(
            f"probs shape {probs.shape} incompatible with group length {spec.length}"
        )
    return probs


def em_targets(spec: SupervisionSpec, probs) -> EmOutput:
    """Posterior targets and accepted log-likelihood for one group."""
    probs = _check_probs(spec, probs)
    nfa = compile_spec(spec, probs.shape[1])
    trellis = build_trellis(nfa, spec.length)
    with np.errstate(divide="ignore"):
        log_probs = np.log(probs)
    return posteriors(trellis, log_probs)


def _loss_terms(targets: np.ndarray, probs: np.ndarray, log_z: float) -> LossOutput:
    with np.errstate(divide="ignore"):
        log_p = np.log(probs)
    # mask before multiplying: 0 * -inf must contribute 0, not NaN
    l_u = float(-np.sum(targets * np.where(targets > 0.0, log_p, 0.0)))
    return LossOutput(l_u=l_u, l_s=-log_z, targets=targets)


def em_losses(spec: SupervisionSpec, probs) -> LossOutput:
    """Both loss terms with the same snapshot supplying targets and loss."""
    if isinstance(spec, _MULTICLASS):
        return ovr_losses(spec, probs)
    probs = _check_probs(spec, probs)
    out = em_targets(spec, probs)
    return _loss_terms(out.targets, probs, out.log_z)


def grad_logits(spec: SupervisionSpec, probs,
                u_weight: float = 1.0, s_weight: float = 1.0) -> np.ndarray:
    """Exact gradient of the combined loss.

    Softmax rows for ordinary annotations; independent per-class sigmoid
    scores for multi-class aggregate annotations (one-vs-rest).
    """
    if isinstance(spec, _MULTICLASS):
        probs = _check_probs(spec, probs)
        out = ovr_losses(spec, probs)
        return (u_weight + s_weight) * (probs - out.targets)
    probs = _check_probs(spec, probs)
    out = em_targets(spec, probs)
    return (u_weight + s_weight) * (probs - out.targets)


def ovr_losses(spec: SupervisionSpec, probs) -> LossOutput:
    """One-vs-rest reduction: per-class binary losses summed over classes.

    ``probs[:, k]`` is class k's independent positive probability (sigmoid
    output); the stored targets are the per-class positive posteriors.
    """
    if not isinstance(spec, _MULTICLASS):
        raise ShapeMismatch(f"{spec.kind} has no one-vs-rest reduction")
    probs = _check_probs(spec, probs)
    num_classes = probs.shape[1]
    spec.check(num_classes)
    l_u = 0.0
    l_s = 0.0
    targets = np.empty_like(probs)
    for cls in range(num_classes):
        binary = one_vs_rest(spec, cls)
        table = np.stack([1.0 - probs[:, cls], probs[:, cls]], axis=1)
        part = em_losses(binary, table)
        l_u += part.l_u
        l_s += part.l_s
        targets[:, cls] = part.targets[:, 1]
    return LossOutput(l_u=l_u, l_s=l_s, targets=targets)
