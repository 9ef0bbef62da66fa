"""Scripting bindings for the weaklattice engine.

Exposes posterior-target and loss/gradient computation over plain float64
arrays and dict-shaped annotations (the same schema the dataset files
use), so external training loops can consume the engine without touching
its domain types. Engine failures surface as ValueError with the engine's
error code at the start of the message.

>>> targets, log_z = em_targets([[0.5, 0.5], [0.5, 0.5]],
...                             {"kind": "pairwise_comparison"})
"""

from __future__ import annotations

import numpy as np

from . import _surface

__version__ = "0.1.0"

__all__ = ["em_targets", "em_losses_and_grad"]


def _as_table(probs) -> np.ndarray:
    table = np.ascontiguousarray(probs, dtype=np.float64)
    if table.ndim != 2:
        raise ValueError(f"ShapeMismatch: probs must be 2-D, got shape {table.shape}")
    return table


def _raise(code: int, message: str):
    raise ValueError(message if message else f"engine error code {code}")


def em_targets(probs, spec: dict):
    """Per-position posterior targets and accepted log-likelihood.

    ``probs`` is an (L, K) row-stochastic array; ``spec`` a dict-shaped
    annotation. Returns ``(targets, log_z)`` with ``targets`` of shape
    (L, K).
    """
    table = _as_table(probs)
    code, message, flat, log_z = _surface.em_targets_v1(
        table.reshape(-1), table.shape[0], table.shape[1], dict(spec)
    )
    if code != _surface.OK:
        _raise(code, message)
    return flat.reshape(table.shape), float(log_z)


def em_losses_and_grad(probs, spec: dict):
    """Both loss terms and the exact logit gradient.

    Returns ``(l_u, l_s, grad)`` with ``grad`` of shape (L, K).
    """
    table = _as_table(probs)
    code, message, l_u, l_s, flat = _surface.em_losses_and_grad_v1(
        table.reshape(-1), table.shape[0], table.shape[1], dict(spec)
    )
    if code != _surface.OK:
        _raise(code, message)
    return float(l_u), float(l_s), flat.reshape(table.shape)
