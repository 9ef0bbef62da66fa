"""Versioned flat-array function surface.

Stable call layer for host integrations: inputs are contiguous row-major
float64 buffers with explicit (rows, cols) dimensions plus a plain-dict
annotation; outputs come back as (error code, message, payload). Function
names carry a version suffix so signatures never change in place.
"""

from __future__ import annotations

import numpy as np

from weaklattice import em_losses, em_targets, from_dict, grad_logits
from weaklattice.errors import (
    EngineError,
    InfeasibleSupervision,
    InvalidSpec,
    ShapeMismatch,
    SymbolOutOfRange,
    UnsupportedCardinality,
)

OK = 0
ERR_INVALID_SPEC = 1
ERR_SHAPE = 2
ERR_INFEASIBLE = 3
ERR_CARDINALITY = 4
ERR_SYMBOL = 5
ERR_INTERNAL = 6

_CODES = {
    InvalidSpec: ERR_INVALID_SPEC,
    ShapeMismatch: ERR_SHAPE,
    InfeasibleSupervision: ERR_INFEASIBLE,
    UnsupportedCardinality: ERR_CARDINALITY,
    SymbolOutOfRange: ERR_SYMBOL,
}


def _error(exc: EngineError):
    for klass, code in _CODES.items():
        if isinstance(exc, klass):
            return code, str(exc)
    return ERR_INTERNAL, str(exc)


def _checked_table(buffer, rows: int, cols: int):
    table = np.ascontiguousarray(buffer, dtype=np.float64).reshape(rows, cols)
    if np.any(table < 0.0) or np.any(table > 1.0):
        raise ShapeMismatch("probability entries must lie in [0, 1]")
    if not np.allclose(table.sum(axis=1), 1.0, atol=1e-6):
        raise ShapeMismatch("probability rows must sum to 1")
    return table


def em_targets_v1(probs_buffer, rows: int, cols: int, spec_dict: dict):
    """Returns (code, message, targets (rows*cols,), log_z)."""
    try:
        table = _checked_table(probs_buffer, rows, cols)
        out = em_targets(from_dict(spec_dict), table)
    except EngineError as exc:
        code, message = _error(exc)
        return code, message, None, None
    return OK, "", np.ascontiguousarray(out.targets).reshape(-1), out.log_z


def em_losses_and_grad_v1(probs_buffer, rows: int, cols: int, spec_dict: dict):
    """Returns (code, message, l_u, l_s, grad (rows*cols,))."""
    try:
        table = _checked_table(probs_buffer, rows, cols)
        spec = from_dict(spec_dict)
        losses = em_losses(spec, table)
        grad = grad_logits(spec, table)
    except EngineError as exc:
        code, message = _error(exc)
        return code, message, None, None, None
    return OK, "", losses.l_u, losses.l_s, np.ascontiguousarray(grad).reshape(-1)
