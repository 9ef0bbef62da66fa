"""Log-domain forward-backward over a supervision trellis.

Scores are prefix/suffix path masses; their product at a node is the mass of
every admissible labeling passing through that (position, symbol). The
backward score excludes the current position's emission so alpha + beta
counts each emission exactly once. All work is O(edges) = O(|Q| * K * L).

The inner sweeps run on a compiled kernel when the extension built, with a
pure-Python twin selected as fallback at import time (override with the
``WEAKLATTICE_KERNEL`` environment variable: ``compiled`` or ``python``).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _fb_pure
from .automaton import Trellis
from .errors import InfeasibleSupervision, ShapeMismatch

try:
    from . import _fb_speed
except ImportError:
    _fb_speed = None

_KERNELS = {"python": _fb_pure}
if _fb_speed is not None:
    _KERNELS["compiled"] = _fb_speed

_env = os.environ.get("WEAKLATTICE_KERNEL", "").strip().lower()
if _env and _env in _KERNELS:
    _DEFAULT = _env
elif _env:
    raise ImportError(f"requested kernel {_env!r} is unavailable")
else:
    _DEFAULT = "compiled" if _fb_speed is not None else "python"


def available_kernels() -> list[str]:
    return sorted(_KERNELS)


def active_kernel() -> str:
    return _DEFAULT


def _kernel(name: str | None):
    if name is None:
        return _KERNELS[_DEFAULT]
    try:
        return _KERNELS[name]
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}; available: {available_kernels()}")


@dataclass(frozen=True)
class ScoreTables:
    """Forward/backward log-scores over the trellis's global node indexing."""

    alpha: np.ndarray
    beta: np.ndarray
    length: int


@dataclass(frozen=True)
class EmOutput:
    """Per-position posterior targets and the accepted log-likelihood."""

    targets: np.ndarray  # (L, K), rows sum to 1
    log_z: float


def _check_log_probs(trellis: Trellis, log_probs) -> np.ndarray:
    lp = np.ascontiguousarray(log_probs, dtype=np.float64)
    if lp.ndim != 2 or lp.shape != (trellis.length, trellis.num_symbols):
        raise ShapeMismatch(
            f"log_probs shape {lp.shape} != ({trellis.length}, {trellis.num_symbols})"
        )
    return lp


def _args(trellis: Trellis, lp: np.ndarray):
    return (
        trellis.node_symbol,
        trellis.node_offsets,
        trellis.start_weights,
        trellis.edge_src,
        trellis.edge_dst,
        trellis.edge_weight,
        trellis.edge_offsets,
        lp,
    )


def forward(trellis: Trellis, log_probs, kernel: str | None = None) -> np.ndarray:
    """Prefix scores: alpha[node] = log-mass of admissible prefixes ending there."""
    lp = _check_log_probs(trellis, log_probs)
    return _kernel(kernel).forward(*_args(trellis, lp))


def backward(trellis: Trellis, log_probs, kernel: str | None = None) -> np.ndarray:
    """Suffix scores excluding the node's own emission."""
    lp = _check_log_probs(trellis, log_probs)
    return _kernel(kernel).backward(*_args(trellis, lp))


def score_tables(trellis: Trellis, log_probs, kernel: str | None = None) -> ScoreTables:
    lp = _check_log_probs(trellis, log_probs)
    k = _kernel(kernel)
    return ScoreTables(
        alpha=k.forward(*_args(trellis, lp)),
        beta=k.backward(*_args(trellis, lp)),
        length=trellis.length,
    )


def symbol_log_mass(trellis: Trellis, log_probs, kernel: str | None = None) -> np.ndarray:
    """Unnormalized (L, K) log-mass through each (position, symbol)."""
    lp = _check_log_probs(trellis, log_probs)
    k = _kernel(kernel)
    args = _args(trellis, lp)
    alpha = k.forward(*args)
    beta = k.backward(*args)
    return k.reduce_symbol_mass(
        trellis.node_symbol, trellis.node_offsets, alpha, beta, trellis.num_symbols
    )


def posteriors(trellis: Trellis, log_probs, kernel: str | None = None) -> EmOutput:
    """Per-position posterior targets plus the accepted log-likelihood.

    ``log_z`` is read from the final forward scores; the per-position mass
    identity is left to callers as a cross-check.
    """
    lp = _check_log_probs(trellis, log_probs)
    if trellis.is_empty:
        raise InfeasibleSupervision(
            f"no labeling of length {trellis.length} satisfies the supervision"
        )
    k = _kernel(kernel)
    args = _args(trellis, lp)
    alpha = k.forward(*args)
    log_z = k.final_log_mass(trellis.node_offsets, alpha)
    if log_z == float("-inf"):
        raise InfeasibleSupervision(
            "every admissible labeling has zero probability under the predictions"
        )
    beta = k.backward(*args)
    mass = k.reduce_symbol_mass(
        trellis.node_symbol, trellis.node_offsets, alpha, beta, trellis.num_symbols
    )
    row_mass = np.logaddexp.reduce(mass, axis=1)
    targets = np.exp(mass - row_mass[:, None])
    return EmOutput(targets=targets, log_z=float(log_z))
