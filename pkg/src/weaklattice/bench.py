"""Timing harness for the forward-backward pass.

Measures per-sequence posterior time over growing group lengths with the
automaton held fixed, demonstrating the linear O(|Q| L) cost; optionally
times the compiled and pure-Python kernels side by side.
"""

from __future__ import annotations

import time

import numpy as np

from .automaton import build_trellis
from .errors import InvalidParams
from .forward_backward import available_kernels, posteriors
from .supervision import LabelProportion, MultiInstance, compile_spec

BENCH_KINDS = ("lprop", "multi_instance")


def _spec_for(kind: str, length: int, positives: int):
    if kind == "lprop":
        return LabelProportion(min(positives, length), length)
    if kind == "multi_instance":
        return MultiInstance(True, length)
    raise InvalidParams(f"unknown benchmark kind {kind!r}; choose from {BENCH_KINDS}")


def _time_once(trellis, log_probs, kernel: str, inner: int) -> float:
    start = time.perf_counter()
    for _ in range(inner):
        posteriors(trellis, log_probs, kernel=kernel)
    return (time.perf_counter() - start) / inner


def run_bench(kind: str, lengths, positives: int = 5, repeats: int = 20,
              seed: int = 0, kernels=None, inner: int | None = None) -> list[dict]:
    """Median per-sequence posterior time for each length.

    Returns one row per length with a ``seconds_<kernel>`` column per timed
    kernel and the doubling ratio of the first kernel against the previous
    row.
    """
    lengths = [int(v) for v in lengths]
    if not lengths or any(v < 1 for v in lengths):
        raise InvalidParams(f"lengths must be positive, got {lengths}")
    if repeats < 1:
        raise InvalidParams("repeats must be >= 1")
    if kernels is None:
        kernels = [None]
    for name in kernels:
        if name is not None and name not in available_kernels():
            raise InvalidParams(f"kernel {name!r} unavailable: {available_kernels()}")

    rng = np.random.default_rng(seed)
    rows = []
    prev = None
    for length in lengths:
        spec = _spec_for(kind, length, positives)
        trellis = build_trellis(compile_spec(spec, 2), length)
        log_probs = np.log(rng.dirichlet(np.ones(2), size=length))
        row = {"length": length}
        for name in kernels:
            label = name or "default"
            # enough inner iterations for a stable clock at small lengths
            n = inner or max(3, (24000 if label != "python" else 2400) // length)
            times = [_time_once(trellis, log_probs, name, n) for _ in range(repeats)]
            row[f"seconds_{label}"] = float(np.median(times))
        first = f"seconds_{kernels[0] or 'default'}"
        row["ratio_vs_prev"] = (row[first] / prev[first]) if prev else None
        rows.append(row)
        prev = row
    return rows


def format_table(rows) -> str:
    if not rows:
        return ""
    cols = list(rows[0].keys())
    widths = {c: max(len(c), 12) for c in cols}
    lines = ["  ".join(c.ljust(widths[c]) for c in cols)]
    for row in rows:
        cells = []
        for c in cols:
            v = row[c]
            if v is None:
                cells.append("-".ljust(widths[c]))
            elif isinstance(v, float):
                cells.append(f"{v:.6g}".ljust(widths[c]))
            else:
                cells.append(str(v).ljust(widths[c]))
        lines.append("  ".join(cells))
    return "\n".join(lines)
