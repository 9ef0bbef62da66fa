"""Pure-Python lattice kernels.

Mirror image of the compiled kernels in ``_fb_speed.pyx``: same traversal
order and the same pairwise log-add, so both produce bit-identical scores.
"""

import math

import numpy as np

_NEG_INF = float("-inf")

COMPILED = False


def _log_add(a, b):
    if a == _NEG_INF:
        return b
    if b == _NEG_INF:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


def forward(node_sym, node_offsets, start_w, edge_src, edge_dst, edge_w,
            edge_offsets, log_probs):
    length = len(node_offsets) - 1
    total = int(node_offsets[length])
    alpha = np.full(total, _NEG_INF)
    for i in range(int(node_offsets[1])):
        alpha[i] = start_w[i] + log_probs[0, node_sym[i]]
    for j in range(1, length):
        for e in range(int(edge_offsets[j]), int(edge_offsets[j + 1])):
            contrib = alpha[edge_src[e]] + edge_w[e]
            alpha[edge_dst[e]] = _log_add(alpha[edge_dst[e]], contrib)
        for i in range(int(node_offsets[j]), int(node_offsets[j + 1])):
            alpha[i] += log_probs[j, node_sym[i]]
    return alpha


def backward(node_sym, node_offsets, start_w, edge_src, edge_dst, edge_w,
             edge_offsets, log_probs):
    length = len(node_offsets) - 1
    total = int(node_offsets[length])
    beta = np.full(total, _NEG_INF)
    for i in range(int(node_offsets[length - 1]), total):
        beta[i] = 0.0
    for j in range(length - 1, 0, -1):
        for e in range(int(edge_offsets[j]), int(edge_offsets[j + 1])):
            d = edge_dst[e]
            contrib = beta[d] + log_probs[j, node_sym[d]] + edge_w[e]
            beta[edge_src[e]] = _log_add(beta[edge_src[e]], contrib)
    return beta


def reduce_symbol_mass(node_sym, node_offsets, alpha, beta, num_symbols):
    """Log-mass per (position, symbol): log-sum over states of alpha+beta."""
    length = len(node_offsets) - 1
    mass = np.full((length, num_symbols), _NEG_INF)
    for j in range(length):
        for i in range(int(node_offsets[j]), int(node_offsets[j + 1])):
            y = node_sym[i]
            mass[j, y] = _log_add(mass[j, y], alpha[i] + beta[i])
    return mass


def final_log_mass(node_offsets, alpha):
    length = len(node_offsets) - 1
    total = _NEG_INF
    for i in range(int(node_offsets[length - 1]), int(node_offsets[length])):
        total = _log_add(total, alpha[i])
    return total
