# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled lattice kernels.

Twin of ``_fb_pure``: identical traversal order and log-add formula, so the
pure and compiled kernels agree bit for bit.
"""

import numpy as np

from libc.math cimport exp, log1p, INFINITY

COMPILED = True


cdef inline double _log_add(double a, double b) nogil:
    if a == -INFINITY:
        return b
    if b == -INFINITY:
        return a
    if a < b:
        a, b = b, a
    return a + log1p(exp(b - a))


def forward(const int[::1] node_sym, const long[::1] node_offsets,
            const double[::1] start_w, const int[::1] edge_src,
            const int[::1] edge_dst, const double[::1] edge_w,
            const long[::1] edge_offsets, const double[:, ::1] log_probs):
    cdef Py_ssize_t length = node_offsets.shape[0] - 1
    cdef Py_ssize_t total = node_offsets[length]
    alpha_arr = np.full(total, -np.inf)
    cdef double[::1] alpha = alpha_arr
    cdef Py_ssize_t i, j, e
    cdef double contrib
    with nogil:
        for i in range(node_offsets[1]):
            alpha[i] = start_w[i] + log_probs[0, node_sym[i]]
        for j in range(1, length):
            for e in range(edge_offsets[j], edge_offsets[j + 1]):
                contrib = alpha[edge_src[e]] + edge_w[e]
                alpha[edge_dst[e]] = _log_add(alpha[edge_dst[e]], contrib)
            for i in range(node_offsets[j], node_offsets[j + 1]):
                alpha[i] += log_probs[j, node_sym[i]]
    return alpha_arr


def backward(const int[::1] node_sym, const long[::1] node_offsets,
             const double[::1] start_w, const int[::1] edge_src,
             const int[::1] edge_dst, const double[::1] edge_w,
             const long[::1] edge_offsets, const double[:, ::1] log_probs):
    cdef Py_ssize_t length = node_offsets.shape[0] - 1
    cdef Py_ssize_t total = node_offsets[length]
    beta_arr = np.full(total, -np.inf)
    cdef double[::1] beta = beta_arr
    cdef Py_ssize_t i, j, e, d
    cdef double contrib
    with nogil:
        for i in range(node_offsets[length - 1], total):
            beta[i] = 0.0
        for j in range(length - 1, 0, -1):
            for e in range(edge_offsets[j], edge_offsets[j + 1]):
                d = edge_dst[e]
                contrib = beta[d] + log_probs[j, node_sym[d]] + edge_w[e]
                beta[edge_src[e]] = _log_add(beta[edge_src[e]], contrib)
    return beta_arr


def reduce_symbol_mass(const int[::1] node_sym, const long[::1] node_offsets,
                       const double[::1] alpha, const double[::1] beta,
                       int num_symbols):
    """Log-mass per (position, symbol): log-sum over states of alpha+beta."""
    cdef Py_ssize_t length = node_offsets.shape[0] - 1
    mass_arr = np.full((length, num_symbols), -np.inf)
    cdef double[:, ::1] mass = mass_arr
    cdef Py_ssize_t i, j
    cdef int y
    with nogil:
        for j in range(length):
            for i in range(node_offsets[j], node_offsets[j + 1]):
                y = node_sym[i]
                mass[j, y] = _log_add(mass[j, y], alpha[i] + beta[i])
    return mass_arr


def final_log_mass(const long[::1] node_offsets, const double[::1] alpha):
    cdef Py_ssize_t length = node_offsets.shape[0] - 1
    cdef double total = -INFINITY
    cdef Py_ssize_t i
    with nogil:
        for i in range(node_offsets[length - 1], node_offsets[length]):
            total = _log_add(total, alpha[i])
    return total
