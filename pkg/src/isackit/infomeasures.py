"""Entropy, mutual information, and KL divergence in bits.

Conventions: 0*log(0) = 0 and 0*log(0/0) = 0.  Divergences return the
float('inf') sentinel on an absolute-continuity failure; infinities are
never clamped here.
"""

from __future__ import annotations

import numpy as np

from .model import as_pmf

INF = float("inf")


def entropy(p) -> float:
    """Shannon entropy of a pmf, in bits."""
    p = as_pmf(p)
    mask = p > 0
    return float(-(p[mask] * np.log2(p[mask])).sum())


def mutual_information(p_x, w) -> float:
    """I(X;Y) in bits for input pmf p_x and row-stochastic table w[x,y]."""
    p_x = as_pmf(p_x)
    w = np.asarray(w, dtype=float)
    p_y = p_x @ w
    h_rows = np.array([entropy(w[i]) for i in range(w.shape[0])])
    mi = entropy(p_y) - float(p_x @ h_rows)
    return max(mi, 0.0)


def kl_divergence(p, q) -> float:
    """D(p || q) in bits, or inf if p puts mass where q does not."""
    p, q = as_pmf(p), as_pmf(q)
    if p.shape != q.shape:
        raise ValueError("pmf lengths differ")
    mask = p > 0
    if (q[mask] == 0).any():
        return INF
    return float((p[mask] * (np.log2(p[mask]) - np.log2(q[mask]))).sum())


def expected_kl(p_x, p_zx, q_zx) -> float:
    """E over p_x of the row divergences D(p_zx[x] || q_zx[x]), in bits.

    Rows with zero input mass are ignored even when their divergence is
    infinite; inf is returned iff some positive-mass row diverges.
    """
    p_x = as_pmf(p_x)
    p_zx = np.asarray(p_zx, dtype=float)
    q_zx = np.asarray(q_zx, dtype=float)
    if p_zx.shape != q_zx.shape or p_zx.shape[0] != p_x.shape[0]:
        raise ValueError("table dimensions differ")
    total = 0.0
    for i in range(p_x.shape[0]):
        if p_x[i] <= 0:
            continue
        row = kl_divergence(p_zx[i], q_zx[i])
        if row == INF:
            return INF
        total += p_x[i] * row
    return total
