"""Joint types and strong typicality over finite index sequences.

Counts are kept as exact integers; the empirical pmf is derived on
demand, so typicality checks do not accumulate float drift across
concatenations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class JointType:
    """Occurrence counts of symbol tuples along equal-length sequences."""

    counts: np.ndarray  # integer array, one axis per sequence
    n: int

    def __post_init__(self):
        arr = np.array(self.counts, dtype=np.int64, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)

    @property
    def pmf(self) -> np.ndarray:
        return self.counts / self.n


def _as_seq_tuple(seqs):
    if isinstance(seqs, tuple):
        return tuple(np.asarray(s, dtype=np.int64) for s in seqs)
    return (np.asarray(seqs, dtype=np.int64),)


def joint_type(seqs, sizes=None) -> JointType:
    """Joint type of 1 to 3 equal-length index sequences.

    `sizes` fixes the alphabet size per axis; by default each axis spans
    max(seq) + 1 symbols.
    """
    parts = _as_seq_tuple(seqs)
    if not 1 <= len(parts) <= 3:
        raise ValueError("joint types are supported for 1 to 3 sequences")
    n = parts[0].shape[0]
    if n == 0:
        raise ValueError("empty sequence")
    if any(p.shape != (n,) for p in parts):
        raise ValueError("sequence length mismatch")
    if sizes is None:
        sizes = tuple(int(p.max()) + 1 for p in parts)
    else:
        sizes = tuple(int(k) for k in sizes)
        for p, k in zip(parts, sizes):
            if p.size and (p.min() < 0 or p.max() >= k):
                raise ValueError("sequence symbol outside alphabet")
    counts = np.zeros(sizes, dtype=np.int64)
    np.add.at(counts, tuple(parts), 1)
    return JointType(counts=counts, n=n)


def is_strongly_typical(seqs, p, mu: float) -> bool:
    """Cellwise |type - p| <= mu, with zero counts wherever p is zero."""
    if mu < 0:
        raise ValueError("mu must be >= 0")
    p = np.asarray(p, dtype=float)
    jt = joint_type(seqs, sizes=p.shape)
    if (jt.counts[p == 0] != 0).any():
        return False
    return bool((np.abs(jt.pmf - p) <= mu).all())


def is_conditionally_typical(y_seq, x_seq, w, mu: float) -> bool:
    """Typicality of y_seq against the rows of w[x,y] selected by x_seq.

    Cellwise |n_xy(a,b)/n - (n_x(a)/n) w(b|a)| <= mu, with zero pair
    counts wherever w(b|a) = 0.
    """
    if mu < 0:
        raise ValueError("mu must be >= 0")
    w = np.asarray(w, dtype=float)
    x_seq = np.asarray(x_seq, dtype=np.int64)
    y_seq = np.asarray(y_seq, dtype=np.int64)
    if x_seq.shape != y_seq.shape:
        raise ValueError("sequence length mismatch")
    jt = joint_type((x_seq, y_seq), sizes=w.shape)
    if (jt.counts[w == 0] != 0).any():
        return False
    n_x = jt.counts.sum(axis=1)
    target = (n_x[:, None] / jt.n) * w
    return bool((np.abs(jt.pmf - target) <= mu).all())


def typicality_lower_bound(mu: float, n: int, cell_count: int) -> float:
    """Chebyshev-union lower bound 1 - cells/(4 mu^2 n) on typical-set mass.

    The raw value is returned even when negative; a non-positive bound is
    vacuous and up to the caller to interpret.
    """
    if mu <= 0:
        raise ValueError("bound undefined for mu = 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    return 1.0 - cell_count / (4.0 * mu * mu * n)
