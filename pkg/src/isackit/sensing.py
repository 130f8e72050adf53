"""Bayes posterior of the state from (input, echo) pairs, the optimal
per-symbol estimator, and distortion accounting.

The blockwise-optimal state estimator factorizes into a per-symbol map
shat(x, z) minimizing the posterior expected distortion, so everything
here is a table over the (input, echo) product alphabet.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ChannelModel, DistortionSpec, StatePrior, as_pmf, split_marginals


@dataclass(frozen=True)
class PosteriorTable:
    """q[s][x][z]: pmf over s per (x, z) column.

    Columns whose echo has zero marginal probability under the prior are
    set to the uniform pmf and flagged unsupported; they carry no weight
    in any expectation.
    """

    q: np.ndarray
    support: np.ndarray  # bool [x, z]

    def __post_init__(self):
        for name in ("q", "support"):
            arr = np.array(getattr(self, name), copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class EstimatorTable:
    """shat[x][z]: index into the reconstruction alphabet."""

    shat: np.ndarray

    def __post_init__(self):
        arr = np.array(self.shat, dtype=np.int64, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "shat", arr)


def posterior(channel: ChannelModel, prior: StatePrior) -> PosteriorTable:
    """P(s | x, z) from the prior and the echo marginal P_{Z|XS}."""
    _, z_given_xs = split_marginals(channel)
    p_s = as_pmf(prior)
    joint = np.einsum("s,xsz->sxz", p_s, z_given_xs)
    denom = joint.sum(axis=0)  # [x, z] echo marginal given x
    support = denom > 0
    n_s = p_s.shape[0]
    q = np.full_like(joint, 1.0 / n_s)
    safe = np.where(support, denom, 1.0)
    q = np.where(support[None, :, :], joint / safe[None, :, :], q)
    return PosteriorTable(q=q, support=support)


def optimal_estimator(post: PosteriorTable, distortion: DistortionSpec) -> EstimatorTable:
    """Posterior-risk minimizer per (x, z); ties go to the smallest index."""
    risk = np.einsum("sxz,hs->xzh", post.q, distortion.d)
    return EstimatorTable(shat=np.argmin(risk, axis=2))


def per_input_cost(
    channel: ChannelModel,
    prior: StatePrior,
    distortion: DistortionSpec,
    estimator: EstimatorTable | None = None,
) -> np.ndarray:
    """c[x] = expected distortion of the per-symbol estimator given X = x."""
    if estimator is None:
        estimator = optimal_estimator(posterior(channel, prior), distortion)
    _, z_given_xs = split_marginals(channel)
    p_s = as_pmf(prior)
    d_sel = distortion.d[estimator.shat]  # [x, z, s]
    return np.einsum("s,xsz,xzs->x", p_s, z_given_xs, d_sel)


def expected_distortion(cost, p_x) -> float:
    """Average the per-input cost vector over an input pmf."""
    return float(as_pmf(p_x) @ np.asarray(cost, dtype=float))


def apply_estimator(estimator: EstimatorTable, x_seq, z_seq) -> np.ndarray:
    x_seq = np.asarray(x_seq, dtype=np.int64)
    z_seq = np.asarray(z_seq, dtype=np.int64)
    if x_seq.shape != z_seq.shape:
        raise ValueError("sequence length mismatch")
    return estimator.shat[x_seq, z_seq]


def sequence_distortion(distortion: DistortionSpec, shat_seq, s_seq) -> float:
    shat_seq = np.asarray(shat_seq, dtype=np.int64)
    s_seq = np.asarray(s_seq, dtype=np.int64)
    if shat_seq.shape != s_seq.shape:
        raise ValueError("sequence length mismatch")
    if shat_seq.size == 0:
        raise ValueError("empty sequence")
    return float(distortion.d[shat_seq, s_seq].mean())
