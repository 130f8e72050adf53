"""Tradeoff frontiers over the input distribution.

Two constrained concave programs over the input simplex:

* rate-distortion side: maximize I(X;Y) on the state-averaged channel
  subject to a cap on the expected per-input sensing cost; solved by
  Blahut-Arimoto with a Lagrangian cost penalty in the multiplicative
  update and an outer bisection on the multiplier.
* rate-exponent side: maximize min of the two mutual informations
  (one per hypothesis) subject to a floor on the expected per-input
  divergence; solved by exponentiated-subgradient ascent with iterate
  averaging, each step KL-projected onto the constraint half-space.

The cost solver finishes by mixing the last infeasible/feasible bracket
pair so the returned input pmf meets a binding constraint exactly; a
small exhaustive grid oracle is provided for cross-checking both sides.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .infomeasures import INF, kl_divergence, mutual_information
from .model import ProblemInstance, as_pmf, mix_over_state, split_marginals
from .sensing import per_input_cost

# Convergence is declared when the running best objective improves by less
# than the configured tolerance over this many consecutive iterations.
_STALL_WINDOW = 100
_FEAS_SLACK = 1e-12


class InfeasibleError(ValueError):
    """The requested constraint cannot be met by any input distribution."""


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 50000
    convergence_tol: float = 1e-9  # bits
    bisection_tol: float = 1e-6
    kl_clamp: float = 60.0  # bits
    grid_step: float = 1.0 / 200.0

    def __post_init__(self):
        for name in ("max_iterations", "convergence_tol", "bisection_tol", "kl_clamp", "grid_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class FrontierPoint:
    """One Pareto point: rate (bits), constraint level, achieving input pmf."""

    rate: float
    objective: float  # distortion cap (rd) or exponent target (re)
    p_x: np.ndarray
    converged: bool
    iterations: int
    achieved: float  # constraint functional evaluated at p_x
    clamped: bool = False

    def __post_init__(self):
        arr = np.array(self.p_x, dtype=float, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "p_x", arr)


def _neg_cond_entropy(w: np.ndarray) -> np.ndarray:
    """Row-wise sum w*log2(w), i.e. -H(Y|X=x)."""
    logw = np.where(w > 0, np.log2(np.where(w > 0, w, 1.0)), 0.0)
    return (w * logw).sum(axis=1)


def _masked_log2(q: np.ndarray) -> np.ndarray:
    return np.where(q > 0, np.log2(np.where(q > 0, q, 1.0)), 0.0)


def _ba_penalized(w, cost, lam, cfg: SolverConfig):
    """Maximize I(p) - lam * <p, cost> over the simplex (all in bits).

    Standard alternating maximization with the penalty folded into the
    multiplicative update; stops on a duality-gap certificate: for any
    output law q, max_x [D(w_x||q) - lam c(x)] upper-bounds the optimum.
    Returns (p, iterations, converged).
    """
    k = w.shape[0]
    p = np.full(k, 1.0 / k)
    neg_h = _neg_cond_entropy(w)
    iterations = 0
    converged = False
    for iterations in range(1, cfg.max_iterations + 1):
        q = p @ w
        d_rows = neg_h - w @ _masked_log2(q)  # D(w_x || q) per input
        t = d_rows - lam * cost
        gap = float(t.max() - p @ t)
        if gap <= cfg.convergence_tol:
            converged = True
            break
        p = p * np.exp2(t - t.max())
        # tiny floor keeps every letter alive so the dual bound stays exact
        p = np.maximum(p, 1e-300)
        p /= p.sum()
    return p, iterations, converged


def capacity_under_cost(instance: ProblemInstance, distortion_cap, cfg: SolverConfig | None = None) -> FrontierPoint:
    """Largest rate whose achieving input pmf keeps expected cost <= cap.

    Bisects the cost multiplier until the bracket is tighter than
    ``bisection_tol``, then returns the best of: the feasible bracket end,
    the exact constraint-matching mixture of the bracket pair, and an
    unpenalized solve restricted to inputs that are individually feasible.
    """
    cfg = cfg or SolverConfig()
    if instance.distortion is None:
        raise InfeasibleError("distortion spec required")
    cap = float(distortion_cap)
    cost = per_input_cost(instance.channel, instance.p_s, instance.distortion)
    c_min = float(cost.min())
    if cap < c_min - _FEAS_SLACK:
        raise InfeasibleError(f"distortion below minimum achievable (min over inputs is {c_min:.12g})")

    y_given_xs, _ = split_marginals(instance.channel)
    w = mix_over_state(y_given_xs, instance.p_s)

    total_iters = 0
    all_converged = True

    def solve(lam):
        nonlocal total_iters, all_converged
        p, iters, ok = _ba_penalized(w, cost, lam, cfg)
        total_iters += iters
        all_converged = all_converged and ok
        return p, float(cost @ p)

    p0, cost0 = solve(0.0)
    if cost0 <= cap + _FEAS_SLACK:
        return FrontierPoint(
            rate=mutual_information(p0, w), objective=cap, p_x=p0,
            converged=all_converged, iterations=total_iters, achieved=cost0,
        )

    # Bracket the multiplier: lam_lo infeasible, lam_hi feasible.
    lam_lo, p_lo, cost_lo = 0.0, p0, cost0
    lam_hi, p_hi, cost_hi = 1.0, None, None
    while lam_hi <= 2.0**40:
        p_hi, cost_hi = solve(lam_hi)
        if cost_hi <= cap + _FEAS_SLACK:
            break
        lam_lo, p_lo, cost_lo = lam_hi, p_hi, cost_hi
        lam_hi *= 2.0
        p_hi = None
    if p_hi is not None:
        while lam_hi - lam_lo > cfg.bisection_tol and cap - cost_hi > cfg.bisection_tol:
            mid = 0.5 * (lam_lo + lam_hi)
            p_mid, cost_mid = solve(mid)
            if cost_mid <= cap + _FEAS_SLACK:
                lam_hi, p_hi, cost_hi = mid, p_mid, cost_mid
            else:
                lam_lo, p_lo, cost_lo = mid, p_mid, cost_mid

    candidates = []
    if p_hi is not None:
        candidates.append((p_hi, cost_hi))
        if cost_lo > cap and cost_lo > cost_hi:
            alpha = (cap - cost_hi) / (cost_lo - cost_hi)
            p_mix = alpha * p_lo + (1.0 - alpha) * p_hi
            candidates.append((p_mix, float(cost @ p_mix)))
    cheap = cost <= cap + _FEAS_SLACK
    if cheap.any():
        p_sub, iters, ok = _ba_penalized(w[cheap], np.zeros(int(cheap.sum())), 0.0, cfg)
        total_iters += iters
        all_converged = all_converged and ok
        p_restr = np.zeros_like(cost)
        p_restr[cheap] = p_sub
        candidates.append((p_restr, float(cost @ p_restr)))

    feasible = [(p, c, mutual_information(p, w)) for p, c in candidates if c <= cap + 1e-9]
    top = max(r for _, _, r in feasible)
    # among rate ties (within solver precision) prefer the cheapest point
    best = min(((p, c, r) for p, c, r in feasible if r >= top - 1e-8),
               key=lambda pcr: pcr[1])
    return FrontierPoint(
        rate=best[2], objective=cap, p_x=best[0],
        converged=all_converged, iterations=total_iters, achieved=best[1],
    )


def rd_frontier(instance: ProblemInstance, n_points: int, cfg: SolverConfig | None = None):
    """Sweep the distortion cap linearly from the per-input minimum to the
    cost of the unconstrained capacity achiever."""
    cfg = cfg or SolverConfig()
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if instance.distortion is None:
        raise InfeasibleError("distortion spec required")
    cost = per_input_cost(instance.channel, instance.p_s, instance.distortion)
    y_given_xs, _ = split_marginals(instance.channel)
    w = mix_over_state(y_given_xs, instance.p_s)
    p_uncon, _, _ = _ba_penalized(w, cost, 0.0, cfg)
    d_lo = float(cost.min())
    d_hi = max(float(cost @ p_uncon), d_lo)
    return [capacity_under_cost(instance, d, cfg) for d in np.linspace(d_lo, d_hi, n_points)]


# ---------------------------------------------------------------------------
# Rate-exponent side
# ---------------------------------------------------------------------------

def _mi_and_grad(p, w, neg_h):
    """Mutual information at p plus its gradient rows D(w_x||q_p)."""
    q = p @ w
    d_rows = neg_h - w @ _masked_log2(q)
    return float(p @ d_rows), d_rows


def _kl_project_floor(p, e, floor, tol):
    """KL-projection of pmf p onto {q in simplex : <e, q> >= floor}.

    The projection is an exponential tilt q = p * 2^(mu e) / Z with the
    smallest mu >= 0 meeting the floor; mu is found by bisection.  When
    the floor equals the best achievable value the projection degenerates
    to the restriction of p onto the argmax face of e.
    """
    if e @ p >= floor:
        return p

    def tilt(mu):
        q = p * np.exp2(mu * (e - e.max()))
        q = q / q.sum()
        return q, float(e @ q)

    hi = 1.0
    q_hi, g_hi = tilt(hi)
    while g_hi < floor and hi < 2.0**60:
        hi *= 2.0
        q_hi, g_hi = tilt(hi)
    if g_hi < floor:
        # floor sits at (or above) the max of e: keep only argmax letters
        face = e >= e.max() - 1e-12
        q = np.where(face, p, 0.0)
        return q / q.sum()
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        q_mid, g_mid = tilt(mid)
        if g_mid >= floor:
            hi, q_hi, g_hi = mid, q_mid, g_mid
        else:
            lo = mid
    return q_hi


def _eg_min_capacity(tables, cfg: SolverConfig, e=None, floor=None, p_init=None):
    """Maximize min_j I(p; w_j) over the simplex, optionally intersected
    with the half-space <e, p> >= floor, by exponentiated subgradient.

    The subgradient of the min is the gradient of an active branch;
    additive constants in the mutual-information gradient drop out in the
    multiplicative normalization.  Each step is KL-projected back onto
    the constraint set, iterates are averaged, and the best evaluated
    point (raw or averaged) is returned.  Convergence is declared when
    the best value improves by less than the tolerance over the stall
    window.
    """
    k = tables[0][0].shape[0]
    p = np.full(k, 1.0 / k) if p_init is None else np.array(p_init, dtype=float)
    p = np.maximum(p, 1e-12)
    p /= p.sum()

    def project(q):
        if e is None:
            return q
        return _kl_project_floor(q, e, floor, cfg.bisection_tol)

    def value_and_grad(pt):
        vals, grads = [], []
        for w, neg_h in tables:
            v, g = _mi_and_grad(pt, w, neg_h)
            vals.append(v)
            grads.append(g)
        j = int(np.argmin(vals))
        return vals[j], grads[j]

    p = project(p)
    p_sum = np.zeros(k)
    best_val, best_p = -INF, p.copy()
    history = []
    iterations = 0
    converged = False
    for iterations in range(1, cfg.max_iterations + 1):
        f, g = value_and_grad(p)
        if f > best_val:
            best_val, best_p = f, p.copy()
        p_sum += p
        if iterations % 8 == 0:
            p_avg = project(p_sum / iterations)
            f_avg, _ = value_and_grad(p_avg)
            if f_avg > best_val:
                best_val, best_p = f_avg, p_avg
        history.append(best_val)
        if iterations > _STALL_WINDOW and history[-1] - history[-1 - _STALL_WINDOW] < cfg.convergence_tol:
            converged = True
            break
        eta = 1.0 / np.sqrt(iterations)
        p = p * np.exp2(eta * (g - g.max()))
        p = np.maximum(p, 1e-300)
        p = project(p / p.sum())
    return best_p, iterations, converged


def _hypothesis_tables(instance: ProblemInstance, cfg: SolverConfig):
    """Mixed communication channels under both priors plus the (possibly
    clamped) per-input echo divergence vector."""
    if instance.q_s is None:
        raise InfeasibleError("alternative hypothesis prior required")
    y_given_xs, z_given_xs = split_marginals(instance.channel)
    wp = mix_over_state(y_given_xs, instance.p_s)
    wq = mix_over_state(y_given_xs, instance.q_s)
    zp = mix_over_state(z_given_xs, instance.p_s)
    zq = mix_over_state(z_given_xs, instance.q_s)
    e_raw = np.array([kl_divergence(zp[i], zq[i]) for i in range(zp.shape[0])])
    clamped = bool(np.isinf(e_raw).any())
    e = np.where(np.isinf(e_raw), cfg.kl_clamp, e_raw)
    tables = [(wp, _neg_cond_entropy(wp)), (wq, _neg_cond_entropy(wq))]
    return tables, e, clamped


def _min_mi(p, tables):
    return min(mutual_information(p, w) for w, _ in tables)


def capacity_under_exponent(instance: ProblemInstance, exponent_floor, cfg: SolverConfig | None = None) -> FrontierPoint:
    """Largest min-hypothesis rate with expected echo divergence >= floor."""
    cfg = cfg or SolverConfig()
    tables, e, clamped = _hypothesis_tables(instance, cfg)
    floor = float(exponent_floor)
    e_max = float(e.max())
    if floor > e_max + 1e-9:
        raise InfeasibleError(f"exponent above maximum achievable ({e_max:.12g})")

    p_main, total_iters, all_converged = _eg_min_capacity(tables, cfg, e=e, floor=floor)
    candidates = [(p_main, float(e @ p_main))]
    # Inputs that are individually rich enough form a feasible face; a
    # solve restricted to them covers the degenerate top of the sweep.
    rich = e >= floor - _FEAS_SLACK
    if rich.any():
        sub_tables = [(w[rich], neg_h[rich]) for w, neg_h in tables]
        p_sub, iters, ok = _eg_min_capacity(sub_tables, cfg)
        total_iters += iters
        all_converged = all_converged and ok
        p_restr = np.zeros_like(e)
        p_restr[rich] = p_sub
        candidates.append((p_restr, float(e @ p_restr)))

    feasible = [(p, v, _min_mi(p, tables)) for p, v in candidates if v >= floor - 1e-9]
    top = max(r for _, _, r in feasible)
    # among rate ties (within solver precision) prefer the richest point
    best = max(((p, v, r) for p, v, r in feasible if r >= top - 1e-8),
               key=lambda pvr: pvr[1])
    return FrontierPoint(
        rate=best[2], objective=floor, p_x=best[0],
        converged=all_converged, iterations=total_iters, achieved=best[1],
        clamped=clamped,
    )


def re_frontier(instance: ProblemInstance, n_points: int, cfg: SolverConfig | None = None):
    """Sweep the exponent target linearly over [0, max per-input divergence]."""
    cfg = cfg or SolverConfig()
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    _, e, _ = _hypothesis_tables(instance, cfg)
    targets = np.linspace(0.0, float(e.max()), n_points)
    return [capacity_under_exponent(instance, t, cfg) for t in targets]


# ---------------------------------------------------------------------------
# Exhaustive simplex-grid oracle
# ---------------------------------------------------------------------------

def _simplex_grid(m: int, k: int) -> np.ndarray:
    """All length-k integer compositions of m, as rows."""
    if k == 1:
        return np.array([[m]], dtype=np.int64)
    blocks = []
    for first in range(m + 1):
        tail = _simplex_grid(m - first, k - 1)
        head = np.full((tail.shape[0], 1), first, dtype=np.int64)
        blocks.append(np.hstack([head, tail]))
    return np.vstack(blocks)


def _mi_rows(grid, w, neg_h):
    q = grid @ w
    h_out = -(q * _masked_log2(q)).sum(axis=1)
    return h_out + grid @ neg_h


def grid_oracle(
    instance: ProblemInstance,
    constraint: str,
    bound,
    objective: str | None = None,
    step: float | None = None,
    cfg: SolverConfig | None = None,
) -> FrontierPoint:
    """Brute-force frontier point by enumerating the input simplex.

    constraint: "cost" (expected cost <= bound) or "exponent"
    (expected divergence >= bound).  objective: "mi_p" or "min_mi"
    (defaults to the natural pairing).  Ties are broken toward the
    lexicographically smallest input pmf.
    """
    cfg = cfg or SolverConfig()
    step = cfg.grid_step if step is None else float(step)
    if constraint not in ("cost", "exponent"):
        raise ValueError("constraint must be 'cost' or 'exponent'")
    if objective is None:
        objective = "mi_p" if constraint == "cost" else "min_mi"
    if objective not in ("mi_p", "min_mi"):
        raise ValueError("objective must be 'mi_p' or 'min_mi'")

    k = instance.channel.x.size
    if k > 4:
        raise ValueError("oracle restricted to small alphabets (|X| <= 4)")
    m = round(1.0 / step)
    if m < 1:
        raise ValueError("step must be at most 1")
    grid = _simplex_grid(m, k).astype(float) / m

    y_given_xs, _ = split_marginals(instance.channel)
    bound = float(bound)
    clamped = False
    if constraint == "cost":
        if instance.distortion is None:
            raise InfeasibleError("distortion spec required")
        cvec = per_input_cost(instance.channel, instance.p_s, instance.distortion)
        feasible = grid @ cvec <= bound + _FEAS_SLACK
    else:
        _, evec, clamped = _hypothesis_tables(instance, cfg)
        cvec = evec
        feasible = grid @ cvec >= bound - _FEAS_SLACK
    if not feasible.any():
        raise InfeasibleError("no feasible grid point")

    wp = mix_over_state(y_given_xs, instance.p_s)
    vals = _mi_rows(grid, wp, _neg_cond_entropy(wp))
    if objective == "min_mi":
        if instance.q_s is None:
            raise InfeasibleError("alternative hypothesis prior required")
        wq = mix_over_state(y_given_xs, instance.q_s)
        vals = np.minimum(vals, _mi_rows(grid, wq, _neg_cond_entropy(wq)))

    vals = np.where(feasible, vals, -INF)
    vmax = vals.max()
    ties = grid[vals == vmax]
    order = np.lexsort(ties.T[::-1])
    best = ties[order[0]]
    return FrontierPoint(
        rate=float(vmax), objective=bound, p_x=best, converged=True,
        iterations=grid.shape[0], achieved=float(best @ cvec), clamped=clamped,
    )
