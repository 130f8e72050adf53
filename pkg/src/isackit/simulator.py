"""Desk-scale achievability experiments.

Random coding with maximum-likelihood decoding on the state-averaged
channel checks the communication side; the per-symbol Bayes estimator
checks distortion; a likelihood-ratio test on the echo checks detection,
with the law of the LLR statistic computed exactly by iterated
convolution so that exponentially rare type-II errors are measurable.

All randomness is counter-based: every (seed, purpose, trial) triple owns
an independent Philox stream, so results are reproducible bit-for-bit
regardless of how trials are scheduled across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .frontier import InfeasibleError, SolverConfig, capacity_under_cost
from .model import ChannelModel, ProblemInstance, as_pmf, mix_over_state, split_marginals
from .sensing import apply_estimator, optimal_estimator, posterior, sequence_distortion

INF = float("inf")

MAX_CODEBOOK_MESSAGES = 2**20
MAX_LAW_ATOMS = 10**6

_PURPOSE_CODEBOOK = 1
_PURPOSE_XSEQ = 2
_PURPOSE_CHANNEL = 3
_PURPOSE_RD_TRIAL = 4
_PURPOSE_HT_H0 = 5
_PURPOSE_HT_H1 = 6


def _stream(seed: int, purpose: int, index: int = 0) -> np.random.Generator:
    """Independent Philox stream keyed by (seed, purpose, index)."""
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    if not 0 <= index < 2**48:
        raise ValueError("stream index out of range")
    key = np.array([seed, (purpose << 48) | index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _inverse_cdf(rng: np.random.Generator, pmf: np.ndarray, size) -> np.ndarray:
    cdf = np.cumsum(pmf)
    u = rng.random(size)
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, pmf.shape[0] - 1).astype(np.int64)


# ---------------------------------------------------------------------------
# Random codebooks and channel sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Codebook:
    n: int
    num_messages: int
    words: np.ndarray  # [num_messages, n] input indices
    seed: int
    rate: float

    def __post_init__(self):
        arr = np.array(self.words, dtype=np.int64, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "words", arr)


def generate_codebook(p_x, n: int, rate: float, seed: int) -> Codebook:
    """ceil(2^(n*rate)) codewords drawn i.i.d. from p_x, reproducibly."""
    p = as_pmf(p_x)
    if n < 1:
        raise ValueError("blocklength must be >= 1")
    if rate <= 0:
        raise ValueError("rate must be > 0")
    exponent = n * rate
    if exponent > math.log2(MAX_CODEBOOK_MESSAGES):
        raise ValueError(
            f"codebook of 2^{exponent:g} messages exceeds the limit of {MAX_CODEBOOK_MESSAGES}"
        )
    num = max(2, math.ceil(2.0**exponent))
    rng = _stream(seed, _PURPOSE_CODEBOOK)
    words = _inverse_cdf(rng, p, (num, n))
    return Codebook(n=n, num_messages=num, words=words, seed=int(seed), rate=float(rate))


def _draw_channel(rng: np.random.Generator, channel: ChannelModel, x_seq, prior_pmf):
    """Sample (s, y, z) sequences for a fixed input sequence."""
    x_seq = np.asarray(x_seq, dtype=np.int64)
    n = x_seq.shape[0]
    s_seq = _inverse_cdf(rng, prior_pmf, n)
    n_y, n_z = channel.y.size, channel.z.size
    yz_cdf = channel.w.reshape(channel.x.size, channel.s.size, n_y * n_z).cumsum(axis=2)
    rows = yz_cdf[x_seq, s_seq]
    u = rng.random(n)
    idx = np.minimum((rows <= u[:, None]).sum(axis=1), n_y * n_z - 1)
    return s_seq, idx // n_z, idx % n_z


def channel_sample(instance: ProblemInstance, x_seq, hypothesis: str, seed: int, stream: int = 0):
    """Draw (s_seq, y_seq, z_seq) with the state i.i.d. under the chosen
    hypothesis prior; `stream` separates parallel draws under one seed."""
    if hypothesis not in ("H0", "H1"):
        raise ValueError("hypothesis must be 'H0' or 'H1'")
    if hypothesis == "H1":
        if instance.q_s is None:
            raise ValueError("alternative hypothesis prior required")
        prior = as_pmf(instance.q_s)
    else:
        prior = as_pmf(instance.p_s)
    rng = _stream(seed, _PURPOSE_CHANNEL, stream)
    return _draw_channel(rng, instance.channel, x_seq, prior)


def ml_decode(y_seq, codebook: Codebook, p_y_given_x):
    """Maximum-likelihood message under the memoryless law p_y_given_x[x, y].

    Returns (message, degenerate): ties go to the smallest index, and if
    every codeword has zero likelihood the pair (0, True) is returned.
    """
    y_seq = np.asarray(y_seq, dtype=np.int64)
    w = np.asarray(p_y_given_x, dtype=float)
    with np.errstate(divide="ignore"):
        log_w = np.log2(w)
    scores = log_w[codebook.words, y_seq[None, :]].sum(axis=1)
    if np.isneginf(scores).all():
        return 0, True
    return int(np.argmax(scores)), False


# ---------------------------------------------------------------------------
# Likelihood-ratio statistics and their exact laws
# ---------------------------------------------------------------------------

def llr_statistic(x_seq, z_seq, p_zx, q_zx) -> float:
    """Sum over t of log2 p(z_t|x_t)/q(z_t|x_t), with +/-inf sentinels when
    exactly one hypothesis gives the observed symbol zero mass."""
    x_seq = np.asarray(x_seq, dtype=np.int64)
    z_seq = np.asarray(z_seq, dtype=np.int64)
    if x_seq.shape != z_seq.shape:
        raise ValueError("sequence length mismatch")
    p = np.asarray(p_zx, dtype=float)[x_seq, z_seq]
    q = np.asarray(q_zx, dtype=float)[x_seq, z_seq]
    if ((p == 0) & (q == 0)).any():
        raise ValueError("symbol outside both supports")
    pos, neg = (q == 0).any(), (p == 0).any()
    if pos and neg:
        raise ValueError("sequence has zero probability under both hypotheses")
    if pos:
        return INF
    if neg:
        return -INF
    return float(np.log2(p / q).sum())


@dataclass(frozen=True)
class LlrDistribution:
    """Exact law of an LLR sum: finite atoms plus explicit mass at +/-inf."""

    values: np.ndarray  # strictly increasing finite support
    masses: np.ndarray
    mass_neg_inf: float = 0.0
    mass_pos_inf: float = 0.0

    def __post_init__(self):
        for name in ("values", "masses"):
            arr = np.array(getattr(self, name), dtype=float, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def has_infinite(self) -> bool:
        return self.mass_neg_inf > 0 or self.mass_pos_inf > 0

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum() + self.mass_neg_inf + self.mass_pos_inf)

    def mass_below(self, tau) -> float:
        """P[LLR < tau]."""
        if tau == -INF:
            return 0.0
        total = float(self.masses[self.values < tau].sum())
        return total + self.mass_neg_inf

    def mass_at_or_above(self, tau) -> float:
        """P[LLR >= tau]."""
        if tau == -INF:
            return self.total_mass
        return float(self.masses[self.values >= tau].sum()) + self.mass_pos_inf


# Atoms whose mass under every tracked hypothesis falls below this floor are
# dropped: with at most 10^6 atoms the discarded mass is < 1e-294, far inside
# the 1e-9 conservation budget, and it keeps subnormal arithmetic out of the
# weighted means.
_MASS_FLOOR = 1e-300


def _merge_atoms(values: np.ndarray, mass_cols: np.ndarray, bin_width: float):
    """Sort atoms and merge values within bin_width of a group anchor into
    their mass-weighted mean; each mass column is preserved exactly.

    Means are computed relative to the group anchor so that huge
    value/mass magnitude mismatches cannot underflow the weighted sum.
    """
    keep = mass_cols.max(axis=1) > _MASS_FLOOR
    values, mass_cols = values[keep], mass_cols[keep]
    if values.size <= 1:
        return values, mass_cols
    order = np.argsort(values, kind="stable")
    v, m = values[order], mass_cols[order]
    weight = m.sum(axis=1)
    starts = np.empty(v.size, dtype=bool)
    starts[0] = True
    np.greater(np.diff(v), bin_width, out=starts[1:])
    gid = np.cumsum(starts) - 1
    n_groups = int(gid[-1]) + 1
    anchors = v[starts]
    gw = np.bincount(gid, weights=weight, minlength=n_groups)
    gshift = np.bincount(gid, weights=weight * (v - anchors[gid]), minlength=n_groups)
    gv = anchors + gshift / gw
    gm = np.column_stack([
        np.bincount(gid, weights=m[:, j], minlength=n_groups)
        for j in range(m.shape[1])
    ])
    return gv, gm


def _split_symbol(p_row: np.ndarray, q_row: np.ndarray):
    """Finite atoms (values, [H0 mass, H1 mass]) plus the one-sided masses
    forced to +inf (possible only under H0) and -inf (only under H1)."""
    p_row = np.asarray(p_row, dtype=float)
    q_row = np.asarray(q_row, dtype=float)
    finite = (p_row > 0) & (q_row > 0)
    vals = np.log2(p_row[finite] / q_row[finite])
    cols = np.column_stack([p_row[finite], q_row[finite]])
    pos_inf_h0 = float(p_row[(p_row > 0) & (q_row == 0)].sum())
    neg_inf_h1 = float(q_row[(q_row > 0) & (p_row == 0)].sum())
    return vals, cols, pos_inf_h0, neg_inf_h1


def _llr_pair_laws(x_seq, p_zx, q_zx, bin_width: float):
    """Exact laws of the LLR sum under H0 and H1 over one shared support.

    Convolving both hypotheses jointly keeps their finite supports on
    identical floats, so a threshold read off one law partitions the
    other without epsilon misalignment.
    """
    if bin_width < 0:
        raise ValueError("bin_width must be >= 0")
    x_seq = np.asarray(x_seq, dtype=np.int64)
    p_zx = np.asarray(p_zx, dtype=float)
    q_zx = np.asarray(q_zx, dtype=float)
    cache = {int(xv): _split_symbol(p_zx[xv], q_zx[xv]) for xv in np.unique(x_seq)}

    values = np.array([0.0])
    masses = np.array([[1.0, 1.0]])
    inf_pos_h0 = inf_neg_h1 = 0.0
    for xv in x_seq:
        sym_v, sym_m, sym_pos, sym_neg = cache[int(xv)]
        inf_pos_h0 += masses[:, 0].sum() * sym_pos
        inf_neg_h1 += masses[:, 1].sum() * sym_neg
        values = (values[:, None] + sym_v[None, :]).ravel()
        masses = (masses[:, None, :] * sym_m[None, :, :]).reshape(-1, 2)
        values, masses = _merge_atoms(values, masses, bin_width)
        if values.size > MAX_LAW_ATOMS:
            raise ValueError(
                f"LLR support exceeded {MAX_LAW_ATOMS} atoms; increase bin_width"
            )
    law0 = LlrDistribution(values=values, masses=masses[:, 0], mass_pos_inf=inf_pos_h0)
    law1 = LlrDistribution(values=values, masses=masses[:, 1], mass_neg_inf=inf_neg_h1)
    return law0, law1


def exact_llr_law(x_seq, p_zx, q_zx, hypothesis: str, bin_width: float = 1e-9) -> LlrDistribution:
    """Law of the n-fold LLR sum under the stated hypothesis, by iterated
    convolution of the per-symbol laws.

    Echo symbols that are possible under only one hypothesis contribute
    explicit mass at +/-inf (they force the sum to that value); these are
    kept out of the finite support and flagged via the distribution's
    infinite-mass fields.  Nearby finite atoms are merged mass-
    conservingly within bin_width.

    Masses are double precision: tail probabilities saturate near 1e-300,
    so exponent estimates are trustworthy only while n * exponent stays
    under roughly 1000 bits (comfortably past desk-scale blocklengths).
    """
    if hypothesis not in ("H0", "H1"):
        raise ValueError("hypothesis must be 'H0' or 'H1'")
    law0, law1 = _llr_pair_laws(x_seq, p_zx, q_zx, bin_width)
    law = law0 if hypothesis == "H0" else law1
    keep = law.masses > 0
    return LlrDistribution(values=law.values[keep], masses=law.masses[keep],
                           mass_neg_inf=law.mass_neg_inf, mass_pos_inf=law.mass_pos_inf)


def np_threshold(law_h0: LlrDistribution, alpha_target: float) -> float:
    """Largest threshold tau with P_H0[LLR < tau] <= alpha_target.

    The test accepts the null iff LLR >= tau; tau = -inf (never reject)
    is always feasible.  No randomization is used, so the achieved
    type-I error can sit strictly below the target.
    """
    if not 0.0 < alpha_target < 1.0:
        raise ValueError("alpha_target must lie in (0, 1)")
    tau = -INF
    cum = law_h0.mass_neg_inf
    for v, m in zip(law_h0.values, law_h0.masses):
        if cum <= alpha_target:
            tau = float(v)
        cum += m
    if law_h0.mass_pos_inf > 0 and cum <= alpha_target:
        tau = INF
    # a threshold that rejects nothing is reported canonically as -inf
    if tau != -INF and law_h0.mass_below(tau) == 0.0:
        tau = -INF
    return tau


def exact_beta(law_h1: LlrDistribution, tau) -> float:
    """Type-II error P_H1[LLR >= tau] of the threshold test."""
    return law_h1.mass_at_or_above(tau)


# ---------------------------------------------------------------------------
# Experiment drivers
# ---------------------------------------------------------------------------

def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    """95% Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    # rounding must never push the point estimate outside its own interval
    return min(phat, max(0.0, center - half)), max(phat, min(1.0, center + half))


@dataclass(frozen=True)
class SimulationReport:
    mode: str
    seed: int
    trials: int
    p_error_hat: float | None = None
    p_error_low: float | None = None
    p_error_high: float | None = None
    excess_distortion_hat: float | None = None
    excess_distortion_low: float | None = None
    excess_distortion_high: float | None = None
    alpha_hat: float | None = None
    alpha_low: float | None = None
    alpha_high: float | None = None
    beta: float | None = None
    exponent_hat: float | None = None
    threshold: float | None = None
    params: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        """Flat JSON object: report fields plus an echo of the inputs."""
        out = {}
        for key, value in {**self.params, **self.__dict__}.items():
            if key == "params":
                continue
            if isinstance(value, float) and not math.isfinite(value):
                value = str(value)
            if isinstance(value, np.ndarray):
                value = value.tolist()
            out[key] = value
        return out


def _map_trials(worker_fn, trials: int, workers: int):
    """Sum worker_fn over disjoint trial ranges; integer reduction keeps the
    result independent of scheduling."""
    ranges = [(start, min(start + max(1, math.ceil(trials / max(1, workers))), trials))
              for start in range(0, trials, max(1, math.ceil(trials / max(1, workers))))]
    if workers <= 1 or len(ranges) <= 1:
        parts = [worker_fn(a, b) for a, b in ranges]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: worker_fn(*ab), ranges))
    return [sum(col) for col in zip(*parts)] if parts else []


def run_rd_experiment(
    instance: ProblemInstance,
    rate: float,
    distortion: float,
    n: int,
    trials: int,
    seed: int,
    p_x=None,
    workers: int = 1,
    cfg: SolverConfig | None = None,
) -> SimulationReport:
    """Monte-Carlo random-coding run: decode errors and excess-distortion
    frequency at blocklength n.

    The codebook law defaults to the capacity achiever at the requested
    distortion cap.
    """
    if instance.distortion is None:
        raise InfeasibleError("distortion spec required")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if p_x is None:
        p_x = capacity_under_cost(instance, distortion, cfg).p_x
    p_x = as_pmf(p_x)
    codebook = generate_codebook(p_x, n, rate, seed)
    y_given_xs, _ = split_marginals(instance.channel)
    w_yx = mix_over_state(y_given_xs, instance.p_s)
    estimator = optimal_estimator(posterior(instance.channel, instance.p_s), instance.distortion)
    prior = as_pmf(instance.p_s)

    def chunk(start, stop):
        errors = excess = 0
        for trial in range(start, stop):
            rng = _stream(seed, _PURPOSE_RD_TRIAL, trial)
            message = int(rng.integers(codebook.num_messages))
            x_seq = codebook.words[message]
            s_seq, y_seq, z_seq = _draw_channel(rng, instance.channel, x_seq, prior)
            decoded, _ = ml_decode(y_seq, codebook, w_yx)
            errors += decoded != message
            shat_seq = apply_estimator(estimator, x_seq, z_seq)
            excess += sequence_distortion(instance.distortion, shat_seq, s_seq) > distortion
        return errors, excess

    errors, excess = _map_trials(chunk, trials, workers)
    p_lo, p_hi = wilson_interval(errors, trials)
    e_lo, e_hi = wilson_interval(excess, trials)
    return SimulationReport(
        mode="monte_carlo", seed=int(seed), trials=trials,
        p_error_hat=errors / trials, p_error_low=p_lo, p_error_high=p_hi,
        excess_distortion_hat=excess / trials, excess_distortion_low=e_lo,
        excess_distortion_high=e_hi,
        params={"rate": rate, "distortion": distortion, "n": n,
                "p_x": p_x.tolist(), "num_messages": codebook.num_messages},
    )


def run_ht_experiment(
    instance: ProblemInstance,
    p_x,
    n: int,
    alpha_target: float,
    mode: str = "exact_dp",
    bin_width: float = 1e-9,
    trials: int = 0,
    seed: int = 0,
    workers: int = 1,
) -> SimulationReport:
    """Neyman-Pearson detection run over the echo channel.

    The input sequence is drawn i.i.d. from p_x once per seed and held
    fixed.  The threshold is always calibrated from the exact H0 law;
    mode 'exact_dp' also evaluates both error probabilities exactly while
    'monte_carlo' estimates them from sampled trials (cross-validation at
    small n; it cannot see exponentially rare events).
    """
    if mode not in ("monte_carlo", "exact_dp"):
        raise ValueError("mode must be 'monte_carlo' or 'exact_dp'")
    if instance.q_s is None:
        raise InfeasibleError("alternative hypothesis prior required")
    p_x = as_pmf(p_x)
    x_seq = _inverse_cdf(_stream(seed, _PURPOSE_XSEQ), p_x, n)
    _, z_given_xs = split_marginals(instance.channel)
    zp = mix_over_state(z_given_xs, instance.p_s)
    zq = mix_over_state(z_given_xs, instance.q_s)
    law0, law1 = _llr_pair_laws(x_seq, zp, zq, bin_width)
    tau = np_threshold(law0, alpha_target)

    # the worker count is a scheduling knob, not an input: reports must be
    # bit-identical across worker counts, so it is not echoed
    params = {"n": n, "alpha_target": alpha_target, "bin_width": bin_width,
              "p_x": p_x.tolist()}
    if mode == "exact_dp":
        beta = exact_beta(law1, tau)
        exponent = INF if beta == 0 else -math.log2(beta) / n
        return SimulationReport(
            mode=mode, seed=int(seed), trials=0,
            alpha_hat=law0.mass_below(tau), beta=beta, exponent_hat=exponent,
            threshold=tau, params=params,
        )

    if trials < 1:
        raise ValueError("monte_carlo mode requires trials >= 1")
    p0, p1 = as_pmf(instance.p_s), as_pmf(instance.q_s)
    # Sampled LLR sums live on the same lattice as the exact law but reach
    # it through a different summation order; compare against the threshold
    # with a bin-sized tolerance so float drift cannot flip boundary atoms.
    tol = max(bin_width, 1e-9)

    def chunk(start, stop):
        rejects = accepts = 0
        for trial in range(start, stop):
            _, _, z0 = _draw_channel(_stream(seed, _PURPOSE_HT_H0, trial),
                                     instance.channel, x_seq, p0)
            rejects += llr_statistic(x_seq, z0, zp, zq) < tau - tol
            _, _, z1 = _draw_channel(_stream(seed, _PURPOSE_HT_H1, trial),
                                     instance.channel, x_seq, p1)
            accepts += llr_statistic(x_seq, z1, zp, zq) >= tau - tol
        return rejects, accepts

    rejects, accepts = _map_trials(chunk, trials, workers)
    beta_hat = accepts / trials
    a_lo, a_hi = wilson_interval(rejects, trials)
    exponent = INF if beta_hat == 0 else -math.log2(beta_hat) / n
    return SimulationReport(
        mode=mode, seed=int(seed), trials=trials,
        alpha_hat=rejects / trials, alpha_low=a_lo, alpha_high=a_hi,
        beta=beta_hat, exponent_hat=exponent, threshold=tau, params=params,
    )
