"""Exact errors, seeded sampling and Monte-Carlo PAC experiments.

Distributions are dense ``(d, k)`` probability tables, so every true error is
computed exactly; randomness only enters through the drawn samples. Every
random stream is derived from ``(seed, *keys)`` with a counter-based Philox
generator, so results do not depend on how trials are split across workers.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from statistics import NormalDist

import numpy as np

from .hypothesis import HypothesisClass
from .learners import ErmPolicy
from .streams import make_rng

SUM_TOL = 1e-12
# Excess errors are sums of floats; a failure is "excess > epsilon" beyond this slack.
ERROR_TOL = 1e-12


class DiscreteDistribution:
    """Probability table over instance-label pairs, ``probs[x, y] = P(x, y)``."""

    __slots__ = ("d", "k", "probs", "_cdf")

    def __init__(self, probs):
        probs = np.array(probs, dtype=np.float64)
        if probs.ndim != 2 or probs.size == 0:
            raise ValueError("probs must be a non-empty (d, k) table")
        if (probs < 0).any() or not np.isfinite(probs).all():
            raise ValueError("probabilities must be finite and non-negative")
        total = math.fsum(probs.ravel().tolist())
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        probs.setflags(write=False)
        self.probs = probs
        self.d, self.k = probs.shape
        self._cdf = None

    @classmethod
    def from_entries(cls, d: int, k: int, entries) -> "DiscreteDistribution":
        probs = np.zeros((d, k))
        for x, y, p in entries:
            if not (0 <= x < d and 0 <= y < k):
                raise ValueError(f"entry ({x}, {y}) outside a {d}x{k} table")
            probs[x, y] += p
        return cls(probs)

    @classmethod
    def from_json(cls, obj) -> "DiscreteDistribution":
        if isinstance(obj, (str, bytes)):
            obj = json.loads(obj)
        return cls.from_entries(int(obj["d"]), int(obj["k"]), obj["entries"])

    @classmethod
    def load(cls, path) -> "DiscreteDistribution":
        return cls.from_json(Path(path).read_text())

    def to_json(self) -> dict:
        xs, ys = np.nonzero(self.probs)
        entries = [[int(x), int(y), float(self.probs[x, y])] for x, y in zip(xs, ys)]
        return {"d": self.d, "k": self.k, "entries": entries}

    @property
    def instance_marginal(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    @property
    def label_marginal(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    def relabel(self, perm) -> "DiscreteDistribution":
        """Distribution of ``(x, perm[y])``."""
        perm = np.asarray(perm)
        out = np.zeros_like(self.probs)
        out[:, perm] = self.probs
        return DiscreteDistribution(out)

    def cdf(self) -> np.ndarray:
        if self._cdf is None:
            self._cdf = np.cumsum(self.probs.ravel())
        return self._cdf


def _check_shapes(d: int, k: int, D: DiscreteDistribution) -> None:
    if d != D.d:
        raise ValueError(f"hypothesis has {d} instances, distribution has {D.d}")


def true_errors(H: HypothesisClass, D: DiscreteDistribution) -> np.ndarray:
    """Exact error of every hypothesis of ``H`` under ``D``."""
    _check_shapes(H.d, H.k, D)
    if H.k > D.k:
        # labels the distribution never produces contribute no matching mass
        probs = np.zeros((D.d, H.k))
        probs[:, :D.k] = D.probs
    else:
        probs = D.probs
    matched = probs[np.arange(H.d), H.table]
    return (probs.sum(axis=1)[None, :] - matched).sum(axis=1)


def true_error(h, D: DiscreteDistribution) -> float:
    """Pr_{(x,y)~D}(h(x) != y), summed exactly over the table."""
    h = np.asarray(h, dtype=np.int64)
    if h.ndim != 1 or len(h) != D.d:
        raise ValueError(f"hypothesis has shape {h.shape}, distribution has {D.d} instances")
    wrong = np.arange(D.k)[None, :] != h[:, None]
    return float(math.fsum(D.probs[wrong].tolist()))


def approximation_error(H: HypothesisClass, D: DiscreteDistribution) -> float:
    return float(true_errors(H, D).min())


def draw_sample(D: DiscreteDistribution, m: int, seed=0) -> np.ndarray:
    """``m`` i.i.d. pairs as an ``(m, 2)`` array, by inverse CDF over row-major pair order.

    ``seed`` may be an int, a tuple of ints (stream keys) or a Generator.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if isinstance(seed, np.random.Generator):
        rng = seed
    elif isinstance(seed, tuple):
        rng = make_rng(*seed)
    else:
        rng = make_rng(seed)
    cdf = D.cdf()
    flat = np.searchsorted(cdf, rng.random(m), side="right")
    # u beyond a cdf total of 1 - tiny rounds to the last cell with positive mass
    flat = np.minimum(flat, np.flatnonzero(D.probs.ravel())[-1])
    return np.stack(np.divmod(flat, D.k), axis=1).astype(np.int64)


def badlb_distribution(d: int, epsilon: float, f0=None, k: int | None = None, *,
                       strict: bool = True) -> DiscreteDistribution:
    """Hard distribution for a bad ERM: P(x_0) = 1 - 2 eps, P(x_i) = 2 eps / (d - 1).

    Labels are deterministic, ``y = f0(x)`` (default all zeros). ``strict``
    enforces ``0 < epsilon < 1/12``; without it any ``epsilon`` in (0, 1/2]
    is accepted, which experiments use to reach small sample sizes.
    """
    if d < 2:
        raise ValueError("badlb_distribution needs d >= 2")
    upper = 1 / 12 if strict else 0.5
    if not (0 < epsilon < upper or (not strict and epsilon == upper)):
        raise ValueError(f"epsilon must lie in (0, {upper:g}){'' if strict else ']'}, got {epsilon}")
    f0 = np.zeros(d, dtype=np.int64) if f0 is None else np.asarray(f0, dtype=np.int64)
    if f0.shape != (d,):
        raise ValueError("f0 must assign a label to each of the d instances")
    k = int(f0.max()) + 1 if k is None else k
    probs = np.zeros((d, k))
    probs[0, f0[0]] = 1 - 2 * epsilon
    probs[np.arange(1, d), f0[1:]] = 2 * epsilon / (d - 1)
    return DiscreteDistribution(probs)


# -- rates and intervals ----------------------------------------------------------------

def wilson_interval(successes: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion; ``(0, 1)`` when ``n == 0``."""
    if n == 0:
        return 0.0, 1.0
    if not 0 <= successes <= n:
        raise ValueError("need 0 <= successes <= n")
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    p = successes / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class RateEstimate:
    m: int
    failures: int
    trials: int
    rate: float
    lower: float
    upper: float
    method: str = "wilson95"


def _failure_chunk(args) -> list[bool]:
    policy, H, D, m, epsilon, seed, trial_ids, errs, approx = args
    out = []
    for t in trial_ids:
        S = draw_sample(D, m, (seed, m, t))
        idx = policy.fit(H, S).index
        out.append(bool(errs[idx] - approx > epsilon + ERROR_TOL))
    return out


def failure_flags(policy: ErmPolicy, H: HypothesisClass, D: DiscreteDistribution, m: int,
                  epsilon: float, trials: int, seed: int = 0, workers: int = 1) -> list[bool]:
    """Per-trial indicator of excess error above ``epsilon``; independent of ``workers``."""
    policy = policy.bind(H)
    errs = true_errors(H, D)
    approx = float(errs.min())
    ids = list(range(trials))
    if workers <= 1 or trials < 2:
        return _failure_chunk((policy, H, D, m, epsilon, seed, ids, errs, approx))
    chunks = [ids[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_failure_chunk, [(policy, H, D, m, epsilon, seed, c, errs, approx) for c in chunks]))
    flags = [False] * trials
    for chunk, part in zip(chunks, parts):
        for t, f in zip(chunk, part):
            flags[t] = f
    return flags


def failure_rate(policy: ErmPolicy, H: HypothesisClass, D: DiscreteDistribution, m: int,
                 epsilon: float, trials: int = 1000, seed: int = 0, workers: int = 1) -> RateEstimate:
    """Monte-Carlo estimate of Pr(excess error > epsilon) at sample size m."""
    fails = sum(failure_flags(policy, H, D, m, epsilon, trials, seed, workers))
    lo, hi = wilson_interval(fails, trials)
    return RateEstimate(m, fails, trials, fails / trials if trials else 0.0, lo, hi)


@dataclass(frozen=True)
class SampleComplexityEstimate:
    epsilon: float
    delta: float
    m_hat: int | None
    exceeded: bool
    failure_rate_at_m: RateEstimate | None
    trials: int
    seed: int
    m_max: int
    method: str = "wilson95"
    tested: tuple[RateEstimate, ...] = field(default=())

    def to_json(self) -> dict:
        return asdict(self)


def estimate_sample_complexity(policy: ErmPolicy, H: HypothesisClass, D: DiscreteDistribution,
                               epsilon: float, delta: float, trials: int = 1000, seed: int = 0,
                               *, m_max: int = 4096, workers: int = 1) -> SampleComplexityEstimate:
    """Smallest tested m whose Wilson upper bound on the failure rate is at most delta.

    Sizes 1, 2, 4, ... are tried until one passes, then the gap to the last
    failing size is bisected. If no size up to ``m_max`` passes the result is
    marked ``exceeded`` with ``m_hat = None``.
    """
    if trials < 100:
        raise ValueError("trials must be >= 100")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    policy = policy.bind(H)
    tested: dict[int, RateEstimate] = {}

    def ok(m: int) -> bool:
        if m not in tested:
            tested[m] = failure_rate(policy, H, D, m, epsilon, trials, seed, workers)
        return tested[m].upper <= delta

    lo, hi = 0, 1
    while not ok(hi):
        if hi >= m_max:
            return SampleComplexityEstimate(epsilon, delta, None, True, tested[hi], trials, seed,
                                            m_max, tested=tuple(tested[m] for m in sorted(tested)))
        lo, hi = hi, min(2 * hi, m_max)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    m_hat = min(m for m, r in tested.items() if r.upper <= delta)
    return SampleComplexityEstimate(epsilon, delta, m_hat, False, tested[m_hat], trials, seed, m_max,
                                    tested=tuple(tested[m] for m in sorted(tested)))


def exact_unsampled_failure(instance_probs, epsilon: float, m: int, approx: float = 0.0) -> float:
    """Exact Pr(total mass of instances missing from an m-sample > approx + epsilon).

    This is the failure probability of the bad ERM on its hard distribution,
    whose output errs exactly on the unsampled witness instances. Computed by
    Moebius inversion of Pr(sample support within W) = P(W)^m over subsets W.
    """
    p = np.asarray(instance_probs, dtype=np.float64)
    d = len(p)
    if d > 20:
        raise ValueError("exact computation enumerates 2^d subsets; d must be <= 20")
    n = 1 << d
    masks = np.arange(n)
    bits = (masks[:, None] >> np.arange(d)) & 1
    mass = bits @ p
    if m == 0:
        exact = (masks == 0).astype(np.float64)
    else:
        exact = mass**m
        # subset Moebius transform: exact[W] = sum_{V <= W} (-1)^{|W - V|} P(V)^m
        for i in range(d):
            bit = 1 << i
            has = (masks & bit) != 0
            exact[has] -= exact[masks[has] ^ bit]
    unsampled = 1.0 - mass  # missing mass when the support is exactly W
    fails = unsampled > approx + epsilon + ERROR_TOL
    return float(max(0.0, min(1.0, math.fsum(exact[fails].tolist()))))


# -- random bijections ------------------------------------------------------------------

@dataclass(frozen=True)
class ChernBound:
    alpha: float
    k: int
    gamma: float
    log_raw: float
    raw: float
    bound: float


def chern_substitute_bound(alpha: float, phat, k: int | None = None) -> ChernBound:
    """gamma = alpha^2 / sum p^2 and (8 k e / gamma^2)^(gamma/2), clamped to 1 (raw value kept)."""
    phat = np.asarray(phat, dtype=np.float64)
    k = len(phat) if k is None else k
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if (phat < 0).any() or abs(phat.sum() - 1) > 1e-9:
        raise ValueError("phat must be a probability vector")
    if k < 1:
        raise ValueError("k must be >= 1")
    gamma = alpha**2 / float(np.dot(phat, phat))
    log_raw = gamma / 2 * (math.log(8 * k) + 1 - 2 * math.log(gamma))
    raw = math.exp(log_raw) if log_raw < 700 else math.inf
    return ChernBound(alpha, k, gamma, log_raw, raw, min(1.0, raw))


@dataclass(frozen=True)
class BijectionExperimentReport:
    trials: int
    alpha: float
    count: int
    fraction: float | None
    chern: ChernBound
    seed: int
    errors: tuple[float, ...] = ()

    def to_json(self) -> dict:
        return asdict(self)


def check_balanced(D: DiscreteDistribution) -> None:
    limit = 10 / D.k
    for y, p in enumerate(D.label_marginal.tolist()):
        if p > limit + SUM_TOL:
            raise ValueError(f"distribution is not balanced: label {y} has mass {p:.6g} > 10/k = {limit:.6g}")


def random_bijection_experiment(H: HypothesisClass, D: DiscreteDistribution, alpha: float,
                                trials: int, seed: int = 0) -> BijectionExperimentReport:
    """Fraction of uniform label bijections phi with approximation error of phi o H at least 1 - alpha."""
    if H.k != D.k:
        raise ValueError("class and distribution must share the label set")
    check_balanced(D)
    errors = []
    for t in range(trials):
        phi = make_rng(seed, t).permutation(H.k)
        matched = D.probs[np.arange(H.d), phi[H.table]].sum(axis=1)
        errors.append(float(1.0 - matched.max()))
    count = sum(e >= 1 - alpha - ERROR_TOL for e in errors)
    fraction = count / trials if trials else None
    return BijectionExperimentReport(trials, alpha, count, fraction,
                                     chern_substitute_bound(alpha, D.label_marginal, H.k), seed, tuple(errors))
