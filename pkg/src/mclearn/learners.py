"""ERM learners and the algorithm-dependent quantities used to bound them.

Every learner here is an empirical risk minimizer; they differ only in how
they break ties among minimizers. Ties default to canonical (lexicographic)
hypothesis order.

A sample is anything :func:`as_xy` accepts: a sequence of ``(x, y)`` pairs,
an ``(m, 2)`` array, or a tuple of two 1-d numpy arrays ``(xs, ys)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .dimensions import GShatterWitness, graph_dim, natarajan_dim
from .errors import BudgetError, InvariantError, get_budget
from .hypothesis import HypothesisClass, is_symmetric
from .streams import make_rng


def as_xy(S) -> tuple[np.ndarray, np.ndarray]:
    if (isinstance(S, tuple) and len(S) == 2 and isinstance(S[0], np.ndarray)
            and isinstance(S[1], np.ndarray) and S[0].ndim == 1):
        return np.asarray(S[0], dtype=np.int64), np.asarray(S[1], dtype=np.int64)
    arr = np.asarray(S, dtype=np.int64)
    if arr.size == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return arr[:, 0], arr[:, 1]


def empirical_errors(H: HypothesisClass, S) -> np.ndarray:
    """Number of sample points each hypothesis gets wrong (unnormalized)."""
    xs, ys = as_xy(S)
    if len(xs) and (xs.min() < 0 or xs.max() >= H.d):
        raise ValueError("sample instance out of range")
    return (H.table[:, xs] != ys).sum(axis=1)


class ErmFit(NamedTuple):
    index: int
    table: np.ndarray
    fallback: bool = False


def _fit(H, i, fallback=False) -> ErmFit:
    return ErmFit(int(i), H.table[i], fallback)


def erm_generic(H: HypothesisClass, S) -> ErmFit:
    errs = empirical_errors(H, S)
    return _fit(H, np.argmin(errs))  # argmin returns the first minimizer


def erm_bad(H: HypothesisClass, S, witness: GShatterWitness, *, check: bool = True) -> ErmFit:
    """Agree with the witness function on sampled witness instances, disagree on the rest.

    Applies only when the sample agrees with the witness function on every
    sampled witness instance and the adversarial choice is still an empirical
    minimizer; otherwise falls back to :func:`erm_generic`.
    """
    if check and not witness.verify(H):
        raise ValueError("witness does not G-shatter its set for this class")
    xs, ys = as_xy(S)
    errs = empirical_errors(H, (xs, ys))
    wset = np.asarray(witness.set, dtype=np.int64)
    f0 = np.asarray(witness.f, dtype=np.int64)
    if len(wset) == 0:
        return erm_generic(H, (xs, ys))
    pos = {int(x): j for j, x in enumerate(wset)}
    sampled = np.zeros(len(wset), dtype=bool)
    for x, y in zip(xs.tolist(), ys.tolist()):
        j = pos.get(x)
        if j is not None:
            if y != f0[j]:
                fit = erm_generic(H, (xs, ys))
                return fit._replace(fallback=True)
            sampled[j] = True
    on_set = H.table[:, wset]
    eligible = np.all(np.where(sampled, on_set == f0, on_set != f0), axis=1)
    hits = np.flatnonzero(eligible & (errs == errs.min()))
    if len(hits) == 0:
        return erm_generic(H, (xs, ys))._replace(fallback=True)
    return _fit(H, hits[0])


def _default_labels(H: HypothesisClass, default_labels) -> tuple[int, ...]:
    if default_labels is not None:
        return tuple(default_labels)
    return () if H.sentinel is None else (H.sentinel,)


def erm_good_observed_labels(H: HypothesisClass, S, default_labels=None) -> ErmFit:
    """First empirical minimizer whose range uses only observed labels (plus defaults).

    ``default_labels`` defaults to the class sentinel (``*`` for the Cantor
    class) and to nothing otherwise.
    """
    xs, ys = as_xy(S)
    errs = empirical_errors(H, (xs, ys))
    allowed = np.union1d(ys, np.asarray(_default_labels(H, default_labels), dtype=np.int64))
    in_range = np.isin(H.table, allowed).all(axis=1)
    hits = np.flatnonzero(in_range & (errs == errs.min()))
    if len(hits) == 0:
        return erm_generic(H, (xs, ys))._replace(fallback=True)
    return _fit(H, hits[0])


def erm_symmetric(H: HypothesisClass, S, Z, *, natarajan: int | None = None, strict: bool = True) -> ErmFit:
    """Consistent hypothesis with range inside observed labels plus ``Z``.

    Takes the first consistent hypothesis and renames each of its unobserved
    labels outside ``Z`` to an unused label of ``Z``; symmetry keeps the
    result in ``H``. With ``strict`` the class is checked for symmetry and
    ``|Z|`` must equal ``2 * natarajan_dim(H) + 1``.
    """
    Z = {int(z) for z in Z}
    if any(z < 0 or z >= H.k for z in Z):
        raise ValueError("Z must be a set of labels of the class")
    if strict:
        if not is_symmetric(H):
            raise ValueError("erm_symmetric needs a symmetric class")
        dN = natarajan_dim(H)[0] if natarajan is None else natarajan
        if len(Z) != 2 * dN + 1:
            raise ValueError(f"|Z| must be 2*d_N+1 = {2 * dN + 1}, got {len(Z)}")
    xs, ys = as_xy(S)
    errs = empirical_errors(H, (xs, ys))
    consistent = np.flatnonzero(errs == 0)
    if len(consistent) == 0:
        return erm_generic(H, (xs, ys))._replace(fallback=True)
    f = H.table[consistent[0]]
    observed = set(ys.tolist())
    rng = set(f.tolist())
    move = sorted(rng - observed - Z)
    free = sorted(Z - observed - rng)
    if len(free) < len(move):
        raise InvariantError("not enough free labels in Z; is |Z| at least the range bound?")
    perm = np.arange(H.k)
    for r, z in zip(move, free):
        perm[r], perm[z] = z, r
    g = perm[f]
    try:
        return _fit(H, H.index_of(g))
    except KeyError:
        raise InvariantError("relabelled hypothesis left the class; the class is not symmetric") from None


# -- policies --------------------------------------------------------------------------

POLICY_KINDS = ("generic", "bad", "good_observed_labels", "symmetric_Z")


@dataclass(frozen=True)
class ErmPolicy:
    """A named ERM tie-breaking rule plus its parameters.

    ``bad`` needs a G-shattering witness and ``symmetric_Z`` a label set;
    :meth:`bind` fills in a witness from :func:`graph_dim` when none is given.
    """

    kind: str = "generic"
    witness: GShatterWitness | None = None
    Z: tuple[int, ...] | None = None
    default_labels: tuple[int, ...] | None = None
    tie_break: str = "canonical"
    _checked: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown ERM policy {self.kind!r}; choose from {POLICY_KINDS}")
        if self.tie_break != "canonical":
            raise ValueError("only canonical tie-breaking is implemented")
        if self.kind == "symmetric_Z" and self.Z is None:
            raise ValueError("symmetric_Z policy needs a label set Z")

    def bind(self, H: HypothesisClass) -> "ErmPolicy":
        """Resolve and validate class-dependent parameters once."""
        if self.kind == "bad":
            witness = self.witness or graph_dim(H)[1]
            if not witness.verify(H):
                raise ValueError("witness does not G-shatter its set for this class")
            return replace(self, witness=witness, _checked=True)
        if self.kind == "symmetric_Z" and not self._checked:
            if not is_symmetric(H):
                raise ValueError("symmetric_Z policy needs a symmetric class")
            dN = natarajan_dim(H)[0]
            if len(set(self.Z)) != 2 * dN + 1:
                raise ValueError(f"|Z| must be 2*d_N+1 = {2 * dN + 1}")
            return replace(self, _checked=True)
        return self

    def fit(self, H: HypothesisClass, S) -> ErmFit:
        if self.kind == "generic":
            return erm_generic(H, S)
        if self.kind == "good_observed_labels":
            return erm_good_observed_labels(H, S, self.default_labels)
        if self.kind == "bad":
            policy = self if self._checked else self.bind(H)
            return erm_bad(H, S, policy.witness, check=False)
        return erm_symmetric(H, S, self.Z, strict=False) if self._checked else self.bind(H).fit(H, S)

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        if self.Z is not None:
            out["Z"] = list(self.Z)
        if self.default_labels is not None:
            out["default_labels"] = list(self.default_labels)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ErmPolicy":
        witness = obj.get("witness")
        if witness is not None:
            witness = GShatterWitness(tuple(witness["set"]), tuple(witness["f"]))
        z = obj.get("Z")
        defaults = obj.get("default_labels")
        return cls(
            kind=obj["kind"],
            witness=witness,
            Z=None if z is None else tuple(z),
            default_labels=None if defaults is None else tuple(defaults),
        )


# -- growth function and essential range ------------------------------------------------

def _candidate_samples(H: HypothesisClass, m: int, mode: str):
    # ERM outputs here depend on the sample only as a multiset, so multisets suffice.
    if mode == "realizable":
        out = set()
        for f in H.table.tolist():
            for xs in itertools.combinations_with_replacement(range(H.d), 2 * m):
                out.add(tuple((x, f[x]) for x in xs))
        return sorted(out)
    if mode == "agnostic":
        pairs = [(x, y) for x in range(H.d) for y in range(H.k)]
        return list(itertools.combinations_with_replacement(pairs, 2 * m))
    raise ValueError(f"mode must be 'realizable' or 'agnostic', got {mode!r}")


def _count_samples(H: HypothesisClass, m: int, mode: str) -> int:
    if mode == "realizable":
        return len(H) * math.comb(H.d + 2 * m - 1, 2 * m)
    return math.comb(H.d * H.k + 2 * m - 1, 2 * m)


def _random_samples(H: HypothesisClass, m: int, mode: str, trials: int, seed: int):
    rng = make_rng(seed, 0x6F)
    for _ in range(trials):
        xs = rng.integers(0, H.d, size=2 * m)
        if mode == "realizable":
            ys = H.table[rng.integers(len(H)), xs]
        else:
            ys = rng.integers(0, H.k, size=2 * m)
        yield tuple(sorted(zip(xs.tolist(), ys.tolist())))


def _scan(policy: ErmPolicy, H: HypothesisClass, m: int, mode: str, trials: int | None, seed: int):
    if m < 1:
        raise ValueError("m must be >= 1")
    policy = policy.bind(H)
    if trials is None:
        needed = _count_samples(H, m, mode)
        limit = get_budget().growth_samples
        if needed > limit:
            raise BudgetError(f"exhaustive {mode} growth-function samples", needed, limit)
        samples = _candidate_samples(H, m, mode)
    else:
        if mode not in ("realizable", "agnostic"):
            raise ValueError(f"mode must be 'realizable' or 'agnostic', got {mode!r}")
        samples = _random_samples(H, m, mode, trials, seed)
    ranges = H.ranges()
    cache: dict = {}
    growth = erange = 0
    for S in samples:
        X_S = sorted({x for x, _ in S})
        outputs = set()
        labels = set()
        for sub in set(itertools.combinations(S, m)):
            i = cache.get(sub)
            if i is None:
                i = cache[sub] = policy.fit(H, sub).index
            outputs.add(tuple(H.table[i, X_S].tolist()))
            labels |= ranges[i]
        growth = max(growth, len(outputs))
        erange = max(erange, len(labels))
    return growth, erange


def growth_and_range(policy: ErmPolicy, H: HypothesisClass, m: int, mode: str = "realizable",
                     *, trials: int | None = None, seed: int = 0) -> tuple[int, int]:
    """``(growth_function, essential_range)`` from a single pass over the samples."""
    return _scan(policy, H, m, mode, trials, seed)


def growth_function(policy: ErmPolicy, H: HypothesisClass, m: int, mode: str = "realizable",
                    *, trials: int | None = None, seed: int = 0) -> int:
    """Algorithm-dependent growth function Pi_A(m).

    Exhaustive (exact) by default; with ``trials`` it becomes a Monte-Carlo
    lower bound, the max over that many random size-2m samples.
    """
    return _scan(policy, H, m, mode, trials, seed)[0]


def essential_range(policy: ErmPolicy, H: HypothesisClass, m: int, mode: str = "realizable",
                    *, trials: int | None = None, seed: int = 0) -> int:
    """Largest number of labels used by the outputs on the size-m sub-samples of a size-2m sample."""
    return _scan(policy, H, m, mode, trials, seed)[1]


# -- bound formulas ----------------------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    m: int
    pi: float
    delta: float
    realizable_bound: float
    agnostic_bound: float


def _bounds_from_log_pi(m: int, log_pi: float, delta: float) -> tuple[float, float]:
    realizable = 12.0 * (math.log(2.0) + log_pi - math.log(delta)) / m
    # ln(4 pi + 4) = ln 4 + ln(pi + 1), kept finite for huge pi
    log_pi_plus_1 = log_pi + math.log1p(math.exp(-log_pi))
    agnostic = math.sqrt(32.0 * (math.log(4.0) + log_pi_plus_1 - math.log(delta)) / m)
    return realizable, agnostic


def _check_bound_args(m, delta):
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")


def double_sampling_bound(m: int, pi, delta: float) -> BoundReport:
    """Excess-error bounds from a growth value: 12 ln(2 pi/delta)/m and sqrt(32 ln((4 pi+4)/delta)/m)."""
    _check_bound_args(m, delta)
    if pi < 1:
        raise ValueError("pi must be >= 1")
    realizable, agnostic = _bounds_from_log_pi(m, math.log(pi), delta)
    return BoundReport(m, float(pi), delta, realizable, agnostic)


def restricted_range_bound(dN: int, m: int, r: int, delta: float, mode: str = "realizable") -> float:
    """Double-sampling bound with pi replaced by (2m)^dN * r^(2 dN)."""
    _check_bound_args(m, delta)
    if dN < 0 or r < 1:
        raise ValueError("need dN >= 0 and r >= 1")
    log_pi = dN * math.log(2 * m) + 2 * dN * math.log(r)
    realizable, agnostic = _bounds_from_log_pi(m, log_pi, delta)
    if mode == "realizable":
        return realizable
    if mode == "agnostic":
        return agnostic
    raise ValueError(f"mode must be 'realizable' or 'agnostic', got {mode!r}")
