"""Bandit feedback: the learner only hears whether its guess was right.

Online, BSOA guesses the label whose removal drops the bandit-Littlestone
dimension of the version space the most; an adversary walking a BL-shattered
tree forces BL-Dim mistakes. In the batch setting, uniform random guesses
turn bandit feedback into a smaller full-information sample.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .dimensions import ShatteredTree, SubclassDims, bandit_littlestone_dim, littlestone_dim, pbi_upper_bound
from .errors import InvariantError, ProtocolError
from .hypothesis import HypothesisClass
from .learners import ErmFit, ErmPolicy
from .streams import make_rng


@dataclass(frozen=True)
class BanditRound:
    t: int
    x: int
    guess: int
    correct: bool


@dataclass
class BanditTranscript:
    learner: str
    rounds: list[BanditRound] = field(default_factory=list)
    seed: int | None = None

    @property
    def mistakes(self) -> int:
        return sum(not r.correct for r in self.rounds)

    def record(self, x: int, guess: int, correct: bool) -> None:
        self.rounds.append(BanditRound(len(self.rounds), int(x), int(guess), bool(correct)))

    def to_jsonl(self) -> str:
        return "".join(json.dumps(asdict(r), sort_keys=True) + "\n" for r in self.rounds)

    def to_json(self) -> dict:
        return {"learner": self.learner, "seed": self.seed, "mistakes": self.mistakes,
                "rounds": [asdict(r) for r in self.rounds]}


# -- oracles ---------------------------------------------------------------------------

class HiddenLabelingOracle:
    """Answers ``query(t, guess)`` from a fixed hidden label sequence."""

    def __init__(self, instances, labels):
        self.instances = [int(x) for x in instances]
        self.labels = [int(y) for y in labels]
        if len(self.instances) != len(self.labels):
            raise ValueError("instances and labels must have the same length")

    @classmethod
    def from_hypothesis(cls, h, instances) -> "HiddenLabelingOracle":
        h = np.asarray(h)
        return cls(instances, [int(h[x]) for x in instances])

    def __len__(self) -> int:
        return len(self.instances)

    def query(self, t: int, guess: int) -> bool:
        return self.labels[t] == guess

    def save(self, path) -> None:
        """Replay file: one JSON object ``{"t", "x", "label"}`` per line."""
        lines = [json.dumps({"t": t, "x": x, "label": y}, sort_keys=True)
                 for t, (x, y) in enumerate(zip(self.instances, self.labels))]
        Path(path).write_text("".join(line + "\n" for line in lines))


class ReplayOracle(HiddenLabelingOracle):
    """Hidden labeling loaded from a replay file written by :meth:`HiddenLabelingOracle.save`."""

    def __init__(self, path):
        xs, ys = [], []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                xs.append(int(row["x"]))
                ys.append(int(row["label"]))
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad replay line ({exc})") from None
        super().__init__(xs, ys)


# -- learners --------------------------------------------------------------------------

class BanditVersionSpaceLearner:
    """Keeps the hypotheses consistent with the feedback as a bitset."""

    name = "bandit-version-space"

    def __init__(self, H: HypothesisClass, dims: SubclassDims | None = None, *, filter_correct: bool = True):
        self.H = H
        self.dims = dims or SubclassDims(H)
        self.filter_correct = filter_correct
        self.V = self.dims.full

    def reset(self) -> None:
        self.V = self.dims.full

    def update(self, x: int, guess: int, correct: bool) -> None:
        if correct:
            V = self.dims.mask_eq(self.V, x, guess) if self.filter_correct else self.V
        else:
            V = self.dims.mask_ne(self.V, x, guess)
        if V == 0:
            raise ProtocolError(f"feedback at instance {x} leaves no consistent hypothesis")
        self.V = V


def bsoa_step(dims: SubclassDims, V: int, x: int) -> tuple[int, list[int]]:
    """Lowest label minimizing BL-Dim of {f in V : f(x) != y}, with all k scores."""
    if V == 0:
        raise ProtocolError("empty version space: the oracle is inconsistent with the class")
    scores = [dims.bldim(dims.mask_ne(V, x, y)) for y in range(dims.H.k)]
    best = min(scores)
    if best >= dims.bldim(V):
        raise InvariantError("no guess lowers the bandit-Littlestone dimension")
    return scores.index(best), scores


class BSOA(BanditVersionSpaceLearner):
    """Bandit SOA. With ``filter_correct`` a correct guess also keeps only f(x) = guess."""

    name = "bsoa"

    def predict(self, x: int) -> int:
        return bsoa_step(self.dims, self.V, x)[0]


class ConstantGuesser(BanditVersionSpaceLearner):
    name = "constant"

    def __init__(self, H, dims=None, label: int = 0, **kw):
        super().__init__(H, dims, **kw)
        self.label = label

    def predict(self, x: int) -> int:
        return self.label


class MajorityGuesser(BanditVersionSpaceLearner):
    name = "majority"

    def predict(self, x: int) -> int:
        counts = [self.dims.mask_eq(self.V, x, y).bit_count() for y in range(self.H.k)]
        return counts.index(max(counts))


class FirstConsistentGuesser(BanditVersionSpaceLearner):
    name = "first-consistent"

    def predict(self, x: int) -> int:
        first = (self.V & -self.V).bit_length() - 1
        return int(self.H.table[first, x])


BANDIT_LEARNERS = {cls.name: cls for cls in (BSOA, ConstantGuesser, MajorityGuesser, FirstConsistentGuesser)}


def _check_guess(H: HypothesisClass, g, t: int) -> int:
    if not isinstance(g, (int, np.integer)) or not 0 <= g < H.k:
        raise ProtocolError(f"round {t}: learner guessed {g!r} outside [0, {H.k})")
    return int(g)


def run_bandit(H: HypothesisClass, learner, oracle) -> BanditTranscript:
    transcript = BanditTranscript(getattr(learner, "name", type(learner).__name__))
    for t, x in enumerate(oracle.instances):
        g = _check_guess(H, learner.predict(x), t)
        correct = bool(oracle.query(t, g))
        transcript.record(x, g, correct)
        learner.update(x, g, correct)
    return transcript


def bsoa_run(H: HypothesisClass, oracle, *, filter_correct: bool = True,
             dims: SubclassDims | None = None) -> BanditTranscript:
    """Run BSOA against an oracle; at most BL-Dim(H) mistakes when the oracle is realizable."""
    return run_bandit(H, BSOA(H, dims, filter_correct=filter_correct), oracle)


@dataclass
class BanditAdversaryResult:
    transcript: BanditTranscript
    hypothesis: int  # a hypothesis differing from every guess

    @property
    def mistakes(self) -> int:
        return self.transcript.mistakes


def bandit_adversary(H: HypothesisClass, learner, tree: ShatteredTree | None = None) -> BanditAdversaryResult:
    """Walk a BL-shattered tree answering "wrong" to every guess and following the guessed edge.

    ``learner`` is a bandit learner object or a plain callable ``x -> guess``.
    """
    if tree is None:
        tree = bandit_littlestone_dim(H)[1]
    elif tree.kind != "bandit" or not tree.verify(H):
        raise ValueError("tree is not a valid bandit-Littlestone tree for this class")
    if hasattr(learner, "predict"):
        predict, update, name = learner.predict, getattr(learner, "update", None), getattr(learner, "name", "callback")
    else:
        predict, update, name = learner, None, getattr(learner, "__name__", "callback")
    transcript = BanditTranscript(name)
    alive = np.ones(len(H), dtype=bool)
    node = tree.root
    for t in range(tree.depth):
        x = node.instance
        g = _check_guess(H, predict(x), t)
        transcript.record(x, g, False)
        alive &= H.table[:, x] != g
        if update is not None:
            update(x, g, False)
        node = node.children[g]
    hits = np.flatnonzero(alive)
    if len(hits) == 0:
        raise InvariantError("no hypothesis avoids every guessed label")
    return BanditAdversaryResult(transcript, int(hits[0]))


def max_bsoa_mistakes(H: HypothesisClass, horizon: int, *, filter_correct: bool = True,
                      dims: SubclassDims | None = None) -> int:
    """Worst case of BSOA over every realizable deterministic oracle and horizon <= ``horizon``.

    The oracle may pick instances and feedback adaptively as long as some
    hypothesis stays consistent, which covers every hidden labeling.
    """
    dims = dims or SubclassDims(H)
    memo: dict = {}

    def worst(V: int, C: int, left: int) -> int:
        # V: learner's version space; C: hypotheses consistent with all feedback
        if left == 0:
            return 0
        key = (V, C, left)
        if key in memo:
            return memo[key]
        best = 0
        for x in range(H.d):
            g = bsoa_step(dims, V, x)[0]
            hit = dims.mask_eq(C, x, g)
            if hit:
                best = max(best, worst(dims.mask_eq(V, x, g) if filter_correct else V, hit, left - 1))
            miss = dims.mask_ne(C, x, g)
            if miss:
                best = max(best, 1 + worst(dims.mask_ne(V, x, g), miss, left - 1))
        memo[key] = best
        return best

    return worst(dims.full, dims.full, horizon)


# -- batch reduction -------------------------------------------------------------------

class BatchOracle:
    """Hidden labels for a batch of instances; ``query(i, guess)`` says whether guess i is right."""

    def __init__(self, labels):
        self.labels = np.asarray(labels, dtype=np.int64)

    def query(self, i: int, guess: int) -> bool:
        return bool(self.labels[i] == guess)


@dataclass
class BatchResult:
    fit: ErmFit
    sample: np.ndarray  # confirmed (x, y) pairs, shape (n, 2)
    guesses: np.ndarray

    @property
    def index(self) -> int:
        return self.fit.index


def bandit_batch_learner(H: HypothesisClass, instances, oracle, erm: ErmPolicy, seed: int = 0) -> BatchResult:
    """Guess a uniform label per instance, keep the confirmed pairs, run a full-information ERM on them."""
    xs = np.asarray(instances, dtype=np.int64)
    guesses = make_rng(seed, 0xBA).integers(0, H.k, size=len(xs))
    keep = np.array([oracle.query(i, int(g)) for i, g in enumerate(guesses.tolist())], dtype=bool)
    sample = np.stack([xs[keep], guesses[keep]], axis=1) if len(xs) else np.zeros((0, 2), dtype=np.int64)
    return BatchResult(erm.fit(H, sample), sample, guesses)


def batch_sample_size(k: int, m_full: int, delta: float) -> int:
    """Bandit sample size 3 k m_f + (3/2) ln(2/delta), rounded up; m_f is the full-information size at delta/2."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return math.ceil(3 * k * m_full + 1.5 * math.log(2 / delta))


@dataclass(frozen=True)
class PbiReport:
    bl_dim: int
    l_dim: int
    ratio: float | None  # None when L-Dim = 0
    reference_bound: float  # 4 k log2 k

    def to_json(self) -> dict:
        return asdict(self)


def online_pbi(H: HypothesisClass, dims: SubclassDims | None = None) -> PbiReport:
    """Online price of bandit information BL-Dim / L-Dim."""
    dims = dims or SubclassDims(H)
    bl = bandit_littlestone_dim(H, dims)[0]
    ld = littlestone_dim(H, dims)[0]
    return PbiReport(bl, ld, bl / ld if ld else None, pbi_upper_bound(H.k))
