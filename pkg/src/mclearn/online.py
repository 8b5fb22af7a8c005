"""Full-information online learning: SOA, the tree adversary, and experts.

A deterministic learner is any object with ``predict(x) -> label`` and
``update(x, label)``. Version spaces are bitsets over the canonical
hypothesis order and dimension values come from a shared
:class:`~mclearn.dimensions.SubclassDims` memo.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .dimensions import ShatteredTree, SubclassDims, littlestone_dim
from .errors import BudgetError, InvariantError, ProtocolError, get_budget
from .hypothesis import HypothesisClass
from .streams import make_rng


# -- transcripts --------------------------------------------------------------------------

@dataclass(frozen=True)
class Round:
    t: int
    x: int
    prediction: int
    label: int
    mistake: bool


@dataclass
class OnlineTranscript:
    learner: str
    rounds: list[Round] = field(default_factory=list)
    seed: int | None = None

    @property
    def mistakes(self) -> int:
        return sum(r.mistake for r in self.rounds)

    @property
    def sequence(self) -> list[tuple[int, int]]:
        return [(r.x, r.label) for r in self.rounds]

    def record(self, x: int, prediction: int, label: int) -> None:
        self.rounds.append(Round(len(self.rounds), int(x), int(prediction), int(label),
                                 int(prediction) != int(label)))

    def to_jsonl(self) -> str:
        return "".join(json.dumps(asdict(r), sort_keys=True) + "\n" for r in self.rounds)

    def to_json(self) -> dict:
        return {"learner": self.learner, "seed": self.seed, "mistakes": self.mistakes,
                "rounds": [asdict(r) for r in self.rounds]}


def write_jsonl(transcript: OnlineTranscript, path) -> None:
    Path(path).write_text(transcript.to_jsonl())


def read_sequence(path) -> list[tuple[int, int]]:
    """(instance, label) pairs from a JSONL transcript, in round order."""
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            out.append((int(row["x"]), int(row["label"])))
        except (ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"{path}:{lineno}: bad transcript line ({exc})") from None
    return out


# -- version-space learners ------------------------------------------------------------

class VersionSpaceLearner:
    """Base for deterministic learners that keep the consistent subclass as a bitset."""

    name = "version-space"

    def __init__(self, H: HypothesisClass, dims: SubclassDims | None = None):
        self.H = H
        self.dims = dims or SubclassDims(H)
        self.V = self.dims.full

    def reset(self) -> None:
        self.V = self.dims.full

    def update(self, x: int, y: int) -> None:
        V = self.dims.mask_eq(self.V, x, y)
        if V == 0:
            raise ProtocolError(f"label {y} at instance {x} is inconsistent with every remaining hypothesis")
        self.V = V

    def alive(self) -> list[int]:
        return [i for i in range(len(self.H)) if self.V >> i & 1]


def soa_step(dims: SubclassDims, V: int, x: int) -> tuple[int, dict[int, tuple[int, int]]]:
    """SOA prediction at ``x``: the lowest label maximizing L-Dim of {f in V : f(x) = y}.

    Returns the prediction and ``{y: (subclass bitset, its L-Dim)}`` for all
    labels, with empty subclasses scored -1.
    """
    if V == 0:
        raise ProtocolError("empty version space: the feed is not realizable by the class")
    parts = {}
    for y in range(dims.H.k):
        sub = dims.mask_eq(V, x, y)
        parts[y] = (sub, dims.ldim(sub))
    scores = [parts[y][1] for y in range(dims.H.k)]
    best = max(scores)
    if best == dims.ldim(V) and scores.count(best) > 1:
        raise InvariantError("two labels keep the full Littlestone dimension")
    return scores.index(best), parts


class SOA(VersionSpaceLearner):
    name = "soa"

    def predict(self, x: int) -> int:
        return soa_step(self.dims, self.V, x)[0]


class ConstantLearner(VersionSpaceLearner):
    """Always predicts the same label."""

    name = "constant"

    def __init__(self, H, dims=None, label: int = 0):
        super().__init__(H, dims)
        self.label = label

    def predict(self, x: int) -> int:
        return self.label


class MajorityLearner(VersionSpaceLearner):
    """Predicts the label most hypotheses in the version space give (lowest on ties)."""

    name = "majority"

    def predict(self, x: int) -> int:
        counts = [self.dims.mask_eq(self.V, x, y).bit_count() for y in range(self.H.k)]
        return counts.index(max(counts))


class FirstConsistentLearner(VersionSpaceLearner):
    """Predicts with the canonically first hypothesis still consistent."""

    name = "first-consistent"

    def predict(self, x: int) -> int:
        first = (self.V & -self.V).bit_length() - 1
        return int(self.H.table[first, x])


LEARNERS = {cls.name: cls for cls in (SOA, ConstantLearner, MajorityLearner, FirstConsistentLearner)}


def _check_label(H: HypothesisClass, y, t: int) -> int:
    if not isinstance(y, (int, np.integer)) or not 0 <= y < H.k:
        raise ProtocolError(f"round {t}: learner emitted label {y!r} outside [0, {H.k})")
    return int(y)


def check_realizable(H: HypothesisClass, sequence) -> None:
    """ProtocolError naming the first round after which no hypothesis fits."""
    alive = np.ones(len(H), dtype=bool)
    for t, (x, y) in enumerate(sequence):
        if not 0 <= x < H.d:
            raise ProtocolError(f"round {t}: instance {x} outside [0, {H.d})")
        alive &= H.table[:, x] == y
        if not alive.any():
            raise ProtocolError(f"round {t}: sequence is not realizable by the class (x={x}, y={y})")


def run_online(H: HypothesisClass, learner, sequence) -> OnlineTranscript:
    """Feed a fixed sequence to a deterministic learner."""
    check_realizable(H, sequence)
    transcript = OnlineTranscript(getattr(learner, "name", type(learner).__name__))
    for t, (x, y) in enumerate(sequence):
        pred = _check_label(H, learner.predict(x), t)
        transcript.record(x, pred, y)
        learner.update(x, y)
    return transcript


def soa_run(H: HypothesisClass, sequence, dims: SubclassDims | None = None) -> OnlineTranscript:
    """Run SOA on a realizable sequence; it makes at most L-Dim(H) mistakes."""
    return run_online(H, SOA(H, dims), sequence)


@dataclass
class AdversaryResult:
    transcript: OnlineTranscript
    hypothesis: int  # index of a hypothesis consistent with every answer

    @property
    def mistakes(self) -> int:
        return self.transcript.mistakes

    @property
    def sequence(self) -> list[tuple[int, int]]:
        return self.transcript.sequence


def _as_learner(learner):
    if hasattr(learner, "predict"):
        return learner.predict, getattr(learner, "update", None), getattr(learner, "name", "callback")
    return learner, None, getattr(learner, "__name__", "callback")


def realizable_adversary(H: HypothesisClass, learner, tree: ShatteredTree | None = None) -> AdversaryResult:
    """Walk a Littlestone tree, always answering with an edge label the learner did not predict.

    ``learner`` is a learner object or a plain callable ``x -> label``. Every
    round is a mistake, so a deterministic learner errs ``tree.depth`` times.
    """
    if tree is None:
        tree = littlestone_dim(H)[1]
    elif not tree.verify(H):
        raise ValueError("tree is not a valid Littlestone tree for this class")
    predict, update, name = _as_learner(learner)
    transcript = OnlineTranscript(name)
    alive = np.ones(len(H), dtype=bool)
    node = tree.root
    for t in range(tree.depth):
        x = node.instance
        pred = _check_label(H, predict(x), t)
        answer = min(y for y in node.children if y != pred)
        transcript.record(x, pred, answer)
        alive &= H.table[:, x] == answer
        if update is not None:
            update(x, answer)
        node = node.children[answer]
    hits = np.flatnonzero(alive)
    if len(hits) == 0:
        raise InvariantError("no hypothesis is consistent with the forced sequence")
    return AdversaryResult(transcript, int(hits[0]))


def max_soa_mistakes(H: HypothesisClass, horizon: int, dims: SubclassDims | None = None) -> int:
    """Largest number of SOA mistakes over all realizable sequences of length <= horizon.

    Exact: SOA is deterministic, so its state after any prefix is the version
    space, and the maximum over continuations depends only on (V, rounds left).
    """
    dims = dims or SubclassDims(H)
    memo: dict = {}

    def worst(V: int, left: int) -> int:
        if left == 0:
            return 0
        key = (V, left)
        if key in memo:
            return memo[key]
        best = 0
        for x in range(H.d):
            pred, parts = soa_step(dims, V, x)
            for y, (sub, _) in parts.items():
                if sub:
                    best = max(best, (y != pred) + worst(sub, left - 1))
        memo[key] = best
        return best

    return worst(dims.full, horizon)


# -- experts and LEA -------------------------------------------------------------------

@dataclass(frozen=True)
class Expert:
    """A hypothesis expert, or an SOA imitator that deviates at rounds ``A`` with labels ``phi``."""

    kind: str
    A: tuple[int, ...] = ()
    phi: tuple[int, ...] = ()
    index: int | None = None

    def predictions(self, H: HypothesisClass, xs, dims: SubclassDims | None = None) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        if self.kind == "hypothesis":
            return H.table[self.index, xs]
        dims = dims or SubclassDims(H)
        return np.array(_imitate(dims, tuple(xs.tolist()), dict(zip(self.A, self.phi))), dtype=np.int64)


def _imitate(dims: SubclassDims, xs: tuple[int, ...], override: dict[int, int]) -> list[int]:
    # Run SOA, treating its own prediction as the truth except at rounds in
    # `override`, where the given label is both predicted and fed back.
    V = dims.full
    out = []
    for t, x in enumerate(xs):
        y = override.get(t)
        if y is None:
            y = soa_step(dims, V, x)[0] if V else 0
        out.append(y)
        V = dims.mask_eq(V, x, y)
    return out


def expert_count(T: int, k: int, ldim: int) -> int:
    return sum(math.comb(T, j) * k**j for j in range(ldim + 1))


def build_agnostic_experts(H: HypothesisClass, T: int, ldim: int | None = None) -> list[Expert]:
    """All SOA imitators with |A| <= L-Dim(H); there are sum_j C(T, j) k^j of them."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if ldim is None:
        ldim = littlestone_dim(H)[0]
    n = expert_count(T, H.k, ldim)
    limit = get_budget().experts
    if n > limit:
        raise BudgetError("agnostic online experts", n, limit)
    experts = []
    for j in range(ldim + 1):
        for A in itertools.combinations(range(T), j):
            for phi in itertools.product(range(H.k), repeat=j):
                experts.append(Expert("soa-imitator", A, phi))
    return experts


def expert_advice(H: HypothesisClass, experts, xs, dims: SubclassDims | None = None) -> np.ndarray:
    """``(N, T)`` table of expert predictions on the instance sequence ``xs``."""
    dims = dims or SubclassDims(H)
    return np.array([e.predictions(H, xs, dims) for e in experts], dtype=np.int64).reshape(len(experts), len(xs))


def lea_weights(losses, eta: float) -> np.ndarray:
    """Exponential-weights distribution over cumulative losses (shift invariant)."""
    losses = np.asarray(losses, dtype=np.float64)
    w = np.exp(-eta * (losses - losses.min()))
    return w / w.sum()


@dataclass
class LeaResult:
    transcript: OnlineTranscript
    expected_loss: float
    expert_losses: np.ndarray
    eta: float

    @property
    def loss(self) -> int:
        return self.transcript.mistakes

    @property
    def best_expert_loss(self) -> int:
        return int(self.expert_losses.min())

    @property
    def bound(self) -> float:
        """min_i L_i + sqrt(ln(N) T / 2)."""
        N, T = len(self.expert_losses), len(self.transcript.rounds)
        return self.best_expert_loss + math.sqrt(0.5 * math.log(N) * T)


def lea_run(advice, labels, seed: int = 0, T: int | None = None, xs=None) -> LeaResult:
    """Learning with expert advice against a fixed label sequence.

    ``advice[i, t]`` is expert i's prediction at round t. Each round an expert
    is drawn with probability proportional to exp(-eta * its past loss), with
    eta = sqrt(8 ln(N) / T), and its advice is played. ``xs`` only labels
    the transcript rounds.
    """
    advice = np.asarray(advice, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    N, rounds = advice.shape
    if N < 1:
        raise ValueError("need at least one expert")
    T = rounds if T is None else T
    if T < 1 or rounds > T:
        raise ValueError("need 1 <= rounds <= T")
    eta = math.sqrt(8 * math.log(N) / T)
    rng = make_rng(seed, 0x1EA)
    losses = np.zeros(N)
    wrong = advice != labels[None, :]
    expected = 0.0
    xs = [-1] * rounds if xs is None else [int(x) for x in xs]
    transcript = OnlineTranscript("lea", seed=seed)
    for t in range(rounds):
        p = lea_weights(losses, eta)
        expected += float(p @ wrong[:, t])
        i = int(rng.choice(N, p=p))
        transcript.record(xs[t], advice[i, t], labels[t])
        losses += wrong[:, t]
    return LeaResult(transcript, expected, losses.astype(np.int64), eta)


@dataclass
class AgnosticReport:
    lea: LeaResult
    min_hypothesis_loss: int
    ldim: int
    bound: float

    @property
    def loss(self) -> int:
        return self.lea.loss

    @property
    def expected_loss(self) -> float:
        return self.lea.expected_loss

    @property
    def regret(self) -> int:
        return self.loss - self.min_hypothesis_loss


def regret_bound(min_loss: int, ldim: int, T: int, k: int) -> float:
    """min_f L_f + sqrt(L-Dim * T * ln(T k) / 2)."""
    return min_loss + math.sqrt(0.5 * ldim * T * math.log(T * k))


def agnostic_online_run(H: HypothesisClass, sequence, seed: int = 0, *, advice=None,
                        ldim: int | None = None) -> AgnosticReport:
    """LEA over SOA imitators on an arbitrary (possibly unrealizable) sequence.

    ``advice`` may be passed in to reuse the expert table across seeds; it
    depends only on the instance sequence.
    """
    xs = np.array([x for x, _ in sequence], dtype=np.int64)
    ys = np.array([y for _, y in sequence], dtype=np.int64)
    T = len(xs)
    if T < 1:
        raise ValueError("sequence must have at least one round")
    if ldim is None:
        ldim = littlestone_dim(H)[0]
    if advice is None:
        advice = expert_advice(H, build_agnostic_experts(H, T, ldim), xs)
    lea = lea_run(advice, ys, seed, xs=xs)
    min_loss = int((H.table[:, xs] != ys).sum(axis=1).min())
    return AgnosticReport(lea, min_loss, ldim, regret_bound(min_loss, ldim, T, H.k))
