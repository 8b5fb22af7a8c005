"""Finite multiclass hypothesis classes.

A class over ``d`` instances and ``k`` labels is stored as an integer table of
shape ``(n, d)``: row ``i`` is the value table of the ``i``-th hypothesis.
Rows are unique and sorted lexicographically, so two classes are equal iff
their tables are equal.
"""

from __future__ import annotations

import itertools
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetError, get_budget


class FormatError(ValueError):
    """Malformed HCLASS file."""


def _canonical(table: np.ndarray) -> np.ndarray:
    table = np.unique(np.asarray(table, dtype=np.int64), axis=0)
    table.setflags(write=False)
    return table


class HypothesisClass:
    """Deduplicated, lexicographically sorted set of total functions [d] -> [k].

    ``sentinel`` marks a distinguished label (the ``*`` label of the Cantor
    class); learners that restrict themselves to observed labels may always
    use it.
    """

    __slots__ = ("d", "k", "table", "sentinel", "_index")

    def __init__(self, table, k: int, *, sentinel: int | None = None):
        table = np.asarray(table, dtype=np.int64)
        if table.ndim != 2 or table.shape[0] < 1 or table.shape[1] < 1:
            raise ValueError("a hypothesis class needs at least one hypothesis over at least one instance")
        if k < 1:
            raise ValueError("k must be >= 1")
        if table.min() < 0 or table.max() >= k:
            raise ValueError(f"labels must lie in [0, {k})")
        self.table = _canonical(table)
        self.d = int(self.table.shape[1])
        self.k = int(k)
        self.sentinel = sentinel
        self._index = None

    def __len__(self) -> int:
        return self.table.shape[0]

    def __getitem__(self, i) -> np.ndarray:
        return self.table[i]

    def __iter__(self):
        return iter(self.table)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HypothesisClass):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.table, other.table)

    def __hash__(self) -> int:
        return hash((self.k, self.table.shape, self.table.tobytes()))

    def __repr__(self) -> str:
        return f"HypothesisClass(d={self.d}, k={self.k}, n={len(self)})"

    def index_of(self, h) -> int:
        """Position of hypothesis ``h`` in canonical order (KeyError if absent)."""
        if self._index is None:
            self._index = {tuple(row): i for i, row in enumerate(self.table.tolist())}
        return self._index[tuple(int(v) for v in h)]

    def __contains__(self, h) -> bool:
        try:
            self.index_of(h)
        except KeyError:
            return False
        return True

    def ranges(self) -> list[frozenset]:
        return [frozenset(row) for row in self.table.tolist()]

    def with_table(self, table) -> "HypothesisClass":
        return HypothesisClass(table, self.k, sentinel=self.sentinel)


def _check_size(n: int, what: str) -> None:
    limit = get_budget().hypotheses
    if n > limit:
        raise BudgetError(what, n, limit)


def build_full_class(d: int, k: int) -> HypothesisClass:
    """All ``k**d`` functions from ``d`` instances to ``k`` labels."""
    if d < 1 or k < 1:
        raise ValueError("d and k must be >= 1")
    _check_size(k**d, f"full class [{k}]^[{d}]")
    grids = np.indices((k,) * d).reshape(d, -1).T
    return HypothesisClass(grids, k)


def build_cantor_class(d: int) -> HypothesisClass:
    """Class of f_A for every subset A of [d]: f_A(x) = A if x in A else *.

    The label of a subset is its bitmask; ``*`` is label ``2**d``.
    """
    if not 1 <= d <= 16:
        raise BudgetError("cantor class domain size", d, 16)
    star = 1 << d
    masks = np.arange(star, dtype=np.int64)
    member = (masks[:, None] >> np.arange(d)) & 1
    table = np.where(member == 1, masks[:, None], star)
    return HypothesisClass(table, star + 1, sentinel=star)


def cantor_hypothesis(d: int, subset: Iterable[int]) -> np.ndarray:
    """Table of f_A for the given subset A of [d]."""
    subset = set(subset)
    mask = sum(1 << x for x in subset)
    return np.array([mask if x in subset else 1 << d for x in range(d)], dtype=np.int64)


def build_constant_class(k: int, d: int = 1, labels: Sequence[int] | None = None) -> HypothesisClass:
    """Constant functions over ``d`` instances, one per label in ``labels`` (default all of [k])."""
    labels = range(k) if labels is None else labels
    table = np.array([[y] * d for y in labels], dtype=np.int64)
    return HypothesisClass(table, k)


def restrict(H: HypothesisClass, S: Iterable[int]) -> HypothesisClass:
    """H|_S, re-indexed to ``len(S)`` positions in ascending original order."""
    S = sorted(set(int(x) for x in S))
    if not S:
        raise ValueError("restriction to an empty instance set")
    if S[0] < 0 or S[-1] >= H.d:
        raise ValueError(f"instances must lie in [0, {H.d})")
    return HypothesisClass(H.table[:, S], H.k, sentinel=H.sentinel)


def symmetrize(H: HypothesisClass) -> HypothesisClass:
    """Closure of H under all k! label permutations."""
    n_perm = math.factorial(H.k)
    _check_size(n_perm * len(H), "symmetrization")
    parts = [np.asarray(p, dtype=np.int64)[H.table] for p in itertools.permutations(range(H.k))]
    return HypothesisClass(np.concatenate(parts), H.k)


def is_symmetric(H: HypothesisClass) -> bool:
    # Adjacent transpositions generate S_k, so closure under them suffices.
    for a in range(H.k - 1):
        perm = np.arange(H.k)
        perm[a], perm[a + 1] = a + 1, a
        if not np.array_equal(_canonical(perm[H.table]), H.table):
            return False
    return True


def relabel(H: HypothesisClass, perm: Sequence[int]) -> HypothesisClass:
    """phi o H for a label bijection given as ``perm[y] = phi(y)``."""
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(H.k)):
        raise ValueError("perm must be a permutation of range(k)")
    return HypothesisClass(perm[H.table], H.k)


# -- HCLASS v1 ------------------------------------------------------------------

def dumps_hclass(H: HypothesisClass) -> str:
    lines = [f"{H.d} {H.k} {len(H)}"]
    lines += [" ".join(str(v) for v in row) for row in H.table.tolist()]
    return "\n".join(lines) + "\n"


def loads_hclass(text: str) -> HypothesisClass:
    lines = text.splitlines()
    if not lines:
        raise FormatError("line 1: empty file, expected header 'd k n'")
    try:
        d, k, n = (int(t) for t in lines[0].split())
    except ValueError:
        raise FormatError(f"line 1: expected header 'd k n', got {lines[0]!r}") from None
    if d < 1 or k < 1 or n < 1:
        raise FormatError("line 1: d, k and n must all be positive")
    body = [ln for ln in lines[1:]]
    while body and not body[-1].strip():
        body.pop()
    if len(body) != n:
        raise FormatError(f"line {len(body) + 2}: expected {n} hypothesis lines, found {len(body)}")
    rows = []
    for lineno, ln in enumerate(body, start=2):
        try:
            row = [int(t) for t in ln.split()]
        except ValueError:
            raise FormatError(f"line {lineno}: non-integer label in {ln!r}") from None
        if len(row) != d:
            raise FormatError(f"line {lineno}: expected {d} labels, found {len(row)}")
        if any(y < 0 or y >= k for y in row):
            raise FormatError(f"line {lineno}: label out of range [0, {k})")
        rows.append(row)
    return HypothesisClass(rows, k)


def save_hclass(H: HypothesisClass, path) -> None:
    Path(path).write_text(dumps_hclass(H))


def load_hclass(path) -> HypothesisClass:
    return loads_hclass(Path(path).read_text())
