"""Exact combinatorial dimensions of finite hypothesis classes.

Natarajan and graph dimensions are found by subset enumeration with
candidate witness functions drawn from H|_S. The two tree dimensions use
max/min recursions over subclasses, memoized on membership bitsets (Python
ints, bit ``i`` = hypothesis ``i`` in canonical order).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, InvariantError, get_budget
from .hypothesis import HypothesisClass


# -- witnesses --------------------------------------------------------------------

@dataclass(frozen=True)
class NShatterWitness:
    set: tuple[int, ...]
    f1: tuple[int, ...]
    f2: tuple[int, ...]

    def verify(self, H: HypothesisClass) -> bool:
        s = len(self.set)
        if len(self.f1) != s or len(self.f2) != s:
            return False
        if any(a == b for a, b in zip(self.f1, self.f2)):
            return False
        rows = {tuple(r) for r in H.table[:, list(self.set)].tolist()} if s else {()}
        for bits in itertools.product((0, 1), repeat=s):
            g = tuple(a if b else c for a, b, c in zip(self.f1, bits, self.f2))
            if g not in rows:
                return False
        return True

    def to_json(self) -> dict:
        return {"set": list(self.set), "f1": list(self.f1), "f2": list(self.f2)}


@dataclass(frozen=True)
class GShatterWitness:
    set: tuple[int, ...]
    f: tuple[int, ...]

    def verify(self, H: HypothesisClass) -> bool:
        s = len(self.set)
        if len(self.f) != s:
            return False
        if s == 0:
            return True
        agree = H.table[:, list(self.set)] == np.asarray(self.f)
        patterns = {tuple(r) for r in agree.tolist()}
        return all(p in patterns for p in itertools.product((False, True), repeat=s))

    def to_json(self) -> dict:
        return {"set": list(self.set), "f": list(self.f)}


@dataclass(eq=False)
class TreeNode:
    instance: int
    children: dict = field(default_factory=dict)  # label -> TreeNode | None (None is a leaf)


@dataclass
class ShatteredTree:
    """Complete instance-labelled tree; ``kind`` is "littlestone" (binary) or "bandit" (k-ary).

    Subtrees may be shared between siblings, so the structure is a DAG.
    """

    kind: str
    depth: int
    root: TreeNode | None
    k: int

    @property
    def arity(self) -> int:
        return 2 if self.kind == "littlestone" else self.k

    def verify(self, H: HypothesisClass) -> bool:
        """Re-check completeness and the path condition against the raw table."""
        table = H.table
        cache: dict = {}

        def ok(node, alive: np.ndarray, depth: int) -> bool:
            if depth == 0:
                return node is None and bool(alive.any())
            if node is None:
                return False
            key = (id(node), depth, alive.tobytes())
            if key in cache:
                return cache[key]
            labels = sorted(node.children)
            if len(labels) != self.arity or labels[0] < 0 or labels[-1] >= H.k:
                result = False
            else:
                col = table[:, node.instance]
                result = True
                for y in labels:
                    mask = col == y if self.kind == "littlestone" else col != y
                    if not ok(node.children[y], alive & mask, depth - 1):
                        result = False
                        break
            cache[key] = result
            return result

        return ok(self.root, np.ones(len(H), dtype=bool), self.depth)

    def paths(self):
        """Yield every root-to-leaf path as a list of (instance, edge label)."""
        def walk(node, depth, prefix):
            if depth == 0:
                yield list(prefix)
                return
            for y in sorted(node.children):
                prefix.append((node.instance, y))
                yield from walk(node.children[y], depth - 1, prefix)
                prefix.pop()

        yield from walk(self.root, self.depth, [])

    def to_json(self) -> dict:
        """Node table with shared subtrees listed once; edges map a label to a node id or null."""
        ids: dict[int, int] = {}
        nodes: list = []

        def enc(node):
            if node is None:
                return None
            if id(node) not in ids:
                entry = {"instance": node.instance, "children": {}}
                ids[id(node)] = len(nodes)
                nodes.append(entry)
                entry["children"] = {str(y): enc(node.children[y]) for y in sorted(node.children)}
            return ids[id(node)]

        root = enc(self.root)
        return {"kind": self.kind, "depth": self.depth, "root": root, "nodes": nodes}


# -- Natarajan / graph / VC ---------------------------------------------------------

def _check_domain(H: HypothesisClass) -> None:
    limit = get_budget().natarajan_domain
    if H.d > limit:
        raise BudgetError("subset enumeration domain size", H.d, limit)


def _restricted_rows(H: HypothesisClass, S) -> np.ndarray:
    return np.unique(H.table[:, list(S)], axis=0)


def _n_shatter(R: np.ndarray, s: int):
    if len(R) < 2**s:
        return None
    # per-column rank compression keeps the integer row codes small
    R = np.stack([np.unique(col, return_inverse=True)[1] for col in R.T], axis=1)
    base = int(R.max()) + 1
    if s * math.log2(base) > 62:
        return _n_shatter_slow(R, s)
    weights = base ** np.arange(s, dtype=np.int64)
    codes = np.sort(R @ weights)
    bits = np.array(list(itertools.product((1, 0), repeat=s)), dtype=bool)
    for i in range(len(R) - 1):
        f1 = R[i]
        others = R[i + 1:]
        others = others[np.all(others != f1, axis=1)]
        if not len(others):
            continue
        # mixes[j, t] = f1 where bits[t] else others[j]
        mixes = np.where(bits[None, :, :], f1[None, None, :], others[:, None, :])
        present = np.isin(mixes @ weights, codes).all(axis=1)
        hits = np.flatnonzero(present)
        if len(hits):
            return i, int(np.flatnonzero(np.all(R == others[hits[0]], axis=1))[0])
    return None


def _n_shatter_slow(R: np.ndarray, s: int):
    members = {tuple(r) for r in R.tolist()}
    rows = R.tolist()
    for i, f1 in enumerate(rows):
        for j in range(i + 1, len(rows)):
            f2 = rows[j]
            if any(a == b for a, b in zip(f1, f2)):
                continue
            if all(tuple(a if bit else b for a, b, bit in zip(f1, f2, bits)) in members
                   for bits in itertools.product((1, 0), repeat=s)):
                return i, j
    return None


def natarajan_dim(H: HypothesisClass) -> tuple[int, NShatterWitness]:
    """Largest N-shattered instance set, with a verified witness."""
    _check_domain(H)
    best = NShatterWitness((), (), ())
    for s in range(1, H.d + 1):
        found = None
        for S in itertools.combinations(range(H.d), s):
            R = _restricted_rows(H, S)
            pair = _n_shatter(R, s)
            if pair is not None:
                found = NShatterWitness(S, tuple(R[pair[0]].tolist()), tuple(R[pair[1]].tolist()))
                break
        if found is None:
            break  # N-shattering is downward closed
        best = found
    if not best.verify(H):
        raise InvariantError(f"Natarajan witness failed verification: {best}")
    return len(best.set), best


def _g_shatter(R: np.ndarray, s: int):
    if len(R) < 2**s:
        return None
    weights = 1 << np.arange(s, dtype=np.int64)
    chunk = max(1, 2**22 // (len(R) * s))
    for start in range(0, len(R), chunk):
        block = R[start:start + chunk]
        codes = np.sort((block[:, None, :] == R[None, :, :]) @ weights, axis=1)
        distinct = 1 + (np.diff(codes, axis=1) != 0).sum(axis=1)
        hits = np.flatnonzero(distinct == 2**s)
        if len(hits):
            return tuple(block[hits[0]].tolist())
    return None


def graph_dim(H: HypothesisClass) -> tuple[int, GShatterWitness]:
    """Largest G-shattered instance set, with a verified witness."""
    _check_domain(H)
    best = GShatterWitness((), ())
    for s in range(1, H.d + 1):
        found = None
        for S in itertools.combinations(range(H.d), s):
            f = _g_shatter(_restricted_rows(H, S), s)
            if f is not None:
                found = GShatterWitness(S, f)
                break
        if found is None:
            break
        best = found
    if not best.verify(H):
        raise InvariantError(f"graph witness failed verification: {best}")
    return len(best.set), best


def vc_dim(H: HypothesisClass) -> int:
    if H.k != 2:
        raise ValueError(f"VC dimension needs a binary class, got k={H.k}")
    _check_domain(H)
    dim = 0
    for s in range(1, H.d + 1):
        if not any(len(_restricted_rows(H, S)) == 2**s for S in itertools.combinations(range(H.d), s)):
            break
        dim = s
    return dim


# -- tree dimensions ------------------------------------------------------------------

class SubclassDims:
    """Memoized L-Dim / BL-Dim of subclasses of a fixed class, keyed by bitset.

    One instance can be shared by learners running over the same class.
    """

    def __init__(self, H: HypothesisClass):
        limit = get_budget().tree_class_size
        if len(H) > limit:
            raise BudgetError("tree-dimension class size", len(H), limit)
        self.H = H
        self.full = (1 << len(H)) - 1
        # eq[x][y]: bitset of hypotheses with f(x) = y
        self.eq = []
        self.labels_at = []
        for x in range(H.d):
            col = H.table[:, x].tolist()
            masks: dict[int, int] = {}
            for i, y in enumerate(col):
                masks[y] = masks.get(y, 0) | (1 << i)
            self.eq.append(masks)
            self.labels_at.append(sorted(masks))
        self._ld: dict[int, int] = {}
        self._bl: dict[int, int] = {}
        self._trees: dict = {}  # identical subproblems share one subtree
        self._memo_limit = get_budget().memo_entries

    def _store(self, memo: dict, key: int, value: int) -> None:
        if len(memo) >= self._memo_limit:
            raise BudgetError("tree-dimension memo entries", len(memo) + 1, self._memo_limit)
        memo[key] = value

    def split(self, mask: int, x: int) -> dict[int, int]:
        """Non-empty parts {y: {f in V : f(x) = y}}."""
        out = {}
        for y in self.labels_at[x]:
            part = mask & self.eq[x][y]
            if part:
                out[y] = part
        return out

    def mask_eq(self, mask: int, x: int, y: int) -> int:
        return mask & self.eq[x].get(y, 0)

    def mask_ne(self, mask: int, x: int, y: int) -> int:
        return mask & ~self.eq[x].get(y, 0)

    def ldim(self, mask: int) -> int:
        if mask == 0:
            return -1
        if mask & (mask - 1) == 0:
            return 0
        hit = self._ld.get(mask)
        if hit is not None:
            return hit
        upper = mask.bit_count().bit_length() - 1  # a depth-D tree needs 2^D functions
        best = 0
        for x in range(self.H.d):
            parts = list(self.split(mask, x).values())
            if len(parts) < 2:
                continue
            parts.sort(key=int.bit_count, reverse=True)
            first = second = -1
            for p in parts:
                if p.bit_count().bit_length() - 1 <= second:
                    break
                v = self.ldim(p)
                if v > first:
                    first, second = v, first
                elif v > second:
                    second = v
            best = max(best, 1 + second)
            if best >= upper:
                break
        self._store(self._ld, mask, best)
        return best

    def bldim(self, mask: int) -> int:
        if mask == 0:
            return -1
        if mask & (mask - 1) == 0:
            return 0
        hit = self._bl.get(mask)
        if hit is not None:
            return hit
        upper = mask.bit_count() - 1  # each used-label branch is a strict subclass
        best = 0
        for x in range(self.H.d):
            parts = self.split(mask, x)
            if len(parts) < 2:
                continue
            worst = upper
            for part in sorted(parts.values(), key=int.bit_count, reverse=True):
                worst = min(worst, self.bldim(mask & ~part))
                if 1 + worst <= best:
                    break
            best = max(best, 1 + worst)
            if best >= upper:
                break
        self._store(self._bl, mask, best)
        return best

    # witness trees

    def ldim_tree(self, mask: int, depth: int) -> TreeNode | None:
        if depth == 0:
            return None
        key = ("L", mask, depth)
        if key in self._trees:
            return self._trees[key]
        for x in range(self.H.d):
            parts = self.split(mask, x)
            ys = sorted(parts)
            for y1, y2 in itertools.combinations(ys, 2):
                if min(self.ldim(parts[y1]), self.ldim(parts[y2])) >= depth - 1:
                    node = TreeNode(x, {
                        y1: self.ldim_tree(parts[y1], depth - 1),
                        y2: self.ldim_tree(parts[y2], depth - 1),
                    })
                    self._trees[key] = node
                    return node
        raise InvariantError("no Littlestone split found at the claimed depth")

    def bldim_tree(self, mask: int, depth: int) -> TreeNode | None:
        if depth == 0:
            return None
        key = ("B", mask, depth)
        if key in self._trees:
            return self._trees[key]
        for x in range(self.H.d):
            parts = self.split(mask, x)
            if all(self.bldim(mask & ~p) >= depth - 1 for p in parts.values()):
                children = {y: self.bldim_tree(mask & ~p, depth - 1) for y, p in sorted(parts.items())}
                # unused labels keep the whole subclass; any used child subtree works there
                spare = children[min(children)]
                for y in range(self.H.k):
                    children.setdefault(y, spare)
                node = TreeNode(x, dict(sorted(children.items())))
                self._trees[key] = node
                return node
        raise InvariantError("no bandit-Littlestone split found at the claimed depth")


def littlestone_dim(H: HypothesisClass, dims: SubclassDims | None = None) -> tuple[int, ShatteredTree]:
    dims = dims or SubclassDims(H)
    depth = dims.ldim(dims.full)
    tree = ShatteredTree("littlestone", depth, dims.ldim_tree(dims.full, depth), H.k)
    if not tree.verify(H):
        raise InvariantError("Littlestone witness tree failed verification")
    return depth, tree


def bandit_littlestone_dim(H: HypothesisClass, dims: SubclassDims | None = None) -> tuple[int, ShatteredTree]:
    dims = dims or SubclassDims(H)
    depth = dims.bldim(dims.full)
    tree = ShatteredTree("bandit", depth, dims.bldim_tree(dims.full, depth), H.k)
    if not tree.verify(H):
        raise InvariantError("bandit-Littlestone witness tree failed verification")
    return depth, tree


# -- bound formulas -------------------------------------------------------------------

def natarajan_cardinality_bound(d: int, k: int, dN: int) -> int:
    """d**dN * k**(2 dN), an upper bound on |H| for a class of Natarajan dimension dN."""
    if d < 0 or k < 0 or dN < 0:
        raise ValueError("arguments must be non-negative")
    return d**dN * k ** (2 * dN)


def graph_natarajan_factor(k: int) -> int:
    """ceil(4.67 log2 k): the multiplier in d_G <= 4.67 log2(k) d_N."""
    return math.ceil(4.67 * math.log2(k)) if k >= 2 else 0


def pbi_upper_bound(k: int) -> float:
    """4 k log2 k, the reference bound on BL-Dim / L-Dim."""
    return 4 * k * math.log2(k)
