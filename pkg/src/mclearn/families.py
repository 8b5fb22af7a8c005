"""Enumerating small hypothesis classes up to isomorphism.

All four dimensions are unchanged when instances are permuted and when the
labels at each instance are renamed independently. Enumerating one class per
orbit of that group is what makes "every subclass of [3]^[3] with at most 8
hypotheses" (about 3 million sets, a few thousand orbits) tractable.
"""

from __future__ import annotations

import itertools
from typing import Iterator

import numpy as np

from .hypothesis import HypothesisClass


def _points(d: int, k: int) -> np.ndarray:
    """All functions [d] -> [k] as rows, in lexicographic order (row i <-> index i)."""
    return np.indices((k,) * d).reshape(d, -1).T


def isomorphism_group(d: int, k: int) -> np.ndarray:
    """Permutations of the k**d functions induced by instance and per-instance label permutations.

    Returns an array ``G`` of shape ``(|group|, k**d)`` where ``G[g, i]`` is the
    image of function ``i``.
    """
    pts = _points(d, k)
    weights = k ** np.arange(d - 1, -1, -1)
    label_perms = np.array(list(itertools.permutations(range(k))))
    images = []
    for pi in itertools.permutations(range(d)):
        for sigmas in itertools.product(range(len(label_perms)), repeat=d):
            moved = np.empty_like(pts)
            for x in range(d):
                moved[:, pi[x]] = label_perms[sigmas[x]][pts[:, x]]
            images.append(moved @ weights)
    return np.unique(np.array(images), axis=0)


def _canon(G: np.ndarray, members: tuple[int, ...]) -> tuple[int, ...]:
    imgs = np.sort(G[:, list(members)], axis=1)
    order = np.lexsort(imgs.T[::-1])
    return tuple(imgs[order[0]].tolist())


def orbit_representatives(d: int, k: int, max_size: int) -> dict[int, list[tuple[int, ...]]]:
    """Canonical index sets, one per orbit, for every class size 1..max_size."""
    G = isomorphism_group(d, k)
    n = k**d
    levels = {1: sorted({_canon(G, (p,)) for p in range(n)})}
    for size in range(2, min(max_size, n) + 1):
        seen = set()
        for rep in levels[size - 1]:
            have = set(rep)
            for p in range(n):
                if p not in have:
                    seen.add(_canon(G, tuple(sorted(have | {p}))))
        levels[size] = sorted(seen)
    return levels


def iter_small_classes(d: int, k: int, max_size: int) -> Iterator[HypothesisClass]:
    """One class per isomorphism orbit among subclasses of [k]^[d] with at most max_size members."""
    pts = _points(d, k)
    for reps in orbit_representatives(d, k, max_size).values():
        for rep in reps:
            yield HypothesisClass(pts[list(rep)], k)


def iter_all_subclasses(d: int, k: int, max_size: int) -> Iterator[HypothesisClass]:
    """Every (not merely every non-isomorphic) subclass of [k]^[d] up to max_size members."""
    pts = _points(d, k)
    n = len(pts)
    for size in range(1, min(max_size, n) + 1):
        for rep in itertools.combinations(range(n), size):
            yield HypothesisClass(pts[list(rep)], k)


def random_classes(d: int, k: int, count: int, rng: np.random.Generator,
                   min_size: int = 1, max_size: int | None = None) -> list[HypothesisClass]:
    pts = _points(d, k)
    n = len(pts)
    max_size = n if max_size is None else min(max_size, n)
    out = []
    for _ in range(count):
        size = int(rng.integers(min_size, max_size + 1))
        chosen = np.sort(rng.choice(n, size=size, replace=False))
        out.append(HypothesisClass(pts[chosen], k))
    return out
