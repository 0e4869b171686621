"""Exact and randomized search for induced tree copies."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernel
from .graph import Embedding, Graph, Tree, is_induced_copy
from .rng import Seed, as_seed

COUNT_MAX_N = 12
MAXIMA_MAX_N = 16


class CapExceeded(ValueError):
    """An exact routine was asked for an instance above its size cap."""


class InvariantViolation(RuntimeError):
    """The search returned something that fails verification."""


class MaxFamily(str, enum.Enum):
    TREE = "tree"
    PATH = "path"
    MATCHING = "matching"


@dataclass(frozen=True)
class SearchBudget:
    max_backtrack_steps: int = 1_000_000
    max_restarts: int = 10
    seed: Seed = Seed(0)

    def __post_init__(self):
        if self.max_backtrack_steps < 1 or self.max_restarts < 1:
            raise ValueError("search budget limits must be at least 1")
        object.__setattr__(self, "seed", as_seed(self.seed))


@dataclass(frozen=True)
class SearchResult:
    embedding: Optional[Embedding]
    steps: int
    restarts: int
    exhausted: bool  # the whole search space was covered: absence is proven

    @property
    def found(self) -> bool:
        return self.embedding is not None


def _plan(tree: Tree):
    order, parent = tree.bfs_order()
    pos = {v: i for i, v in enumerate(order)}
    b = tree.b
    parent_pos = np.array([pos[parent[v]] if parent[v] >= 0 else -1 for v in order], dtype=np.int64)
    tdeg = np.array([tree.degree(v) for v in order], dtype=np.int64)
    orphans = np.zeros(b + 1, dtype=np.int64)
    for m in range(b + 1):
        orphans[m] = sum(1 for i in range(m, b) if parent_pos[i] >= m)
    return np.array(order, dtype=np.int64), parent_pos, tdeg, orphans


def _run(graph: Graph, tree: Tree, *, count_all, shuffle, seed, max_steps):
    if tree.b > graph.n:
        raise ValueError(f"tree has {tree.b} vertices, graph only {graph.n}")
    order, parent_pos, tdeg, orphans = _plan(tree)
    img = np.zeros(tree.b, dtype=np.int64)
    status, count, steps = _kernel.search(
        graph.words, graph.degrees, graph.n, order, parent_pos, tdeg, orphans,
        count_all, shuffle, np.uint64(seed), max_steps, img,
    )
    phi = None
    if status == _kernel.FOUND:
        phi = [0] * tree.b
        for i, v in enumerate(order):
            phi[v] = int(img[i])
        phi = tuple(phi)
    return int(status), int(count), int(steps), phi


def count_ordered_embeddings(graph: Graph, tree: Tree, *, force: bool = False) -> int:
    """Number of injections ``phi`` with ``is_induced_copy(graph, tree, phi)``."""
    if graph.n > COUNT_MAX_N and not force:
        raise CapExceeded(f"exact counting is capped at n <= {COUNT_MAX_N} (got {graph.n}); pass force=True")
    if tree.b > graph.n:
        return 0
    _, count, _, _ = _run(graph, tree, count_all=True, shuffle=False, seed=0, max_steps=2**62)
    return count


def search_induced_embedding(graph: Graph, tree: Tree, budget: SearchBudget | None = None) -> SearchResult:
    """Randomized restarts of the BFS-order backtracking search.

    Each restart draws its candidate orders from ``budget.seed.child(r)`` and may
    try at most ``max_backtrack_steps`` candidates.  Restarts stop early once a
    copy is found or one restart has exhausted the search space.
    """
    budget = budget or SearchBudget()
    if tree.b > graph.n:
        return SearchResult(None, 0, 0, True)
    total = 0
    for r in range(budget.max_restarts):
        status, _, steps, phi = _run(
            graph, tree, count_all=False, shuffle=True,
            seed=budget.seed.child(r).uint64(), max_steps=budget.max_backtrack_steps,
        )
        total += steps
        if status == _kernel.FOUND:
            if not is_induced_copy(graph, tree, phi):
                raise InvariantViolation(f"search returned a non-induced embedding {phi}")
            return SearchResult(phi, total, r + 1, False)
        if status == _kernel.EXHAUSTED:
            return SearchResult(None, total, r + 1, True)
    return SearchResult(None, total, budget.max_restarts, False)


def find_induced_embedding(graph: Graph, tree: Tree, budget: SearchBudget | None = None) -> Optional[Embedding]:
    """An induced copy of ``tree`` in ``graph``, or ``None`` if none was found within budget."""
    return search_induced_embedding(graph, tree, budget).embedding


# --------------------------------------------------------------------------
# exact maxima over vertex subsets


def _subset_tables(graph: Graph):
    n = graph.n
    subsets = np.arange(1 << n, dtype=np.int64)
    size = np.bitwise_count(subsets).astype(np.int64)
    degs = np.empty((n, 1 << n), dtype=np.int64)
    inside = np.empty((n, 1 << n), dtype=bool)
    for v in range(n):
        degs[v] = np.bitwise_count(subsets & graph.rows[v])
        inside[v] = (subsets >> v) & 1 == 1
    edges = np.where(inside, degs, 0).sum(axis=0) // 2
    maxdeg = np.where(inside, degs, 0).max(axis=0) if n else np.zeros(1, dtype=np.int64)
    return subsets, size, degs, inside, edges, maxdeg


def _connected(graph: Graph, s: int) -> bool:
    start = s & -s
    seen = start
    frontier = start
    while frontier:
        low = frontier & -frontier
        frontier ^= low
        new = graph.rows[low.bit_length() - 1] & s & ~seen
        seen |= new
        frontier |= new
    return seen == s


def max_induced_size(graph: Graph, family: MaxFamily | str = MaxFamily.TREE, *,
                     force: bool = False, witness: bool = False):
    """Largest vertex count of a subset inducing a tree, a path or a matching.

    With ``witness=True`` returns ``(size, vertices)`` where ``vertices`` is the
    lexicographically least maximum subset.
    """
    family = MaxFamily(family)
    n = graph.n
    if n > MAXIMA_MAX_N and not force:
        raise CapExceeded(f"exact maxima are capped at n <= {MAXIMA_MAX_N} (got {n}); pass force=True")
    subsets, size, degs, inside, edges, maxdeg = _subset_tables(graph)
    if family is MaxFamily.MATCHING:
        ok = np.all(~inside | (degs == 1), axis=0)
        needs_connectivity = False
    else:
        ok = (edges == size - 1) & (size >= 1)
        if family is MaxFamily.PATH:
            ok &= maxdeg <= 2
        needs_connectivity = True
    best, best_set = 0, ()
    cand = subsets[ok]
    if len(cand):
        csize = size[ok]
        for k in sorted(set(csize.tolist()), reverse=True):
            sets = [int(s) for s in cand[csize == k]]
            sets.sort(key=lambda s: [v for v in range(n) if (s >> v) & 1])
            hit = next((s for s in sets if not needs_connectivity or _connected(graph, s)), None)
            if hit is not None:
                best, best_set = k, tuple(v for v in range(n) if (hit >> v) & 1)
                break
    return (best, best_set) if witness else best
