"""How two ordered tree embeddings can overlap.

Given a reference embedding ``phi1`` and another embedding ``phi``, the overlap
``A = image(phi1) & image(phi)`` is classified by ``ell = |A|`` and ``k``, the
number of components of the tree restricted to ``phi1``'s preimage of ``A``.
``phi`` is compatible with ``phi1`` when both preimages of ``A`` carry the same
tree adjacency.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from .graph import Tree, _components, check_embedding
from .search import CapExceeded

EXACT_S_MAX_INJECTIONS = 200_000


@dataclass(frozen=True)
class OverlapProfile:
    ell: int
    k: int
    compatible: bool

    def __post_init__(self):
        if not 0 <= self.k <= self.ell:
            raise ValueError("need 0 <= k <= ell")
        if self.ell <= 1 and (self.k != self.ell or not self.compatible):
            raise ValueError("overlaps of size 0 or 1 are compatible with k = ell")

    @property
    def independent(self) -> bool:
        """Indicator events with overlap below 2 are independent."""
        return self.ell <= 1


def _profile(tree: Tree, inv1: Sequence[int], phi: Sequence[int]) -> OverlapProfile:
    shared = [(i, inv1[x]) for i, x in enumerate(phi) if inv1[x] >= 0]
    ell = len(shared)
    if ell <= 1:
        return OverlapProfile(ell, ell, True)
    has = tree.has_edge
    for (i2, i1), (j2, j1) in itertools.combinations(shared, 2):
        if has(i1, j1) != has(i2, j2):
            return OverlapProfile(ell, _forest_components(tree, [a for _, a in shared]), False)
    return OverlapProfile(ell, _forest_components(tree, [a for _, a in shared]), True)


def _forest_components(tree: Tree, labels: list[int]) -> int:
    pos = {v: i for i, v in enumerate(labels)}
    edges = [(pos[u], pos[v]) for u, v in tree.edges if u in pos and v in pos]
    return len(_components(len(labels), edges))


def _inverse(phi: Sequence[int], n: int) -> list[int]:
    inv = [-1] * n
    for label, x in enumerate(phi):
        inv[x] = label
    return inv


def overlap_profile(tree: Tree, phi1: Sequence[int], phi2: Sequence[int], n: int | None = None) -> OverlapProfile:
    """Profile of ``phi2`` relative to ``phi1`` (both embeddings of ``tree``)."""
    if n is None:
        n = max(max(phi1), max(phi2)) + 1
    phi1 = check_embedding(phi1, tree.b, n)
    phi2 = check_embedding(phi2, tree.b, n)
    return _profile(tree, _inverse(phi1, n), phi2)


@dataclass(frozen=True)
class OverlapTable:
    """Counts of all injections ``{0..b-1} -> {0..n-1}`` by overlap class."""

    b: int
    n: int
    compatible: dict = field(default_factory=dict)  # (ell, k) -> count, ell >= 2
    incompatible: int = 0
    independent: int = 0  # ell <= 1

    @property
    def total(self) -> int:
        return sum(self.compatible.values()) + self.incompatible + self.independent

    def S(self, ell: int, k: int) -> int:
        return self.compatible.get((ell, k), 0)

    def rows(self):
        """(ell, k, count) rows over every 2 <= ell <= b, 1 <= k <= ell."""
        for ell in range(2, self.b + 1):
            for k in range(1, ell + 1):
                yield ell, k, self.S(ell, k)


def _falling(r: int, t: int) -> int:
    return math.perm(r, t) if 0 <= t <= r else 0


@lru_cache(maxsize=64)
def _table(tree: Tree, phi1: tuple, n: int) -> OverlapTable:
    inv1 = _inverse(phi1, n)
    comp: Counter = Counter()
    bad = indep = 0
    for phi in itertools.permutations(range(n), tree.b):
        prof = _profile(tree, inv1, phi)
        if prof.independent:
            indep += 1
        elif prof.compatible:
            comp[prof.ell, prof.k] += 1
        else:
            bad += 1
    return OverlapTable(tree.b, n, dict(comp), bad, indep)


def overlap_table(tree: Tree, phi1: Sequence[int] | None, n: int, *, force: bool = False) -> OverlapTable:
    """Classify every injection, in lexicographic order, against ``phi1``.

    ``phi1`` defaults to the identity embedding.
    """
    phi1 = tuple(range(tree.b)) if phi1 is None else check_embedding(phi1, tree.b, n)
    size = _falling(n, tree.b)
    if size > EXACT_S_MAX_INJECTIONS and not force:
        raise CapExceeded(f"(n)_b = {size} injections exceeds the cap {EXACT_S_MAX_INJECTIONS}; pass force=True")
    return _table(tree, phi1, n)


def exact_S(tree: Tree, phi1: Sequence[int] | None, n: int, ell: int, k: int, *, force: bool = False) -> int:
    """Number of injections compatible with ``phi1`` with overlap ``ell`` and ``k`` components."""
    if not 0 <= k <= ell <= tree.b:
        return 0
    return overlap_table(tree, phi1, n, force=force).S(ell, k)


def conditional_embedding_probability(b: int | Tree, profile: OverlapProfile, p: float) -> float:
    """``Pr[phi_j is an induced copy | phi_1 is one]`` for the given overlap profile.

    Incompatible profiles have probability exactly 0.
    """
    if isinstance(b, Tree):
        b = b.b
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    if profile.ell > b:
        raise ValueError("overlap larger than the tree")
    if not profile.compatible:
        return 0.0
    ell, k = profile.ell, profile.k
    edges = b - 1 - (ell - k)
    non_edges = math.comb(b - 1, 2) - math.comb(ell, 2) + (ell - k)
    return math.exp(edges * math.log(p) + non_edges * math.log1p(-p))
