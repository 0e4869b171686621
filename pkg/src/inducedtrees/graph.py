"""Graphs, trees and forests.

All vertex labels are 0-based.  Adjacency is stored as one Python ``int`` per
vertex used as a bit row (bit ``v`` of ``rows[u]`` is set iff ``uv`` is an
edge); the search kernel gets the same rows packed into a ``uint64`` matrix.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .rng import Seed, as_seed

Embedding = tuple  # tuple[int, ...]: injective map from tree labels to graph vertices


def _normalize_edges(n: int, edges: Iterable[tuple[int, int]]) -> frozenset[tuple[int, int]]:
    out = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) out of range for {n} vertices")
        e = (u, v) if u < v else (v, u)
        if e in out:
            raise ValueError(f"duplicate edge {e}")
        out.add(e)
    return frozenset(out)


def _rows_from_edges(n: int, edges: Iterable[tuple[int, int]]) -> tuple[int, ...]:
    rows = [0] * n
    for u, v in edges:
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    return tuple(rows)


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph on vertices ``0..n-1``."""

    n: int
    rows: tuple[int, ...] = field(repr=False)

    def __post_init__(self):
        if self.n < 0 or len(self.rows) != self.n:
            raise ValueError("rows must have one entry per vertex")
        full = (1 << self.n) - 1
        for u, r in enumerate(self.rows):
            if r & ~full:
                raise ValueError(f"row {u} has bits outside 0..{self.n - 1}")
            if (r >> u) & 1:
                raise ValueError(f"self-loop at vertex {u}")
            for v in _bits(r):
                if not (self.rows[v] >> u) & 1:
                    raise ValueError(f"adjacency not symmetric at ({u}, {v})")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> Graph:
        return cls(n, _rows_from_edges(n, _normalize_edges(n, edges)))

    @classmethod
    def from_matrix(cls, adj: np.ndarray) -> Graph:
        adj = np.asarray(adj, dtype=bool)
        n = adj.shape[0]
        if adj.shape != (n, n):
            raise ValueError("adjacency matrix must be square")
        packed = np.packbits(adj, axis=1, bitorder="little")
        return cls(n, tuple(int.from_bytes(row.tobytes(), "little") for row in packed))

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.rows == other.rows

    def __hash__(self):
        return hash((self.n, self.rows))

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.rows[u] >> v) & 1)

    def neighbors(self, u: int) -> list[int]:
        return list(_bits(self.rows[u]))

    def degree(self, u: int) -> int:
        return self.rows[u].bit_count()

    @cached_property
    def edge_count(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in _bits(self.rows[u] >> (u + 1) << (u + 1))]

    def to_matrix(self) -> np.ndarray:
        """Dense boolean adjacency matrix."""
        nbytes = max(1, (self.n + 7) // 8)
        raw = np.frombuffer(b"".join(r.to_bytes(nbytes, "little") for r in self.rows), dtype=np.uint8)
        bits = np.unpackbits(raw.reshape(self.n, nbytes), axis=1, bitorder="little")
        return bits[:, : self.n].astype(bool)

    @cached_property
    def words(self) -> np.ndarray:
        """Adjacency rows packed as ``uint64`` words, shape ``(n, ceil(n/64))``."""
        w = max(1, (self.n + 63) // 64)
        buf = b"".join(r.to_bytes(8 * w, "little") for r in self.rows)
        return np.frombuffer(buf, dtype="<u8").astype(np.uint64).reshape(self.n, w)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([r.bit_count() for r in self.rows], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class Forest:
    """Acyclic graph on vertices ``0..n-1``."""

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vertex count must be non-negative")
        object.__setattr__(self, "edges", _normalize_edges(self.n, self.edges))
        if len(self.edges) != self.n - len(_components(self.n, self.edges)):
            raise ValueError("edge set contains a cycle")

    def __eq__(self, other):
        return type(self) is type(other) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((type(self).__name__, self.n, self.edges))

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in sorted(self.edges):
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(a) for a in adj)

    @cached_property
    def rows(self) -> tuple[int, ...]:
        return _rows_from_edges(self.n, self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self.edges

    def degree(self, u: int) -> int:
        return len(self.adjacency[u])

    @cached_property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    @cached_property
    def components(self) -> list[list[int]]:
        """Vertex lists of the connected components, ordered by smallest vertex."""
        return _components(self.n, self.edges)

    @property
    def component_count(self) -> int:
        return self.n - len(self.edges)

    def as_graph(self) -> Graph:
        return Graph(self.n, self.rows)


class Tree(Forest):
    """A connected forest.  ``b`` is the vertex count."""

    def __post_init__(self):
        super().__post_init__()
        if self.n < 1:
            raise ValueError("a tree needs at least one vertex")
        if len(self.edges) != self.n - 1:
            raise ValueError(f"not a tree: {self.n} vertices, {len(self.edges)} edges")

    @property
    def b(self) -> int:
        return self.n

    def bfs_order(self, root: int | None = None) -> tuple[list[int], list[int]]:
        """BFS order and parent array (``-1`` at the root).

        The default root is the lowest-labelled vertex of maximum degree.
        """
        if root is None:
            root = max(range(self.n), key=lambda v: (self.degree(v), -v))
        order, parent = [root], [-1] * self.n
        seen = {root}
        i = 0
        while i < len(order):
            u = order[i]
            i += 1
            for v in self.adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    parent[v] = u
                    order.append(v)
        return order, parent


def _components(n: int, edges: Iterable[tuple[int, int]]) -> list[list[int]]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        parent[find(u)] = find(v)
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return sorted(groups.values(), key=lambda c: c[0])


# --------------------------------------------------------------------------
# samplers


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    return p


def _pair_matrix(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    iu = np.triu_indices(n, 1)
    adj = np.zeros((n, n), dtype=bool)
    adj[iu] = rng.random(len(iu[0])) < p
    return adj | adj.T


def sample_gnp(n: int, p: float, seed: Seed | int | None = None) -> Graph:
    """Sample G(n, p).

    Pairs ``(i, j)``, ``i < j``, are visited in row-major order and each
    consumes one uniform draw from the seed's Philox stream.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    p = _check_p(p)
    return Graph.from_matrix(_pair_matrix(n, p, as_seed(seed).generator()))


def check_embedding(phi: Sequence[int], b: int, n: int) -> Embedding:
    phi = tuple(int(x) for x in phi)
    if len(phi) != b:
        raise ValueError(f"embedding has length {len(phi)}, expected {b}")
    if any(not 0 <= x < n for x in phi):
        raise ValueError(f"embedding {phi} leaves the vertex range 0..{n - 1}")
    if len(set(phi)) != b:
        raise ValueError(f"embedding {phi} is not injective")
    return phi


def sample_planted(tree: Tree, anchor: Sequence[int], n: int, p: float,
                   seed: Seed | int | None = None) -> Graph:
    """G(n, p) conditioned on ``anchor`` being an induced copy of ``tree``.

    Pairs inside the anchor image are fixed by the tree; every other pair is
    drawn exactly as in :func:`sample_gnp` (same stream, same pair order).
    """
    anchor = check_embedding(anchor, tree.b, n)
    p = _check_p(p)
    adj = _pair_matrix(n, p, as_seed(seed).generator())
    idx = np.array(anchor)
    adj[np.ix_(idx, idx)] = False
    for u, v in tree.edges:
        adj[anchor[u], anchor[v]] = adj[anchor[v], anchor[u]] = True
    return Graph.from_matrix(adj)


# --------------------------------------------------------------------------
# tree and forest generators


def path_tree(b: int) -> Tree:
    return Tree(b, frozenset((i, i + 1) for i in range(b - 1)))


def star_tree(leaves: int) -> Tree:
    return Tree(leaves + 1, frozenset((0, i) for i in range(1, leaves + 1)))


def full_tree(b: int, delta: int) -> Tree:
    """The first ``b`` vertices of a BFS-filled tree where every vertex has degree ``delta``
    (root has ``delta`` children, internal vertices ``delta - 1``)."""
    if delta < 2 and b > 2:
        raise ValueError("delta must be at least 2 for trees with more than 2 vertices")
    edges, slots, nxt = [], deque(), 1
    slots.extend([0] * max(delta, 1))
    while nxt < b:
        u = slots.popleft()
        edges.append((u, nxt))
        slots.extend([nxt] * (delta - 1))
        nxt += 1
    return Tree(b, frozenset(edges))


def caterpillar_tree(b: int, delta: int) -> Tree:
    """A spine with legs: spine vertices get up to ``delta - 2`` pendant leaves each."""
    if delta < 2 and b > 2:
        raise ValueError("delta must be at least 2 for trees with more than 2 vertices")
    if b <= 2:
        return path_tree(b)
    edges, nxt, spine = [], 1, 0
    while nxt < b:
        for _ in range(delta - 2):
            if nxt >= b - 1:
                break
            edges.append((spine, nxt))
            nxt += 1
        if nxt < b:
            edges.append((spine, nxt))
            spine = nxt
            nxt += 1
    return Tree(b, frozenset(edges))


def random_tree_bounded(b: int, delta: int, seed: Seed | int | None = None) -> Tree:
    """Random recursive tree with degree cap ``delta``.

    Vertex ``i`` attaches to a uniformly random earlier vertex whose degree is
    still below ``delta``.
    """
    if b < 1:
        raise ValueError("b must be at least 1")
    if b >= 3 and delta < 2:
        raise ValueError("trees with 3 or more vertices need delta >= 2")
    rng = as_seed(seed).generator()
    deg = [0] * b
    open_ = [0]
    edges = []
    for v in range(1, b):
        j = int(rng.integers(len(open_)))
        u = open_[j]
        edges.append((u, v))
        deg[u] += 1
        deg[v] = 1
        if deg[u] == delta:
            open_[j] = open_[-1]
            open_.pop()
        if delta > 1:
            open_.append(v)
    return Tree(b, frozenset(edges))


def forest_gadget_tree(forest: Forest, s: int) -> Tree:
    """Join the components of ``forest`` with a path of ``s`` new vertices.

    Forest vertices keep their labels; the path occupies ``n .. n+s-1``.
    Components (ordered by smallest vertex) are dealt round-robin to the path
    vertices and hooked on by an edge to their smallest vertex.
    """
    if s < 1:
        raise ValueError("path length s must be at least 1")
    if forest.n < 1:
        raise ValueError("forest must be nonempty")
    n = forest.n
    edges = set(forest.edges)
    edges.update((n + i, n + i + 1) for i in range(s - 1))
    for j, comp in enumerate(forest.components):
        edges.add((comp[0], n + j % s))
    return Tree(n + s, frozenset(edges))


# --------------------------------------------------------------------------
# structural utilities


def induced_subgraph(graph: Graph, vertices: Iterable[int]) -> Graph:
    """Subgraph induced on ``vertices``, relabelled ``0..|S|-1`` in sorted order."""
    verts = sorted(set(int(v) for v in vertices))
    if any(not 0 <= v < graph.n for v in verts):
        raise ValueError(f"vertex set leaves the range 0..{graph.n - 1}")
    pos = {v: i for i, v in enumerate(verts)}
    rows = []
    for v in verts:
        r = 0
        for w in _bits(graph.rows[v]):
            if w in pos:
                r |= 1 << pos[w]
        rows.append(r)
    return Graph(len(verts), tuple(rows))


def is_induced_copy(graph: Graph, tree: Tree, phi: Sequence[int]) -> bool:
    """True iff ``phi(u) phi(v)`` is an edge exactly when ``uv`` is a tree edge."""
    if len(phi) != tree.b:
        raise ValueError(f"embedding has length {len(phi)}, expected {tree.b}")
    if any(not 0 <= x < graph.n for x in phi):
        raise ValueError("embedding leaves the graph's vertex range")
    if len(set(phi)) != len(phi):
        return False
    image = 0
    for x in phi:
        image |= 1 << x
    rows = graph.rows
    for u, x in enumerate(phi):
        want = 0
        for v in tree.adjacency[u]:
            want |= 1 << phi[v]
        if rows[x] & image != want:
            return False
    return True


def tree_automorphism_count(tree: Tree) -> int:
    """Order of the automorphism group, via AHU canonical forms rooted at the center."""
    if not isinstance(tree, Tree):
        raise TypeError("tree_automorphism_count expects a Tree")
    adj = tree.adjacency

    def rooted(root: int, banned: int) -> tuple[str, int]:
        # iterative post-order to avoid recursion limits on long paths
        order, parent = [root], {root: banned}
        for u in order:
            for v in adj[u]:
                if v != parent[u]:
                    parent[v] = u
                    order.append(v)
        canon: dict[int, str] = {}
        auts: dict[int, int] = {}
        for u in reversed(order):
            kids = [v for v in adj[u] if v != parent[u]]
            forms = sorted(canon[v] for v in kids)
            a = 1
            for v in kids:
                a *= auts[v]
            for m in Counter(forms).values():
                a *= math.factorial(m)
            canon[u] = "(" + "".join(forms) + ")"
            auts[u] = a
        return canon[root], auts[root]

    centers = tree_centers(tree)
    if len(centers) == 1:
        return rooted(centers[0], -1)[1]
    u, v = centers
    cu, au = rooted(u, v)
    cv, av = rooted(v, u)
    return au * av * (2 if cu == cv else 1)


def tree_centers(tree: Tree) -> list[int]:
    deg = [tree.degree(v) for v in range(tree.n)]
    layer = [v for v in range(tree.n) if deg[v] <= 1]
    remaining = tree.n
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for u in layer:
            for v in tree.adjacency[u]:
                deg[v] -= 1
                if deg[v] == 1:
                    nxt.append(v)
        layer = nxt
    return sorted(layer)


# --------------------------------------------------------------------------
# text format: "n m" then m lines "u v" (0-based, u < v, ascending)


def format_graph(graph: Graph | Forest) -> str:
    edges = sorted(graph.edges) if isinstance(graph, Forest) else graph.edges()
    lines = [f"{graph.n} {len(edges)}"]
    lines.extend(f"{u} {v}" for u, v in edges)
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty graph file")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError("line 1: expected 'n m'")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise ValueError("line 1: expected two integers 'n m'") from None
    if n < 0 or m < 0:
        raise ValueError("line 1: counts must be non-negative")
    if len(lines) - 1 != m:
        raise ValueError(f"header announces {m} edges, file has {len(lines) - 1}")
    edges = []
    for i, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        try:
            u, v = (int(x) for x in parts)
        except ValueError:
            raise ValueError(f"line {i}: expected 'u v'") from None
        if u == v:
            raise ValueError(f"line {i}: self-loop")
        edges.append((u, v))
    try:
        return Graph.from_edges(n, edges)
    except ValueError as exc:
        raise ValueError(f"invalid edge list: {exc}") from None


def parse_tree(text: str) -> Tree:
    g = parse_graph(text)
    return Tree(g.n, frozenset(g.edges()))


def read_graph(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def read_tree(path) -> Tree:
    with open(path, encoding="utf-8") as fh:
        return parse_tree(fh.read())


def write_graph(graph: Graph | Forest, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_graph(graph))
