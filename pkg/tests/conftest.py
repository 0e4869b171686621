import itertools

import numpy as np
import pytest

from inducedtrees import Graph, Tree
from inducedtrees.graph import tree_centers


def naive_count(graph: Graph, tree: Tree) -> int:
    """Count induced ordered embeddings by checking every injection with numpy."""
    b, n = tree.b, graph.n
    if b > n:
        return 0
    adj = graph.to_matrix().astype(bool)
    want = tree.as_graph().to_matrix().astype(bool)
    inj = np.array(list(itertools.permutations(range(n), b)), dtype=np.intp).reshape(-1, b)
    ok = np.ones(len(inj), dtype=bool)
    for u, v in itertools.combinations(range(b), 2):
        ok &= adj[inj[:, u], inj[:, v]] == want[u, v]
    return int(ok.sum())


def all_graphs(n: int):
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield Graph.from_edges(n, [e for i, e in enumerate(pairs) if mask >> i & 1])


def labelled_trees(b: int, max_degree: int):
    """Every labelled tree on ``b`` vertices with the given degree cap, via Pruefer codes."""
    if b == 1:
        yield Tree(1, frozenset())
        return
    if b == 2:
        yield Tree(2, frozenset({(0, 1)}))
        return
    for code in itertools.product(range(b), repeat=b - 2):
        degree = [1] * b
        for x in code:
            degree[x] += 1
        if max(degree) > max_degree:
            continue
        edges = []
        deg = degree[:]
        for x in code:
            leaf = min(v for v in range(b) if deg[v] == 1)
            edges.append((leaf, x))
            deg[leaf] -= 1
            deg[x] -= 1
        u, v = [w for w in range(b) if deg[w] == 1]
        edges.append((u, v))
        yield Tree(b, frozenset(tuple(sorted(e)) for e in edges))


def unlabelled_trees(b: int, max_degree: int):
    """One representative per isomorphism class."""
    seen, out = set(), []
    for t in labelled_trees(b, max_degree):
        key = _canon(t)
        if key not in seen:
            seen.add(key)
            out.append(t)
    return out


def _canon(t: Tree) -> str:
    adj = t.adjacency

    def enc(u, parent):
        return "(" + "".join(sorted(enc(v, u) for v in adj[u] if v != parent)) + ")"

    return min(enc(c, -1) for c in tree_centers(t))


@pytest.fixture
def c5():
    return Graph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)])
