"""Backtracking kernel for ordered induced tree embeddings.

The pattern is placed in BFS order.  Per depth the kernel keeps three bitsets
over host vertices: ``placed``, ``cover1`` (adjacent to at least one placed
image) and ``cover2`` (adjacent to at least two).  A candidate for a pattern
vertex whose parent image is ``u`` must lie in ``adj[u] & ~cover2 & ~placed``:
adjacent to ``u`` and to no other placed image.

Randomness inside the kernel is SplitMix64 seeded from the caller's stream.
"""

import numpy as np
from numba import njit

FOUND = 0
BUDGET = 1
EXHAUSTED = 2

_ONE = np.uint64(1)
_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


@njit(cache=True, inline="always")
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return np.int64((x * _H01) >> np.uint64(56))


@njit(cache=True)
def _splitmix(state):
    state = state + np.uint64(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return state, z ^ (z >> np.uint64(31))


@njit(cache=True)
def _shuffle(arr, count, state):
    for i in range(count - 1, 0, -1):
        state, r = _splitmix(state)
        j = np.int64(r % np.uint64(i + 1))
        t = arr[i]
        arr[i] = arr[j]
        arr[j] = t
    return state


@njit(cache=True)
def search(adj, deg, n, order, parent_pos, tdeg, orphans, count_all, shuffle,
           seed, max_steps, out_img):
    """Run one DFS.

    ``order[i]`` is the pattern vertex at BFS position ``i``; ``parent_pos[i]``
    the BFS position of its parent (-1 for the root); ``tdeg[i]`` its degree;
    ``orphans[m]`` the number of positions ``>= m`` whose parent sits at a
    position ``>= m``.  Returns ``(status, count, steps)``; on FOUND
    ``out_img[i]`` holds the image of the vertex at position ``i``.
    """
    b = order.shape[0]
    W = adj.shape[1]
    zero = np.uint64(0)
    full = ~zero
    mask = np.empty(W, dtype=np.uint64)
    for j in range(W):
        lo = j * 64
        if lo + 64 <= n:
            mask[j] = full
        elif lo >= n:
            mask[j] = zero
        else:
            mask[j] = (_ONE << np.uint64(n - lo)) - _ONE

    cover1 = np.zeros((b + 1, W), dtype=np.uint64)
    cover2 = np.zeros((b + 1, W), dtype=np.uint64)
    placed = np.zeros((b + 1, W), dtype=np.uint64)
    cand = np.empty((b, n), dtype=np.int64)
    ccount = np.zeros(b, dtype=np.int64)
    cptr = np.zeros(b, dtype=np.int64)
    state = np.uint64(seed)
    steps = 0
    count = 0

    c = 0
    for v in range(n):
        if deg[v] >= tdeg[0]:
            cand[0, c] = v
            c += 1
    ccount[0] = c
    if shuffle:
        state = _shuffle(cand[0], c, state)

    depth = 0
    while True:
        if cptr[depth] < ccount[depth]:
            x = cand[depth, cptr[depth]]
            cptr[depth] += 1
            steps += 1
            if steps > max_steps:
                return BUDGET, count, steps - 1
            out_img[depth] = x
            m = depth + 1
            for j in range(W):
                a = adj[x, j]
                c1 = cover1[depth, j]
                cover2[m, j] = cover2[depth, j] | (c1 & a)
                cover1[m, j] = c1 | a
                placed[m, j] = placed[depth, j]
            placed[m, x >> 6] |= _ONE << np.uint64(x & 63)
            if m == b:
                if count_all:
                    count += 1
                    continue
                return FOUND, 1, steps
            avail2 = 0
            avail1 = 0
            for j in range(W):
                free = ~placed[m, j] & mask[j]
                avail2 += _popcount(free & ~cover2[m, j])
                avail1 += _popcount(free & ~cover1[m, j])
            if avail2 < b - m or avail1 < orphans[m]:
                continue
            u = out_img[parent_pos[m]]
            need = tdeg[m]
            c = 0
            for j in range(W):
                word = adj[u, j] & ~cover2[m, j] & ~placed[m, j]
                while word != zero:
                    low = word & (~word + _ONE)
                    v = j * 64 + _popcount(low - _ONE)
                    word ^= low
                    if deg[v] >= need:
                        cand[m, c] = v
                        c += 1
            if c == 0:
                continue
            if shuffle:
                state = _shuffle(cand[m], c, state)
            ccount[m] = c
            cptr[m] = 0
            depth = m
        else:
            if depth == 0:
                return EXHAUSTED, count, steps
            depth -= 1
