"""Batch linkage checks for transversal verification, compiled with numba.

The instance is turned once into a unit-capacity residual network on the
node-split graph. Sources of a transversal are then added one at a time by
a BFS augmentation; a source that cannot be augmented proves the prefix
dependent. Augmentations are undone in LIFO order, which lets the
exhaustive mode walk the product of all parts as a depth-first tree and
reuse every shared prefix.

Arcs are stored in pairs: arc ``a`` and its reverse ``a ^ 1``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .instance import GammoidInstance


class LinkageNetwork:
    """Node-split residual network of an instance, as flat arrays."""

    def __init__(self, inst: GammoidInstance):
        index = {v: i for i, v in enumerate(inst.vertices)}
        n = len(index)
        self.index = index
        self.sink_node = 2 * n
        nodes = 2 * n + 1
        tails, heads = [], []

        def arc(u, v):
            tails.extend((u, v))
            heads.extend((v, u))

        for i in range(n):
            arc(2 * i, 2 * i + 1)
        for u, v in inst.edges:
            arc(2 * index[u] + 1, 2 * index[v])
        for z in inst.sinks:
            arc(2 * index[z] + 1, self.sink_node)

        tails = np.asarray(tails, dtype=np.int64)
        self.head = np.asarray(heads, dtype=np.int64)
        cap = np.zeros(len(tails), dtype=np.int64)
        cap[0::2] = 1
        self.cap0 = cap
        order = np.argsort(tails, kind="stable")
        self.adj = order.astype(np.int64)
        self.start = np.searchsorted(tails[order], np.arange(nodes + 1)).astype(np.int64)
        self.nodes = nodes

    def entry(self, sources) -> np.ndarray:
        return np.asarray([2 * self.index[s] for s in sources], dtype=np.int64)


@njit(cache=True)
def _augment(entry, sink, start, adj, head, cap, parent, stamp, mark, queue, undo, top):
    """BFS from ``entry`` to ``sink``; flips the path and logs it on ``undo``.

    Returns the new top of the undo stack, or -1 when no path exists.
    """
    stamp[entry] = mark
    queue[0] = entry
    lo, hi = 0, 1
    found = False
    while lo < hi and not found:
        x = queue[lo]
        lo += 1
        for p in range(start[x], start[x + 1]):
            a = adj[p]
            if cap[a] > 0:
                y = head[a]
                if stamp[y] != mark:
                    stamp[y] = mark
                    parent[y] = a
                    if y == sink:
                        found = True
                        break
                    queue[hi] = y
                    hi += 1
    if not found:
        return -1
    y = sink
    count = 0
    while y != entry:
        a = parent[y]
        cap[a] -= 1
        cap[a ^ 1] += 1
        undo[top + count] = a
        count += 1
        y = head[a ^ 1]
    undo[top + count] = count
    return top + count + 1


@njit(cache=True)
def _rollback(cap, undo, top):
    count = undo[top - 1]
    for i in range(top - 1 - count, top - 1):
        a = undo[i]
        cap[a] += 1
        cap[a ^ 1] -= 1
    return top - 1 - count


@njit(cache=True)
def exhaustive(sizes, flat, offsets, sink, start, adj, head, cap0, fail_cap):
    """Walk every transversal; returns (checked, failing, fail_rows).

    ``checked`` counts full transversals covered, ``failing`` how many of
    them are dependent. Each row of ``fail_rows`` is a dependent prefix
    (entry-node indices into ``flat``, padded with -1).
    """
    m = sizes.shape[0]
    nodes = start.shape[0] - 1
    cap = cap0.copy()
    parent = np.zeros(nodes, dtype=np.int64)
    stamp = np.zeros(nodes, dtype=np.int64)
    queue = np.zeros(nodes, dtype=np.int64)
    undo = np.zeros(m * (nodes + 1) + 1, dtype=np.int64)
    fail_rows = -np.ones((fail_cap, m), dtype=np.int64)
    suffix = np.ones(m + 1, dtype=np.int64)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] * sizes[i]
    choice = np.zeros(m, dtype=np.int64)
    tops = np.zeros(m + 1, dtype=np.int64)
    mark = 0
    checked = 0
    failing = 0
    nfail = 0
    level = 0
    if m == 0:
        return 1, 0, fail_rows[:0]
    choice[0] = 0
    while level >= 0:
        if choice[level] == sizes[level]:
            # exhausted this level; pop
            level -= 1
            if level >= 0:
                tops[level + 1] = _rollback(cap, undo, tops[level + 1])
                choice[level] += 1
            continue
        mark += 1
        node = flat[offsets[level] + choice[level]]
        top = _augment(node, sink, start, adj, head, cap, parent, stamp, mark,
                       queue, undo, tops[level])
        if top < 0:
            rest = suffix[level + 1]
            checked += rest
            failing += rest
            if nfail < fail_cap:
                for j in range(level + 1):
                    fail_rows[nfail, j] = offsets[j] + choice[j]
                nfail += 1
            choice[level] += 1
            continue
        if level == m - 1:
            checked += 1
            tops[level + 1] = top
            tops[level + 1] = _rollback(cap, undo, tops[level + 1])
            choice[level] += 1
            continue
        tops[level + 1] = top
        level += 1
        choice[level] = 0
    return checked, failing, fail_rows[:nfail]


@njit(cache=True)
def sampled(picks, flat, offsets, sink, start, adj, head, cap0, fail_cap):
    """Check the given transversals (rows of choice indices per part)."""
    samples, m = picks.shape
    nodes = start.shape[0] - 1
    cap = cap0.copy()
    parent = np.zeros(nodes, dtype=np.int64)
    stamp = np.zeros(nodes, dtype=np.int64)
    queue = np.zeros(nodes, dtype=np.int64)
    undo = np.zeros(m * (nodes + 1) + 1, dtype=np.int64)
    fail_rows = -np.ones((fail_cap, m), dtype=np.int64)
    mark = 0
    failing = 0
    nfail = 0
    for r in range(samples):
        top = 0
        level = 0
        ok = True
        for level in range(m):
            mark += 1
            node = flat[offsets[level] + picks[r, level]]
            nxt = _augment(node, sink, start, adj, head, cap, parent, stamp, mark,
                           queue, undo, top)
            if nxt < 0:
                ok = False
                break
            top = nxt
        if not ok:
            failing += 1
            if nfail < fail_cap:
                for j in range(m):
                    fail_rows[nfail, j] = offsets[j] + picks[r, j]
                nfail += 1
        while top > 0:
            top = _rollback(cap, undo, top)
    return samples, failing, fail_rows[:nfail]


def check_transversals(inst: GammoidInstance, parts, *, picks=None, fail_cap: int = 20):
    """Exhaustive (``picks`` None) or listed transversal checks.

    Returns ``(checked, failing, failures)`` where each failure is a list of
    source ids forming a dependent set.
    """
    net = LinkageNetwork(inst)
    flat_sources = [s for p in parts for s in p]
    flat = net.entry(flat_sources)
    sizes = np.asarray([len(p) for p in parts], dtype=np.int64)
    offsets = np.zeros(len(parts), dtype=np.int64)
    if len(parts):
        offsets[1:] = np.cumsum(sizes)[:-1]
    args = (flat, offsets, net.sink_node, net.start, net.adj, net.head, net.cap0, fail_cap)
    if picks is None:
        checked, failing, rows = exhaustive(sizes, *args)
    else:
        checked, failing, rows = sampled(np.asarray(picks, dtype=np.int64), *args)
    failures = [[flat_sources[j] for j in row if j >= 0] for row in rows]
    return int(checked), int(failing), failures
