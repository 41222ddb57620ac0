"""Integral max-flow on vertex-capacitated digraphs.

Vertex capacities are realized by node splitting: vertex ``v`` becomes an
in-node and an out-node joined by an arc carrying the capacity of ``v``.
The split network is handed to :func:`scipy.sparse.csgraph.maximum_flow`.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Mapping

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow


def vertex_capacitated_flow(
    vertices: Iterable[int],
    edges: Iterable[tuple[int, int]],
    capacity: int | Callable[[int], int],
    supply: Mapping[int, int],
    demand: Mapping[int, int],
) -> tuple[int, dict[tuple[int, int], int]]:
    """Maximum integral flow from supplies to demands.

    ``supply[v]`` units may be injected at ``v`` and ``demand[v]`` units may
    leave the network at ``v``; both pass through the capacity of ``v``.
    Edges have no capacity of their own beyond that of their endpoints.

    Returns the flow value and the flow on every edge.
    """
    vertices = list(vertices)
    edges = list(edges)
    index = {v: i for i, v in enumerate(vertices)}
    n = len(vertices)
    src, dst = 2 * n, 2 * n + 1
    cap_of = capacity if callable(capacity) else (lambda _v, c=capacity: c)

    rows, cols, caps = [], [], []
    for v, i in index.items():
        rows.append(2 * i)
        cols.append(2 * i + 1)
        caps.append(cap_of(v))
    total = sum(supply.values())
    big = max(total, 1)
    for u, v in edges:
        rows.append(2 * index[u] + 1)
        cols.append(2 * index[v])
        caps.append(big)
    for v, amount in supply.items():
        if amount > 0:
            rows.append(src)
            cols.append(2 * index[v])
            caps.append(amount)
    for v, amount in demand.items():
        if amount > 0:
            rows.append(2 * index[v] + 1)
            cols.append(dst)
            caps.append(amount)

    if total == 0:
        return 0, {e: 0 for e in edges}

    graph = csr_matrix(
        (np.asarray(caps, dtype=np.int32), (rows, cols)), shape=(2 * n + 2, 2 * n + 2)
    )
    result = maximum_flow(graph, src, dst)
    flow = {}
    if edges:
        er = [2 * index[u] + 1 for u, _ in edges]
        ec = [2 * index[v] for _, v in edges]
        values = np.asarray(result.flow[er, ec]).ravel()
        flow = {e: max(int(x), 0) for e, x in zip(edges, values)}
    return int(result.flow_value), flow
