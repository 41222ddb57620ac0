"""Coloring number, feasible k-flows and dummy-source padding.

A gammoid is k-colorable exactly when every source can send one unit of
flow at the same time with no vertex carrying more than k units (matroid
union plus Menger). So a single vertex-capacitated max-flow replaces the
explicit color classes when building the initial flow.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass

from .errors import UncolorableSource
from .instance import GammoidInstance, rank
from .maxflow import vertex_capacitated_flow


@dataclass
class FlowState:
    """Integral flow on the edges of ``instance`` with per-vertex bound ``k``."""

    instance: GammoidInstance
    k: int
    flow: dict[tuple[int, int], int]

    def copy(self) -> FlowState:
        return FlowState(self.instance, self.k, dict(self.flow))

    def inflow(self, v: int) -> int:
        return sum(self.flow[(u, v)] for u in self.instance.pred[v])

    def outflow(self, v: int) -> int:
        return sum(self.flow[(v, w)] for w in self.instance.succ[v])

    def throughput(self, v: int) -> int:
        return max(self.inflow(v), self.outflow(v))

    @property
    def value(self) -> int:
        return sum(self.outflow(s) for s in self.instance.sources)

    def violations(self) -> list[str]:
        inst, k = self.instance, self.k
        bad = []
        for e, x in self.flow.items():
            if not 0 <= x <= k:
                bad.append(f"edge {e} carries {x}")
        for v in inst.vertices:
            i, o = self.inflow(v), self.outflow(v)
            if v in inst.source_set:
                if i != 0 or o != 1:
                    bad.append(f"source {v} has in/out flow {i}/{o}")
            elif v in inst.sink_set:
                if o != 0 or i > k:
                    bad.append(f"sink {v} has in/out flow {i}/{o}")
            elif i != o:
                bad.append(f"conservation fails at {v}: {i} in, {o} out")
            if max(i, o) > k:
                bad.append(f"vertex {v} carries {max(i, o)} > {k}")
        return bad


def _strip_circulations(flow: dict[tuple[int, int], int], inst: GammoidInstance) -> None:
    """Remove every directed cycle of positive flow, in place."""
    while True:
        cycle = _positive_cycle(flow, inst)
        if cycle is None:
            return
        c = min(flow[e] for e in cycle)
        for e in cycle:
            flow[e] -= c


def _positive_cycle(flow, inst):
    color = dict.fromkeys(inst.vertices, 0)
    for root in inst.vertices:
        if color[root]:
            continue
        stack = [(root, iter(inst.succ[root]))]
        path = [root]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            for w in it:
                if flow[(v, w)] <= 0:
                    continue
                if color[w] == 1:
                    i = path.index(w)
                    cyc = path[i:] + [w]
                    return list(zip(cyc, cyc[1:]))
                if color[w] == 0:
                    color[w] = 1
                    path.append(w)
                    stack.append((w, iter(inst.succ[w])))
                    break
            else:
                color[v] = 2
                stack.pop()
                path.pop()
    return None


def feasible_flow(inst: GammoidInstance, k: int) -> FlowState | None:
    """Route one unit from every source with vertex capacity ``k``, or None.

    The returned flow has no directed cycles of positive flow.
    """
    if k < 1:
        raise ValueError("k must be positive")
    supply = {s: 1 for s in inst.sources}
    demand = {z: k for z in inst.sinks}
    value, flow = vertex_capacitated_flow(inst.vertices, inst.edges, k, supply, demand)
    if value < len(inst.sources):
        return None
    _strip_circulations(flow, inst)
    return FlowState(inst, k, flow)


def _reaches_sink(inst: GammoidInstance) -> set[int]:
    seen = set(inst.sinks)
    queue = deque(inst.sinks)
    while queue:
        v = queue.popleft()
        for u in inst.pred[v]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return seen


def coloring_number(inst: GammoidInstance) -> int:
    """Smallest k for which all sources route under vertex capacity k."""
    if not inst.sources:
        raise ValueError("instance has no sources")
    alive = _reaches_sink(inst)
    for s in inst.sources:
        if s not in alive:
            raise UncolorableSource(s)
    lo = math.ceil(len(inst.sources) / rank(inst))
    hi = len(inst.sources)
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible_flow(inst, mid) is not None:
            hi = mid
        else:
            lo = mid + 1
    return lo


def pad_with_dummies(
    inst: GammoidInstance, k: int, f: FlowState
) -> tuple[GammoidInstance, FlowState]:
    """Add dummy sources until every sink absorbs exactly ``k`` units.

    A sink ``z`` with a deficit gets a fresh gadget vertex ``g`` spliced
    into its in-edge (``u -> g -> z``) and each dummy ``d`` adds the edge
    ``d -> g``. Dummies go one at a time to the sink with the largest
    remaining deficit, ties to the smallest sink id.
    """
    deficit = {z: k - f.inflow(z) for z in inst.sinks}
    if all(d == 0 for d in deficit.values()):
        return inst, f

    vertices = list(inst.vertices)
    edges = list(inst.edges)
    flow = dict(f.flow)
    sources = list(inst.sources)
    dummies = set(inst.dummies)
    next_id = max(vertices) + 1
    gadget: dict[int, int] = {}

    heap = [(-d, z) for z, d in deficit.items() if d > 0]
    heapq.heapify(heap)
    while heap:
        neg, z = heapq.heappop(heap)
        if z not in gadget:
            g = next_id
            next_id += 1
            vertices.append(g)
            gadget[z] = g
            (u,) = inst.pred[z]
            i = edges.index((u, z))
            edges[i] = (u, g)
            edges.append((g, z))
            flow[(u, g)] = flow.pop((u, z))
            flow[(g, z)] = k
        d = next_id
        next_id += 1
        vertices.append(d)
        sources.append(d)
        dummies.add(d)
        edges.append((d, gadget[z]))
        flow[(d, gadget[z])] = 1
        if neg + 1 < 0:
            heapq.heappush(heap, (neg + 1, z))

    padded = GammoidInstance(
        vertices=tuple(vertices),
        edges=tuple(edges),
        sources=tuple(sources),
        sinks=inst.sinks,
        dummies=frozenset(dummies),
    )
    out = FlowState(padded, k, flow)
    r = rank(padded)
    assert r == len(padded.sinks), f"padded rank {r} != {len(padded.sinks)} sinks"
    assert len(padded.sources) == r * k
    return padded, out


def dump_flow(f: FlowState) -> str:
    """``f <u> <v> <value>`` for every edge with positive flow."""
    lines = [f"f {u} {v} {x}" for (u, v), x in f.flow.items() if x > 0]
    return "\n".join(lines) + ("\n" if lines else "")
