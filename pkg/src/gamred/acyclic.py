"""Cycle canceling and the tree/highway decomposition of an acyclic flow.

A flow is acyclic when every undirected cycle of the graph contains an edge
at flow 0 or at flow k. The strictly fractional edges then form a forest
and the saturated edges form vertex-disjoint directed paths (highways).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import InvariantViolation
from .flow import FlowState

SOURCE = "source"
SOURCE_PORTAL = "source_portal"
SINK_PORTAL = "sink_portal"
NORMAL = "normal"
SINK = "sink"

ROLE_LETTER = {SOURCE: "S", SOURCE_PORTAL: "P", SINK_PORTAL: "Q", NORMAL: "N", SINK: "Z"}


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    capacity: int
    edge: tuple[int, int]
    forward: bool


class ResidualView:
    """Residual network of a flow: forward arcs below k, backward arcs above 0."""

    def __init__(self, f: FlowState):
        self.k = f.k
        self.flow = f.flow
        self.out: dict[int, list[Arc]] = {v: [] for v in f.instance.vertices}
        for (u, v), x in f.flow.items():
            if x < f.k:
                self.out[u].append(Arc(u, v, f.k - x, (u, v), True))
            if x > 0:
                self.out[v].append(Arc(v, u, x, (u, v), False))
        for arcs in self.out.values():
            arcs.sort(key=lambda a: (a.tail, a.head))

    def fractional(self, a: Arc) -> bool:
        return 0 < self.flow[a.edge] < self.k

    def arcs(self):
        for arcs in self.out.values():
            yield from arcs


def residual(f: FlowState) -> ResidualView:
    return ResidualView(f)


def find_augmenting_cycle(r: ResidualView, fractional_only: bool = True) -> list[Arc] | None:
    """A simple directed residual cycle with more than two arcs, or None.

    With ``fractional_only`` (the mode used by :func:`cancel_cycles`) only
    arcs of strictly fractional edges are used. Every such edge has arcs in
    both directions, so this is an undirected cycle search on the fractional
    support; a DFS that never steps straight back over the edge it arrived
    on finds one whenever it exists. Arcs are explored in ascending order.

    Without ``fractional_only`` every residual arc is eligible; each arc
    ``u -> v`` is tried in turn with a BFS for a path back from ``v`` to
    ``u`` that avoids the reverse arc of the same edge.
    """
    if fractional_only:
        return _fractional_cycle(r)
    return _any_cycle(r)


def _fractional_cycle(r: ResidualView) -> list[Arc] | None:
    adj = {v: [a for a in arcs if r.fractional(a)] for v, arcs in r.out.items()}
    state: dict[int, int] = {}
    for root in sorted(adj):
        if root in state or not adj[root]:
            continue
        state[root] = 0
        path_arcs: list[Arc] = []
        path_pos = {root: 0}
        stack = [(root, None, iter(adj[root]))]
        while stack:
            v, came, it = stack[-1]
            advanced = False
            for a in it:
                if came is not None and a.edge == came.edge:
                    continue
                w = a.head
                if w in path_pos:
                    i = path_pos[w]
                    return path_arcs[i:] + [a]
                if w not in state:
                    state[w] = 0
                    path_pos[w] = len(path_arcs) + 1
                    path_arcs.append(a)
                    stack.append((w, a, iter(adj[w])))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                del path_pos[v]
                if path_arcs:
                    path_arcs.pop()
    return None


def _any_cycle(r: ResidualView) -> list[Arc] | None:
    for first in sorted(r.arcs(), key=lambda a: (a.tail, a.head)):
        u, v = first.tail, first.head
        parent: dict[int, Arc] = {}
        seen = {v}
        queue = deque([v])
        while queue and u not in seen:
            x = queue.popleft()
            for a in r.out[x]:
                if a.edge == first.edge:
                    continue
                if a.head not in seen:
                    seen.add(a.head)
                    parent[a.head] = a
                    queue.append(a.head)
        if u in seen:
            back = []
            x = u
            while x != v:
                back.append(parent[x])
                x = parent[x].tail
            return [first] + back[::-1]
    return None


def _push(f: FlowState, cycle: list[Arc]) -> None:
    c = min(a.capacity for a in cycle)
    for a in cycle:
        f.flow[a.edge] += c if a.forward else -c


def cancel_cycles_counted(f: FlowState) -> tuple[FlowState, int]:
    """Cycle-cancel a copy of ``f``; also return the number of pushes."""
    f = f.copy()
    k = f.k
    limit = len(f.flow)
    pinned = sum(1 for x in f.flow.values() if x in (0, k))
    iterations = 0
    while True:
        cycle = find_augmenting_cycle(ResidualView(f))
        if cycle is None:
            break
        _push(f, cycle)
        iterations += 1
        now = sum(1 for x in f.flow.values() if x in (0, k))
        if now <= pinned:
            raise InvariantViolation(f"push did not pin an edge ({pinned} -> {now})")
        pinned = now
        if iterations > limit:
            raise InvariantViolation(f"cycle canceling exceeded |E| = {limit} iterations")
    _drop_saturated_circulations(f)
    return f, iterations


def cancel_cycles(f: FlowState) -> FlowState:
    return cancel_cycles_counted(f)[0]


def _drop_saturated_circulations(f: FlowState) -> None:
    # a directed cycle of flow-k edges is an isolated circulation; zero it
    k = f.k
    nxt = {u: v for (u, v), x in f.flow.items() if x == k}
    seen: set[int] = set()
    for start in list(nxt):
        if start in seen:
            continue
        trail = []
        v = start
        while v in nxt and v not in seen:
            seen.add(v)
            trail.append(v)
            v = nxt[v]
        if v in trail:
            cyc = trail[trail.index(v):]
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                f.flow[(a, b)] = 0


# ---------------------------------------------------------------------------
# decomposition


@dataclass
class Tree:
    vertices: list[int]
    edges: list[tuple[int, int]]
    roles: dict[int, str]

    def count(self, role: str) -> int:
        return sum(1 for r in self.roles.values() if r == role)


@dataclass
class TreeDecomposition:
    k: int
    trees: list[Tree]
    highways: list[list[int]]
    roles: dict[int, str] = field(default_factory=dict)


def decompose(f: FlowState) -> TreeDecomposition:
    """Split an acyclic flow into fractional trees and saturated highways."""
    inst, k = f.instance, f.k
    frac = [e for e, x in f.flow.items() if 0 < x < k]
    adj: dict[int, list[int]] = {}
    for u, v in frac:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)

    roles: dict[int, str] = {}
    for v in inst.vertices:
        if v in inst.sink_set:
            roles[v] = SINK
        elif v in inst.source_set:
            roles[v] = SOURCE
        elif v in adj:
            ins, outs = inst.pred[v], inst.succ[v]
            if len(ins) == 1 and f.flow[(ins[0], v)] == k:
                roles[v] = SOURCE_PORTAL
            elif len(outs) == 1 and f.flow[(v, outs[0])] == k:
                roles[v] = SINK_PORTAL
            else:
                roles[v] = NORMAL

    trees = []
    seen: set[int] = set()
    for root in sorted(adj):
        if root in seen:
            continue
        comp = []
        queue = deque([root])
        seen.add(root)
        while queue:
            x = queue.popleft()
            comp.append(x)
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        cset = set(comp)
        comp.sort()
        trees.append(
            Tree(
                vertices=comp,
                edges=sorted(e for e in frac if e[0] in cset),
                roles={v: roles[v] for v in comp},
            )
        )

    # every sink is a tree of its own; its in-edge is saturated
    for z in sorted(inst.sinks):
        trees.append(Tree(vertices=[z], edges=[], roles={z: SINK}))

    nxt = {u: v for (u, v), x in f.flow.items() if x == k}
    has_pred = set(nxt.values())
    highways = []
    for start in sorted(nxt):
        if start in has_pred:
            continue
        path = [start]
        while path[-1] in nxt:
            path.append(nxt[path[-1]])
        highways.append(path)
    return TreeDecomposition(k=k, trees=trees, highways=highways, roles=roles)


def structure_violations(f: FlowState, dec: TreeDecomposition) -> list[str]:
    """Check the forest, highway, sink and portal-balance properties."""
    inst, k = f.instance, f.k
    bad = []
    for t in dec.trees:
        if len(t.edges) != len(t.vertices) - 1:
            bad.append(f"tree at {t.vertices[0]} is not a tree")
        balance = t.count(SOURCE) + k * t.count(SOURCE_PORTAL) - k * t.count(SINK_PORTAL)
        if balance != 0:
            bad.append(f"tree at {t.vertices[0]}: supply minus portal capacity is {balance}")
        if len(t.vertices) > 1 and any(r == SINK for r in t.roles.values()):
            bad.append(f"tree at {t.vertices[0]} contains a sink")
    on_highway: dict[int, int] = {}
    saturated = {e for e, x in f.flow.items() if x == k}
    covered = set()
    for h in dec.highways:
        for a, b in zip(h, h[1:]):
            if (a, b) not in saturated:
                bad.append(f"highway step {a}->{b} is not saturated")
            covered.add((a, b))
        for v in h:
            if v in on_highway:
                bad.append(f"vertex {v} lies on two highways")
            on_highway[v] = 1
    if covered != saturated:
        bad.append(f"{len(saturated - covered)} saturated edges outside highways")
    singletons = {t.vertices[0] for t in dec.trees if len(t.vertices) == 1}
    for z in inst.sinks:
        if z not in singletons:
            bad.append(f"sink {z} is not a singleton tree")
        if f.inflow(z) != k:
            bad.append(f"sink {z} receives {f.inflow(z)} != {k}")
    return bad


def dump_trees(dec: TreeDecomposition) -> str:
    lines = []
    for i, t in enumerate(dec.trees):
        body = " ".join(f"{v}:{ROLE_LETTER[t.roles[v]]}" for v in t.vertices)
        lines.append(f"tree {i} {body}")
    for h in dec.highways:
        lines.append("highway " + " ".join(map(str, h)))
    return "\n".join(lines) + ("\n" if lines else "")
