"""Per-tree recursive partitioning of sources into parts of size <= 2k-2.

Each tree of the acyclic flow is processed on its own. A step locates a
branching vertex ``v`` of the tree's backbone, picks one or two subtrees
hanging off ``v`` that each hold a single sink portal, and either emits a
part built from nearby sources or rewires the tree (reattaching sources to
``v``, retiring a source portal, or merging two sink portals into a new
virtual one). Every step removes at least one sink portal.
"""

from __future__ import annotations

import os
from collections import Counter, deque
from dataclasses import dataclass, field

from .acyclic import (
    NORMAL,
    ROLE_LETTER,
    SINK_PORTAL,
    SOURCE,
    SOURCE_PORTAL,
    Tree,
    cancel_cycles_counted,
    decompose,
)
from .errors import InvariantViolation, NoCaseApplies
from .flow import coloring_number, feasible_flow, pad_with_dummies
from .instance import GammoidInstance, normalization_violations
from .maxflow import vertex_capacitated_flow

CASE_TAGS = ("BaseA", "BaseB", "1a", "1b", "2a", "2b", "2c", "3a", "3b")


def debug_checks_enabled() -> bool:
    return os.environ.get("GAMRED_DEBUG_ASSERT") == "1"


# ---------------------------------------------------------------------------
# tree state


@dataclass
class TreeState:
    k: int
    roles: dict[int, str]
    succ: dict[int, set[int]]
    pred: dict[int, set[int]]
    virtual: set[int] = field(default_factory=set)
    next_id: int = 0

    @classmethod
    def from_tree(cls, tree: Tree, k: int, next_id: int) -> TreeState:
        succ = {v: set() for v in tree.vertices}
        pred = {v: set() for v in tree.vertices}
        for u, v in tree.edges:
            succ[u].add(v)
            pred[v].add(u)
        return cls(k, dict(tree.roles), succ, pred, set(), next_id)

    def copy(self) -> TreeState:
        return TreeState(
            self.k,
            dict(self.roles),
            {v: set(s) for v, s in self.succ.items()},
            {v: set(s) for v, s in self.pred.items()},
            set(self.virtual),
            self.next_id,
        )

    @property
    def vertices(self) -> list[int]:
        return sorted(self.roles)

    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u, ws in self.succ.items() for v in ws)

    def neighbors(self, v: int) -> set[int]:
        return self.succ[v] | self.pred[v]

    def having(self, role: str) -> list[int]:
        return sorted(v for v, r in self.roles.items() if r == role)

    @property
    def sources(self) -> list[int]:
        return self.having(SOURCE)

    @property
    def sink_portals(self) -> list[int]:
        return self.having(SINK_PORTAL)

    @property
    def source_portals(self) -> list[int]:
        return self.having(SOURCE_PORTAL)

    def add_edge(self, u: int, v: int) -> None:
        self.succ[u].add(v)
        self.pred[v].add(u)

    def remove_vertex(self, v: int) -> None:
        for w in self.succ.pop(v):
            self.pred[w].discard(v)
        for w in self.pred.pop(v):
            self.succ[w].discard(v)
        del self.roles[v]
        self.virtual.discard(v)

    def add_virtual_sink_portal(self, parent: int) -> int:
        z = self.next_id
        self.next_id += 1
        self.roles[z] = SINK_PORTAL
        self.succ[z] = set()
        self.pred[z] = set()
        self.virtual.add(z)
        self.add_edge(parent, z)
        return z

    def component(self, start: int, without: int) -> set[int]:
        """Vertices reachable from ``start`` in the tree minus ``without``."""
        seen = {start}
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in self.neighbors(x):
                if y != without and y not in seen:
                    seen.add(y)
                    queue.append(y)
        return seen

    def path(self, u: int, w: int) -> list[int]:
        """The unique tree path from ``u`` to ``w``, both included."""
        parent = {u: None}
        queue = deque([u])
        while queue:
            x = queue.popleft()
            if x == w:
                break
            for y in self.neighbors(x):
                if y not in parent:
                    parent[y] = x
                    queue.append(y)
        out = [w]
        while out[-1] != u:
            out.append(parent[out[-1]])
        return out[::-1]

    def dump(self) -> str:
        body = " ".join(
            f"{v}:{ROLE_LETTER[r]}{'*' if v in self.virtual else ''}"
            for v, r in sorted(self.roles.items())
        )
        arcs = " ".join(f"{u}->{v}" for u, v in self.edges())
        return f"k={self.k}\nvertices {body}\nedges {arcs}"


# ---------------------------------------------------------------------------
# backbone


@dataclass
class BackboneView:
    vertices: set[int]
    out_degree: dict[int, int]
    contact: dict[int, int]
    depth: dict[int, int]
    hanging: dict[int, list[int]]
    branching: list[int]
    portal_count: dict[tuple[int, int], int]

    def sources_on(self, path) -> list[int]:
        """Sources in hanging trees attached to the given backbone vertices."""
        out = []
        for w in path:
            out.extend(self.hanging.get(w, ()))
        return sorted(out)


def backbone(t: TreeState) -> BackboneView:
    portals = set(t.sink_portals)

    # minimal subtree spanning the sink portals
    if len(portals) <= 1:
        bb = set(portals)
    else:
        bb = set(t.roles)
        degree = {v: len(t.neighbors(v)) for v in bb}
        queue = deque(v for v in bb if degree[v] <= 1 and v not in portals)
        while queue:
            x = queue.popleft()
            if x not in bb:
                continue
            bb.discard(x)
            for y in t.neighbors(x):
                if y in bb:
                    degree[y] -= 1
                    if degree[y] <= 1 and y not in portals:
                        queue.append(y)

    out_degree = {v: sum(1 for w in t.succ[v] if w in bb) for v in bb}

    contact: dict[int, int] = {}
    depth: dict[int, int] = {}
    queue = deque()
    for b in sorted(bb):
        contact[b] = b
        depth[b] = 0
        queue.append(b)
    while queue:
        x = queue.popleft()
        for y in t.neighbors(x):
            if y not in contact and y not in bb:
                contact[y] = contact[x]
                depth[y] = depth[x] + 1
                queue.append(y)
    hanging: dict[int, list[int]] = {}
    for s in t.sources:
        if s in contact:
            hanging.setdefault(contact[s], []).append(s)

    # sink portals per component of T - v, keyed by (v, neighbour)
    portal_count: dict[tuple[int, int], int] = {}
    branching = []
    if bb:
        root = min(t.roles)
        parent = {root: None}
        order = [root]
        for x in order:
            for y in sorted(t.neighbors(x)):
                if y not in parent:
                    parent[y] = x
                    order.append(y)
        below = dict.fromkeys(order, 0)
        for x in reversed(order):
            below[x] += 1 if x in portals else 0
            if parent[x] is not None:
                below[parent[x]] += below[x]
        total = below[root]
        for v in sorted(bb):
            singles = 0
            for u in t.neighbors(v):
                c = below[u] if parent.get(u) == v else total - below[v]
                portal_count[(v, u)] = c
                singles += c == 1
            if singles >= (1 if v in portals else 2):
                branching.append(v)

    return BackboneView(
        vertices=bb,
        out_degree=out_degree,
        contact=contact,
        depth=depth,
        hanging=hanging,
        branching=branching,
        portal_count=portal_count,
    )


def backbone_violations(t: TreeState, b: BackboneView) -> list[str]:
    """Source portals sit on the backbone with out-degree >= 2 there, no
    source is on the backbone, and hanging trees point at their contact."""
    if len(t.sink_portals) < 2:
        return []
    bad = []
    for p in t.source_portals:
        if p not in b.vertices:
            bad.append(f"source portal {p} is off the backbone")
        elif b.out_degree[p] < 2:
            bad.append(f"source portal {p} has backbone out-degree {b.out_degree[p]}")
    for s in t.sources:
        if s in b.vertices:
            bad.append(f"source {s} lies on the backbone")
    for u, x in t.edges():
        if u in b.vertices and x in b.vertices:
            continue
        if b.depth.get(x, -1) != b.depth.get(u, -1) - 1:
            bad.append(f"hanging edge {u}->{x} points away from contact {b.contact.get(u)}")
    return bad


# ---------------------------------------------------------------------------
# case selection


@dataclass
class Side:
    """A subtree of T - v holding exactly one sink portal."""

    index: int
    vertices: set[int]
    portal: int
    path: list[int]

    def sources(self, t: TreeState) -> list[int]:
        return sorted(x for x in self.vertices if t.roles[x] == SOURCE)


@dataclass
class Case:
    tag: str
    v: int | None = None
    sides: list[Side] = field(default_factory=list)
    side: Side | None = None
    y: int | None = None
    part: list[int] = field(default_factory=list)


def _fail(msg: str, t: TreeState, exc=InvariantViolation):
    raise exc(msg, t.dump())


def select_case(t: TreeState, b: BackboneView) -> Case:
    """First applicable case: base cases, then 1a, 1b, 2a, 2b, 2c, 3a, 3b."""
    k = t.k
    sources = t.sources
    if not sources:
        return Case("BaseA")
    if len(sources) <= 2 * k - 2 and not t.source_portals:
        return Case("BaseB", part=sources)
    if len(t.sink_portals) < 2:
        _fail("no base case applies but fewer than two sink portals", t, NoCaseApplies)
    if not b.branching:
        _fail("no branching vertex", t, NoCaseApplies)

    v = b.branching[0]
    singles = []
    for u in t.neighbors(v):
        if b.portal_count[(v, u)] == 1:
            comp = t.component(u, v)
            (z,) = [x for x in comp if t.roles[x] == SINK_PORTAL]
            singles.append((z, comp))
    singles.sort()
    v_is_sink_portal = t.roles[v] == SINK_PORTAL
    sides = []
    for i, (z, comp) in enumerate(singles[: 1 if v_is_sink_portal else 2], start=1):
        sides.append(Side(i, comp, z, t.path(v, z)))
    if len(sides) < (1 if v_is_sink_portal else 2):
        _fail(f"branching vertex {v} lacks single-portal subtrees", t, NoCaseApplies)

    for side in sides:
        on_backbone = {x for x in side.vertices if x in b.vertices}
        if on_backbone != set(side.path[1:]):
            _fail(f"subtree of portal {side.portal} meets the backbone off its path", t)

    # Case 1: a source portal at v or in one of the sides
    if t.roles[v] == SOURCE_PORTAL:
        if any(t.roles[x] == SOURCE_PORTAL for x in sides[0].vertices):
            _fail(f"case 1a at {v}: second source portal in T1", t)
        return Case("1a", v=v, sides=sides, side=sides[0])
    for side in sides:
        portals = [x for x in side.vertices if t.roles[x] == SOURCE_PORTAL]
        if not portals:
            continue
        if any(x not in side.path for x in portals):
            _fail("source portal off the backbone", t)
        if len(portals) != 1:
            _fail(f"{len(portals)} source portals between {v} and {side.portal}", t)
        forks = [x for x in side.path[1:] if b.out_degree[x] >= 2]
        if forks != portals or b.out_degree[portals[0]] != 2:
            _fail(f"source portal {portals[0]} is not the unique fork on its path", t)
        return Case("1b", v=v, sides=sides, side=side)

    # Case 2: a vertex y of backbone out-degree 2 in one of the sides
    forks = []
    for side in sides:
        ys = [x for x in side.path[1:] if b.out_degree[x] >= 2]
        if len(ys) > 1 or any(b.out_degree[x] > 2 for x in ys):
            _fail(f"path to {side.portal} has forks {ys}", t)
        if ys:
            forks.append((side, ys[0]))
    if forks:
        for side, y in forks:
            tail = side.path[side.path.index(y):]
            part = b.sources_on(tail)
            if len(part) <= 2 * k - 2:
                return Case("2a", v=v, sides=sides, side=side, y=y, part=part)
        for side, y in forks:
            part = b.sources_on([y])
            if len(part) == k:
                return Case("2b", v=v, sides=sides, side=side, y=y, part=part)
        for side, y in forks:
            tail = side.path[side.path.index(y) + 1 :]
            part = b.sources_on(tail)
            if len(part) == k:
                return Case("2c", v=v, sides=sides, side=side, y=y, part=part)
        _fail("case 2 gap: no sub-case fits", t)

    # Case 3: both sides are directed paths v -> portal
    if v_is_sink_portal:
        _fail(f"case 3 reached with sink portal {v} as branching vertex", t)
    for side in sides:
        for a, c in zip(side.path, side.path[1:]):
            if c not in t.succ[a]:
                _fail(f"path {v}..{side.portal} is not directed outward", t)
    for side in sides:
        if len(side.sources(t)) == k:
            return Case("3a", v=v, sides=sides, side=side, part=side.sources(t))
    part = sorted(sides[0].sources(t) + sides[1].sources(t))
    for side in sides:
        if len(side.sources(t)) >= k:
            _fail(f"case 3b with {len(side.sources(t))} sources beyond {v}", t)
    return Case("3b", v=v, sides=sides, part=part)


# ---------------------------------------------------------------------------
# mutations


def _excise(t: TreeState, side: Side, part: list[int], v: int) -> None:
    """Delete a side; its sources outside ``part`` get an edge into ``v``."""
    keep = set(part)
    moved = [x for x in side.sources(t) if x not in keep]
    for x in side.vertices:
        t.remove_vertex(x)
    for s in moved:
        t.roles[s] = SOURCE
        t.succ[s] = set()
        t.pred[s] = set()
        t.add_edge(s, v)


def apply_case(t: TreeState, case: Case) -> tuple[TreeState | None, list[int] | None]:
    """Perform the mutation for ``case``; returns (next state or None, part or None)."""
    tag = case.tag
    if tag == "BaseA":
        return None, None
    if tag == "BaseB":
        return None, list(case.part)
    t = t.copy()
    v = case.v
    if tag == "1a":
        _excise(t, case.side, [], v)
        t.roles[v] = NORMAL
        return t, None
    if tag == "1b":
        _excise(t, case.side, [], v)
        return t, None
    if tag in ("2a", "2b", "2c", "3a"):
        _excise(t, case.side, case.part, v)
        return t, list(case.part)
    if tag == "3b":
        for side in case.sides:
            _excise(t, side, side.sources(t), v)
        t.add_virtual_sink_portal(v)
        return t, list(case.part)
    raise ValueError(f"unknown case {tag}")


def check_tree_flow(t: TreeState) -> bool:
    """Whether sources (1 unit) and source portals (k units) can all drain
    into sink portals (at most k each) with at most k units per vertex."""
    k = t.k
    supply = {}
    for v, r in t.roles.items():
        if r == SOURCE:
            supply[v] = 1
        elif r == SOURCE_PORTAL:
            supply[v] = k
    need = sum(supply.values())
    if need == 0:
        return True
    demand = {z: k for z in t.sink_portals}
    value, _ = vertex_capacitated_flow(t.roles, t.edges(), k, supply, demand)
    return value == need


def reduce_tree(
    t: TreeState, *, check_flow: bool = False, stats: Counter | None = None
) -> list[list[int]]:
    """Run the recursion on one tree; returns the parts it emits."""
    parts = []
    if check_flow and not check_tree_flow(t):
        _fail("initial tree has no feasible flow", t)
    budget = len(t.sink_portals) + len(t.roles) + 1
    while True:
        b = backbone(t)
        if check_flow:
            bad = backbone_violations(t, b)
            if bad:
                _fail("; ".join(bad), t)
        case = select_case(t, b)
        if stats is not None:
            stats[case.tag] += 1
        nxt, part = apply_case(t, case)
        if part:
            parts.append(part)
        if nxt is None:
            return parts
        if len(nxt.sink_portals) >= len(t.sink_portals):
            _fail(f"case {case.tag} did not remove a sink portal", t)
        budget -= 1
        if budget < 0:
            _fail("recursion depth bound exceeded", t)
        if check_flow:
            if stats is not None:
                stats["tree_flow_checks"] += 1
            if not check_tree_flow(nxt):
                raise InvariantViolation(
                    f"no feasible tree flow after case {case.tag}",
                    t.dump() + "\n--- after ---\n" + nxt.dump(),
                )
        t = nxt


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class PartitionReduction:
    parts: list[list[int]]
    k: int
    dummy_sources: list[int] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def bound(self) -> int:
        return max(1, 2 * self.k - 2)

    @property
    def max_part_size(self) -> int:
        return max((len(p) for p in self.parts), default=0)

    def real_parts(self) -> list[list[int]]:
        """Parts with dummy sources dropped; parts left empty vanish."""
        dummies = set(self.dummy_sources)
        out = [[s for s in p if s not in dummies] for p in self.parts]
        return [p for p in out if p]

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "bound": self.bound,
            "parts": [list(p) for p in self.parts],
            "dummy_sources": list(self.dummy_sources),
            "stats": dict(self.stats),
        }

    @classmethod
    def from_json(cls, data: dict) -> PartitionReduction:
        return cls(
            parts=[list(map(int, p)) for p in data["parts"]],
            k=int(data["k"]),
            dummy_sources=[int(d) for d in data.get("dummy_sources", [])],
            stats=dict(data.get("stats", {})),
        )


@dataclass
class PipelineResult:
    """Everything the pipeline built on the way to a reduction."""

    reduction: PartitionReduction
    padded: GammoidInstance
    flow: object
    decomposition: object
    cancel_iterations: int


def run_pipeline(inst: GammoidInstance, check_flow: bool | None = None) -> PipelineResult:
    bad = normalization_violations(inst)
    if bad:
        raise ValueError("instance is not normalized: " + "; ".join(bad[:3]))
    if check_flow is None:
        check_flow = debug_checks_enabled()

    k = coloring_number(inst)
    f = feasible_flow(inst, k)
    padded, f = pad_with_dummies(inst, k, f)
    f, iterations = cancel_cycles_counted(f)
    if iterations > len(padded.edges):
        raise InvariantViolation(f"{iterations} cancel iterations > |E|")
    dec = decompose(f)

    counts: Counter = Counter()
    parts: list[list[int]] = []
    if k == 1:
        parts = [[s] for s in padded.sources]
    else:
        next_id = max(padded.vertices) + 1
        for tree in dec.trees:
            t = TreeState.from_tree(tree, k, next_id)
            parts.extend(reduce_tree(t, check_flow=check_flow, stats=counts))

    stats = {tag: counts.get(tag, 0) for tag in CASE_TAGS}
    stats.update(
        max_part_size=max((len(p) for p in parts), default=0),
        trees=len(dec.trees),
        highways=len(dec.highways),
        cancel_iterations=iterations,
        dummies=len(padded.dummies),
        tree_flow_checks=counts.get("tree_flow_checks", 0),
        decomposition="1,2-2/k" if k >= 2 else "1,1",
    )
    pr = PartitionReduction(
        parts=parts, k=k, dummy_sources=sorted(padded.dummies), stats=stats
    )
    return PipelineResult(pr, padded, f, dec, iterations)


def partition_reduction(inst: GammoidInstance, check_flow: bool | None = None) -> PartitionReduction:
    """Partition the sources of a normalized gammoid into parts of size at
    most ``max(1, 2k-2)`` such that every transversal is independent."""
    return run_pipeline(inst, check_flow).reduction
