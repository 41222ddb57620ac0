"""Gammoid instances: representation, text format, normalization, independence.

A gammoid is given by a digraph with marked sources and sinks. A set of
sources is independent when it can be linked to distinct sinks by
vertex-disjoint directed paths.

Instance text format (one record per line, 1-based integer ids)::

    # comment
    p gammoid <n> <m>     header; vertices are 1..n, m arc lines follow
    a <u> <v>             arc u -> v
    s <v>                 v is a source
    t <v>                 v is a sink

Parallel arcs are collapsed to one and self-loops are dropped; neither
affects which source sets admit vertex-disjoint paths.
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import cached_property

from .errors import ParseError
from .maxflow import vertex_capacitated_flow


@dataclass(frozen=True)
class GammoidInstance:
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    sources: tuple[int, ...]
    sinks: tuple[int, ...]
    dummies: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("duplicate edges")
        for u, v in self.edges:
            if u not in vset or v not in vset:
                raise ValueError(f"edge ({u},{v}) uses an undeclared vertex")
            if u == v:
                raise ValueError(f"self-loop at {u}")
        for v in self.sources + self.sinks:
            if v not in vset:
                raise ValueError(f"undeclared terminal {v}")
        if set(self.sources) & set(self.sinks):
            raise ValueError("a vertex is both source and sink")
        if not self.dummies <= set(self.sources):
            raise ValueError("dummy flags on non-sources")

    @cached_property
    def succ(self) -> dict[int, list[int]]:
        out = {v: [] for v in self.vertices}
        for u, v in self.edges:
            out[u].append(v)
        return out

    @cached_property
    def pred(self) -> dict[int, list[int]]:
        inn = {v: [] for v in self.vertices}
        for u, v in self.edges:
            inn[v].append(u)
        return inn

    @cached_property
    def source_set(self) -> frozenset[int]:
        return frozenset(self.sources)

    @cached_property
    def sink_set(self) -> frozenset[int]:
        return frozenset(self.sinks)

    @property
    def real_sources(self) -> tuple[int, ...]:
        return tuple(s for s in self.sources if s not in self.dummies)

    def is_dummy(self, s: int) -> bool:
        return s in self.dummies

    def out_degree(self, v: int) -> int:
        return len(self.succ[v])

    def in_degree(self, v: int) -> int:
        return len(self.pred[v])


@dataclass(frozen=True)
class VertexMap:
    """Correspondence between original and normalized vertex ids."""

    forward: dict[int, tuple[int, ...]]
    backward: dict[int, int]

    @classmethod
    def identity(cls, inst: GammoidInstance) -> VertexMap:
        return cls({v: (v,) for v in inst.vertices}, {v: v for v in inst.vertices})


# ---------------------------------------------------------------------------
# text format


def parse_instance(text: str) -> GammoidInstance:
    header = None
    edges: dict[tuple[int, int], None] = {}
    arc_lines = 0
    sources: dict[int, None] = {}
    sinks: dict[int, None] = {}

    def vertex(tok, lineno):
        try:
            v = int(tok)
        except ValueError:
            raise ParseError(f"bad vertex id {tok!r}", lineno) from None
        if not 1 <= v <= header[0]:
            raise ParseError(f"undeclared vertex {v}", lineno)
        return v

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0]
        if header is None:
            if kind != "p" or len(tok) != 4 or tok[1] != "gammoid":
                raise ParseError("expected header 'p gammoid <n> <m>'", lineno)
            try:
                header = (int(tok[2]), int(tok[3]))
            except ValueError:
                raise ParseError("non-integer header field", lineno) from None
            if header[0] < 0 or header[1] < 0:
                raise ParseError("negative header field", lineno)
            continue
        if kind == "p":
            raise ParseError("duplicate header", lineno)
        if kind == "a":
            if len(tok) != 3:
                raise ParseError("arc line needs two endpoints", lineno)
            u, v = vertex(tok[1], lineno), vertex(tok[2], lineno)
            arc_lines += 1
            if u != v:
                edges[(u, v)] = None
        elif kind in ("s", "t"):
            if len(tok) != 2:
                raise ParseError(f"'{kind}' line needs one vertex", lineno)
            (sources if kind == "s" else sinks)[vertex(tok[1], lineno)] = None
        else:
            raise ParseError(f"unknown record type {kind!r}", lineno)

    if header is None:
        raise ParseError("missing header")
    if arc_lines != header[1]:
        raise ParseError(f"header declares {header[1]} arcs, found {arc_lines}")
    both = set(sources) & set(sinks)
    if both:
        raise ParseError(f"vertex {min(both)} declared both source and sink")
    return GammoidInstance(
        vertices=tuple(range(1, header[0] + 1)),
        edges=tuple(edges),
        sources=tuple(sources),
        sinks=tuple(sinks),
    )


def serialize_instance(inst: GammoidInstance) -> str:
    """Canonical text form; ``parse_instance`` inverts it exactly."""
    if inst.vertices != tuple(range(1, len(inst.vertices) + 1)):
        raise ValueError("serialization needs vertex ids 1..n")
    lines = [f"p gammoid {len(inst.vertices)} {len(inst.edges)}"]
    lines += [f"a {u} {v}" for u, v in inst.edges]
    lines += [f"s {s}" for s in inst.sources]
    lines += [f"t {z}" for z in inst.sinks]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# normalization


class _Builder:
    """Mutable edge list used while normalizing."""

    def __init__(self, inst: GammoidInstance):
        self.vertices = list(inst.vertices)
        self.edges = list(inst.edges)
        self.sources = list(inst.sources)
        self.sinks = list(inst.sinks)
        self.next_id = max(self.vertices, default=0) + 1
        self.origin = {v: v for v in self.vertices}

    def fresh(self, origin: int) -> int:
        v = self.next_id
        self.next_id += 1
        self.vertices.append(v)
        self.origin[v] = self.origin[origin]
        return v

    def degrees(self):
        indeg, outdeg = defaultdict(int), defaultdict(int)
        for u, v in self.edges:
            outdeg[u] += 1
            indeg[v] += 1
        return indeg, outdeg

    def move(self, old: int, new: int, *, incoming: bool, outgoing: bool) -> None:
        for i, (u, v) in enumerate(self.edges):
            if outgoing and u == old:
                self.edges[i] = (new, v)
            elif incoming and v == old:
                self.edges[i] = (u, new)


def normalize(inst: GammoidInstance) -> tuple[GammoidInstance, VertexMap]:
    """Rewrite ``inst`` so that the structural assumptions of the reduction hold.

    Afterwards every source has in-degree 0 and out-degree 1, every sink has
    in-degree 1 and out-degree 0, every vertex has in-degree 1 or out-degree
    1, and no two edges are antiparallel. Source and sink ids are kept;
    fresh vertices get ids above the current maximum in creation order.
    """
    if not inst.sinks:
        raise ValueError("instance has no sinks")
    b = _Builder(inst)

    # 1. subdivide one edge of every 2-cycle
    present = set(b.edges)
    for i, (u, v) in enumerate(list(b.edges)):
        if u > v and (v, u) in present:
            w = b.fresh(u)
            b.edges[i] = (u, w)
            b.edges.append((w, v))

    # 2. private out-node for sources
    indeg, outdeg = b.degrees()
    for s in b.sources:
        if indeg[s] > 0 or outdeg[s] != 1:
            w = b.fresh(s)
            b.move(s, w, incoming=True, outgoing=True)
            b.edges.append((s, w))
    # 3. private in-node for sinks
    indeg, outdeg = b.degrees()
    for z in b.sinks:
        if indeg[z] != 1 or outdeg[z] > 0:
            w = b.fresh(z)
            b.move(z, w, incoming=True, outgoing=True)
            b.edges.append((w, z))

    # 4. split vertices where neither degree is 1
    indeg, outdeg = b.degrees()
    terminals = set(b.sources) | set(b.sinks)
    for v in list(b.vertices):
        if v in terminals:
            continue
        if indeg[v] != 1 and outdeg[v] != 1:
            w = b.fresh(v)
            b.move(v, w, incoming=False, outgoing=True)
            b.edges.append((v, w))

    out = GammoidInstance(
        vertices=tuple(b.vertices),
        edges=tuple(b.edges),
        sources=tuple(b.sources),
        sinks=tuple(b.sinks),
        dummies=inst.dummies,
    )
    forward: dict[int, list[int]] = defaultdict(list)
    for v in b.vertices:
        forward[b.origin[v]].append(v)
    vmap = VertexMap({v: tuple(forward[v]) for v in inst.vertices}, dict(b.origin))
    return out, vmap


def normalization_violations(inst: GammoidInstance) -> list[str]:
    """Ways in which ``inst`` breaks the normalized-form assumptions."""
    bad = []
    es = set(inst.edges)
    for u, v in inst.edges:
        if (v, u) in es and u < v:
            bad.append(f"antiparallel pair {u}<->{v}")
    for v in inst.vertices:
        i, o = inst.in_degree(v), inst.out_degree(v)
        if v in inst.source_set:
            if (i, o) != (0, 1):
                bad.append(f"source {v} has in/out degree {i}/{o}")
        elif v in inst.sink_set:
            if (i, o) != (1, 0):
                bad.append(f"sink {v} has in/out degree {i}/{o}")
        elif i != 1 and o != 1:
            bad.append(f"vertex {v} has in/out degree {i}/{o}")
    return bad


def is_normalized(inst: GammoidInstance) -> bool:
    return not normalization_violations(inst)


# ---------------------------------------------------------------------------
# independence


def _linkage(inst: GammoidInstance, sources: Iterable[int]) -> tuple[int, dict]:
    supply = {s: 1 for s in sources}
    demand = {z: 1 for z in inst.sinks}
    return vertex_capacitated_flow(inst.vertices, inst.edges, 1, supply, demand)


def is_independent(inst: GammoidInstance, ys: Iterable[int]) -> bool:
    """True iff the sources ``ys`` link to distinct sinks by vertex-disjoint paths."""
    ys = set(ys)
    if not ys <= inst.source_set:
        raise ValueError(f"not sources: {sorted(ys - inst.source_set)}")
    if not ys:
        return True
    value, _ = _linkage(inst, ys)
    return value == len(ys)


def rank(inst: GammoidInstance) -> int:
    if not inst.sources:
        return 0
    return _linkage(inst, inst.sources)[0]
