"""Coloring the intersection of a gammoid with a partition matroid.

The gammoid is first replaced by a partition matroid N via the partition
reduction. The intersection of two capacity-1 partition matroids is the
matching structure of a bipartite multigraph (N-parts on the left, parts of
the second matroid on the right, one edge per element), so a proper edge
coloring of that graph is a coloring of the intersection. Every class is
also independent in the gammoid because N is a weak map of it.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

from .errors import InvariantViolation, ListTooSmall, ParseError, UniverseMismatch
from .instance import GammoidInstance, is_independent, is_normalized, normalize
from .reduce import PartitionReduction, partition_reduction


@dataclass
class PartitionMatroid:
    parts: list[list[int]]

    def __post_init__(self):
        seen = set()
        for part in self.parts:
            for e in part:
                if e in seen:
                    raise ValueError(f"element {e} lies in two parts")
                seen.add(e)

    @property
    def universe(self) -> set[int]:
        return {e for p in self.parts for e in p}

    @property
    def max_part(self) -> int:
        return max((len(p) for p in self.parts), default=0)

    def is_independent(self, ys) -> bool:
        ys = set(ys)
        return all(len(ys.intersection(p)) <= 1 for p in self.parts)


def parse_partition_matroid(text: str) -> PartitionMatroid:
    """One part per ``x <elem> <elem> ...`` line; ``#`` starts a comment."""
    parts = []
    seen: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] != "x":
            raise ParseError(f"unknown record type {tok[0]!r}", lineno)
        part = []
        for t in tok[1:]:
            try:
                e = int(t)
            except ValueError:
                raise ParseError(f"bad element {t!r}", lineno) from None
            if e in seen:
                raise ParseError(f"element {e} already in the part on line {seen[e]}", lineno)
            seen[e] = lineno
            part.append(e)
        if not part:
            raise ParseError("empty part", lineno)
        parts.append(part)
    return PartitionMatroid(parts)


def serialize_partition_matroid(m: PartitionMatroid) -> str:
    return "".join("x " + " ".join(map(str, p)) + "\n" for p in m.parts)


def parse_lists(data: Mapping) -> dict[int, list[int]]:
    """Color lists from a JSON object ``{"<elem>": [colors...]}``."""
    out = {}
    for key, colors in data.items():
        try:
            out[int(key)] = sorted({int(c) for c in colors})
        except (TypeError, ValueError):
            raise ParseError(f"bad list entry for element {key!r}") from None
    return out


@dataclass
class ElementBigraph:
    """Bipartite multigraph: element ``e`` joins ``left[e]`` to ``right[e]``."""

    elements: list[int]
    left: dict[int, int]
    right: dict[int, int]

    @classmethod
    def from_parts(cls, left_parts, right_parts) -> ElementBigraph:
        left = {e: i for i, p in enumerate(left_parts) for e in p}
        right = {e: i for i, p in enumerate(right_parts) for e in p}
        if set(left) != set(right):
            raise UniverseMismatch("the two partitions cover different elements")
        return cls(sorted(left), left, right)

    @property
    def max_degree(self) -> int:
        deg: dict[tuple[str, int], int] = {}
        for e in self.elements:
            for key in (("l", self.left[e]), ("r", self.right[e])):
                deg[key] = deg.get(key, 0) + 1
        return max(deg.values(), default=0)

    def is_proper(self, colors: Mapping[int, int]) -> bool:
        seen = set()
        for e in self.elements:
            for key in (("l", self.left[e]), ("r", self.right[e])):
                if (key, colors[e]) in seen:
                    return False
                seen.add((key, colors[e]))
        return True


@dataclass
class ColorAssignment:
    colors: dict[int, int]
    lists: dict[int, list[int]] | None = None
    stats: dict = field(default_factory=dict)

    def classes(self) -> list[list[int]]:
        by: dict[int, list[int]] = {}
        for e, c in self.colors.items():
            by.setdefault(c, []).append(e)
        return [sorted(by[c]) for c in sorted(by)]

    @property
    def color_count(self) -> int:
        return len(set(self.colors.values()))

    def to_json(self) -> dict:
        out = {"colors": self.color_count}
        out.update(self.stats)
        out["classes"] = self.classes()
        out["assignment"] = {str(e): c for e, c in sorted(self.colors.items())}
        return out


# ---------------------------------------------------------------------------
# bipartite edge coloring


def konig_edge_color(g: ElementBigraph) -> ColorAssignment:
    """Proper edge coloring with exactly max-degree colors, numbered from 1."""
    delta = g.max_degree
    at_left: dict[int, dict[int, int]] = {}
    at_right: dict[int, dict[int, int]] = {}
    color: dict[int, int] = {}

    def free(table, v):
        used = table.get(v, {})
        return next(c for c in range(1, delta + 1) if c not in used)

    for e in g.elements:
        a, b = g.left[e], g.right[e]
        alpha = free(at_left, a)
        beta = free(at_right, b)
        if alpha in at_right.get(b, {}):
            # swap alpha/beta along the alternating path that starts at b
            path = []
            side, v, c = "r", b, alpha
            while True:
                table = at_right if side == "r" else at_left
                f = table.get(v, {}).get(c)
                if f is None:
                    break
                path.append(f)
                side, v = ("l", g.left[f]) if side == "r" else ("r", g.right[f])
                c = beta if c == alpha else alpha
            for f in path:
                del at_left[g.left[f]][color[f]]
                del at_right[g.right[f]][color[f]]
            for f in path:
                color[f] = beta if color[f] == alpha else alpha
                at_left[g.left[f]][color[f]] = f
                at_right[g.right[f]][color[f]] = f
        color[e] = alpha
        at_left.setdefault(a, {})[alpha] = e
        at_right.setdefault(b, {})[alpha] = e

    if not g.is_proper(color):
        raise InvariantViolation("edge coloring is not proper")
    used = len(set(color.values()))
    if g.elements and used != delta:
        raise InvariantViolation(f"edge coloring used {used} colors, max degree {delta}")
    return ColorAssignment(color)


def _kernel(g: ElementBigraph, edges: list[int], rank: Mapping[int, int]) -> set[int]:
    """Stable matching among ``edges``: left ends prefer low ``rank``, right
    ends prefer high ``rank``. Every edge left out has a matched neighbour
    preferred at a shared endpoint."""
    prefs: dict[int, list[int]] = {}
    for e in edges:
        prefs.setdefault(g.left[e], []).append(e)
    for lst in prefs.values():
        lst.sort(key=lambda e: rank[e], reverse=True)  # pop() yields the best
    held: dict[int, int] = {}
    free = sorted(prefs)
    while free:
        u = free.pop()
        if not prefs[u]:
            continue
        e = prefs[u].pop()
        w = g.right[e]
        cur = held.get(w)
        if cur is None:
            held[w] = e
        elif rank[e] > rank[cur]:
            held[w] = e
            free.append(g.left[cur])
        else:
            free.append(u)
    return set(held.values())


def galvin_list_color(g: ElementBigraph, lists: Mapping[int, list[int]]) -> ColorAssignment:
    """Color every element from its own list; lists of size max-degree suffice."""
    delta = g.max_degree
    for e in g.elements:
        size = len(set(lists.get(e, ())))
        if size < delta:
            raise ListTooSmall(e, size, delta)
    rank = konig_edge_color(g).colors
    remaining = {e: set(lists[e]) for e in g.elements}
    color: dict[int, int] = {}
    while remaining:
        alpha = min(c for cs in remaining.values() for c in cs)
        pool = sorted(e for e, cs in remaining.items() if alpha in cs)
        kernel = _kernel(g, pool, rank)
        for e in pool:
            if e in kernel:
                color[e] = alpha
                del remaining[e]
            else:
                remaining[e].discard(alpha)
                if not remaining[e]:
                    raise InvariantViolation(f"list of element {e} ran dry")
    if not g.is_proper(color):
        raise InvariantViolation("list coloring is not proper")
    return ColorAssignment(color, {e: sorted(set(lists[e])) for e in g.elements})


# ---------------------------------------------------------------------------
# gammoid x partition matroid


def _reduce(inst: GammoidInstance, m2: PartitionMatroid) -> tuple[PartitionReduction, list]:
    if m2.universe != set(inst.real_sources):
        raise UniverseMismatch(
            "partition matroid elements differ from the gammoid's sources"
        )
    work = inst if is_normalized(inst) else normalize(inst)[0]
    pr = partition_reduction(work)
    return pr, pr.real_parts()


def _check_classes(inst, m2, n_parts, out: ColorAssignment) -> None:
    n = PartitionMatroid(n_parts)
    for cls in out.classes():
        if not m2.is_independent(cls):
            raise InvariantViolation(f"class {cls} breaks the partition matroid")
        if not n.is_independent(cls):
            raise InvariantViolation(f"class {cls} breaks the reduced matroid")
        if not is_independent(inst, cls):
            raise InvariantViolation(f"class {cls} is dependent in the gammoid")


def _stats(pr, n_parts, m2, colors) -> dict:
    k1, k2 = pr.k, m2.max_part
    top = max(k1, k2)
    n_max = max((len(p) for p in n_parts), default=0)
    return {
        "k1": k1,
        "k2": k2,
        "ratio": colors / top if top else 0.0,
        "bound_3max": 3 * top,
        "bound_direct": max(n_max, k2),
        "reduced_max_part": n_max,
    }


def intersection_color(inst: GammoidInstance, m2: PartitionMatroid) -> ColorAssignment:
    """Color the intersection with ``max(maxpart(N), maxpart(m2))`` colors."""
    pr, n_parts = _reduce(inst, m2)
    g = ElementBigraph.from_parts(n_parts, m2.parts)
    out = konig_edge_color(g)
    _check_classes(inst, m2, n_parts, out)
    out.stats = _stats(pr, n_parts, m2, out.color_count)
    return out


def list_color_intersection(
    inst: GammoidInstance, m2: PartitionMatroid, lists: Mapping[int, list[int]]
) -> ColorAssignment:
    """List-color the intersection; every list must reach the max degree."""
    pr, n_parts = _reduce(inst, m2)
    missing = m2.universe - set(lists)
    if missing:
        e = min(missing)
        raise ListTooSmall(e, 0, 1)
    g = ElementBigraph.from_parts(n_parts, m2.parts)
    out = galvin_list_color(g, lists)
    for e, c in out.colors.items():
        if c not in lists[e]:
            raise InvariantViolation(f"element {e} got color {c} outside its list")
    _check_classes(inst, m2, n_parts, out)
    out.stats = _stats(pr, n_parts, m2, out.color_count)
    out.stats["required_list_size"] = g.max_degree
    return out
