"""Named fixtures and seeded random instance generation."""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass

from .errors import GenerationFailed
from .instance import GammoidInstance, normalize


def star(k: int) -> GammoidInstance:
    """Sources 1..k all feeding a hub ``k+1`` with the single sink ``k+2``."""
    if k < 1:
        raise ValueError("star needs k >= 1")
    hub, sink = k + 1, k + 2
    edges = tuple((s, hub) for s in range(1, k + 1)) + ((hub, sink),)
    return GammoidInstance(
        vertices=tuple(range(1, k + 3)),
        edges=edges,
        sources=tuple(range(1, k + 1)),
        sinks=(sink,),
    )


def match(m: int) -> GammoidInstance:
    """Sources 1..m, sinks m+1..2m, one direct arc per pair."""
    if m < 1:
        raise ValueError("match needs m >= 1")
    return GammoidInstance(
        vertices=tuple(range(1, 2 * m + 1)),
        edges=tuple((i, m + i) for i in range(1, m + 1)),
        sources=tuple(range(1, m + 1)),
        sinks=tuple(range(m + 1, 2 * m + 1)),
    )


def disjoint_union(*parts: GammoidInstance) -> GammoidInstance:
    """Side-by-side copies with ids shifted so they stay 1..n."""
    vertices, edges, sources, sinks = [], [], [], []
    shift = 0
    for inst in parts:
        ids = {v: shift + i for i, v in enumerate(inst.vertices, start=1)}
        vertices += ids.values()
        edges += [(ids[u], ids[v]) for u, v in inst.edges]
        sources += [ids[s] for s in inst.sources]
        sinks += [ids[z] for z in inst.sinks]
        shift += len(inst.vertices)
    return GammoidInstance(tuple(vertices), tuple(edges), tuple(sources), tuple(sinks))


@dataclass(frozen=True)
class GenParams:
    n_vertices: int
    n_edges: int
    n_sources: int
    n_sinks: int
    layers: int = 3
    seed: int = 0

    def problems(self) -> list[str]:
        out = []
        if self.n_sources < 1:
            out.append("n_sources must be positive")
        if self.n_sinks < 1:
            out.append("n_sinks must be positive")
        if self.layers < 1:
            out.append("layers must be positive")
        if self.n_sources + self.n_sinks > self.n_vertices:
            out.append("n_sources + n_sinks exceeds n_vertices")
        inner = self.n_vertices - self.n_sources - self.n_sinks
        if self.layers == 1 and inner:
            out.append("a single layer leaves no room for inner vertices")
        if self.layers > 1 and inner < self.layers - 1:
            out.append("need at least one inner vertex per inner layer")
        return out

    def to_json(self) -> dict:
        return asdict(self)


def _layering(p: GenParams, rng: random.Random) -> list[list[int]]:
    ids = iter(range(1, p.n_vertices + 1))
    first = [next(ids) for _ in range(p.n_sources)]
    inner_count = p.n_vertices - p.n_sources - p.n_sinks
    inner_layers = p.layers - 1
    inner: list[list[int]] = []
    if inner_layers:
        # every inner layer gets one vertex, the rest land at random
        sizes = [1] * inner_layers
        for _ in range(inner_count - inner_layers):
            sizes[rng.randrange(inner_layers)] += 1
        inner = [[next(ids) for _ in range(c)] for c in sizes]
    last = [next(ids) for _ in range(p.n_sinks)]
    return [first, *inner, last]


def gen_random(p: GenParams, max_attempts: int = 50, *, raw: bool = False) -> GammoidInstance:
    """Layered random DAG with sources first and sinks last, then normalized.

    Every non-sink vertex gets an arc into the next layer, so each source
    reaches a sink; the remaining arc budget goes to random forward arcs.
    With ``raw`` the un-normalized DAG is returned.
    """
    bad = p.problems()
    if bad:
        raise GenerationFailed("invalid parameters: " + "; ".join(bad))
    rng = random.Random(p.seed)
    for _ in range(max_attempts):
        layers = _layering(p, rng)
        depth = {v: i for i, layer in enumerate(layers) for v in layer}
        edges: dict[tuple[int, int], None] = {}
        for i, layer in enumerate(layers[:-1]):
            for u in layer:
                edges[(u, rng.choice(layers[i + 1]))] = None
        # inner vertices nobody points at are dead weight; give them a parent
        for i, layer in enumerate(layers[1:-1], start=1):
            targets = {v for _, v in edges}
            for v in layer:
                if v not in targets:
                    edges[(rng.choice(layers[i - 1]), v)] = None
        if len(edges) > p.n_edges:
            continue
        candidates = [
            (u, v)
            for u in range(1, p.n_vertices + 1)
            for v in range(1, p.n_vertices + 1)
            if depth[u] < depth[v] and depth[u] < len(layers) - 1
        ]
        free = [e for e in candidates if e not in edges]
        if len(free) < p.n_edges - len(edges):
            continue
        for e in rng.sample(free, p.n_edges - len(edges)):
            edges[e] = None
        inst = GammoidInstance(
            vertices=tuple(range(1, p.n_vertices + 1)),
            edges=tuple(sorted(edges)),
            sources=tuple(layers[0]),
            sinks=tuple(layers[-1]),
        )
        if raw:
            return inst
        return normalize(inst)[0]
    raise GenerationFailed(f"no instance after {max_attempts} attempts for {p}")


def random_params(rng: random.Random, seed: int) -> GenParams:
    """A mixed family of small-to-medium parameter sets."""
    n_sinks = rng.randint(1, 8)
    n_sources = rng.randint(n_sinks + 1, 4 * n_sinks + 6)
    layers = rng.randint(1, 5)
    inner = 0 if layers == 1 else rng.randint(layers - 1, 3 * layers + 10)
    n = n_sources + n_sinks + inner
    minimum = n - n_sinks + inner
    n_edges = minimum + rng.randint(0, max(1, n // rng.choice((1, 2, 4))))
    return GenParams(n, n_edges, n_sources, n_sinks, layers, seed)


def random_suite(count: int, seed: int = 0):
    """Yield ``(params, instance)`` pairs from a seeded stream."""
    rng = random.Random(seed)
    produced = 0
    while produced < count:
        p = random_params(rng, rng.randrange(2**31))
        try:
            inst = gen_random(p)
        except GenerationFailed:
            continue
        produced += 1
        yield p, inst
