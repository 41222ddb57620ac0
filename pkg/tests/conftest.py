"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid max-flow: independence is decided by
enumerating simple paths and backtracking over vertex-disjoint choices.
"""

from __future__ import annotations

import random

import pytest

from gamred.acyclic import NORMAL, SINK_PORTAL, SOURCE, SOURCE_PORTAL
from gamred.instance import GammoidInstance
from gamred.reduce import TreeState


def simple_paths_to_sinks(inst: GammoidInstance, start: int, blocked: set[int]):
    """Every simple path from ``start`` that ends at a sink, avoiding ``blocked``."""
    out = []
    path = [start]
    on_path = {start}

    def walk(v):
        if v in inst.sink_set:
            out.append(list(path))
        for w in inst.succ[v]:
            if w not in on_path and w not in blocked:
                path.append(w)
                on_path.add(w)
                walk(w)
                path.pop()
                on_path.discard(w)

    if start not in blocked:
        walk(start)
    return out


def brute_independent(inst: GammoidInstance, ys) -> bool:
    """Vertex-disjoint linkage by exhaustive path enumeration."""
    ys = sorted(ys)

    def place(i, used):
        if i == len(ys):
            return True
        for p in simple_paths_to_sinks(inst, ys[i], used):
            if place(i + 1, used | set(p)):
                return True
        return False

    return place(0, set())


def random_digraph(rng: random.Random, n: int, m: int, n_sources: int, n_sinks: int):
    """Arbitrary (not layered, possibly cyclic) small digraph instance."""
    verts = list(range(1, n + 1))
    pairs = [(u, v) for u in verts for v in verts if u != v]
    edges = rng.sample(pairs, min(m, len(pairs)))
    picked = rng.sample(verts, n_sources + n_sinks)
    return GammoidInstance(
        vertices=tuple(verts),
        edges=tuple(edges),
        sources=tuple(picked[:n_sources]),
        sinks=tuple(picked[n_sources:]),
    )


def make_tree(k, roles, edges, next_id=100) -> TreeState:
    """TreeState from letter roles (S, P, Q, N) and directed edges."""
    letters = {"S": SOURCE, "P": SOURCE_PORTAL, "Q": SINK_PORTAL, "N": NORMAL}
    role = {v: letters[r] for v, r in roles.items()}
    succ = {v: set() for v in role}
    pred = {v: set() for v in role}
    for u, v in edges:
        succ[u].add(v)
        pred[v].add(u)
    return TreeState(k, role, succ, pred, set(), next_id)


@pytest.fixture
def tree_factory():
    return make_tree
