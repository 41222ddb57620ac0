import networkx as nx
import pytest

from gamred.acyclic import (
    SINK,
    SINK_PORTAL,
    SOURCE,
    ResidualView,
    cancel_cycles,
    cancel_cycles_counted,
    decompose,
    dump_trees,
    find_augmenting_cycle,
    structure_violations,
)
from gamred.flow import FlowState, coloring_number, feasible_flow, pad_with_dummies
from gamred.generate import match, random_suite, star
from gamred.instance import GammoidInstance


def crossing_fixture():
    """Diamond 1 -> {2, 3} -> 4 carrying one unit on every edge, k = 2."""
    inst = GammoidInstance((1, 2, 3, 4), ((1, 2), (1, 3), (2, 4), (3, 4)), (), ())
    return FlowState(inst, 2, {e: 1 for e in inst.edges})


def prepared(inst):
    k = coloring_number(inst)
    padded, f = pad_with_dummies(inst, k, feasible_flow(inst, k))
    return f


def residual_cycles(r: ResidualView):
    """All simple residual cycles of length > 2, as rotated vertex tuples."""
    g = nx.DiGraph()
    for a in r.arcs():
        g.add_edge(a.tail, a.head)
    out = set()
    for cyc in nx.simple_cycles(g):
        if len(cyc) > 2:
            i = cyc.index(min(cyc))
            out.add(tuple(cyc[i:] + cyc[:i]))
    return out


def fractional_is_forest(f) -> bool:
    g = nx.Graph()
    g.add_edges_from(e for e, x in f.flow.items() if 0 < x < f.k)
    return len(g) == 0 or nx.is_forest(g)


def test_integral_extreme_flow_has_no_cycle():
    f = feasible_flow(match(2), 1)
    assert find_augmenting_cycle(ResidualView(f)) is None
    assert find_augmenting_cycle(ResidualView(f), fractional_only=False) is None


def test_star3_flow_has_no_cycle():
    f = feasible_flow(star(3), 3)
    assert find_augmenting_cycle(ResidualView(f)) is None
    g, iterations = cancel_cycles_counted(f)
    assert iterations == 0
    assert g.flow == f.flow


def test_crossing_fixture_cycle_is_a_real_residual_cycle():
    f = crossing_fixture()
    r = ResidualView(f)
    cyc = find_augmenting_cycle(r)
    assert cyc is not None and len(cyc) == 4
    for a, b in zip(cyc, cyc[1:] + cyc[:1]):
        assert a.head == b.tail
        assert a.capacity > 0
    verts = [a.tail for a in cyc]
    i = verts.index(min(verts))
    assert tuple(verts[i:] + verts[:i]) in residual_cycles(r)
    loose = find_augmenting_cycle(r, fractional_only=False)
    assert loose is not None and len(loose) > 2


def test_crossing_fixture_cancels_in_one_push():
    f = crossing_fixture()
    g, iterations = cancel_cycles_counted(f)
    assert iterations == 1
    assert sum(1 for x in g.flow.values() if x in (0, 2)) == 4
    assert fractional_is_forest(g)
    # conservation at the two middle vertices
    assert g.flow[(1, 2)] == g.flow[(2, 4)]
    assert g.flow[(1, 3)] == g.flow[(3, 4)]


def test_cancel_does_not_touch_the_input():
    f = crossing_fixture()
    before = dict(f.flow)
    cancel_cycles(f)
    assert f.flow == before


def test_random_flows_become_acyclic():
    for _, inst in random_suite(60, seed=4):
        if len(inst.vertices) > 60:
            continue
        f = prepared(inst)
        g, iterations = cancel_cycles_counted(f)
        assert iterations <= len(g.flow)
        assert g.violations() == []
        assert g.value == f.value
        for s in g.instance.sources:
            assert g.outflow(s) == 1
        assert fractional_is_forest(g)
        assert find_augmenting_cycle(ResidualView(g)) is None
        dec = decompose(g)
        assert structure_violations(g, dec) == []


def test_star3_decomposition():
    f = feasible_flow(star(3), 3)
    dec = decompose(cancel_cycles(f))
    trees = {tuple(t.vertices): t for t in dec.trees}
    assert set(trees) == {(1, 2, 3, 4), (5,)}
    assert trees[(1, 2, 3, 4)].roles[4] == SINK_PORTAL
    assert all(trees[(1, 2, 3, 4)].roles[s] == SOURCE for s in (1, 2, 3))
    assert trees[(5,)].roles == {5: SINK}
    assert dec.highways == [[4, 5]]


def test_match2_has_only_highways():
    dec = decompose(cancel_cycles(feasible_flow(match(2), 1)))
    assert all(t.count(SOURCE) == 0 for t in dec.trees)
    assert sorted(dec.highways) == [[1, 3], [2, 4]]


def test_saturated_chain_is_one_highway():
    # two sources meet at 3, then 3 -> 4 -> 5 -> sink 6 carries k = 2
    inst = GammoidInstance(
        (1, 2, 3, 4, 5, 6), ((1, 3), (2, 3), (3, 4), (4, 5), (5, 6)), (1, 2), (6,)
    )
    f = prepared(inst)
    dec = decompose(cancel_cycles(f))
    assert dec.highways == [[3, 4, 5, 6]]
    assert dec.roles[3] == SINK_PORTAL


def test_every_sink_is_a_singleton_tree():
    for _, inst in random_suite(20, seed=9):
        g = cancel_cycles(prepared(inst))
        dec = decompose(g)
        singles = {t.vertices[0] for t in dec.trees if len(t.vertices) == 1}
        assert set(g.instance.sinks) <= singles
        for z in g.instance.sinks:
            assert g.inflow(z) == g.k


def test_portal_balance_is_a_multiple_of_k():
    for _, inst in random_suite(30, seed=17):
        g = cancel_cycles(prepared(inst))
        for t in decompose(g).trees:
            assert t.count(SOURCE) % g.k == 0


def test_structure_check_reports_damage():
    f = feasible_flow(star(3), 3)
    dec = decompose(f)
    dec.highways.append([1, 4])
    assert structure_violations(f, dec)


def test_dump_trees_format():
    dec = decompose(feasible_flow(star(2), 2))
    text = dump_trees(dec)
    assert text.splitlines() == ["tree 0 1:S 2:S 3:Q", "tree 1 4:Z", "highway 3 4"]


@pytest.mark.parametrize("x, forward, backward", [(0, True, False), (1, True, True), (2, False, True)])
def test_residual_arcs_mirror_flow(x, forward, backward):
    inst = GammoidInstance((1, 2), ((1, 2),), (), ())
    r = ResidualView(FlowState(inst, 2, {(1, 2): x}))
    arcs = list(r.arcs())
    assert any(a.forward and a.capacity == 2 - x for a in arcs) == forward
    assert any(not a.forward and a.capacity == x for a in arcs) == backward
    assert all(a.capacity > 0 for a in arcs)
