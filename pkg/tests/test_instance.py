import itertools
import random

import pytest
from conftest import brute_independent, random_digraph
from hypothesis import given, settings
from hypothesis import strategies as st

from gamred.errors import ParseError
from gamred.generate import match, star
from gamred.instance import (
    GammoidInstance,
    is_independent,
    is_normalized,
    normalization_violations,
    normalize,
    parse_instance,
    rank,
    serialize_instance,
)

STAR3_TEXT = """\
# three sources through one hub
p gammoid 5 4
a 1 4
a 2 4
a 3 4
a 4 5
s 1
s 2
s 3
t 5
"""


def test_parse_simple_path():
    inst = parse_instance("p gammoid 3 2\na 1 2\na 2 3\ns 1\nt 3\n")
    assert inst.vertices == (1, 2, 3)
    assert inst.edges == ((1, 2), (2, 3))
    assert inst.sources == (1,)
    assert inst.sinks == (3,)
    assert inst.dummies == frozenset()


def test_parse_star3_file():
    inst = parse_instance(STAR3_TEXT)
    assert len(inst.vertices) == 5
    assert len(inst.edges) == 4
    assert inst == star(3)


def test_source_also_sink_rejected():
    with pytest.raises(ParseError, match="both source and sink"):
        parse_instance("p gammoid 2 1\na 1 2\ns 1\nt 1\n")


@pytest.mark.parametrize(
    "text, line",
    [
        ("p gammoid 2 1\na 1 3\ns 1\nt 2\n", 2),
        ("p gammoid 2 1\na 1 2\ns 7\nt 2\n", 3),
        ("p gammoid 2 1\na 1 2\ns 1\nt x\n", 4),
        ("p gammoid 2 1\nq 1 2\n", 2),
        ("a 1 2\n", 1),
        ("p gammoid 2 1\np gammoid 2 1\n", 2),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as info:
        parse_instance(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_arc_count_must_match_header():
    with pytest.raises(ParseError, match="declares 2 arcs"):
        parse_instance("p gammoid 2 2\na 1 2\ns 1\nt 2\n")


def test_missing_header():
    with pytest.raises(ParseError, match="missing header"):
        parse_instance("# nothing here\n")


def test_parallel_arcs_collapse_and_loops_drop():
    inst = parse_instance("p gammoid 3 4\na 1 2\na 1 2\na 2 2\na 2 3\ns 1\nt 3\n")
    assert inst.edges == ((1, 2), (2, 3))


def test_round_trip_is_exact_on_canonical_text():
    canonical = serialize_instance(star(3))
    assert serialize_instance(parse_instance(canonical)) == canonical
    rng = random.Random(3)
    for _ in range(30):
        inst = random_digraph(rng, 9, 14, 3, 2)
        text = serialize_instance(inst)
        assert serialize_instance(parse_instance(text)) == text


def test_serialize_needs_dense_ids():
    inst = GammoidInstance((1, 5), ((1, 5),), (1,), (5,))
    with pytest.raises(ValueError):
        serialize_instance(inst)


def test_instance_validation():
    with pytest.raises(ValueError):
        GammoidInstance((1, 2), ((1, 3),), (1,), (2,))
    with pytest.raises(ValueError):
        GammoidInstance((1, 2), ((1, 2), (1, 2)), (1,), (2,))
    with pytest.raises(ValueError):
        GammoidInstance((1, 2), ((1, 2),), (1,), (1,))


# ---------------------------------------------------------------------------
# normalization


def test_normalized_star_is_fixed_point():
    inst = star(3)
    out, vmap = normalize(inst)
    assert out == inst
    assert vmap.forward == {v: (v,) for v in inst.vertices}
    assert vmap.backward == {v: v for v in inst.vertices}


def test_two_cycle_is_subdivided():
    inst = GammoidInstance((1, 2, 3, 4), ((1, 2), (2, 3), (3, 2), (3, 4)), (1,), (4,))
    out, _ = normalize(inst)
    es = set(out.edges)
    assert not any((v, u) in es for u, v in es)
    assert is_normalized(out)


def test_high_degree_vertex_is_split_and_independence_kept():
    # w = 3 has in-degree 2 and out-degree 2
    inst = GammoidInstance(
        (1, 2, 3, 4, 5), ((1, 3), (2, 3), (3, 4), (3, 5)), (1, 2), (4, 5)
    )
    out, vmap = normalize(inst)
    assert is_normalized(out)
    assert len(vmap.forward[3]) == 2
    for r in range(3):
        for ys in itertools.combinations(inst.sources, r):
            assert brute_independent(out, ys) == brute_independent(inst, ys)


def test_empty_sink_set_rejected():
    with pytest.raises(ValueError):
        normalize(GammoidInstance((1, 2), ((1, 2),), (1,), ()))


def test_vertex_map_round_trips():
    rng = random.Random(8)
    for _ in range(20):
        inst = random_digraph(rng, 8, 16, 3, 2)
        out, vmap = normalize(inst)
        for v in inst.vertices:
            assert all(vmap.backward[w] == v for w in vmap.forward[v])
        assert set(vmap.backward) == set(out.vertices)


def test_normalize_preserves_independence_and_is_idempotent():
    rng = random.Random(11)
    for _ in range(40):
        inst = random_digraph(rng, rng.randint(5, 9), rng.randint(3, 16), 3, 2)
        out, _ = normalize(inst)
        assert normalization_violations(out) == []
        assert normalize(out)[0] == out
        for r in range(4):
            for ys in itertools.combinations(inst.sources, r):
                assert brute_independent(out, ys) == brute_independent(inst, ys)


# ---------------------------------------------------------------------------
# independence and rank


def test_independence_examples():
    assert is_independent(star(2), [])
    assert not is_independent(star(2), [1, 2])
    assert is_independent(match(2), [1, 2])


def test_independence_rejects_non_sources():
    with pytest.raises(ValueError):
        is_independent(star(2), [3])


def test_rank_examples():
    for k in range(1, 5):
        assert rank(star(k)) == 1
    for m in range(1, 5):
        assert rank(match(m)) == m
    cut = GammoidInstance((1, 2, 3), ((2, 1),), (1,), (3,))
    assert rank(cut) == 0


@st.composite
def small_instances(draw):
    seed = draw(st.integers(0, 10**6))
    rng = random.Random(seed)
    n = draw(st.integers(3, 12))
    ns = draw(st.integers(1, min(5, n - 1)))
    nt = draw(st.integers(1, min(4, n - ns)))
    m = draw(st.integers(0, min(18, n * (n - 1))))
    return random_digraph(rng, n, m, ns, nt)


@settings(max_examples=150, deadline=None)
@given(small_instances(), st.data())
def test_flow_oracle_matches_path_enumeration(inst, data):
    ys = data.draw(st.lists(st.sampled_from(inst.sources), unique=True))
    assert is_independent(inst, ys) == brute_independent(inst, ys)


@settings(max_examples=80, deadline=None)
@given(small_instances(), st.data())
def test_hereditary(inst, data):
    ys = data.draw(st.lists(st.sampled_from(inst.sources), unique=True))
    if is_independent(inst, ys):
        sub = data.draw(st.lists(st.sampled_from(ys), unique=True)) if ys else []
        assert is_independent(inst, sub)


@settings(max_examples=60, deadline=None)
@given(small_instances())
def test_exchange_axiom(inst):
    indep = [
        set(c)
        for r in range(len(inst.sources) + 1)
        for c in itertools.combinations(inst.sources, r)
        if is_independent(inst, c)
    ]
    for a in indep:
        for b in indep:
            if len(a) < len(b):
                assert any(is_independent(inst, a | {x}) for x in b - a)
