from pathlib import Path

import pytest

from gamred.errors import GenerationFailed
from gamred.flow import coloring_number
from gamred.generate import GenParams, disjoint_union, gen_random, match, random_suite, star
from gamred.instance import is_normalized, parse_instance, serialize_instance

DATA = Path(__file__).parent / "data"
TINY = GenParams(n_vertices=10, n_edges=14, n_sources=4, n_sinks=2, layers=3, seed=1)


def test_seed1_matches_golden_file():
    golden = parse_instance((DATA / "gen_seed1.gam").read_text())
    assert gen_random(TINY) == golden


def test_same_seed_same_instance():
    p = GenParams(40, 70, 8, 3, 4, seed=99)
    assert serialize_instance(gen_random(p)) == serialize_instance(gen_random(p))
    q = GenParams(40, 70, 8, 3, 4, seed=100)
    assert gen_random(p) != gen_random(q)


@pytest.mark.parametrize(
    "params",
    [
        GenParams(10, 14, 0, 2, 3),
        GenParams(10, 14, 3, 0, 3),
        GenParams(4, 6, 3, 2, 2),
        GenParams(10, 14, 3, 2, 0),
        GenParams(8, 10, 3, 2, 1),
    ],
)
def test_invalid_params_fail(params):
    assert params.problems()
    with pytest.raises(GenerationFailed):
        gen_random(params)


def test_too_few_edges_fail():
    with pytest.raises(GenerationFailed):
        gen_random(GenParams(20, 3, 4, 2, 3, seed=1))


def test_single_layer_is_direct_bipartite():
    p = GenParams(9, 10, 5, 4, layers=1, seed=3)
    raw = gen_random(p, raw=True)
    src, snk = set(raw.sources), set(raw.sinks)
    assert all(u in src and v in snk for u, v in raw.edges)
    assert len(raw.edges) == 10


def test_generated_instances_are_normalized_and_colorable():
    for _, inst in random_suite(40, seed=1):
        assert is_normalized(inst)
        coloring_number(inst)


def test_fixture_shapes():
    assert star(3).edges == ((1, 4), (2, 4), (3, 4), (4, 5))
    assert match(2).edges == ((1, 3), (2, 4))
    both = disjoint_union(star(2), match(1))
    assert both.vertices == tuple(range(1, 7))
    assert both.sources == (1, 2, 5)
    assert both.sinks == (4, 6)
    with pytest.raises(ValueError):
        star(0)
