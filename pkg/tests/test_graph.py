import numpy as np
import pytest

from conftest import complete_graph, path_graph, star_graph
from opinionnet.errors import ConfigError, SelfEdgeError
from opinionnet.graph import (
    GenSpec,
    SocialGraph,
    WeightInit,
    attachment_count,
    barabasi_albert_edges,
    generate,
    grow,
    lattice_degree,
    triadic_candidates,
    watts_strogatz_edges,
)
from opinionnet.metrics import graph_density
from opinionnet.oracles import brute_triadic


def test_add_edge_once():
    g = SocialGraph(2)
    assert g.add_edge(0, 1)
    assert g.num_edges() == 1


def test_add_edge_is_idempotent():
    g = SocialGraph(2)
    g.add_edge(0, 1, 0.3, 0.7)
    assert not g.add_edge(0, 1, 1.0, 1.0)
    assert g.num_edges() == 1
    assert g.weights[0, 1] == 0.3 and g.weights[1, 0] == 0.7


def test_self_edge_rejected():
    with pytest.raises(SelfEdgeError):
        SocialGraph(2).add_edge(0, 0)


def test_out_of_range_node():
    with pytest.raises(IndexError):
        SocialGraph(2).add_edge(0, 5)


def test_weight_out_of_range():
    with pytest.raises(ValueError):
        SocialGraph(2).add_edge(0, 1, 1.5, 0.2)


def test_remove_edge():
    g = path_graph(3)
    assert g.remove_edge(0, 1)
    assert g.num_edges() == 1
    assert 1 not in g.neighbors(0).tolist()
    assert g.weights[0, 1] == 0 and g.weights[1, 0] == 0
    g.check_invariants()


def test_remove_absent_edge_is_noop():
    g = path_graph(3)
    before = g.copy()
    assert not g.remove_edge(0, 2)
    assert g == before


def test_neighbors():
    assert path_graph(3).neighbors(1).tolist() == [0, 2]
    assert SocialGraph(3).neighbors(2).tolist() == []
    g = complete_graph(4)
    for i in range(4):
        assert sorted(g.neighbors(i).tolist()) == [j for j in range(4) if j != i]


def test_edges_sorted_upper():
    g = SocialGraph.from_edges(4, [(3, 1), (2, 0), (0, 1)])
    assert g.edges() == [(0, 1), (0, 2), (1, 3)]


# -- generators ----------------------------------------------------------------

def test_random_two_nodes_full_saturation():
    g = generate(GenSpec("random", 2, 1.0, seed=3))
    assert g.edges() == [(0, 1)]


def test_small_world_lattice_degree_for_75_nodes():
    assert lattice_degree(75, 0.15) == 10
    # no rewiring leaves the pure ring lattice
    adj = watts_strogatz_edges(75, 10, 0.0, np.random.default_rng(0))
    assert (adj.sum(axis=1) == 10).all()


def test_small_world_preserves_edge_count():
    g = generate(GenSpec("small_world", 75, 0.15, seed=4))
    assert g.num_edges() == 75 * 10 // 2
    g.check_invariants()


def test_small_world_k_override():
    g = generate(GenSpec("small_world", 20, 0.15, seed=0, k=4))
    assert g.num_edges() == 40


def test_random_density_monte_carlo():
    # binomial expectation is exactly the saturation
    dens = [graph_density(generate(GenSpec("random", 100, 0.1, seed=s))) for s in range(50)]
    assert 0.08 <= np.mean(dens) <= 0.12


def test_scale_free_edge_count():
    n, m = 75, attachment_count(75, 0.15)
    adj = barabasi_albert_edges(n, m, np.random.default_rng(1))
    assert adj.sum() // 2 == m + (n - m - 1) * m
    assert not adj.diagonal().any()


def test_generation_is_seeded():
    for kind in ("random", "small_world", "scale_free"):
        a = generate(GenSpec(kind, 30, 0.2, seed=9), WeightInit("uniform_random"))
        b = generate(GenSpec(kind, 30, 0.2, seed=9), WeightInit("uniform_random"))
        assert a == b
        a.check_invariants()


def test_genspec_validation_names_fields():
    with pytest.raises(ConfigError) as e:
        generate(GenSpec("lattice", 1, 1.5))
    assert set(e.value.problems) == {"generator", "nodes", "saturation"}


def test_weight_init_json_round_trip():
    for w in (WeightInit(), WeightInit("constant", 0.4), WeightInit("uniform_random")):
        assert WeightInit.from_json(w.to_json()) == w
    assert WeightInit.from_json("uniform_random").kind == "uniform_random"


# -- triadic closure ------------------------------------------------------------

def test_triadic_path():
    assert triadic_candidates(path_graph(3)) == {(0, 2)}


def test_triadic_triangle_closed():
    assert triadic_candidates(complete_graph(3)) == set()


def test_triadic_star_leaf_pairs():
    g = star_graph(4)
    assert brute_triadic(g) == triadic_candidates(g)
    assert triadic_candidates(g) == {(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)}


def test_grow_zero_probability():
    g = path_graph(3)
    assert grow(g, 0.0, np.random.default_rng(0)) == []
    assert g == path_graph(3)


def test_grow_certain_closes_path():
    g = path_graph(3)
    assert grow(g, 1.0, np.random.default_rng(0)) == [(0, 2)]
    assert g.has_edge(0, 2)


def test_grow_star_mean_added():
    # 6 candidate pairs, each with probability 0.05 -> expected 0.3 new edges
    rng = np.random.default_rng(12345)
    added = [len(grow(star_graph(4), 0.05, rng)) for _ in range(10_000)]
    assert abs(np.mean(added) - 0.3) <= 0.02


def test_grow_uses_weight_init():
    g = path_graph(3)
    grow(g, 1.0, np.random.default_rng(0), WeightInit("constant", 0.25))
    assert g.weights[0, 2] == 0.25 and g.weights[2, 0] == 0.25


def test_grow_rejects_bad_probability():
    with pytest.raises(ValueError):
        grow(path_graph(3), 1.5, np.random.default_rng(0))
