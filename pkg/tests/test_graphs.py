import json
import math
import random

import pytest

from udgpart.graphs import GeometricGraph, build_udg


def graph_from_edges(n, edges, r_tr=1.0, positions=None):
    """Graph with synthetic positions; edge set given explicitly."""
    if positions is None:
        # spread on a circle so all coordinates are distinct and inside [0,1)
        positions = tuple(
            (0.5 + 0.4 * math.cos(2 * math.pi * k / max(n, 1)),
             0.5 + 0.4 * math.sin(2 * math.pi * k / max(n, 1)))
            for k in range(n)
        )
    edges = tuple(sorted((min(u, v), max(u, v)) for u, v in edges))
    return GeometricGraph(positions=positions, edges=edges, r_tr=r_tr)


def path_graph(n):
    return graph_from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return graph_from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves):
    return graph_from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def complete_graph(n):
    return graph_from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


class TestBuildUdg:
    def test_edge_within_radius(self):
        g = build_udg([(0.1, 0.1), (0.2, 0.1)], r_tr=0.15)
        assert g.edges == ((0, 1),)

    def test_no_edge_beyond_radius(self):
        g = build_udg([(0.1, 0.1), (0.5, 0.1)], r_tr=0.15)
        assert g.edges == ()

    def test_collinear_points_give_path_not_triangle(self):
        g = build_udg([(0.1, 0.1), (0.2, 0.1), (0.3, 0.1)], r_tr=0.1)
        assert g.edges == ((0, 1), (1, 2))

    def test_boundary_distance_is_inclusive(self):
        g = build_udg([(0.1, 0.1), (0.3, 0.1)], r_tr=0.2)
        assert g.edges == ((0, 1),)

    def test_rejects_point_outside_unit_square(self):
        with pytest.raises(ValueError):
            build_udg([(0.1, 0.1), (1.0, 0.5)], r_tr=0.2)
        with pytest.raises(ValueError):
            build_udg([(-0.01, 0.1)], r_tr=0.2)

    def test_rejects_duplicate_coordinates(self):
        with pytest.raises(ValueError):
            build_udg([(0.1, 0.1), (0.1, 0.1)], r_tr=0.2)

    def test_rejects_lambda_violation(self):
        with pytest.raises(ValueError):
            build_udg([(0.1, 0.1), (0.15, 0.1)], r_tr=0.3, lam=0.1)


class TestNeighbourhood:
    def test_isolated_node(self):
        g = graph_from_edges(3, [(0, 1)])
        assert g.closed_neighbourhood(2) == {2}

    def test_star_center(self):
        g = star_graph(4)
        assert g.closed_neighbourhood(0) == {0, 1, 2, 3, 4}

    def test_star_leaf(self):
        g = star_graph(4)
        assert g.closed_neighbourhood(3) == {0, 3}

    def test_invalid_node_raises(self):
        g = star_graph(2)
        with pytest.raises(ValueError):
            g.closed_neighbourhood(17)


class TestDegreeStats:
    def test_cycle_is_regular(self):
        assert cycle_graph(4).degree_stats() == (2.0, 0.0)

    def test_star_k13(self):
        avg, var = star_graph(3).degree_stats()
        assert avg == 1.5
        assert var == 0.75

    def test_single_node(self):
        g = graph_from_edges(1, [])
        assert g.degree_stats() == (0.0, 0.0)

    def test_empty_graph_raises(self):
        g = graph_from_edges(0, [], positions=())
        with pytest.raises(ValueError):
            g.degree_stats()

    def test_degree_sum_is_twice_edge_count(self):
        rng = random.Random(7)
        for _ in range(20):
            n = rng.randint(2, 12)
            edges = {
                (u, v)
                for u in range(n)
                for v in range(u + 1, n)
                if rng.random() < 0.4
            }
            g = graph_from_edges(n, edges)
            assert sum(g.degree(v) for v in range(n)) == 2 * g.edge_count


class TestClusterCoefficient:
    def test_triangle_node(self):
        assert complete_graph(3).local_cluster_coefficient(0) == 1.0

    def test_path_center(self):
        assert path_graph(3).local_cluster_coefficient(1) == 0.0

    def test_degree_one_is_zero(self):
        assert path_graph(3).local_cluster_coefficient(0) == 0.0

    def test_always_in_unit_interval(self):
        rng = random.Random(3)
        for _ in range(20):
            n = rng.randint(1, 10)
            edges = {
                (u, v)
                for u in range(n)
                for v in range(u + 1, n)
                if rng.random() < 0.5
            }
            g = graph_from_edges(n, edges)
            for v in range(n):
                assert 0.0 <= g.local_cluster_coefficient(v) <= 1.0


class TestComponents:
    def test_two_disjoint_edges(self):
        g = graph_from_edges(4, [(0, 1), (2, 3)])
        assert len(g.connected_components) == 2

    def test_cycle_is_connected(self):
        g = cycle_graph(5)
        assert len(g.connected_components) == 1
        assert g.is_connected()

    def test_empty_edge_set(self):
        g = graph_from_edges(4, [])
        assert len(g.connected_components) == 4
        assert not g.is_connected()

    def test_components_partition_nodes(self):
        g = graph_from_edges(7, [(0, 1), (1, 2), (4, 5)])
        nodes = sorted(v for comp in g.connected_components for v in comp)
        assert nodes == list(range(7))


def brute_force_bridges(g):
    """Oracle: an edge is a bridge iff removing it increases the component count."""
    base = len(g.connected_components)
    return tuple(
        sorted(e for e in g.edges if len(g.without_edge(*e).connected_components) == base + 1)
    )


class TestBridges:
    def test_path_edges_are_bridges(self):
        assert path_graph(3).bridges == ((0, 1), (1, 2))

    def test_cycle_has_no_bridges(self):
        assert cycle_graph(4).bridges == ()

    def test_two_triangles_joined_by_edge(self):
        g = graph_from_edges(
            6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]
        )
        assert g.bridges == ((2, 3),)

    def test_matches_removal_oracle_on_random_graphs(self):
        rng = random.Random(11)
        for _ in range(30):
            n = rng.randint(2, 11)
            edges = {
                (u, v)
                for u in range(n)
                for v in range(u + 1, n)
                if rng.random() < 0.3
            }
            g = graph_from_edges(n, edges)
            assert g.bridges == brute_force_bridges(g)

    def test_removing_a_bridge_splits_exactly_one_component(self):
        rng = random.Random(13)
        for _ in range(20):
            n = rng.randint(2, 10)
            edges = {
                (u, v)
                for u in range(n)
                for v in range(u + 1, n)
                if rng.random() < 0.35
            }
            g = graph_from_edges(n, edges)
            for e in g.bridges:
                assert e in g.edges
                before = len(g.connected_components)
                after = len(g.without_edge(*e).connected_components)
                assert after == before + 1


def brute_force_bridge_paths(g):
    """Oracle: enumerate every simple path, keep qualifying maximal ones.

    A qualifying path has >= 2 edges, all of them bridges, and every interior
    node of graph degree exactly 2.
    """
    bridge_set = set(g.bridges)

    def qualifies(path):
        if len(path) < 3:
            return False
        for a, b in zip(path, path[1:]):
            if (min(a, b), max(a, b)) not in bridge_set:
                return False
        return all(g.degree(v) == 2 for v in path[1:-1])

    all_paths = []

    def extend(path):
        all_paths.append(tuple(path))
        for w in g.neighbours(path[-1]):
            if w not in path:
                extend(path + [w])

    for start in range(g.node_count):
        extend([start])

    qual = [p for p in all_paths if qualifies(p)]

    def contained(p, q):
        if len(p) >= len(q):
            return False
        text, hay = list(p), list(q)
        for k in range(len(hay) - len(text) + 1):
            if hay[k : k + len(text)] in (text, text[::-1]):
                return True
        return False

    maximal = {
        tuple(p if p[0] < p[-1] else p[::-1])
        for p in qual
        if not any(contained(p, q) for q in qual if p != q)
    }
    return tuple(sorted(maximal))


class TestBridgePaths:
    def test_path_graph_single_chain(self):
        assert path_graph(5).bridge_paths() == ((0, 1, 2, 3, 4),)

    def test_two_triangles_joined_by_three_edge_chain(self):
        # triangles {0,1,2} and {5,6,7}, chain 2-3-4-5 of degree-2 interiors
        g = graph_from_edges(
            8,
            [(0, 1), (0, 2), (1, 2), (5, 6), (5, 7), (6, 7), (2, 3), (3, 4), (4, 5)],
        )
        assert g.bridge_paths() == ((2, 3, 4, 5),)
        assert g.bridge_paths() == brute_force_bridge_paths(g)

    def test_cycle_has_none(self):
        assert cycle_graph(6).bridge_paths() == ()

    def test_single_bridge_is_not_a_chain(self):
        g = graph_from_edges(
            6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]
        )
        assert g.bridge_paths() == ()

    def test_matches_enumeration_oracle_on_random_sparse_graphs(self):
        rng = random.Random(17)
        for _ in range(25):
            n = rng.randint(3, 9)
            edges = {
                (u, v)
                for u in range(n)
                for v in range(u + 1, n)
                if rng.random() < 0.25
            }
            g = graph_from_edges(n, edges)
            assert g.bridge_paths() == brute_force_bridge_paths(g)


class TestJsonRoundTrip:
    def test_round_trip_is_identity(self):
        g = build_udg([(0.1, 0.2), (0.2, 0.2), (0.7, 0.9)], r_tr=0.15, lam=0.05)
        again = GeometricGraph.from_json(g.to_json())
        assert again == g

    def test_serialisation_is_byte_stable(self):
        g = build_udg([(0.1, 0.2), (0.2, 0.2)], r_tr=0.15)
        assert g.to_json() == g.to_json()

    def test_edges_are_stored_not_recomputed(self):
        # an adapted graph may hold an edge longer than r_tr
        g = graph_from_edges(2, [(0, 1)], r_tr=0.01)
        again = GeometricGraph.from_json(g.to_json())
        assert again.edges == ((0, 1),)

    def test_tagged_edges_survive(self):
        g = graph_from_edges(3, [(0, 1)]).with_edges([(1, 2)], tag="joined")
        doc = json.loads(g.to_json())
        assert [0, 1] in doc["edges"]
        assert [1, 2, "joined"] in doc["edges"]
        again = GeometricGraph.from_json(g.to_json())
        assert again == g
        assert again.tag_of(1, 2) == "joined"


class TestImmutability:
    def test_with_edges_leaves_original_untouched(self):
        g = graph_from_edges(3, [(0, 1)])
        g2 = g.with_edges([(1, 2)], tag="joined")
        assert g.edges == ((0, 1),)
        assert g2.edges == ((0, 1), (1, 2))

    def test_without_edge(self):
        g = graph_from_edges(3, [(0, 1), (1, 2)])
        g2 = g.without_edge(1, 2)
        assert g2.edges == ((0, 1),)
        assert g.edges == ((0, 1), (1, 2))

    def test_duplicate_edge_rejected(self):
        g = graph_from_edges(3, [(0, 1)])
        with pytest.raises(ValueError):
            g.with_edges([(0, 1)], tag="joined")
