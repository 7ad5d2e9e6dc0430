import networkx as nx
import pytest
from hypothesis import given, strategies as st

from heavyhex_qa.topology import (
    BRIDGE,
    CORNER,
    LatticeError,
    build_heavy_hex,
    completed_washington,
    cubic_sites,
    dumps_lattice,
    grow_sublattice,
    is_bipartite_split,
    is_proper_coloring,
    load_washington,
    loads_lattice,
    make_lattice,
    three_edge_coloring,
)

import oracles


def check_invariants(lat):
    assert is_bipartite_split(lat.edges, lat.node_class)
    for n in lat.nodes:
        limit = 3 if lat.node_class[n] == CORNER else 2
        assert lat.degree(n) <= limit
    assert is_proper_coloring(lat.edges, lat.edge_color)
    assert oracles.proper_edge_coloring(lat.edges, lat.edge_color)
    assert len(set(lat.edge_color.values())) <= 3
    assert [s[1] for s in lat.cubic_sites] == oracles.degree_two_bridges(lat.node_class, lat.edges)


def test_single_hexagon():
    lat = build_heavy_hex(1, 1)
    assert len(lat.nodes) == 12 and len(lat.edges) == 12
    assert len(lat.bridges()) == 6
    assert all(lat.degree(b) == 2 for b in lat.bridges())
    assert len(lat.cubic_sites) == 6
    assert len(set(lat.edge_color.values())) <= 2
    check_invariants(lat)


@pytest.mark.parametrize("rows,cols", [(1, 2), (2, 2), (2, 3), (3, 3), (3, 4), (4, 2)])
def test_parametric_counts_match_cell_enumeration(rows, cols):
    lat = build_heavy_hex(rows, cols)
    assert (len(lat.nodes), len(lat.edges)) == oracles.hex_cells_enumeration(rows, cols)
    check_invariants(lat)


@pytest.mark.parametrize("rows,cols", [(1, 1), (2, 2), (2, 3), (3, 4)])
def test_parametric_isomorphic_to_subdivided_hexagonal_lattice(rows, cols):
    lat = build_heavy_hex(rows, cols)
    assert nx.is_isomorphic(nx.Graph(lat.edges), oracles.subdivided_hex_graph(cols, rows))


def test_star_uses_three_colors():
    nc = {0: CORNER, 1: BRIDGE, 2: BRIDGE, 3: BRIDGE}
    colors = three_edge_coloring(nc, [(0, 1), (0, 2), (0, 3)], nc)
    assert sorted(colors.values()) == [1, 2, 3]


def test_degree_one_bridge_is_not_a_site():
    nc = {0: CORNER, 1: BRIDGE, 2: CORNER, 3: BRIDGE}
    sites = cubic_sites(nc, [(0, 1), (1, 2), (2, 3)], nc)
    assert sites == [(0, 1, 2)]


def test_washington_fixture():
    lat = load_washington()
    assert len(lat.nodes) == 127
    assert len(lat.edges) == 142
    assert (8, 9) not in lat.edges and (109, 114) not in lat.edges
    check_invariants(lat)
    assert len(set(lat.edge_color.values())) == 3


def test_completed_washington_adds_fillers_and_couplers():
    full, fillers = completed_washington()
    wash = load_washington()
    assert fillers == [127, 128]
    assert len(full.nodes) == 129
    assert set(wash.edges) | {(8, 9), (109, 114)} <= set(full.edges)
    assert all(full.node_class[f] == CORNER for f in fillers)
    check_invariants(full)


def test_node_class_comes_from_grid_not_degree():
    lat = build_heavy_hex(1, 1)
    assert sum(1 for n in lat.corners() if lat.degree(n) == 2) == 6


def test_parser_rejects_bad_input():
    with pytest.raises(LatticeError):
        loads_lattice("heavyhex v1\nnode 0 CORNER\nnode 1 BRIDGE\nedge 0 1\nedge 1 0\n")
    with pytest.raises(LatticeError):
        loads_lattice("heavyhex v1\nnode 0 HUB\n")
    with pytest.raises(LatticeError):
        loads_lattice("heavyhex v1\nnode 0 CORNER\nnode 1 CORNER\nedge 0 1\n")
    with pytest.raises(LatticeError):
        loads_lattice("node 0 CORNER\n")
    with pytest.raises(LatticeError):
        build_heavy_hex(0, 2)


def test_bridge_degree_limit():
    nc = {0: BRIDGE, 1: CORNER, 2: CORNER, 3: CORNER}
    with pytest.raises(LatticeError):
        make_lattice(nc, [(0, 1), (0, 2), (0, 3)], nc)


def test_file_round_trip():
    lat = load_washington()
    again = loads_lattice(dumps_lattice(lat), name=lat.name)
    assert again == lat


lattice_shapes = st.tuples(st.integers(1, 4), st.integers(1, 4))


@given(lattice_shapes, st.data())
def test_generated_lattices_satisfy_invariants(shape, data):
    base = build_heavy_hex(*shape)
    size = data.draw(st.integers(1, len(base.nodes)))
    start = data.draw(st.sampled_from(base.nodes))
    check_invariants(base)
    check_invariants(grow_sublattice(base, size, start))


@given(lattice_shapes, st.randoms(use_true_random=False))
def test_coloring_under_relabeling(shape, rnd):
    """Recoloring a relabeled lattice gives a proper coloring with the same color count.

    The greedy coloring only depends on edge order, so a relabeling that
    preserves node order reproduces the coloring exactly, and sites move
    with their nodes.
    """
    lat = build_heavy_hex(*shape)
    perm = list(lat.nodes)
    rnd.shuffle(perm)
    relabel = dict(zip(lat.nodes, perm))
    edges = [(relabel[u], relabel[v]) for u, v in lat.edges]
    nc = {relabel[n]: c for n, c in lat.node_class.items()}
    colors = three_edge_coloring(nc, edges, nc)
    assert is_proper_coloring(edges, colors)
    assert len(set(colors.values())) == len(set(lat.edge_color.values()))
    sites = {(relabel[a], relabel[m], relabel[b]) for a, m, b in lat.cubic_sites}
    assert {(min(a, b), m, max(a, b)) for a, m, b in sites} == set(cubic_sites(nc, edges, nc))

    spread = {n: 3 * n + 7 for n in lat.nodes}
    edges2 = [(spread[u], spread[v]) for u, v in lat.edges]
    nc2 = {spread[n]: c for n, c in lat.node_class.items()}
    colors2 = three_edge_coloring(nc2, edges2, nc2)
    assert {e: colors2[(spread[e[0]], spread[e[1]])] for e in lat.edges} == lat.edge_color


def test_hexagon_coloring_unique_up_to_permutation():
    lat = build_heavy_hex(1, 1)
    ring = nx.cycle_basis(nx.Graph(lat.edges))[0]
    seq = [lat.edge_color[tuple(sorted((ring[i], ring[(i + 1) % 12])))] for i in range(12)]
    assert all(seq[i] != seq[i + 1] for i in range(11))
    assert len(set(seq[0::2])) == 1 and len(set(seq[1::2])) == 1
