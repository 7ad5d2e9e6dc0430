import json
from collections import Counter
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heavyhex_qa.instance import generate_instance
from heavyhex_qa.pegasus import (
    INTERNAL,
    NativeEmbedding,
    build_pegasus,
    coordinates,
    export_annealer_problem,
    linear_index,
    load_coupler_list,
    load_id_list,
    parse_annealer_problem,
    structured_layout,
    tile_embeddings,
    validate_native_embedding,
    washington_template,
)
from heavyhex_qa.reduction import ReducedIsing, reduce_instance
from heavyhex_qa.topology import build_heavy_hex, load_washington

import oracles


@lru_cache(maxsize=None)
def p16():
    return build_pegasus(16)


@lru_cache(maxsize=None)
def template():
    return washington_template(generate_instance(load_washington(), 0))


@lru_cache(maxsize=None)
def ideal_tiling():
    red, lat = template()
    return tile_embeddings(red, lat, p16())


def degree_histogram(nodes, edges):
    deg = Counter()
    for e in edges:
        for q in e:
            deg[q] += 1
    return Counter(deg[q] for q in nodes)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_generator_matches_segment_oracle(m):
    g = build_pegasus(m)
    fab, edges, kinds = oracles.pegasus_geometric(m)
    assert len(g.nodes) == len(fab)
    assert len(g.edges) == len(edges)
    mine = [frozenset((coordinates(a, m), coordinates(b, m))) for a, b in g.edges]
    assert degree_histogram([coordinates(q, m) for q in g.nodes], mine) == degree_histogram(fab, edges)
    assert {e: k for e, k in zip(mine, g.edges.values())} == kinds


def test_p16_matches_segment_oracle():
    fab, edges, _ = oracles.pegasus_geometric(16)
    g = p16()
    assert len(g.nodes) == len(fab) and len(g.edges) == len(edges)
    assert max(degree_histogram(g.nodes, g.edges)) == 15


def test_coordinate_round_trip():
    for q in range(0, 24 * 16 * 15, 37):
        assert linear_index(coordinates(q, 16), 16) == q


def test_internal_couplers_join_orientations():
    g = build_pegasus(4)
    for (a, b), kind in g.edges.items():
        ua, ub = coordinates(a, 4)[0], coordinates(b, 4)[0]
        assert (ua != ub) == (kind == INTERNAL)


def test_dead_qubits_and_couplers():
    g = p16()
    dead = sorted(g.nodes)[100:1400:100]
    assert len(dead) == 13
    gd = build_pegasus(16, dead_qubits=dead)
    assert len(gd.nodes) == len(g.nodes) - 13
    assert not any(q in e for e in gd.edges for q in dead)
    coupler = next(iter(g.edges))
    gc = build_pegasus(16, dead_couplers=[coupler[::-1]])
    assert len(gc.edges) == len(g.edges) - 1 and not gc.has_coupler(*coupler)
    assert g.without(dead).nodes == gd.nodes
    with pytest.raises(ValueError):
        build_pegasus(16, dead_qubits=[10**7])
    with pytest.raises(ValueError):
        build_pegasus(16, dead_couplers=[(0, 10**7)])
    with pytest.raises(ValueError):
        build_pegasus(1)


def test_id_and_coupler_files(tmp_path):
    (tmp_path / "q.txt").write_text("# dead\n5 7\n9\n")
    (tmp_path / "c.txt").write_text("1,2\n3 4 # note\n")
    assert load_id_list(tmp_path / "q.txt") == [5, 7, 9]
    assert load_coupler_list(tmp_path / "c.txt") == [(1, 2), (3, 4)]


def test_validator_trivial_cases():
    g = build_pegasus(2)
    empty = ReducedIsing(0, 0, {}, {})
    assert validate_native_embedding(empty, g, {})[0]
    two = ReducedIsing(2, 2, {0: 1.0, 1: 1.0}, {})
    q = min(g.nodes)
    ok, msg = validate_native_embedding(two, g, {0: q, 1: q})
    assert not ok and "share" in msg
    a, b = next(iter(g.edges))
    pair = ReducedIsing(2, 2, {}, {(0, 1): 1.0})
    assert validate_native_embedding(pair, g, {0: a, 1: b})[0]
    far = next(x for x in g.nodes if not g.has_coupler(a, x) and x != a)
    assert not validate_native_embedding(pair, g, {0: a, 1: far})[0]
    assert not validate_native_embedding(pair, g, {0: a})[0]


def test_template_shape():
    red, lat = template()
    assert lat.num_nodes == 129
    assert red.num_vars == 129 + 2 * len(lat.cubic_sites)
    # every lattice edge and gadget coupler is present, including zero-weight ones
    assert set(lat.edges) <= set(red.quadratic)


def test_frozen_template_embedding(golden_dir):
    red, _ = template()
    frozen = {int(k): v for k, v in json.loads((golden_dir / "washington_tile0.json").read_text()).items()}
    assert validate_native_embedding(red, p16(), frozen) == (True, "ok")
    assert ideal_tiling().embeddings[0].mapping == frozen


def test_six_copies_on_ideal_p16():
    red, lat = template()
    tiling = ideal_tiling()
    assert len(tiling) == 6
    used = set()
    for emb in tiling.embeddings:
        assert validate_native_embedding(red, p16(), emb.mapping)[0]
        images = set(emb.mapping.values())
        assert len(images) == red.num_vars and not images & used
        used |= images
    assert len(tile_embeddings(red, lat, p16(), max_copies=10)) == 6
    assert len(tile_embeddings(red, lat, p16(), max_copies=2)) == 2


def test_structured_layout_is_injective():
    red, lat = template()
    pos = structured_layout(lat, red)
    assert len(set(pos.values())) == red.num_vars


def test_plain_washington_reduction_also_tiles():
    wash = load_washington()
    red = reduce_instance(generate_instance(wash, 1))
    tiling = tile_embeddings(red, wash, p16())
    assert len(tiling) == 6


def test_structured_layout_needs_positions():
    lat = build_heavy_hex(1, 1)
    red = reduce_instance(generate_instance(lat, 0))
    bare = type(lat)(lat.nodes, lat.edges, lat.node_class, lat.edge_color, lat.cubic_sites, {}, lat.name)
    with pytest.raises(ValueError):
        structured_layout(bare, red)


def test_small_lattice_on_small_pegasus():
    lat = build_heavy_hex(1, 1)
    red = reduce_instance(generate_instance(lat, 0))
    g = build_pegasus(4)
    tiling = tile_embeddings(red, lat, g, max_copies=50)
    assert len(tiling) >= 1
    for emb in tiling.embeddings:
        assert validate_native_embedding(red, g, emb.mapping)[0]


def test_dead_qubit_in_first_copy():
    red, lat = template()
    first = ideal_tiling().embeddings[0].mapping
    rng = np.random.default_rng(0)
    for q in rng.choice(sorted(first.values()), size=5, replace=False):
        g = p16().without([int(q)])
        tiling = tile_embeddings(red, lat, g)
        assert len(tiling) <= 5
        used = set()
        for emb in tiling.embeddings:
            assert validate_native_embedding(red, g, emb.mapping)[0]
            assert int(q) not in emb.mapping.values()
            assert not set(emb.mapping.values()) & used
            used |= set(emb.mapping.values())


def test_repair_keeps_validity():
    red, lat = template()
    first = ideal_tiling().embeddings[0].mapping
    g = p16().without([first[0]])
    tiling = tile_embeddings(red, lat, g, repair_budget=20_000)
    used = set()
    for emb in tiling.embeddings:
        assert validate_native_embedding(red, g, emb.mapping)[0]
        assert not set(emb.mapping.values()) & used
        used |= set(emb.mapping.values())
    assert set(tiling.repaired) <= set(range(len(tiling)))


@settings(max_examples=20)
@given(st.lists(st.integers(0, 10**6), min_size=1, max_size=12))
def test_random_dead_sets_give_valid_disjoint_tilings(picks):
    red, lat = template()
    nodes = sorted(p16().nodes)
    dead = {nodes[p % len(nodes)] for p in picks}
    g = p16().without(dead)
    tiling = tile_embeddings(red, lat, g)
    assert len(tiling) <= 6
    used = set()
    for emb in tiling.embeddings:
        assert validate_native_embedding(red, g, emb.mapping)[0]
        assert not set(emb.mapping.values()) & used
        used |= set(emb.mapping.values())


# -- export --------------------------------------------------------------------------

def test_empty_export():
    h, J, doc = parse_annealer_problem(export_annealer_problem(ReducedIsing(0, 0, {}, {}), []))
    assert h == {} and J == {} and doc["tiles"] == []


def test_export_round_trip_and_energy():
    red, lat = template()
    tiles = ideal_tiling().embeddings[:2]
    text = export_annealer_problem(red, tiles, p16(), {"seed": 0})
    h, J, doc = parse_annealer_problem(text)
    assert len(h) == 2 * red.num_vars
    assert len(J) == 2 * len(red.quadratic)
    raw = json.loads(text)["J"]
    assert len(raw) == len(set(raw))
    for emb, tile in zip(tiles, doc["tiles"]):
        m = emb.mapping
        assert {int(k): v for k, v in tile["mapping"].items()} == m
        assert {m[v]: c for v, c in red.linear.items()} == {m[v]: h[m[v]] for v in red.linear}
    rng = np.random.default_rng(3)
    m = tiles[0].mapping
    for _ in range(5):
        spins = rng.choice([-1, 1], size=red.num_vars)
        q = {m[v]: int(spins[v]) for v in range(red.num_vars)}
        e = sum(c * q[k] for k, c in h.items() if k in q)
        e += sum(c * q[a] * q[b] for (a, b), c in J.items() if a in q and b in q)
        assert e + doc["offset_per_tile"] == red.energy(spins)


def test_export_rejects_overlap():
    red, _ = template()
    emb = ideal_tiling().embeddings[0]
    with pytest.raises(ValueError):
        export_annealer_problem(red, [emb, NativeEmbedding(emb.mapping, 1)])
