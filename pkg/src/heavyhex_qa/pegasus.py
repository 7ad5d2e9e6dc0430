"""Pegasus graphs, native embeddings of reduced instances, and parallel tilings.

Qubits use coordinates ``(u, w, k, z)``: ``u`` the orientation (0 vertical,
1 horizontal), ``w`` the tile column/row, ``k`` the track within the tile
and ``z`` the position along the line.  Linear ids are
``((u * M + w) * 12 + k) * (M - 1) + z``.

Couplers:
  * internal: ``(0, w, k, z) ~ (1, z + [kk < S0[k]], kk, w - [k < S1[kk]])``
  * external: ``(u, w, k, z) ~ (u, w, k, z + 1)``
  * odd:      ``(u, w, 2j, z) ~ (u, w, 2j + 1, z)``
with the standard shift tables S0 (vertical) and S1 (horizontal).  Only the
"fabric" is kept: qubits that have at least one internal coupler.

For layouts the package also uses an unbounded version of the same graph in
which a qubit is ``(u, line, z)`` with ``line = 12 w + k``.  Shifting every
vertical line by 12a and every vertical offset by b (and horizontals by 12b
and a) is an automorphism, which is what makes translated copies valid.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .instance import CubicIsing
from .reduction import ReducedIsing, reduce_instance
from .topology import HeavyHexLattice, completed_washington, load_washington

S0 = (2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6)
S1 = (6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10)

INTERNAL, EXTERNAL, ODD = "internal", "external", "odd"

Coord = tuple[int, int, int, int]
LineQubit = tuple[int, int, int]


def linear_index(coord: Coord, m: int) -> int:
    u, w, k, z = coord
    return ((u * m + w) * 12 + k) * (m - 1) + z


def coordinates(q: int, m: int) -> Coord:
    q, z = divmod(q, m - 1)
    q, k = divmod(q, 12)
    u, w = divmod(q, m)
    return (u, w, k, z)


def _in_fabric_range(c: Coord, m: int) -> bool:
    u, w, k, z = c
    if not (0 <= w < m and 0 <= k < 12 and 0 <= z < m - 1 and u in (0, 1)):
        return False
    lo = min(S1) if u == 0 else min(S0)
    hi = max(S1) if u == 0 else max(S0)
    if w == 0 and k < lo:
        return False
    if w == m - 1 and k >= hi:
        return False
    return True


@dataclass(frozen=True)
class PegasusGraph:
    m: int
    nodes: frozenset[int]
    edges: dict[tuple[int, int], str]
    dead_qubits: frozenset[int] = frozenset()
    dead_couplers: frozenset[tuple[int, int]] = frozenset()

    def has_qubit(self, q: int) -> bool:
        return q in self.nodes

    def has_coupler(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def coords(self, q: int) -> Coord:
        return coordinates(q, self.m)

    def without(self, dead_qubits: Iterable[int] = (), dead_couplers: Iterable[tuple[int, int]] = ()) -> "PegasusGraph":
        """Copy with further qubits and couplers marked dead."""
        dq = frozenset(int(q) for q in dead_qubits)
        dc = frozenset((min(a, b), max(a, b)) for a, b in dead_couplers)
        if dq - self.nodes:
            raise ValueError(f"dead qubits not present: {sorted(dq - self.nodes)[:5]}")
        if any(c not in self.edges for c in dc):
            raise ValueError("dead couplers not present")
        nodes = self.nodes - dq
        edges = {e: k for e, k in self.edges.items() if e not in dc and e[0] in nodes and e[1] in nodes}
        return PegasusGraph(self.m, nodes, edges, self.dead_qubits | dq, self.dead_couplers | dc)

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {q: set() for q in self.nodes}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj


def ideal_pegasus_edges(m: int) -> dict[tuple[int, int], str]:
    if m < 2:
        raise ValueError("Pegasus size must be at least 2")
    edges: dict[tuple[int, int], str] = {}

    def add(a: Coord, b: Coord, kind: str) -> None:
        if _in_fabric_range(a, m) and _in_fabric_range(b, m):
            i, j = linear_index(a, m), linear_index(b, m)
            edges[(min(i, j), max(i, j))] = kind

    for u in (0, 1):
        for w in range(m):
            for k in range(12):
                for z in range(m - 1):
                    add((u, w, k, z), (u, w, k, z + 1), EXTERNAL)
                    if k % 2 == 0:
                        add((u, w, k, z), (u, w, k + 1, z), ODD)
    for w in range(m):
        for k in range(12):
            for z in range(m - 1):
                for kk in range(12):
                    add((0, w, k, z), (1, z + (kk < S0[k]), kk, w - (k < S1[kk])), INTERNAL)
    return dict(sorted(edges.items()))


def build_pegasus(m: int, dead_qubits: Iterable[int] = (), dead_couplers: Iterable[tuple[int, int]] = ()) -> PegasusGraph:
    """Fabric of P_m with the given qubits and couplers removed."""
    edges = ideal_pegasus_edges(m)
    nodes = {q for e in edges for q in e}
    internal = {q for e, kind in edges.items() if kind == INTERNAL for q in e}
    nodes &= internal
    dead_q = frozenset(int(q) for q in dead_qubits)
    unknown = dead_q - nodes
    if unknown:
        raise ValueError(f"dead qubits not in P{m}: {sorted(unknown)[:5]}")
    dead_c = frozenset((min(a, b), max(a, b)) for a, b in dead_couplers)
    bad = [c for c in dead_c if c not in edges]
    if bad:
        raise ValueError(f"dead couplers not in P{m}: {sorted(bad)[:5]}")
    live_nodes = frozenset(nodes - dead_q)
    live_edges = {e: k for e, k in edges.items() if e not in dead_c and e[0] in live_nodes and e[1] in live_nodes}
    return PegasusGraph(m, live_nodes, live_edges, dead_q, dead_c)


def load_id_list(path: str | Path) -> list[int]:
    out = []
    for ln in Path(path).read_text().splitlines():
        out.extend(int(t) for t in ln.split("#", 1)[0].replace(",", " ").split())
    return out


def load_coupler_list(path: str | Path) -> list[tuple[int, int]]:
    out = []
    for ln in Path(path).read_text().splitlines():
        ln = ln.split("#", 1)[0].replace(",", " ").split()
        if ln:
            out.append((int(ln[0]), int(ln[1])))
    return out


# -- embeddings ------------------------------------------------------------------

@dataclass(frozen=True)
class NativeEmbedding:
    mapping: dict[int, int]
    tile: int = 0


@dataclass(frozen=True)
class Tiling:
    embeddings: tuple[NativeEmbedding, ...]
    offsets: tuple[tuple[int, int], ...] = ()
    repaired: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.embeddings)


def problem_pairs(reduced: ReducedIsing) -> list[tuple[int, int]]:
    return sorted(reduced.quadratic)


def validate_native_embedding(reduced: ReducedIsing, graph: PegasusGraph, mapping: Mapping[int, int]) -> tuple[bool, str]:
    """Injective, every variable on a live qubit, every quadratic term on a live coupler."""
    seen: dict[int, int] = {}
    for v in range(reduced.num_vars):
        if v not in mapping:
            return False, f"variable {v} is not mapped"
    for v, q in sorted(mapping.items()):
        if q in seen:
            return False, f"variables {seen[q]} and {v} share qubit {q}"
        seen[q] = v
        if not graph.has_qubit(q):
            return False, f"variable {v} maps to missing qubit {q}"
    for a, b in problem_pairs(reduced):
        if not graph.has_coupler(mapping[a], mapping[b]):
            return False, f"term ({a}, {b}) maps to missing coupler ({mapping[a]}, {mapping[b]})"
    return True, "ok"


# -- unbounded coordinates and the periodic layout --------------------------------

def line_adjacent(q: LineQubit) -> list[LineQubit]:
    u, line, z = q
    out = [(u, line, z - 1), (u, line, z + 1), (u, line ^ 1, z)]
    start = 12 * z + (S0 if u == 0 else S1)[line % 12]
    other = S1 if u == 0 else S0
    for t in range(start, start + 12):
        out.append((1 - u, t, (line - other[t % 12]) // 12))
    return out


def line_translate(q: LineQubit, a: int, b: int) -> LineQubit:
    u, line, z = q
    return (u, line + 12 * a, z + b) if u == 0 else (u, line + 12 * b, z + a)


def line_to_coord(q: LineQubit) -> Coord:
    u, line, z = q
    return (u, line // 12, line % 12, z)


@dataclass(frozen=True)
class CellLayout:
    """Qubits for one lattice period plus the translations that tile it.

    Moving four columns right (one hexagon) translates the Pegasus picture by
    ``col4``; moving two long rows down translates it by ``row2``.
    """

    cell: dict[tuple, LineQubit]
    col4: tuple[int, int]
    row2: tuple[int, int]
    preferred_offsets: tuple[tuple[int, int], ...]

    def node_key(self, coord: tuple[int, int]) -> tuple:
        y, x = coord
        return ("N", y // 2, x) if y % 2 == 0 else ("V", (y - 1) // 2, x)

    def place(self, key: tuple) -> LineQubit:
        slot = None
        if key[0] in ("s1", "s2"):
            slot, key = key[0], key[1]
        kind, r, c = key
        j, rr = divmod(r, 2)
        i, cc = divmod(c, 4)
        rep = (kind, rr, cc)
        if slot:
            rep = (slot, rep)
        q = self.cell[rep]
        q = line_translate(q, self.col4[0] * i, self.col4[1] * i)
        return line_translate(q, self.row2[0] * j, self.row2[1] * j)


def _parse_key(text: str) -> tuple:
    parts = text.split(":")
    if parts[0] in ("s1", "s2"):
        return (parts[0], (parts[1], int(parts[2]), int(parts[3])))
    return (parts[0], int(parts[1]), int(parts[2]))


def load_cell_layout() -> CellLayout:
    data = json.loads(resources.files("heavyhex_qa").joinpath("data/pegasus_cell.json").read_text())
    cell = {_parse_key(k): tuple(v) for k, v in data["cell"].items()}
    t = data["cell_translations"]
    return CellLayout(cell, tuple(t["col4"]), tuple(t["row2"]), tuple(tuple(o) for o in data["preferred_offsets"]))


def structured_layout(lattice: HeavyHexLattice, reduced: ReducedIsing, layout: CellLayout | None = None) -> dict[int, LineQubit]:
    """Unbounded-Pegasus position of every reduced variable.

    Lattice nodes go by grid position.  For each cubic site, the slack that
    couples to all three originals takes slot ``s1`` and the corner-only slack
    takes slot ``s2``; variant B swaps which slack id lands where.
    """
    layout = layout or load_cell_layout()
    if not lattice.coords or len(lattice.coords) != lattice.num_nodes:
        raise ValueError("structured layout needs grid positions for every node")
    if reduced.num_original != lattice.num_nodes:
        raise ValueError("reduced instance does not match the lattice")
    out: dict[int, LineQubit] = {}
    for n in lattice.nodes:
        out[n] = layout.place(layout.node_key(lattice.coords[n]))
    for site, entry in reduced.slack_registry.items():
        center = layout.node_key(lattice.coords[site[1]])
        full, corner = (entry.s1, entry.s2) if entry.variant == "A" else (entry.s2, entry.s1)
        out[full] = layout.place(("s1", center))
        out[corner] = layout.place(("s2", center))
    if len(set(out.values())) != len(out):
        raise AssertionError("layout is not injective")
    return out


def _candidate(base: Mapping[int, LineQubit], m: int, a: int, b: int) -> dict[int, int] | None:
    out = {}
    for v, q in base.items():
        c = line_to_coord(line_translate(q, a, b))
        if not _in_fabric_range(c, m):
            return None
        out[v] = linear_index(c, m)
    return out


def candidate_offsets(base: Mapping[int, LineQubit], graph: PegasusGraph, preferred: Iterable[tuple[int, int]] = ()) -> list[tuple[int, int]]:
    """Preferred offsets first, then every other in-range offset in lexicographic order."""
    reach = graph.m + 24
    rest = [(a, b) for a in range(-reach, reach + 1) for b in range(-reach, reach + 1)]
    pref = [tuple(p) for p in preferred]
    return pref + [o for o in rest if o not in set(pref)]


def repair_embedding(
    reduced: ReducedIsing,
    graph: PegasusGraph,
    mapping: Mapping[int, int],
    used: set[int],
    budget: int,
) -> dict[int, int] | None:
    """Re-place the variables of a damaged copy by bounded backtracking.

    Variables on dead or taken qubits, and one endpoint of every broken
    coupler, are unassigned.  They are then placed most-constrained-first
    (highest problem degree first) on free live qubits adjacent to the images
    of their mapped neighbors.  Gives up after ``budget`` placement attempts.
    """
    adj: dict[int, set[int]] = {v: set() for v in range(reduced.num_vars)}
    for a, b in reduced.quadratic:
        adj[a].add(b)
        adj[b].add(a)
    hw = graph.adjacency()
    assign = {v: q for v, q in mapping.items() if q in graph.nodes and q not in used}
    for a, b in problem_pairs(reduced):
        if a in assign and b in assign and not graph.has_coupler(assign[a], assign[b]):
            del assign[max(a, b, key=lambda v: (len(adj[v]), v))]
    todo = sorted((v for v in range(reduced.num_vars) if v not in assign), key=lambda v: (-len(adj[v]), v))
    taken = set(assign.values()) | used
    steps = [0]

    def options(v: int) -> list[int]:
        anchors = [assign[n] for n in adj[v] if n in assign]
        if not anchors:
            return []
        cand = set(hw[anchors[0]])
        for q in anchors[1:]:
            cand &= hw[q]
        return sorted(cand - taken)

    def rec(k: int) -> bool:
        if k == len(todo):
            return True
        v = todo[k]
        for q in options(v):
            steps[0] += 1
            if steps[0] > budget:
                return False
            assign[v] = q
            taken.add(q)
            if rec(k + 1):
                return True
            del assign[v]
            taken.discard(q)
        return False

    if budget <= 0 or not rec(0):
        return None
    return dict(sorted(assign.items()))


def tile_embeddings(
    reduced: ReducedIsing,
    lattice: HeavyHexLattice,
    graph: PegasusGraph,
    max_copies: int = 6,
    layout: CellLayout | None = None,
    repair_budget: int = 0,
) -> Tiling:
    """Greedily place translated copies of the structured layout.

    Offsets are tried in ``candidate_offsets`` order.  A copy is kept when it
    validates and avoids qubits already taken; copies touching dead hardware
    are skipped unless ``repair_budget`` > 0, in which case the damaged copy
    is handed to ``repair_embedding`` first.
    """
    layout = layout or load_cell_layout()
    base = structured_layout(lattice, reduced, layout)
    used: set[int] = set()
    chosen: list[NativeEmbedding] = []
    offsets: list[tuple[int, int]] = []
    repaired: list[int] = []
    for a, b in candidate_offsets(base, graph, layout.preferred_offsets):
        if len(chosen) >= max_copies:
            break
        mapping = _candidate(base, graph.m, a, b)
        if mapping is None:
            continue
        images = set(mapping.values())
        if images & used:
            continue
        ok, _ = validate_native_embedding(reduced, graph, mapping)
        was_repaired = False
        if not ok and repair_budget > 0:
            # only the ideal-hardware footprint may be salvaged; never steal neighbors' qubits
            fixed = repair_embedding(reduced, graph, mapping, used, repair_budget)
            if fixed is not None and validate_native_embedding(reduced, graph, fixed)[0]:
                mapping, ok, was_repaired = fixed, True, True
        if not ok:
            continue
        if set(mapping.values()) & used:
            continue
        if was_repaired:
            repaired.append(len(chosen))
        chosen.append(NativeEmbedding(mapping, len(chosen)))
        offsets.append((a, b))
        used |= set(mapping.values())
    return Tiling(tuple(chosen), tuple(offsets), tuple(repaired))


# -- washington template -----------------------------------------------------------

def complete_washington_instance(instance: CubicIsing) -> tuple[CubicIsing, HeavyHexLattice, list[int]]:
    """Lift a washington instance onto the completed lattice.

    Filler nodes, restored couplers and the cubic sites they create carry
    zero coefficients, so they are inert: they occupy qubits but never
    change an energy.
    """
    wash = load_washington()
    if instance.num_vars != wash.num_nodes:
        raise ValueError("instance is not defined on the washington lattice")
    full, fillers = completed_washington()
    lin = {v: instance.linear.get(v, 0.0) for v in full.nodes}
    quad = {e: instance.quadratic.get(e, 0.0) for e in full.edges}
    cub = {s: instance.cubic.get(s, 0.0) for s in full.cubic_sites}
    return CubicIsing(full.num_nodes, lin, quad, cub, full.name), full, fillers


def washington_template(instance: CubicIsing) -> tuple[ReducedIsing, HeavyHexLattice]:
    completed, lattice, _ = complete_washington_instance(instance)
    return reduce_instance(completed), lattice


# -- annealer problem export --------------------------------------------------------

def export_annealer_problem(reduced: ReducedIsing, embeddings: Iterable[NativeEmbedding], graph: PegasusGraph | None = None, provenance: dict | None = None) -> str:
    """JSON with qubit-indexed ``h`` and coupler-indexed ``J`` over all tiles.

    Coupler keys are ``"a,b"`` with ``a < b``.  Zero-weight terms are kept so
    the programmed structure is explicit.  ``offset`` is per tile.
    """
    h: dict[int, float] = {}
    J: dict[tuple[int, int], float] = {}
    tiles = []
    for emb in embeddings:
        if graph is not None:
            ok, msg = validate_native_embedding(reduced, graph, emb.mapping)
            if not ok:
                raise ValueError(f"tile {emb.tile}: {msg}")
        m = emb.mapping
        for v in range(reduced.num_vars):
            q = m[v]
            if q in h:
                raise ValueError(f"qubit {q} used by two tiles")
            h[q] = float(reduced.linear.get(v, 0.0))
        for (a, b), c in reduced.quadratic.items():
            key = (min(m[a], m[b]), max(m[a], m[b]))
            if key in J:
                raise ValueError(f"coupler {key} used twice")
            J[key] = float(c)
        tiles.append({"tile": emb.tile, "mapping": {str(v): q for v, q in sorted(m.items())}})
    doc = {
        "format": "annealer-problem v1",
        "h": {str(q): h[q] for q in sorted(h)},
        "J": {f"{a},{b}": J[(a, b)] for a, b in sorted(J)},
        "offset_per_tile": reduced.offset,
        "tiles": tiles,
        "provenance": dict(sorted((provenance or {}).items())),
    }
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def parse_annealer_problem(text: str) -> tuple[dict[int, float], dict[tuple[int, int], float], dict]:
    doc = json.loads(text)
    h = {int(k): float(v) for k, v in doc["h"].items()}
    J = {}
    for k, v in doc["J"].items():
        a, b = k.split(",")
        J[(int(a), int(b))] = float(v)
    return h, J, doc
