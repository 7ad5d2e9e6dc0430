"""Heavy-hexagonal lattices: construction, validation, edge coloring, cubic sites.

Every lattice lives on a common integer grid.  Even grid rows hold the long
rows of the lattice (corner qubits at even columns, bridge qubits at odd
columns); odd grid rows hold the vertical bridge qubits.  Between long rows
``2g`` and ``2g + 2`` a vertical bridge may sit at column ``c`` only when
``c % 4 == (2 * g) % 4``.  The grid position is what the Pegasus layout
consumes, and it fixes the corner/bridge bipartition independently of the
realized degrees (a boundary corner of degree 2 is still a corner).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

CORNER = "CORNER"
BRIDGE = "BRIDGE"

Edge = tuple[int, int]
Site = tuple[int, int, int]
Coord = tuple[int, int]


class LatticeError(ValueError):
    """Raised for graphs that violate the heavy-hex preconditions."""


def _edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class HeavyHexLattice:
    nodes: tuple[int, ...]
    edges: tuple[Edge, ...]
    node_class: dict[int, str]
    edge_color: dict[Edge, int]
    cubic_sites: tuple[Site, ...]
    coords: dict[int, Coord] = field(default_factory=dict)
    name: str = "heavyhex"

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {n: [] for n in self.nodes}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for n in adj:
            adj[n].sort()
        return adj

    def degree(self, node: int) -> int:
        return sum(1 for e in self.edges if node in e)

    def corners(self) -> list[int]:
        return [n for n in self.nodes if self.node_class[n] == CORNER]

    def bridges(self) -> list[int]:
        return [n for n in self.nodes if self.node_class[n] == BRIDGE]


def _validate_structure(nodes: Iterable[int], edges: Iterable[Edge], node_class: dict[int, str]) -> None:
    nodes = list(nodes)
    if sorted(node_class) != sorted(nodes):
        raise LatticeError("node_class must label every node exactly once")
    for n, cls in node_class.items():
        if cls not in (CORNER, BRIDGE):
            raise LatticeError(f"node {n}: unknown class {cls!r}")
    deg = {n: 0 for n in nodes}
    seen: set[Edge] = set()
    for u, v in edges:
        if u == v:
            raise LatticeError(f"self loop on node {u}")
        if u not in deg or v not in deg:
            raise LatticeError(f"edge ({u}, {v}) references an unknown node")
        e = _edge(u, v)
        if e in seen:
            raise LatticeError(f"duplicate edge {e}")
        seen.add(e)
        if node_class[u] == node_class[v]:
            raise LatticeError(f"edge {e} joins two {node_class[u]} nodes")
        deg[u] += 1
        deg[v] += 1
    for n, d in deg.items():
        limit = 3 if node_class[n] == CORNER else 2
        if d > limit:
            raise LatticeError(f"{node_class[n]} node {n} has degree {d} > {limit}")


def three_edge_coloring(nodes: Iterable[int], edges: Iterable[Edge], node_class: dict[int, str]) -> dict[Edge, int]:
    """Proper edge coloring of a bipartite heavy-hex graph with colors 1..3.

    Edges are processed in sorted order.  Each edge takes the lowest color
    free at both endpoints; when no such color exists, an alternating
    (Kempe) path is flipped first.  For bipartite graphs this never needs
    more than the maximum degree many colors.
    """
    nodes = list(nodes)
    edges = sorted(_edge(u, v) for u, v in edges)
    _validate_structure(nodes, edges, node_class)
    ncol = max([1] + [sum(1 for e in edges if n in e) for n in nodes])
    # at[node][color] -> neighbor reached through the edge of that color
    at: dict[int, dict[int, int]] = {n: {} for n in nodes}

    def free(n: int) -> list[int]:
        return [c for c in range(1, ncol + 1) if c not in at[n]]

    for u, v in edges:
        common = [c for c in free(u) if c not in at[v]]
        if common:
            c = common[0]
        else:
            a = free(u)[0]
            b = free(v)[0]
            # walk the a/b alternating path starting at v and swap its colors
            path = []
            x, want = v, a
            while want in at[x]:
                y = at[x][want]
                path.append((x, y, want))
                x, want = y, (b if want == a else a)
            for x, y, col in path:
                del at[x][col]
                del at[y][col]
            for x, y, col in path:
                other = b if col == a else a
                at[x][other] = y
                at[y][other] = x
            c = a
        at[u][c] = v
        at[v][c] = u

    colors: dict[Edge, int] = {}
    for n, table in at.items():
        for c, m in table.items():
            colors[_edge(n, m)] = c
    return colors


def is_proper_coloring(edges: Iterable[Edge], colors: dict[Edge, int], max_colors: int = 3) -> bool:
    seen: set[tuple[int, int]] = set()
    for u, v in edges:
        c = colors.get(_edge(u, v))
        if c is None or not 1 <= c <= max_colors:
            return False
        for n in (u, v):
            if (n, c) in seen:
                return False
            seen.add((n, c))
    return True


def is_bipartite_split(edges: Iterable[Edge], node_class: dict[int, str]) -> bool:
    return all(node_class[u] != node_class[v] for u, v in edges)


def cubic_sites(nodes: Iterable[int], edges: Iterable[Edge], node_class: dict[int, str]) -> list[Site]:
    """One ``(neighbor1, center, neighbor2)`` triple per degree-2 bridge node."""
    adj: dict[int, list[int]] = {n: [] for n in nodes}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    sites = []
    for n in sorted(adj):
        if node_class[n] == BRIDGE and len(adj[n]) == 2:
            a, b = sorted(adj[n])
            sites.append((a, n, b))
    return sites


def make_lattice(
    nodes: Iterable[int],
    edges: Iterable[Edge],
    node_class: dict[int, str],
    coords: dict[int, Coord] | None = None,
    name: str = "heavyhex",
) -> HeavyHexLattice:
    nodes = tuple(sorted(nodes))
    edges = tuple(sorted(_edge(u, v) for u, v in edges))
    node_class = dict(node_class)
    colors = three_edge_coloring(nodes, edges, node_class)
    sites = tuple(cubic_sites(nodes, edges, node_class))
    return HeavyHexLattice(nodes, edges, node_class, colors, sites, dict(coords or {}), name)


def grid_class(coord: Coord) -> str:
    row, col = coord
    return CORNER if row % 2 == 0 and col % 2 == 0 else BRIDGE


def grid_neighbors(coord: Coord) -> list[Coord]:
    """Neighbors of a grid position in the infinite heavy-hex lattice."""
    row, col = coord
    if row % 2 == 1:
        return [(row - 1, col), (row + 1, col)]
    out = [(row, col - 1), (row, col + 1)]
    if col % 2 == 0:
        for vrow in (row - 1, row + 1):
            g = (vrow - 1) // 2
            if col % 4 == (2 * g) % 4:
                out.append((vrow, col))
    return out


def is_grid_position(coord: Coord) -> bool:
    row, col = coord
    if row % 2 == 0:
        return True
    return col % 4 == (2 * ((row - 1) // 2)) % 4


def _hexagon(i: int, j: int) -> list[Coord]:
    c0 = 4 * j + 2 * (i % 2)
    top = [(2 * i, c0 + t) for t in range(5)]
    bottom = [(2 * i + 2, c0 + 4 - t) for t in range(5)]
    return top + [(2 * i + 1, c0 + 4)] + bottom + [(2 * i + 1, c0)]


def from_coordinates(coords: Iterable[Coord], name: str = "heavyhex") -> HeavyHexLattice:
    """Lattice induced on the given grid positions; ids follow input order."""
    ids: dict[Coord, int] = {}
    for c in coords:
        if not is_grid_position(c):
            raise LatticeError(f"{c} is not a heavy-hex grid position")
        if c not in ids:
            ids[c] = len(ids)
    edges = set()
    for c, i in ids.items():
        for nb in grid_neighbors(c):
            if nb in ids:
                edges.add(_edge(i, ids[nb]))
    node_class = {i: grid_class(c) for c, i in ids.items()}
    return make_lattice(ids.values(), edges, node_class, {i: c for c, i in ids.items()}, name)


def build_heavy_hex(rows: int, cols: int) -> HeavyHexLattice:
    """``rows`` x ``cols`` fused heavy hexagons in brick-wall arrangement.

    Cells are visited row-major; each cell contributes its 12 ring positions
    (clockwise from its top-left corner) and new positions get the next id.
    """
    if rows < 1 or cols < 1:
        raise LatticeError("rows and cols must be positive")
    order: list[Coord] = []
    for i in range(rows):
        for j in range(cols):
            order.extend(_hexagon(i, j))
    return from_coordinates(order, name=f"heavyhex_{rows}x{cols}")


def subgraph(lattice: HeavyHexLattice, keep: Iterable[int], name: str | None = None) -> HeavyHexLattice:
    """Induced sub-lattice on ``keep``, relabeled densely in the given order.

    Node classes and grid positions are inherited, so boundary corners keep
    their CORNER label even when they lose edges.
    """
    keep = list(dict.fromkeys(keep))
    relabel = {old: new for new, old in enumerate(keep)}
    edges = [(relabel[u], relabel[v]) for u, v in lattice.edges if u in relabel and v in relabel]
    node_class = {relabel[n]: lattice.node_class[n] for n in keep}
    coords = {relabel[n]: lattice.coords[n] for n in keep if n in lattice.coords}
    return make_lattice(relabel.values(), edges, node_class, coords, name or f"{lattice.name}_sub{len(keep)}")


def grow_sublattice(lattice: HeavyHexLattice, size: int, start: int | None = None) -> HeavyHexLattice:
    """Connected ``size``-node patch grown breadth-first from ``start``.

    ``start`` defaults to the lowest-id degree-3 corner (or node 0).
    """
    if not 1 <= size <= lattice.num_nodes:
        raise LatticeError(f"size must be in [1, {lattice.num_nodes}]")
    adj = lattice.adjacency()
    if start is None:
        start = next((n for n in lattice.nodes if len(adj[n]) == 3), lattice.nodes[0])
    seen = [start]
    queue = deque([start])
    while queue and len(seen) < size:
        n = queue.popleft()
        for m in adj[n]:
            if m not in seen and len(seen) < size:
                seen.append(m)
                queue.append(m)
    return subgraph(lattice, seen, name=f"{lattice.name}_patch{size}")


def desk_lattice(size: int) -> HeavyHexLattice:
    """Small connected patch of the 2x2 lattice, sized for dense simulation."""
    return grow_sublattice(build_heavy_hex(2, 2), size)


# -- line-oriented file format ------------------------------------------------

def dumps_lattice(lattice: HeavyHexLattice) -> str:
    lines = ["heavyhex v1"]
    for n in lattice.nodes:
        line = f"node {n} {lattice.node_class[n]}"
        if n in lattice.coords:
            line += " %d %d" % lattice.coords[n]
        lines.append(line)
    lines.extend(f"edge {u} {v}" for u, v in lattice.edges)
    return "\n".join(lines) + "\n"


def loads_lattice(text: str, name: str = "heavyhex") -> HeavyHexLattice:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != "heavyhex v1":
        raise LatticeError("missing 'heavyhex v1' header")
    node_class: dict[int, str] = {}
    coords: dict[int, Coord] = {}
    edges: list[Edge] = []
    seen: set[Edge] = set()
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "node" and len(parts) in (3, 5):
            n = int(parts[1])
            if n in node_class:
                raise LatticeError(f"duplicate node {n}")
            if parts[2] not in (CORNER, BRIDGE):
                raise LatticeError(f"node {n}: unknown class {parts[2]!r}")
            node_class[n] = parts[2]
            if len(parts) == 5:
                coords[n] = (int(parts[3]), int(parts[4]))
        elif parts[0] == "edge" and len(parts) == 3:
            e = _edge(int(parts[1]), int(parts[2]))
            if e in seen:
                raise LatticeError(f"duplicate edge {e}")
            seen.add(e)
            edges.append(e)
        else:
            raise LatticeError(f"cannot parse line: {ln!r}")
    return make_lattice(node_class, edges, node_class, coords, name)


def save_lattice(lattice: HeavyHexLattice, path: str | Path) -> None:
    Path(path).write_text(dumps_lattice(lattice))


def load_lattice(path: str | Path) -> HeavyHexLattice:
    path = Path(path)
    return loads_lattice(path.read_text(), name=path.stem)


def load_washington() -> HeavyHexLattice:
    """The 127-qubit ibm_washington coupling graph (two couplers absent)."""
    text = resources.files("heavyhex_qa").joinpath("data/ibm_washington.hhx").read_text()
    return loads_lattice(text, name="ibm_washington")


def completed_washington() -> tuple[HeavyHexLattice, list[int]]:
    """Washington with the two corner qubits of the ideal grid filled in.

    Also restores the two absent couplers.  Returns the completed lattice and
    the ids of the filler nodes (``127`` and ``128``).
    """
    wash = load_washington()
    coords = dict(wash.coords)
    fillers = []
    for pos in ((0, 14), (12, 0)):
        fillers.append(len(coords))
        coords[len(coords)] = pos
    order = sorted(coords, key=lambda n: n)
    lat = from_coordinates([coords[n] for n in order], name="ibm_washington_completed")
    return lat, fillers
