"""Independent reference implementations used only by the tests.

None of these import the code they check.
"""
from __future__ import annotations

import itertools
from functools import reduce

import networkx as nx
import numpy as np

S0 = (2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6)
S1 = (6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10)


def subdivided_hex_graph(rows: int, cols: int) -> nx.Graph:
    """Hexagonal lattice with every edge subdivided.

    networkx stacks hexagons along its first axis, so our (rows, cols)
    lattice corresponds to ``subdivided_hex_graph(cols, rows)``.
    """
    g = nx.hexagonal_lattice_graph(rows, cols)
    h = nx.Graph()
    for u, v in g.edges:
        mid = ("mid", u, v)
        h.add_edge(u, mid)
        h.add_edge(mid, v)
    return h


def hex_cells_enumeration(rows: int, cols: int) -> tuple[int, int]:
    """Node/edge counts by listing each hexagon's 12 boundary positions.

    Cell (i, j) starts at column 4j + 2(i mod 2) on long row i; positions
    are collected in a set, edges as unordered consecutive ring pairs.
    """
    nodes, edges = set(), set()
    for i in range(rows):
        for j in range(cols):
            c0 = 4 * j + 2 * (i % 2)
            ring = [("r", i, c0 + t) for t in range(5)] + [("v", i, c0 + 4)]
            ring += [("r", i + 1, c0 + 4 - t) for t in range(5)] + [("v", i, c0)]
            nodes.update(ring)
            for a, b in zip(ring, ring[1:] + ring[:1]):
                edges.add(frozenset((a, b)))
    return len(nodes), len(edges)


def energy_term_by_term(linear, quadratic, cubic, spins) -> int | float:
    total = 0
    for v in linear:
        total = total + linear[v] * spins[v]
    for (u, v) in quadratic:
        total = total + quadratic[(u, v)] * spins[u] * spins[v]
    for (a, m, b) in cubic:
        total = total + cubic[(a, m, b)] * spins[a] * spins[m] * spins[b]
    return total


def degree_two_bridges(node_class, edges):
    deg = {}
    for u, v in edges:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    return sorted(n for n, c in node_class.items() if c == "BRIDGE" and deg.get(n, 0) == 2)


def proper_edge_coloring(edges, colors) -> bool:
    at = {}
    for e in edges:
        c = colors[tuple(sorted(e))]
        for n in e:
            if c in at.setdefault(n, set()):
                return False
            at[n].add(c)
    return True


# -- Pegasus by segment crossing ---------------------------------------------------

def pegasus_geometric(m: int) -> tuple[set, set, dict]:
    """Fabric qubits and couplers of P_m from line-segment geometry.

    A vertical qubit (0, w, k, z) is the segment x = 12w + k, y in
    [12z + S0[k], 12z + S0[k] + 12); a horizontal qubit (1, w, k, z) is
    y = 12w + k, x in [12z + S1[k], 12z + S1[k] + 12).  Two perpendicular
    qubits couple iff their segments cross.  Returns nodes, edges and
    the kind of every edge.
    """
    verts = {}
    hors = {}
    for w in range(m):
        for k in range(12):
            for z in range(m - 1):
                verts[(0, w, k, z)] = (12 * w + k, 12 * z + S0[k])
                hors[(1, w, k, z)] = (12 * w + k, 12 * z + S1[k])
    kinds = {}
    for vq, (x, y0) in verts.items():
        for hq, (y, x0) in hors.items():
            if y0 <= y < y0 + 12 and x0 <= x < x0 + 12:
                kinds[frozenset((vq, hq))] = "internal"
    fabric = {q for e in kinds for q in e}
    for q in list(verts) + list(hors):
        u, w, k, z = q
        nxt = (u, w, k, z + 1)
        if q in fabric and nxt in fabric:
            kinds[frozenset((q, nxt))] = "external"
        if k % 2 == 0:
            tw = (u, w, k + 1, z)
            if q in fabric and tw in fabric:
                kinds[frozenset((q, tw))] = "odd"
    return fabric, set(kinds), kinds


# -- dense-matrix circuit reference ---------------------------------------------------

def _kron_all(ops):
    return reduce(np.kron, ops)


def dense_unitary(num_qubits: int, gates) -> np.ndarray:
    """Full 2^n unitary with qubit 0 as the least significant tensor factor."""
    I2 = np.eye(2)
    Hm = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    Xm = np.array([[0, 1], [1, 0]])
    P0 = np.diag([1, 0])
    P1 = np.diag([0, 1])
    U = np.eye(2**num_qubits, dtype=complex)

    def single(q, mat):
        ops = [I2] * num_qubits
        ops[num_qubits - 1 - q] = mat
        return _kron_all(ops)

    for kind, qubits, angle in gates:
        if kind == "H":
            G = single(qubits[0], Hm)
        elif kind == "X":
            G = single(qubits[0], Xm)
        elif kind == "RZ":
            G = single(qubits[0], np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)]))
        elif kind == "RX":
            c, s = np.cos(angle / 2), np.sin(angle / 2)
            G = single(qubits[0], np.array([[c, -1j * s], [-1j * s, c]]))
        elif kind == "CNOT":
            c, t = qubits
            a = [I2] * num_qubits
            b = [I2] * num_qubits
            a[num_qubits - 1 - c] = P0
            b[num_qubits - 1 - c] = P1
            b[num_qubits - 1 - t] = Xm
            G = _kron_all(a) + _kron_all(b)
        else:
            continue
        U = G @ U
    return U


def all_spin_vectors(n: int):
    return list(itertools.product((1, -1), repeat=n))
