"""QAOA circuits for cubic heavy-hex Ising instances.

The phase separator uses only lattice couplers.  Every CNOT targets a bridge
qubit.  A bridge ``m`` with neighbors ``a`` and ``b`` (``a`` being the one whose
edge has the lower color) receives CNOTs from a, b, a, b in that order.  After
the first, second and third CNOT the bridge holds the parities x_a x_m,
x_a x_b x_m and x_b x_m, so a single RZ after each of them imprints the
quadratic, cubic and quadratic phases.  An edge of color k fires in layers k
and k + 3 of a six-layer round, so each round has CNOT depth 6.

Angle convention: ``RZ(t) = diag(exp(-i t/2), exp(i t/2))`` and a term with
coefficient c gets ``RZ(2 gamma c)``, which makes the separator equal to
``exp(-i gamma C(x))`` exactly.  The mixer is ``RX(2 beta)`` on every qubit.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .instance import CubicIsing, SampleSet, _edge, text_to_spins
from .topology import BRIDGE, HeavyHexLattice

H, X, RZ, RX, CNOT, MEASURE = "H", "X", "RZ", "RX", "CNOT", "MEASURE"
ROTATIONS = (RZ, RX)
GATE_KINDS = (H, X, RZ, RX, CNOT, MEASURE)


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        want = 2 if self.kind == CNOT else 1
        if len(self.qubits) != want:
            raise ValueError(f"{self.kind} takes {want} qubit(s)")
        if self.kind == CNOT and self.qubits[0] == self.qubits[1]:
            raise ValueError("CNOT operands must differ")
        if (self.kind in ROTATIONS) != (self.angle is not None):
            raise ValueError(f"{self.kind}: angle presence mismatch")


@dataclass
class Circuit:
    num_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def append(self, kind: str, *qubits: int, angle: float | None = None) -> None:
        for q in qubits:
            if not 0 <= q < self.num_qubits:
                raise ValueError(f"qubit {q} out of range")
        self.gates.append(Gate(kind, tuple(qubits), None if angle is None else float(angle)))

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def without_measurements(self) -> "Circuit":
        return Circuit(self.num_qubits, [g for g in self.gates if g.kind != MEASURE])

    def validate(self) -> None:
        seen_measure = False
        for g in self.gates:
            if any(not 0 <= q < self.num_qubits for q in g.qubits):
                raise ValueError(f"gate {g} has an out-of-range operand")
            if g.kind == MEASURE:
                seen_measure = True
            elif seen_measure:
                raise ValueError("MEASURE gates must form a trailing block")


@dataclass(frozen=True)
class AngleParams:
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        if len(self.gammas) != len(self.betas) or not self.gammas:
            raise ValueError("need p >= 1 gammas and betas of equal length")
        if not all(math.isfinite(a) for a in self.gammas + self.betas):
            raise ValueError("angles must be finite")

    @property
    def p(self) -> int:
        return len(self.gammas)


def _check_instance(lattice: HeavyHexLattice, instance: CubicIsing) -> None:
    if instance.num_vars != lattice.num_nodes:
        raise ValueError("instance and lattice have different sizes")
    if not set(instance.quadratic) <= set(lattice.edges):
        raise ValueError("instance quadratic term on a non-edge")
    if not set(instance.cubic) <= set(lattice.cubic_sites):
        raise ValueError("instance cubic term on a non-site")


def phase_separator_layers(lattice: HeavyHexLattice, instance: CubicIsing, gamma: float) -> list[list[Gate]]:
    """Gates of one phase separator grouped into six CNOT layers.

    Each layer lists its CNOTs followed by the RZ gates that act right after
    them.  Linear RZ gates sit in front of the layer where they are placed.
    """
    _check_instance(lattice, instance)
    adj = lattice.adjacency()
    color = lattice.edge_color
    layers: list[list[Gate]] = [[] for _ in range(6)]
    pre: list[list[Gate]] = [[] for _ in range(6)]
    busy: list[set[int]] = [set() for _ in range(6)]

    def rz(q: int, coef: float) -> Gate:
        return Gate(RZ, (q,), 2.0 * gamma * coef)

    for m in lattice.nodes:
        if lattice.node_class[m] != BRIDGE or not adj[m]:
            continue
        nbrs = sorted(adj[m], key=lambda n: (color[_edge(n, m)], n))
        fires = []
        for n in nbrs:
            k = color[_edge(n, m)]
            fires.append((k - 1, n))
            fires.append((k + 2, n))
        fires.sort()
        for layer, n in fires:
            busy[layer].update((n, m))
        a = nbrs[0]
        b = nbrs[1] if len(nbrs) > 1 else None
        slots = [instance.quadratic.get(_edge(a, m), 0.0)]
        if b is not None:
            site = (min(a, b), m, max(a, b))
            slots += [instance.cubic.get(site, 0.0), instance.quadratic.get(_edge(b, m), 0.0)]
        for idx, (layer, n) in enumerate(fires):
            layers[layer].append(Gate(CNOT, (n, m)))
            if idx < len(slots) and slots[idx] != 0.0:
                layers[layer].append(rz(m, slots[idx]))
        if instance.linear.get(m, 0.0) != 0.0:
            pre[fires[0][0]].append(rz(m, instance.linear[m]))

    for v in lattice.nodes:
        if lattice.node_class[v] == BRIDGE and adj[v]:
            continue
        c = instance.linear.get(v, 0.0)
        if c == 0.0:
            continue
        idle = [L for L in range(6) if v not in busy[L]]
        pre[idle[0] if idle else 0].append(rz(v, c))

    out = []
    for L in range(6):
        cnots = [g for g in layers[L] if g.kind == CNOT]
        order = sorted(range(len(cnots)), key=lambda i: cnots[i].qubits[1])
        # keep every RZ directly after the CNOT on its own target
        grouped: list[Gate] = []
        by_target: dict[int, list[Gate]] = {}
        for g in layers[L]:
            if g.kind == RZ:
                by_target.setdefault(g.qubits[0], []).append(g)
        for i in order:
            grouped.append(cnots[i])
        for i in order:
            grouped.extend(by_target.get(cnots[i].qubits[1], []))
        out.append(sorted(pre[L], key=lambda g: g.qubits[0]) + grouped)
    return out


def phase_separator(lattice: HeavyHexLattice, instance: CubicIsing, gamma: float) -> Circuit:
    circ = Circuit(lattice.num_nodes)
    for layer in phase_separator_layers(lattice, instance, gamma):
        circ.gates.extend(layer)
    return circ


def build_qaoa_circuit(lattice: HeavyHexLattice, instance: CubicIsing, params: AngleParams, measure: bool = True) -> Circuit:
    n = lattice.num_nodes
    circ = Circuit(n)
    for q in range(n):
        circ.append(H, q)
    for gamma, beta in zip(params.gammas, params.betas):
        circ.gates.extend(phase_separator(lattice, instance, gamma).gates)
        for q in range(n):
            circ.append(RX, q, angle=2.0 * beta)
    if measure:
        for q in range(n):
            circ.append(MEASURE, q)
    return circ


def cnot_depth(circuit: Circuit) -> int:
    """Longest CNOT chain under qubit-sharing order; single-qubit gates ignored."""
    level = [0] * circuit.num_qubits
    for g in circuit.gates:
        if g.kind == CNOT:
            a, b = g.qubits
            d = max(level[a], level[b]) + 1
            level[a] = level[b] = d
    return max(level, default=0)


# -- scheduling and dynamical decoupling --------------------------------------

DEFAULT_DURATIONS = {X: 1, H: 2, RX: 2, CNOT: 4, MEASURE: 16, RZ: 0}


@dataclass(frozen=True)
class ScheduledCircuit:
    circuit: Circuit
    starts: tuple[int, ...]
    durations: tuple[int, ...]
    alignment: int = 1

    @property
    def makespan(self) -> int:
        return max((s + d for s, d in zip(self.starts, self.durations)), default=0)


def _ceil_to(t: int, a: int) -> int:
    return -(-t // a) * a


def schedule_alap(circuit: Circuit, durations: Mapping[str, int] = DEFAULT_DURATIONS, alignment: int = 1) -> ScheduledCircuit:
    """As-late-as-possible start times, snapped to multiples of ``alignment``.

    The makespan is fixed by an as-soon-as-possible pass first, then gates
    are pushed right in reverse order.
    """
    if alignment < 1:
        raise ValueError("alignment must be positive")
    missing = {g.kind for g in circuit.gates} - set(durations)
    if missing:
        raise ValueError(f"no duration for {sorted(missing)}")
    dur = [int(durations[g.kind]) for g in circuit.gates]
    ready = [0] * circuit.num_qubits
    makespan = 0
    for g, d in zip(circuit.gates, dur):
        s = _ceil_to(max(ready[q] for q in g.qubits), alignment)
        for q in g.qubits:
            ready[q] = s + d
        makespan = max(makespan, s + d)
    makespan = _ceil_to(makespan, alignment)
    latest = [makespan] * circuit.num_qubits
    starts = [0] * len(circuit.gates)
    for i in range(len(circuit.gates) - 1, -1, -1):
        g = circuit.gates[i]
        s = (min(latest[q] for q in g.qubits) - dur[i]) // alignment * alignment
        starts[i] = s
        for q in g.qubits:
            latest[q] = s
    return ScheduledCircuit(circuit, tuple(starts), tuple(dur), alignment)


def insert_ddd(circuit: Circuit, durations: Mapping[str, int] = DEFAULT_DURATIONS, alignment: int = 1) -> Circuit:
    """Fill idle windows of an ALAP schedule with X-X pairs.

    A window is the gap between two consecutive gates on one qubit; the
    stretch before a qubit's first gate is left alone because the qubit is
    still in its initial state there.  One pair goes at the aligned start of
    every window that can hold two back-to-back X gates.
    """
    dx = int(durations.get(X, 0))
    if dx <= 0:
        raise ValueError("X duration must be positive to insert decoupling pairs")
    sched = schedule_alap(circuit, durations, alignment)
    per_qubit: dict[int, list[int]] = {q: [] for q in range(circuit.num_qubits)}
    for i, g in enumerate(circuit.gates):
        for q in g.qubits:
            per_qubit[q].append(i)
    keyed = [(s, float(i), g) for i, (s, g) in enumerate(zip(sched.starts, circuit.gates))]
    for q, idxs in per_qubit.items():
        for prev, nxt in zip(idxs, idxs[1:]):
            t0 = sched.starts[prev] + sched.durations[prev]
            t1 = sched.starts[nxt]
            first = _ceil_to(t0, alignment)
            second = _ceil_to(first + dx, alignment)
            if second + dx <= t1:
                keyed.append((first, prev + 0.5, Gate(X, (q,))))
                keyed.append((second, prev + 0.5, Gate(X, (q,))))
    keyed.sort(key=lambda t: (t[0], t[1]))
    return Circuit(circuit.num_qubits, [g for _, _, g in keyed])


def load_durations(path: str | Path) -> tuple[dict[str, int], int]:
    """Read a ``key=value`` duration table; ``alignment`` is an optional key."""
    table = dict(DEFAULT_DURATIONS)
    alignment = 1
    for ln in Path(path).read_text().splitlines():
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        key, _, val = ln.partition("=")
        key = key.strip().upper()
        if key == "ALIGNMENT":
            alignment = int(val)
        elif key in GATE_KINDS:
            table[key] = int(val)
        else:
            raise ValueError(f"unknown duration key {key!r}")
    return table, alignment


# -- OpenQASM 2.0 --------------------------------------------------------------

_QASM_NAME = {H: "h", X: "x", RZ: "rz", RX: "rx", CNOT: "cx"}
_QASM_KIND = {v: k for k, v in _QASM_NAME.items()}


def to_openqasm(circuit: Circuit) -> str:
    n = circuit.num_qubits
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{n}];", f"creg c[{n}];"]
    for g in circuit.gates:
        if g.kind == MEASURE:
            q = g.qubits[0]
            lines.append(f"measure q[{q}] -> c[{q}];")
        elif g.kind == CNOT:
            lines.append(f"cx q[{g.qubits[0]}],q[{g.qubits[1]}];")
        elif g.kind in ROTATIONS:
            lines.append(f"{_QASM_NAME[g.kind]}({g.angle!r}) q[{g.qubits[0]}];")
        else:
            lines.append(f"{_QASM_NAME[g.kind]} q[{g.qubits[0]}];")
    return "\n".join(lines) + "\n"


_Q = r"q\[(\d+)\]"


def from_openqasm(text: str) -> Circuit:
    """Parse the subset of OpenQASM 2.0 that ``to_openqasm`` writes."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if lines[:2] != ["OPENQASM 2.0;", 'include "qelib1.inc";']:
        raise ValueError("unexpected OpenQASM header")
    m = re.fullmatch(r"qreg q\[(\d+)\];", lines[2])
    if not m:
        raise ValueError("missing qreg")
    circ = Circuit(int(m.group(1)))
    for ln in lines[4:]:
        if mm := re.fullmatch(rf"measure {_Q} -> c\[(\d+)\];", ln):
            circ.append(MEASURE, int(mm.group(1)))
        elif mm := re.fullmatch(rf"cx {_Q},{_Q};", ln):
            circ.append(CNOT, int(mm.group(1)), int(mm.group(2)))
        elif mm := re.fullmatch(rf"(rz|rx)\(([^)]+)\) {_Q};", ln):
            circ.append(_QASM_KIND[mm.group(1)], int(mm.group(3)), angle=float(mm.group(2)))
        elif mm := re.fullmatch(rf"(h|x) {_Q};", ln):
            circ.append(_QASM_KIND[mm.group(1)], int(mm.group(2)))
        else:
            raise ValueError(f"cannot parse OpenQASM line {ln!r}")
    return circ


# -- decoding -----------------------------------------------------------------

def bits_to_spins(bits: str) -> tuple[int, ...]:
    """Qubit-order bitstring (qubit 0 first) to spins with 0 -> +1, 1 -> -1."""
    if set(bits) - {"0", "1"}:
        raise ValueError(f"bad bitstring {bits!r}")
    return text_to_spins(bits.replace("0", "+").replace("1", "-"))


def decode_samples(counts: Mapping[str, int], instance: CubicIsing, provenance: dict | None = None) -> SampleSet:
    out: dict[tuple[int, ...], int] = {}
    for bits, c in counts.items():
        if len(bits) != instance.num_vars:
            raise ValueError(f"bitstring length {len(bits)} != {instance.num_vars}")
        s = bits_to_spins(bits)
        out[s] = out.get(s, 0) + int(c)
    return SampleSet.from_counts(instance, out, provenance)


def gate_counts(circuit: Circuit) -> dict[str, int]:
    return {k: circuit.count(k) for k in GATE_KINDS if circuit.count(k)}

