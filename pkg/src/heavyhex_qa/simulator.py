"""Dense statevector simulation.

Qubit ``q`` is bit ``q`` of a basis index (qubit 0 least significant).
Bitstrings are written in qubit order, qubit 0 first.
"""
from __future__ import annotations

import numpy as np

from .instance import CubicIsing, energy_table
from .qaoa import CNOT, H, MEASURE, RX, RZ, X, Circuit, phase_separator
from .topology import HeavyHexLattice

DEFAULT_QUBIT_CAP = 26
ORACLE_QUBIT_CAP = 14

_SQ2 = 1.0 / np.sqrt(2.0)


class QubitCapError(RuntimeError):
    """Raised when a circuit is wider than the configured dense-simulation cap."""


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise QubitCapError(f"{n} qubits exceeds the simulation cap of {cap}")


def gate_matrix(kind: str, angle: float | None = None) -> np.ndarray:
    if kind == H:
        return np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
    if kind == X:
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if kind == RZ:
        return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])
    if kind == RX:
        c, s = np.cos(angle / 2), np.sin(angle / 2)
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    raise ValueError(f"no single-qubit matrix for {kind}")


def apply_1q(state: np.ndarray, n: int, q: int, mat: np.ndarray) -> np.ndarray:
    v = state.reshape(2 ** (n - q - 1), 2, 2**q)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = mat[0, 0] * a0 + mat[0, 1] * a1
    v[:, 1, :] = mat[1, 0] * a0 + mat[1, 1] * a1
    return state


def apply_diag_1q(state: np.ndarray, n: int, q: int, d0: complex, d1: complex) -> np.ndarray:
    v = state.reshape(2 ** (n - q - 1), 2, 2**q)
    v[:, 0, :] *= d0
    v[:, 1, :] *= d1
    return state


def apply_cnot(state: np.ndarray, n: int, control: int, target: int) -> np.ndarray:
    v = state.reshape([2] * n)
    # axis for qubit q in a C-ordered reshape is n - 1 - q
    ca, ta = n - 1 - control, n - 1 - target
    idx1 = [slice(None)] * n
    idx1[ca] = 1
    sub = v[tuple(idx1)]
    t_axis = ta if ta < ca else ta - 1
    sub_view = np.moveaxis(sub, t_axis, 0)
    tmp = sub_view[0].copy()
    sub_view[0] = sub_view[1]
    sub_view[1] = tmp
    return state


def apply_gate(state: np.ndarray, n: int, gate) -> np.ndarray:
    if gate.kind == CNOT:
        return apply_cnot(state, n, *gate.qubits)
    if gate.kind == RZ:
        return apply_diag_1q(state, n, gate.qubits[0], np.exp(-0.5j * gate.angle), np.exp(0.5j * gate.angle))
    if gate.kind == MEASURE:
        raise ValueError("strip MEASURE gates before statevector simulation")
    return apply_1q(state, n, gate.qubits[0], gate_matrix(gate.kind, gate.angle))


def run_statevector(circuit: Circuit, initial: np.ndarray | None = None, cap: int = DEFAULT_QUBIT_CAP) -> np.ndarray:
    """Final amplitudes; trailing MEASURE gates are ignored."""
    n = circuit.num_qubits
    _check_cap(n, cap)
    if initial is None:
        state = np.zeros(2**n, dtype=complex)
        state[0] = 1.0
    else:
        state = np.array(initial, dtype=complex)
    for g in circuit.gates:
        if g.kind == MEASURE:
            continue
        apply_gate(state, n, g)
    return state


def probabilities(state: np.ndarray) -> np.ndarray:
    p = np.abs(state) ** 2
    return p / p.sum()


def index_to_bits(index: int, n: int) -> str:
    return "".join("1" if (index >> q) & 1 else "0" for q in range(n))


def sample_indices(probs: np.ndarray, shots: int, seed: int) -> np.ndarray:
    """Multinomial counts per basis index, deterministic in ``seed``."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    return rng.multinomial(shots, probs)


def sample_counts(circuit: Circuit, shots: int, seed: int, cap: int = DEFAULT_QUBIT_CAP) -> dict[str, int]:
    n = circuit.num_qubits
    counts = sample_indices(probabilities(run_statevector(circuit, cap=cap)), shots, seed)
    return {index_to_bits(int(i), n): int(counts[i]) for i in np.nonzero(counts)[0]}


def phase_separator_diagonal(lattice: HeavyHexLattice, instance: CubicIsing, gamma: float) -> np.ndarray:
    """Diagonal of the compiled separator, found by pushing every basis state through it.

    Only CNOT and RZ gates occur, so each basis state stays a basis state
    with a phase.  All ``2**n`` of them are tracked at once; a state that
    does not return to itself means the circuit is not diagonal.
    """
    n = lattice.num_nodes
    _check_cap(n, ORACLE_QUBIT_CAP)
    circ = phase_separator(lattice, instance, gamma)
    idx = np.arange(2**n, dtype=np.int64)
    phase = np.ones(2**n, dtype=complex)
    for g in circ.gates:
        if g.kind == CNOT:
            c, t = g.qubits
            idx ^= ((idx >> c) & 1) << t
        elif g.kind == RZ:
            bit = (idx >> g.qubits[0]) & 1
            phase *= np.where(bit == 1, np.exp(0.5j * g.angle), np.exp(-0.5j * g.angle))
        else:
            raise ValueError(f"unexpected {g.kind} in a phase separator")
    if not np.array_equal(idx, np.arange(2**n)):
        raise AssertionError("compiled phase separator does not return basis states to themselves")
    return phase


def phase_oracle_check(lattice: HeavyHexLattice, instance: CubicIsing, gamma: float) -> float:
    """Max |compiled diagonal - exp(-i gamma C(x))| after removing one global phase."""
    got = phase_separator_diagonal(lattice, instance, gamma)
    want = np.exp(-1j * gamma * energy_table(instance))
    nz = np.nonzero(np.abs(got) > 1e-12)[0][0]
    got = got / (got[nz] / abs(got[nz]))
    want = want / (want[nz] / abs(want[nz]))
    return float(np.max(np.abs(got - want)))


def qaoa_state_from_table(energies: np.ndarray, gammas, betas) -> np.ndarray:
    """QAOA state from a precomputed energy table.

    Same unitary as the compiled circuit (the separator is exactly
    ``exp(-i gamma C)``), used to make full angle grids cheap.
    """
    n = int(np.log2(len(energies)))
    state = np.full(2**n, 2 ** (-n / 2), dtype=complex)
    for g, b in zip(gammas, betas):
        state *= np.exp(-1j * g * energies)
        mat = gate_matrix(RX, 2.0 * b)
        for q in range(n):
            apply_1q(state, n, q, mat)
    return state


def save_amplitudes(state: np.ndarray, path) -> None:
    n = int(np.log2(len(state)))
    lines = ["index,bits,real,imag"]
    for i, a in enumerate(state):
        lines.append(f"{i},{index_to_bits(i, n)},{a.real!r},{a.imag!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
