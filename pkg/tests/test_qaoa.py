import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heavyhex_qa.instance import energy_table, evaluate_energy, generate_instance
from heavyhex_qa.qaoa import (
    CNOT,
    DEFAULT_DURATIONS,
    MEASURE,
    RZ,
    X,
    AngleParams,
    Circuit,
    Gate,
    bits_to_spins,
    build_qaoa_circuit,
    cnot_depth,
    decode_samples,
    from_openqasm,
    gate_counts,
    insert_ddd,
    load_durations,
    phase_separator,
    phase_separator_layers,
    schedule_alap,
    to_openqasm,
)
from heavyhex_qa.simulator import phase_oracle_check, probabilities, run_statevector
from heavyhex_qa.topology import BRIDGE, build_heavy_hex, desk_lattice, grow_sublattice, load_washington

import oracles

HEX = build_heavy_hex(1, 1)
P1 = AngleParams((0.3,), (0.2,))


def golden_circuit():
    return build_qaoa_circuit(HEX, generate_instance(HEX, 0), AngleParams((0.375,), (0.25,)))


def test_hexagon_cnot_count():
    circ = build_qaoa_circuit(HEX, generate_instance(HEX, 1), P1)
    assert circ.count(CNOT) == 24


@pytest.mark.parametrize("rounds", [1, 2])
def test_washington_depth(rounds):
    lat = load_washington()
    params = AngleParams((0.3,) * rounds, (0.2,) * rounds)
    circ = build_qaoa_circuit(lat, generate_instance(lat, 0), params)
    assert cnot_depth(circ) == 6 * rounds
    assert circ.count(CNOT) == 2 * len(lat.edges) * rounds


@pytest.mark.parametrize("shape", [(2, 2), (2, 3), (3, 3), (4, 5)])
def test_parametric_depth(shape):
    lat = build_heavy_hex(*shape)
    sep = phase_separator(lat, generate_instance(lat, 2), 0.4)
    assert cnot_depth(sep) == 6
    assert sep.count(CNOT) == 2 * len(lat.edges)


def test_cnots_target_bridges_in_a_b_a_b_order():
    lat = load_washington()
    sep = phase_separator(lat, generate_instance(lat, 0), 0.1)
    per_target = {}
    for g in sep.gates:
        if g.kind == CNOT:
            assert lat.node_class[g.qubits[1]] == BRIDGE
            per_target.setdefault(g.qubits[1], []).append(g.qubits[0])
    for m, controls in per_target.items():
        if len(controls) == 4:
            a, b = controls[:2]
            assert controls == [a, b, a, b]
            assert lat.edge_color[tuple(sorted((a, m)))] < lat.edge_color[tuple(sorted((b, m)))]


def test_layers_have_no_qubit_conflicts():
    lat = load_washington()
    for layer in phase_separator_layers(lat, generate_instance(lat, 0), 0.1):
        used = [q for g in layer if g.kind == CNOT for q in g.qubits]
        assert len(used) == len(set(used))


def test_cnot_depth_trivial_cases():
    c = Circuit(4)
    c.append("H", 0)
    assert cnot_depth(c) == 0
    c.append(CNOT, 0, 1)
    c.append(CNOT, 2, 3)
    assert cnot_depth(c) == 1
    c.append(CNOT, 1, 2)
    assert cnot_depth(c) == 2


def test_separator_equals_dense_phase_oracle():
    lat = grow_sublattice(build_heavy_hex(1, 2), 7)
    inst = generate_instance(lat, 3)
    gamma = 0.61
    U = oracles.dense_unitary(lat.num_nodes, [(g.kind, g.qubits, g.angle) for g in phase_separator(lat, inst, gamma).gates])
    assert np.allclose(U, np.diag(np.diag(U)), atol=1e-12)
    d = np.diag(U)
    want = np.exp(-1j * gamma * energy_table(inst))
    assert np.max(np.abs(d / d[0] - want / want[0])) < 1e-9


def test_separator_on_basis_states_by_statevector():
    inst = generate_instance(HEX, 4)
    gamma = 0.7
    sep = phase_separator(HEX, inst, gamma)
    table = energy_table(inst)
    rng = np.random.default_rng(0)
    ref = None
    for x in rng.choice(2**12, size=40, replace=False):
        init = np.zeros(2**12, dtype=complex)
        init[x] = 1
        out = run_statevector(sep, init)
        assert abs(abs(out[x]) - 1) < 1e-12
        ratio = out[x] / np.exp(-1j * gamma * table[x])
        ref = ratio if ref is None else ref
        assert abs(ratio - ref) < 1e-9


@settings(max_examples=25)
@given(st.integers(6, 14), st.integers(0, 2**32), st.floats(-np.pi, np.pi, allow_nan=False), st.integers(0, 30))
def test_phase_oracle_property(size, seed, gamma, start):
    base = build_heavy_hex(2, 2)
    lat = grow_sublattice(base, size, start % base.num_nodes)
    inst = generate_instance(lat, seed)
    assert phase_oracle_check(lat, inst, gamma) < 1e-9


def test_linear_only_and_unused_nodes():
    lat = desk_lattice(8)
    inst = generate_instance(lat, 0)
    only_lin = type(inst)(inst.num_vars, inst.linear, {}, {})
    assert phase_oracle_check(lat, only_lin, 0.9) < 1e-9
    none = type(inst)(inst.num_vars, {}, {}, {})
    assert phase_oracle_check(lat, none, 0.9) < 1e-12


def test_mismatched_instance_rejected():
    with pytest.raises(ValueError):
        build_qaoa_circuit(HEX, generate_instance(desk_lattice(8), 0), P1)


# -- dynamical decoupling --------------------------------------------------------

def test_ddd_without_idle_windows_is_unchanged():
    c = Circuit(2)
    c.append("H", 0)
    c.append("H", 1)
    c.append(CNOT, 0, 1)
    c.append(MEASURE, 0)
    c.append(MEASURE, 1)
    assert insert_ddd(c).gates == c.gates


def _per_qubit(circ):
    out = {}
    for g in circ.gates:
        for q in g.qubits:
            out.setdefault(q, []).append(g)
    return out


def test_ddd_inserts_x_pairs_only():
    lat = desk_lattice(10)
    circ = build_qaoa_circuit(lat, generate_instance(lat, 0), AngleParams((0.3, 0.5), (0.2, 0.1)))
    dd = insert_ddd(circ)
    assert dd.count(X) > 0 and dd.count(X) % 2 == 0
    before, after = _per_qubit(circ), _per_qubit(dd)
    for q in before:
        assert [g for g in after[q] if g.kind != X] == before[q]
        run = 0
        for g in after[q]:
            if g.kind == X:
                run += 1
            else:
                assert run % 2 == 0
                run = 0
        assert run % 2 == 0
    # pairs only fill existing gaps, so the schedule length is unchanged
    sched = schedule_alap(dd)
    assert sched.makespan == schedule_alap(circ).makespan


def test_ddd_respects_alignment():
    lat = desk_lattice(8)
    circ = build_qaoa_circuit(lat, generate_instance(lat, 0), P1)
    dur = dict(DEFAULT_DURATIONS)
    dd = insert_ddd(circ, dur, alignment=4)
    assert dd.count(X) % 2 == 0
    with pytest.raises(ValueError):
        insert_ddd(circ, {**dur, X: 0})


@pytest.mark.parametrize("seed", range(4))
def test_ddd_preserves_distribution(seed):
    lat = grow_sublattice(build_heavy_hex(2, 2), 8 + seed, start=seed * 3)
    rng = np.random.default_rng(seed)
    params = AngleParams(tuple(rng.uniform(0, np.pi, 2)), tuple(rng.uniform(0, np.pi, 2)))
    circ = build_qaoa_circuit(lat, generate_instance(lat, seed), params)
    p0 = probabilities(run_statevector(circ))
    p1 = probabilities(run_statevector(insert_ddd(circ)))
    assert 0.5 * np.abs(p0 - p1).sum() < 1e-9


def test_duration_file(tmp_path):
    f = tmp_path / "d.txt"
    f.write_text("# durations\ncnot = 8\nx=2\nalignment=4\n")
    table, align = load_durations(f)
    assert table[CNOT] == 8 and table[X] == 2 and align == 4
    f.write_text("toffoli=3\n")
    with pytest.raises(ValueError):
        load_durations(f)


# -- OpenQASM and decoding ----------------------------------------------------------

def test_empty_circuit_qasm():
    assert to_openqasm(Circuit(1)) == 'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[1];\ncreg c[1];\n'


def test_qasm_gate_count_and_round_trip():
    circ = insert_ddd(golden_circuit())
    text = to_openqasm(circ)
    assert len(text.splitlines()) - 4 == len(circ.gates)
    assert from_openqasm(text).gates == circ.gates


def test_qasm_matches_golden(golden_dir):
    assert to_openqasm(golden_circuit()) == (golden_dir / "hexagon_p1.qasm").read_text()


def test_golden_qasm_is_a_correct_circuit(golden_dir):
    circ = from_openqasm((golden_dir / "hexagon_p1.qasm").read_text())
    ref = build_qaoa_circuit(HEX, generate_instance(HEX, 0), AngleParams((0.375,), (0.25,)))
    assert np.allclose(run_statevector(circ), run_statevector(ref), atol=1e-12)
    assert phase_oracle_check(HEX, generate_instance(HEX, 0), 0.375) < 1e-9


def test_qasm_parser_rejects_unknown_lines():
    with pytest.raises(ValueError):
        from_openqasm('OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[1];\ncreg c[1];\nccx q[0],q[1],q[2];\n')


def test_decoding():
    assert bits_to_spins("01") == (1, -1)
    assert bits_to_spins("0000") == (1, 1, 1, 1)
    inst = generate_instance(HEX, 0)
    ss = decode_samples({"0" * 12: 3, "1" * 12: 2}, inst)
    assert ss.shots == 5
    for s, e in zip(ss.spins, ss.energies):
        assert e == evaluate_energy(inst, s)
    with pytest.raises(ValueError):
        decode_samples({"01": 1}, inst)


def test_zero_angles_sample_uniformly():
    lat = desk_lattice(10)
    circ = build_qaoa_circuit(lat, generate_instance(lat, 0), AngleParams((0.0,), (0.0,)))
    p = probabilities(run_statevector(circ))
    assert np.allclose(p, 1 / 2**10, atol=1e-12)
    counts = np.random.default_rng(7).multinomial(200_000, p)
    expected = 200_000 / 2**10
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    # 1023 degrees of freedom; mean 1023, sd about 45
    assert chi2 < 1023 + 5 * np.sqrt(2 * 1023)


def test_gate_validation_and_counts():
    with pytest.raises(ValueError):
        Gate(CNOT, (1, 1))
    with pytest.raises(ValueError):
        Gate(RZ, (0,))
    with pytest.raises(ValueError):
        AngleParams((0.1,), ())
    counts = gate_counts(build_qaoa_circuit(HEX, generate_instance(HEX, 0), P1))
    assert counts["H"] == 12 and counts["RX"] == 12 and counts["MEASURE"] == 12 and counts[CNOT] == 24
