import numpy as np
import pytest

import oracles
from mtqsim.calibration import CalibrationSnapshot, uniform_snapshot
from mtqsim.errors import DataError
from mtqsim.topology import CouplingGraph, hanoi27
from mtqsim.transpile import (
    LogicalCircuit,
    MeasureGate,
    OneQubitGate,
    TwoQubitGate,
    circuit_to_qasm,
    cnot_count,
    depth,
    initial_layout,
    parse_qasm_subset,
    pst_estimate,
    route,
)

P3 = CouplingGraph(3, frozenset({(0, 1), (1, 2)}))


def test_parse_minimal():
    c = parse_qasm_subset("qreg q[2]; cx q[0],q[1];")
    assert c.qubit_count == 2
    assert c.gates == (TwoQubitGate(0, 1),)


def test_parse_h_measure():
    c = parse_qasm_subset("qreg q[1]; creg c[1]; h q[0]; measure q[0] -> c[0];")
    assert c.gates == (OneQubitGate("h", 0, None), MeasureGate(0, 0))


def test_parse_rejects_self_cx():
    with pytest.raises(DataError):
        parse_qasm_subset("qreg q[2]; cx q[0],q[0];")


def test_parse_errors_carry_line_numbers():
    with pytest.raises(DataError, match="line 3"):
        parse_qasm_subset("OPENQASM 2.0;\nqreg q[2];\nnope q[0];\n")
    with pytest.raises(DataError):
        parse_qasm_subset("qreg q[2]; h q[5];")


def test_parse_tolerates_header_comments_and_angles():
    text = (
        "OPENQASM 2.0;\n"
        'include "qelib1.inc";\n'
        "// entangler\n"
        "qreg q[2]; creg c[2];\n"
        "rx(pi/2) q[0];\n"
        "rz(0.25) q[1];\n"
        "cx q[0],q[1];\n"
    )
    c = parse_qasm_subset(text)
    assert [type(gt).__name__ for gt in c.gates] == [
        "OneQubitGate",
        "OneQubitGate",
        "TwoQubitGate",
    ]
    assert c.gates[0].angle == pytest.approx(np.pi / 2)


def test_qasm_round_trip():
    text = "qreg q[3]; creg c[3]; h q[0]; cx q[0],q[1]; cx q[1],q[2]; measure q[2] -> c[0];"
    c = parse_qasm_subset(text)
    again = parse_qasm_subset(circuit_to_qasm(c))
    assert again == c


def test_initial_layout_trivial_and_busiest():
    s = uniform_snapshot(P3, 0.02, 0.01)
    one = parse_qasm_subset("qreg q[1];")
    assert initial_layout(one, (2,), P3, s) == {0: 2}
    # logical 0 participates in both cnots; physical 1 has the highest CFM
    c = parse_qasm_subset("qreg q[2]; cx q[0],q[1]; cx q[0],q[1];")
    lay = initial_layout(c, (0, 1), P3, s)
    assert lay[0] == 1
    assert sorted(lay.values()) == [0, 1]


def test_initial_layout_bijection_and_mismatch():
    g = hanoi27()
    s = uniform_snapshot(g, 0.02, 0.02)
    c = parse_qasm_subset("qreg q[4]; cx q[0],q[1]; cx q[2],q[3];")
    lay = initial_layout(c, (1, 2, 3, 4), g, s)
    assert sorted(lay.keys()) == [0, 1, 2, 3]
    assert sorted(lay.values()) == [1, 2, 3, 4]
    with pytest.raises(ValueError):
        initial_layout(c, (1, 2, 3), g, s)


def test_route_adjacent_pair():
    s = uniform_snapshot(P3, 0.02, 0.01)
    c = parse_qasm_subset("qreg q[2]; cx q[0],q[1];")
    r = route(c, {0: 0, 1: 1}, (0, 1), P3)
    assert r.swap_count == 0
    assert cnot_count(r) == 1
    assert depth(r) == 1


def test_route_p3_long_range():
    """CNOT between the endpoints of a path costs one SWAP run plus the CNOT."""
    c = parse_qasm_subset("qreg q[3]; cx q[0],q[1];")
    r = route(c, {0: 0, 1: 2, 2: 1}, (0, 1, 2), P3)
    assert r.swap_count == 1
    assert cnot_count(r) == 4
    assert depth(r) == 4
    oracles.replay_routed(c, r)


def test_route_stays_on_edges_and_preserves_interactions():
    g = hanoi27()
    s = uniform_snapshot(g, 0.02, 0.02)
    adj = oracles.adjacency(g.edge_list, 27)
    edge_set = set(g.edge_list)
    rng = np.random.default_rng(1234)
    for trial in range(60):
        size = int(rng.integers(2, 7))
        # grow a random connected partition
        start = int(rng.integers(0, 27))
        members = [start]
        while len(members) < size:
            frontier = sorted(
                {y for x in members for y in adj[x]} - set(members)
            )
            if not frontier:
                break
            members.append(int(rng.choice(frontier)))
        if len(members) < size:
            continue
        n_gates = int(rng.integers(1, 12))
        gates = []
        for _ in range(n_gates):
            a = int(rng.integers(0, size))
            b = int(rng.integers(0, size - 1))
            if b >= a:
                b += 1
            gates.append(TwoQubitGate(a, b))
        for q in range(size):
            gates.append(MeasureGate(q, q))
        c = LogicalCircuit(size, tuple(gates), size)
        lay = initial_layout(c, tuple(members), g, s)
        r = route(c, lay, tuple(members), g)
        for op in r.physical_ops:
            if op.kind == "cnot":
                u, v = sorted(op.qubits)
                assert (u, v) in edge_set
                assert set(op.qubits) <= set(members)
        swaps = oracles.replay_routed(c, r)
        assert swaps == r.swap_count
        assert cnot_count(r) == n_gates + 3 * r.swap_count


def test_depth_parallel_pairs():
    g = CouplingGraph(4, frozenset({(0, 1), (2, 3), (1, 2)}))
    c = parse_qasm_subset("qreg q[4]; cx q[0],q[1]; cx q[2],q[3];")
    r = route(c, {0: 0, 1: 1, 2: 2, 3: 3}, (0, 1, 2, 3), g)
    assert r.swap_count == 0
    assert depth(r) == 1


def test_depth_lower_bound():
    g = hanoi27()
    s = uniform_snapshot(g, 0.02, 0.02)
    c = parse_qasm_subset(
        "qreg q[3]; cx q[0],q[1]; cx q[0],q[2]; cx q[0],q[1]; cx q[1],q[2];"
    )
    lay = initial_layout(c, (11, 14, 16), g, s)
    r = route(c, lay, (11, 14, 16), g)
    per_qubit = {}
    for op in r.physical_ops:
        for q in op.qubits:
            per_qubit[q] = per_qubit.get(q, 0) + 1
    assert depth(r) >= max(per_qubit.values())


def test_pst_examples():
    g = CouplingGraph(2, frozenset({(0, 1)}))
    s = CalibrationSnapshot(0, {(0, 1): 0.1}, {0: 0.5, 1: 0.5})
    c = parse_qasm_subset("qreg q[2]; cx q[0],q[1];")
    r = route(c, {0: 0, 1: 1}, (0, 1), g)
    assert pst_estimate(r, s) == pytest.approx(0.9, abs=1e-12)

    empty = LogicalCircuit(2, (), 0)
    r0 = route(empty, {0: 0, 1: 1}, (0, 1), g)
    assert pst_estimate(r0, s) == 1.0


def test_pst_p3_hand_product():
    s = CalibrationSnapshot(0, {(0, 1): 0.02, (1, 2): 0.02}, {0: 0.01, 1: 0.01, 2: 0.01})
    c = parse_qasm_subset(
        "qreg q[3]; creg c[2]; cx q[0],q[1]; measure q[0] -> c[0]; measure q[1] -> c[1];"
    )
    r = route(c, {0: 0, 1: 2, 2: 1}, (0, 1, 2), P3)
    assert r.swap_count == 1
    assert pst_estimate(r, s) == pytest.approx(0.98**4 * 0.99**2, abs=1e-12)


def test_pst_strictly_decreases_per_cnot():
    g = CouplingGraph(2, frozenset({(0, 1)}))
    s = CalibrationSnapshot(0, {(0, 1): 0.03}, {0: 0.01, 1: 0.01})
    last = None
    for n in range(1, 5):
        gates = tuple(TwoQubitGate(0, 1) for _ in range(n))
        c = LogicalCircuit(2, gates, 0)
        r = route(c, {0: 0, 1: 1}, (0, 1), g)
        p = pst_estimate(r, s)
        if last is not None:
            assert p < last
        last = p


def test_no_swap_matches_unrouted_schedule():
    # an adjacency-respecting layout must add nothing
    g = hanoi27()
    s = uniform_snapshot(g, 0.02, 0.02)
    c = parse_qasm_subset("qreg q[2]; cx q[0],q[1]; cx q[0],q[1];")
    r = route(c, {0: 12, 1: 13}, (12, 13), g)
    assert r.swap_count == 0
    assert cnot_count(r) == 2
    assert depth(r) == 2
