#!/usr/bin/env python3
"""What an under-report costs one circuit: layout, SWAP insertion, depth, PST.

Here the distributed targets are genuinely bad hardware: every edge
touching qubits 1, 25, 14 has five times the CNOT error of the rest of
the chip. Reported honestly, the allocator avoids them. Under-reported
hard enough, those qubits advertise as the best on the chip, the
allocator is lured in, and the TRUE success probability pays for it.
PST is always evaluated against the true snapshot: reported numbers only
steer placement, physics does not read them.

Usage: python3 demos/04_routing_cost.py
"""

from mtqsim.adversary import apply_misreport, h2_plan
from mtqsim.allocation import AllocationRequest, comdap_allocate
from mtqsim.calibration import CalibrationSnapshot, uniform_snapshot
from mtqsim.topology import hanoi27
from mtqsim.transpile import depth, initial_layout, parse_qasm_subset, pst_estimate, route

QASM = """
OPENQASM 2.0;
include "qelib1.inc";
qreg q[5];
creg c[5];
h q[0];
cx q[0],q[1];
cx q[1],q[2];
cx q[2],q[3];
cx q[3],q[4];
cx q[0],q[4];
measure q[0] -> c[0];
measure q[1] -> c[1];
measure q[2] -> c[2];
measure q[3] -> c[3];
measure q[4] -> c[4];
"""

g = hanoi27()
plan = h2_plan(g, [0.85, 0.84, 0.83])
targets = {q for q, _ in plan.targets}

flat = uniform_snapshot(g, 0.02, 0.02)
snap_true = CalibrationSnapshot(
    0,
    {e: (0.10 if targets & set(e) else val) for e, val in flat.cnot_error.items()},
    dict(flat.readout_error),
)
reported = apply_misreport(snap_true, g, plan)

circuit = parse_qasm_subset(QASM)
print(f"circuit: {circuit.qubit_count} qubits, {len(circuit.gates)} gates")
print(f"true CNOT error: 0.10 on edges touching {sorted(targets)}, 0.02 elsewhere")
lured = sorted(g.incident_edges(14))[0]
print(
    f"under-report scales those edges by up to {1 + plan.targets[0][1]:.2f}x: "
    f"edge {lured} reads {reported.cnot_error[lured]:.4f} instead of "
    f"{snap_true.cnot_error[lured]:.4f}\n"
)

for leg, rep_snap in (("honest", snap_true), ("under-reported", reported)):
    part = comdap_allocate(g, rep_snap, AllocationRequest(5, tuple(range(27))))
    layout = initial_layout(circuit, part.members, g, rep_snap)
    routed = route(circuit, layout, part.members, g)
    hit = targets & set(part.members)
    print(f"{leg} reports")
    print(f"  region   : {sorted(part.members)}"
          + (f" (contains attacked qubits {sorted(hit)})" if hit else ""))
    print(f"  swaps    : {routed.swap_count} (3 CNOTs each)")
    print(f"  depth    : {depth(routed)}")
    print(f"  PST(true): {pst_estimate(routed, snap_true):.6f}\n")
