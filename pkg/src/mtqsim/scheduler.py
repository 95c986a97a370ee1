"""Round-based multi-tenant execution over a shared device.

Jobs queue FIFO. Each round scans the queue in order and places every job
the allocator can fit into the qubits still free this round; a job that does
not fit is skipped, not blocking smaller jobs behind it, and retries next
round. The round closes when a full scan places nothing. Placed jobs are laid
out and routed against the reported snapshot and scored against the true one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from statistics import mean

import numpy as np

from .allocation import AllocationRequest, Partition, get_allocator
from .calibration import CalibrationSnapshot
from .topology import CouplingGraph
from .transpile import (
    LogicalCircuit,
    MeasureGate,
    TwoQubitGate,
    cnot_count,
    depth,
    initial_layout,
    pst_estimate,
    route,
)


@dataclass(frozen=True)
class Job:
    id: str
    circuit: LogicalCircuit

    @property
    def size(self) -> int:
        return self.circuit.qubit_count


@dataclass(frozen=True)
class RoundReport:
    round_index: int
    placed_jobs: tuple[tuple[str, Partition], ...]
    active_qubits: int
    utilization: float


@dataclass(frozen=True)
class JobMetrics:
    job_id: str
    round_index: int
    depth: int
    cnot_count: int
    swap_count: int
    pst: float


@dataclass(frozen=True)
class ExperimentReport:
    allocator: str
    rounds: tuple[RoundReport, ...]
    jobs: tuple[JobMetrics, ...]

    @property
    def total_rounds(self) -> int:
        return len(self.rounds)

    @property
    def mean_utilization(self) -> float:
        return mean(r.utilization for r in self.rounds) if self.rounds else 0.0

    @property
    def mean_depth(self) -> float:
        return mean(j.depth for j in self.jobs) if self.jobs else 0.0

    @property
    def mean_cnot_count(self) -> float:
        return mean(j.cnot_count for j in self.jobs) if self.jobs else 0.0

    @property
    def mean_swap_count(self) -> float:
        return mean(j.swap_count for j in self.jobs) if self.jobs else 0.0

    @property
    def mean_pst(self) -> float:
        return mean(j.pst for j in self.jobs) if self.jobs else 0.0

    def to_dict(self) -> dict:
        return {
            "allocator": self.allocator,
            "total_rounds": self.total_rounds,
            "mean_utilization": self.mean_utilization,
            "mean_depth": self.mean_depth,
            "mean_cnot_count": self.mean_cnot_count,
            "mean_swap_count": self.mean_swap_count,
            "mean_pst": self.mean_pst,
            "rounds": [
                {
                    "round": r.round_index,
                    "placed": [
                        {"job": jid, "members": list(p.members), "score": p.score}
                        for jid, p in r.placed_jobs
                    ],
                    "active_qubits": r.active_qubits,
                    "utilization": r.utilization,
                }
                for r in self.rounds
            ],
            "jobs": [
                {
                    "id": j.job_id,
                    "round": j.round_index,
                    "depth": j.depth,
                    "cnots": j.cnot_count,
                    "swaps": j.swap_count,
                    "pst": j.pst,
                }
                for j in self.jobs
            ],
        }


def run_queue(
    jobs: list[Job],
    g: CouplingGraph,
    snap_true: CalibrationSnapshot,
    snap_reported: CalibrationSnapshot,
    allocator: str = "greedy",
) -> ExperimentReport:
    """Drain the queue and report per-round and per-job outcomes.

    Allocation and layout see only snap_reported; PST sees only snap_true.
    Deterministic: same inputs, same report.
    """
    alloc = get_allocator(allocator)
    for job in jobs:
        if job.size > g.qubit_count:
            raise ValueError(
                f"job {job.id} needs {job.size} qubits; hardware has {g.qubit_count}"
            )
    if not jobs:
        return ExperimentReport(allocator, (), ())

    pending = list(jobs)
    rounds: list[RoundReport] = []
    metrics: list[JobMetrics] = []
    round_index = 0
    while pending:
        available = set(range(g.qubit_count))
        placed: list[tuple[Job, Partition]] = []
        while True:
            placed_in_scan = False
            for job in list(pending):
                req = AllocationRequest(job.size, tuple(sorted(available)))
                part = alloc(g, snap_reported, req)
                if part is None:
                    continue
                available -= set(part.members)
                pending.remove(job)
                placed.append((job, part))
                placed_in_scan = True
                if not available:
                    break
            if not placed_in_scan or not available:
                break
        if not placed:
            stuck = ", ".join(j.id for j in pending)
            raise RuntimeError(f"jobs cannot be placed even on idle hardware: {stuck}")
        for job, part in placed:
            layout = initial_layout(job.circuit, part, g, snap_reported)
            routed = route(job.circuit, layout, part, g)
            metrics.append(
                JobMetrics(
                    job_id=job.id,
                    round_index=round_index,
                    depth=depth(routed),
                    cnot_count=cnot_count(routed),
                    swap_count=routed.swap_count,
                    pst=pst_estimate(routed, snap_true),
                )
            )
        active = sum(len(p.members) for _, p in placed)
        rounds.append(
            RoundReport(
                round_index=round_index,
                placed_jobs=tuple((job.id, part) for job, part in placed),
                active_qubits=active,
                utilization=active / g.qubit_count,
            )
        )
        round_index += 1
    return ExperimentReport(allocator, tuple(rounds), tuple(metrics))


def gen_workload(
    count: int,
    size_min: int,
    size_max: int,
    gate_density: float,
    seed: int,
) -> list[Job]:
    """Seeded synthetic workload of two-qubit-gate circuits.

    Per job, in a fixed draw order from numpy's default_rng(seed): the size is
    uniform over [size_min, size_max]; then max(1, round(gate_density *
    size*(size-1)/2)) two-qubit gates each draw a control and a distinct
    target uniformly. Every qubit is measured at the end. Single-qubit jobs
    carry measurements only.
    """
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    if not (1 <= size_min <= size_max):
        raise ValueError(f"need 1 <= size_min <= size_max, got {size_min}..{size_max}")
    if gate_density <= 0:
        raise ValueError(f"gate_density must be positive, got {gate_density}")
    rng = np.random.default_rng(seed)
    jobs: list[Job] = []
    for i in range(count):
        size = int(rng.integers(size_min, size_max + 1))
        gates: list = []
        if size > 1:
            n_gates = max(1, round(gate_density * size * (size - 1) / 2))
            for _ in range(n_gates):
                control = int(rng.integers(size))
                target = int(rng.integers(size - 1))
                if target >= control:
                    target += 1
                gates.append(TwoQubitGate(control, target))
        gates.extend(MeasureGate(q, q) for q in range(size))
        circuit = LogicalCircuit(qubit_count=size, gates=tuple(gates), clbit_count=size)
        jobs.append(Job(id=f"job{i:03d}", circuit=circuit))
    return jobs
