"""Experiment configuration and the baseline-vs-attack drivers.

A configuration names a topology, a base error model, an allocator, an
attack, and a workload. Resolution turns every file reference into inline
content, so the resolved form embedded in each report is self-contained:
re-running from an embedded config and its seeds reproduces the report byte
for byte. The baseline leg always embeds attack "none", which makes baseline
reports byte-identical across attack variants sharing a workload and
topology.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .adversary import MisreportPlan, apply_misreport, h1_plan, h2_plan
from .allocation import ALLOCATORS
from .calibration import (
    CalibrationSnapshot,
    load_calibration_csv,
    uniform_snapshot,
    validate_snapshot,
)
from .errors import ConfigError, DataError
from .scheduler import ExperimentReport, Job, gen_workload, run_queue
from .topology import CouplingGraph, hanoi27, load_edge_list
from .transpile import circuit_to_qasm, parse_qasm_subset

BUILTIN_TOPOLOGIES = {"hanoi27": hanoi27}

DEFAULT_GATE_DENSITY = 2.0


def read_referenced_file(path: str | Path) -> str:
    """Read a file named by a config; absence is a configuration error."""
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read referenced file {path}: {exc}") from None


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_text_atomic(path: str | Path, text: str) -> None:
    """Write-then-rename so readers never observe a half-written file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def resolve_topology(spec: Any, base_dir: Path) -> CouplingGraph:
    if isinstance(spec, str):
        if spec in BUILTIN_TOPOLOGIES:
            return BUILTIN_TOPOLOGIES[spec]()
        raise ConfigError(
            f"unknown topology {spec!r}; builtins: {sorted(BUILTIN_TOPOLOGIES)}"
        )
    if isinstance(spec, dict) and "file" in spec:
        text = read_referenced_file(base_dir / spec["file"])
        return load_edge_list(text)
    if isinstance(spec, dict) and "qubits" in spec and "edges" in spec:
        try:
            edges = frozenset((int(u), int(v)) for u, v in spec["edges"])
            return CouplingGraph(int(spec["qubits"]), edges)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid inline topology: {exc}") from None
    raise ConfigError(f"topology must be a builtin name, a file, or inline: {spec!r}")


def resolve_errors(spec: Any, g: CouplingGraph, base_dir: Path) -> CalibrationSnapshot:
    if not isinstance(spec, dict):
        raise ConfigError(f"errors must be an object, got {spec!r}")
    if "uniform" in spec:
        u = spec["uniform"]
        try:
            return uniform_snapshot(g, float(u["cnot"]), float(u["readout"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid uniform error model: {exc}") from None
    if "file" in spec:
        text = read_referenced_file(base_dir / spec["file"])
        series = load_calibration_csv(text, g)
        cycle = spec.get("cycle", series.snapshots[0].cycle_id)
        for snap in series:
            if snap.cycle_id == cycle:
                return snap
        raise ConfigError(f"cycle {cycle} not present in {spec['file']}")
    if "cnot" in spec and "readout" in spec:
        try:
            cnot = {}
            for key, val in spec["cnot"].items():
                u, v = key.split("-")
                cnot[(int(u), int(v))] = float(val)
            readout = {int(q): float(val) for q, val in spec["readout"].items()}
            snap = CalibrationSnapshot(0, cnot, readout)
            validate_snapshot(snap, g)
            return snap
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid inline error model: {exc}") from None
    raise ConfigError("errors must give 'uniform', a 'file', or inline 'cnot'/'readout'")


def resolve_attack(spec: Any, g: CouplingGraph) -> MisreportPlan | None:
    if spec in (None, "none"):
        return None
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"attack must be 'none' or an object with 'kind': {spec!r}")
    kind = spec["kind"]
    if kind == "none":
        return None
    try:
        if kind == "H1":
            return h1_plan(g, int(spec["n"]), float(spec["k"]))
        if kind == "H2":
            ks = [float(k) for k in spec["ks"]]
            return h2_plan(g, ks)
    except KeyError as exc:
        raise ConfigError(f"attack {kind} missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {kind} attack: {exc}") from None
    raise ConfigError(f"attack kind must be 'none', 'H1', or 'H2', got {kind!r}")


def attack_as_dict(plan: MisreportPlan | None) -> dict:
    if plan is None:
        return {"kind": "none"}
    if plan.heuristic == "H1":
        # H1 always uses one uniform k across targets
        return {"kind": "H1", "n": plan.n, "k": plan.targets[0][1]}
    return {"kind": "H2", "ks": [-d for _, d in plan.targets]}


@dataclass(frozen=True)
class WorkloadSpec:
    """Either a seeded generator or an explicit list of (id, qasm text)."""

    generator: dict | None
    circuits: tuple[tuple[str, str], ...] | None

    def build_jobs(self, seed_override: int | None = None) -> list[Job]:
        if self.generator is not None:
            params = dict(self.generator)
            if seed_override is not None:
                params["seed"] = seed_override
            return gen_workload(
                count=params["count"],
                size_min=params["size_min"],
                size_max=params["size_max"],
                gate_density=params["gate_density"],
                seed=params["seed"],
            )
        if seed_override is not None:
            raise ConfigError("seed overrides require a generator workload")
        return [Job(id=jid, circuit=parse_qasm_subset(text)) for jid, text in self.circuits]

    @property
    def seed(self) -> int | None:
        return self.generator["seed"] if self.generator is not None else None

    def as_dict(self, seed_override: int | None = None) -> dict:
        if self.generator is not None:
            d = {"kind": "generator", **self.generator}
            if seed_override is not None:
                d["seed"] = seed_override
            return d
        return {
            "kind": "qasm",
            "circuits": [{"id": jid, "qasm": text} for jid, text in self.circuits],
        }


def resolve_workload(spec: Any, base_dir: Path) -> WorkloadSpec:
    if not isinstance(spec, dict):
        raise ConfigError(f"workload must be an object, got {spec!r}")
    if "qasm_files" in spec:
        circuits = []
        for p in spec["qasm_files"]:
            text = read_referenced_file(base_dir / p)
            parse_qasm_subset(text)  # fail fast with the file's line numbers
            circuits.append((Path(p).stem, text))
        if not circuits:
            raise ConfigError("workload qasm_files is empty")
        return WorkloadSpec(generator=None, circuits=tuple(circuits))
    if "circuits" in spec:
        circuits = []
        for entry in spec["circuits"]:
            try:
                jid, text = entry["id"], entry["qasm"]
            except (KeyError, TypeError) as exc:
                raise ConfigError(f"workload circuit entry missing field: {exc}") from None
            parse_qasm_subset(text)
            circuits.append((jid, text))
        if not circuits:
            raise ConfigError("workload circuits is empty")
        return WorkloadSpec(generator=None, circuits=tuple(circuits))
    try:
        generator = {
            "count": int(spec["count"]),
            "size_min": int(spec["size_min"]),
            "size_max": int(spec["size_max"]),
            "gate_density": float(spec.get("gate_density", DEFAULT_GATE_DENSITY)),
            "seed": int(spec["seed"]),
        }
    except KeyError as exc:
        raise ConfigError(f"generator workload missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid generator workload: {exc}") from None
    if generator["count"] < 1:
        raise ConfigError("generator workload count must be positive")
    if not (1 <= generator["size_min"] <= generator["size_max"]):
        raise ConfigError("need 1 <= size_min <= size_max")
    return WorkloadSpec(generator=generator, circuits=None)


@dataclass(frozen=True)
class ResolvedConfig:
    graph: CouplingGraph
    snapshot: CalibrationSnapshot
    allocator: str
    plan: MisreportPlan | None
    workload: WorkloadSpec

    def as_dict(self, force_attack_none: bool = False, seed_override: int | None = None) -> dict:
        return {
            "allocator": self.allocator,
            "attack": {"kind": "none"} if force_attack_none else attack_as_dict(self.plan),
            "errors": {
                "cnot": {f"{u}-{v}": val for (u, v), val in sorted(self.snapshot.cnot_error.items())},
                "readout": {str(q): val for q, val in sorted(self.snapshot.readout_error.items())},
            },
            "topology": {
                "qubits": self.graph.qubit_count,
                "edges": [[u, v] for u, v in self.graph.edge_list],
            },
            "workload": self.workload.as_dict(seed_override),
        }


def resolve_config(raw: Any, base_dir: str | Path = ".") -> ResolvedConfig:
    """Validate a raw config tree and resolve every reference to content."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    base_dir = Path(base_dir)
    unknown = set(raw) - {"topology", "errors", "allocator", "attack", "workload", "out"}
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    for required in ("topology", "errors", "workload"):
        if required not in raw:
            raise ConfigError(f"config missing required field {required!r}")
    g = resolve_topology(raw["topology"], base_dir)
    snapshot = resolve_errors(raw["errors"], g, base_dir)
    allocator = raw.get("allocator", "greedy")
    if allocator not in ALLOCATORS:
        raise ConfigError(
            f"unknown allocator {allocator!r}; expected one of {sorted(ALLOCATORS)}"
        )
    plan = resolve_attack(raw.get("attack", "none"), g)
    workload = resolve_workload(raw["workload"], base_dir)
    return ResolvedConfig(g, snapshot, allocator, plan, workload)


def load_config_file(path: str | Path) -> dict:
    text = read_referenced_file(path)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config root must be an object")
    return raw


@dataclass(frozen=True)
class SimulationResult:
    baseline: ExperimentReport
    attacked: ExperimentReport
    baseline_doc: dict
    attacked_doc: dict
    summary_doc: dict


def _pct_change(new: float, old: float) -> float:
    return 100.0 * (new - old) / old if old else 0.0


def run_simulate(rc: ResolvedConfig, seed_override: int | None = None) -> SimulationResult:
    """Run the identical workload twice: honest reports, then attacked reports.

    The true snapshot is shared; only the reported snapshot differs between
    legs, so every metric delta is attributable to the misreport.
    """
    jobs = rc.workload.build_jobs(seed_override)
    snap_true = rc.snapshot
    snap_attacked = apply_misreport(snap_true, rc.graph, rc.plan)
    baseline = run_queue(jobs, rc.graph, snap_true, snap_true, rc.allocator)
    attacked = run_queue(jobs, rc.graph, snap_true, snap_attacked, rc.allocator)

    baseline_doc = {
        "config": rc.as_dict(force_attack_none=True, seed_override=seed_override),
        "report": baseline.to_dict(),
    }
    attacked_doc = {
        "config": rc.as_dict(seed_override=seed_override),
        "report": attacked.to_dict(),
    }
    summary_doc = {
        "config": rc.as_dict(seed_override=seed_override),
        "attack_targets": [
            {"qubit": q, "delta": d} for q, d in (rc.plan.targets if rc.plan else ())
        ],
        "baseline": _aggregates(baseline),
        "attacked": _aggregates(attacked),
        "delta": {
            "rounds": attacked.total_rounds - baseline.total_rounds,
            "mean_utilization": attacked.mean_utilization - baseline.mean_utilization,
            "depth_pct": _pct_change(attacked.mean_depth, baseline.mean_depth),
            "pst_pct": _pct_change(attacked.mean_pst, baseline.mean_pst),
            "swaps": attacked.mean_swap_count - baseline.mean_swap_count,
        },
    }
    return SimulationResult(baseline, attacked, baseline_doc, attacked_doc, summary_doc)


def _aggregates(r: ExperimentReport) -> dict:
    return {
        "total_rounds": r.total_rounds,
        "mean_utilization": r.mean_utilization,
        "mean_depth": r.mean_depth,
        "mean_cnot_count": r.mean_cnot_count,
        "mean_swap_count": r.mean_swap_count,
        "mean_pst": r.mean_pst,
    }


def rounds_csv(r: ExperimentReport) -> str:
    lines = ["round,placed,active,utilization"]
    for rd in r.rounds:
        lines.append(
            f"{rd.round_index},{len(rd.placed_jobs)},{rd.active_qubits},{rd.utilization!r}"
        )
    return "\n".join(lines) + "\n"


def jobs_csv(r: ExperimentReport) -> str:
    lines = ["id,round,depth,cnots,swaps,pst"]
    for j in r.jobs:
        lines.append(
            f"{j.job_id},{j.round_index},{j.depth},{j.cnot_count},{j.swap_count},{j.pst!r}"
        )
    return "\n".join(lines) + "\n"


SWEEP_COLUMNS = [
    "seed",
    "baseline_rounds",
    "attacked_rounds",
    "delta_rounds",
    "baseline_mean_utilization",
    "attacked_mean_utilization",
    "delta_mean_utilization",
    "baseline_mean_depth",
    "attacked_mean_depth",
    "depth_pct",
    "baseline_mean_swaps",
    "attacked_mean_swaps",
    "baseline_mean_pst",
    "attacked_mean_pst",
    "pst_pct",
]


def run_sweep(rc: ResolvedConfig, seeds: list[int]) -> tuple[list[dict], str]:
    """Per-seed baseline-vs-attack rows plus mean/std aggregate rows, as CSV."""
    if not seeds:
        raise ConfigError("sweep needs at least one seed")
    if rc.workload.generator is None:
        raise ConfigError("sweep requires a generator workload (seeds vary the generator)")
    rows: list[dict] = []
    for seed in seeds:
        res = run_simulate(rc, seed_override=seed)
        b, a = res.baseline, res.attacked
        rows.append(
            {
                "seed": seed,
                "baseline_rounds": b.total_rounds,
                "attacked_rounds": a.total_rounds,
                "delta_rounds": a.total_rounds - b.total_rounds,
                "baseline_mean_utilization": b.mean_utilization,
                "attacked_mean_utilization": a.mean_utilization,
                "delta_mean_utilization": a.mean_utilization - b.mean_utilization,
                "baseline_mean_depth": b.mean_depth,
                "attacked_mean_depth": a.mean_depth,
                "depth_pct": _pct_change(a.mean_depth, b.mean_depth),
                "baseline_mean_swaps": b.mean_swap_count,
                "attacked_mean_swaps": a.mean_swap_count,
                "baseline_mean_pst": b.mean_pst,
                "attacked_mean_pst": a.mean_pst,
                "pst_pct": _pct_change(a.mean_pst, b.mean_pst),
            }
        )
    lines = [",".join(SWEEP_COLUMNS)]
    for row in rows:
        lines.append(",".join(_csv_cell(row[c]) for c in SWEEP_COLUMNS))
    for label, fn in (("mean", np.mean), ("std", np.std)):
        cells = [label]
        for c in SWEEP_COLUMNS[1:]:
            cells.append(_csv_cell(float(fn([row[c] for row in rows]))))
        lines.append(",".join(cells))
    return rows, "\n".join(lines) + "\n"


def _csv_cell(v: Any) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def workload_manifest(jobs: list[Job], params: dict) -> dict:
    return {
        "params": params,
        "jobs": [{"id": j.id, "size": j.size, "file": f"{j.id}.qasm"} for j in jobs],
    }


def write_workload(jobs: list[Job], params: dict, out_dir: str | Path) -> None:
    out = Path(out_dir)
    for job in jobs:
        write_text_atomic(out / f"{job.id}.qasm", circuit_to_qasm(job.circuit))
    write_text_atomic(out / "manifest.json", dump_json(workload_manifest(jobs, params)))
