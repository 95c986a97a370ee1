"""Misreporting heuristics: how a tenant picks targets and skews reports.

Both heuristics choose among the device's maximum-degree qubits, because
those dominate allocation scores. The first over-reports the most central of
them (lowest path-distance spread), making prime real estate look bad so that
honest tenants get pushed into fragmented placements. The second
under-reports a spread-out set (maximum pairwise separation), luring
allocations toward distant corners of the device.

Misreports only ever touch the reported snapshot. The true snapshot, and
hence every PST computed against it, is never modified.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .calibration import CalibrationSeries, CalibrationSnapshot
from .errors import DataError
from .topology import CouplingGraph, max_degree_qubits, path_stddev

H1 = "H1"
H2 = "H2"


@dataclass(frozen=True)
class MisreportPlan:
    """Ordered (qubit, relative perturbation) targets plus their provenance.

    H1 plans over-report: every delta positive. H2 plans under-report: every
    delta negative, with strictly decreasing magnitude so the most attractive
    lure lands on the first target.
    """

    heuristic: str
    targets: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        if self.heuristic not in (H1, H2):
            raise ValueError(f"heuristic must be {H1!r} or {H2!r}, got {self.heuristic!r}")
        if not self.targets:
            raise ValueError("plan must contain at least one target")
        qubits = [q for q, _ in self.targets]
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"duplicate target qubits in {qubits}")
        deltas = [d for _, d in self.targets]
        if self.heuristic == H1:
            if any(d <= 0 for d in deltas):
                raise ValueError("H1 deltas must all be positive (over-report)")
        else:
            if any(d >= 0 for d in deltas):
                raise ValueError("H2 deltas must all be negative (under-report)")
            mags = [abs(d) for d in deltas]
            if any(a <= b for a, b in zip(mags, mags[1:])):
                raise ValueError(f"H2 magnitudes must strictly decrease, got {mags}")

    @property
    def n(self) -> int:
        return len(self.targets)

    @property
    def target_qubits(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.targets)


def heuristic1_targets(g: CouplingGraph, n: int) -> list[int]:
    """The n most central maximum-degree qubits, by ascending path stddev.

    Centrality here means a low spread of shortest-path distances to the rest
    of the device: a qubit that is "equally close to everything" anchors the
    most placements. Ties break toward the lower index.
    """
    pool = max_degree_qubits(g)
    if not (1 <= n <= len(pool)):
        raise ValueError(f"n must be in [1, {len(pool)}] for this graph, got {n}")
    ranked = sorted(pool, key=lambda q: (path_stddev(g, q), q))
    return ranked[:n]


def heuristic1_sigma_ranking(g: CouplingGraph) -> list[tuple[int, float]]:
    """The full max-degree pool with path stddevs, in selection order."""
    pool = max_degree_qubits(g)
    ranked = sorted(pool, key=lambda q: (path_stddev(g, q), q))
    return [(q, path_stddev(g, q)) for q in ranked]


def heuristic2_targets(g: CouplingGraph, n: int) -> list[int]:
    """n maximum-degree qubits spread as far apart as possible.

    The first pick is the lowest-index maximum-degree qubit. Each subsequent
    pick maximizes the minimum distance to everything already selected;
    remaining ties are broken by the lexicographically largest distance
    profile to the selected qubits (in selection order), then by the lowest
    index.
    """
    pool = max_degree_qubits(g)
    if not (1 <= n <= len(pool)):
        raise ValueError(f"n must be in [1, {len(pool)}] for this graph, got {n}")
    dist = g.distance_matrix
    selected = [pool[0]]
    remaining = [q for q in pool if q != pool[0]]
    while len(selected) < n:
        def key(q: int):
            profile = tuple(int(dist[q, s]) for s in selected)
            return (min(profile), profile, -q)
        pick = max(remaining, key=key)
        selected.append(pick)
        remaining.remove(pick)
    return selected


def h1_plan(g: CouplingGraph, n: int, k: float) -> MisreportPlan:
    """Over-report each of heuristic 1's targets by the same relative k."""
    if k <= 0:
        raise ValueError(f"H1 perturbation k must be positive, got {k}")
    targets = tuple((q, k) for q in heuristic1_targets(g, n))
    return MisreportPlan(H1, targets)


def h2_plan(g: CouplingGraph, ks: list[float]) -> MisreportPlan:
    """Under-report heuristic 2's targets by the given magnitudes, in order."""
    if not ks:
        raise ValueError("H2 needs at least one perturbation magnitude")
    if any(k <= 0 for k in ks):
        raise ValueError(f"H2 magnitudes must be positive, got {ks}")
    qubits = heuristic2_targets(g, len(ks))
    targets = tuple((q, -k) for q, k in zip(qubits, ks))
    return MisreportPlan(H2, targets)


def apply_misreport(
    true_snap: CalibrationSnapshot, g: CouplingGraph, plan: MisreportPlan | None
) -> CalibrationSnapshot:
    """Build the reported snapshot a plan produces from a true snapshot.

    Every edge incident to a target q with perturbation d gets its CNOT error
    scaled by (1 + d) and clamped to [0, 1]. An edge incident to two targets
    is perturbed once, by the larger-magnitude delta. Readout errors pass
    through untouched, and the input snapshot is never modified.
    """
    if plan is None:
        return CalibrationSnapshot(
            true_snap.cycle_id, dict(true_snap.cnot_error), dict(true_snap.readout_error)
        )
    for q, _ in plan.targets:
        g._check_index(q)
    factor: dict[tuple[int, int], float] = {}
    for q, delta in plan.targets:
        for e in g.incident_edges(q):
            if e not in factor or abs(delta) > abs(factor[e]):
                factor[e] = delta
    cnot = {}
    for e, val in true_snap.cnot_error.items():
        if e in factor:
            val = min(1.0, max(0.0, val * (1.0 + factor[e])))
        cnot[e] = val
    return CalibrationSnapshot(true_snap.cycle_id, cnot, dict(true_snap.readout_error))


def apply_misreport_series(
    series: CalibrationSeries,
    plan: MisreportPlan,
    cycle_lo: int,
    cycle_hi: int,
) -> CalibrationSeries:
    """Apply a plan to every snapshot with cycle_lo <= cycle_id < cycle_hi."""
    snaps = tuple(
        apply_misreport(s, series.graph, plan) if cycle_lo <= s.cycle_id < cycle_hi else s
        for s in series
    )
    return CalibrationSeries(series.graph, snaps)


def plan_to_json(plan: MisreportPlan) -> str:
    obj = {
        "heuristic": plan.heuristic,
        "n": plan.n,
        "targets": [{"qubit": q, "delta": d} for q, d in plan.targets],
    }
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def plan_from_json(text: str) -> MisreportPlan:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"plan is not valid JSON: {exc}") from None
    try:
        heuristic = obj["heuristic"]
        n = obj["n"]
        targets = tuple((t["qubit"], t["delta"]) for t in obj["targets"])
    except (KeyError, TypeError) as exc:
        raise DataError(f"plan JSON missing field: {exc}") from None
    if n != len(targets):
        raise DataError(f"plan n={n} does not match {len(targets)} targets")
    try:
        return MisreportPlan(heuristic, targets)
    except ValueError as exc:
        raise DataError(str(exc)) from None
