"""Transpilation-cost proxy: parse, lay out, route, and score circuits.

The pipeline mirrors what production transpilers cost tenants without
simulating any quantum state. A circuit parsed from the supported grammar is
assigned an initial logical-to-physical layout inside its allocated
partition, two-qubit gates between non-adjacent carriers are made adjacent by
SWAP insertion (three CNOTs each) along shortest paths inside the partition,
and the result is scored by ASAP depth, CNOT count, and an analytic success
probability against the true error rates.

Layout consumes the reported snapshot (the allocator's world view); the
success probability consumes the true snapshot. Keeping those apart is the
whole point of the toolkit.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

from .allocation import Partition, cfm
from .calibration import CalibrationSnapshot
from .errors import DataError
from .topology import CouplingGraph, _normalize_edge


@dataclass(frozen=True)
class OneQubitGate:
    name: str
    qubit: int
    angle: float | None = None


@dataclass(frozen=True)
class TwoQubitGate:
    control: int
    target: int


@dataclass(frozen=True)
class MeasureGate:
    qubit: int
    clbit: int


Gate = OneQubitGate | TwoQubitGate | MeasureGate


@dataclass(frozen=True)
class LogicalCircuit:
    """A tenant program: qubit count plus ordered gates on logical indices."""

    qubit_count: int
    gates: tuple[Gate, ...]
    clbit_count: int = 0

    def __post_init__(self) -> None:
        if self.qubit_count < 1:
            raise ValueError(f"qubit_count must be positive, got {self.qubit_count}")
        for gate in self.gates:
            if isinstance(gate, OneQubitGate):
                self._check(gate.qubit)
            elif isinstance(gate, TwoQubitGate):
                self._check(gate.control)
                self._check(gate.target)
                if gate.control == gate.target:
                    raise ValueError(f"two-qubit gate with control == target == {gate.control}")
            else:
                self._check(gate.qubit)
                if not (0 <= gate.clbit < self.clbit_count):
                    raise ValueError(f"clbit {gate.clbit} out of range")

    def _check(self, q: int) -> None:
        if not (0 <= q < self.qubit_count):
            raise ValueError(f"logical qubit {q} out of range for {self.qubit_count} qubits")

    @property
    def two_qubit_gates(self) -> tuple[TwoQubitGate, ...]:
        return tuple(g for g in self.gates if isinstance(g, TwoQubitGate))


ONE_QUBIT_GATES = frozenset({"h", "x", "y", "z", "s", "t"})
PARAM_GATES = frozenset({"rx", "ry", "rz"})

_ID = r"[A-Za-z_][A-Za-z0-9_]*"
_RE_QREG = re.compile(rf"^qreg\s+({_ID})\s*\[\s*(\d+)\s*\]$")
_RE_CREG = re.compile(rf"^creg\s+({_ID})\s*\[\s*(\d+)\s*\]$")
_RE_1Q = re.compile(rf"^([a-z]+)\s+({_ID})\s*\[\s*(\d+)\s*\]$")
_RE_PARAM = re.compile(rf"^([a-z]+)\s*\(([^()]*)\)\s*({_ID})\s*\[\s*(\d+)\s*\]$")
_RE_CX = re.compile(rf"^cx\s+({_ID})\s*\[\s*(\d+)\s*\]\s*,\s*({_ID})\s*\[\s*(\d+)\s*\]$")
_RE_MEASURE = re.compile(
    rf"^measure\s+({_ID})\s*\[\s*(\d+)\s*\]\s*->\s*({_ID})\s*\[\s*(\d+)\s*\]$"
)
_RE_PI_EXPR = re.compile(
    r"^([-+]?)(?:(\d+(?:\.\d*)?)\s*\*\s*)?pi(?:\s*/\s*(\d+(?:\.\d*)?))?$"
)


def _parse_angle(text: str, ln: int) -> float:
    expr = text.strip()
    if not expr:
        raise DataError(f"line {ln}: empty gate angle")
    try:
        return float(expr)
    except ValueError:
        pass
    m = _RE_PI_EXPR.match(expr)
    if not m:
        raise DataError(f"line {ln}: cannot parse angle {expr!r}")
    sign = -1.0 if m.group(1) == "-" else 1.0
    coeff = float(m.group(2)) if m.group(2) else 1.0
    div = float(m.group(3)) if m.group(3) else 1.0
    return sign * coeff * math.pi / div


def parse_qasm_subset(text: str) -> LogicalCircuit:
    """Parse the supported circuit grammar into a LogicalCircuit.

    Supported statements: one `qreg`, one `creg`, gates h/x/y/z/s/t,
    rx/ry/rz(angle) (angle kept but not costed), `cx`, and
    `measure q[i] -> c[j]`. `OPENQASM ...;` headers and `include ...;` lines
    are tolerated and ignored; `//` starts a comment. Anything else raises
    DataError naming the line.
    """
    statements: list[tuple[int, str]] = []
    buf: list[str] = []
    buf_line = 0
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0]
        for ch in line:
            if ch == ";":
                stmt = "".join(buf).strip()
                if stmt:
                    statements.append((buf_line, stmt))
                buf = []
                buf_line = 0
            else:
                if not buf and not ch.isspace():
                    buf_line = ln
                    buf.append(ch)
                elif buf:
                    buf.append(ch)
    if "".join(buf).strip():
        raise DataError(f"line {buf_line}: unterminated statement (missing ';')")

    qreg: tuple[str, int] | None = None
    creg: tuple[str, int] | None = None
    gates: list[Gate] = []

    def check_qubit(name: str, index: int, ln: int) -> int:
        if qreg is None:
            raise DataError(f"line {ln}: gate before qreg declaration")
        if name != qreg[0]:
            raise DataError(f"line {ln}: unknown quantum register {name!r}")
        if index >= qreg[1]:
            raise DataError(
                f"line {ln}: index {index} overflows qreg {name}[{qreg[1]}]"
            )
        return index

    for ln, stmt in statements:
        if stmt.startswith("OPENQASM") or stmt.startswith("include"):
            continue
        m = _RE_QREG.match(stmt)
        if m:
            if qreg is not None:
                raise DataError(f"line {ln}: only one qreg is supported")
            size = int(m.group(2))
            if size < 1:
                raise DataError(f"line {ln}: qreg size must be positive")
            qreg = (m.group(1), size)
            continue
        m = _RE_CREG.match(stmt)
        if m:
            if creg is not None:
                raise DataError(f"line {ln}: only one creg is supported")
            size = int(m.group(2))
            if size < 1:
                raise DataError(f"line {ln}: creg size must be positive")
            creg = (m.group(1), size)
            continue
        m = _RE_MEASURE.match(stmt)
        if m:
            q = check_qubit(m.group(1), int(m.group(2)), ln)
            if creg is None:
                raise DataError(f"line {ln}: measure before creg declaration")
            if m.group(3) != creg[0]:
                raise DataError(f"line {ln}: unknown classical register {m.group(3)!r}")
            c = int(m.group(4))
            if c >= creg[1]:
                raise DataError(f"line {ln}: index {c} overflows creg {creg[0]}[{creg[1]}]")
            gates.append(MeasureGate(q, c))
            continue
        m = _RE_CX.match(stmt)
        if m:
            qc = check_qubit(m.group(1), int(m.group(2)), ln)
            qt = check_qubit(m.group(3), int(m.group(4)), ln)
            if qc == qt:
                raise DataError(f"line {ln}: cx control and target are both q[{qc}]")
            gates.append(TwoQubitGate(qc, qt))
            continue
        m = _RE_PARAM.match(stmt)
        if m:
            name = m.group(1)
            if name not in PARAM_GATES:
                raise DataError(f"line {ln}: unknown gate {name!r}")
            angle = _parse_angle(m.group(2), ln)
            q = check_qubit(m.group(3), int(m.group(4)), ln)
            gates.append(OneQubitGate(name, q, angle))
            continue
        m = _RE_1Q.match(stmt)
        if m:
            name = m.group(1)
            if name not in ONE_QUBIT_GATES:
                raise DataError(f"line {ln}: unknown gate {name!r}")
            q = check_qubit(m.group(2), int(m.group(3)), ln)
            gates.append(OneQubitGate(name, q))
            continue
        raise DataError(f"line {ln}: unsupported statement {stmt!r}")

    if qreg is None:
        raise DataError("no qreg declaration found")
    return LogicalCircuit(
        qubit_count=qreg[1],
        gates=tuple(gates),
        clbit_count=creg[1] if creg else 0,
    )


def circuit_to_qasm(c: LogicalCircuit) -> str:
    """Emit circuit text that parse_qasm_subset reads back identically."""
    lines = ['OPENQASM 2.0;', 'include "qelib1.inc";', f"qreg q[{c.qubit_count}];"]
    if c.clbit_count:
        lines.append(f"creg c[{c.clbit_count}];")
    for gate in c.gates:
        if isinstance(gate, OneQubitGate):
            if gate.angle is None:
                lines.append(f"{gate.name} q[{gate.qubit}];")
            else:
                lines.append(f"{gate.name}({gate.angle!r}) q[{gate.qubit}];")
        elif isinstance(gate, TwoQubitGate):
            lines.append(f"cx q[{gate.control}],q[{gate.target}];")
        else:
            lines.append(f"measure q[{gate.qubit}] -> c[{gate.clbit}];")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PhysOp:
    """One operation on physical qubits. routing marks SWAP-constituent CNOTs."""

    kind: str  # "1q" | "cnot" | "measure"
    qubits: tuple[int, ...]
    name: str | None = None
    clbit: int | None = None
    routing: bool = False


@dataclass(frozen=True)
class RoutedCircuit:
    partition: tuple[int, ...]
    initial_layout: dict[int, int]
    final_layout: dict[int, int]
    physical_ops: tuple[PhysOp, ...]
    swap_count: int


def _partition_members(part) -> tuple[int, ...]:
    if isinstance(part, Partition):
        return part.members
    return tuple(part)


def initial_layout(
    c: LogicalCircuit,
    part: "Partition | Sequence[int]",
    g: CouplingGraph,
    snap_reported: CalibrationSnapshot,
) -> dict[int, int]:
    """Deterministic fidelity-greedy placement of logical onto physical qubits.

    Logical qubits are placed in descending order of two-qubit-gate
    participation (ties toward the lower logical index). Each is put on the
    unused partition qubit with the highest reported CFM, restricted to
    qubits adjacent to an already-placed interaction partner whenever that
    set is non-empty. Ties break toward the lower physical index.
    """
    members = _partition_members(part)
    if len(members) != c.qubit_count:
        raise ValueError(
            f"partition size {len(members)} != circuit qubit count {c.qubit_count}"
        )
    participation = [0] * c.qubit_count
    partners: list[set[int]] = [set() for _ in range(c.qubit_count)]
    for gate in c.two_qubit_gates:
        participation[gate.control] += 1
        participation[gate.target] += 1
        partners[gate.control].add(gate.target)
        partners[gate.target].add(gate.control)
    order = sorted(range(c.qubit_count), key=lambda l: (-participation[l], l))

    layout: dict[int, int] = {}
    unused = set(members)
    for logical in order:
        partner_phys = {layout[p] for p in partners[logical] if p in layout}
        preferred = [
            p for p in unused if any(g.has_edge(p, pp) for pp in partner_phys)
        ]
        pool = preferred if preferred else sorted(unused)
        chosen = min(pool, key=lambda p: (-cfm(g, snap_reported, p), p))
        layout[logical] = chosen
        unused.discard(chosen)
    return layout


def _bfs_path(
    g: CouplingGraph, allowed: set[int], src: int, dst: int
) -> list[int] | None:
    """Shortest src->dst path inside `allowed`, deterministic via ascending scans."""
    if src == dst:
        return [src]
    parent = {src: src}
    frontier = [src]
    while frontier:
        nxt = []
        for u in frontier:
            for v in g.neighbors(u):
                if v in allowed and v not in parent:
                    parent[v] = u
                    if v == dst:
                        path = [dst]
                        while path[-1] != src:
                            path.append(parent[path[-1]])
                        return path[::-1]
                    nxt.append(v)
        frontier = nxt
    return None


def route(
    c: LogicalCircuit,
    layout: dict[int, int],
    part: "Partition | Sequence[int]",
    g: CouplingGraph,
) -> RoutedCircuit:
    """Make every two-qubit gate executable by shortest-path SWAP insertion.

    Gates are processed in circuit order. When a two-qubit gate's carriers
    are not adjacent, the control's carrier walks a shortest path inside the
    partition's induced subgraph, one SWAP (three CNOTs, flagged as routing)
    per hop, until adjacency; the gate's CNOT is then emitted. Routing never
    leaves the partition and never emits a CNOT on a non-edge.
    """
    members = _partition_members(part)
    allowed = set(members)
    l2p = dict(layout)
    if set(l2p) != set(range(c.qubit_count)) or set(l2p.values()) != allowed:
        raise ValueError("layout must be a bijection from logical qubits onto the partition")
    p2l = {p: l for l, p in l2p.items()}
    ops: list[PhysOp] = []
    swap_count = 0

    for gate in c.gates:
        if isinstance(gate, OneQubitGate):
            ops.append(PhysOp("1q", (l2p[gate.qubit],), name=gate.name))
        elif isinstance(gate, MeasureGate):
            ops.append(PhysOp("measure", (l2p[gate.qubit],), clbit=gate.clbit))
        else:
            pc, pt = l2p[gate.control], l2p[gate.target]
            path = _bfs_path(g, allowed, pc, pt)
            if path is None:
                raise ValueError(
                    f"partition {sorted(allowed)} is disconnected: no path {pc} -> {pt}"
                )
            while len(path) > 2:
                step = path[1]
                for _ in range(3):
                    ops.append(PhysOp("cnot", (pc, step), routing=True))
                swap_count += 1
                lc, ls = p2l[pc], p2l[step]
                l2p[lc], l2p[ls] = step, pc
                p2l[pc], p2l[step] = ls, lc
                pc = step
                path = path[1:]
            ops.append(PhysOp("cnot", (pc, pt)))

    return RoutedCircuit(
        partition=members,
        initial_layout=dict(layout),
        final_layout=dict(l2p),
        physical_ops=tuple(ops),
        swap_count=swap_count,
    )


def depth(r: RoutedCircuit) -> int:
    """ASAP schedule length; every physical op occupies its qubits one layer."""
    ready: dict[int, int] = {}
    total = 0
    for op in r.physical_ops:
        start = max((ready.get(q, 0) for q in op.qubits), default=0)
        for q in op.qubits:
            ready[q] = start + 1
        total = max(total, start + 1)
    return total


def cnot_count(r: RoutedCircuit) -> int:
    """All emitted CNOTs, routing CNOTs included."""
    return sum(1 for op in r.physical_ops if op.kind == "cnot")


def pst_estimate(r: RoutedCircuit, snap_true: CalibrationSnapshot) -> float:
    """Analytic success probability against the true snapshot.

    Product of (1 - cnot_error) over every emitted CNOT times
    (1 - readout_error) over the distinct measured physical qubits.
    One-qubit gates are treated as error-free.
    """
    p = 1.0
    measured: set[int] = set()
    for op in r.physical_ops:
        if op.kind == "cnot":
            edge = _normalize_edge(op.qubits[0], op.qubits[1])
            p *= 1.0 - snap_true.cnot_error[edge]
        elif op.kind == "measure":
            measured.add(op.qubits[0])
    for q in sorted(measured):
        p *= 1.0 - snap_true.readout_error[q]
    return p
