"""Fidelity-aware qubit allocation: the greedy attractor allocator and the
community-based allocator.

Both allocators consume the *reported* calibration snapshot. That is the
trust boundary the rest of the toolkit probes: a tenant that misreports error
rates steers these scores without touching real hardware behavior.

Scores:
  CFM (per qubit)    degree + (1 - (avg CNOT error + readout error))
  CRI (per subset)   (D_p/C_p + (1 - (E_p+R_p))) / (D_h/C_h + (1 - (E_h+R_h)))
where D/C are density/compactness, E/R are mean CNOT/readout error, the _p
terms range over the candidate subset and the _h terms over the whole device.

Failure to allocate is reported as None; the scheduler treats it as a signal
to defer the job to a later round.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .calibration import CalibrationSnapshot, avg_cnot_error
from .topology import (
    CouplingGraph,
    QubitSubset,
    compactness,
    degree,
    density,
    subset_members,
)

EXACT_EXTRACTION_LIMIT = 12


@dataclass(frozen=True)
class AllocationRequest:
    """A request for `size` connected qubits drawn from `available`."""

    size: int
    available: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError(f"request size must be positive, got {self.size}")
        object.__setattr__(self, "available", subset_members(self.available))


@dataclass(frozen=True)
class Partition:
    """An allocated qubit subset plus the score that selected it."""

    members: tuple[int, ...]
    score: float

    def __len__(self) -> int:
        return len(self.members)


def cfm(g: CouplingGraph, snap: CalibrationSnapshot, q: int) -> float:
    """Composite fidelity metric: degree(q) + (1 - (E + R)).

    Higher is better. E is the mean CNOT error over q's incident edges and R
    its readout error, so over-reporting either strictly lowers the score.
    """
    d = degree(g, q)
    if d == 0:
        raise ValueError(f"qubit {q} is isolated; CFM undefined")
    return d + (1.0 - (avg_cnot_error(snap, g, q) + snap.readout_error[q]))


def _best_by_cfm(g: CouplingGraph, snap: CalibrationSnapshot, qubits) -> int:
    """Highest-CFM qubit, ties broken toward the lowest index."""
    return min(qubits, key=lambda q: (-cfm(g, snap, q), q))


def greedy_allocate(
    g: CouplingGraph, snap_reported: CalibrationSnapshot, req: AllocationRequest
) -> Partition | None:
    """Attractor-seeded breadth-first expansion.

    The attractor is the available qubit with the highest CFM. The partition
    then grows one qubit at a time, always taking the highest-CFM available
    neighbor of the current partition. There is no fallback to a second
    attractor: if the attractor's available region runs out of neighbors
    before the partition reaches the requested size, the request fails.
    """
    avail = set(req.available)
    if req.size > len(avail):
        return None
    attractor = _best_by_cfm(g, snap_reported, sorted(avail))
    members = [attractor]
    in_part = {attractor}
    frontier = {n for n in g.neighbors(attractor) if n in avail}
    while len(members) < req.size:
        if not frontier:
            return None
        nxt = _best_by_cfm(g, snap_reported, sorted(frontier))
        frontier.discard(nxt)
        members.append(nxt)
        in_part.add(nxt)
        for n in g.neighbors(nxt):
            if n in avail and n not in in_part:
                frontier.add(n)
    return Partition(tuple(members), score=cfm(g, snap_reported, attractor))


def fidelity_weight(error: float) -> float:
    """Default community edge weight: max(0, 1 - cnot_error)."""
    return max(0.0, 1.0 - error)


def louvain(
    g: CouplingGraph,
    snap_reported: CalibrationSnapshot,
    available: QubitSubset | Sequence[int],
    weight_fn: Callable[[float], float] = fidelity_weight,
) -> tuple[tuple[int, ...], ...]:
    """Deterministic modularity-maximizing communities on the available region.

    Standard two-phase Louvain on the induced subgraph, with edge weights
    weight_fn(cnot_error). Determinism: nodes are visited in ascending index
    order, candidate communities in ascending id order, and the first move
    that strictly improves modularity is taken. Communities whose induced
    subgraph is disconnected are split into connected pieces as a post-pass,
    so the result is always a disjoint cover of `available` by connected
    subsets, ordered by smallest member.
    """
    nodes = sorted(subset_members(available))
    for q in nodes:
        g._check_index(q)
    node_set = set(nodes)
    wedges: dict[tuple[int, int], float] = {}
    for u, v in g.edge_list:
        if u in node_set and v in node_set:
            wedges[(u, v)] = weight_fn(snap_reported.cnot_error[(u, v)])

    communities = _louvain_core(nodes, wedges)
    split = []
    for com in communities:
        split.extend(_connected_pieces(g, com))
    return tuple(sorted(split, key=lambda c: c[0]))


def _louvain_core(
    nodes: list[int], wedges: dict[tuple[int, int], float]
) -> list[tuple[int, ...]]:
    """Louvain on an explicit weighted edge dict; returns sorted member tuples."""
    super_nodes: list[frozenset[int]] = [frozenset([n]) for n in nodes]
    idx = {n: i for i, n in enumerate(nodes)}
    w: dict[tuple[int, int], float] = {}
    for (u, v), wt in wedges.items():
        i, j = idx[u], idx[v]
        key = (min(i, j), max(i, j))
        w[key] = w.get(key, 0.0) + wt

    while True:
        n = len(super_nodes)
        adj: list[dict[int, float]] = [{} for _ in range(n)]
        deg = [0.0] * n
        m2 = 0.0  # sum of weighted degrees; self-loops count twice
        for (i, j), wt in w.items():
            if i == j:
                deg[i] += 2 * wt
                m2 += 2 * wt
            else:
                adj[i][j] = adj[i].get(j, 0.0) + wt
                adj[j][i] = adj[j].get(i, 0.0) + wt
                deg[i] += wt
                deg[j] += wt
                m2 += 2 * wt
        if m2 == 0.0:
            return [tuple(sorted(sn)) for sn in super_nodes]

        comm = list(range(n))
        comm_deg = deg[:]
        improved_any = False
        while True:
            moved = False
            for i in range(n):
                ci = comm[i]
                w_to: dict[int, float] = {}
                for j, wt in adj[i].items():
                    cj = comm[j]
                    w_to[cj] = w_to.get(cj, 0.0) + wt
                comm_deg[ci] -= deg[i]
                base = w_to.get(ci, 0.0) - comm_deg[ci] * deg[i] / m2
                best_c = ci
                for c in sorted(w_to):
                    if c == ci:
                        continue
                    gain = (w_to[c] - comm_deg[c] * deg[i] / m2) - base
                    if gain > 1e-12:
                        best_c = c
                        break
                comm_deg[best_c] += deg[i]
                if best_c != ci:
                    comm[i] = best_c
                    moved = True
                    improved_any = True
            if not moved:
                break
        if not improved_any:
            return [tuple(sorted(sn)) for sn in super_nodes]

        groups: dict[int, list[int]] = {}
        for i, c in enumerate(comm):
            groups.setdefault(c, []).append(i)
        order = sorted(groups.values(), key=min)
        new_nodes = [frozenset().union(*(super_nodes[i] for i in grp)) for grp in order]
        gid: dict[int, int] = {}
        for k, grp in enumerate(order):
            for i in grp:
                gid[i] = k
        new_w: dict[tuple[int, int], float] = {}
        for (i, j), wt in w.items():
            a, b = gid[i], gid[j]
            key = (min(a, b), max(a, b))
            new_w[key] = new_w.get(key, 0.0) + wt
        if len(new_nodes) == len(super_nodes):
            return [tuple(sorted(sn)) for sn in super_nodes]
        super_nodes, w = new_nodes, new_w


def _connected_pieces(g: CouplingGraph, members: tuple[int, ...]) -> list[tuple[int, ...]]:
    mset = set(members)
    pieces = []
    unseen = set(members)
    while unseen:
        src = min(unseen)
        comp = {src}
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                for v in g.neighbors(u):
                    if v in mset and v not in comp:
                        comp.add(v)
                        nxt.append(v)
            frontier = nxt
        pieces.append(tuple(sorted(comp)))
        unseen -= comp
    return pieces


def cri(
    g: CouplingGraph, snap_reported: CalibrationSnapshot, s: QubitSubset | Sequence[int]
) -> float:
    """Connectivity and reliability index of a subset, normalized by the device.

    Numerator: density/compactness of the subset plus its fidelity term
    1 - (E_p + R_p), with E_p = 0 when the subset has no internal edges.
    Denominator: the same expression over the full device. The whole device
    therefore scores exactly 1; a subset beating the device average scores
    above 1.
    """
    members = subset_members(s)
    num = _cri_term(g, snap_reported, members)
    all_q = tuple(range(g.qubit_count))
    den = _cri_term(g, snap_reported, all_q)
    return num / den


def _cri_term(
    g: CouplingGraph, snap: CalibrationSnapshot, members: tuple[int, ...]
) -> float:
    mset = set(members)
    intra = [e for e in g.edge_list if e[0] in mset and e[1] in mset]
    e_p = sum(snap.cnot_error[e] for e in intra) / len(intra) if intra else 0.0
    r_p = sum(snap.readout_error[q] for q in members) / len(members)
    return density(g, members) / compactness(g, members) + (1.0 - (e_p + r_p))


def _expand_densest(
    g: CouplingGraph,
    snap: CalibrationSnapshot,
    pool: tuple[int, ...],
    size: int,
) -> tuple[int, ...] | None:
    """Greedy dense-subset extraction from a connected pool.

    Starts at the pool's highest-CFM qubit and repeatedly adds the neighbor
    contributing the most edges into the current subset (ties: higher CFM,
    then lower index).
    """
    pool_set = set(pool)
    seed = _best_by_cfm(g, snap, sorted(pool))
    subset = [seed]
    chosen = {seed}
    while len(subset) < size:
        candidates = set()
        for q in subset:
            for n in g.neighbors(q):
                if n in pool_set and n not in chosen:
                    candidates.add(n)
        if not candidates:
            return None
        def key(q: int):
            intra = sum(1 for n in g.neighbors(q) if n in chosen)
            return (-intra, -cfm(g, snap, q), q)
        nxt = min(sorted(candidates), key=key)
        subset.append(nxt)
        chosen.add(nxt)
    return tuple(subset)


def _expand_densest_exact(
    g: CouplingGraph,
    snap: CalibrationSnapshot,
    pool: tuple[int, ...],
    size: int,
) -> tuple[int, ...] | None:
    """Exhaustive variant of _expand_densest for oracle tests.

    Enumerates every connected subset of the pool with the requested size and
    returns the CRI maximum (ties: lexicographically smallest member tuple).
    Exponential; refuses pools larger than EXACT_EXTRACTION_LIMIT.
    """
    if len(pool) > EXACT_EXTRACTION_LIMIT:
        raise ValueError(
            f"exact extraction limited to pools of <= {EXACT_EXTRACTION_LIMIT} qubits"
        )
    pool_set = set(pool)
    found: set[tuple[int, ...]] = set()

    def grow(subset: frozenset[int]) -> None:
        if len(subset) == size:
            found.add(tuple(sorted(subset)))
            return
        frontier = set()
        for q in subset:
            for n in g.neighbors(q):
                if n in pool_set and n not in subset:
                    frontier.add(n)
        for n in frontier:
            grow(subset | {n})

    for q in pool:
        grow(frozenset([q]))
    if not found:
        return None
    return min(found, key=lambda mem: (-cri(g, snap, mem), mem))


def comdap_allocate(
    g: CouplingGraph,
    snap_reported: CalibrationSnapshot,
    req: AllocationRequest,
    exact_extraction: bool = False,
) -> Partition | None:
    """Community-based allocation.

    Louvain communities are formed over the available region, then:
      1. a community of exactly the requested size with the highest CRI is
         returned verbatim, if one exists;
      2. otherwise each larger community yields a dense connected extraction
         of the requested size, and the highest-CRI extraction wins;
      3. otherwise communities are merged: starting from the highest-CRI
         anchor, adjacent communities join in descending CRI order until the
         merged set reaches the requested size, and step 2 runs on the merged
         set. Anchors are tried in descending CRI order, so the allocation
         fails only when no connected available region is large enough.

    Size-1 requests return the highest-CFM available qubit. The
    exact_extraction flag swaps the greedy extraction for the exhaustive one
    (small pools only).
    """
    avail = req.available
    if req.size > len(avail):
        return None
    if req.size == 1:
        q = _best_by_cfm(g, snap_reported, sorted(avail))
        return Partition((q,), score=cri(g, snap_reported, (q,)))

    extract = _expand_densest_exact if exact_extraction else _expand_densest
    communities = louvain(g, snap_reported, avail)
    com_cri = {c: cri(g, snap_reported, c) for c in communities}

    exact = [c for c in communities if len(c) == req.size]
    if exact:
        best = min(exact, key=lambda c: (-com_cri[c], c))
        return Partition(best, score=com_cri[best])

    larger = [c for c in communities if len(c) > req.size]
    if larger:
        best_sub: tuple[int, ...] | None = None
        best_score = 0.0
        for c in sorted(larger, key=lambda c: (-com_cri[c], c)):
            sub = extract(g, snap_reported, c, req.size)
            if sub is None:
                continue
            score = cri(g, snap_reported, sub)
            if best_sub is None or score > best_score + 1e-15:
                best_sub, best_score = sub, score
        if best_sub is None:
            return None
        return Partition(best_sub, score=best_score)

    # all communities are smaller than the request: merge, then extract
    for anchor in sorted(communities, key=lambda c: (-com_cri[c], c)):
        merged = set(anchor)
        remaining = [c for c in communities if c != anchor]
        while len(merged) < req.size:
            adjacent = [
                c
                for c in remaining
                if any(n in merged for q in c for n in g.neighbors(q))
            ]
            if not adjacent:
                break
            join = min(adjacent, key=lambda c: (-com_cri[c], c))
            merged |= set(join)
            remaining.remove(join)
        if len(merged) < req.size:
            continue
        sub = extract(g, snap_reported, tuple(sorted(merged)), req.size)
        if sub is not None:
            return Partition(sub, score=cri(g, snap_reported, sub))
    return None


ALLOCATORS: dict[str, Callable[..., Partition | None]] = {
    "greedy": greedy_allocate,
    "comdap": comdap_allocate,
}


def get_allocator(name: str) -> Callable[..., Partition | None]:
    try:
        return ALLOCATORS[name]
    except KeyError:
        raise ValueError(
            f"unknown allocator {name!r}; expected one of {sorted(ALLOCATORS)}"
        ) from None
