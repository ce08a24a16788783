"""Windowed-average connectivity graphs and their reachability analysis.

The graph at time t has an arrow i -> j whenever the average of the
connection weight M_ij over [t, t+T] is at least mu; the comparison is
performed on exact rationals, so schedules sitting exactly at the
threshold (as the worked examples do) keep their edges deterministically.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError, PreconditionError
from .signals import RationalLike, Schedule, as_fraction


@dataclass(frozen=True)
class DirectedGraph:
    n_nodes: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n_nodes < 1:
            raise DomainError("graph needs at least one node")
        for (i, j) in self.edges:
            if i == j:
                raise DomainError(f"self-loop ({i},{j}) not allowed")
            if not (1 <= i <= self.n_nodes and 1 <= j <= self.n_nodes):
                raise DomainError(f"edge ({i},{j}) outside 1..{self.n_nodes}")

    @staticmethod
    def from_edges(n_nodes: int, edges) -> "DirectedGraph":
        return DirectedGraph(n_nodes, frozenset(tuple(e) for e in edges))

    def successors(self, i: int) -> list[int]:
        return sorted(j for (a, j) in self.edges if a == i)

    def predecessors(self, j: int) -> list[int]:
        return sorted(i for (i, b) in self.edges if b == j)

    def reversed(self) -> "DirectedGraph":
        return DirectedGraph(self.n_nodes, frozenset((j, i) for (i, j) in self.edges))

    def intersect(self, other: "DirectedGraph") -> "DirectedGraph":
        if other.n_nodes != self.n_nodes:
            raise PreconditionError("cannot intersect graphs of different sizes")
        return DirectedGraph(self.n_nodes, self.edges & other.edges)

    def is_complete(self) -> bool:
        return len(self.edges) == self.n_nodes * (self.n_nodes - 1)

    def to_adjacency_dict(self) -> dict:
        return {
            "n_nodes": self.n_nodes,
            "adjacency": {str(i): self.successors(i) for i in range(1, self.n_nodes + 1)},
        }

    def to_dot(self, name: str = "G") -> str:
        lines = [f"digraph {name} {{"]
        for i in range(1, self.n_nodes + 1):
            lines.append(f"  {i};")
        for (i, j) in sorted(self.edges):
            lines.append(f"  {i} -> {j};")
        lines.append("}")
        return "\n".join(lines)


@dataclass(frozen=True)
class ReachabilityReport:
    """Outcome of the globally-reachable-node search.

    reachable_node is the lowest-index node every other node can reach, or
    None; distances maps node -> hop count of the shortest directed path to
    it; length is the maximum distance (the graph length d*).
    """

    reachable_node: int | None
    distances: dict[int, int] | None
    length: int | None


def _strongly_connected_components(g: DirectedGraph) -> list[set[int]]:
    """Tarjan's algorithm, iterative to survive deep chains."""
    index_of: dict[int, int] = {}
    lowlink: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    components: list[set[int]] = []
    succ = {i: g.successors(i) for i in range(1, g.n_nodes + 1)}
    counter = 0

    for root in range(1, g.n_nodes + 1):
        if root in index_of:
            continue
        work = [(root, 0)]
        while work:
            node, child_idx = work.pop()
            if child_idx == 0:
                index_of[node] = lowlink[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            recurse = False
            children = succ[node]
            for k in range(child_idx, len(children)):
                child = children[k]
                if child not in index_of:
                    work.append((node, k + 1))
                    work.append((child, 0))
                    recurse = True
                    break
                if child in on_stack:
                    lowlink[node] = min(lowlink[node], index_of[child])
            if recurse:
                continue
            if lowlink[node] == index_of[node]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == node:
                        break
                components.append(comp)
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
    return components


def globally_reachable_set(g: DirectedGraph) -> set[int]:
    """Nodes reachable from every node: the unique sink component, if any."""
    comps = _strongly_connected_components(g)
    comp_of = {}
    for idx, comp in enumerate(comps):
        for node in comp:
            comp_of[node] = idx
    sinks = set(range(len(comps)))
    for (i, j) in g.edges:
        if comp_of[i] != comp_of[j]:
            sinks.discard(comp_of[i])
    if len(sinks) != 1:
        return set()
    return comps[next(iter(sinks))]


def globally_reachable(g: DirectedGraph) -> ReachabilityReport:
    """Find the lowest-index globally reachable node with hop distances.

    Distances are shortest directed path lengths toward the node, computed
    by breadth-first search on reversed edges; length is their maximum.
    """
    sink = globally_reachable_set(g)
    if not sink:
        return ReachabilityReport(None, None, None)
    target = min(sink)
    pred = {i: g.predecessors(i) for i in range(1, g.n_nodes + 1)}
    distances = {target: 0}
    queue = deque([target])
    while queue:
        node = queue.popleft()
        for p in pred[node]:
            if p not in distances:
                distances[p] = distances[node] + 1
                queue.append(p)
    if len(distances) != g.n_nodes:  # unreachable node; should not happen for a sink
        return ReachabilityReport(None, None, None)
    return ReachabilityReport(target, distances, max(distances.values()))


def is_globally_reachable(g: DirectedGraph, node: int) -> bool:
    """True iff every node has a directed path to `node`."""
    pred = {i: g.predecessors(i) for i in range(1, g.n_nodes + 1)}
    seen = {node}
    queue = deque([node])
    while queue:
        cur = queue.popleft()
        for p in pred[cur]:
            if p not in seen:
                seen.add(p)
                queue.append(p)
    return len(seen) == g.n_nodes


def _validate_window(T: RationalLike, mu: RationalLike) -> tuple[Fraction, Fraction]:
    fT, fmu = as_fraction(T), as_fraction(mu)
    if fT <= 0:
        raise DomainError("window length T must be positive")
    if not (0 < fmu <= 1):
        raise DomainError("threshold mu must lie in (0, 1]")
    return fT, fmu


def connectivity_graph(
    sched: Schedule, t: RationalLike, T: RationalLike, mu: RationalLike
) -> DirectedGraph:
    """Edge (i, j) present iff the window average of M_ij over [t, t+T] is >= mu."""
    fT, fmu = _validate_window(T, mu)
    ft = as_fraction(t)
    if ft < 0:
        raise DomainError("window start t must be >= 0")
    edges = set()
    for (i, j), sig in sched.entries.items():
        if sig.window_average_exact(ft, fT) >= fmu:
            edges.add((i, j))
    return DirectedGraph(sched.n_agents, frozenset(edges))


def persistent_graph(
    sched: Schedule, T: RationalLike, mu: RationalLike, k_max: int
) -> DirectedGraph:
    """Intersection of the connectivity graphs at t = 0, T, ..., (k_max-1) T.

    For a schedule whose period divides the sampled horizon this equals the
    true infinite intersection; for aperiodic schedules it is only the
    sampled surrogate.
    """
    if k_max < 1:
        raise DomainError("k_max must be at least 1")
    fT, _ = _validate_window(T, mu)
    result: DirectedGraph | None = None
    for k in range(k_max):
        g = connectivity_graph(sched, k * fT, T, mu)
        result = g if result is None else result.intersect(g)
        if not result.edges:
            break
    assert result is not None
    return result


def _kink_times(sched: Schedule, T: Fraction) -> list[Fraction] | None:
    """Candidate minimizers of t -> window averages, for periodic schedules.

    The window average is piecewise linear in t with kinks only where t or
    t + T crosses a piece boundary, so for a schedule with common period p
    the continuum condition over all t >= 0 reduces to the kinks within one
    period. Returns None when the schedule has no common period.
    """
    p = sched.common_period()
    if p is None:
        return None
    kinks: set[Fraction] = {Fraction(0)}
    for sig in sched.entries.values():
        for (t0, t1, _) in sig.pieces:
            for b in (t0, t1):
                kinks.add(b % p)
                kinks.add((b - T) % p)
    return sorted(kinks)


@dataclass(frozen=True)
class PECheckResult:
    satisfied: bool
    witness: tuple[int, int, float] | None
    exhaustive: bool
    checked_times: tuple[float, ...]


def check_PE(
    sched: Schedule, T: RationalLike, mu: RationalLike, t_samples
) -> PECheckResult:
    """Persistent excitation: every ordered pair's window average >= mu at all t.

    All user samples are checked; for periodic schedules the kink times of
    one period are checked as well, which makes the result exhaustive over
    the continuum. On failure the first violating (i, j, t) is returned.
    """
    fT, fmu = _validate_window(T, mu)
    samples = [as_fraction(t) for t in t_samples]
    if not samples:
        raise DomainError("t_samples must not be empty")
    if any(t < 0 for t in samples):
        raise DomainError("t_samples must be nonnegative")
    kinks = _kink_times(sched, fT)
    times = sorted(set(samples) | set(kinks or []))
    exhaustive = kinks is not None
    for i in range(1, sched.n_agents + 1):
        for j in range(1, sched.n_agents + 1):
            if i == j:
                continue
            sig = sched.entry(i, j)
            for t in times:
                if sig.window_average_exact(t, fT) < fmu:
                    return PECheckResult(False, (i, j, float(t)), exhaustive,
                                         tuple(float(t) for t in times))
    return PECheckResult(True, None, exhaustive, tuple(float(t) for t in times))


@dataclass(frozen=True)
class ISCCheckResult:
    satisfied: bool
    witnesses: dict[tuple[int, int, float], int]
    first_failure: tuple[int, int, float] | None
    exhaustive: bool


def check_ISC(
    sched: Schedule, T: RationalLike, mu: RationalLike, t_samples
) -> ISCCheckResult:
    """Integral scrambling: each pair {i, j} shares a window-connected target k.

    The witness map records the smallest valid k per (i, j, t); k equal to
    one endpoint of the pair only needs the other endpoint's window (an
    agent trivially reaches itself).
    """
    fT, fmu = _validate_window(T, mu)
    samples = [as_fraction(t) for t in t_samples]
    if not samples:
        raise DomainError("t_samples must not be empty")
    if any(t < 0 for t in samples):
        raise DomainError("t_samples must be nonnegative")
    kinks = _kink_times(sched, fT)
    times = sorted(set(samples) | set(kinks or []))
    exhaustive = kinks is not None

    def connected(a: int, k: int, t: Fraction) -> bool:
        if a == k:
            return True
        return sched.entry(a, k).window_average_exact(t, fT) >= fmu

    witnesses: dict[tuple[int, int, float], int] = {}
    for i in range(1, sched.n_agents + 1):
        for j in range(i + 1, sched.n_agents + 1):
            for t in times:
                found = None
                for k in range(1, sched.n_agents + 1):
                    if connected(i, k, t) and connected(j, k, t):
                        found = k
                        break
                if found is None:
                    return ISCCheckResult(False, witnesses, (i, j, float(t)), exhaustive)
                witnesses[(i, j, float(t))] = found
    return ISCCheckResult(True, witnesses, None, exhaustive)


def gamma_reduce(g: DirectedGraph, pair_witness: dict[tuple[int, int], int]) -> int:
    """Collapse (1, ..., N) to a single index via the pair-witness operator.

    Even tuples reduce pairwise and recurse; odd tuples reduce their even
    prefix first and then pair with the last element. Applied N-1 times
    starting from (1, ..., N); the result is a globally reachable node of
    the graph the witnesses were drawn from.
    """

    def pair(a: int, b: int) -> int:
        if a == b:
            return a
        key = (min(a, b), max(a, b))
        if key not in pair_witness:
            raise PreconditionError(f"missing witness for pair {key}")
        return pair_witness[key]

    def reduce(seq: tuple[int, ...]) -> int:
        if len(seq) == 1:
            return seq[0]
        if len(seq) % 2 == 0:
            halved = tuple(pair(seq[k], seq[k + 1]) for k in range(0, len(seq), 2))
            return reduce(halved)
        return pair(reduce(seq[:-1]), seq[-1])

    current = tuple(range(1, g.n_nodes + 1))
    for _ in range(max(1, g.n_nodes - 1)):
        current = (reduce(current),)
    return current[0]
