"""Connectivity graphs, reachability, PE/ISC checks, and the pair reduction."""

from fractions import Fraction

import numpy as np
import pytest

from consensus_certify.errors import DomainError, PreconditionError
from consensus_certify.signals import Schedule, Signal
from consensus_certify.graphs import (
    DirectedGraph,
    check_ISC,
    check_PE,
    connectivity_graph,
    gamma_reduce,
    globally_reachable,
    is_globally_reachable,
    persistent_graph,
)
from consensus_certify.experiments import (
    RandomScheduleParams,
    example1_schedule,
    oracle_reachability,
    random_schedule,
)


def complete_schedule(n):
    return Schedule(n, {(i, j): Signal.constant(1) for i in range(1, n + 1)
                        for j in range(1, n + 1) if i != j})


def test_connectivity_zero_schedule_is_empty():
    g = connectivity_graph(Schedule(3, {}), 0, 1, 0.5)
    assert g.edges == frozenset()


def test_connectivity_constant_one_is_complete():
    g = connectivity_graph(complete_schedule(4), 0.3, 2.0, 1.0)
    assert g.is_complete()


def test_connectivity_example1_is_path_at_threshold():
    sched = example1_schedule(3, 3, Fraction(1, 2))
    g = connectivity_graph(sched, 0, 3, Fraction(1, 2))
    assert g.edges == frozenset({(2, 1), (3, 2)})


@pytest.mark.parametrize("n", [3, 5, 7, 10])
def test_connectivity_example1_threshold_exact_for_awkward_mu(n):
    # 1/(N-1) is not a dyadic float for most N; the exact comparison must
    # still keep the chain edges whose averages equal mu precisely.
    sched = example1_schedule(n)
    g = connectivity_graph(sched, 0, n, Fraction(1, n - 1))
    assert g.edges == frozenset({(i, i - 1) for i in range(2, n + 1)})


def test_connectivity_rejects_bad_mu():
    with pytest.raises(DomainError):
        connectivity_graph(Schedule(2, {}), 0, 1, 0)
    with pytest.raises(DomainError):
        connectivity_graph(Schedule(2, {}), 0, 1, 1.5)


def test_globally_reachable_complete_graph():
    g = connectivity_graph(complete_schedule(4), 0, 1, 1)
    rep = globally_reachable(g)
    assert rep.reachable_node == 1
    assert rep.length == 1
    assert all(d <= 1 for d in rep.distances.values())


def test_globally_reachable_chain():
    g = DirectedGraph.from_edges(3, {(3, 2), (2, 1)})
    rep = globally_reachable(g)
    assert rep.reachable_node == 1
    assert rep.distances == {1: 0, 2: 1, 3: 2}
    assert rep.length == 2


def test_globally_reachable_absent_for_disjoint_cycles():
    g = DirectedGraph.from_edges(4, {(1, 2), (2, 1), (3, 4), (4, 3)})
    rep = globally_reachable(g)
    assert rep.reachable_node is None
    assert rep.distances is None and rep.length is None


def test_persistent_graph_constant_schedule():
    g = persistent_graph(complete_schedule(3), 1.0, 0.9, k_max=4)
    assert g.is_complete()


def test_persistent_graph_example1_periodic():
    sched = example1_schedule(4)
    for k_max in (1, 3, 6):
        g = persistent_graph(sched, 4, Fraction(1, 3), k_max=k_max)
        assert g.edges == frozenset({(2, 1), (3, 2), (4, 3)})


def test_persistent_graph_dies_with_transient_schedule():
    sig = Signal.from_pieces([(0, 1, 1.0)])  # aperiodic: active only early
    sched = Schedule(2, {(1, 2): sig})
    assert persistent_graph(sched, 1.0, 0.5, k_max=2).edges == frozenset()


def test_pe_constant_schedule_true():
    result = check_PE(complete_schedule(3), 1.0, 1.0, [0.0, 0.5])
    assert result.satisfied and result.witness is None


def test_pe_example1_fails_on_silent_pair():
    result = check_PE(example1_schedule(3), 3, Fraction(1, 2), [0.0])
    assert not result.satisfied
    assert result.witness[0] == 1  # agent 1 listens to nobody


def test_pe_kink_sampling_catches_shifted_windows():
    # every entry active on one window of length mu*T per period (period
    # longer than the probe window): fine at t = 0, violated for shifted t;
    # the reported witness time must be a kink.
    T, mu, period = 1.0, 0.25, 2.0
    win = Signal.from_pieces([(0, mu * T, 1.0)], period=period)
    sched = Schedule(2, {(1, 2): win, (2, 1): win})
    for pair in ((1, 2), (2, 1)):
        assert sched.entry(*pair).window_average_exact(0, T) >= Fraction(1, 4)
    result = check_PE(sched, T, mu, [0.0])
    assert result.exhaustive
    assert not result.satisfied
    assert result.witness[2] in result.checked_times
    assert result.witness[2] != 0.0


def test_isc_pe_schedule_satisfied():
    result = check_ISC(complete_schedule(3), 1.0, 0.8, [0.0])
    assert result.satisfied
    assert set(result.witnesses.values()) == {1}  # smallest valid k


def test_isc_star_schedule():
    n = 4
    entries = {(i, 1): Signal.constant(1) for i in range(2, n + 1)}
    sched = Schedule(n, entries)
    result = check_ISC(sched, 1.0, 0.7, [0.0])
    assert result.satisfied
    assert set(result.witnesses.values()) == {1}


def test_isc_zero_schedule_fails():
    result = check_ISC(Schedule(3, {}), 1.0, 0.5, [0.0])
    assert not result.satisfied
    assert result.first_failure == (1, 2, 0.0)


def test_gamma_reduce_complete_graph_min_witness():
    g = DirectedGraph.from_edges(
        4, {(i, j) for i in range(1, 5) for j in range(1, 5) if i != j}
    )
    witness = {(i, j): i for i in range(1, 5) for j in range(i + 1, 5)}
    assert gamma_reduce(g, witness) == 1


def test_gamma_reduce_star():
    g = DirectedGraph.from_edges(4, {(i, 1) for i in range(2, 5)})
    witness = {(i, j): 1 for i in range(1, 5) for j in range(i + 1, 5)}
    assert gamma_reduce(g, witness) == 1


def test_gamma_reduce_two_agents():
    g = DirectedGraph.from_edges(2, {(1, 2)})
    assert gamma_reduce(g, {(1, 2): 2}) == 2


def test_gamma_reduce_missing_witness_raises():
    g = DirectedGraph.from_edges(3, {(1, 2)})
    with pytest.raises(PreconditionError):
        gamma_reduce(g, {(1, 2): 2})


def test_gamma_node_is_globally_reachable_when_isc_holds():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        center = int(rng.integers(1, n + 1))
        entries = {
            (i, center): Signal.constant(float(rng.uniform(0.6, 1.0)))
            for i in range(1, n + 1)
            if i != center
        }
        sched = Schedule(n, entries)
        res = check_ISC(sched, 1.0, 0.5, [0.0])
        assert res.satisfied
        witness = {(i, j): k for (i, j, t), k in res.witnesses.items()}
        g = connectivity_graph(sched, 0, 1.0, 0.5)
        node = gamma_reduce(g, witness)
        assert is_globally_reachable(g, node)


def test_connectivity_monotone_in_mu():
    rng = np.random.default_rng(11)
    for seed in range(10):
        n = int(rng.integers(2, 7))
        target = DirectedGraph.from_edges(n, {(i, i - 1) for i in range(2, n + 1)})
        sched = random_schedule(
            RandomScheduleParams(n, 1.5, 0.3, target, extra_edge_prob=0.5, seed=seed)
        )
        mus = sorted(rng.uniform(0.05, 1.0, size=3))
        graphs = [connectivity_graph(sched, 0, 1.5, m) for m in mus]
        for weaker, stronger in zip(graphs[:-1], graphs[1:]):
            assert stronger.edges <= weaker.edges


def test_length_bounds_when_reachable():
    rng = np.random.default_rng(5)
    seen = 0
    for _ in range(200):
        n = int(rng.integers(2, 7))
        edges = {
            (i, j)
            for i in range(1, n + 1)
            for j in range(1, n + 1)
            if i != j and rng.uniform() < 0.4
        }
        rep = globally_reachable(DirectedGraph.from_edges(n, edges))
        if rep.reachable_node is not None:
            seen += 1
            assert 1 <= rep.length <= n - 1 or (rep.length == 0 and n == 1)
    assert seen > 20


def test_matches_oracle_on_small_graphs():
    rng = np.random.default_rng(2)
    for _ in range(150):
        n = int(rng.integers(2, 6))
        edges = {
            (i, j)
            for i in range(1, n + 1)
            for j in range(1, n + 1)
            if i != j and rng.uniform() < 0.35
        }
        g = DirectedGraph.from_edges(n, edges)
        ours, ref = globally_reachable(g), oracle_reachability(g)
        assert ours == ref


def test_persistent_subset_of_each_sample():
    sched = example1_schedule(4)
    p = persistent_graph(sched, 4, Fraction(1, 3), k_max=5)
    for k in range(5):
        g = connectivity_graph(sched, 4 * k, 4, Fraction(1, 3))
        assert p.edges <= g.edges


def test_exports():
    g = DirectedGraph.from_edges(3, {(3, 2), (2, 1)})
    adj = g.to_adjacency_dict()
    assert adj["adjacency"]["3"] == [2]
    dot = g.to_dot()
    assert "3 -> 2;" in dot and "digraph" in dot
