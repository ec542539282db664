"""Ordering search for time-resource consistency.

The search fixes the order of the resource events one rank at a time
(rank 1 first). A partial order is dropped as soon as either

* its optimistic running resource total goes positive (all still-unplaced
  generation is assumed to happen up front), or
* the precedence chain it implies makes the temporal network inconsistent.

Any complete order that survives both is a witness: the temporal check on the
network plus the chain yields a schedule, and resource consistency of that
schedule depends only on the order.

``solve_exhaustive`` is the plain enumerate-and-check loop, kept as an oracle.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from trn.atn import Atn, TcResult, tc_check
from trn.resource import (
    RESOURCE_TOL,
    Ordering,
    ResourceConstraint,
    Trn,
    align_to_order,
    deltas,
    prefix_totals,
)
from trn.temporal import Schedule, Stn, add_edge, apsp, chain, is_consistent_matrix, schedule_from_matrix


class SolverTimeout(Exception):
    def __init__(self, stats: "SearchStats"):
        super().__init__(f"deadline exceeded after {stats.elapsed:.3f}s")
        self.stats = stats


class CapExceededError(ValueError):
    pass


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    # complete orderings that reached the final temporal check (exhaustive: permutations examined)
    orderings_checked: int = 0
    prunes_by_time: int = 0
    prunes_by_resource: int = 0
    elapsed: float = 0.0


@dataclass(frozen=True)
class SolverConfig:
    deadline: Optional[float] = None
    variable_order: str = "delta"  # "delta": generators first by ascending delta; "naive": by index
    exhaustive_cap: Optional[int] = 9
    # enumerate permutations of every event rather than only the resource events
    exhaustive_all_events: bool = False

    def __post_init__(self):
        if self.deadline is not None and not self.deadline > 0:
            raise ValueError("deadline must be positive")
        if self.variable_order not in ("delta", "naive"):
            raise ValueError(f"unknown variable order {self.variable_order!r}")


@dataclass
class SolveResult:
    consistent: bool
    schedule: Optional[Schedule] = None
    ordering: Optional[Ordering] = None
    stats: SearchStats = field(default_factory=SearchStats)
    risk_bound: Optional[float] = None


class _Clock:
    def __init__(self, deadline, stats):
        self.start = time.perf_counter()
        self.deadline = deadline
        self.stats = stats

    def tick(self):
        self.stats.elapsed = time.perf_counter() - self.start
        if self.deadline is not None and self.stats.elapsed > self.deadline:
            raise SolverTimeout(self.stats)


def encode_as_stcs(sigma: Ordering) -> list:
    return chain(sigma.sequence)


def partial_totals(partial: Ordering, resources: Sequence[ResourceConstraint],
                   delta_of=None) -> list:
    """Running totals for a partial order, seeded with all unplaced generation."""
    d = deltas(resources) if delta_of is None else delta_of
    seed = sum(v for e, v in d.items() if v < 0 and e not in partial.ranks)
    return prefix_totals(partial.sequence, d, seed)


def prune_resource(partial: Ordering, resources: Sequence[ResourceConstraint] = (),
                   tol: float = RESOURCE_TOL, delta_of=None) -> bool:
    """False iff no completion of ``partial`` can be resource consistent."""
    return max(partial_totals(partial, resources, delta_of)[1:], default=-1.0) <= tol


def prune_time(partial: Ordering, atn: Atn) -> bool:
    """False iff the precedences implied by ``partial`` break temporal consistency."""
    return tc_check(atn, chain(partial.sequence)).consistent


def variable_order(delta_of: dict, how: str = "delta") -> list:
    if how == "naive":
        return sorted(delta_of)
    return sorted(delta_of, key=lambda e: (delta_of[e], e))


class _GenericTime:
    """Re-runs the full variant check on network + chain at every node."""

    def __init__(self, atn: Atn):
        self.atn = atn

    def root(self):
        r = tc_check(self.atn)
        return r if r.consistent else None

    def extend(self, state, prefix):
        r = tc_check(self.atn, chain(prefix))
        return r if r.consistent else None

    def witness(self, state, prefix) -> TcResult:
        return state


class _StnTime:
    """Incremental closure for plain STNs: one O(n^2) tightening per new rank."""

    def __init__(self, stn: Stn):
        self.stn = stn

    def root(self):
        d = apsp(self.stn)
        return d if is_consistent_matrix(d) else None

    def extend(self, d, prefix):
        if len(prefix) < 2:
            return d
        last, new = prefix[-2], prefix[-1]
        # t(new) - t(last) >= 0 is the edge new -> last of weight 0
        if d[last, new] < 0:
            return None
        d = d.copy()
        add_edge(d, new, last, 0.0)
        return d

    def witness(self, d, prefix) -> TcResult:
        return TcResult(True, schedule_from_matrix(d, 0) if d.size else {})


def _time_checker(atn: Atn):
    return _StnTime(atn) if isinstance(atn, Stn) else _GenericTime(atn)


def solve(trn: Trn, config: SolverConfig = SolverConfig()) -> SolveResult:
    stats = SearchStats()
    clock = _Clock(config.deadline, stats)
    d = deltas(trn.resources)
    order = variable_order(d, config.variable_order)
    n = len(order)
    checker = _time_checker(trn.temporal_network)

    clock.tick()
    root = checker.root()
    if root is None:
        stats.prunes_by_time += 1
        return SolveResult(False, stats=stats)

    generating = {e for e in order if d[e] < 0}
    prefix: list = []
    used: set = set()
    gen_left = [sum(d[e] for e in generating)]

    def resource_ok() -> bool:
        total = gen_left[0]
        for e in prefix:
            total += d[e]
            if total > RESOURCE_TOL:
                return False
        return True

    def dfs(state):
        if len(prefix) == n:
            return state
        for e in order:
            if e in used:
                continue
            stats.nodes_expanded += 1
            clock.tick()
            prefix.append(e)
            used.add(e)
            if e in generating:
                gen_left[0] -= d[e]
            found = None
            if not resource_ok():
                stats.prunes_by_resource += 1
            else:
                child = checker.extend(state, prefix)
                if len(prefix) == n:
                    stats.orderings_checked += 1
                if child is None:
                    stats.prunes_by_time += 1
                else:
                    found = dfs(child)
            if found is not None:
                return found
            prefix.pop()
            used.discard(e)
            if e in generating:
                gen_left[0] += d[e]
        return None

    leaf = dfs(root)
    clock.stats.elapsed = time.perf_counter() - clock.start
    if leaf is None:
        return SolveResult(False, stats=stats)
    w = checker.witness(leaf, prefix)
    return SolveResult(True, align_to_order(w.schedule, prefix), Ordering.from_sequence(prefix),
                       stats, w.risk_bound)


def solve_exhaustive(trn: Trn, config: SolverConfig = SolverConfig()) -> SolveResult:
    """Enumerate every permutation; keep the first that is resource then time consistent."""
    stats = SearchStats()
    clock = _Clock(config.deadline, stats)
    d = deltas(trn.resources)
    if config.exhaustive_all_events:
        universe = list(range(len(trn.names)))
    else:
        universe = variable_order(d, config.variable_order)
    cap = config.exhaustive_cap
    if cap is not None and len(universe) > cap:
        raise CapExceededError(f"{len(universe)} events to permute exceeds cap {cap}")

    atn = trn.temporal_network
    for perm in itertools.permutations(universe):
        stats.orderings_checked += 1
        stats.nodes_expanded += 1
        clock.tick()
        seq = [e for e in perm if e in d]
        if max(prefix_totals(seq, d)) > RESOURCE_TOL:
            stats.prunes_by_resource += 1
            continue
        r = tc_check(atn, chain(perm))
        if r.consistent:
            clock.stats.elapsed = time.perf_counter() - clock.start
            return SolveResult(True, align_to_order(r.schedule, perm), Ordering.from_sequence(seq),
                               stats, r.risk_bound)
        stats.prunes_by_time += 1
    stats.elapsed = time.perf_counter() - clock.start
    return SolveResult(False, stats=stats)
