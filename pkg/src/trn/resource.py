"""Simple resource constraints and resource-consistency checks.

A constraint ``<x, y, r>`` draws ``r`` per unit time over the half-open
interval ``[s(x), s(y))``; negative ``r`` is generation. Consistency means
net usage never goes above zero, which only has to be checked right at the
scheduled event times, so for a fixed event order it reduces to prefix sums
of the per-event change ``delta``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from trn.atn import Atn, base_stn, with_stcs
from trn.temporal import precedes

# Net usage at or below this counts as non-positive (absorbs summation-order noise).
RESOURCE_TOL = 1e-9


@dataclass(frozen=True)
class ResourceConstraint:
    start: int
    end: int
    rate: float

    def __post_init__(self):
        if self.start == self.end:
            raise ValueError("resource constraint needs distinct start and end events")
        if self.rate == 0:
            raise ValueError("resource rate must be non-zero")


@dataclass(frozen=True)
class Trn:
    atn: Atn
    resources: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "resources", tuple(self.resources))
        n = base_stn(self.atn).n
        for r in self.resources:
            if not (0 <= r.start < n and 0 <= r.end < n):
                raise ValueError(f"resource constraint {r} references an undeclared event")

    @property
    def names(self):
        return base_stn(self.atn).names

    @property
    def temporal_network(self) -> Atn:
        """The ATN plus ``s(x) <= s(y)`` for every resource constraint."""
        return with_stcs(self.atn, activity_precedences(self.resources))


def activity_precedences(resources: Iterable[ResourceConstraint]) -> list:
    # an activity never ends before it starts; prefix sums of delta rely on it
    return [precedes(r.start, r.end) for r in resources]


@dataclass(frozen=True)
class Ordering:
    """Rank assignment ``event -> rank`` (ranks start at 1, may have gaps when partial)."""

    ranks: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "ranks", dict(self.ranks))
        if len(set(self.ranks.values())) != len(self.ranks):
            raise ValueError("ranks must be all-different")

    @classmethod
    def from_sequence(cls, seq: Iterable[int]) -> "Ordering":
        return cls({e: i + 1 for i, e in enumerate(seq)})

    @property
    def sequence(self) -> list:
        return sorted(self.ranks, key=self.ranks.__getitem__)

    def is_total(self, events: Iterable[int]) -> bool:
        return set(self.ranks) == set(events)

    def __len__(self):
        return len(self.ranks)


def resource_events(resources: Iterable[ResourceConstraint]) -> set:
    out = set()
    for r in resources:
        out.add(r.start)
        out.add(r.end)
    return out


def delta(e: int, resources: Iterable[ResourceConstraint]) -> float:
    total = 0.0
    for r in resources:
        if r.start == e:
            total += r.rate
        if r.end == e:
            total -= r.rate
    return total


def deltas(resources: Sequence[ResourceConstraint]) -> dict:
    return {e: delta(e, resources) for e in sorted(resource_events(resources))}


def usage_at(s: Mapping[int, float], resources: Iterable[ResourceConstraint], t: float) -> float:
    return sum(r.rate for r in resources if s[r.start] <= t < s[r.end])


def resource_consistent_schedule(s: Mapping[int, float],
                                 resources: Sequence[ResourceConstraint],
                                 tol: float = RESOURCE_TOL) -> bool:
    times = {s[e] for e in resource_events(resources)}
    return all(usage_at(s, resources, t) <= tol for t in times)


def align_to_order(s: Mapping[int, float], sequence: Sequence[int], tol: float = 1e-9) -> dict:
    """Make ``s`` non-decreasing along ``sequence``, turning near-ties into exact ties.

    Solver witnesses satisfy the ordering chain only up to rounding; a one-ulp
    inversion between tied events flips a constraint on or off under the
    half-open rule. Events missing from ``s`` are skipped.
    """
    out = dict(s)
    prev = None
    for e in sequence:
        if e not in out:
            continue
        if prev is not None and out[e] - out[prev] < tol:
            out[e] = out[prev]
        prev = e
    return out


def prefix_totals(sequence: Sequence[int], delta_of: Mapping[int, float],
                  seed: float = 0.0) -> list:
    """Running usage: ``[seed, seed + d(s0), seed + d(s0) + d(s1), ...]``."""
    out = [seed]
    total = seed
    for e in sequence:
        total += delta_of[e]
        out.append(total)
    return out


def order_consistent(sequence: Sequence[int], delta_of: Mapping[int, float],
                     tol: float = RESOURCE_TOL) -> bool:
    return max(prefix_totals(sequence, delta_of)) <= tol


def resource_consistent_order(sigma: Ordering, resources: Sequence[ResourceConstraint],
                              tol: float = RESOURCE_TOL) -> bool:
    """Prefix sums of delta along ``sigma`` all non-positive.

    Matches the schedule check for any schedule realising ``sigma`` as long as
    every constraint's start is ranked before its end.
    """
    d = deltas(resources)
    if not sigma.is_total(d):
        raise ValueError("ordering must be total over the resource events")
    return order_consistent(sigma.sequence, d, tol)
