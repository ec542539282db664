"""Simple temporal networks: distance-graph closure, consistency, schedules.

Events are dense integer indices into ``Stn.names``. A constraint
``Stc(x, y, lo, hi)`` reads ``lo <= t(y) - t(x) <= hi``; infinite bounds
are allowed and contribute no edge to the distance graph.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Sequence

import numpy as np

INF = math.inf

Schedule = Dict[int, float]


class InconsistentNetworkError(ValueError):
    pass


class MissingEventError(KeyError):
    pass


@dataclass(frozen=True)
class Stc:
    source: int
    target: int
    lower: float = -INF
    upper: float = INF

    def __post_init__(self):
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError("NaN bound")
        if self.lower > self.upper:
            raise ValueError(f"lower {self.lower} > upper {self.upper}")


def precedes(u: int, v: int) -> Stc:
    """``t(v) - t(u) >= 0``."""
    return Stc(u, v, 0.0, INF)


@dataclass(frozen=True)
class Stn:
    names: tuple = ()
    constraints: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        n = len(self.names)
        for c in self.constraints:
            if not (0 <= c.source < n and 0 <= c.target < n):
                raise ValueError(f"constraint {c} references an undeclared event")

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def events(self) -> range:
        return range(len(self.names))

    def index(self, name: str) -> int:
        return self.names.index(name)

    def with_constraints(self, extra: Iterable[Stc]) -> "Stn":
        extra = tuple(extra)
        if not extra:
            return self
        return Stn(self.names, self.constraints + extra)


def distance_graph(n: int, constraints: Iterable[Stc]) -> np.ndarray:
    d = np.full((n, n), INF)
    np.fill_diagonal(d, 0.0)
    for c in constraints:
        if c.upper < INF:
            d[c.source, c.target] = min(d[c.source, c.target], c.upper)
        if c.lower > -INF:
            d[c.target, c.source] = min(d[c.target, c.source], -c.lower)
    return d


def close(d: np.ndarray) -> np.ndarray:
    """Floyd-Warshall closure of a distance matrix (returns a new array)."""
    d = np.array(d, dtype=float, copy=True)
    for k in range(d.shape[0]):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    return d


def apsp(stn: Stn) -> np.ndarray:
    """All-pairs shortest paths of the STN distance graph.

    Edge ``x -> y`` carries ``upper`` and ``y -> x`` carries ``-lower``.
    A negative diagonal entry marks a negative cycle.
    """
    return close(distance_graph(stn.n, stn.constraints))


def is_consistent_matrix(d: np.ndarray, eps: float = 0.0) -> bool:
    return bool(d.size == 0 or np.all(np.diag(d) >= -eps))


def stn_consistent(stn: Stn, eps: float = 0.0) -> bool:
    return is_consistent_matrix(apsp(stn), eps)


def add_edge(d: np.ndarray, a: int, b: int, w: float) -> None:
    """Tighten a closed matrix in place with the edge ``a -> b`` of weight ``w``.

    The result stays closed. Caller must check ``d[b, a] + w >= 0`` first if
    it cares about consistency.
    """
    if w >= d[a, b]:
        return
    np.minimum(d, d[:, a, None] + w + d[None, b, :], out=d)


def schedule_from_matrix(d: np.ndarray, reference: int = 0) -> Schedule:
    """Earliest-time witness from a closed, consistent distance matrix.

    Events are pinned one at a time at ``-d[e, ref]`` (or the latest time when
    unbounded below, or 0 when unconstrained), re-tightening after each pin so
    events with no finite bound relative to the reference still land in a
    jointly feasible spot.
    """
    n = d.shape[0]
    if n == 0:
        return {}
    d = np.array(d, dtype=float, copy=True)
    times = {reference: 0.0}
    for e in range(n):
        if e == reference:
            continue
        lo, hi = -d[e, reference], d[reference, e]
        if lo > -INF:
            v = lo
        elif hi < INF:
            v = hi
        else:
            v = 0.0
        times[e] = float(v)
        add_edge(d, reference, e, v)
        add_edge(d, e, reference, -v)
    return dict(sorted(times.items()))


def extract_schedule(stn: Stn, reference: int = 0) -> Schedule:
    if stn.n == 0:
        return {}
    if not 0 <= reference < stn.n:
        raise MissingEventError(reference)
    d = apsp(stn)
    if not is_consistent_matrix(d):
        raise InconsistentNetworkError("STN has a negative cycle")
    return schedule_from_matrix(d, reference)


def check_schedule(stn: Stn, s: Mapping[int, float], tol: float = 1e-9) -> bool:
    """Closed-bound check of every constraint under ``s`` (``tol`` absorbs FP noise)."""
    missing = [e for e in stn.events if e not in s]
    if missing:
        raise MissingEventError(f"schedule lacks events {missing}")
    for c in stn.constraints:
        gap = s[c.target] - s[c.source]
        if gap < c.lower - tol or gap > c.upper + tol:
            return False
    return True


def chain(sequence: Sequence[int]) -> list:
    """Precedence constraints ``s[0] <= s[1] <= ...``."""
    return [precedes(u, v) for u, v in zip(sequence, sequence[1:])]
