"""Abstract temporal networks: STN, STNU (strong controllability), pSTN.

``tc_check`` is the single entry point the solvers use. It takes the network
plus extra simple temporal constraints (the ordering chain) and returns a
``TcResult`` carrying a witness schedule over the controllable events.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from trn.temporal import (
    INF,
    Schedule,
    Stc,
    Stn,
    apsp,
    is_consistent_matrix,
    schedule_from_matrix,
)


class MalformedNetworkError(ValueError):
    pass


# Rational approximation of the inverse normal CDF (P. J. Acklam), refined
# below by one Halley step against erfc.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _quantile_lower_half(q: float) -> float:
    if q < _P_LOW:
        r = math.sqrt(-2.0 * math.log(q))
        x = (((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5]) / \
            ((((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0)
    else:
        r = q - 0.5
        s = r * r
        x = (((((_A[0] * s + _A[1]) * s + _A[2]) * s + _A[3]) * s + _A[4]) * s + _A[5]) * r / \
            (((((_B[0] * s + _B[1]) * s + _B[2]) * s + _B[3]) * s + _B[4]) * s + 1.0)
    err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - q
    u = err * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def gaussian_quantile(q: float) -> float:
    """Inverse standard normal CDF, absolute error well under 1e-8."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {q}")
    if q == 0.5:
        return 0.0
    if q > 0.5:
        return -_quantile_lower_half(1.0 - q)
    return _quantile_lower_half(q)


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


@dataclass(frozen=True)
class ContingentLink:
    source: int
    target: int
    lower: float
    upper: float

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper:
            raise ValueError(f"contingent bounds must satisfy 0 <= lower <= upper: {self}")


@dataclass(frozen=True)
class Stnu:
    base: Stn
    contingent: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "contingent", tuple(self.contingent))
        _check_received(self.base, [(c.source, c.target) for c in self.contingent])

    @property
    def names(self):
        return self.base.names

    @property
    def received(self) -> frozenset:
        return frozenset(c.target for c in self.contingent)


@dataclass(frozen=True)
class Normal:
    mean: float
    std: float

    def __post_init__(self):
        if not self.std > 0:
            raise ValueError("std must be positive")


@dataclass(frozen=True)
class UncertainDuration:
    source: int
    target: int
    dist: Normal


@dataclass(frozen=True)
class Pstn:
    base: Stn
    udns: tuple = ()
    probability: float = 0.95

    def __post_init__(self):
        object.__setattr__(self, "udns", tuple(self.udns))
        if not 0.0 < self.probability < 1.0:
            raise ValueError("probability must lie in (0, 1)")
        _check_received(self.base, [(u.source, u.target) for u in self.udns])

    @property
    def names(self):
        return self.base.names

    @property
    def received(self) -> frozenset:
        return frozenset(u.target for u in self.udns)


Atn = Union[Stn, Stnu, Pstn]


def _check_received(base: Stn, links) -> None:
    targets = [t for _, t in links]
    if len(set(targets)) != len(targets):
        raise MalformedNetworkError("a received event is the target of more than one link")
    received = set(targets)
    for s, t in links:
        if not (0 <= s < base.n and 0 <= t < base.n):
            raise MalformedNetworkError(f"link {s}->{t} references an undeclared event")
        if s == t:
            raise MalformedNetworkError("link endpoints must differ")
        if s in received:
            raise MalformedNetworkError("link must start at an activated event")


def base_stn(atn: Atn) -> Stn:
    return atn if isinstance(atn, Stn) else atn.base


def with_stcs(atn: Atn, stcs: Iterable[Stc]) -> Atn:
    stcs = tuple(stcs)
    if not stcs:
        return atn
    if isinstance(atn, Stn):
        return atn.with_constraints(stcs)
    if isinstance(atn, Stnu):
        return Stnu(atn.base.with_constraints(stcs), atn.contingent)
    return Pstn(atn.base.with_constraints(stcs), atn.udns, atn.probability)


def controllable_events(atn: Atn) -> list:
    if isinstance(atn, Stn):
        return list(atn.events)
    return [e for e in atn.base.events if e not in atn.received]


@dataclass(frozen=True)
class TcResult:
    consistent: bool
    schedule: Optional[Schedule] = None
    risk_bound: Optional[float] = None


def _stn_check(stn: Stn, extra: Sequence[Stc]) -> TcResult:
    d = apsp(stn.with_constraints(extra))
    if not is_consistent_matrix(d):
        return TcResult(False)
    return TcResult(True, schedule_from_matrix(d, 0) if stn.n else {})


def _strong_controllability(base: Stn, links: dict, extra: Sequence[Stc]) -> TcResult:
    """Worst-case rewrite onto activated events, then STN consistency.

    ``links`` maps received event -> (activated event, lower, upper). Bounds
    may be infinite on a side that no constraint ever consults.
    """
    activated = [e for e in base.events if e not in links]
    index = {e: i for i, e in enumerate(activated)}
    rewritten = []
    for c in (*base.constraints, *extra):
        x, y, lo, hi = c.source, c.target, c.lower, c.upper
        if y in links:
            a, wl, wu = links[y]
            y = a
            hi = hi - wu if hi < INF else INF
            lo = lo - wl if lo > -INF else -INF
        if x in links:
            a, wl, wu = links[x]
            x = a
            hi = hi + wl if hi < INF else INF
            lo = lo + wu if lo > -INF else -INF
        if lo > hi or math.isnan(lo) or math.isnan(hi):
            return TcResult(False)
        rewritten.append(Stc(index[x], index[y], lo, hi))
    stn = Stn(tuple(base.names[e] for e in activated), tuple(rewritten))
    res = _stn_check(stn, ())
    if not res.consistent:
        return res
    return TcResult(True, {activated[i]: t for i, t in res.schedule.items()})


def stnu_strong_controllability(stnu: Stnu, extra_stcs: Iterable[Stc] = ()) -> TcResult:
    links = {c.target: (c.source, c.lower, c.upper) for c in stnu.contingent}
    return _strong_controllability(stnu.base, links, tuple(extra_stcs))


def risk_allocation(pstn: Pstn, extra_stcs: Sequence[Stc] = ()) -> dict:
    """Uniform union-bound budget: received event -> (risk, needs_lower, needs_upper).

    Each constraint touching a received event gets ``(1-p)/K``, shared evenly
    between the received events it touches. A tail is cut only if some
    constraint is violated by that tail.
    """
    received = pstn.received
    constraints = [c for c in (*pstn.base.constraints, *extra_stcs)
                   if c.source in received or c.target in received]
    alloc = {r: [0.0, False, False] for r in received}
    if not constraints:
        return {}
    budget = (1.0 - pstn.probability) / len(constraints)
    for c in constraints:
        touched = {e for e in (c.source, c.target) if e in received}
        for e in touched:
            alloc[e][0] += budget / len(touched)
        if c.target in received:
            alloc[c.target][2] |= c.upper < INF
            alloc[c.target][1] |= c.lower > -INF
        if c.source in received:
            alloc[c.source][1] |= c.upper < INF
            alloc[c.source][2] |= c.lower > -INF
    return {e: tuple(v) for e, v in alloc.items() if v[1] or v[2]}


def tightened_bounds(pstn: Pstn, extra_stcs: Sequence[Stc] = ()) -> tuple:
    """Deterministic duration intervals for each uDn plus the risk they spend."""
    alloc = risk_allocation(pstn, extra_stcs)
    links, spent = {}, []
    for u in pstn.udns:
        m, sd = u.dist.mean, u.dist.std
        if u.target not in alloc:
            links[u.target] = (u.source, -INF, INF)
            continue
        risk, low, high = alloc[u.target]
        tail = risk / 2 if (low and high) else risk
        lo = m + gaussian_quantile(tail) * sd if low else -INF
        hi = m + gaussian_quantile(1.0 - tail) * sd if high else INF
        links[u.target] = (u.source, lo, hi)
        spent.append(risk)
    return links, math.fsum(spent)


def pstn_consistent(pstn: Pstn, extra_stcs: Iterable[Stc] = ()) -> TcResult:
    extra = tuple(extra_stcs)
    links, used = tightened_bounds(pstn, extra)
    res = _strong_controllability(pstn.base, links, extra)
    return TcResult(res.consistent, res.schedule, used if res.consistent else None)


def tc_check(atn: Atn, extra_stcs: Iterable[Stc] = ()) -> TcResult:
    extra = tuple(extra_stcs)
    if isinstance(atn, Stn):
        return _stn_check(atn, extra)
    if isinstance(atn, Stnu):
        return stnu_strong_controllability(atn, extra)
    if isinstance(atn, Pstn):
        return pstn_consistent(atn, extra)
    raise TypeError(f"not an ATN: {type(atn).__name__}")


def simulate_pstn(pstn: Pstn, schedule: Schedule, n_samples: int, rng=None,
                  extra_stcs: Sequence[Stc] = (), tol: float = 1e-9) -> float:
    """Fraction of sampled uDn realisations under which every free constraint holds."""
    rng = np.random.default_rng(rng)
    n = pstn.base.n
    times = np.zeros((n_samples, n))
    for e, t in schedule.items():
        times[:, e] = t
    for u in pstn.udns:
        times[:, u.target] = times[:, u.source] + rng.normal(u.dist.mean, u.dist.std, n_samples)
    ok = np.ones(n_samples, dtype=bool)
    for c in (*pstn.base.constraints, *extra_stcs):
        gap = times[:, c.target] - times[:, c.source]
        ok &= (gap >= c.lower - tol) & (gap <= c.upper + tol)
    return float(ok.mean())
