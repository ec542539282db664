"""Seeded random TRN-over-STN instances.

Procedure, given N events, T temporal and R resource constraints:

1. draw a latent schedule, one uniform time in (0, 1) per event;
2. T one-sided temporal constraints around the latent gap ``d`` between two
   events, loosened by an exponential draw with mean ``sqrt(d)``;
3. G in {1..R-1} generators with rate in (-1, 0);
4. R - G consumers, each drawing at most the headroom left on its interval.

The latent schedule satisfies every constraint by construction. Each step
draws from its own child of ``SeedSequence(seed)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from trn.resource import ResourceConstraint, Trn, usage_at
from trn.temporal import INF, Schedule, Stc, Stn

MAX_RETRIES = 1000


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenParams:
    n_events: int
    n_resource: int
    n_temporal: Optional[int] = None
    density: str = "sparse"
    seed: int = 0

    def __post_init__(self):
        if self.density not in ("sparse", "dense"):
            raise ValueError(f"density must be sparse or dense, got {self.density!r}")
        if self.n_events < 2 or self.n_resource < 2 or self.temporal_count < 2:
            raise ValueError("need N >= 2, T >= 2 and R >= 2")

    @property
    def temporal_count(self) -> int:
        if self.n_temporal is not None:
            return self.n_temporal
        n = self.n_events
        return 2 * n if self.density == "sparse" else n * n // 2


@dataclass(frozen=True)
class GeneratedInstance:
    trn: Trn
    hidden_schedule: Schedule


def exponential_slack(rng, d: float) -> float:
    """Exponential draw with rate ``1/sqrt(d)`` (mean ``sqrt(d)``)."""
    return float(rng.exponential(scale=math.sqrt(d)))


def _ordered_pair(rng, s, n):
    """Two distinct events, earlier latent time first."""
    x, y = (int(v) for v in rng.choice(n, size=2, replace=False))
    if s[x] > s[y]:
        x, y = y, x
    return x, y


def _peak_usage(s, resources, x, y) -> float:
    points = [s[x]] + [t for t in s.values() if s[x] < t < s[y]]
    return max(usage_at(s, resources, t) for t in points)


def _pair_with_headroom(rng, s, resources):
    """Uniform pick among the pairs a blind retry would accept.

    Equivalent in distribution to retrying without a cap; only reached when
    the accepted pairs are rare.
    """
    order = sorted(s, key=s.__getitem__)
    usage = [usage_at(s, resources, s[e]) for e in order]
    ok = []
    for i, x in enumerate(order):
        peak = -INF
        for j in range(i + 1, len(order)):
            peak = max(peak, usage[j - 1])
            if peak < 0 and s[order[j]] > s[x]:
                ok.append((x, order[j], peak))
    if not ok:
        raise GenerationError("no consumer interval has any headroom left")
    return ok[int(rng.integers(len(ok)))]


def generate(params: GenParams) -> GeneratedInstance:
    n, n_res = params.n_events, params.n_resource
    rng_sched, rng_time, rng_split, rng_gen, rng_cons = (
        np.random.default_rng(c) for c in np.random.SeedSequence(params.seed).spawn(5)
    )

    latent = rng_sched.uniform(0.0, 1.0, size=n)
    s = {e: float(latent[e]) for e in range(n)}

    stcs = []
    for _ in range(params.temporal_count):
        for _ in range(MAX_RETRIES):
            x, y = _ordered_pair(rng_time, s, n)
            d = s[y] - s[x]
            if d > 0:
                break
        else:
            raise GenerationError("could not find a pair with distinct latent times")
        lower_bound = rng_time.random() < 0.5
        slack = exponential_slack(rng_time, d)
        if lower_bound:
            stcs.append(Stc(x, y, d - slack, INF))
        else:
            stcs.append(Stc(x, y, -INF, d + slack))

    n_gen = int(rng_split.integers(1, n_res))
    n_cons = n_res - n_gen

    resources = []
    for _ in range(n_gen):
        for _ in range(MAX_RETRIES):
            x, y = _ordered_pair(rng_gen, s, n)
            rate = -rng_gen.uniform(0.0, 1.0)
            if rate != 0.0:
                break
        else:
            raise GenerationError("could not draw a non-zero generation rate")
        resources.append(ResourceConstraint(x, y, rate))

    for _ in range(n_cons):
        for _ in range(MAX_RETRIES):
            x, y = _ordered_pair(rng_cons, s, n)
            peak = _peak_usage(s, resources, x, y)
            if peak < 0:
                break
        else:
            x, y, peak = _pair_with_headroom(rng_cons, s, resources)
        rate = 0.0
        while rate == 0.0:
            rate = rng_cons.uniform(0.0, -peak)
        resources.append(ResourceConstraint(x, y, rate))

    names = tuple(f"e{i}" for i in range(n))
    return GeneratedInstance(Trn(Stn(names, tuple(stcs)), tuple(resources)), s)
