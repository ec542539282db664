"""The Smart House pSTN: one 150 W generator, four appliances, two uncertain events.

Clock: minutes after noon. The resident arrives ~ N(17:00, 5 min), sunset
is ~ N(19:00, 1 min), and every constraint must hold jointly with
probability at least 0.98.

* wash clothes, 2 h at 130 W, finished before the resident arrives;
* cook dinner, 30 min at 100 W, ready within 15 minutes of the arrival;
* lights on at 80 W from before sunset until at least midnight;
* late snack, 30 min at 20 W, inside 22:00-23:00.
"""
from __future__ import annotations

import numpy as np

from trn.atn import Normal, Pstn, UncertainDuration, simulate_pstn
from trn.cp import SolverConfig, solve
from trn.resource import Trn, ResourceConstraint
from trn.temporal import INF, Stc, Stn

DAY = 780.0  # 01:00 next day; the generator runs over [0, DAY]
MIDNIGHT = 720.0
ARRIVAL = Normal(300.0, 5.0)
SUNSET = Normal(420.0, 1.0)
PROBABILITY = 0.98
GENERATOR_W = 150.0

EVENTS = ("day_start", "day_end", "arrival", "sunset",
          "wash_start", "wash_end", "cook_start", "cook_end",
          "lights_on", "lights_off", "snack_start", "snack_end")


def build(probability: float = PROBABILITY) -> Trn:
    e = {name: i for i, name in enumerate(EVENTS)}
    ds = e["day_start"]
    stcs = [Stc(ds, e["day_end"], DAY, DAY)]
    for name in EVENTS[4:]:
        stcs.append(Stc(ds, e[name], 0.0, DAY))
    stcs += [
        Stc(e["wash_start"], e["wash_end"], 120.0, 120.0),
        Stc(e["wash_end"], e["arrival"], 0.0, INF),
        Stc(e["cook_start"], e["cook_end"], 30.0, 30.0),
        # dinner ready no more than 15 minutes away from the arrival, either side
        Stc(e["arrival"], e["cook_end"], -15.0, 15.0),
        Stc(e["lights_on"], e["sunset"], 0.0, INF),
        Stc(ds, e["lights_off"], MIDNIGHT, INF),
        Stc(e["snack_start"], e["snack_end"], 30.0, 30.0),
        Stc(ds, e["snack_start"], 600.0, INF),
        Stc(ds, e["snack_end"], -INF, 660.0),
    ]
    udns = (UncertainDuration(ds, e["arrival"], ARRIVAL),
            UncertainDuration(ds, e["sunset"], SUNSET))
    atn = Pstn(Stn(EVENTS, tuple(stcs)), udns, probability)
    resources = (
        ResourceConstraint(ds, e["day_end"], -GENERATOR_W),
        ResourceConstraint(e["wash_start"], e["wash_end"], 130.0),
        ResourceConstraint(e["cook_start"], e["cook_end"], 100.0),
        ResourceConstraint(e["lights_on"], e["lights_off"], 80.0),
        ResourceConstraint(e["snack_start"], e["snack_end"], 20.0),
    )
    return Trn(atn, resources)


def clock(minutes: float) -> str:
    total = int(round(minutes)) + 12 * 60
    return f"{(total // 60) % 24:02d}:{total % 60:02d}"


def run(n_samples: int = 100_000, seed: int = 0, deadline: float = 10.0) -> dict:
    trn = build()
    res = solve(trn, SolverConfig(deadline=deadline))
    out = {"consistent": res.consistent, "trn": trn, "result": res}
    if res.consistent:
        out["risk_bound"] = res.risk_bound
        out["empirical_success"] = simulate_pstn(trn.atn, res.schedule, n_samples,
                                                 np.random.default_rng(seed))
    return out


def report(out: dict) -> str:
    if not out["consistent"]:
        return "smart-house: inconsistent at p = 0.98\n"
    trn, res = out["trn"], out["result"]
    lines = ["smart-house: consistent",
             f"certified risk bound: {out['risk_bound']:.4f} "
             f"(success probability >= {1 - out['risk_bound']:.4f})",
             f"simulated success rate: {out['empirical_success']:.5f}",
             "schedule:"]
    for e, t in sorted(res.schedule.items(), key=lambda kv: (kv[1], kv[0])):
        lines.append(f"  {trn.names[e]:<12} {clock(t)}  (+{t:.2f} min)")
    return "\n".join(lines) + "\n"
