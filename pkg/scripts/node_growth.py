"""How CP search effort scales with the number of resource constraints at fixed N."""
import argparse

import numpy as np

from trn.cp import SolverConfig, SolverTimeout, solve
from trn.generator import GenParams, generate

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--events", type=int, default=10)
ap.add_argument("--resources", type=int, nargs="+", default=[2, 4, 6, 8, 10, 20])
ap.add_argument("--trials", type=int, default=5)
ap.add_argument("--timeout", type=float, default=30)
args = ap.parse_args()

print(f"N={args.events}")
print(f"{'R':>4} {'mean nodes':>12} {'mean time s':>12} {'timeouts':>9}")
for r in args.resources:
    nodes, times, timeouts = [], [], 0
    for trial in range(args.trials):
        trn = generate(GenParams(args.events, r, seed=trial)).trn
        try:
            res = solve(trn, SolverConfig(deadline=args.timeout))
            stats = res.stats
        except SolverTimeout as exc:
            stats, timeouts = exc.stats, timeouts + 1
        nodes.append(stats.nodes_expanded)
        times.append(stats.elapsed)
    print(f"{r:>4} {np.mean(nodes):>12.0f} {np.mean(times):>12.4f} {timeouts:>9}")
