"""Solve the smart-house scenario and check the schedule by simulation."""
import argparse

from trn import smart_house

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--samples", type=int, default=100_000)
ap.add_argument("--seed", type=int, default=0)
args = ap.parse_args()

out = smart_house.run(n_samples=args.samples, seed=args.seed)
print(smart_house.report(out), end="")
if out["consistent"]:
    stats = out["result"].stats
    print(f"search: {stats.nodes_expanded} nodes, {stats.elapsed * 1000:.1f} ms")
