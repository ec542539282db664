"""Run a CP vs MIP benchmark grid and write raw records plus the time-ratio table.

    python scripts/run_bench.py scripts/configs/bench_small.json --out results/

MIP runs need a solver command in $TRN_MIP_SOLVER; when it is unset and
highspy is importable the bundled HiGHS bridge is used.
"""
import argparse
import dataclasses
import importlib.util
import json
import os
import sys
from pathlib import Path

from trn import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--out", default="results")
    ap.add_argument("--serial", action="store_true")
    args = ap.parse_args()

    raw = json.loads(Path(args.config).read_text())
    if args.serial:
        raw["serial"] = True
    cfg = bench.BenchConfig(**raw)
    if "mip" in cfg.solvers and not (cfg.mip_command or os.environ.get("TRN_MIP_SOLVER")):
        if importlib.util.find_spec("highspy") is None:
            sys.exit("mip requested but no solver: set TRN_MIP_SOLVER or pip install highspy")
        cfg = dataclasses.replace(cfg, mip_command=f"{sys.executable} -m trn.highs_bridge")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    total = len(bench.tasks(cfg))
    done = []

    def progress(rec):
        done.append(rec)
        print(f"[{len(done)}/{total}] {rec.solver:<10} N={rec.N:<3} R={rec.R:<2} {rec.density:<6} "
              f"trial={rec.trial} {rec.outcome:<12} {rec.elapsed:.3f}s", flush=True)

    records = bench.run(cfg, progress)
    with open(out / "records.csv", "w") as fh:
        bench.write_csv(records, fh)
    if len(cfg.solvers) >= 2:
        num, den = ("mip", "cp") if {"mip", "cp"} <= set(cfg.solvers) else cfg.solvers[:2]
        cells = bench.ratio_table(records, num, den)
        (out / "ratio.csv").write_text(bench.ratio_csv(cells))
        print(f"\n{num}/{den} mean time ratio (0: {den} timed out, inf: {num} timed out)")
        print(bench.render_ratio_text(cells))
    print(f"wrote {out / 'records.csv'}")


if __name__ == "__main__":
    main()
