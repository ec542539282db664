"""Command line front end.

Exit codes for ``check``: 0 consistent, 1 inconsistent, 2 timeout, 3 input or
configuration error. Other subcommands return 0 on success and 3 on error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from trn import bench, document, mip, smart_house
from trn.cp import CapExceededError, SolverConfig, SolverTimeout, solve, solve_exhaustive
from trn.generator import GenerationError, GenParams, generate
from trn.resource import resource_consistent_schedule
from trn.temporal import Stn, check_schedule

EXIT_CONSISTENT, EXIT_INCONSISTENT, EXIT_TIMEOUT, EXIT_INPUT = 0, 1, 2, 3


def _err(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_INPUT


def cmd_check(args) -> int:
    try:
        trn = document.load(args.file)
    except document.DocumentError as exc:
        return _err(str(exc))

    if args.solver == "mip":
        if not isinstance(trn.atn, Stn):
            return _err("the MIP solver needs a temporal network with a MIP formulation; "
                        f"a {type(trn.atn).__name__} has none (use --solver cp)")
        try:
            model = mip.encode(trn)
            sol = mip.solve_external(model, args.mip_solver, deadline=args.timeout)
        except mip.SolverTimeoutError as exc:
            print(f"timeout: {exc}")
            return EXIT_TIMEOUT
        except mip.MipSolverError as exc:
            return _err(str(exc))
        if sol.status == "unknown":
            return _err("MIP solver returned no verdict")
        consistent = sol.status == "feasible"
        schedule = ordering = None
        if consistent:
            try:
                schedule, ordering = mip.decode_solution(model, sol)
            except mip.InconsistentBinariesError as exc:
                return _err(str(exc))
        risk = None
    else:
        cfg = SolverConfig(deadline=args.timeout)
        fn = solve if args.solver == "cp" else solve_exhaustive
        try:
            res = fn(trn, cfg)
        except SolverTimeout as exc:
            print(f"timeout: {exc}")
            return EXIT_TIMEOUT
        except CapExceededError as exc:
            return _err(str(exc))
        consistent, schedule, ordering, risk = res.consistent, res.schedule, res.ordering, res.risk_bound

    if not consistent:
        print("inconsistent")
        return EXIT_INCONSISTENT
    print("consistent")
    if risk is not None:
        print(f"risk bound: {risk:.6g}")
    for e, t in sorted(schedule.items(), key=lambda kv: (kv[1], kv[0])):
        print(f"  {trn.names[e]}: {t:.6g}")
    if isinstance(trn.atn, Stn):
        ok = check_schedule(trn.temporal_network, schedule) and \
            resource_consistent_schedule(schedule, trn.resources)
        if not ok:
            logging.getLogger(__name__).error("witness schedule failed validation")
    if args.schedule_out:
        extra = {"risk_bound": risk} if risk is not None else {}
        with open(args.schedule_out, "w") as fh:
            json.dump(document.schedule_document(trn, schedule, ordering, **extra), fh, indent=2)
            fh.write("\n")
    return EXIT_CONSISTENT


def cmd_gen(args) -> int:
    try:
        params = GenParams(args.events, args.resource, args.temporal, args.density, args.seed)
        inst = generate(params)
    except (ValueError, GenerationError) as exc:
        return _err(str(exc))
    text = document.dumps(document.to_document(inst.trn))
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)
    names = inst.trn.names
    latent = ", ".join(f"{names[e]}={t:.4f}" for e, t in sorted(inst.hidden_schedule.items()))
    print(f"latent schedule: {latent}", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
        if args.serial:
            raw["serial"] = True
        cfg = bench.BenchConfig(**raw)
        records = bench.run(cfg, progress=lambda r: print(
            f"{r.solver:>10} N={r.N:<4} R={r.R:<3} {r.density:<6} trial={r.trial} "
            f"{r.outcome:<12} {r.elapsed:.3f}s", file=sys.stderr))
    except (OSError, ValueError, TypeError) as exc:
        return _err(str(exc))
    with open(args.output, "w") as fh:
        bench.write_csv(records, fh)
    if args.ratio_out and len(cfg.solvers) >= 2:
        num, den = ("mip", "cp") if {"mip", "cp"} <= set(cfg.solvers) else cfg.solvers[:2]
        cells = bench.ratio_table(records, num, den)
        with open(args.ratio_out, "w") as fh:
            fh.write(bench.ratio_csv(cells))
        print(f"{num}/{den} mean-time ratio")
        print(bench.render_ratio_text(cells))
    return 0


def cmd_export_lp(args) -> int:
    try:
        trn = document.load(args.file)
        text = mip.export_lp(mip.encode(trn, args.horizon))
    except (document.DocumentError, ValueError) as exc:
        return _err(str(exc))
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)
    return 0


def cmd_demo(args) -> int:
    try:
        out = smart_house.run(n_samples=args.samples, seed=args.seed)
    except SolverTimeout as exc:
        print(f"timeout: {exc}")
        return EXIT_TIMEOUT
    sys.stdout.write(smart_house.report(out))
    return EXIT_CONSISTENT if out["consistent"] else EXIT_INCONSISTENT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trn", description="Time resource network consistency tools")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="decide time-resource consistency of a document")
    c.add_argument("file")
    c.add_argument("--solver", choices=["cp", "mip", "exhaustive"], default="cp")
    c.add_argument("--timeout", type=float, default=None)
    c.add_argument("--schedule-out", default=None)
    c.add_argument("--mip-solver", default=None, help="solver command (default: $TRN_MIP_SOLVER)")
    c.set_defaults(func=cmd_check)

    g = sub.add_parser("gen", help="generate a random TRN-over-STN instance")
    g.add_argument("--events", type=int, required=True)
    g.add_argument("--temporal", type=int, default=None)
    g.add_argument("--resource", type=int, required=True)
    g.add_argument("--density", choices=["sparse", "dense"], default="sparse")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", default="-")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="run a benchmark grid from a JSON config")
    b.add_argument("--config", required=True)
    b.add_argument("-o", "--output", required=True)
    b.add_argument("--ratio-out", default=None)
    b.add_argument("--serial", action="store_true")
    b.set_defaults(func=cmd_bench)

    x = sub.add_parser("export-lp", help="write the big-M MIP model as an LP file")
    x.add_argument("file")
    x.add_argument("-o", "--output", default="-")
    x.add_argument("--horizon", type=float, default=None)
    x.set_defaults(func=cmd_export_lp)

    d = sub.add_parser("demo", help="run a built-in scenario")
    d.add_argument("scenario", choices=["smart-house"])
    d.add_argument("--samples", type=int, default=100_000)
    d.add_argument("--seed", type=int, default=0)
    d.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
