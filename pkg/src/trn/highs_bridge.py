"""Minimal LP-file solver front end on top of HiGHS (``pip install highspy``).

Usage: ``python -m trn.highs_bridge model.lp``. Prints ``status <word>``
followed by ``<var> <value>`` lines, the format ``trn.mip.solve_external``
reads. Exit status is non-zero only on usage or read errors.
"""
import sys


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python -m trn.highs_bridge MODEL.lp", file=sys.stderr)
        return 2
    import highspy

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    if h.readModel(argv[0]) != highspy.HighsStatus.kOk:
        print(f"cannot read {argv[0]}", file=sys.stderr)
        return 1
    h.run()
    status = h.getModelStatus()
    if status == highspy.HighsModelStatus.kInfeasible:
        print("status infeasible")
        return 0
    if status not in (highspy.HighsModelStatus.kOptimal, highspy.HighsModelStatus.kModelEmpty):
        print(f"status unknown ({h.modelStatusToString(status)})")
        return 0
    print("status feasible")
    lp = h.getLp()
    values = h.getSolution().col_value
    for name, v in zip(lp.col_names_, values):
        print(f"{name} {v!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
