#!/usr/bin/env python3
"""Solve an LP file with HiGHS and write `name value` lines for `spatel import-sol`."""
import argparse
import sys

import highspy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("lp", help="model in LP format")
    ap.add_argument("solution", help="output file")
    ap.add_argument("--time-limit", type=float, default=None)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--gap", type=float, default=1e-6, help="relative MIP gap")
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args()

    h = highspy.Highs()
    h.setOptionValue("output_flag", not args.quiet)
    h.setOptionValue("threads", args.threads)
    h.setOptionValue("mip_rel_gap", args.gap)
    if args.time_limit is not None:
        h.setOptionValue("time_limit", args.time_limit)
    if h.readModel(args.lp) != highspy.HighsStatus.kOk:
        sys.exit(f"HiGHS could not read {args.lp}")
    h.run()
    status = h.getModelStatus()
    info = h.getInfo()
    if info.primal_solution_status != 2:  # kSolutionStatusFeasible
        sys.exit(f"no feasible point: {h.modelStatusToString(status)}")

    lp = h.getLp()
    values = h.getSolution().col_value
    with open(args.solution, "w") as out:
        out.write(f"# HiGHS {h.modelStatusToString(status)}, bound {info.mip_dual_bound!r}, gap {info.mip_gap!r}, "
                  f"objective {info.objective_function_value!r}\n")
        for name, v in zip(lp.col_names_, values):
            if abs(v - round(v)) < 1e-9:
                v = float(round(v))
            out.write(f"{name} {v!r}\n")
    print(f"{h.modelStatusToString(status)}: objective {info.objective_function_value}")


if __name__ == "__main__":
    main()
