#!/usr/bin/env python3
"""Solve an LP-format model with HiGHS and write a seriation solution file.

Usage: highs_solve.py MODEL.lp SOLUTION.sol [TIME_LIMIT_SECONDS]

Exit codes: 0 finished (optimal, feasible, limit or infeasible, see the
status line),
3 the model uses features HiGHS cannot read (quadratic constraints),
1 anything else.
"""

import sys


def has_quadratic_constraints(path):
    section = None
    with open(path) as f:
        for line in f:
            if line and not line[0].isspace():
                section = line.strip().lower()
            elif section == "subject to" and "[" in line:
                return True
    return False


def main(argv):
    if len(argv) not in (3, 4):
        print(__doc__, file=sys.stderr)
        return 1
    model, solution = argv[1], argv[2]
    if has_quadratic_constraints(model):
        print("HiGHS does not support quadratic constraints", file=sys.stderr)
        return 3
    import highspy

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", 1)
    if len(argv) == 4:
        h.setOptionValue("time_limit", float(argv[3]))
    if h.readModel(model) == highspy.HighsStatus.kError:
        print(f"HiGHS could not read {model}", file=sys.stderr)
        return 1
    h.run()
    status = h.getModelStatus()
    ms = highspy.HighsModelStatus
    info = h.getInfo()
    lines = []
    if status == ms.kInfeasible:
        lines.append("status infeasible")
    elif status == ms.kOptimal:
        lines.append("status optimal")
    elif info.primal_solution_status == 2:  # feasible incumbent under a limit
        lines.append("status feasible")
    elif status in (ms.kTimeLimit, ms.kIterationLimit, ms.kSolutionLimit):
        lines.append("status limit")
    else:
        print(f"HiGHS stopped with {h.modelStatusToString(status)}", file=sys.stderr)
        return 1
    if lines[0] in ("status optimal", "status feasible"):
        lines.append(f"objective {info.objective_function_value!r}")
        if status != ms.kOptimal:
            lines.append(f"bound {info.mip_dual_bound!r}")
        names = h.getLp().col_names_
        for name, value in zip(names, h.getSolution().col_value):
            if value != 0.0:
                lines.append(f"{name} {value!r}")
    with open(solution, "w") as f:
        f.write("\n".join(lines) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
