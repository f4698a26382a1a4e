#!/usr/bin/env python3
"""Run all five randomized invariant suites and exit nonzero on any failure.

Extra arguments are forwarded to every suite, e.g.:

    python3 scripts/run_checks.py --trials 10 --seed 1
"""

import sys

from angmres.cli import main

SUITE_NAMES = ("monotonicity", "equivalence", "bounds", "span", "multisecant")

if __name__ == "__main__":
    extra = sys.argv[1:]
    worst = 0
    for suite in SUITE_NAMES:
        worst = max(worst, main(["check", suite, *extra]))
    sys.exit(worst)
