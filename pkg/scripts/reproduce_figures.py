#!/usr/bin/env python3
"""Rerun every benchmark figure and print the claim verdicts.

Thin wrapper over `angmres reproduce all`.  Artifacts (per-run CSV
histories, an SVG plot, and a verdict file per figure) land in
results/figures unless --out is given.  Exits nonzero if any claim fails.
"""

import sys

from angmres.cli import main

if __name__ == "__main__":
    args = sys.argv[1:]
    if "--out" not in args:
        args = ["--out", "results/figures", *args]
    sys.exit(main(["reproduce", "all", *args]))
