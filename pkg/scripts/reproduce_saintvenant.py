#!/usr/bin/env python3
"""2x2 shallow-water benchmark: T1/T2, integrator matrix, closed-loop run.

Writes saintvenant_trajectory.csv and run_manifest.json into
results/saintvenant/.
"""

import sys

from intreg.cli import main

if __name__ == "__main__":
    sys.exit(main(["reproduce", "saintvenant", "--out-dir", "results/saintvenant"] + sys.argv[1:]))
