#!/usr/bin/env python3
"""Bar-heating benchmark: steady-state map, integral gain, closed-loop run.

Writes heat_trajectory.csv and run_manifest.json into results/heat/.
"""

import sys

from intreg.cli import main

if __name__ == "__main__":
    sys.exit(main(["reproduce", "heat", "--out-dir", "results/heat"] + sys.argv[1:]))
