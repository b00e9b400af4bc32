#!/usr/bin/env python3
"""Scalar transport benchmark: gain-vs-decay-rate sweep and closed-loop run.

Writes transport_gain_sweep.csv, transport_trajectory.csv and
run_manifest.json into results/transport/.
"""

import sys

from intreg.cli import main

if __name__ == "__main__":
    sys.exit(main(["reproduce", "transport", "--out-dir", "results/transport"] + sys.argv[1:]))
