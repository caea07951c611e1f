#!/usr/bin/env python3
"""Run the workpiece-placement sweep over the wall grid and print the summary.

Re-frames the default cone toolpath at every voxel of the wall grid and
checks, for both solve modes, whether the whole path is solvable inside
joint limits; reachable voxels also report mean joint-limit-weighted
manipulability. Writes nothing; use ``frik workspace`` for CSV/JSON output.
"""

import argparse
import collections
import os
import time

import numpy as np

import frik
from frik.analysis import SweepSpec, workspace_summary, workspace_sweep
from frik.cli import REFERENCE_WORKSPACE_VOXELS
from frik.config import DEFAULT_Q0_DEG, default_workpiece_frame


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--voxel-mm", type=float, default=100.0)
    parser.add_argument("--samples-per-rev", type=int, default=114)
    args = parser.parse_args()

    model = frik.irb4600()
    q0 = np.radians(np.array(DEFAULT_Q0_DEG))
    spec = frik.ConeSpec(samples_per_rev=args.samples_per_rev)
    template = frik.generate_cone_spiral(spec).with_frame(default_workpiece_frame())
    sweep = SweepSpec(voxel_mm=args.voxel_mm)

    start = time.perf_counter()
    map_adhoc, map_frik = workspace_sweep(model, template, sweep, q0, jobs=args.jobs)
    wall = time.perf_counter() - start

    summary = workspace_summary(map_adhoc, map_frik)
    print(f"swept {map_adhoc.reachable.size} voxels in {wall / 60:.1f} min at jobs={args.jobs}")
    for mode in ("adhoc", "frik"):
        stats = summary[mode]
        print(
            f"{mode}: reachable {stats['reachable_voxels']}, "
            f"manipulability max/mean/std = "
            f"{stats['max_w']}, {stats['mean_w']}, {stats['std_w']}"
        )
    if "reachable_pct_change" in summary:
        print(f"expansion: {summary['reachable_pct_change']:+.1f}%")
    print(
        f"reference: {REFERENCE_WORKSPACE_VOXELS['adhoc']} -> "
        f"{REFERENCE_WORKSPACE_VOXELS['frik']} "
        f"({REFERENCE_WORKSPACE_VOXELS['pct_change']:+.1f}%)"
    )
    for mode, wmap in (("adhoc", map_adhoc), ("frik", map_frik)):
        causes = collections.Counter(v.split("@")[0] for v in wmap.causes.values())
        print(f"{mode} failure causes: {dict(causes)}")


if __name__ == "__main__":
    main()
