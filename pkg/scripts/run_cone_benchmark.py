#!/usr/bin/env python3
"""Run the cone-spiral joint-travel benchmark and print the comparison table.

Solves the default cone toolpath twice from the benchmark start
configuration: once with the ad hoc fully-pinned orientation (6-DOF task)
and once functionally redundant (5-DOF task), then reports per-joint and
overall travel plus per-target solve times.
"""

import argparse
import time

import numpy as np

import frik
from frik.analysis import joint_travel, summarize_timing
from frik.cli import REFERENCE_STEP_TIME_US, REFERENCE_TRAVEL_DEG
from frik.config import DEFAULT_Q0_DEG, default_workpiece_frame
from frik.solver import SolverSettings, TaskProjector, solve_toolpath


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples-per-rev", type=int, default=114)
    parser.add_argument("--pitch-mm", type=float, default=2.0)
    parser.add_argument("--lambda", dest="lam", type=float, default=0.02)
    parser.add_argument("--method", choices=("newton", "halley"), default="halley")
    args = parser.parse_args()

    model = frik.irb4600()
    q0 = np.radians(np.array(DEFAULT_Q0_DEG))
    spec = frik.ConeSpec(samples_per_rev=args.samples_per_rev, pitch=args.pitch_mm)
    path = frik.generate_cone_spiral(spec).with_frame(default_workpiece_frame())
    settings = SolverSettings(lam=args.lam, method=args.method)

    runs = {}
    for mode, p, r in (
        ("adhoc", frik.assign_adhoc_orientation(path), 6),
        ("frik", path, 5),
    ):
        start = time.perf_counter()
        results = solve_toolpath(model, p, q0, TaskProjector(r), settings)
        wall = time.perf_counter() - start
        runs[mode] = joint_travel([res.q for res in results])
        timing = summarize_timing(results)
        print(
            f"{mode}: {len(results)} targets in {wall:.2f}s, "
            f"mean {timing.mean_us:.0f} us/target "
            f"(reference {REFERENCE_STEP_TIME_US} us)"
        )

    adhoc, frik_run = runs["adhoc"], runs["frik"]
    print(f"\n{'joint':>10} {'adhoc [deg]':>12} {'frik [deg]':>12} {'% change':>9}")
    for i in range(model.n):
        a, f = adhoc.per_joint_deg[i], frik_run.per_joint_deg[i]
        pct = 100.0 * (f - a) / a if a else 0.0
        print(f"{'J' + str(i + 1):>10} {a:12.3f} {f:12.3f} {pct:9.2f}")
    pct = 100.0 * (frik_run.overall_deg - adhoc.overall_deg) / adhoc.overall_deg
    print(f"{'overall6D':>10} {adhoc.overall_deg:12.3f} {frik_run.overall_deg:12.3f} {pct:9.2f}")
    print(
        f"\nreference overall: {REFERENCE_TRAVEL_DEG['adhoc']} -> "
        f"{REFERENCE_TRAVEL_DEG['frik']} ({REFERENCE_TRAVEL_DEG['pct_change']:+.2f}%)"
    )


if __name__ == "__main__":
    main()
