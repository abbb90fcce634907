"""Empirical audit of every inequality the aggregators promise.

Runs a reduced grid of long-horizon and regression configurations, collects
each run's recorded worst slacks, and prints one line per check.  A positive
slack above tolerance would mean a broken guarantee.
"""

from smoothcast import SweepRunSpec, run_bound_sweep
from smoothcast.experiments import CHECK_TOLERANCES


def main():
    entries = [
        SweepRunSpec(kind="longterm", scenario="synthetic", n_experts=3,
                     horizon=5, steps=200, seed=1),
        SweepRunSpec(kind="longterm", scenario="adversarial", n_experts=5,
                     horizon=2, steps=200, seed=0),
        SweepRunSpec(kind="regression", steps=300, window=20, n_features=5,
                     segments=3, seed=2),
    ]
    report = run_bound_sweep(entries)
    print(f"{len(entries)} runs, {len(report.rows)} checks, {report.elapsed_seconds:.1f}s")
    print()
    print(f"{'check':26s} {'worst slack':>14s} {'tolerance':>11s}")
    for name, slack in sorted(report.worst_by_check().items()):
        print(f"{name:26s} {slack:14.3e} {CHECK_TOLERANCES[name]:11.0e}")
    print()
    print("all checks passed" if report.all_passed else "SOME CHECKS FAILED")


if __name__ == "__main__":
    main()
