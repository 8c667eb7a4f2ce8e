"""Quantile search against proactive learning over a grid of sampling times
and speeds. Writes the per-strategy table as CSV and the time-difference grid
with its sign-change contour as JSON."""

import argparse

from qsearch.experiments import ExperimentSpec, run_experiment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output", default="results/compare.csv")
    ap.add_argument("--summary", default="results/compare.json")
    ap.add_argument("--n-theta", type=int, default=100)
    ap.add_argument("--replicates", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    spec = ExperimentSpec(
        "compare_grid", p_values=(0.0, 0.1), seed=args.seed, n_theta=args.n_theta, replicates=args.replicates,
        m_grid=(2, 3, 5, 8, 10, 15, 20, 30, 40, 60, 80, 100), lambda_grid=tuple(i / 20 for i in range(21)),
        gammas=(1.0, 5.0, 10.0, 20.0, 30.0, 45.0, 60.0), velocities=(0.5, 1.0, 1.5, 2.0, 3.0, 4.0),
        epsilon=1e-4, workers=args.workers, output=args.output, summary=args.summary,
    )
    res = run_experiment(spec)
    for key, grid in res.summary["grids"].items():
        faster = sum(c["difference_s"] < 0 for c in grid["cells"])
        print(f"{key}: quantile search faster in {faster}/{len(grid['cells'])} cells")


if __name__ == "__main__":
    main()
