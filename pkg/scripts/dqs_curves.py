"""Noiseless quantile search: error after n samples, distance to convergence,
and samples to convergence, each against m. Writes three CSV files."""

import argparse
from pathlib import Path

from qsearch.experiments import ExperimentSpec, run_experiment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results/dqs")
    ap.add_argument("--n-theta", type=int, default=1000)
    ap.add_argument("--m-max", type=int, default=20)
    args = ap.parse_args()
    out = Path(args.outdir)
    ms = tuple(range(2, args.m_max + 1))
    run_experiment(ExperimentSpec("error_curve", m_grid=ms, n_theta=args.n_theta, n_samples=20,
                                  output=str(out / "error_n20.csv")))
    run_experiment(ExperimentSpec("distance_curve", m_grid=ms, n_theta=args.n_theta, epsilon=1e-4,
                                  output=str(out / "distance.csv")))
    run_experiment(ExperimentSpec("sweep_m", strategies=("dqs",), m_grid=ms, n_theta=args.n_theta,
                                  epsilon=1e-4, output=str(out / "samples.csv")))
    print(f"wrote {out}/error_n20.csv, distance.csv, samples.csv")


if __name__ == "__main__":
    main()
