"""PQS against TPQS at a fixed flip probability: mean samples and distance
to convergence as functions of m. Writes one CSV file."""

import argparse

from qsearch.experiments import ExperimentSpec, run_experiment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output", default="results/noisy_sweep.csv")
    ap.add_argument("--p", type=float, default=0.1)
    ap.add_argument("--n-theta", type=int, default=100)
    ap.add_argument("--replicates", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    spec = ExperimentSpec("sweep_m", strategies=("pqs", "tpqs"), p=args.p, seed=args.seed,
                          m_grid=(2, 3, 5, 10, 20, 30, 40, 50), n_theta=args.n_theta,
                          replicates=args.replicates, workers=args.workers, output=args.output)
    run_experiment(spec)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
