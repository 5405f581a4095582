#!/usr/bin/env python3
"""Reproduce the GARCH(1,1) joint-CLT self-consistency experiment.

Simulates the empirical distribution of the sqrt(n)-scaled (quantile,
centred second moment) pair for a GARCH(1,1) with (omega, alpha, beta) =
(0.1, 0.1, 0.8), builds the replication-MC covariance target, and prints the
entrywise comparison. Scaled-down by default; pass --full for the
acceptance-sized run (M = 2000, n = 10^4, pilot 10^7).
"""

import argparse
import json

import numpy as np

import fclt_lab as fl
from fclt_lab.asymptotics import gamma_target_with_se
from fclt_lab.harness import ExperimentConfig
from fclt_lab.truth import pilot_truth


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--full", action="store_true", help="acceptance-sized run")
    ap.add_argument("--p", type=float, default=0.95)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", default=None, help="optional report JSON path")
    args = ap.parse_args()

    reps = 2000 if args.full else 400
    n = 10_000 if args.full else 4000
    pilot_n = 10_000_000 if args.full else 1_000_000

    spec = fl.AugGarchSpec(model="garch", omega=0.1, alpha=(0.1,), beta=(0.8,))
    ok, reports = fl.approve(spec, 2)
    print("conditions:", ", ".join(f"{r.condition_name}={r.computed_value:.4f}" for r in reports))
    assert ok

    truth = pilot_truth(spec, args.p, 2, seed=(args.seed, 0), n=pilot_n)
    print(f"pilot truth: q={truth.q_true:.4f} f={truth.f_at_q:.4f} ({truth.pilot_fingerprint})")

    lrc = fl.trivariate_long_run_cov_mc(
        spec, args.p, 2, q_true=truth.q_true, f_at_q=truth.f_at_q,
        max_lag=50, n_per_rep=n, n_reps=reps, seed=(args.seed, 1),
    )
    target, target_se = gamma_target_with_se(lrc, truth.a_r)
    cfg = ExperimentConfig(
        spec=spec, p=args.p, r=2, n=n, reps=reps, seed=(args.seed, 2), truth=truth, target=target
    )
    report = fl.run_clt_experiment(cfg, threads=4)

    emp, tgt = report.empirical_cov, target.as_matrix()
    print("empirical cov:", np.round(emp, 4).tolist())
    print("target cov:   ", np.round(tgt, 4).tolist())
    print("rel diff:     ", np.round(np.abs(emp - tgt) / np.abs(tgt), 4).tolist())
    print("verdict:      ", report.verdict)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"report": report.to_obj(), "target": target.to_obj()}, fh, indent=2)
        print("wrote", args.out)


if __name__ == "__main__":
    main()
