#!/usr/bin/env python3
"""Noise-fluctuation-strength sweep at fixed 5 dB nominal SNR.

Same scene as the SNR sweep; the x-axis is the spread (in dB) of the
per-snapshot / per-antenna / per-cell noise levels.
"""

import argparse
import sys

from gdoa import NoiseCase, ScenarioConfig, SweepConfig
from gdoa.sweep import run_sweep, write_result_table, write_trial_log


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--case", default="II", help="noise case generating the data (II, III or IV)")
    parser.add_argument("--deltas", type=float, nargs="+", default=[0.0, 5.0, 10.0, 15.0, 20.0])
    parser.add_argument("--trials", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--crb", action="store_true", help="include the CRB column")
    parser.add_argument("--out", default="delta_nu_sweep.csv")
    parser.add_argument("--per-trial-log", default=None)
    args = parser.parse_args(argv)

    case = NoiseCase.from_label(args.case)
    if case is NoiseCase.I:
        parser.error("Case I has no noise fluctuation to sweep")
    base = ScenarioConfig(M=20, L=10, K=3, true_omegas=(-0.1, 0.5, 2.1), snr_db=5.0,
                          delta_nu_db=15.0, noise_case=case, seed=args.seed)
    config = SweepConfig(base=base, sweep_axis="delta_nu_db", values=tuple(args.deltas),
                         trials=args.trials,
                         algorithms=("MVALSE", "MVHN-S", "MVHN-A", "MVHN"),
                         include_crb=args.crb)

    def progress(done, total):
        if done % 20 == 0 or done == total:
            print(f"\r{done}/{total} trials", end="", file=sys.stderr, flush=True)

    table = run_sweep(config, workers=args.workers, progress=progress)
    print(file=sys.stderr)
    write_result_table(args.out, table)
    if args.per_trial_log:
        write_trial_log(args.per_trial_log, table)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
