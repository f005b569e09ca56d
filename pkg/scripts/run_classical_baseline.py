#!/usr/bin/env python3
"""Classical baseline: Gumbel-softmax GAN on BAS(2,2) over three seeds.

Writes one run directory per seed plus a small summary CSV under
results/classical_baseline/.
"""

import argparse
from dataclasses import replace
from pathlib import Path

from qborn.cli import _write_run_outputs
from qborn.harness import TrainConfig, run_experiment


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/classical_baseline")
    parser.add_argument("--seeds", default="700,701,702")
    parser.add_argument("--iterations", type=int, default=2000)
    args = parser.parse_args()

    base = TrainConfig(experiment="GUMBEL_GAN", iterations=args.iterations)
    out = Path(args.out)
    rows = ["seed,final_tv_norm,best_tv_norm,modes_covered,invalid_mass"]
    for seed in (int(s) for s in args.seeds.split(",")):
        record = run_experiment(replace(base, seed=seed))
        _write_run_outputs(record, out / f"seed_{seed}")
        rows.append(
            f"{seed},{record.final_tv_norm:.6f},{record.best_tv_norm:.6f},"
            f"{record.modes_covered[-1]},{record.invalid_mass[-1]:.6f}"
        )
        print(rows[-1])
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.csv").write_text("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
