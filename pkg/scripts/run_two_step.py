#!/usr/bin/env python3
"""Two-step scheme: adversarial training followed by kernel fine-tuning.

Runs the adversarial Born machine, then continues from its final circuit
parameters with 2000 MMD iterations at learning rate 1e-4, and reports
the TV before and after fine-tuning.
"""

import argparse
from pathlib import Path

from qborn.cli import _write_run_outputs
from qborn.harness import TrainConfig, finetune, run_experiment


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/two_step")
    parser.add_argument("--seed", type=int, default=700)
    parser.add_argument("--batch", type=int, default=64)
    parser.add_argument("--iterations", type=int, default=2000)
    parser.add_argument("--adv-lr", type=float, default=1e-3)
    parser.add_argument("--finetune-lr", type=float, default=1e-4)
    parser.add_argument("--finetune-iterations", type=int, default=2000)
    args = parser.parse_args()

    adv = run_experiment(
        TrainConfig(
            experiment="BORN_ADV",
            batch=args.batch,
            iterations=args.iterations,
            learning_rate=args.adv_lr,
            seed=args.seed,
        )
    )
    refined = finetune(
        adv,
        TrainConfig(
            experiment="FINETUNE",
            batch=args.batch,
            iterations=args.finetune_iterations,
            learning_rate=args.finetune_lr,
            seed=args.seed,
        ),
    )
    out = Path(args.out)
    _write_run_outputs(adv, out / "adversarial")
    _write_run_outputs(refined, out / "finetuned")
    print(f"adversarial final tv_norm = {adv.final_tv_norm:.4f}")
    print(f"fine-tuned  final tv_norm = {refined.final_tv_norm:.4f}")


if __name__ == "__main__":
    main()
