"""Command-line entry point: train, sweep, finetune, eval, iqp, plotdata.

Config files are flat ``key = value`` text; unknown keys are hard
errors. The ``QBORN_SEED`` environment variable overrides the seed.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import fields
from pathlib import Path

from qborn.distributions import DiscreteDistribution, to_csv
from qborn.harness import (
    EXPERIMENTS,
    RunRecord,
    TrainConfig,
    evaluate,
    finetune,
    run_experiment,
    series_csv,
    sweep,
    sweep_summary,
)

SEED_ENV = "QBORN_SEED"


def _parse_value(name: str, kind, raw: str):
    raw = raw.strip()
    if kind is bool:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    if kind is str:
        return raw
    # tuple-valued fields (bandwidths): comma-separated floats
    return tuple(float(part) for part in raw.split(","))


def parse_config(text: str) -> TrainConfig:
    """Flat key = value lines; '#' comments; unknown keys are errors."""
    schema = {f.name: f.type for f in fields(TrainConfig)}
    kinds = {
        "experiment": str,
        "ansatz": str,
        "disc_encoding": str,
        "bandwidths": tuple,
        "normalized_tv": bool,
    }
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in schema:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        kind = kinds.get(key)
        if kind is None:
            kind = float if key in (
                "learning_rate",
                "d_learning_rate",
                "epsilon_sq",
                "temp_start",
                "temp_end",
                "early_stop_threshold",
            ) else int
        values[key] = _parse_value(key, kind, value)
    if "experiment" not in values:
        raise ValueError("config must set `experiment`")
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        values["seed"] = int(env_seed)
    return TrainConfig(**values)


def load_config(path: str) -> TrainConfig:
    return parse_config(Path(path).read_text())


def _write_run_outputs(record: RunRecord, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "record.json").write_text(record.to_json(include_timing=True))
    n = TrainConfig(**record.config).num_qubits
    import numpy as np

    dist = DiscreteDistribution(n, np.array(record.final_distribution))
    (out_dir / "distribution.csv").write_text(to_csv(dist))
    (out_dir / "series.csv").write_text(series_csv(record))


def _cmd_train(args) -> int:
    config = load_config(args.config)
    record = run_experiment(config)
    _write_run_outputs(record, Path(args.out))
    print(f"final tv_norm={record.final_tv_norm:.6f} best={record.best_tv_norm:.6f}")
    return 0


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    batches = [int(b) for b in args.batches.split(",")]
    records = sweep(config, batches)
    out = Path(args.out)
    for batch, record in zip(batches, records):
        _write_run_outputs(record, out / f"batch_{batch}")
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.csv").write_text(sweep_summary(records))
    print((out / "summary.csv").read_text(), end="")
    return 0


def _cmd_finetune(args) -> int:
    record = RunRecord.from_json(Path(getattr(args, "from")).read_text())
    config = load_config(args.config)
    result = finetune(record, config)
    _write_run_outputs(result, Path(args.out))
    print(f"final tv_norm={result.final_tv_norm:.6f} (from {record.final_tv_norm:.6f})")
    return 0


def _cmd_eval(args) -> int:
    record = RunRecord.from_json(Path(getattr(args, "from")).read_text())
    report = evaluate(record, args.samples)
    print(report.to_json())
    return 0


def _cmd_iqp(args) -> int:
    import json

    import numpy as np

    from qborn.iqp import (
        CompiledMpqc,
        compile_iqp,
        parse_circuit,
        verify_compilation,
    )
    from qborn.mpqc import from_record, to_record

    circuit = parse_circuit(Path(args.circuit).read_text())
    if args.iqp_command == "compile":
        compiled = compile_iqp(circuit)
        payload = {
            "program": to_record(compiled.program),
            "provenance": list(compiled.provenance),
        }
        Path(args.out).write_text(json.dumps(payload, indent=1))
        print(f"{compiled.block_count} blocks -> {args.out}")
        return 0
    # verify
    payload = json.loads(Path(args.compiled).read_text())
    compiled = CompiledMpqc(from_record(payload["program"]), tuple(payload["provenance"]))
    report = verify_compilation(circuit, compiled)
    print(
        f"blocks={report.block_count} phase={report.phase:.6f} "
        f"max_residual={report.max_residual:.3e} tv={report.distribution_tv:.3e}"
    )
    return 0 if report.ok() else 1


def _cmd_plotdata(args) -> int:
    record = RunRecord.from_json(Path(getattr(args, "from")).read_text())
    if args.what == "tv":
        print("iteration,tv_norm,tv_raw")
        for i, tn, tr in zip(record.iterations, record.tv_norm, record.tv_raw):
            print(f"{i},{tn:.17g},{tr:.17g}")
    elif args.what == "losses":
        print("iteration,generator_loss,discriminator_loss")
        for i, g, d in zip(record.iterations, record.generator_loss, record.discriminator_loss):
            print(f"{i},{g:.17g},{'' if d is None else format(d, '.17g')}")
    elif args.what == "distribution":
        import numpy as np

        n = TrainConfig(**record.config).num_qubits
        print(to_csv(DiscreteDistribution(n, np.array(record.final_distribution))), end="")
    else:
        raise ValueError(f"unknown plot kind {args.what!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qborn",
        description="Born-machine generative modeling workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run one experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="run")
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("sweep", help="run one experiment per batch size")
    p.add_argument("--config", required=True)
    p.add_argument("--batches", required=True, help="comma list, 0 = EXACT")
    p.add_argument("--out", default="sweep")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("finetune", help="kernel-loss refinement of an adversarial run")
    p.add_argument("--from", required=True, dest="from")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="finetune")
    p.set_defaults(fn=_cmd_finetune)

    p = sub.add_parser("eval", help="evaluate a run record by sampling")
    p.add_argument("--from", required=True, dest="from")
    p.add_argument("--samples", type=int, default=16000)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("iqp", help="compile/verify IQP circuits as MPQC blocks")
    iqp_sub = p.add_subparsers(dest="iqp_command", required=True)
    pc = iqp_sub.add_parser("compile")
    pc.add_argument("--circuit", required=True)
    pc.add_argument("--out", required=True)
    pc.set_defaults(fn=_cmd_iqp)
    pv = iqp_sub.add_parser("verify")
    pv.add_argument("--circuit", required=True)
    pv.add_argument("--compiled", required=True)
    pv.set_defaults(fn=_cmd_iqp)

    p = sub.add_parser("plotdata", help="emit plot-ready CSV from a record")
    p.add_argument("--from", required=True, dest="from")
    p.add_argument("--what", choices=("tv", "distribution", "losses"), required=True)
    p.set_defaults(fn=_cmd_plotdata)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
