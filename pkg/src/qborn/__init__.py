"""Quantum generative-modeling workbench.

State-vector simulation of multi-layer parameterized quantum circuits
(MPQCs) used as Born machines, trained against discrete targets with
MMD, non-saturating adversarial, and coding-rate-reduction objectives,
plus a constructive IQP-to-MPQC gate compiler with numerical
equivalence verification.
"""

from qborn.bas import BasSpec, bas_distribution, bas_patterns
from qborn.distributions import (
    DiscreteDistribution,
    empirical_distribution,
    mode_coverage,
    total_variation,
)
from qborn.harness import (
    EvaluationReport,
    RunRecord,
    TrainConfig,
    evaluate,
    finetune,
    run_experiment,
    sweep,
)
from qborn.iqp import (
    IqpCircuit,
    IqpGate,
    compile_iqp,
    hadamard_gadget,
    parse_circuit,
    verify_compilation,
)
from qborn.losses import KernelSpec, McrConfig, mcr_delta_r, mmd_loss
from qborn.mpqc import (
    AnsatzSpec,
    MpqcProgram,
    evolve,
    output_distribution,
    random_program,
)
from qborn.quantum import (
    GateKind,
    GateMatrix,
    GateOp,
    QuantumState,
    apply_gate,
    equal_up_to_global_phase,
    full_unitary,
    make_gate,
    probabilities,
    sample,
)

__all__ = [
    "AnsatzSpec",
    "BasSpec",
    "DiscreteDistribution",
    "EvaluationReport",
    "GateKind",
    "GateMatrix",
    "GateOp",
    "IqpCircuit",
    "IqpGate",
    "KernelSpec",
    "McrConfig",
    "MpqcProgram",
    "QuantumState",
    "RunRecord",
    "TrainConfig",
    "apply_gate",
    "bas_distribution",
    "bas_patterns",
    "compile_iqp",
    "empirical_distribution",
    "equal_up_to_global_phase",
    "evaluate",
    "evolve",
    "finetune",
    "full_unitary",
    "hadamard_gadget",
    "make_gate",
    "mcr_delta_r",
    "mmd_loss",
    "mode_coverage",
    "output_distribution",
    "parse_circuit",
    "probabilities",
    "random_program",
    "run_experiment",
    "sample",
    "sweep",
    "total_variation",
    "verify_compilation",
]
