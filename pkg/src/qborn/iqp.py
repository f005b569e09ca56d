"""IQP circuits: normal form, Hadamard gadget, and MPQC compilation.

An IQP circuit is an H-sandwich: a leading H on every qubit, interior
gates diagonal in the Z basis (T, Z, CZ, possibly leftover interior
H gates awaiting gadget elimination), and a trailing H layer. Circuits
tagged ``x_diagonal`` carry gates g that each denote the X-diagonal
unitary H^{xN} g H^{xN}; ``literal`` circuits apply gates as written.

Compilation maps each gate onto MPQC blocks over the standard ladder
entanglement pattern:

  * H, T, Z: one rotation block plus one all-zero block (the second
    ladder cancels the first).
  * CNOT with control 1: four blocks; the single-qubit A/B/C rotations
    sandwiching the ladder reduce it to the one wanted CNOT, with an
    R_phi(pi/2) on the control making the identity exact rather than
    up-to-branch-phase.
  * CZ(k, j): the SWAP/H/CNOT chain
    SWAP_1k (I x H_j) CNOT_1j (I x H_j) SWAP_1k with
    SWAP_1k = CNOT_1k (H x H) CNOT_1k (H x H) CNOT_1k,
    skipping the SWAPs when the control is already qubit 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from qborn.distributions import DiscreteDistribution
from qborn.mpqc import (
    NUM_SLOTS,
    AnsatzSpec,
    EntanglementPattern,
    LayerSpec,
    MpqcProgram,
    evolve,
    gate_ops,
    output_distribution,
)
from qborn.quantum import (
    CapacityError,
    GateKind,
    GateOp,
    QuantumState,
    apply_gate,
    full_unitary,
    global_phase_residual,
    make_gate,
    probabilities,
    zero_state,
)

IQP_GATE_KINDS = ("H", "T", "Z", "CZ")
POST_SELECTION_TOL = 1e-12

X_DIAGONAL = "x_diagonal"
LITERAL = "literal"


class DegeneratePostSelectionError(ValueError):
    """Post-selection probability at or below tolerance."""


@dataclass(frozen=True)
class IqpGate:
    kind: str
    targets: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.kind not in IQP_GATE_KINDS:
            raise ValueError(f"non-IQP gate {self.kind!r}")
        arity = 2 if self.kind == "CZ" else 1
        if len(self.targets) != arity:
            raise ValueError(f"{self.kind} takes {arity} target(s)")
        if arity == 2 and self.targets[0] == self.targets[1]:
            raise ValueError("CZ targets must differ")
        if min(self.targets) < 1:
            raise ValueError("qubit indices are 1-based")


@dataclass(frozen=True)
class IqpCircuit:
    num_qubits: int
    gates: tuple[IqpGate, ...]
    out_register: tuple[int, ...] = ()
    post_register: tuple[int, ...] = ()
    form: str = LITERAL

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "out_register", tuple(self.out_register))
        object.__setattr__(self, "post_register", tuple(self.post_register))
        if self.form not in (X_DIAGONAL, LITERAL):
            raise ValueError(f"unknown circuit form {self.form!r}")
        for gate in self.gates:
            if max(gate.targets) > self.num_qubits:
                raise ValueError(f"gate {gate} out of range for N={self.num_qubits}")
        regs = self.out_register + self.post_register
        if any(not 1 <= q <= self.num_qubits for q in regs):
            raise ValueError("register qubit out of range")
        if set(self.out_register) & set(self.post_register):
            raise ValueError("output and post-selection registers must be disjoint")


def _gate_op(gate: IqpGate) -> GateOp:
    return GateOp(make_gate(GateKind[gate.kind]), gate.targets)


def circuit_ops(circuit: IqpCircuit) -> list[GateOp]:
    """Literal gate sequence, expanding the x_diagonal interpretation."""
    h_layer = [GateOp(make_gate(GateKind.H), (q,)) for q in range(1, circuit.num_qubits + 1)]
    body = [_gate_op(g) for g in circuit.gates]
    if circuit.form == X_DIAGONAL:
        return h_layer + body + h_layer
    return body


def circuit_unitary(circuit: IqpCircuit) -> np.ndarray:
    return full_unitary(circuit_ops(circuit), circuit.num_qubits)


def circuit_state(circuit: IqpCircuit) -> QuantumState:
    state = zero_state(circuit.num_qubits)
    for op in circuit_ops(circuit):
        state = apply_gate(state, op)
    return state


def _is_full_h_layer(gates, num_qubits) -> bool:
    return (
        len(gates) == num_qubits
        and all(g.kind == "H" for g in gates)
        and {g.targets[0] for g in gates} == set(range(1, num_qubits + 1))
    )


def is_normal_form(circuit: IqpCircuit) -> bool:
    """Literal circuit with leading and trailing H layers on every qubit."""
    n = circuit.num_qubits
    return (
        circuit.form == LITERAL
        and len(circuit.gates) >= 2 * n
        and _is_full_h_layer(circuit.gates[:n], n)
        and _is_full_h_layer(circuit.gates[-n:], n)
    )


def to_z_diagonal_form(circuit: IqpCircuit) -> IqpCircuit:
    """Rewrite into the H-sandwich normal form (idempotent).

    For x_diagonal circuits this materializes the implicit H layers;
    the unitary is unchanged (HH = I telescopes between gates).
    """
    if is_normal_form(circuit):
        return circuit
    if circuit.form != X_DIAGONAL:
        raise ValueError("literal circuit is not in sandwich form; tag it x_diagonal")
    h_layer = tuple(IqpGate("H", (q,)) for q in range(1, circuit.num_qubits + 1))
    return IqpCircuit(
        circuit.num_qubits,
        h_layer + circuit.gates + h_layer,
        circuit.out_register,
        circuit.post_register,
        LITERAL,
    )


def interior_h_positions(circuit: IqpCircuit) -> list[int]:
    """Positions of H gates that are neither first nor last on their qubit."""
    positions = []
    for pos, gate in enumerate(circuit.gates):
        if gate.kind != "H":
            continue
        q = gate.targets[0]
        before = any(q in g.targets for g in circuit.gates[:pos])
        after = any(q in g.targets for g in circuit.gates[pos + 1 :])
        if before and after:
            positions.append(pos)
    return positions


def hadamard_gadget(circuit: IqpCircuit, h_gate_position: int) -> IqpCircuit:
    """Eliminate one interior H by teleporting its qubit to an ancilla.

    The ancilla is appended as qubit N+1, prepared with H, entangled by
    CZ with the source line; the source line receives a trailing H and
    joins the post-selection register. The post-selected conditional
    distribution on the output register is unchanged.
    """
    if circuit.form != LITERAL:
        raise ValueError("apply to_z_diagonal_form before gadget rewriting")
    if h_gate_position not in interior_h_positions(circuit):
        raise ValueError(f"position {h_gate_position} is not an interior H")
    q = circuit.gates[h_gate_position].targets[0]
    ancilla = circuit.num_qubits + 1

    def relabel(target: int) -> int:
        return ancilla if target == q else target

    before = circuit.gates[:h_gate_position]
    after = tuple(
        IqpGate(g.kind, tuple(relabel(t) for t in g.targets))
        for g in circuit.gates[h_gate_position + 1 :]
    )
    gadget = (IqpGate("H", (ancilla,)), IqpGate("CZ", (q, ancilla)))
    gates = before + gadget + after + (IqpGate("H", (q,)),)
    return IqpCircuit(
        ancilla,
        gates,
        tuple(relabel(t) for t in circuit.out_register),
        tuple(relabel(t) for t in circuit.post_register) + (q,),
        LITERAL,
    )


def postselected_distribution(
    circuit: IqpCircuit,
    out_register: tuple[int, ...] | None = None,
    post_register: tuple[int, ...] | None = None,
    tol: float = POST_SELECTION_TOL,
) -> DiscreteDistribution:
    """Conditional Born distribution of the output register given the
    post-selection register measures all zeros (other qubits marginalized)."""
    out = circuit.out_register if out_register is None else tuple(out_register)
    post = circuit.post_register if post_register is None else tuple(post_register)
    if set(out) & set(post):
        raise ValueError("registers must be disjoint")
    n = circuit.num_qubits
    probs = probabilities(circuit_state(circuit)).mass

    out_bits = [n - q for q in out]  # bit position of qubit q in the index
    post_mask = 0
    for q in post:
        post_mask |= 1 << (n - q)

    mass = np.zeros(2 ** len(out))
    for idx, p in enumerate(probs):
        if idx & post_mask:
            continue
        key = 0
        for bit in out_bits:
            key = (key << 1) | ((idx >> bit) & 1)
        mass[key] += p
    total = mass.sum()
    if total <= tol:
        raise DegeneratePostSelectionError(
            f"Prob[post register = 0...0] = {total!r} <= {tol}"
        )
    return DiscreteDistribution(len(out), mass / total)


# ---------------------------------------------------------------------------
# compilation to MPQC blocks
# ---------------------------------------------------------------------------

_H_ANGLES = (0.0, 0.0, 0.0, 0.0, math.pi / 2, math.pi / 2, math.pi / 2)
_T_ANGLES = (0.0, 0.0, 0.0, math.pi / 4, 0.0, 0.0, 0.0)
_Z_ANGLES = (0.0, 0.0, 0.0, math.pi, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class CompiledMpqc:
    """MPQC realization of an IQP circuit with per-block provenance."""

    program: MpqcProgram
    provenance: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "provenance", tuple(self.provenance))
        if len(self.provenance) != self.program.num_layers:
            raise ValueError("one provenance entry per block required")

    @property
    def block_count(self) -> int:
        return self.program.num_layers


class _BlockBuilder:
    def __init__(self, num_qubits: int):
        self.num_qubits = num_qubits
        self.blocks: list[np.ndarray] = []
        self.provenance: list[str] = []

    def add(self, assignments: dict[int, tuple], label: str):
        """One MPQC block: per-qubit angle tuples (others zero) + ladder."""
        block = np.zeros((self.num_qubits, NUM_SLOTS))
        for qubit, angles in assignments.items():
            block[qubit - 1] = angles
        self.blocks.append(block)
        self.provenance.append(label)

    def add_cancel(self, label: str):
        self.add({}, label)

    def rotation_pair(self, assignments: dict[int, tuple], label: str):
        """Rotation block followed by the ladder-cancelling zero block."""
        self.add(assignments, label)
        self.add_cancel(f"{label} [ladder cancel]")

    def cnot_from_1(self, k: int, label: str):
        """CNOT with control 1 and target k as four blocks (A/B/C + phase)."""
        # Rotations in the e^{-i t sigma/2} convention map to negated
        # angles here; R_phi(pi/2) on the control removes the residual
        # branch phase so the composite equals CNOT exactly.
        self.add({k: (-math.pi / 2, 0, 0, 0, 0, 0, 0)}, f"{label} [C rotation]")
        self.add({k: (0, math.pi / 2, math.pi / 2, 0, 0, 0, 0)}, f"{label} [B rotation]")
        self.add(
            {k: (0, -math.pi / 2, 0, 0, 0, 0, 0), 1: (0, 0, 0, math.pi / 2, 0, 0, 0)},
            f"{label} [A rotation + control phase]",
        )
        self.add_cancel(f"{label} [ladder cancel]")

    def h_pair(self, qubits: tuple[int, ...], label: str):
        self.rotation_pair({q: _H_ANGLES for q in qubits}, label)

    def finish(self) -> CompiledMpqc:
        pattern = EntanglementPattern.ladder(self.num_qubits)
        ansatz = AnsatzSpec.full_block(len(self.blocks))
        angles = np.array(self.blocks)
        program = MpqcProgram(self.num_qubits, angles, pattern, ansatz)
        return CompiledMpqc(program, tuple(self.provenance))


def _compile_cz(builder: _BlockBuilder, k: int, j: int):
    label = f"CZ({k},{j})"
    if j == 1:  # CZ is symmetric
        k, j = j, k
    if k != 1:
        _compile_swap(builder, k, f"{label} / SWAP(1,{k})")
    # CZ_{1,j} = (I x H_j) CNOT_{1,j} (I x H_j)
    builder.h_pair((j,), f"{label} / H({j})")
    builder.cnot_from_1(j, f"{label} / CNOT(1,{j})")
    builder.h_pair((j,), f"{label} / H({j})")
    if k != 1:
        _compile_swap(builder, k, f"{label} / SWAP(1,{k})")


def _compile_swap(builder: _BlockBuilder, k: int, label: str):
    # SWAP_{1,k} = CNOT_1k CNOT_k1 CNOT_1k with
    # CNOT_k1 = (H x H) CNOT_1k (H x H)
    builder.cnot_from_1(k, f"{label} / CNOT(1,{k})")
    builder.h_pair((1, k), f"{label} / H(1)H({k})")
    builder.cnot_from_1(k, f"{label} / CNOT(1,{k})")
    builder.h_pair((1, k), f"{label} / H(1)H({k})")
    builder.cnot_from_1(k, f"{label} / CNOT(1,{k})")


def compile_gate(gate: IqpGate, num_qubits: int) -> CompiledMpqc:
    """Compile a single gate (extended by identity) to MPQC blocks."""
    if max(gate.targets) > num_qubits:
        raise ValueError("gate target out of range")
    builder = _BlockBuilder(num_qubits)
    if gate.kind == "H":
        builder.h_pair(gate.targets, f"H({gate.targets[0]})")
    elif gate.kind == "T":
        builder.rotation_pair({gate.targets[0]: _T_ANGLES}, f"T({gate.targets[0]})")
    elif gate.kind == "Z":
        # Z = R_phi(pi): same shape as the T compilation.
        builder.rotation_pair({gate.targets[0]: _Z_ANGLES}, f"Z({gate.targets[0]})")
    elif gate.kind == "CZ":
        _compile_cz(builder, *gate.targets)
    else:  # pragma: no cover - IqpGate validates kinds
        raise ValueError(f"unsupported gate kind {gate.kind}")
    return builder.finish()


_SINGLE_QUBIT_ANGLES = {"H": _H_ANGLES, "T": _T_ANGLES, "Z": _Z_ANGLES}


def compile_iqp(circuit: IqpCircuit) -> CompiledMpqc:
    """Compile a whole circuit, fusing runs of single-qubit gates on
    distinct qubits (so each end H layer costs two blocks, not 2N).

    Literal circuits compile gate-by-gate in any gate order; x-diagonal
    circuits are first wrapped into their H-sandwich form."""
    if circuit.form == X_DIAGONAL:
        circuit = to_z_diagonal_form(circuit)
    builder = _BlockBuilder(circuit.num_qubits)
    run: dict[int, tuple] = {}
    run_labels: list[str] = []

    def flush():
        if run:
            builder.rotation_pair(dict(run), "+".join(run_labels))
            run.clear()
            run_labels.clear()

    for gate in circuit.gates:
        if gate.kind == "CZ":
            flush()
            _compile_cz(builder, *gate.targets)
        else:
            q = gate.targets[0]
            if q in run:
                flush()
            run[q] = _SINGLE_QUBIT_ANGLES[gate.kind]
            run_labels.append(f"{gate.kind}({q})")
    flush()
    return builder.finish()


@dataclass(frozen=True)
class VerificationReport:
    phase: complex
    max_residual: float
    distribution_tv: float
    block_count: int

    def ok(self, unitary_tol: float = 1e-7, tv_tol: float = 1e-9) -> bool:
        return self.max_residual < unitary_tol and self.distribution_tv < tv_tol


def verify_compilation(source: IqpCircuit, compiled: CompiledMpqc) -> VerificationReport:
    """Compare source and compiled circuits: global-phase unitary residual
    (N <= 8) and Born-distribution TV (N <= 12)."""
    n = source.num_qubits
    if compiled.program.num_qubits != n:
        raise ValueError("qubit count mismatch")
    if n > 12:
        raise CapacityError("distribution check capped at 12 qubits")

    src_dist = probabilities(circuit_state(source))
    comp_dist = output_distribution(compiled.program)
    tv = float(np.abs(src_dist.mass - comp_dist.mass).sum()) / 2

    if n <= 8:
        u_src = circuit_unitary(source)
        u_comp = full_unitary(gate_ops(compiled.program), n)
        phase, residual = global_phase_residual(u_comp, u_src)
    else:
        phase, residual = 1.0 + 0j, float("nan")
    return VerificationReport(phase, residual, tv, compiled.block_count)


# ---------------------------------------------------------------------------
# textual circuit format
# ---------------------------------------------------------------------------


def parse_circuit(text: str) -> IqpCircuit:
    """Parse the one-gate-per-line format:

        qubits 3
        form x          # optional; x = x_diagonal, literal otherwise
        out 1,2         # optional
        post 3          # optional
        H 1
        CZ 2 3
    """
    num_qubits = None
    out: tuple[int, ...] = ()
    post: tuple[int, ...] = ()
    form = LITERAL
    gates: list[IqpGate] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        try:
            if head == "qubits":
                num_qubits = int(parts[1])
            elif head == "form":
                if parts[1] not in ("x", "literal"):
                    raise ValueError(f"unknown form {parts[1]!r}")
                form = X_DIAGONAL if parts[1] == "x" else LITERAL
            elif head == "out":
                out = tuple(int(q) for q in parts[1].split(","))
            elif head == "post":
                post = tuple(int(q) for q in parts[1].split(","))
            elif head in IQP_GATE_KINDS:
                gates.append(IqpGate(head, tuple(int(q) for q in parts[1:])))
            else:
                raise ValueError(f"unknown directive {head!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {raw.strip()!r}: {exc}") from exc

    if num_qubits is None:
        raise ValueError("missing `qubits N` header")
    return IqpCircuit(num_qubits, tuple(gates), out, post, form)


def format_circuit(circuit: IqpCircuit) -> str:
    lines = [f"qubits {circuit.num_qubits}"]
    if circuit.form == X_DIAGONAL:
        lines.append("form x")
    if circuit.out_register:
        lines.append("out " + ",".join(map(str, circuit.out_register)))
    if circuit.post_register:
        lines.append("post " + ",".join(map(str, circuit.post_register)))
    lines.extend(f"{g.kind} " + " ".join(map(str, g.targets)) for g in circuit.gates)
    return "\n".join(lines) + "\n"
