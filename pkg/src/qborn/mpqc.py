"""The MPQC ansatz: layered per-qubit rotation chains plus a CNOT ladder.

Each layer applies, per qubit j, the unitary

    U = R_z(t1) R_y(t2) R_z(t3) R_phi(phi) R_x(t4) R_z(t5) R_x(t6)

with the rightmost factor acting first, followed by the entanglement
pattern (default ladder CNOT_12, CNOT_13, ..., CNOT_1N). Angles live in
an L x N x 7 tensor with slot order (t1, t2, t3, phi, t4, t5, t6).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from qborn.distributions import DiscreteDistribution
from qborn.quantum import GateKind, GateOp, QuantumState, apply_gate, make_gate, probabilities, zero_state

NUM_SLOTS = 7
SLOT_KINDS = (
    GateKind.RZ,
    GateKind.RY,
    GateKind.RZ,
    GateKind.RPHI,
    GateKind.RX,
    GateKind.RZ,
    GateKind.RX,
)
# The written product is applied right to left: slot 6 (R_x) acts first.
APPLICATION_ORDER = (6, 5, 4, 3, 2, 1, 0)

SHIFT = math.pi / 2


@dataclass(frozen=True)
class EntanglementPattern:
    """Ordered (control, target) CNOT pairs applied after the rotations."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))
        for control, target in self.pairs:
            if control == target:
                raise ValueError("control and target must differ")
            if min(control, target) < 1:
                raise ValueError("qubit indices are 1-based")

    @staticmethod
    def ladder(num_qubits: int) -> "EntanglementPattern":
        """CNOT_12, CNOT_13, ..., CNOT_1N (empty for a single qubit)."""
        return EntanglementPattern(tuple((1, t) for t in range(2, num_qubits + 1)))


@dataclass(frozen=True)
class LayerSpec:
    """Active rotation slots for one layer; entangle=False skips the CNOTs."""

    slots: tuple[int, ...]
    entangle: bool = True

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        if any(not 0 <= s < NUM_SLOTS for s in self.slots):
            raise ValueError("slot indices must be in [0, 7)")


@dataclass(frozen=True)
class AnsatzSpec:
    """Which of the 7 rotation slots are trainable in each layer."""

    variant: str
    layers: tuple[LayerSpec, ...]

    @staticmethod
    def full_block(num_layers: int) -> "AnsatzSpec":
        return AnsatzSpec(
            "FULL_BLOCK",
            tuple(LayerSpec(tuple(range(NUM_SLOTS))) for _ in range(num_layers)),
        )

    @staticmethod
    def experiment() -> "AnsatzSpec":
        """Depth-4 reduced ansatz: (R_x, R_z, R_x) per qubit per layer with
        the ladder, plus a final R_x layer without entanglement.

        On 4 qubits this is 4*4*3 + 4 = 52 trainable angles.
        """
        main = LayerSpec((4, 5, 6), entangle=True)
        return AnsatzSpec("EXPERIMENT", (main,) * 4 + (LayerSpec((6,), entangle=False),))

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    def num_parameters(self, num_qubits: int) -> int:
        return sum(len(layer.slots) for layer in self.layers) * num_qubits


@dataclass(frozen=True)
class MpqcProgram:
    """A trainable Born-machine circuit: angle tensor + entanglement pattern."""

    num_qubits: int
    angles: np.ndarray  # shape (L, N, 7)
    entanglement: EntanglementPattern
    ansatz: AnsatzSpec

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=float)
        object.__setattr__(self, "angles", angles)
        expected = (self.ansatz.num_layers, self.num_qubits, NUM_SLOTS)
        if angles.shape != expected:
            raise ValueError(f"angle tensor shape {angles.shape}, expected {expected}")
        if not np.isfinite(angles).all():
            raise ValueError("angles must be finite")
        for control, target in self.entanglement.pairs:
            if max(control, target) > self.num_qubits:
                raise ValueError("entanglement pair out of range")
        angles.setflags(write=False)

    @property
    def num_layers(self) -> int:
        return self.ansatz.num_layers

    def active_indices(self) -> list[tuple[int, int, int]]:
        """Flat parameter order: (layer, qubit axis, slot), row-major."""
        return [
            (l, j, k)
            for l, layer in enumerate(self.ansatz.layers)
            for j in range(self.num_qubits)
            for k in layer.slots
        ]

    @property
    def num_parameters(self) -> int:
        return self.ansatz.num_parameters(self.num_qubits)

    def flat_parameters(self) -> np.ndarray:
        return np.array([self.angles[idx] for idx in self.active_indices()])

    def with_flat_parameters(self, values: np.ndarray) -> "MpqcProgram":
        indices = self.active_indices()
        if len(values) != len(indices):
            raise ValueError("parameter vector length mismatch")
        angles = self.angles.copy()
        for idx, value in zip(indices, values):
            angles[idx] = value
        return MpqcProgram(self.num_qubits, angles, self.entanglement, self.ansatz)


def random_program(
    num_qubits: int,
    ansatz: AnsatzSpec,
    rng: np.random.Generator,
    entanglement: EntanglementPattern | None = None,
) -> MpqcProgram:
    """Active angles uniform on [0, 2pi), inactive slots pinned at 0."""
    if entanglement is None:
        entanglement = EntanglementPattern.ladder(num_qubits)
    angles = np.zeros((ansatz.num_layers, num_qubits, NUM_SLOTS))
    for l, layer in enumerate(ansatz.layers):
        for j in range(num_qubits):
            for k in layer.slots:
                angles[l, j, k] = rng.uniform(0.0, 2 * math.pi)
    return MpqcProgram(num_qubits, angles, entanglement, ansatz)


def zero_program(
    num_qubits: int,
    ansatz: AnsatzSpec,
    entanglement: EntanglementPattern | None = None,
) -> MpqcProgram:
    if entanglement is None:
        entanglement = EntanglementPattern.ladder(num_qubits)
    angles = np.zeros((ansatz.num_layers, num_qubits, NUM_SLOTS))
    return MpqcProgram(num_qubits, angles, entanglement, ansatz)


def block_unitary(
    angles_for_layer: np.ndarray,
    pattern: EntanglementPattern,
    slots: tuple[int, ...] | None = None,
    entangle: bool = True,
) -> list[GateOp]:
    """Gate sequence of one block: per-qubit rotations then the CNOTs.

    slots restricts which of the 7 rotations are emitted (None = all).
    """
    angles_for_layer = np.asarray(angles_for_layer, dtype=float)
    num_qubits = angles_for_layer.shape[0]
    if angles_for_layer.shape != (num_qubits, NUM_SLOTS):
        raise ValueError(f"expected (N, {NUM_SLOTS}) angle block")
    active = set(range(NUM_SLOTS) if slots is None else slots)
    ops = []
    for j in range(num_qubits):
        for k in APPLICATION_ORDER:
            if k in active:
                gate = make_gate(SLOT_KINDS[k], float(angles_for_layer[j, k]))
                ops.append(GateOp(gate, (j + 1,)))
    if entangle:
        cnot = make_gate(GateKind.CNOT)
        ops.extend(GateOp(cnot, pair) for pair in pattern.pairs)
    return ops


def gate_ops(program: MpqcProgram) -> list[GateOp]:
    """Full gate sequence of the program, layer by layer."""
    ops = []
    for l, layer in enumerate(program.ansatz.layers):
        ops.extend(
            block_unitary(
                program.angles[l],
                program.entanglement,
                slots=layer.slots,
                entangle=layer.entangle,
            )
        )
    return ops


def _slot_matrix(kind: GateKind, angle: float) -> np.ndarray:
    # Inlined trig; same conventions as make_gate, skipping validation.
    if kind is GateKind.RX:
        c, s = math.cos(angle / 2), math.sin(angle / 2)
        return np.array([[c, 1j * s], [1j * s, c]])
    if kind is GateKind.RY:
        c, s = math.cos(angle / 2), math.sin(angle / 2)
        return np.array([[c, s], [-s, c]], dtype=complex)
    if kind is GateKind.RZ:
        return np.array([[np.exp(1j * angle / 2), 0], [0, np.exp(-1j * angle / 2)]])
    if kind is GateKind.RPHI:
        return np.array([[1, 0], [0, np.exp(1j * angle)]])
    raise ValueError(kind)


class _LadderCache:
    """Dense entanglement-pattern unitaries keyed by (pairs, N)."""

    def __init__(self):
        self._cache: dict = {}

    def get(self, pattern: EntanglementPattern, num_qubits: int) -> np.ndarray:
        key = (pattern.pairs, num_qubits)
        mat = self._cache.get(key)
        if mat is None:
            from qborn.quantum import full_unitary

            cnot = make_gate(GateKind.CNOT)
            mat = full_unitary(
                [GateOp(cnot, pair) for pair in pattern.pairs], num_qubits
            )
            self._cache[key] = mat
        return mat


_ladders = _LadderCache()


def evolve(program: MpqcProgram) -> QuantumState:
    """Apply all blocks to |0...0>.

    Uses a dense per-layer unitary (kron of per-qubit 2x2s, then the
    cached ladder matrix) for N <= 12; falls back to gate-by-gate
    application above that.
    """
    n = program.num_qubits
    if n > 12:
        state = zero_state(n)
        for op in gate_ops(program):
            state = apply_gate(state, op)
        return state

    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    for l, layer in enumerate(program.ansatz.layers):
        block = np.eye(1, dtype=complex)
        for j in range(n):
            u = np.eye(2, dtype=complex)
            for k in APPLICATION_ORDER:
                if k in layer.slots:
                    # later factors multiply from the left
                    u = _slot_matrix(SLOT_KINDS[k], program.angles[l, j, k]) @ u
            block = np.kron(block, u)  # qubit 1 = most significant factor
        psi = block @ psi
        if layer.entangle and program.entanglement.pairs:
            psi = _ladders.get(program.entanglement, n) @ psi
    norm = np.linalg.norm(psi)
    return QuantumState(n, psi / norm)


def output_distribution(program: MpqcProgram) -> DiscreteDistribution:
    """Born distribution of the evolved state."""
    return probabilities(evolve(program))


def shifted_program(program: MpqcProgram, flat_index: int, direction: int) -> MpqcProgram:
    """Copy with one active angle shifted by +-pi/2."""
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    indices = program.active_indices()
    if not 0 <= flat_index < len(indices):
        raise IndexError(f"flat_index {flat_index} out of range")
    angles = program.angles.copy()
    angles[indices[flat_index]] += direction * SHIFT
    return MpqcProgram(program.num_qubits, angles, program.entanglement, program.ansatz)


def prob_gradient(program: MpqcProgram, flat_index: int) -> np.ndarray:
    """Parameter-shift gradient of the output distribution.

    Exact: (p(theta+) - p(theta-)) / 2 from two evolutions; entries sum
    to zero by probability conservation.
    """
    plus = output_distribution(shifted_program(program, flat_index, +1))
    minus = output_distribution(shifted_program(program, flat_index, -1))
    return (plus.mass - minus.mass) / 2


def shifted_distributions(
    program: MpqcProgram, flat_index: int
) -> tuple[DiscreteDistribution, DiscreteDistribution]:
    """Output distributions at theta+ and theta- for one parameter."""
    return (
        output_distribution(shifted_program(program, flat_index, +1)),
        output_distribution(shifted_program(program, flat_index, -1)),
    )


def shift_distribution_pairs(program: MpqcProgram) -> np.ndarray:
    """Born distributions at every theta_i +- pi/2 in one pass.

    Returns shape (num_parameters, 2, 2^N) with [:, 0] the +pi/2 shift.
    Equivalent to evolving 2P shifted programs, but reuses prefix states,
    suffix operators, and partial kron products so each shifted
    evaluation only rebuilds one qubit's rotation chain. Exact match
    with shifted_distributions to floating-point roundoff.
    """
    n = program.num_qubits
    if n > 12:
        raise ValueError("batched shifts use dense layer matrices (N <= 12)")
    dim = 2**n
    layers = program.ansatz.layers
    num_layers = len(layers)

    # per-(layer, qubit) active slot matrices in application order
    chains = [
        [
            [
                (k, _slot_matrix(SLOT_KINDS[k], program.angles[l, j, k]))
                for k in APPLICATION_ORDER
                if k in layers[l].slots
            ]
            for j in range(n)
        ]
        for l in range(num_layers)
    ]

    def chain_product(mats) -> np.ndarray:
        u = np.eye(2, dtype=complex)
        for _, m in mats:
            u = m @ u
        return u

    qmats = [[chain_product(chains[l][j]) for j in range(n)] for l in range(num_layers)]

    # partial krons around each qubit: left of j and right of j
    lefts, rights = [], []
    for l in range(num_layers):
        left = [np.eye(1, dtype=complex)]
        for j in range(n - 1):
            left.append(np.kron(left[-1], qmats[l][j]))
        right = [np.eye(1, dtype=complex)] * n
        acc = np.eye(1, dtype=complex)
        for j in range(n - 1, -1, -1):
            right[j] = acc
            acc = np.kron(qmats[l][j], acc)
        lefts.append(left)
        rights.append(right)

    ladder = (
        _ladders.get(program.entanglement, n) if program.entanglement.pairs else None
    )

    def step(l: int, block: np.ndarray) -> np.ndarray:
        return ladder @ block if (layers[l].entangle and ladder is not None) else block

    prefix = [np.zeros(dim, dtype=complex)]
    prefix[0][0] = 1.0
    for l in range(num_layers):
        block = np.kron(lefts[l][n - 1], qmats[l][n - 1])
        vec = block @ prefix[-1]
        if layers[l].entangle and ladder is not None:
            vec = ladder @ vec
        prefix.append(vec)

    suffix = [None] * (num_layers + 1)
    suffix[num_layers] = np.eye(dim, dtype=complex)
    for l in range(num_layers - 1, -1, -1):
        block = np.kron(lefts[l][n - 1], qmats[l][n - 1])
        suffix[l] = suffix[l + 1] @ step(l, block)

    out = np.empty((program.num_parameters, 2, dim))
    for idx, (l, j, k) in enumerate(program.active_indices()):
        for s, direction in enumerate((+1, -1)):
            angle = program.angles[l, j, k] + direction * SHIFT
            mats = [
                (_slot_matrix(SLOT_KINDS[k], angle) if slot == k else m)
                for slot, m in chains[l][j]
            ]
            u = np.eye(2, dtype=complex)
            for m in mats:
                u = m @ u
            block = np.kron(lefts[l][j], np.kron(u, rights[l][j]))
            vec = block @ prefix[l]
            if layers[l].entangle and ladder is not None:
                vec = ladder @ vec
            vec = suffix[l + 1] @ vec
            p = np.abs(vec) ** 2
            out[idx, s] = p / p.sum()
    return out


def to_record(program: MpqcProgram, seed: int | None = None) -> dict:
    """Flat JSON-compatible serialization; round-trips bit-exactly."""
    return {
        "num_qubits": program.num_qubits,
        "num_layers": program.num_layers,
        "variant": program.ansatz.variant,
        "layer_slots": [list(layer.slots) for layer in program.ansatz.layers],
        "layer_entangle": [layer.entangle for layer in program.ansatz.layers],
        "angles": program.angles.reshape(-1).tolist(),
        "entanglement": [list(pair) for pair in program.entanglement.pairs],
        "seed": seed,
    }


def from_record(record: dict) -> MpqcProgram:
    ansatz = AnsatzSpec(
        record["variant"],
        tuple(
            LayerSpec(tuple(slots), entangle)
            for slots, entangle in zip(record["layer_slots"], record["layer_entangle"])
        ),
    )
    n = record["num_qubits"]
    angles = np.array(record["angles"]).reshape(record["num_layers"], n, NUM_SLOTS)
    pattern = EntanglementPattern(tuple(tuple(p) for p in record["entanglement"]))
    return MpqcProgram(n, angles, pattern, ansatz)
