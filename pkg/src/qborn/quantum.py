"""Dense complex state-vector simulation.

Gate construction, gate application, measurement probabilities,
sampling, and a brute-force full-unitary oracle.

Conventions (fixed globally):
  * Qubits are 1-based and big-endian: qubit 1 is the most significant
    bit of the basis-state index.
  * Rotation matrices follow the e^{+i theta sigma / 2} sign, i.e.
    R_X has +i*sin off-diagonals and R_Z = diag(e^{i t/2}, e^{-i t/2}).
  * Randomness always flows through an explicit numpy Generator
    (PCG64); no hidden global RNG state is touched.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-10
UNITARY_TOL = 1e-10
GLOBAL_PHASE_TOL = 1e-9
MAX_DENSE_QUBITS = 12


class CapacityError(ValueError):
    """Raised when a dense computation exceeds the qubit cap."""


class GateKind(enum.Enum):
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    RPHI = "RPHI"
    H = "H"
    Z = "Z"
    T = "T"
    CNOT = "CNOT"
    CZ = "CZ"


_ROTATION_KINDS = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.RPHI})
_TWO_QUBIT_KINDS = frozenset({GateKind.CNOT, GateKind.CZ})


@dataclass(frozen=True)
class GateMatrix:
    """A 1- or 2-qubit unitary."""

    arity: int
    entries: np.ndarray

    def __post_init__(self):
        dim = 2**self.arity
        if self.entries.shape != (dim, dim):
            raise ValueError(f"expected {dim}x{dim} matrix, got {self.entries.shape}")
        residual = np.abs(self.entries.conj().T @ self.entries - np.eye(dim)).max()
        if residual >= UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (residual {residual:.3e})")
        self.entries.setflags(write=False)


@dataclass(frozen=True)
class GateOp:
    """A gate bound to target qubits. For 2-qubit gates targets[0] is the control."""

    gate: GateMatrix
    targets: tuple[int, ...]

    def __post_init__(self):
        targets = tuple(self.targets)
        object.__setattr__(self, "targets", targets)
        if len(targets) != self.gate.arity:
            raise ValueError(f"gate arity {self.gate.arity} but {len(targets)} targets")
        if len(set(targets)) != len(targets):
            raise ValueError("target qubits must be distinct")
        if any(t < 1 for t in targets):
            raise IndexError("qubit indices are 1-based")


@dataclass(frozen=True)
class QuantumState:
    """Normalized amplitude vector over 2^N basis states, big-endian indexed."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("need at least one qubit")
        if self.amplitudes.shape != (2**self.num_qubits,):
            raise ValueError("amplitude vector length must be 2^num_qubits")
        norm = np.sum(np.abs(self.amplitudes) ** 2)
        if abs(norm - 1.0) >= NORM_TOL:
            raise ValueError(f"state not normalized (sum |a|^2 = {norm!r})")
        self.amplitudes.setflags(write=False)


def zero_state(num_qubits: int) -> QuantumState:
    """|0...0> on the given number of qubits."""
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[0] = 1.0
    return QuantumState(num_qubits, amps)


def basis_state(num_qubits: int, bits: str) -> QuantumState:
    """Computational basis state |bits>, leftmost character = qubit 1."""
    if len(bits) != num_qubits or set(bits) - {"0", "1"}:
        raise ValueError(f"bad bitstring {bits!r} for {num_qubits} qubits")
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[int(bits, 2)] = 1.0
    return QuantumState(num_qubits, amps)


def make_gate(kind: GateKind, angle: float | None = None) -> GateMatrix:
    """Build a gate matrix with the fixed sign/phase conventions above."""
    if kind in _ROTATION_KINDS:
        if angle is None:
            raise ValueError(f"{kind.value} requires an angle")
    elif angle is not None:
        raise ValueError(f"{kind.value} takes no angle")

    if kind is GateKind.RX:
        c, s = np.cos(angle / 2), np.sin(angle / 2)
        m = np.array([[c, 1j * s], [1j * s, c]])
    elif kind is GateKind.RY:
        c, s = np.cos(angle / 2), np.sin(angle / 2)
        m = np.array([[c, s], [-s, c]], dtype=complex)
    elif kind is GateKind.RZ:
        m = np.array([[np.exp(1j * angle / 2), 0], [0, np.exp(-1j * angle / 2)]])
    elif kind is GateKind.RPHI:
        m = np.array([[1, 0], [0, np.exp(1j * angle)]])
    elif kind is GateKind.H:
        m = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    elif kind is GateKind.Z:
        m = np.array([[1, 0], [0, -1]], dtype=complex)
    elif kind is GateKind.T:
        m = np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]])
    elif kind is GateKind.CNOT:
        m = np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
        )
    elif kind is GateKind.CZ:
        m = np.diag([1, 1, 1, -1]).astype(complex)
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(f"unknown gate kind {kind}")
    arity = 2 if kind in _TWO_QUBIT_KINDS else 1
    return GateMatrix(arity, m)


def apply_gate(state: QuantumState, op: GateOp) -> QuantumState:
    """Apply (U_op tensor I_rest) to the state."""
    n = state.num_qubits
    if any(t > n for t in op.targets):
        raise IndexError(f"targets {op.targets} out of range for {n} qubits")
    axes = [t - 1 for t in op.targets]  # big-endian: qubit q is axis q-1
    psi = state.amplitudes.reshape([2] * n)
    psi = np.moveaxis(psi, axes, range(len(axes)))
    k = len(axes)
    psi = op.gate.entries @ psi.reshape(2**k, -1)
    psi = np.moveaxis(psi.reshape([2] * n), range(k), axes)
    return QuantumState(n, np.ascontiguousarray(psi.reshape(-1)))


def expand_gate(op: GateOp, num_qubits: int) -> np.ndarray:
    """Dense 2^N x 2^N matrix of a gate extended by identity."""
    if num_qubits > MAX_DENSE_QUBITS:
        raise CapacityError(f"dense expansion capped at {MAX_DENSE_QUBITS} qubits")
    if any(t > num_qubits for t in op.targets):
        raise IndexError(f"targets {op.targets} out of range for {num_qubits} qubits")
    dim = 2**num_qubits
    axes = [t - 1 for t in op.targets]
    k = len(axes)
    # Apply the gate to each identity column; cheap at the N <= 12 cap.
    mat = np.eye(dim, dtype=complex).reshape([2] * num_qubits + [dim])
    mat = np.moveaxis(mat, axes, range(k))
    mat = op.gate.entries @ mat.reshape(2**k, -1)
    mat = np.moveaxis(mat.reshape([2] * num_qubits + [dim]), range(k), axes)
    return mat.reshape(dim, dim)


def full_unitary(ops, num_qubits: int) -> np.ndarray:
    """Product of expanded gate matrices in application order (oracle path)."""
    if num_qubits > MAX_DENSE_QUBITS:
        raise CapacityError(f"full_unitary capped at {MAX_DENSE_QUBITS} qubits")
    total = np.eye(2**num_qubits, dtype=complex)
    for op in ops:
        total = expand_gate(op, num_qubits) @ total
    return total


def probabilities(state: QuantumState) -> "DiscreteDistribution":
    """Born-rule distribution p(x) = |amplitude_x|^2."""
    from qborn.distributions import DiscreteDistribution

    return DiscreteDistribution(state.num_qubits, np.abs(state.amplitudes) ** 2)


def sample(state: QuantumState, count: int, rng: np.random.Generator) -> list[str]:
    """Draw i.i.d. bitstrings from the Born distribution."""
    if count < 1:
        raise ValueError("count must be >= 1")
    probs = np.abs(state.amplitudes) ** 2
    probs = probs / probs.sum()
    indices = rng.choice(len(probs), size=count, p=probs)
    n = state.num_qubits
    return [format(i, f"0{n}b") for i in indices]


def equal_up_to_global_phase(
    U: np.ndarray, V: np.ndarray, tol: float = GLOBAL_PHASE_TOL
) -> bool:
    """True iff U = lambda * V for some unit-modulus lambda."""
    if U.shape != V.shape:
        raise ValueError("shape mismatch")
    flat = np.abs(V).argmax()
    pivot = V.reshape(-1)[flat]
    if abs(pivot) < tol:
        return bool(np.abs(U).max() < tol)
    lam = U.reshape(-1)[flat] / pivot
    mag = abs(lam)
    if mag < tol:
        return False
    lam /= mag
    return bool(np.abs(U - lam * V).max() < tol)


def global_phase_residual(U: np.ndarray, V: np.ndarray) -> tuple[complex, float]:
    """Best unit-modulus lambda (from V's largest entry) and max |U - lambda V|."""
    if U.shape != V.shape:
        raise ValueError("shape mismatch")
    flat = np.abs(V).argmax()
    pivot = V.reshape(-1)[flat]
    if abs(pivot) == 0:
        return 1.0 + 0j, float(np.abs(U).max())
    lam = U.reshape(-1)[flat] / pivot
    if abs(lam) == 0:
        lam = 1.0 + 0j
    lam /= abs(lam)
    return complex(lam), float(np.abs(U - lam * V).max())
