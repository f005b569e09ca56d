"""State-vector simulator: gate conventions, application, sampling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qborn.quantum import (
    CapacityError,
    GateKind,
    GateOp,
    QuantumState,
    apply_gate,
    basis_state,
    equal_up_to_global_phase,
    expand_gate,
    full_unitary,
    global_phase_residual,
    make_gate,
    probabilities,
    sample,
    zero_state,
)

RT2 = 1.0 / np.sqrt(2)


class TestGateMatrices:
    def test_rx_convention(self):
        # +i sin off-diagonals
        g = make_gate(GateKind.RX, np.pi / 3)
        c, s = np.cos(np.pi / 6), np.sin(np.pi / 6)
        assert np.allclose(g.entries, [[c, 1j * s], [1j * s, c]])

    def test_rz_convention(self):
        g = make_gate(GateKind.RZ, 0.7)
        assert np.allclose(g.entries, np.diag([np.exp(0.35j), np.exp(-0.35j)]))

    def test_ry_convention(self):
        g = make_gate(GateKind.RY, 0.9)
        c, s = np.cos(0.45), np.sin(0.45)
        assert np.allclose(g.entries, [[c, s], [-s, c]])

    def test_rphi(self):
        g = make_gate(GateKind.RPHI, 0.3)
        assert np.allclose(g.entries, np.diag([1, np.exp(0.3j)]))

    def test_t_is_rphi_quarter(self):
        assert np.allclose(
            make_gate(GateKind.T).entries, make_gate(GateKind.RPHI, np.pi / 4).entries
        )

    def test_z_is_rphi_pi(self):
        assert np.allclose(
            make_gate(GateKind.Z).entries, make_gate(GateKind.RPHI, np.pi).entries
        )

    def test_cnot_cz(self):
        assert np.allclose(
            make_gate(GateKind.CNOT).entries,
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
        )
        assert np.allclose(make_gate(GateKind.CZ).entries, np.diag([1, 1, 1, -1]))

    def test_h_from_rotations(self):
        # H equals R_x(pi/2) R_z(pi/2) R_x(pi/2) up to global phase
        rx = make_gate(GateKind.RX, np.pi / 2).entries
        rz = make_gate(GateKind.RZ, np.pi / 2).entries
        assert equal_up_to_global_phase(rx @ rz @ rx, make_gate(GateKind.H).entries)

    def test_angle_validation(self):
        with pytest.raises(ValueError):
            make_gate(GateKind.RX)
        with pytest.raises(ValueError):
            make_gate(GateKind.H, 0.5)

    @pytest.mark.parametrize("kind", list(GateKind))
    def test_unitarity(self, kind):
        angle = 0.37 if kind.value.startswith("R") else None
        g = make_gate(kind, angle)
        dim = 2**g.arity
        assert np.abs(g.entries.conj().T @ g.entries - np.eye(dim)).max() < 1e-12


class TestStates:
    def test_zero_state(self):
        s = zero_state(3)
        assert s.amplitudes[0] == 1 and np.abs(s.amplitudes[1:]).max() == 0

    def test_basis_state_big_endian(self):
        # qubit 1 is the most significant bit
        s = basis_state(2, "10")
        assert s.amplitudes[2] == 1

    def test_invalid_norm_rejected(self):
        with pytest.raises(ValueError):
            QuantumState(1, np.array([1.0, 1.0], dtype=complex))

    def test_bad_bitstring(self):
        with pytest.raises(ValueError):
            basis_state(2, "102")


class TestApplyGate:
    def test_h_on_first_qubit_big_endian(self):
        s = apply_gate(zero_state(2), GateOp(make_gate(GateKind.H), (1,)))
        assert np.allclose(s.amplitudes, [RT2, 0, RT2, 0])

    def test_h_on_second_qubit(self):
        s = apply_gate(zero_state(2), GateOp(make_gate(GateKind.H), (2,)))
        assert np.allclose(s.amplitudes, [RT2, RT2, 0, 0])

    def test_cnot_control_is_first_target(self):
        s = basis_state(2, "10")
        s = apply_gate(s, GateOp(make_gate(GateKind.CNOT), (1, 2)))
        assert np.allclose(s.amplitudes, basis_state(2, "11").amplitudes)
        # reversed orientation: control on qubit 2 leaves |10> alone
        s = basis_state(2, "10")
        s = apply_gate(s, GateOp(make_gate(GateKind.CNOT), (2, 1)))
        assert np.allclose(s.amplitudes, basis_state(2, "10").amplitudes)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            apply_gate(zero_state(2), GateOp(make_gate(GateKind.H), (3,)))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000))
    def test_random_circuit_matches_full_unitary_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 5))
        ops = []
        for _ in range(int(rng.integers(1, 12))):
            if n >= 2 and rng.random() < 0.3:
                kind = GateKind.CNOT if rng.random() < 0.5 else GateKind.CZ
                targets = tuple(rng.choice(np.arange(1, n + 1), 2, replace=False).tolist())
                ops.append(GateOp(make_gate(kind), targets))
            else:
                kind = rng.choice([GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.RPHI, GateKind.H])
                angle = float(rng.uniform(0, 2 * np.pi)) if kind.value.startswith("R") else None
                ops.append(GateOp(make_gate(GateKind(kind), angle), (int(rng.integers(1, n + 1)),)))
        state = zero_state(n)
        for op in ops:
            state = apply_gate(state, op)
        expected = full_unitary(ops, n) @ zero_state(n).amplitudes
        assert np.abs(state.amplitudes - expected).max() < 1e-10
        # norm preserved (checked by the QuantumState invariant too)
        assert abs(np.sum(np.abs(state.amplitudes) ** 2) - 1) < 1e-10

    def test_expand_gate_capacity(self):
        with pytest.raises(CapacityError):
            expand_gate(GateOp(make_gate(GateKind.H), (1,)), 13)


class TestMeasurement:
    def test_probabilities_born_rule(self):
        s = apply_gate(zero_state(1), GateOp(make_gate(GateKind.H), (1,)))
        p = probabilities(s)
        assert np.allclose(p.mass, [0.5, 0.5])

    def test_sampling_concentration(self):
        s = apply_gate(zero_state(2), GateOp(make_gate(GateKind.H), (1,)))
        rng = np.random.default_rng(0)
        draws = sample(s, 100_000, rng)
        freq = sum(1 for b in draws if b == "00") / len(draws)
        assert abs(freq - 0.5) < 0.01
        assert all(b in ("00", "10") for b in draws)

    def test_sampling_deterministic_given_rng(self):
        s = apply_gate(zero_state(2), GateOp(make_gate(GateKind.H), (2,)))
        a = sample(s, 50, np.random.default_rng(7))
        b = sample(s, 50, np.random.default_rng(7))
        assert a == b


class TestGlobalPhase:
    def test_equal_up_to_phase(self):
        u = make_gate(GateKind.H).entries
        assert equal_up_to_global_phase(1j * u, u)
        assert not equal_up_to_global_phase(u @ make_gate(GateKind.Z).entries, u)

    def test_residual_zero_for_phased_copy(self):
        u = make_gate(GateKind.T).entries
        lam, res = global_phase_residual(np.exp(0.4j) * u, u)
        assert res < 1e-12 and abs(lam - np.exp(0.4j)) < 1e-12
