import numpy as np
import pytest

from qslstm.core_math import finite_diff_grad, make_prng
from qslstm.quantum_sim import (
    ANALYTIC,
    ExpectationMode,
    Statevector,
    VqcParams,
    apply_1q_gate,
    apply_cnot,
    encode_input,
    entangling_pairs,
    hadamard,
    init_vqc_params,
    parameter_shift_grad,
    pauli_z_expectations_analytic,
    rot_matrix,
    ry_matrix,
    rz_matrix,
    sample_measurement,
    variational_layer,
    vqc_forward,
    vqc_forward_batch,
    zero_state,
)

# --- independent oracles (qubit 0 = most significant bit) -------------------


def kron_1q(g, q, n):
    m = np.eye(1, dtype=complex)
    for i in range(n):
        m = np.kron(m, g if i == q else np.eye(2))
    return m


def cnot_matrix(n, control, target):
    dim = 2 ** n
    m = np.zeros((dim, dim))
    for idx in range(dim):
        if (idx >> (n - 1 - control)) & 1:
            out = idx ^ (1 << (n - 1 - target))
        else:
            out = idx
        m[out, idx] = 1.0
    return m


def random_state(n, prng):
    amps = prng.normal(size=2 ** n) + 1j * prng.normal(size=2 ** n)
    return Statevector(n, amps / np.linalg.norm(amps))


def haar_unitary(prng):
    z = prng.normal(size=(2, 2)) + 1j * prng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# --- gate matrices -----------------------------------------------------------


class TestGateMatrices:
    def test_ry_convention(self):
        t = 0.8
        expected = np.array([[np.cos(t / 2), -np.sin(t / 2)],
                             [np.sin(t / 2), np.cos(t / 2)]])
        assert np.allclose(ry_matrix(t), expected, atol=1e-15)

    def test_rz_convention(self):
        t = -1.3
        expected = np.diag([np.exp(-1j * t / 2), np.exp(1j * t / 2)])
        assert np.allclose(rz_matrix(t), expected, atol=1e-15)

    def test_rot_composition_order(self):
        a, b, g = 0.3, -0.9, 2.1
        assert np.allclose(rot_matrix(a, b, g),
                           rz_matrix(g) @ ry_matrix(b) @ rz_matrix(a), atol=1e-15)

    def test_all_unitary(self):
        for m in (hadamard(), ry_matrix(0.5), rz_matrix(1.1), rot_matrix(1, 2, 3)):
            assert np.allclose(m @ m.conj().T, np.eye(2), atol=1e-14)


class TestApply1qGate:
    def test_hadamard_on_zero(self):
        out = apply_1q_gate(zero_state(1), hadamard(), 0)
        assert np.allclose(out.amps, [1 / np.sqrt(2), 1 / np.sqrt(2)], atol=1e-15)

    def test_identity_bit_exact(self):
        prng = make_prng(1)
        s = random_state(3, prng)
        out = apply_1q_gate(s, np.eye(2, dtype=complex), 1)
        assert np.array_equal(out.amps, s.amps)

    @pytest.mark.parametrize("q", [0, 1, 2])
    def test_kronecker_oracle_3q(self, q):
        prng = make_prng(10 + q)
        s = random_state(3, prng)
        g = haar_unitary(prng)
        out = apply_1q_gate(s, g, q)
        expected = kron_1q(g, q, 3) @ s.amps
        assert np.max(np.abs(out.amps - expected)) <= 1e-12

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError):
            apply_1q_gate(zero_state(1), np.array([[1.0, 0.0], [0.0, 2.0]]), 0)

    def test_bad_index_rejected(self):
        with pytest.raises(ValueError):
            apply_1q_gate(zero_state(2), hadamard(), 2)


class TestApplyCnot:
    def test_control_one_flips_target(self):
        # |10>: qubit 0 (MSB) = 1 as control -> |11>
        s = Statevector(2, np.array([0, 0, 1, 0], dtype=complex))
        out = apply_cnot(s, 0, 1)
        assert np.allclose(out.amps, [0, 0, 0, 1], atol=1e-15)

    def test_control_zero_unchanged(self):
        s = Statevector(2, np.array([0, 1, 0, 0], dtype=complex))  # |01>
        out = apply_cnot(s, 0, 1)
        assert np.array_equal(out.amps, s.amps)

    def test_permutation_oracle_4q(self):
        prng = make_prng(21)
        s = random_state(4, prng)
        out = apply_cnot(s, 2, 0)
        expected = cnot_matrix(4, 2, 0) @ s.amps
        assert np.max(np.abs(out.amps - expected)) <= 1e-12

    def test_equal_indices_rejected(self):
        with pytest.raises(ValueError):
            apply_cnot(zero_state(2), 1, 1)


class TestEncodeInput:
    def test_zero_input_uniform_superposition(self):
        out = encode_input(zero_state(3), np.zeros(3))
        assert np.allclose(out.amps, np.full(8, 1 / np.sqrt(8)), atol=1e-14)
        assert np.allclose(pauli_z_expectations_analytic(out), np.zeros(3), atol=1e-14)

    def test_unit_input_z_expectation(self):
        out = encode_input(zero_state(2), np.array([1.0, 0.0]))
        z = pauli_z_expectations_analytic(out)
        assert z[0] == pytest.approx(-1 / np.sqrt(2), abs=1e-12)
        assert z[1] == pytest.approx(0.0, abs=1e-12)

    def test_matches_kronecker_oracle(self):
        x = np.array([0.7, -1.9, 0.2])
        out = encode_input(zero_state(3), x)
        amps = zero_state(3).amps
        for q in range(3):
            gate = rz_matrix(np.arctan(x[q] ** 2)) @ ry_matrix(np.arctan(x[q])) @ hadamard()
            amps = kron_1q(gate, q, 3) @ amps
        assert np.max(np.abs(out.amps - amps)) <= 1e-12

    def test_norm_preserved(self):
        out = encode_input(zero_state(4), np.array([3.0, -20.0, 0.5, 1e6]))
        assert abs(np.sum(np.abs(out.amps) ** 2) - 1.0) <= 1e-10

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            encode_input(zero_state(2), np.zeros(3))


class TestVariationalLayer:
    def test_ring_structure_4q(self):
        assert entangling_pairs(4) == [(0, 1), (1, 2), (2, 3), (3, 0),
                                       (0, 2), (1, 3), (2, 0), (3, 1)]

    def test_ring_structure_2q(self):
        # stride-2 ring on 2 qubits would be self-loops: skipped
        assert entangling_pairs(2) == [(0, 1), (1, 0)]

    def test_zero_angles_on_zero_state(self):
        out = variational_layer(zero_state(4), np.zeros((4, 3)))
        phase = out.amps[0] / abs(out.amps[0])
        assert np.allclose(out.amps / phase, zero_state(4).amps, atol=1e-14)

    def test_two_qubit_matrix_oracle(self):
        prng = make_prng(33)
        s = random_state(2, prng)
        angles = prng.uniform(-np.pi, np.pi, size=(2, 3))
        out = variational_layer(s, angles)
        m = cnot_matrix(2, 1, 0) @ cnot_matrix(2, 0, 1)
        for q in range(2):
            m = kron_1q(rot_matrix(*angles[q]), q, 2) @ m
        assert np.max(np.abs(out.amps - m @ s.amps)) <= 1e-12

    def test_unitarity_random_angles(self):
        prng = make_prng(34)
        out = variational_layer(random_state(4, prng),
                                prng.uniform(-np.pi, np.pi, (4, 3)))
        assert abs(np.sum(np.abs(out.amps) ** 2) - 1.0) <= 1e-10


class TestExpectations:
    def test_all_zeros_state(self):
        assert np.array_equal(pauli_z_expectations_analytic(zero_state(4)), np.ones(4))

    def test_plus_state(self):
        s = apply_1q_gate(zero_state(1), hadamard(), 0)
        assert pauli_z_expectations_analytic(s)[0] == pytest.approx(0.0, abs=1e-15)

    def test_diagonal_matrix_oracle(self):
        prng = make_prng(41)
        s = random_state(3, prng)
        z = pauli_z_expectations_analytic(s)
        pauli_z = np.diag([1.0, -1.0])
        for q in range(3):
            zq = kron_1q(pauli_z, q, 3)
            expected = np.real(s.amps.conj() @ (zq @ s.amps))
            assert abs(z[q] - expected) <= 1e-12

    def test_unnormalized_rejected(self):
        s = Statevector(1, np.array([1.0, 0.0]) * 2.0 ** -0.25)
        # construction is allowed; expectation rejects the bad norm
        with pytest.raises(ValueError):
            pauli_z_expectations_analytic(s)


class TestSampleMeasurement:
    def test_basis_state_deterministic(self):
        out = sample_measurement(zero_state(2), 7, make_prng(1))
        assert np.array_equal(out, np.ones(2))

    def test_single_shot_plus_state(self):
        s = apply_1q_gate(zero_state(1), hadamard(), 0)
        draws = {sample_measurement(s, 1, make_prng(seed))[0] for seed in range(30)}
        assert draws == {-1.0, 1.0}

    def test_shot_mean_concentrates(self):
        s = apply_1q_gate(zero_state(1), hadamard(), 0)
        out = sample_measurement(s, 10_000, make_prng(5))
        assert abs(out[0]) < 0.05


class TestVqcForward:
    def test_zero_everything(self):
        p = VqcParams(np.zeros((1, 4, 3)))
        out = vqc_forward(np.zeros(4), p, ANALYTIC)
        assert np.allclose(out, np.zeros(4), atol=1e-14)

    def test_output_range(self):
        prng = make_prng(50)
        for _ in range(10):
            p = init_vqc_params(4, 2, prng)
            out = vqc_forward(prng.normal(size=4), p, ANALYTIC)
            assert np.all(np.abs(out) <= 1.0 + 1e-12)

    def test_sampled_converges_to_analytic(self):
        prng = make_prng(51)
        p = init_vqc_params(3, 1, prng)
        x = prng.normal(size=3)
        exact = vqc_forward(x, p, ANALYTIC)
        approx = vqc_forward(x, p, ExpectationMode.sampled(100_000), make_prng(52))
        assert np.max(np.abs(exact - approx)) <= 0.02

    def test_matches_explicit_gate_sequence(self):
        # pin the batched engine to the public single-gate operations
        prng = make_prng(53)
        p = init_vqc_params(4, 2, prng)
        x = prng.normal(size=4)
        s = encode_input(zero_state(4), x)
        for layer in range(p.depth):
            s = variational_layer(s, p.angles[layer])
        expected = pauli_z_expectations_analytic(s)
        assert np.allclose(vqc_forward(x, p, ANALYTIC), expected, atol=1e-12)

    def test_batch_matches_scalar_path(self):
        prng = make_prng(54)
        xs = prng.normal(size=(6, 3))
        angle_sets = np.stack([init_vqc_params(3, 1, prng).angles for _ in range(6)])
        batch = vqc_forward_batch(xs, angle_sets, ANALYTIC)
        for i in range(6):
            one = vqc_forward(xs[i], VqcParams(angle_sets[i]), ANALYTIC)
            assert np.allclose(batch[i], one, atol=1e-13)


class TestParameterShiftGrad:
    def test_cosine_derivative_endpoints(self):
        # single qubit circuit reduced through the public pieces: encode x=0
        # gives H|0>; instead pin the textbook case via direct angle sweep on
        # the full circuit's first beta angle.
        prng = make_prng(60)
        p = init_vqc_params(2, 1, prng)
        x = prng.normal(size=2)
        d_out = np.array([1.0, 0.0])
        g_ang, _ = parameter_shift_grad(x, p, ANALYTIC, d_out)

        def f(theta):
            ang = p.angles.copy()
            ang[0, 0, 1] = theta
            return vqc_forward(x, VqcParams(ang), ANALYTIC)[0]

        h = 1e-6
        fd = (f(p.angles[0, 0, 1] + h) - f(p.angles[0, 0, 1] - h)) / (2 * h)
        assert g_ang[0, 0, 1] == pytest.approx(fd, abs=1e-8)

    def test_zero_d_out(self):
        prng = make_prng(61)
        p = init_vqc_params(3, 1, prng)
        g_ang, g_x = parameter_shift_grad(prng.normal(size=3), p, ANALYTIC, np.zeros(3))
        assert np.all(g_ang == 0) and np.all(g_x == 0)

    def test_angle_grads_match_finite_differences(self):
        prng = make_prng(62)
        p = init_vqc_params(4, 1, prng)
        x = prng.normal(size=4)
        d_out = prng.normal(size=4)
        g_ang, g_x = parameter_shift_grad(x, p, ANALYTIC, d_out)

        flat = p.angles.ravel().copy()

        def loss_angles(v):
            return float(vqc_forward(x, VqcParams(v.reshape(p.angles.shape)), ANALYTIC) @ d_out)

        fd = finite_diff_grad(loss_angles, flat, 1e-5)
        assert np.max(np.abs(g_ang.ravel() - fd)) <= 1e-6

        def loss_x(v):
            return float(vqc_forward(v, p, ANALYTIC) @ d_out)

        fd_x = finite_diff_grad(loss_x, x.copy(), 1e-5)
        assert np.max(np.abs(g_x - fd_x)) <= 1e-6


class TestModeAndParams:
    def test_mode_labels(self):
        assert ANALYTIC.is_analytic and ANALYTIC.label() == "analytic"
        assert ExpectationMode.sampled(100).label() == "100-shot"

    def test_bad_shot_count_rejected(self):
        with pytest.raises(ValueError):
            ExpectationMode.sampled(0)

    def test_vqc_params_shape_rejected(self):
        with pytest.raises(ValueError):
            VqcParams(np.zeros((1, 4, 2)))

    def test_init_vqc_params_range(self):
        p = init_vqc_params(4, 3, make_prng(70))
        assert p.angles.shape == (3, 4, 3)
        assert np.all(np.abs(p.angles) <= np.pi)

    def test_statevector_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            Statevector(2, np.array([1.0, 0.0]))

    def test_norm_preserved_through_long_sequence(self):
        prng = make_prng(71)
        s = zero_state(4)
        s = encode_input(s, prng.normal(size=4))
        for _ in range(5):
            s = variational_layer(s, prng.uniform(-np.pi, np.pi, (4, 3)))
        assert abs(np.sum(np.abs(s.amps) ** 2) - 1.0) <= 1e-10
