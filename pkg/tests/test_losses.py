"""Training objectives: kernel MMD, adversarial losses, coding-rate reduction."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qborn.bas import BasSpec, bas_distribution
from qborn.distributions import DiscreteDistribution
from qborn.losses import (
    FeatureMapHandle,
    KernelSpec,
    McrConfig,
    bits_to_vector,
    discriminator_loss,
    gan_generator_gradient,
    gan_generator_gradient_exact,
    gan_losses,
    gaussian_kernel,
    generator_loss,
    identity_features,
    mcr_delta_r,
    mcr_delta_r_probability,
    mcr_gradient_kernel,
    mcr_gradient_nn,
    mmd_gradient,
    mmd_gradient_exact,
    mmd_loss,
    mmd_loss_exact,
    mmd_loss_sampled,
    support_gram,
    support_matrix,
)
from qborn.mpqc import AnsatzSpec, output_distribution, random_program


def _prog(n=3, seed=0, layers=2):
    rng = np.random.default_rng(seed)
    return random_program(n, AnsatzSpec.full_block(layers), rng)


def _fd(loss, prog, i, h=1e-5):
    flat = prog.flat_parameters()
    up, dn = flat.copy(), flat.copy()
    up[i] += h
    dn[i] -= h
    return (loss(prog.with_flat_parameters(up)) - loss(prog.with_flat_parameters(dn))) / (2 * h)


class TestGaussianKernel:
    def test_self_similarity_is_one(self):
        x = bits_to_vector("1011")
        assert gaussian_kernel(x, x) == pytest.approx(1.0)

    def test_hamming_one_single_bandwidth(self):
        spec = KernelSpec((1.0,))
        v = gaussian_kernel(bits_to_vector("0000"), bits_to_vector("1000"), spec)
        assert v == pytest.approx(math.exp(-0.5))

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            x, y = rng.integers(0, 2, 4).astype(float), rng.integers(0, 2, 4).astype(float)
            assert gaussian_kernel(x, y) == pytest.approx(gaussian_kernel(y, x))

    def test_bandwidth_validation(self):
        with pytest.raises(ValueError):
            KernelSpec(())
        with pytest.raises(ValueError):
            KernelSpec((0.0,))


class TestMmdLoss:
    def test_exact_zero_iff_equal(self):
        p = bas_distribution(BasSpec(2, 2))
        assert mmd_loss_exact(p, p) < 1e-12
        q = DiscreteDistribution.uniform(4)
        assert mmd_loss_exact(p, q) > 1e-4

    def test_one_bit_closed_form(self):
        # K(0,0) - 2 K(0,1) + K(1,1) = 2 (1 - e^{-1/2}) with sigma = 1
        spec = KernelSpec((1.0,))
        p = DiscreteDistribution.point_mass(1, "0")
        q = DiscreteDistribution.point_mass(1, "1")
        assert mmd_loss_exact(p, q, spec) == pytest.approx(2 * (1 - math.exp(-0.5)))

    def test_sampled_identical_lists_vanish(self):
        xs = ["01", "11", "00"]
        assert mmd_loss_sampled(xs, list(xs)) == pytest.approx(0.0, abs=1e-12)

    def test_dispatch_wrapper(self):
        p = DiscreteDistribution.uniform(2)
        assert mmd_loss(p, p) == pytest.approx(0.0, abs=1e-12)
        with pytest.raises(TypeError):
            mmd_loss(p, ["00"])
        with pytest.raises(ValueError):
            mmd_loss([], [])

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10_000))
    def test_exact_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        w1, w2 = rng.random(8) + 1e-9, rng.random(8) + 1e-9
        p = DiscreteDistribution(3, w1 / w1.sum())
        q = DiscreteDistribution(3, w2 / w2.sum())
        assert mmd_loss_exact(p, q) >= -1e-12


class TestMmdGradient:
    def test_matches_finite_difference(self):
        target = bas_distribution(BasSpec(1, 3))
        prog = _prog(seed=3)
        loss = lambda p: mmd_loss_exact(output_distribution(p), target)
        for i in [0, 5, 17]:
            g = mmd_gradient_exact(prog, i, target)
            assert abs(g - _fd(loss, prog, i)) < 1e-6

    def test_sampled_mode_unbiased(self):
        target = bas_distribution(BasSpec(1, 3))
        prog = _prog(seed=4)
        exact = mmd_gradient_exact(prog, 2, target)
        rng = np.random.default_rng(0)
        vals = [
            mmd_gradient(prog, 2, target, mode="sampled", batch=64, rng=rng)
            for _ in range(200)
        ]
        se = np.std(vals) / math.sqrt(len(vals))
        assert abs(np.mean(vals) - exact) < 3 * se + 1e-4

    def test_mode_validation(self):
        with pytest.raises(ValueError):
            mmd_gradient(_prog(), 0, bas_distribution(BasSpec(1, 3)), mode="fuzzy")
        with pytest.raises(ValueError):
            mmd_gradient(_prog(), 0, bas_distribution(BasSpec(1, 3)), mode="sampled")


class TestGanLosses:
    def test_half_scores(self):
        ld, lg = gan_losses([0.5, 0.5], [0.5])
        assert ld == pytest.approx(2 * math.log(2))
        assert lg == pytest.approx(math.log(2))

    def test_confident_discriminator(self):
        assert generator_loss(np.array([1.0])) == pytest.approx(0.0, abs=1e-6)

    def test_clamping_keeps_losses_finite(self):
        assert math.isfinite(discriminator_loss(np.array([0.0]), np.array([1.0])))

    def test_permutation_invariance(self):
        a = discriminator_loss(np.array([0.2, 0.9]), np.array([0.4, 0.1]))
        b = discriminator_loss(np.array([0.9, 0.2]), np.array([0.1, 0.4]))
        assert a == pytest.approx(b)


class TestGanGenerator:
    def test_constant_discriminator_gives_zero_gradient(self):
        prog = _prog(seed=5)
        score = lambda X: np.full(len(X), 0.5)
        for i in [0, 9]:
            assert abs(gan_generator_gradient_exact(prog, i, score)) < 1e-12

    def test_matches_finite_difference(self):
        prog = _prog(seed=6)
        w = np.array([0.7, -0.2, 0.5])
        score = lambda X: 1 / (1 + np.exp(-(X @ w - 0.4)))
        def loss(p):
            X = support_matrix(3)
            return float(-output_distribution(p).mass @ np.log(score(X)))
        for i in [1, 8, 20]:
            g = gan_generator_gradient_exact(prog, i, score)
            assert abs(g - _fd(loss, prog, i)) < 1e-6

    def test_sampled_mode_unbiased(self):
        prog = _prog(seed=7)
        w = np.array([0.3, 0.9, -0.6])
        score = lambda X: 1 / (1 + np.exp(-(X @ w)))
        exact = gan_generator_gradient_exact(prog, 3, score)
        rng = np.random.default_rng(1)
        vals = [
            gan_generator_gradient(prog, 3, score, mode="sampled", batch=64, rng=rng)
            for _ in range(200)
        ]
        se = np.std(vals) / math.sqrt(len(vals))
        assert abs(np.mean(vals) - exact) < 3 * se + 1e-4


class TestMcrDeltaR:
    def test_equal_batches_vanish(self):
        X = np.random.default_rng(2).normal(size=(3, 5))
        assert mcr_delta_r(X, X.copy(), McrConfig(3)) == pytest.approx(0.0, abs=1e-12)

    def test_scalar_closed_form(self):
        val = mcr_delta_r(np.array([[1.0]]), np.array([[0.0]]), McrConfig(1, 1.0))
        assert val == pytest.approx(0.5 * math.log(1.5) - 0.25 * math.log(2))

    def test_symmetry(self):
        rng = np.random.default_rng(3)
        X, Y = rng.normal(size=(2, 6)), rng.normal(size=(2, 6))
        cfg = McrConfig(2)
        assert mcr_delta_r(X, Y, cfg) == pytest.approx(mcr_delta_r(Y, X, cfg))

    def test_orthogonal_invariance(self):
        rng = np.random.default_rng(4)
        X, Y = rng.normal(size=(3, 8)), rng.normal(size=(3, 8))
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        cfg = McrConfig(3)
        assert mcr_delta_r(Q @ X, Q @ Y, cfg) == pytest.approx(mcr_delta_r(X, Y, cfg))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10_000))
    def test_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        X, Y = rng.normal(size=(2, 5)), rng.normal(size=(2, 5))
        assert mcr_delta_r(X, Y, McrConfig(2)) >= -1e-10

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            mcr_delta_r(np.zeros((2, 3)), np.zeros((2, 4)), McrConfig(2))
        with pytest.raises(ValueError):
            mcr_delta_r(np.zeros((3, 3)), np.zeros((3, 3)), McrConfig(2))


class TestMcrProbabilityForm:
    def test_equal_distributions_vanish(self):
        p = bas_distribution(BasSpec(2, 2))
        cfg = McrConfig(4)
        assert mcr_delta_r_probability(p, p, identity_features(4), cfg) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_matches_large_sample_form(self):
        rng = np.random.default_rng(5)
        p = bas_distribution(BasSpec(1, 2))
        q = DiscreteDistribution.uniform(2)
        phi = identity_features(2)
        cfg = McrConfig(2)
        pop = mcr_delta_r_probability(p, q, phi, cfg)
        m = 100_000
        sup = support_matrix(2)
        X = sup[rng.choice(4, m, p=p.mass)].T
        Y = sup[rng.choice(4, m, p=q.mass)].T
        assert abs(mcr_delta_r(X, Y, cfg) - pop) < 0.01

    def test_permutation_consistency(self):
        # relabeling support points while permuting phi the same way is inert
        p = DiscreteDistribution(1, np.array([0.3, 0.7]))
        q = DiscreteDistribution(1, np.array([0.6, 0.4]))
        cfg = McrConfig(1)
        a = mcr_delta_r_probability(p, q, FeatureMapHandle(1, lambda X: X), cfg)
        pr = DiscreteDistribution(1, np.array([0.7, 0.3]))
        qr = DiscreteDistribution(1, np.array([0.4, 0.6]))
        b = mcr_delta_r_probability(pr, qr, FeatureMapHandle(1, lambda X: 1.0 - X), cfg)
        assert a == pytest.approx(b)


class TestMcrGradients:
    def _feature_map(self, seed, n, d=2):
        W = np.random.default_rng(seed).normal(size=(d, n))
        return FeatureMapHandle(d, lambda X: np.tanh(X @ W.T)), W

    def test_nn_matches_finite_difference(self):
        target = bas_distribution(BasSpec(1, 3))
        cfg = McrConfig(2, 0.5)
        for seed in range(5):
            prog = _prog(seed=seed)
            phi, _ = self._feature_map(seed + 100, 3)
            loss = lambda p: mcr_delta_r_probability(output_distribution(p), target, phi, cfg)
            i = seed * 3
            g = mcr_gradient_nn(prog, i, phi, target, cfg)
            assert abs(g - _fd(loss, prog, i)) < 1e-5

    def test_kernel_form_matches_nn_form_exactly(self):
        target = bas_distribution(BasSpec(1, 3))
        cfg = McrConfig(2, 0.5)
        prog = _prog(seed=9)
        phi, _ = self._feature_map(200, 3)
        gram = phi(support_matrix(3)) @ phi(support_matrix(3)).T
        for i in [0, 4, 11]:
            g_nn = mcr_gradient_nn(prog, i, phi, target, cfg)
            g_k = mcr_gradient_kernel(prog, i, gram, target, cfg)
            assert abs(g_k.value - g_nn) < 1e-8

    def test_kernel_gaussian_matches_finite_difference(self):
        # kernelized DeltaR via the determinant identity
        # det(I_d + Phi D Phi^T) = det(I_m + D^{1/2} G D^{1/2})
        target = bas_distribution(BasSpec(1, 3))
        cfg = McrConfig(2, 0.5)
        spec = KernelSpec()
        prog = _prog(seed=10)
        G = support_gram(3, spec)
        d, eps2 = cfg.feature_dim, cfg.epsilon_sq

        def logdet_core(weights, scale):
            root = np.sqrt(scale * weights)
            return float(
                np.linalg.slogdet(np.eye(len(G)) + root[:, None] * G * root[None, :])[1]
            )

        def loss(p):
            mass = output_distribution(p).mass
            return (
                0.5 * logdet_core(mass + target.mass, d / (2 * eps2))
                - 0.25 * logdet_core(mass, d / eps2)
                - 0.25 * logdet_core(target.mass, d / eps2)
            )

        for i in [2, 7]:
            g = mcr_gradient_kernel(prog, i, spec, target, cfg)
            assert abs(g.value - _fd(loss, prog, i)) < 1e-5
            assert np.isfinite(g.gram_condition)

    def test_sampled_nn_mode_consistent(self):
        target = bas_distribution(BasSpec(1, 3))
        cfg = McrConfig(2, 0.5)
        prog = _prog(seed=11)
        phi, _ = self._feature_map(300, 3)
        exact = mcr_gradient_nn(prog, 2, phi, target, cfg)
        rng = np.random.default_rng(2)
        vals = [
            mcr_gradient_nn(prog, 2, phi, target, cfg, mode="sampled", batch=128, rng=rng)
            for _ in range(60)
        ]
        # finite-batch moment estimates leave a small bias; allow slack
        assert abs(np.mean(vals) - exact) < 5 * np.std(vals) / math.sqrt(60) + 3e-3
