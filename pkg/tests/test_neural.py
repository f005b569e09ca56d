"""MLPs with manual backprop, Adam, Gumbel-softmax sampling."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qborn.neural import (
    AdamState,
    Discriminator,
    GumbelGenerator,
    Mlp,
    TemperatureSchedule,
    adam_step,
    gumbel_softmax,
    sample_gumbel,
)


class TestMlpForward:
    def test_zero_net_sigmoid_outputs_half(self):
        net = Mlp([np.zeros((3, 2))], [np.zeros(3)], output="sigmoid")
        out, _ = net.forward(np.array([[1.0, -2.0]]))
        assert np.allclose(out, 0.5)

    def test_identity_layer(self):
        net = Mlp([np.eye(2)], [np.zeros(2)], output="identity")
        x = np.array([[0.3, -0.7]])
        out, _ = net.forward(x)
        assert np.allclose(out, x)

    def test_deterministic(self):
        rng = np.random.default_rng(0)
        net = Mlp.init((2, 3, 1), rng)
        x = rng.normal(size=(4, 2))
        a, _ = net.forward(x)
        b, _ = net.forward(x)
        assert (a == b).all()

    def test_bad_activation_rejected(self):
        with pytest.raises(ValueError):
            Mlp([np.eye(2)], [np.zeros(2)], hidden="swish")


class TestMlpBackward:
    @pytest.mark.parametrize("hidden", ["tanh", "relu", "leaky_relu"])
    @pytest.mark.parametrize("output", ["identity", "sigmoid"])
    def test_matches_finite_difference(self, hidden, output):
        rng = np.random.default_rng(42)
        net = Mlp.init((3, 4, 2), rng, hidden=hidden, output=output, extra_output_bias=True)
        x = rng.normal(size=(5, 3))
        w = rng.normal(size=(5, 2))  # loss = sum(w * out)

        out, cache = net.forward(x)
        grads, d_input = net.backward(cache, w)
        params = net.parameters()
        h = 1e-6
        for k, p in enumerate(params):
            flat_idx = np.argmax(np.abs(np.asarray(grads[k])))
            idx = np.unravel_index(flat_idx, np.shape(p))
            orig = p[idx]
            p[idx] = orig + h
            up = float((w * net.forward(x)[0]).sum())
            p[idx] = orig - h
            dn = float((w * net.forward(x)[0]).sum())
            p[idx] = orig
            fd = (up - dn) / (2 * h)
            got = np.asarray(grads[k])[idx]
            assert abs(got - fd) <= 1e-6 * max(1.0, abs(fd))
        # input gradient too
        i, j = 2, 1
        xx = x.copy()
        xx[i, j] += h
        up = float((w * net.forward(xx)[0]).sum())
        xx[i, j] -= 2 * h
        dn = float((w * net.forward(xx)[0]).sum())
        assert abs(d_input[i, j] - (up - dn) / (2 * h)) < 1e-6

    def test_zero_gradient_in_zero_out(self):
        rng = np.random.default_rng(1)
        net = Mlp.init((2, 3, 2), rng)
        out, cache = net.forward(rng.normal(size=(3, 2)))
        grads, _ = net.backward(cache, np.zeros_like(out))
        assert all(np.abs(g).max() == 0 for g in grads)

    def test_batch_gradient_is_sum_of_examples(self):
        rng = np.random.default_rng(2)
        net = Mlp.init((2, 3, 1), rng)
        x = rng.normal(size=(4, 2))
        w = rng.normal(size=(4, 1))
        out, cache = net.forward(x)
        full, _ = net.backward(cache, w)
        per = None
        for i in range(4):
            o, c = net.forward(x[i : i + 1])
            g, _ = net.backward(c, w[i : i + 1])
            per = g if per is None else [a + b for a, b in zip(per, g)]
        for a, b in zip(full, per):
            assert np.abs(np.asarray(a) - np.asarray(b)).max() < 1e-12


class TestParameterCounts:
    def test_default_generator_has_56_parameters(self):
        gen = GumbelGenerator.init(np.random.default_rng(0))
        assert gen.net.num_parameters == 56

    def test_count_breakdown(self):
        # (2*4+4) + (4*4+4) + (4*4+4) weights+biases plus the 4-unit extra bias
        gen = GumbelGenerator.init(np.random.default_rng(0))
        assert gen.net.layer_sizes == (2, 4, 4, 4)
        assert gen.net.extra_output_bias is not None


class TestAdam:
    def test_first_step_is_signed_lr(self):
        g = np.array([3.0, -0.25, 0.0])
        state = AdamState.for_params([np.zeros(3)], lr=0.01)
        (p,) = adam_step([np.zeros(3)], [g], state)
        assert np.allclose(p[:2], [-0.01, 0.01], atol=1e-6)
        assert p[2] == 0.0

    def test_zero_gradient_stream_keeps_params(self):
        params = [np.array([1.0, -2.0])]
        state = AdamState.for_params(params)
        for _ in range(10):
            params = adam_step(params, [np.zeros(2)], state)
        assert np.allclose(params[0], [1.0, -2.0])

    def test_converges_on_quadratic(self):
        params = [np.array([5.0])]
        state = AdamState.for_params(params, lr=0.1)
        for _ in range(600):
            params = adam_step(params, [2 * params[0]], state)
        assert abs(params[0][0]) < 1e-6

    def test_shape_mismatch_rejected(self):
        state = AdamState.for_params([np.zeros(2)])
        with pytest.raises(ValueError):
            adam_step([np.zeros(2)], [np.zeros(2), np.zeros(1)], state)

    def test_state_round_trip(self):
        state = AdamState.for_params([np.ones(3)], lr=0.05)
        adam_step([np.ones(3)], [np.ones(3)], state)
        back = AdamState.from_record(json.loads(json.dumps(state.to_record())))
        assert back.step == state.step
        assert np.allclose(back.m[0], state.m[0])


class TestGumbelSoftmax:
    def test_simplex_output(self):
        rng = np.random.default_rng(0)
        y = gumbel_softmax(rng.normal(size=(10, 5)), 0.7, rng)
        assert (y > 0).all()
        assert np.abs(y.sum(axis=-1) - 1).max() < 1e-12

    def test_low_temperature_is_one_hot(self):
        rng = np.random.default_rng(1)
        logits = rng.normal(size=(20, 4))
        y = gumbel_softmax(logits, 1e-6, rng)
        assert y.max(axis=-1).min() > 1 - 1e-9

    def test_high_temperature_flattens(self):
        rng = np.random.default_rng(2)
        y = gumbel_softmax(np.zeros((100, 4)), 1e3, rng)
        assert float((y.max(axis=-1) - y.min(axis=-1)).max()) < 1e-2

    def test_uniform_logits_uniform_categories(self):
        rng = np.random.default_rng(3)
        k, m = 16, 100_000
        picks = gumbel_softmax(np.zeros((m, k)), 1e-4, rng).argmax(axis=-1)
        counts = np.bincount(picks, minlength=k)
        sigma = math.sqrt(m * (1 / k) * (1 - 1 / k))
        assert np.abs(counts - m / k).max() < 3 * sigma + 1e-9

    def test_gumbel_noise_distribution(self):
        rng = np.random.default_rng(4)
        g = sample_gumbel(50_000, rng)
        # Gumbel(0,1) mean is the Euler-Mascheroni constant
        assert abs(g.mean() - 0.5772) < 0.02


class TestTemperatureSchedule:
    def test_endpoints(self):
        s = TemperatureSchedule(1e-2, 1e-4)
        assert s.at(0, 2000) == pytest.approx(1e-2)
        assert s.at(1999, 2000) == pytest.approx(1e-4)

    def test_midpoint(self):
        s = TemperatureSchedule(1e-2, 1e-4)
        mid = s.at(999.5, 2000) if False else s.at(1000, 2001)
        assert mid == pytest.approx(5.05e-3)

    def test_constant_mode(self):
        s = TemperatureSchedule(0.5, 0.5)
        assert s.at(17, 100) == 0.5


class TestModels:
    def test_generator_soft_bits_in_unit_interval(self):
        rng = np.random.default_rng(5)
        gen = GumbelGenerator.init(rng)
        soft, _ = gen.sample_soft(32, 0.01, rng)
        assert soft.shape == (32, 4)
        assert ((soft >= 0) & (soft <= 1)).all()

    def test_generator_backward_matches_finite_difference(self):
        gen = GumbelGenerator.init(np.random.default_rng(6))

        def soft_batch():
            return gen.sample_soft(8, 0.3, np.random.default_rng(99))

        soft, cache = soft_batch()
        grads = gen.backward(cache, 2 * soft)  # loss = sum soft^2
        p = gen.net.parameters()[2]
        idx = (1, 2)
        h = 1e-6
        orig = p[idx]
        p[idx] = orig + h
        up = float((soft_batch()[0] ** 2).sum())
        p[idx] = orig - h
        dn = float((soft_batch()[0] ** 2).sum())
        p[idx] = orig
        assert abs(grads[2][idx] - (up - dn) / (2 * h)) < 1e-5

    def test_discriminator_heads_share_trunk(self):
        rng = np.random.default_rng(7)
        disc = Discriminator.init(rng)
        x = rng.normal(size=(3, 4))
        assert disc.score(x).shape == (3,)
        assert disc.features(x).shape == (3, 2)
        # perturbing the trunk moves both heads
        before_s, before_f = disc.score(x).copy(), disc.features(x).copy()
        disc.trunk.weights[0][0, 0] += 0.5
        assert not np.allclose(disc.score(x), before_s)
        assert not np.allclose(disc.features(x), before_f)

    def test_checkpoint_round_trip(self):
        rng = np.random.default_rng(8)
        disc = Discriminator.init(rng)
        x = rng.normal(size=(4, 4))
        clone = Discriminator.from_record(json.loads(json.dumps(disc.to_record())))
        assert np.allclose(clone.score(x), disc.score(x))
        assert np.allclose(clone.features(x), disc.features(x))
