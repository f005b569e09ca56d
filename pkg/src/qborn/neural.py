"""Small dense networks with manual backprop, Adam, and Gumbel-softmax.

Everything is plain numpy with explicit parameter lists so training is
deterministic given the RNG handle and checkpoints serialize exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

HIDDEN_ACTIVATIONS = ("tanh", "relu", "leaky_relu")
OUTPUT_ACTIVATIONS = ("identity", "sigmoid")
LEAKY_SLOPE = 0.01


def _act(name: str, z: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "leaky_relu":
        return np.where(z > 0, z, LEAKY_SLOPE * z)
    if name == "identity":
        return z
    if name == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    raise ValueError(f"unknown activation {name!r}")


def _act_grad(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return 1.0 - a**2
    if name == "relu":
        return (z > 0).astype(float)
    if name == "leaky_relu":
        return np.where(z > 0, 1.0, LEAKY_SLOPE)
    if name == "identity":
        return np.ones_like(z)
    if name == "sigmoid":
        return a * (1.0 - a)
    raise ValueError(f"unknown activation {name!r}")


@dataclass
class Mlp:
    """Fully connected net; weights[i] has shape (out, in).

    extra_output_bias, when present, is a second bias vector added to the
    final pre-activation (kept as its own trainable parameter).
    """

    weights: list
    biases: list
    hidden: str = "tanh"
    output: str = "identity"
    extra_output_bias: np.ndarray | None = None

    def __post_init__(self):
        if self.hidden not in HIDDEN_ACTIVATIONS:
            raise ValueError(f"hidden activation must be one of {HIDDEN_ACTIVATIONS}")
        if self.output not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"output activation must be one of {OUTPUT_ACTIVATIONS}")
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("need matching weight/bias lists")

    @staticmethod
    def init(
        layer_sizes: tuple[int, ...],
        rng: np.random.Generator,
        hidden: str = "tanh",
        output: str = "identity",
        extra_output_bias: bool = False,
    ) -> "Mlp":
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_sizes, layer_sizes[1:]):
            weights.append(rng.normal(0.0, 1.0 / math.sqrt(fan_in), (fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        extra = np.zeros(layer_sizes[-1]) if extra_output_bias else None
        return Mlp(weights, biases, hidden, output, extra)

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return tuple([self.weights[0].shape[1]] + [w.shape[0] for w in self.weights])

    def parameters(self) -> list:
        params = []
        for w, b in zip(self.weights, self.biases):
            params.extend([w, b])
        if self.extra_output_bias is not None:
            params.append(self.extra_output_bias)
        return params

    def set_parameters(self, params: list):
        it = iter(params)
        for i in range(len(self.weights)):
            self.weights[i] = next(it)
            self.biases[i] = next(it)
        if self.extra_output_bias is not None:
            self.extra_output_bias = next(it)

    @property
    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def forward(self, x: np.ndarray):
        """Returns (output, cache) for a (batch, in) input."""
        x = np.atleast_2d(np.asarray(x, float))
        activations = [x]
        pre = []
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = activations[-1] @ w.T + b
            if i == last and self.extra_output_bias is not None:
                z = z + self.extra_output_bias
            pre.append(z)
            name = self.output if i == last else self.hidden
            activations.append(_act(name, z))
        return activations[-1], (activations, pre)

    def backward(self, cache, dout: np.ndarray):
        """Gradients of sum(dout * output) w.r.t. parameters and input.

        Returns (param_grads, d_input); param_grads matches parameters().
        """
        activations, pre = cache
        last = len(self.weights) - 1
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.weights)
        delta = np.asarray(dout, float)
        extra_grad = None
        for i in range(last, -1, -1):
            name = self.output if i == last else self.hidden
            delta = delta * _act_grad(name, pre[i], activations[i + 1])
            grads_w[i] = delta.T @ activations[i]
            grads_b[i] = delta.sum(axis=0)
            if i == last and self.extra_output_bias is not None:
                extra_grad = delta.sum(axis=0)
            delta = delta @ self.weights[i]
        params = []
        for gw, gb in zip(grads_w, grads_b):
            params.extend([gw, gb])
        if self.extra_output_bias is not None:
            params.append(extra_grad)
        return params, delta

    def to_record(self) -> dict:
        return {
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "hidden": self.hidden,
            "output": self.output,
            "extra_output_bias": (
                None if self.extra_output_bias is None else self.extra_output_bias.tolist()
            ),
        }

    @staticmethod
    def from_record(record: dict) -> "Mlp":
        extra = record["extra_output_bias"]
        return Mlp(
            [np.array(w) for w in record["weights"]],
            [np.array(b) for b in record["biases"]],
            record["hidden"],
            record["output"],
            None if extra is None else np.array(extra),
        )


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @staticmethod
    def for_params(params: list, lr: float = 1e-3) -> "AdamState":
        return AdamState(
            lr=lr,
            m=[np.zeros_like(np.asarray(p, float)) for p in params],
            v=[np.zeros_like(np.asarray(p, float)) for p in params],
        )

    def to_record(self) -> dict:
        return {
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "step": self.step,
            "m": [m.tolist() for m in self.m],
            "v": [v.tolist() for v in self.v],
        }

    @staticmethod
    def from_record(record: dict) -> "AdamState":
        return AdamState(
            lr=record["lr"],
            beta1=record["beta1"],
            beta2=record["beta2"],
            eps=record["eps"],
            step=record["step"],
            m=[np.array(m) for m in record["m"]],
            v=[np.array(v) for v in record["v"]],
        )


def adam_step(params: list, grads: list, state: AdamState) -> list:
    """One Adam update (bias-corrected); mutates state, returns new params."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("parameter/gradient/state length mismatch")
    state.step += 1
    t = state.step
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        g = np.asarray(g, float)
        state.m[i] = state.beta1 * state.m[i] + (1 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1 - state.beta2) * g**2
        m_hat = state.m[i] / (1 - state.beta1**t)
        v_hat = state.v[i] / (1 - state.beta2**t)
        out.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
    return out


# ---------------------------------------------------------------------------
# Gumbel-softmax
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TemperatureSchedule:
    """Linear anneal from start to end over total iterations (or constant)."""

    start: float = 1e-2
    end: float = 1e-4

    def at(self, iteration: int, total: int) -> float:
        if total <= 1:
            return self.start
        frac = min(max(iteration / (total - 1), 0.0), 1.0)
        return self.start + (self.end - self.start) * frac


def sample_gumbel(shape, rng: np.random.Generator) -> np.ndarray:
    u = rng.uniform(size=shape)
    return -np.log(-np.log(u))


def gumbel_softmax(
    logits: np.ndarray, temperature: float, rng: np.random.Generator
) -> np.ndarray:
    """Soft one-hot sample: softmax((logits + gumbel) / temperature)."""
    logits = np.asarray(logits, float)
    z = (logits + sample_gumbel(logits.shape, rng)) / temperature
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# generator and discriminator models
# ---------------------------------------------------------------------------


@dataclass
class GumbelGenerator:
    """Noise -> per-bit logits -> binary Gumbel-softmax relaxation.

    Each output unit is the logit of bit=1 against a fixed 0 logit for
    bit=0 (two-category Gumbel-softmax per bit). The network maps a
    noise_dim input through the hidden sizes to num_bits logits, with an
    extra trainable output bias.
    """

    net: Mlp
    noise_dim: int

    @staticmethod
    def init(
        rng: np.random.Generator,
        noise_dim: int = 2,
        hidden: tuple[int, ...] = (4, 4),
        num_bits: int = 4,
    ) -> "GumbelGenerator":
        net = Mlp.init(
            (noise_dim, *hidden, num_bits),
            rng,
            hidden="tanh",
            output="identity",
            extra_output_bias=True,
        )
        return GumbelGenerator(net, noise_dim)

    @property
    def num_bits(self) -> int:
        return self.net.layer_sizes[-1]

    def sample_soft(self, batch: int, temperature: float, rng: np.random.Generator):
        """Returns (soft bits in (0,1), cache for backward)."""
        z = rng.normal(size=(batch, self.noise_dim))
        logits, net_cache = self.net.forward(z)
        # two-category softmax with the second logit pinned at 0
        g1 = sample_gumbel(logits.shape, rng)
        g0 = sample_gumbel(logits.shape, rng)
        x = (logits + g1 - g0) / temperature
        # numerically stable sigmoid: probability coordinate of bit=1
        soft = np.empty_like(x)
        pos = x >= 0
        soft[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        soft[~pos] = ex / (1.0 + ex)
        return soft, (net_cache, soft, temperature)

    def backward(self, cache, d_soft: np.ndarray) -> list:
        """Parameter gradients of sum(d_soft * soft_bits)."""
        net_cache, soft, temperature = cache
        d_logits = d_soft * soft * (1.0 - soft) / temperature
        grads, _ = self.net.backward(net_cache, d_logits)
        return grads

    def hard_sample(self, batch: int, temperature: float, rng: np.random.Generator) -> list[str]:
        soft, _ = self.sample_soft(batch, temperature, rng)
        return ["".join("1" if s > 0.5 else "0" for s in row) for row in soft]


@dataclass
class Discriminator:
    """Shared trunk with two heads: a d-dim feature embedding (coding-rate
    objective) and a scalar sigmoid score (adversarial objective)."""

    trunk: Mlp
    feature_head: Mlp
    score_head: Mlp

    @staticmethod
    def init(
        rng: np.random.Generator,
        num_bits: int = 4,
        hidden: tuple[int, ...] = (4, 4),
        feature_dim: int = 2,
    ) -> "Discriminator":
        trunk = Mlp.init((num_bits, *hidden), rng, hidden="tanh", output="identity")
        feature_head = Mlp.init((hidden[-1], feature_dim), rng, output="identity")
        score_head = Mlp.init((hidden[-1], 1), rng, output="sigmoid")
        return Discriminator(trunk, feature_head, score_head)

    @property
    def feature_dim(self) -> int:
        return self.feature_head.layer_sizes[-1]

    def score(self, x: np.ndarray) -> np.ndarray:
        h, _ = self.trunk.forward(x)
        # trunk output is pre-activation of the last hidden layer design;
        # apply the hidden nonlinearity before the heads
        s, _ = self.score_head.forward(np.tanh(h))
        return s.reshape(-1)

    def features(self, x: np.ndarray) -> np.ndarray:
        h, _ = self.trunk.forward(x)
        f, _ = self.feature_head.forward(np.tanh(h))
        return f

    def _head_forward(self, head: Mlp, x: np.ndarray):
        h, trunk_cache = self.trunk.forward(x)
        th = np.tanh(h)
        out, head_cache = head.forward(th)
        return out, (trunk_cache, h, head_cache)

    def _head_backward(self, head: Mlp, cache, dout: np.ndarray):
        trunk_cache, h, head_cache = cache
        head_grads, d_th = head.backward(head_cache, dout)
        d_h = d_th * (1.0 - np.tanh(h) ** 2)
        trunk_grads, d_input = self.trunk.backward(trunk_cache, d_h)
        return trunk_grads, head_grads, d_input

    # --- adversarial head -------------------------------------------------

    def score_with_cache(self, x: np.ndarray):
        out, cache = self._head_forward(self.score_head, x)
        return out.reshape(-1), cache

    def score_backward(self, cache, d_score: np.ndarray):
        """Returns (trunk grads, score-head grads, d_input)."""
        return self._head_backward(self.score_head, cache, np.asarray(d_score).reshape(-1, 1))

    # --- feature head -----------------------------------------------------

    def features_with_cache(self, x: np.ndarray):
        return self._head_forward(self.feature_head, x)

    def features_backward(self, cache, d_features: np.ndarray):
        return self._head_backward(self.feature_head, cache, d_features)

    def adversarial_parameters(self) -> list:
        return self.trunk.parameters() + self.score_head.parameters()

    def set_adversarial_parameters(self, params: list):
        k = len(self.trunk.parameters())
        self.trunk.set_parameters(params[:k])
        self.score_head.set_parameters(params[k:])

    def feature_parameters(self) -> list:
        return self.trunk.parameters() + self.feature_head.parameters()

    def set_feature_parameters(self, params: list):
        k = len(self.trunk.parameters())
        self.trunk.set_parameters(params[:k])
        self.feature_head.set_parameters(params[k:])

    def to_record(self) -> dict:
        return {
            "trunk": self.trunk.to_record(),
            "feature_head": self.feature_head.to_record(),
            "score_head": self.score_head.to_record(),
        }

    @staticmethod
    def from_record(record: dict) -> "Discriminator":
        return Discriminator(
            Mlp.from_record(record["trunk"]),
            Mlp.from_record(record["feature_head"]),
            Mlp.from_record(record["score_head"]),
        )
