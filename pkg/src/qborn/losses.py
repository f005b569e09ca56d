"""Training objectives for Born machines: kernel MMD, non-saturating
adversarial losses, and maximal-coding-rate (MCR) reduction.

All generator gradients go through the parameter shift rule
d p / d theta = (p(theta + pi/2) - p(theta - pi/2)) / 2 so they are
exact for the quantum model; each objective offers an ``exact`` path
(full output distribution) and a ``sampled`` path (finite batches).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from qborn.distributions import DiscreteDistribution, empirical_distribution
from qborn.mpqc import (
    MpqcProgram,
    evolve,
    output_distribution,
    shift_distribution_pairs,
    shifted_program,
)
from qborn.quantum import sample as sample_state

SCORE_CLAMP = 1e-7
GRAM_CONDITION_WARN = 1e12


# ---------------------------------------------------------------------------
# bitstring feature helpers
# ---------------------------------------------------------------------------


def bits_to_vector(bits: str) -> np.ndarray:
    """{0,1}-valued vector, one coordinate per bit."""
    return np.fromiter((1.0 if b == "1" else 0.0 for b in bits), dtype=float)


def support_matrix(num_bits: int) -> np.ndarray:
    """(2^n, n) matrix of all bitstring vectors in index order."""
    idx = np.arange(2**num_bits)
    shifts = np.arange(num_bits - 1, -1, -1)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(float)


def sample_matrix(samples: list[str]) -> np.ndarray:
    return np.array([bits_to_vector(s) for s in samples])


def draw_target(target: DiscreteDistribution, count: int, rng: np.random.Generator) -> list[str]:
    """i.i.d. bitstrings from a discrete target distribution."""
    n = target.num_bits
    idx = rng.choice(len(target.mass), size=count, p=target.mass)
    return [format(i, f"0{n}b") for i in idx]


# ---------------------------------------------------------------------------
# kernel MMD
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian mixture kernel K(x,y) = mean_i exp(-|x-y|^2 / (2 s_i))."""

    bandwidths: tuple[float, ...] = (0.25, 1.0, 4.0)

    def __post_init__(self):
        object.__setattr__(self, "bandwidths", tuple(float(b) for b in self.bandwidths))
        if not self.bandwidths or min(self.bandwidths) <= 0:
            raise ValueError("bandwidths must be positive")

    def matrix(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Pairwise kernel values between rows of X and rows of Y."""
        sq = ((X[:, None, :] - Y[None, :, :]) ** 2).sum(axis=2)
        out = np.zeros(sq.shape)
        for s in self.bandwidths:
            out += np.exp(-sq / (2 * s))
        return out / len(self.bandwidths)


def gaussian_kernel(x: np.ndarray, y: np.ndarray, spec: KernelSpec = KernelSpec()) -> float:
    sq = float(((np.asarray(x, float) - np.asarray(y, float)) ** 2).sum())
    return sum(math.exp(-sq / (2 * s)) for s in spec.bandwidths) / len(spec.bandwidths)


def support_gram(num_bits: int, spec: KernelSpec) -> np.ndarray:
    """Full-support Gram matrix (cache-friendly: 16x16 at four bits)."""
    X = support_matrix(num_bits)
    return spec.matrix(X, X)


def mmd_loss_exact(
    p: DiscreteDistribution, q: DiscreteDistribution, spec: KernelSpec = KernelSpec()
) -> float:
    """MMD^2 between two fully known distributions."""
    if p.num_bits != q.num_bits:
        raise ValueError("dimension mismatch")
    K = support_gram(p.num_bits, spec)
    d = p.mass - q.mass
    return float(d @ K @ d)


def mmd_loss_sampled(
    xs: list[str], ys: list[str], spec: KernelSpec = KernelSpec()
) -> float:
    """V-statistic estimator from two sample batches (diagonal included)."""
    X, Y = sample_matrix(xs), sample_matrix(ys)
    return float(
        spec.matrix(X, X).mean() - 2 * spec.matrix(X, Y).mean() + spec.matrix(Y, Y).mean()
    )


def mmd_gradient_exact(
    program: MpqcProgram,
    flat_index: int,
    target: DiscreteDistribution,
    spec: KernelSpec = KernelSpec(),
) -> float:
    """d MMD^2 / d theta_i via parameter shift on the full distributions:
    (p+ - p-)^T K (p - pi)."""
    K = support_gram(program.num_qubits, spec)
    p = output_distribution(program).mass
    plus = output_distribution(shifted_program(program, flat_index, +1)).mass
    minus = output_distribution(shifted_program(program, flat_index, -1)).mass
    return float((plus - minus) @ K @ (p - target.mass))


def mmd_gradients_exact(
    program: MpqcProgram,
    target: DiscreteDistribution,
    spec: KernelSpec = KernelSpec(),
) -> np.ndarray:
    """Full gradient vector; shares K(p - pi) across parameters."""
    K = support_gram(program.num_qubits, spec)
    pull = K @ (output_distribution(program).mass - target.mass)
    pairs = shift_distribution_pairs(program)
    return (pairs[:, 0] - pairs[:, 1]) @ pull


def mmd_loss(p, q, spec: KernelSpec = KernelSpec()) -> float:
    """Dispatch on argument type: distributions -> exact, lists -> V-statistic."""
    if isinstance(p, DiscreteDistribution) and isinstance(q, DiscreteDistribution):
        return mmd_loss_exact(p, q, spec)
    if isinstance(p, list) and isinstance(q, list):
        if not p or not q:
            raise ValueError("empty sample list")
        return mmd_loss_sampled(p, q, spec)
    raise TypeError("p and q must both be distributions or both sample lists")


def mmd_gradient(
    program: MpqcProgram,
    flat_index: int,
    target,
    spec: KernelSpec = KernelSpec(),
    mode: str = "exact",
    batch: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    if mode == "exact":
        return mmd_gradient_exact(program, flat_index, target, spec)
    if mode == "sampled":
        if batch is None or rng is None:
            raise ValueError("sampled mode needs batch and rng")
        samples = target if isinstance(target, list) else draw_target(target, batch, rng)
        return mmd_gradient_sampled(program, flat_index, samples, batch, rng, spec)
    raise ValueError(f"unknown mode {mode!r}")


def mmd_gradient_sampled(
    program: MpqcProgram,
    flat_index: int,
    target_samples: list[str],
    batch: int,
    rng: np.random.Generator,
    spec: KernelSpec = KernelSpec(),
) -> float:
    """Unbiased batch estimator: kernel expectations between batches drawn
    at theta+/-, theta, and the target."""
    mid = sample_matrix(sample_state(evolve(program), batch, rng))
    plus = sample_matrix(
        sample_state(evolve(shifted_program(program, flat_index, +1)), batch, rng)
    )
    minus = sample_matrix(
        sample_state(evolve(shifted_program(program, flat_index, -1)), batch, rng)
    )
    tgt = sample_matrix(target_samples)
    return float(
        spec.matrix(plus, mid).mean()
        - spec.matrix(minus, mid).mean()
        - spec.matrix(plus, tgt).mean()
        + spec.matrix(minus, tgt).mean()
    )


# ---------------------------------------------------------------------------
# non-saturating adversarial losses
# ---------------------------------------------------------------------------


def clamp_scores(scores: np.ndarray) -> np.ndarray:
    return np.clip(scores, SCORE_CLAMP, 1.0 - SCORE_CLAMP)


def discriminator_loss(d_real: np.ndarray, d_fake: np.ndarray) -> float:
    """-E ln D(real) - E ln(1 - D(fake)), scores clamped away from {0,1}."""
    d_real, d_fake = clamp_scores(np.asarray(d_real)), clamp_scores(np.asarray(d_fake))
    return float(-np.mean(np.log(d_real)) - np.mean(np.log1p(-d_fake)))


def generator_loss(d_fake: np.ndarray) -> float:
    """Non-saturating -E ln D(fake)."""
    return float(-np.mean(np.log(clamp_scores(np.asarray(d_fake)))))


def gan_losses(d_real, d_fake) -> tuple[float, float]:
    """(L_D, L_G) of the non-saturating objective."""
    return discriminator_loss(d_real, d_fake), generator_loss(d_fake)


def gan_generator_gradient(
    program: MpqcProgram,
    flat_index: int,
    score_fn,
    mode: str = "exact",
    batch: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    if mode == "exact":
        return gan_generator_gradient_exact(program, flat_index, score_fn)
    if mode == "sampled":
        if batch is None or rng is None:
            raise ValueError("sampled mode needs batch and rng")
        return gan_generator_gradient_sampled(program, flat_index, score_fn, batch, rng)
    raise ValueError(f"unknown mode {mode!r}")


def gan_generator_gradient_exact(
    program: MpqcProgram, flat_index: int, score_fn
) -> float:
    """d(-E_p ln D)/d theta = -sum_x dp(x) ln D(x) with dp = (p+ - p-)/2.

    score_fn maps a (batch, n) bit matrix to discriminator scores.
    """
    X = support_matrix(program.num_qubits)
    log_d = np.log(clamp_scores(np.asarray(score_fn(X)).reshape(-1)))
    plus = output_distribution(shifted_program(program, flat_index, +1)).mass
    minus = output_distribution(shifted_program(program, flat_index, -1)).mass
    return float(-0.5 * (plus - minus) @ log_d)


def gan_generator_gradients_exact(program: MpqcProgram, score_fn) -> np.ndarray:
    X = support_matrix(program.num_qubits)
    log_d = np.log(clamp_scores(np.asarray(score_fn(X)).reshape(-1)))
    pairs = shift_distribution_pairs(program)
    return -0.5 * (pairs[:, 0] - pairs[:, 1]) @ log_d


def gan_generator_gradient_sampled(
    program: MpqcProgram,
    flat_index: int,
    score_fn,
    batch: int,
    rng: np.random.Generator,
) -> float:
    """(1/2) E_{theta-}[ln D] - (1/2) E_{theta+}[ln D] from two batches."""
    plus = sample_matrix(
        sample_state(evolve(shifted_program(program, flat_index, +1)), batch, rng)
    )
    minus = sample_matrix(
        sample_state(evolve(shifted_program(program, flat_index, -1)), batch, rng)
    )
    ln_plus = np.log(clamp_scores(np.asarray(score_fn(plus)).reshape(-1)))
    ln_minus = np.log(clamp_scores(np.asarray(score_fn(minus)).reshape(-1)))
    return float(0.5 * ln_minus.mean() - 0.5 * ln_plus.mean())


# ---------------------------------------------------------------------------
# maximal coding rate reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class McrConfig:
    """Coding-rate parameters: feature dimension d and distortion eps^2."""

    feature_dim: int
    epsilon_sq: float = 0.5

    def __post_init__(self):
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be >= 1")
        if self.epsilon_sq <= 0:
            raise ValueError("epsilon_sq must be positive")


@dataclass(frozen=True)
class FeatureMapHandle:
    """A feature embedding x -> R^d evaluated on batches of bit vectors."""

    dim: int
    fn: object  # callable (batch, n_bits) -> (batch, dim)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        out = np.asarray(self.fn(np.atleast_2d(X)), dtype=float)
        if out.ndim != 2 or out.shape[1] != self.dim:
            raise ValueError(f"feature map returned shape {out.shape}, want (*, {self.dim})")
        return out


def identity_features(num_bits: int) -> FeatureMapHandle:
    return FeatureMapHandle(num_bits, lambda X: X)


def _logdet_psd(mat: np.ndarray) -> float:
    sign, logdet = np.linalg.slogdet(mat)
    if sign <= 0:
        raise np.linalg.LinAlgError("coding-rate matrix not positive definite")
    return float(logdet)


def coding_rate(M: np.ndarray, cfg: McrConfig, weight: float) -> float:
    """(1/2) logdet(I + weight * M) for a PSD second-moment matrix M."""
    d = cfg.feature_dim
    return 0.5 * _logdet_psd(np.eye(d) + weight * M)


def mcr_delta_r(X: np.ndarray, Y: np.ndarray, cfg: McrConfig) -> float:
    """Coding-rate reduction of the two-part sample arrangement.

    X, Y are (d, m) feature matrices with equal batch size m:
      R([X Y]) - (1/2) R(X) - (1/2) R(Y) with R the rate at the mixed
      batch size 2m for the first term and m for the parts.
    """
    X, Y = np.asarray(X, float), np.asarray(Y, float)
    d = cfg.feature_dim
    if X.shape[0] != d or Y.shape[0] != d:
        raise ValueError(f"feature rows must equal d={d}")
    if X.shape[1] != Y.shape[1]:
        raise ValueError("equal batch sizes required")
    m = X.shape[1]
    joint = coding_rate(X @ X.T + Y @ Y.T, cfg, d / (2 * m * cfg.epsilon_sq))
    part_x = coding_rate(X @ X.T, cfg, d / (m * cfg.epsilon_sq))
    part_y = coding_rate(Y @ Y.T, cfg, d / (m * cfg.epsilon_sq))
    return joint - 0.5 * part_x - 0.5 * part_y


def _second_moment(
    dist: DiscreteDistribution, features: FeatureMapHandle
) -> np.ndarray:
    Phi = features(support_matrix(dist.num_bits))  # (2^n, d)
    return Phi.T @ (dist.mass[:, None] * Phi)


def mcr_delta_r_probability(
    p: DiscreteDistribution,
    q: DiscreteDistribution,
    features: FeatureMapHandle,
    cfg: McrConfig,
) -> float:
    """Population coding-rate reduction: sample second moments replaced by
    probability-weighted ones, sum_x p(x) phi(x) phi(x)^T."""
    d, eps2 = cfg.feature_dim, cfg.epsilon_sq
    Cp, Cq = _second_moment(p, features), _second_moment(q, features)
    joint = coding_rate(Cp + Cq, cfg, d / (2 * eps2))
    return joint - 0.5 * coding_rate(Cp, cfg, d / eps2) - 0.5 * coding_rate(Cq, cfg, d / eps2)


def _mcr_pointwise_sensitivity(
    p: DiscreteDistribution,
    target: DiscreteDistribution,
    features: FeatureMapHandle,
    cfg: McrConfig,
) -> np.ndarray:
    """d DeltaR / d p(x) over the support.

    With A = I + (d/2eps^2)(C_p + C_pi) and B = I + (d/eps^2) C_p this is
    (d / 4 eps^2) (phi^T A^-1 phi - phi^T B^-1 phi).
    """
    d, eps2 = cfg.feature_dim, cfg.epsilon_sq
    Phi = features(support_matrix(p.num_bits))
    Cp = Phi.T @ (p.mass[:, None] * Phi)
    Cq = Phi.T @ (target.mass[:, None] * Phi)
    A = np.eye(d) + (d / (2 * eps2)) * (Cp + Cq)
    B = np.eye(d) + (d / eps2) * Cp
    qa = np.einsum("xi,ij,xj->x", Phi, np.linalg.inv(A), Phi)
    qb = np.einsum("xi,ij,xj->x", Phi, np.linalg.inv(B), Phi)
    return (d / (4 * eps2)) * (qa - qb)


def _mcr_batch_sensitivity(
    batch_x: list[str],
    batch_y: list[str],
    features: FeatureMapHandle,
    cfg: McrConfig,
):
    """Returns s(.) mapping bit matrices to the pointwise DeltaR sensitivity,
    with A, B estimated from sample second moments (1/m) Phi Phi^T."""
    d, eps2 = cfg.feature_dim, cfg.epsilon_sq
    Px = features(sample_matrix(batch_x))
    Py = features(sample_matrix(batch_y))
    m = len(batch_x)
    A = np.eye(d) + (d / (2 * m * eps2)) * (Px.T @ Px + Py.T @ Py)
    B = np.eye(d) + (d / (m * eps2)) * (Px.T @ Px)
    A_inv, B_inv = np.linalg.inv(A), np.linalg.inv(B)

    def sens(X: np.ndarray) -> np.ndarray:
        Phi = features(X)
        qa = np.einsum("xi,ij,xj->x", Phi, A_inv, Phi)
        qb = np.einsum("xi,ij,xj->x", Phi, B_inv, Phi)
        return (d / (4 * eps2)) * (qa - qb)

    return sens


def mcr_gradient_nn(
    program: MpqcProgram,
    flat_index: int,
    features: FeatureMapHandle,
    target: DiscreteDistribution,
    cfg: McrConfig,
    mode: str = "exact",
    batch: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """d DeltaR / d theta_i with explicit features: chain rule through the
    probability vector and the parameter shift rule.

    Sampled mode estimates the second moments from a batch of the current
    model and target, and the shift expectations from theta+/- batches.
    """
    if mode == "exact":
        sens = _mcr_pointwise_sensitivity(
            output_distribution(program), target, features, cfg
        )
        plus = output_distribution(shifted_program(program, flat_index, +1)).mass
        minus = output_distribution(shifted_program(program, flat_index, -1)).mass
        return float(sens @ (plus - minus) / 2)
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    if batch is None or rng is None:
        raise ValueError("sampled mode needs batch and rng")
    mid = sample_state(evolve(program), batch, rng)
    tgt = draw_target(target, batch, rng)
    sens = _mcr_batch_sensitivity(mid, tgt, features, cfg)
    plus = sample_matrix(
        sample_state(evolve(shifted_program(program, flat_index, +1)), batch, rng)
    )
    minus = sample_matrix(
        sample_state(evolve(shifted_program(program, flat_index, -1)), batch, rng)
    )
    return float(sens(plus).mean() / 2 - sens(minus).mean() / 2)


def mcr_gradients_nn(
    program: MpqcProgram,
    features: FeatureMapHandle,
    target: DiscreteDistribution,
    cfg: McrConfig,
) -> np.ndarray:
    sens = _mcr_pointwise_sensitivity(output_distribution(program), target, features, cfg)
    pairs = shift_distribution_pairs(program)
    return (pairs[:, 0] - pairs[:, 1]) @ sens / 2


@dataclass(frozen=True)
class McrGradientResult:
    value: float
    gram_condition: float

    @property
    def ill_conditioned(self) -> bool:
        return self.gram_condition > GRAM_CONDITION_WARN


def mcr_gradient_kernel(
    program: MpqcProgram,
    flat_index: int,
    kernel: KernelSpec | np.ndarray,
    target: DiscreteDistribution,
    cfg: McrConfig,
    mode: str = "exact",
    batch: int | None = None,
    rng: np.random.Generator | None = None,
) -> McrGradientResult:
    """Kernelized d DeltaR / d theta_i.

    Uses the identity phi^T (I + Phi D Phi^T)^-1 phi(x) =
    K(x,x) - k_x^T D^{1/2} (I + D^{1/2} K D^{1/2})^-1 D^{1/2} k_x,
    so only kernel evaluations are needed. With K(x,y) = phi(x)^T phi(y)
    this reproduces mcr_gradient_nn exactly.

    Sampled mode builds the Gram over a 2m-column mixed batch (model +
    target) for the joint term and an m-column model batch for the part
    term, with uniform weights d/(2m eps^2) and d/(m eps^2).
    """
    n = program.num_qubits
    d, eps2 = cfg.feature_dim, cfg.epsilon_sq
    if mode == "sampled":
        if batch is None or rng is None:
            raise ValueError("sampled mode needs batch and rng")
        if isinstance(kernel, np.ndarray):
            raise ValueError("sampled mode needs a KernelSpec, not a fixed Gram")
        mid = sample_matrix(sample_state(evolve(program), batch, rng))
        tgt = sample_matrix(draw_target(target, batch, rng))
        conds = []

        def quad_pts(base: np.ndarray, scale: float, X: np.ndarray) -> np.ndarray:
            G = kernel.matrix(base, base)
            core = np.eye(len(base)) + scale * G
            conds.append(float(np.linalg.cond(core)))
            kx = kernel.matrix(base, X)  # (m_base, batch)
            diag = np.array([gaussian_kernel(x, x, kernel) for x in X])
            return diag - scale * np.einsum("yx,yx->x", kx, np.linalg.solve(core, kx))

        mixed = np.vstack([mid, tgt])
        plus = sample_matrix(
            sample_state(evolve(shifted_program(program, flat_index, +1)), batch, rng)
        )
        minus = sample_matrix(
            sample_state(evolve(shifted_program(program, flat_index, -1)), batch, rng)
        )

        def sens(X: np.ndarray) -> np.ndarray:
            qa = quad_pts(mixed, d / (2 * batch * eps2), X)
            qb = quad_pts(mid, d / (batch * eps2), X)
            return (d / (4 * eps2)) * (qa - qb)

        value = float(sens(plus).mean() / 2 - sens(minus).mean() / 2)
        return McrGradientResult(value, max(conds))
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")

    K = kernel if isinstance(kernel, np.ndarray) else support_gram(n, kernel)
    p = output_distribution(program).mass

    conds = []

    def quad(weights: np.ndarray, scale: float) -> np.ndarray:
        root = np.sqrt(scale * np.maximum(weights, 0.0))
        core = np.eye(len(root)) + root[:, None] * K * root[None, :]
        conds.append(float(np.linalg.cond(core)))
        # columns of (core^-1 D^{1/2} K): one solve shared by all x
        solved = np.linalg.solve(core, root[:, None] * K)
        return np.diag(K) - np.einsum("yx,yx->x", root[:, None] * K, solved)

    qa = quad(p + target.mass, d / (2 * eps2))
    qb = quad(p, d / eps2)
    sens = (d / (4 * eps2)) * (qa - qb)
    plus = output_distribution(shifted_program(program, flat_index, +1)).mass
    minus = output_distribution(shifted_program(program, flat_index, -1)).mass
    value = float(sens @ (plus - minus) / 2)
    return McrGradientResult(value, max(conds))
