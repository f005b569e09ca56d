"""Experiment orchestration: training loops, run records, sweeps, CLI core.

Five experiments share one record format:

  * GUMBEL_GAN — classical Gumbel-softmax generator vs. discriminator.
  * BORN_MMD  — quantum Born machine against the kernel MMD objective.
  * BORN_ADV  — Born machine generator vs. non-saturating discriminator.
  * BORN_MCR  — Born machine vs. a feature map trained to maximize the
                coding-rate reduction the generator minimizes.
  * FINETUNE  — MMD refinement continuing from a BORN_ADV record.

batch = 0 selects EXACT mode: the simulator's full output distribution
stands in for infinite sampling. All randomness flows from the config
seed through explicit numpy Generators; identical configs produce
byte-identical records (timing excluded).
"""

from __future__ import annotations

import io
import json
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from qborn.bas import BasSpec, bas_distribution
from qborn.distributions import (
    DiscreteDistribution,
    empirical_distribution,
    mode_coverage,
    total_variation,
)
from qborn.losses import (
    FeatureMapHandle,
    KernelSpec,
    McrConfig,
    clamp_scores,
    discriminator_loss,
    draw_target,
    gan_generator_gradients_exact,
    generator_loss,
    mcr_delta_r,
    mcr_delta_r_probability,
    mcr_gradients_nn,
    mmd_gradients_exact,
    mmd_loss_exact,
    mmd_loss_sampled,
    sample_matrix,
    support_matrix,
)
from qborn.mpqc import (
    AnsatzSpec,
    MpqcProgram,
    evolve,
    from_record,
    output_distribution,
    random_program,
    shift_distribution_pairs,
    shifted_program,
    to_record,
)
from qborn.neural import (
    AdamState,
    Discriminator,
    GumbelGenerator,
    TemperatureSchedule,
    adam_step,
)
from qborn.quantum import sample as sample_state

EXPERIMENTS = ("GUMBEL_GAN", "BORN_MMD", "BORN_ADV", "FINETUNE", "BORN_MCR")
ANSATZE = ("EXPERIMENT", "FULL_BLOCK")
ENCODINGS = ("01", "pm1")


@dataclass(frozen=True)
class TrainConfig:
    experiment: str
    rows: int = 2
    cols: int = 2
    ansatz: str = "EXPERIMENT"
    num_layers: int = 5  # used by FULL_BLOCK only
    batch: int = 0  # 0 = EXACT mode (full distributions)
    iterations: int = 2000
    learning_rate: float = 1e-3
    d_learning_rate: float = 1e-3
    d_steps: int = 2
    seed: int = 700
    bandwidths: tuple[float, ...] = (0.25, 1.0, 4.0)
    feature_dim: int = 2
    epsilon_sq: float = 0.5
    noise_dim: int = 2
    temp_start: float = 1e-2
    temp_end: float = 1e-4
    eval_samples: int = 16000
    train_eval_samples: int = 2000  # per-iteration TV estimate (classical only)
    disc_encoding: str = "01"
    normalized_tv: bool = True
    early_stop_window: int = 0  # 0 disables the TV-plateau early stop
    early_stop_threshold: float = 1e-4

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}")
        if self.ansatz not in ANSATZE:
            raise ValueError(f"ansatz must be one of {ANSATZE}")
        if self.disc_encoding not in ENCODINGS:
            raise ValueError(f"disc_encoding must be one of {ENCODINGS}")
        if self.iterations < 0 or self.batch < 0:
            raise ValueError("iterations and batch must be non-negative")
        if self.learning_rate <= 0 or self.d_learning_rate <= 0:
            raise ValueError("learning rates must be positive")
        if self.d_steps < 1:
            raise ValueError("d_steps must be >= 1")
        object.__setattr__(self, "bandwidths", tuple(float(b) for b in self.bandwidths))

    @property
    def num_qubits(self) -> int:
        return self.rows * self.cols

    @property
    def exact(self) -> bool:
        return self.batch == 0

    def bas_spec(self) -> BasSpec:
        return BasSpec(self.rows, self.cols)

    def kernel_spec(self) -> KernelSpec:
        return KernelSpec(self.bandwidths)

    def mcr_config(self) -> McrConfig:
        return McrConfig(self.feature_dim, self.epsilon_sq)

    def ansatz_spec(self) -> AnsatzSpec:
        if self.ansatz == "EXPERIMENT":
            return AnsatzSpec.experiment()
        return AnsatzSpec.full_block(self.num_layers)


@dataclass
class RunRecord:
    config: dict
    iterations: list
    generator_loss: list
    discriminator_loss: list  # entries may be None
    tv_norm: list
    tv_raw: list
    modes_covered: list
    invalid_mass: list
    final_distribution: list
    best_distribution: list
    final_model: dict
    best_model: dict
    best_iteration: int
    d_step_count: int
    wall_time: float = 0.0

    def __post_init__(self):
        lengths = {
            len(self.iterations),
            len(self.generator_loss),
            len(self.discriminator_loss),
            len(self.tv_norm),
            len(self.tv_raw),
            len(self.modes_covered),
            len(self.invalid_mass),
        }
        if len(lengths) != 1:
            raise ValueError("series lengths must match")

    @property
    def final_tv_norm(self) -> float:
        return self.tv_norm[-1]

    @property
    def best_tv_norm(self) -> float:
        return min(self.tv_norm)

    def to_json(self, include_timing: bool = False) -> str:
        data = asdict(self)
        if not include_timing:
            del data["wall_time"]
        return json.dumps(data, sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_json(text: str) -> "RunRecord":
        data = json.loads(text)
        data.setdefault("wall_time", 0.0)
        return RunRecord(**data)


class _SeriesTracker:
    """Accumulates the per-iteration series and the best-TV snapshot."""

    def __init__(self, target: DiscreteDistribution):
        self.target = target
        self.iterations = []
        self.generator_loss = []
        self.discriminator_loss = []
        self.tv_norm = []
        self.tv_raw = []
        self.modes_covered = []
        self.invalid_mass = []
        self.best_tv = float("inf")
        self.best_iteration = -1
        self.best_distribution = None
        self.best_model = None

    def log(self, iteration, dist, g_loss, d_loss, model_snapshot):
        cov = mode_coverage(dist, self.target)
        tvn = total_variation(dist, self.target, normalized=True)
        self.iterations.append(iteration)
        self.generator_loss.append(float(g_loss))
        self.discriminator_loss.append(None if d_loss is None else float(d_loss))
        self.tv_norm.append(tvn)
        self.tv_raw.append(total_variation(dist, self.target, normalized=False))
        self.modes_covered.append(cov.num_covered)
        self.invalid_mass.append(cov.invalid_mass)
        if tvn < self.best_tv:
            self.best_tv = tvn
            self.best_iteration = iteration
            self.best_distribution = dist.mass.tolist()
            self.best_model = model_snapshot

    def plateaued(self, window: int, threshold: float) -> bool:
        if window <= 0 or len(self.tv_norm) <= window:
            return False
        recent = self.tv_norm[-window - 1 :]
        return max(recent) - min(recent) < threshold

    def record(self, config: TrainConfig, final_dist, final_model, d_steps, t0) -> RunRecord:
        return RunRecord(
            config=asdict(config),
            iterations=self.iterations,
            generator_loss=self.generator_loss,
            discriminator_loss=self.discriminator_loss,
            tv_norm=self.tv_norm,
            tv_raw=self.tv_raw,
            modes_covered=self.modes_covered,
            invalid_mass=self.invalid_mass,
            final_distribution=final_dist.mass.tolist(),
            best_distribution=self.best_distribution,
            final_model=final_model,
            best_model=self.best_model,
            best_iteration=self.best_iteration,
            d_step_count=d_steps,
            wall_time=time.monotonic() - t0,
        )


# integer stream tags keeping derived RNGs disjoint from the training stream
_STREAM_TRAIN_EVAL = 1
_STREAM_FINETUNE = 2
_STREAM_EVALUATE = 3


def _rng_for(config: TrainConfig, stream: tuple[int, ...] = ()) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([config.seed, *stream]))
    )


def _encode(X: np.ndarray, encoding: str) -> np.ndarray:
    return X if encoding == "01" else 2.0 * X - 1.0


# ---------------------------------------------------------------------------
# gradient vectors shared by the Born training loops
# ---------------------------------------------------------------------------


def _draw_rows(mass: np.ndarray, support: np.ndarray, batch: int, rng) -> np.ndarray:
    """Bit-vector batch drawn from a distribution over the support rows."""
    return support[rng.choice(len(mass), size=batch, p=mass)]


def _mmd_grad_vector(program, target, spec, batch, rng):
    if batch == 0:
        return mmd_gradients_exact(program, target, spec)
    support = support_matrix(program.num_qubits)
    pairs = shift_distribution_pairs(program)
    mid = _draw_rows(output_distribution(program).mass, support, batch, rng)
    tgt = sample_matrix(draw_target(target, batch, rng))
    grad = np.empty(program.num_parameters)
    for i in range(len(grad)):
        plus = _draw_rows(pairs[i, 0], support, batch, rng)
        minus = _draw_rows(pairs[i, 1], support, batch, rng)
        grad[i] = (
            spec.matrix(plus, mid).mean()
            - spec.matrix(minus, mid).mean()
            - spec.matrix(plus, tgt).mean()
            + spec.matrix(minus, tgt).mean()
        )
    return grad


def _gan_grad_vector(program, score_fn, batch, rng):
    if batch == 0:
        return gan_generator_gradients_exact(program, score_fn)
    support = support_matrix(program.num_qubits)
    pairs = shift_distribution_pairs(program)
    grad = np.empty(program.num_parameters)
    for i in range(len(grad)):
        plus = _draw_rows(pairs[i, 0], support, batch, rng)
        minus = _draw_rows(pairs[i, 1], support, batch, rng)
        lp = np.log(clamp_scores(np.asarray(score_fn(plus)).reshape(-1)))
        lm = np.log(clamp_scores(np.asarray(score_fn(minus)).reshape(-1)))
        grad[i] = 0.5 * lm.mean() - 0.5 * lp.mean()
    return grad


def _mcr_grad_vector(program, features, target, cfg, batch, rng):
    if batch == 0:
        return mcr_gradients_nn(program, features, target, cfg)
    from qborn.losses import _mcr_batch_sensitivity

    support = support_matrix(program.num_qubits)
    pairs = shift_distribution_pairs(program)
    mid = sample_state(evolve(program), batch, rng)
    tgt = draw_target(target, batch, rng)
    sens = _mcr_batch_sensitivity(mid, tgt, features, cfg)
    grad = np.empty(program.num_parameters)
    for i in range(len(grad)):
        plus = _draw_rows(pairs[i, 0], support, batch, rng)
        minus = _draw_rows(pairs[i, 1], support, batch, rng)
        grad[i] = sens(plus).mean() / 2 - sens(minus).mean() / 2
    return grad


# ---------------------------------------------------------------------------
# discriminator updates
# ---------------------------------------------------------------------------


def _disc_gan_step(disc, state, real_X, fake_X, w_real, w_fake):
    """One weighted non-saturating cross-entropy update. Returns L_D."""
    s_real, cache_r = disc.score_with_cache(real_X)
    s_fake, cache_f = disc.score_with_cache(fake_X)
    cr, cf = clamp_scores(s_real), clamp_scores(s_fake)
    loss = float(-(w_real * np.log(cr)).sum() - (w_fake * np.log1p(-cf)).sum())
    tg_r, hg_r, _ = disc.score_backward(cache_r, -w_real / cr)
    tg_f, hg_f, _ = disc.score_backward(cache_f, w_fake / (1.0 - cf))
    grads = [a + b for a, b in zip(tg_r + hg_r, tg_f + hg_f)]
    params = adam_step(disc.adversarial_parameters(), grads, state)
    disc.set_adversarial_parameters(params)
    return loss


def _disc_mcr_step(disc, state, fake_X, real_X, w_fake, w_real, cfg):
    """Feature-map update ascending the coding-rate reduction.

    Weighted second moments C = sum_x w_x phi(x) phi(x)^T; the gradient of
    (1/2) logdet(I + c C) in phi(x) is c w_x (I + c C)^{-1} phi(x).
    Returns the current DeltaR value.
    """
    d, eps2 = cfg.feature_dim, cfg.epsilon_sq
    f_fake, cache_f = disc.features_with_cache(fake_X)
    f_real, cache_r = disc.features_with_cache(real_X)

    def moment(F, w):
        return F.T @ (w[:, None] * F)

    Cp, Cq = moment(f_fake, w_fake), moment(f_real, w_real)
    A = np.eye(d) + (d / (2 * eps2)) * (Cp + Cq)
    Bp = np.eye(d) + (d / eps2) * Cp
    Bq = np.eye(d) + (d / eps2) * Cq
    A_inv, Bp_inv, Bq_inv = np.linalg.inv(A), np.linalg.inv(Bp), np.linalg.inv(Bq)

    def logdet(M):
        return float(np.linalg.slogdet(M)[1])

    delta_r = 0.5 * logdet(A) - 0.25 * logdet(Bp) - 0.25 * logdet(Bq)
    c = d / (2 * eps2)
    d_fake = c * w_fake[:, None] * (f_fake @ A_inv.T - f_fake @ Bp_inv.T)
    d_real = c * w_real[:, None] * (f_real @ A_inv.T - f_real @ Bq_inv.T)
    tg_f, hg_f, _ = disc.features_backward(cache_f, d_fake)
    tg_r, hg_r, _ = disc.features_backward(cache_r, d_real)
    # ascend DeltaR: step against the negated gradient
    grads = [-(a + b) for a, b in zip(tg_f + hg_f, tg_r + hg_r)]
    params = adam_step(disc.feature_parameters(), grads, state)
    disc.set_feature_parameters(params)
    return delta_r


# ---------------------------------------------------------------------------
# training loops
# ---------------------------------------------------------------------------


def _born_model_snapshot(program, disc=None) -> dict:
    snap = {"kind": "mpqc", "program": to_record(program)}
    if disc is not None:
        snap["discriminator"] = disc.to_record()
    return snap


def _run_born(config: TrainConfig) -> RunRecord:
    t0 = time.monotonic()
    rng = _rng_for(config)
    target = bas_distribution(config.bas_spec())
    spec = config.kernel_spec()
    n = config.num_qubits
    program = random_program(n, config.ansatz_spec(), rng)
    return _train_born(config, program, target, spec, rng, t0)


def _train_born(config, program, target, spec, rng, t0) -> RunRecord:
    adversarial = config.experiment in ("BORN_ADV", "BORN_MCR")
    mcr = config.experiment == "BORN_MCR"
    n = config.num_qubits
    disc = None
    d_state = None
    features = None
    if adversarial:
        disc = Discriminator.init(rng, num_bits=n, feature_dim=config.feature_dim)
        d_params = disc.feature_parameters() if mcr else disc.adversarial_parameters()
        d_state = AdamState.for_params(d_params, lr=config.d_learning_rate)
        if mcr:
            features = FeatureMapHandle(
                disc.feature_dim,
                lambda X: disc.features(_encode(X, config.disc_encoding)),
            )
    g_state = AdamState.for_params([program.flat_parameters()], lr=config.learning_rate)
    cfg_mcr = config.mcr_config() if mcr else None
    support = support_matrix(n)
    tracker = _SeriesTracker(target)
    d_step_count = 0

    def score_fn(X):
        return disc.score(_encode(X, config.disc_encoding))

    def current_loss(dist):
        if config.experiment in ("BORN_MMD", "FINETUNE"):
            return mmd_loss_exact(dist, target, spec)
        if mcr:
            return mcr_delta_r_probability(dist, target, features, cfg_mcr)
        return float(-(dist.mass * np.log(clamp_scores(score_fn(support)))).sum())

    dist = output_distribution(program)
    tracker.log(0, dist, current_loss(dist), None, _born_model_snapshot(program, disc))

    for it in range(1, config.iterations + 1):
        d_loss = None
        if adversarial:
            for _ in range(config.d_steps):
                if config.exact:
                    fake_X, w_fake = support, dist.mass
                    real_X, w_real = support, target.mass
                else:
                    fake_X = sample_matrix(sample_state(evolve(program), config.batch, rng))
                    real_X = sample_matrix(draw_target(target, config.batch, rng))
                    w_fake = np.full(config.batch, 1.0 / config.batch)
                    w_real = np.full(config.batch, 1.0 / config.batch)
                enc_f = _encode(fake_X, config.disc_encoding)
                enc_r = _encode(real_X, config.disc_encoding)
                if mcr:
                    d_loss = _disc_mcr_step(disc, d_state, enc_f, enc_r, w_fake, w_real, cfg_mcr)
                else:
                    d_loss = _disc_gan_step(disc, d_state, enc_r, enc_f, w_real, w_fake)
                d_step_count += 1

        if config.experiment in ("BORN_MMD", "FINETUNE"):
            grad = _mmd_grad_vector(program, target, spec, config.batch, rng)
        elif mcr:
            grad = _mcr_grad_vector(program, features, target, cfg_mcr, config.batch, rng)
        else:
            grad = _gan_grad_vector(program, score_fn, config.batch, rng)
        (new_params,) = adam_step([program.flat_parameters()], [grad], g_state)
        program = program.with_flat_parameters(new_params)

        dist = output_distribution(program)
        tracker.log(it, dist, current_loss(dist), d_loss, _born_model_snapshot(program, disc))
        if tracker.plateaued(config.early_stop_window, config.early_stop_threshold):
            break

    return tracker.record(
        config, dist, _born_model_snapshot(program, disc), d_step_count, t0
    )


def _classical_distribution(gen, temperature, rng, samples, num_bits) -> DiscreteDistribution:
    return empirical_distribution(gen.hard_sample(samples, temperature, rng), num_bits)


def _run_gumbel_gan(config: TrainConfig) -> RunRecord:
    t0 = time.monotonic()
    rng = _rng_for(config)
    target = bas_distribution(config.bas_spec())
    n = config.num_qubits
    batch = config.batch if config.batch > 0 else 64
    gen = GumbelGenerator.init(rng, noise_dim=config.noise_dim, num_bits=n)
    disc = Discriminator.init(rng, num_bits=n, feature_dim=config.feature_dim)
    g_state = AdamState.for_params(gen.net.parameters(), lr=config.learning_rate)
    d_state = AdamState.for_params(disc.adversarial_parameters(), lr=config.d_learning_rate)
    schedule = TemperatureSchedule(config.temp_start, config.temp_end)
    tracker = _SeriesTracker(target)
    d_step_count = 0

    def snapshot():
        return {
            "kind": "gumbel_gan",
            "generator": gen.net.to_record(),
            "discriminator": disc.to_record(),
            "noise_dim": gen.noise_dim,
        }

    tau = schedule.at(0, config.iterations)
    eval_rng = _rng_for(config, (_STREAM_TRAIN_EVAL, 0))
    dist = _classical_distribution(gen, tau, eval_rng, config.train_eval_samples, n)
    init_soft, _ = gen.sample_soft(batch, tau, eval_rng)
    init_loss = generator_loss(disc.score(_encode(init_soft, config.disc_encoding)))
    tracker.log(0, dist, init_loss, None, snapshot())

    for it in range(1, config.iterations + 1):
        tau = schedule.at(it - 1, config.iterations)
        d_loss = None
        for _ in range(config.d_steps):
            soft, _ = gen.sample_soft(batch, tau, rng)
            real = sample_matrix(draw_target(target, batch, rng))
            w = np.full(batch, 1.0 / batch)
            d_loss = _disc_gan_step(
                disc,
                d_state,
                _encode(real, config.disc_encoding),
                _encode(soft, config.disc_encoding),
                w,
                w,
            )
            d_step_count += 1

        soft, cache = gen.sample_soft(batch, tau, rng)
        enc = _encode(soft, config.disc_encoding)
        scores, s_cache = disc.score_with_cache(enc)
        cs = clamp_scores(scores)
        g_loss = generator_loss(scores)
        # d(-mean ln D)/d score, then through the discriminator input
        _, _, d_input = disc.score_backward(s_cache, -1.0 / (len(cs) * cs))
        if config.disc_encoding == "pm1":
            d_input = 2.0 * d_input
        grads = gen.backward(cache, d_input)
        gen.net.set_parameters(adam_step(gen.net.parameters(), grads, g_state))

        eval_rng = _rng_for(config, (_STREAM_TRAIN_EVAL, it))
        dist = _classical_distribution(gen, tau, eval_rng, config.train_eval_samples, n)
        tracker.log(it, dist, g_loss, d_loss, snapshot())
        if tracker.plateaued(config.early_stop_window, config.early_stop_threshold):
            break

    return tracker.record(config, dist, snapshot(), d_step_count, t0)


def run_experiment(config: TrainConfig) -> RunRecord:
    """Dispatch on the experiment id; deterministic given the seed."""
    if config.experiment == "GUMBEL_GAN":
        return _run_gumbel_gan(config)
    if config.experiment in ("BORN_MMD", "BORN_ADV", "BORN_MCR"):
        return _run_born(config)
    if config.experiment == "FINETUNE":
        raise ValueError("FINETUNE requires a source record; use finetune()")
    raise ValueError(f"unknown experiment {config.experiment!r}")


def finetune(
    adv_record: RunRecord,
    config: TrainConfig,
) -> RunRecord:
    """Kernel-loss refinement continuing from an adversarial run's final
    circuit parameters (no discriminator involved)."""
    src_config = adv_record.config
    if src_config["experiment"] != "BORN_ADV":
        raise ValueError("finetune expects a BORN_ADV record")
    if config.experiment != "FINETUNE":
        raise ValueError("config.experiment must be FINETUNE")
    if config.ansatz != src_config["ansatz"]:
        raise ValueError("ansatz mismatch between record and fine-tune config")
    program = from_record(adv_record.final_model["program"])
    if program.num_qubits != config.num_qubits:
        raise ValueError("qubit count mismatch")
    t0 = time.monotonic()
    rng = _rng_for(config, (_STREAM_FINETUNE,))
    target = bas_distribution(config.bas_spec())
    return _train_born(config, program, target, config.kernel_spec(), rng, t0)


# ---------------------------------------------------------------------------
# evaluation / sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvaluationReport:
    tv_norm: float
    tv_raw: float
    sampled_tv_norm: float
    sampled_tv_raw: float
    modes_covered: int
    modes_total: int
    invalid_mass: float
    sample_count: int
    empirical: list

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))


def model_distribution(
    record: RunRecord, rng: np.random.Generator, sample_count: int, best: bool = False
) -> tuple[DiscreteDistribution, DiscreteDistribution]:
    """(exact-or-stored distribution, freshly sampled empirical) pair."""
    config = TrainConfig(**record.config)
    n = config.num_qubits
    model = record.best_model if best else record.final_model
    stored = DiscreteDistribution(
        n, np.array(record.best_distribution if best else record.final_distribution)
    )
    if model["kind"] == "mpqc":
        program = from_record(model["program"])
        samples = sample_state(evolve(program), sample_count, rng)
    else:
        from qborn.neural import Mlp

        gen = GumbelGenerator(Mlp.from_record(model["generator"]), model["noise_dim"])
        samples = gen.hard_sample(sample_count, config.temp_end, rng)
    return stored, empirical_distribution(samples, n)


def evaluate(record: RunRecord, sample_count: int = 16000, best: bool = False) -> EvaluationReport:
    config = TrainConfig(**record.config)
    rng = _rng_for(config, (_STREAM_EVALUATE,))
    target = bas_distribution(config.bas_spec())
    stored, empirical = model_distribution(record, rng, sample_count, best)
    cov = mode_coverage(stored, target)
    return EvaluationReport(
        tv_norm=total_variation(stored, target, normalized=True),
        tv_raw=total_variation(stored, target, normalized=False),
        sampled_tv_norm=total_variation(empirical, target, normalized=True),
        sampled_tv_raw=total_variation(empirical, target, normalized=False),
        modes_covered=cov.num_covered,
        modes_total=cov.num_covered + len(cov.missed),
        invalid_mass=cov.invalid_mass,
        sample_count=sample_count,
        empirical=empirical.mass.tolist(),
    )


def sweep(base: TrainConfig, batches: list[int]) -> list[RunRecord]:
    """One run per batch size (0 = EXACT); each run gets an RNG stream
    derived from (seed, index) so parallel and sequential execution agree."""
    if not batches:
        raise ValueError("empty batch axis")
    records = []
    for index, batch in enumerate(batches):
        config = replace(base, batch=batch)
        # derive an independent sub-seed so runs differ only by their stream
        sub = np.random.SeedSequence([base.seed, index]).generate_state(1)[0]
        config = replace(config, seed=int(sub)) if len(batches) > 1 else config
        records.append(run_experiment(config))
    return records


def sweep_summary(records: list[RunRecord]) -> str:
    """CSV: batch,final_tv_norm,final_tv_raw,best_tv_norm,invalid_mass,modes_covered."""
    buf = io.StringIO()
    buf.write("batch,final_tv_norm,final_tv_raw,best_tv_norm,invalid_mass,modes_covered\n")
    for rec in records:
        buf.write(
            f"{rec.config['batch']},{rec.tv_norm[-1]:.17g},{rec.tv_raw[-1]:.17g},"
            f"{min(rec.tv_norm):.17g},{rec.invalid_mass[-1]:.17g},{rec.modes_covered[-1]}\n"
        )
    return buf.getvalue()


def series_csv(record: RunRecord) -> str:
    buf = io.StringIO()
    buf.write(
        "iteration,generator_loss,discriminator_loss,tv_norm,tv_raw,modes_covered,invalid_mass\n"
    )
    for i in range(len(record.iterations)):
        d = record.discriminator_loss[i]
        buf.write(
            f"{record.iterations[i]},{record.generator_loss[i]:.17g},"
            f"{'' if d is None else format(d, '.17g')},"
            f"{record.tv_norm[i]:.17g},{record.tv_raw[i]:.17g},"
            f"{record.modes_covered[i]},{record.invalid_mass[i]:.17g}\n"
        )
    return buf.getvalue()
