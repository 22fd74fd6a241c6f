"""Alternating min-max training of the mean and variance networks.

Every outer step runs ``ns`` NetD updates, which ascend tau in mu, followed
by one NetV update of v. Each update draws a fresh class-balanced batch and
a fresh NetG sample.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Literal, Protocol, Sequence

import numpy as np

from ..autodiff import Tape, Tensor, backward
from ..coding_rate.rates import PAIRWISE_SCOPES, ObjectiveBreakdown, RateConfig, objective_tau
from ..config import (
    DEFAULT_ADAM_EPSILON,
    DEFAULT_BATCH_PER_CLASS,
    DEFAULT_BETA1,
    DEFAULT_BETA2,
    DEFAULT_INIT_STD,
    DEFAULT_K_NN,
    DEFAULT_LR,
    DEFAULT_NS,
    DEFAULT_NUMSTEPS,
    DEFAULT_SIGMA_INIT,
)
from ..data.views import Batch, DatasetView, balanced_batches
from ..encoders.manifest import ArchitectureManifest
from ..encoders.networks import forward
from ..errors import AsymmetricInputError, ConfigError, NumericAbort
from ..eval_knn.runner import evaluate
from ..stochastic.params import MeanParams, ParamSet, VarianceParams
from ..stochastic.sampling import (
    NoiseSource,
    clamp_variance,
    init_params,
    reparameterize,
    sigma_of,
)
from .metrics import MetricsRow, RunMetrics
from .optimizer import OptimizerState, adam_update

Player = Literal["D", "V"]

# Failures inside a step that end the run as a NumericAbort.
NUMERIC_ERRORS = (ArithmeticError, AsymmetricInputError)


@dataclass(frozen=True)
class TrainConfig:
    numsteps: int = DEFAULT_NUMSTEPS
    ns: int = DEFAULT_NS
    lr: float = DEFAULT_LR
    beta1: float = DEFAULT_BETA1
    beta2: float = DEFAULT_BETA2
    adam_epsilon: float = DEFAULT_ADAM_EPSILON
    batch_per_class: int = DEFAULT_BATCH_PER_CLASS
    seed: int = 0
    sigma_init: float = DEFAULT_SIGMA_INIT
    init_std: float = DEFAULT_INIT_STD
    netv_direction: str = "min"
    pairwise_scope: str = "per_class"
    detach_generator_for_d: bool = False
    zero_sigma: bool = False

    def __post_init__(self) -> None:
        if self.numsteps < 1:
            raise ConfigError(f"numsteps must be >= 1, got {self.numsteps}")
        if self.ns < 1:
            raise ConfigError(f"ns must be >= 1, got {self.ns}")
        if not self.lr > 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        for key in ("beta1", "beta2"):
            value = getattr(self, key)
            if not 0.0 <= value < 1.0:
                raise ConfigError(f"{key} must lie in [0, 1), got {value}")
        if not self.adam_epsilon > 0:
            raise ConfigError(f"adam_epsilon must be positive, got {self.adam_epsilon}")
        if self.batch_per_class < 1:
            raise ConfigError(f"batch_per_class must be >= 1, got {self.batch_per_class}")
        if self.sigma_init < 0:
            raise ConfigError(f"sigma_init must be >= 0, got {self.sigma_init}")
        if not self.init_std > 0:
            raise ConfigError(f"init_std must be positive, got {self.init_std}")
        if self.netv_direction not in ("min", "max"):
            raise ConfigError(f"netv_direction must be 'min' or 'max', got {self.netv_direction!r}")
        if self.pairwise_scope not in PAIRWISE_SCOPES:
            raise ConfigError(
                f"pairwise_scope must be one of {PAIRWISE_SCOPES}, got {self.pairwise_scope!r}"
            )

    @property
    def netv_update(self) -> str:
        """Adam direction of the NetV update."""
        return "descend" if self.netv_direction == "min" else "ascend"


class MetricsSink(Protocol):
    """Receives every metrics row as it is produced."""

    def write(self, row: MetricsRow) -> None: ...

    def close(self) -> None: ...


@dataclass
class TrainingData:
    train: DatasetView
    test: DatasetView | None = None  # no E rows without a test view


@dataclass
class RunResult:
    mu: MeanParams
    var: VarianceParams
    metrics: RunMetrics
    opt_d: OptimizerState = field(repr=False, default_factory=OptimizerState)
    opt_v: OptimizerState = field(repr=False, default_factory=OptimizerState)


CheckpointHook = Callable[[int, MeanParams, VarianceParams], None]


def _game_objective(
    player: Player,
    mu: MeanParams,
    var: VarianceParams,
    batch: Batch,
    manifest: ArchitectureManifest,
    train_cfg: TrainConfig,
    rate_cfg: RateConfig,
    noise: NoiseSource,
) -> tuple[ObjectiveBreakdown, ParamSet, int]:
    """tau on one batch with a fresh NetG, and its gradient for ``player``."""
    draw_id = noise.next_draw()
    eps = noise.epsilon_set(draw_id, mu)
    mu_t = mu.as_tensors(requires_grad=player == "D")
    v_t = var.as_tensors(requires_grad=player == "V")
    theta_mu: dict[str, Tensor] = mu_t
    if player == "D" and train_cfg.detach_generator_for_d:
        theta_mu = {name: t.detach() for name, t in mu_t.items()}

    tape = Tape()
    with tape:
        theta = reparameterize(theta_mu, v_t, eps, zero_sigma=train_cfg.zero_sigma)
        z = forward(manifest, mu_t, batch.images)
        zhat = forward(manifest, theta, batch.images)
        breakdown = objective_tau(z, zhat, batch.partition, rate_cfg)

    target = mu_t if player == "D" else v_t
    if len(tape):
        backward(breakdown.loss, tape)
        grads = ParamSet.from_tensor_grads(target)
    else:
        # tau does not depend on this player (v under zero_sigma).
        grads = ParamSet.zeros_like(target)
    return breakdown, grads, draw_id


def _row(
    step: int,
    inner: int,
    phase: Player,
    breakdown: ObjectiveBreakdown,
    var: VarianceParams,
    draw_id: int,
    zero_sigma: bool,
) -> MetricsRow:
    return MetricsRow(
        step=step,
        inner=inner,
        phase=phase,
        draw_id=draw_id,
        tau=breakdown.tau,
        dr_z=breakdown.dr_z,
        dr_zhat=breakdown.dr_zhat,
        pairwise_sum=breakdown.pairwise_sum,
        sigma_mean=sigma_of(var, zero_sigma).mean(),
    )


def netd_step(
    mu: MeanParams,
    var: VarianceParams,
    batch: Batch,
    manifest: ArchitectureManifest,
    train_cfg: TrainConfig,
    rate_cfg: RateConfig,
    opt_state: OptimizerState,
    noise: NoiseSource,
    step: int = 0,
    inner: int = 0,
) -> MetricsRow:
    """One ascent step of mu on tau; v is untouched.

    The gradient flows through Z = f(mu) and through the mu term of the
    NetG sample unless ``detach_generator_for_d`` is set.
    """
    breakdown, grads, draw_id = _game_objective(
        "D", mu, var, batch, manifest, train_cfg, rate_cfg, noise
    )
    adam_update(
        mu,
        grads,
        opt_state,
        lr=train_cfg.lr,
        beta1=train_cfg.beta1,
        beta2=train_cfg.beta2,
        eps=train_cfg.adam_epsilon,
        direction="ascend",
    )
    return _row(step, inner, "D", breakdown, var, draw_id, train_cfg.zero_sigma)


def netv_step(
    mu: MeanParams,
    var: VarianceParams,
    batch: Batch,
    manifest: ArchitectureManifest,
    train_cfg: TrainConfig,
    rate_cfg: RateConfig,
    opt_state: OptimizerState,
    noise: NoiseSource,
    step: int = 0,
    inner: int = 0,
) -> MetricsRow:
    """One update of v through sigma * eps; mu is untouched.

    Descends tau by default; ``netv_direction="max"`` ascends instead.
    """
    breakdown, grads, draw_id = _game_objective(
        "V", mu, var, batch, manifest, train_cfg, rate_cfg, noise
    )
    adam_update(
        var,
        grads,
        opt_state,
        lr=train_cfg.lr,
        beta1=train_cfg.beta1,
        beta2=train_cfg.beta2,
        eps=train_cfg.adam_epsilon,
        direction=train_cfg.netv_update,
    )
    clamp_variance(var)
    return _row(step, inner, "V", breakdown, var, draw_id, train_cfg.zero_sigma)


def _emit(row: MetricsRow, metrics: RunMetrics, sinks: Sequence[MetricsSink]) -> None:
    metrics.record(row)
    for sink in sinks:
        sink.write(row)


def run(
    train_cfg: TrainConfig,
    rate_cfg: RateConfig,
    manifest: ArchitectureManifest,
    data: TrainingData,
    sinks: Sequence[MetricsSink] = (),
    k_nn: int = DEFAULT_K_NN,
    eval_every: int = 1,
    checkpoint_every: int = 0,
    on_checkpoint: CheckpointHook | None = None,
    record_wall_clock: bool = False,
) -> RunResult:
    """Train from a fresh initialization; outer steps are numbered from 1.

    An E row follows every ``eval_every``-th outer step and the last one.
    ``on_checkpoint`` is called after every ``checkpoint_every``-th outer
    step. Sinks are closed when the run ends, including on abort.
    """
    if manifest.feature_dim != rate_cfg.feature_dim:
        raise ConfigError(
            f"manifest feature_dim {manifest.feature_dim} != rate feature_dim {rate_cfg.feature_dim}"
        )
    if eval_every < 1:
        raise ConfigError(f"eval_every must be >= 1, got {eval_every}")

    init_seq, batch_seq = np.random.SeedSequence(train_cfg.seed).spawn(2)
    mu, var = init_params(
        manifest, train_cfg.init_std, train_cfg.sigma_init, np.random.default_rng(init_seq)
    )
    batches = balanced_batches(
        data.train, train_cfg.batch_per_class, np.random.default_rng(batch_seq)
    )
    noise = NoiseSource(train_cfg.seed)
    opt_d = OptimizerState.for_params(mu)
    opt_v = OptimizerState.for_params(var)
    metrics = RunMetrics()

    def timed(fn, *args, **kwargs):
        start = time.perf_counter()
        row = fn(*args, **kwargs)
        if record_wall_clock:
            row.ms = (time.perf_counter() - start) * 1000.0
        return row

    try:
        for step in range(1, train_cfg.numsteps + 1):
            for inner in range(train_cfg.ns + 2):
                phase = "D" if inner < train_cfg.ns else ("V" if inner == train_cfg.ns else "E")
                try:
                    if phase == "D":
                        row = timed(
                            netd_step, mu, var, next(batches), manifest,
                            train_cfg, rate_cfg, opt_d, noise, step, inner,
                        )
                    elif phase == "V":
                        row = timed(
                            netv_step, mu, var, next(batches), manifest,
                            train_cfg, rate_cfg, opt_v, noise, step, inner,
                        )
                    elif data.test is not None and (
                        step % eval_every == 0 or step == train_cfg.numsteps
                    ):
                        start = time.perf_counter()
                        report = evaluate(
                            mu, var, manifest, data.train, data.test, k_nn, noise,
                            step=step, zero_sigma=train_cfg.zero_sigma,
                        )
                        ms = (time.perf_counter() - start) * 1000.0 if record_wall_clock else None
                        row = MetricsRow.from_eval(report, inner, ms)
                    else:
                        continue
                except NUMERIC_ERRORS as e:
                    raise NumericAbort(step, inner, phase, e) from e
                _emit(row, metrics, sinks)

            if on_checkpoint is not None and checkpoint_every and step % checkpoint_every == 0:
                on_checkpoint(step, mu, var)
    finally:
        for sink in sinks:
            sink.close()

    return RunResult(mu=mu, var=var, metrics=metrics, opt_d=opt_d, opt_v=opt_v)
