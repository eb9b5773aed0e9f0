"""
Losses and the full-batch Adam loop.

A loss maps a model table to (value, dLoss/dmass); the model's pullback
turns the table cotangent into a parameter gradient. The MaxEnt dual is
the one objective evaluated directly on parameters.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractViolation, TrainingDivergence
from .models.maxent_model import MaxEntModel
from .walsh import ParityBand, ProbabilityTable, fwht

logger = logging.getLogger("parity_bench.trainer")

LOSS_KINDS = ("parity", "mse", "cross_entropy", "maxent_dual")


@dataclass(frozen=True, eq=False)
class LossSpec:
    """Which objective to train on, with the data it needs.

    Attributes:
        kind: One of LOSS_KINDS.
        band: Masks and target moments (parity and maxent_dual).
        train_table: Empirical table of the sample (mse and cross_entropy).
        support: States summed over by mse.
    """

    kind: str
    band: ParityBand = None
    train_table: ProbabilityTable = None
    support: np.ndarray = None

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ContractViolation(f"unknown loss kind '{self.kind}'")
        if self.kind in ("parity", "maxent_dual") and self.band is None:
            raise ContractViolation(f"{self.kind} loss needs a band")
        if self.kind in ("mse", "cross_entropy") and self.train_table is None:
            raise ContractViolation(f"{self.kind} loss needs a train table")
        if self.kind == "mse":
            if self.support is None or len(self.support) == 0:
                raise ContractViolation("mse loss needs a nonempty support")
            object.__setattr__(
                self, "support", np.asarray(self.support, dtype=np.int64)
            )


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float = 0.05
    steps: int = 600
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigurationError(
                f"Invalid learning rate: {self.learning_rate}"
            )
        if self.steps < 0:
            raise ConfigurationError(f"Invalid step count: {self.steps}")
        if not 0.0 <= self.beta1 < 1.0:
            raise ConfigurationError(f"Invalid beta1 parameter: {self.beta1}")
        if not 0.0 <= self.beta2 < 1.0:
            raise ConfigurationError(f"Invalid beta2 parameter: {self.beta2}")
        if not self.epsilon > 0:
            raise ConfigurationError(f"Invalid epsilon value: {self.epsilon}")


class AdamOptimizer:
    """Adam on a flat numpy parameter vector."""

    def __init__(self, shape, config=None):
        self.config = config or OptimizerConfig()
        self.m = np.zeros(shape)
        self.v = np.zeros(shape)
        self.t = 0

    def step(self, params, grad):
        """Return the updated parameters; the input array is not modified."""
        c = self.config
        self.t += 1
        self.m = c.beta1 * self.m + (1 - c.beta1) * grad
        self.v = c.beta2 * self.v + (1 - c.beta2) * grad * grad
        m_hat = self.m / (1 - c.beta1 ** self.t)
        v_hat = self.v / (1 - c.beta2 ** self.t)
        return params - c.learning_rate * m_hat / (np.sqrt(v_hat) + c.epsilon)


def parity_loss_and_grad(mass, band):
    """Mean squared moment mismatch and its gradient in the table."""
    residual = fwht(mass)[band.masks] - band.target_moments
    coef = np.zeros(mass.shape[-1])
    np.add.at(coef, band.masks, residual)
    return float(np.mean(residual ** 2)), (2.0 / band.K) * fwht(coef)


def mse_loss_and_grad(mass, train_table, support):
    diff = mass[support] - train_table.mass[support]
    grad = np.zeros(mass.shape[-1])
    grad[support] = (2.0 / support.size) * diff
    return float(np.mean(diff ** 2)), grad


def cross_entropy_loss_and_grad(mass, train_table):
    observed = train_table.mass > 0
    p = train_table.mass[observed]
    q = mass[observed]
    grad = np.zeros(mass.shape[-1])
    with np.errstate(divide="ignore"):
        value = float(-np.sum(p * np.log(q)))
        grad[observed] = -p / q
    return value, grad


def parity_loss(model_table, band):
    if model_table.n != band.n:
        raise ContractViolation("table and band widths differ")
    return parity_loss_and_grad(model_table.mass, band)[0]


def mse_loss(model_table, train_table, support):
    support = np.asarray(support, dtype=np.int64)
    if support.size == 0:
        raise ContractViolation("mse loss needs a nonempty support")
    return mse_loss_and_grad(model_table.mass, train_table, support)[0]


def cross_entropy_loss(model_table, train_table):
    """Empirical cross entropy.

    Raises:
        TrainingDivergence: If the model gives zero mass to an observed state.
    """
    value = cross_entropy_loss_and_grad(model_table.mass, train_table)[0]
    if not np.isfinite(value):
        raise TrainingDivergence("cross entropy is infinite on observed data")
    return value


def _table_loss(loss):
    if loss.kind == "parity":
        return lambda mass: parity_loss_and_grad(mass, loss.band)
    if loss.kind == "mse":
        return lambda mass: mse_loss_and_grad(mass, loss.train_table, loss.support)
    return lambda mass: cross_entropy_loss_and_grad(mass, loss.train_table)


def objective_for(model, loss):
    """Callable mapping parameters to (loss value, parameter gradient)."""
    if loss.kind == "maxent_dual":
        if not isinstance(model, MaxEntModel):
            raise ContractViolation("maxent_dual needs a MaxEnt model")
        if model.band is not loss.band:
            model = MaxEntModel(loss.band, name=model.name)
        return model.objective_and_gradient

    table_loss = _table_loss(loss)

    def objective(params):
        mass, pullback = model.forward(params)
        value, cotangent = table_loss(mass)
        if not np.isfinite(value):
            return value, None
        return value, pullback(cotangent)

    return objective


@dataclass(frozen=True, eq=False)
class TrainResult:
    params: np.ndarray
    loss_trace: np.ndarray
    final_loss: float

    @property
    def steps(self):
        return int(self.loss_trace.size)


def train(model, loss, opt=None, rng=None, params=None):
    """Run opt.steps Adam updates on the exact objective.

    Args:
        model: A GenerativeModel.
        loss: LossSpec to minimise.
        opt: OptimizerConfig; defaults to the reference protocol.
        rng: Generator for the initial parameters when params is None.
        params: Explicit starting parameters.

    Returns:
        TrainResult with final parameters, the per-step loss trace and the
        loss at the final parameters.

    Raises:
        TrainingDivergence: On a non-finite loss or gradient.
    """
    opt = opt or OptimizerConfig()
    if params is None:
        if rng is None:
            raise ContractViolation("train needs either params or an rng")
        params = model.init_params(rng)
    params = np.array(model.check_params(params), copy=True)
    objective = objective_for(model, loss)
    optimizer = AdamOptimizer(params.shape, opt)
    trace = np.empty(opt.steps)

    for step in range(opt.steps):
        value, grad = objective(params)
        if not np.isfinite(value) or grad is None or not np.all(np.isfinite(grad)):
            model.logger.error(
                "Non-finite %s objective at step %s (loss=%s)",
                loss.kind, step, value,
            )
            raise TrainingDivergence(
                f"{loss.kind} objective diverged at step {step}",
                step=step,
                loss_trace=trace[:step],
            )
        trace[step] = value
        params = optimizer.step(params, grad)
        if step % 100 == 0:
            model.logger.debug("step %s loss %.6g", step, value)

    final_loss, _ = objective(params)
    if not np.isfinite(final_loss):
        raise TrainingDivergence(
            f"{loss.kind} objective diverged after the last step",
            step=opt.steps,
            loss_trace=trace,
        )
    return TrainResult(params=params, loss_trace=trace, final_loss=float(final_loss))
