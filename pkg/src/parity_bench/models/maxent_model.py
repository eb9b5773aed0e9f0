"""
Maximum-entropy parity model on the full cube.

q(x) is proportional to exp(sum_k theta_k (-1)**(alpha_k . x)). The
energy of every state is one Walsh-Hadamard transform of the sparse
coefficient vector holding theta_k at alpha_k.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..errors import ContractViolation
from ..walsh import fwht
from .base_model import GenerativeModel


@dataclass(frozen=True, eq=False)
class MaxEntParams:
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "theta", np.asarray(self.theta, dtype=np.float64)
        )


class MaxEntModel(GenerativeModel):
    """Exponential family over the band's characters."""

    name = "maxent"

    def __init__(self, band, name=None):
        super().__init__(band.n, name)
        self.band = band

    @property
    def num_params(self):
        return self.band.K

    def init_params(self, rng=None, scale=0.0):
        """The dual is started at zero, the uniform distribution."""
        return np.zeros(self.num_params)

    def energy(self, theta):
        coef = np.zeros(self.size)
        np.add.at(coef, self.band.masks, theta)
        return fwht(coef)

    def _evaluate(self, params):
        theta = self.check_params(params)
        self.stats["evaluations"] += 1
        energy = self.energy(theta)
        log_z = logsumexp(energy)
        return theta, log_z, np.exp(energy - log_z)

    def forward(self, params):
        _, _, mass = self._evaluate(params)

        def pullback(cotangent):
            c = self.check_cotangent(cotangent)
            return fwht(mass * (c - c @ mass))[self.band.masks]

        return mass, pullback

    def objective_and_gradient(self, params):
        """Log-partition dual log Z(theta) - theta . z and its gradient.

        The gradient is the model moments minus the target moments.
        """
        theta, log_z, mass = self._evaluate(params)
        moments = fwht(mass)[self.band.masks]
        target = self.band.target_moments
        return float(log_z - theta @ target), moments - target

    def to_record(self, params):
        record = super().to_record(params)
        record["masks"] = self.band.masks.tolist()
        return record


def _flat(params, band):
    if params.theta.shape != (band.K,):
        raise ContractViolation(
            f"{params.theta.size} angles for a band of {band.K} masks"
        )
    return params.theta


def maxent_distribution(params, band):
    return MaxEntModel(band).distribution(_flat(params, band))


def maxent_objective_and_gradient(params, band):
    return MaxEntModel(band).objective_and_gradient(_flat(params, band))
