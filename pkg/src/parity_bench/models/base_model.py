"""
Base Model Class

Provides common functionality for all exact generative models.
"""

import logging
from abc import ABC, abstractmethod

import numpy as np

from ..errors import ContractViolation
from ..walsh import ProbabilityTable, check_width, spin_matrix


def pair_energy(spins, pairs, weights):
    """Sum over pairs of weight * s_j * s_k, for every row of spins.

    Repeated pairs accumulate.
    """
    n = spins.shape[1]
    coupling = np.zeros((n, n))
    np.add.at(coupling, (pairs[:, 0], pairs[:, 1]), weights)
    return np.einsum("xj,xj->x", spins @ coupling, spins)


def pair_moments(spins, pairs, weights):
    """Sum over states of weights[x] * s_j(x) * s_k(x), one value per pair."""
    gram = spins.T @ (weights[:, None] * spins)
    return gram[pairs[:, 0], pairs[:, 1]]


class GenerativeModel(ABC):
    """
    Abstract base class for all trainable models.

    Provides:
    - The spin matrix of the n-bit cube
    - Parameter and cotangent validation
    - A forward/pullback interface used by the trainer
    """

    name = "model"

    def __init__(self, n, name=None):
        """
        Initialize base model.

        Args:
            n: Register width
            name: Model name for logging and records
        """
        self.n = check_width(n)
        self.size = 1 << self.n
        if name is not None:
            self.name = name
        self.spins = spin_matrix(self.n)
        self.logger = logging.getLogger(f"model.{self.name}")

        self.stats = {
            "evaluations": 0,
            "pullbacks": 0,
        }

    @property
    @abstractmethod
    def num_params(self):
        """Length of the flat parameter vector."""

    @abstractmethod
    def forward(self, params):
        """
        Evaluate the model - must be implemented by subclasses.

        Args:
            params: Flat parameter vector

        Returns:
            (mass, pullback) where pullback maps dLoss/dmass to dLoss/dparams
        """

    def check_params(self, params):
        params = np.asarray(params, dtype=np.float64)
        if params.shape != (self.num_params,):
            raise ContractViolation(
                f"{self.name} expects {self.num_params} parameters, "
                f"got shape {params.shape}"
            )
        return params

    def check_cotangent(self, cotangent):
        cotangent = np.asarray(cotangent, dtype=np.float64)
        if cotangent.shape != (self.size,):
            raise ContractViolation(
                f"cotangent of shape {cotangent.shape} for width {self.n}"
            )
        self.stats["pullbacks"] += 1
        return cotangent

    def init_params(self, rng, scale=0.1):
        """Gaussian initialisation with standard deviation scale."""
        return rng.normal(0.0, scale, self.num_params)

    def distribution(self, params):
        mass, _ = self.forward(params)
        return ProbabilityTable(self.n, mass)

    def gradient(self, params, cotangent):
        _, pullback = self.forward(params)
        return pullback(cotangent)

    def to_record(self, params):
        """Structured record of trained parameters."""
        return {
            "model_class": self.name,
            "n": self.n,
            "params": np.asarray(params, dtype=np.float64).tolist(),
        }
