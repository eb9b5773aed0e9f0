"""
Exactly normalised Ising (Gibbs) models over the full cube.

mass[x] is proportional to exp(sum J_jk s_j s_k + sum h_j s_j). The
partition function is an exact log-sum-exp over all 2**n states.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..errors import ContractViolation
from ..walsh import check_width
from .base_model import GenerativeModel, pair_energy, pair_moments
from .iqp_model import ring_edges


def dense_pairs(n):
    """Every unordered pair j < k."""
    j, k = np.triu_indices(check_width(n), 1)
    return np.stack([j, k], axis=1).astype(np.int64)


@dataclass(frozen=True, eq=False)
class IsingSparseParams:
    """Couplings on ring NN and NNN edges plus one field per site."""

    n: int
    couplings: np.ndarray
    fields: np.ndarray

    def __post_init__(self):
        _check_lengths(self, 2 * check_width(self.n))


@dataclass(frozen=True, eq=False)
class IsingDenseParams:
    """Couplings on every unordered pair plus one field per site."""

    n: int
    couplings: np.ndarray
    fields: np.ndarray

    def __post_init__(self):
        n = check_width(self.n)
        _check_lengths(self, n * (n - 1) // 2)


def _check_lengths(params, num_couplings):
    couplings = np.asarray(params.couplings, dtype=np.float64)
    fields = np.asarray(params.fields, dtype=np.float64)
    if couplings.shape != (num_couplings,) or fields.shape != (params.n,):
        raise ContractViolation(
            f"{type(params).__name__} needs {num_couplings} couplings and "
            f"{params.n} fields, got {couplings.shape} and {fields.shape}"
        )
    object.__setattr__(params, "couplings", couplings)
    object.__setattr__(params, "fields", fields)


class IsingModel(GenerativeModel):
    """Gibbs model over a fixed pair graph with per-site fields."""

    name = "ising"

    def __init__(self, n, pairs, name=None):
        super().__init__(n, name)
        self.pairs = np.asarray(pairs, dtype=np.int64)

    @classmethod
    def sparse(cls, n):
        return cls(n, ring_edges(n), name="ising-sparse")

    @classmethod
    def dense(cls, n):
        return cls(n, dense_pairs(n), name="ising-dense")

    @property
    def num_params(self):
        return len(self.pairs) + self.n

    def split(self, params):
        """(couplings, fields) views of a flat parameter vector."""
        return params[: len(self.pairs)], params[len(self.pairs):]

    def log_weights(self, params):
        couplings, fields = self.split(params)
        return pair_energy(self.spins, self.pairs, couplings) + self.spins @ fields

    def forward(self, params):
        params = self.check_params(params)
        self.stats["evaluations"] += 1
        energy = self.log_weights(params)
        mass = np.exp(energy - logsumexp(energy))

        def pullback(cotangent):
            c = self.check_cotangent(cotangent)
            u = mass * (c - c @ mass)
            return np.concatenate(
                [pair_moments(self.spins, self.pairs, u), self.spins.T @ u]
            )

        return mass, pullback

    def to_record(self, params):
        record = super().to_record(params)
        record["edges"] = self.pairs.tolist()
        return record


def _model_for(params):
    if isinstance(params, IsingSparseParams):
        model = IsingModel.sparse(params.n)
    elif isinstance(params, IsingDenseParams):
        model = IsingModel.dense(params.n)
    else:
        raise ContractViolation(f"not Ising parameters: {type(params).__name__}")
    return model, np.concatenate([params.couplings, params.fields])


def ising_distribution(params):
    model, flat = _model_for(params)
    return model.distribution(flat)


def ising_gradient(params, cotangent):
    """Gradient of sum_x cotangent[x] * mass[x], shaped like params."""
    model, flat = _model_for(params)
    grad = model.gradient(flat, cotangent)
    couplings, fields = model.split(grad)
    return type(params)(params.n, couplings, fields)
