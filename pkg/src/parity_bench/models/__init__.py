"""
Models package

Contains the exact generative models:
- IqpModel: IQP Born machine with ring couplings
- IsingModel: Sparse and dense Gibbs baselines
- MaxEntModel: Maximum-entropy fit to the parity band
"""

from .base_model import GenerativeModel
from .iqp_model import IqpModel, IqpParams, iqp_distribution, iqp_gradient, ring_edges
from .ising_model import (
    IsingDenseParams,
    IsingModel,
    IsingSparseParams,
    dense_pairs,
    ising_distribution,
    ising_gradient,
)
from .maxent_model import (
    MaxEntModel,
    MaxEntParams,
    maxent_distribution,
    maxent_objective_and_gradient,
)

__all__ = [
    'GenerativeModel',
    'IqpModel',
    'IqpParams',
    'IsingModel',
    'IsingSparseParams',
    'IsingDenseParams',
    'MaxEntModel',
    'MaxEntParams',
    'dense_pairs',
    'iqp_distribution',
    'iqp_gradient',
    'ising_distribution',
    'ising_gradient',
    'maxent_distribution',
    'maxent_objective_and_gradient',
    'ring_edges',
]
