"""
IQP Born machine with ring couplings.

The circuit is H^n D(theta) H^n on |0...0>, with
D|z> = exp(i sum_e theta_e s_j(z) s_k(z)) |z> and s = (-1)**z. Both
Hadamard layers are applied with one Walsh-Hadamard transform.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolation
from ..walsh import check_width, fwht
from .base_model import GenerativeModel, pair_energy, pair_moments


def ring_edges(n):
    """Nearest- then next-nearest-neighbour pairs on a ring, 2n in total."""
    sites = np.arange(check_width(n), dtype=np.int64)
    nearest = np.stack([sites, (sites + 1) % n], axis=1)
    next_nearest = np.stack([sites, (sites + 2) % n], axis=1)
    return np.concatenate([nearest, next_nearest])


@dataclass(frozen=True, eq=False)
class IqpParams:
    n: int
    theta: np.ndarray
    edges: np.ndarray = None

    def __post_init__(self):
        edges = ring_edges(self.n) if self.edges is None else self.edges
        edges = np.asarray(edges, dtype=np.int64)
        theta = np.asarray(self.theta, dtype=np.float64)
        if edges.ndim != 2 or edges.shape[1] != 2:
            raise ContractViolation("edges must be a list of pairs")
        if theta.shape != (edges.shape[0],):
            raise ContractViolation(
                f"{edges.shape[0]} edges but {theta.size} angles"
            )
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "theta", theta)


class IqpModel(GenerativeModel):
    """Exact Born distribution and adjoint gradient of an IQP circuit."""

    name = "iqp"

    def __init__(self, n, edges=None, name=None):
        super().__init__(n, name)
        self.edges = ring_edges(n) if edges is None else np.asarray(edges)
        if np.any(self.edges < 0) or np.any(self.edges >= self.n):
            raise ContractViolation("edge endpoint outside the register")

    @property
    def num_params(self):
        return len(self.edges)

    def forward(self, params):
        theta = self.check_params(params)
        self.stats["evaluations"] += 1
        phase = np.exp(1j * pair_energy(self.spins, self.edges, theta))
        amplitude = fwht(phase) / self.size
        mass = amplitude.real ** 2 + amplitude.imag ** 2

        def pullback(cotangent):
            # dmass[x]/dtheta_e = 2 Re(conj(psi[x]) dpsi[x]/dtheta_e); the
            # sum over x collapses to one transform of c * conj(psi).
            c = self.check_cotangent(cotangent)
            adjoint = fwht(c * np.conj(amplitude)) / self.size
            u = np.imag(phase * adjoint)
            return -2.0 * pair_moments(self.spins, self.edges, u)

        return mass, pullback

    def to_record(self, params):
        record = super().to_record(params)
        record["edges"] = self.edges.tolist()
        return record


def iqp_distribution(params):
    return IqpModel(params.n, params.edges).distribution(params.theta)


def iqp_gradient(params, cotangent):
    """Gradient of sum_x cotangent[x] * mass[x] with respect to theta."""
    return IqpModel(params.n, params.edges).gradient(params.theta, cotangent)
