"""
Parameter-free band-limited reconstruction from the parity band.

The linear reconstruction keeps only the band's Walsh coefficients and
can be negative; projection clips it at zero and renormalises.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DegenerateError
from .walsh import ProbabilityTable, fwht, width_of

logger = logging.getLogger("parity_bench.spectral")


@dataclass(frozen=True, eq=False)
class SpectralProxy:
    """Linear reconstruction and its projection to a valid table.

    Attributes:
        linear: Signed reconstruction over the full cube.
        projected: Clipped and renormalised table.
        negative_mass_clipped: Total magnitude of the negative entries.
        off_support_mass: Positive mass discarded outside the support,
            zero for the full-cube projection.
    """

    linear: np.ndarray
    projected: ProbabilityTable
    negative_mass_clipped: float
    off_support_mass: float = 0.0


def linear_reconstruction(band, n):
    """2**-n * (1 + sum_k z_k (-1)**(alpha_k . x)) for every x."""
    if band.n != n:
        raise ContractViolation(f"band of width {band.n} used at width {n}")
    coef = np.zeros(1 << n)
    coef[0] = 1.0
    np.add.at(coef, band.masks, band.target_moments)
    return fwht(coef) / (1 << n)


def spectral_projection(linear, support=None):
    """Clip at zero and renormalise, optionally over a support only.

    Raises:
        DegenerateError: If nothing positive is left to renormalise.
    """
    linear = np.asarray(linear, dtype=np.float64)
    n = width_of(linear.size)
    clipped = np.clip(linear, 0.0, None)
    if support is not None:
        keep = np.zeros(linear.size, dtype=bool)
        keep[np.asarray(support, dtype=np.int64)] = True
        clipped[~keep] = 0.0
    total = clipped.sum()
    if not total > 0:
        raise DegenerateError("reconstruction has no positive mass to keep")
    return ProbabilityTable(n, clipped / total)


def clipped_negative_mass(linear):
    linear = np.asarray(linear, dtype=np.float64)
    return float(-linear[linear < 0].sum())


def spectral_proxy(band, n, support=None):
    linear = linear_reconstruction(band, n)
    projected = spectral_projection(linear, support)
    off_support = 0.0
    if support is not None:
        positive = np.clip(linear, 0.0, None)
        off_support = float(
            positive.sum() - positive[np.asarray(support, dtype=np.int64)].sum()
        )
    proxy = SpectralProxy(
        linear=linear,
        projected=projected,
        negative_mass_clipped=clipped_negative_mass(linear),
        off_support_mass=off_support,
    )
    logger.debug(
        "Spectral proxy n=%s K=%s: clipped %.4g, off-support %.4g",
        n, band.K, proxy.negative_mass_clipped, off_support,
    )
    return proxy


def region_visibility(band, region, n):
    """(uniform mass, visibility) of a region under the linear reconstruction.

    The two terms add up to the reconstruction's total mass on the region.
    """
    if band.n != n:
        raise ContractViolation(f"band of width {band.n} used at width {n}")
    region = np.unique(np.asarray(region, dtype=np.int64))
    if region.size == 0:
        return 0.0, 0.0
    size = 1 << n
    indicator = np.zeros(size)
    indicator[region] = 1.0
    char_means = fwht(indicator)[band.masks] / size
    return region.size / size, float(band.target_moments @ char_means)
