"""
Bitstrings, parity masks and the Walsh-Hadamard transform.

Bit i of a string x1...xn is stored in bit (i - 1) of its integer
encoding, so the literal "0110" encodes 6 and "1100" encodes 3. Sets of
states or masks are plain int64 arrays; whole tables are float arrays of
length 2**n indexed by that encoding.
"""

import hashlib
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractViolation, DomainError

logger = logging.getLogger("parity_bench.walsh")

MAX_BITS = 24
TABLE_ATOL = 1e-10

# Hamming weight of every byte value
_BYTE_WEIGHT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


def check_width(n):
    """Return n if it is a supported register width."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ContractViolation(f"width must be an integer, got {n!r}")
    if not 1 <= n <= MAX_BITS:
        raise ContractViolation(f"width {n} outside 1..{MAX_BITS}")
    return int(n)


def popcount(values):
    """Number of set bits of every entry of an integer array."""
    arr = np.asarray(values, dtype=np.int64)
    count = np.zeros(arr.shape, dtype=np.int64)
    for shift in range(0, 32, 8):
        count += _BYTE_WEIGHT[(arr >> shift) & 0xFF]
    return count


@dataclass(frozen=True)
class BitString:
    """A length-n binary string in the bit-(i-1) encoding."""

    value: int
    n: int

    def __post_init__(self):
        check_width(self.n)
        if not 0 <= self.value < (1 << self.n):
            raise ContractViolation(
                f"value {self.value} does not fit in {self.n} bits"
            )

    @classmethod
    def from_literal(cls, literal):
        if not literal or set(literal) - {"0", "1"}:
            raise ContractViolation(f"not a bit literal: {literal!r}")
        value = sum(1 << i for i, ch in enumerate(literal) if ch == "1")
        return cls(value, len(literal))

    def bit(self, i):
        """Bit x_{i+1}, zero-based."""
        return (self.value >> i) & 1

    def __str__(self):
        return "".join(str(self.bit(i)) for i in range(self.n))


# A mask is a bitstring read as the set of positions it selects.
Mask = BitString


def parse_bits(literal):
    return BitString.from_literal(literal).value


def format_bits(value, n):
    return str(BitString(int(value), n))


def walsh_character(alpha, x):
    """Return (-1)**(alpha . x) for a mask and a bitstring of equal width."""
    if alpha.n != x.n:
        raise ContractViolation(
            f"mask width {alpha.n} does not match string width {x.n}"
        )
    return 1 - 2 * (bin(alpha.value & x.value).count("1") & 1)


def parity_signs(masks, states):
    """Matrix of characters, one row per mask and one column per state."""
    masks = np.asarray(masks, dtype=np.int64)
    states = np.asarray(states, dtype=np.int64)
    overlap = popcount(masks[:, None] & states[None, :])
    return 1 - 2 * (overlap & 1)


def fwht(vec):
    """Unnormalised Walsh-Hadamard transform along the last axis.

    out[alpha] = sum_x vec[x] * (-1)**popcount(alpha & x). The input is
    not modified. Real and complex inputs are both supported.

    Raises:
        ContractViolation: If the last axis is not a power of two.
    """
    arr = np.array(vec, copy=True)
    if arr.ndim == 0:
        raise ContractViolation("fwht needs at least one axis")
    size = arr.shape[-1]
    if size < 1 or size & (size - 1):
        raise ContractViolation(f"length {size} is not a power of two")
    lead = arr.shape[:-1]
    h = 1
    while h < size:
        view = arr.reshape(lead + (size // (2 * h), 2, h))
        top = view[..., 0, :].copy()
        bottom = view[..., 1, :]
        view[..., 0, :] += bottom
        view[..., 1, :] = top - bottom
        h *= 2
    return arr


def width_of(length):
    """Register width n of a table with 2**n entries."""
    if length < 2 or length & (length - 1):
        raise ContractViolation(f"length {length} is not a power of two")
    return check_width(int(length).bit_length() - 1)


@dataclass(frozen=True, eq=False)
class ProbabilityTable:
    """A probability mass over all 2**n strings.

    Entries are non-negative and sum to one within TABLE_ATOL. The mass
    array is copied and made read-only.
    """

    n: int
    mass: np.ndarray

    def __post_init__(self):
        check_width(self.n)
        mass = np.array(self.mass, dtype=np.float64, copy=True)
        if mass.shape != (1 << self.n,):
            raise ContractViolation(
                f"table of shape {mass.shape} for width {self.n}"
            )
        if not np.all(np.isfinite(mass)) or np.any(mass < 0):
            raise ContractViolation("table entries must be finite and >= 0")
        total = mass.sum()
        if abs(total - 1.0) > TABLE_ATOL:
            raise ContractViolation(f"table sums to {total!r}, not 1")
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)

    @property
    def size(self):
        return 1 << self.n

    @classmethod
    def from_weights(cls, n, weights):
        """Normalise non-negative weights into a table."""
        weights = np.asarray(weights, dtype=np.float64)
        total = weights.sum()
        if not total > 0:
            raise DomainError("weights must have positive total")
        return cls(n, weights / total)

    @classmethod
    def uniform(cls, n, states=None):
        """Uniform over the cube, or over the given states."""
        size = 1 << check_width(n)
        if states is None:
            return cls(n, np.full(size, 1.0 / size))
        weights = np.zeros(size)
        weights[np.asarray(states, dtype=np.int64)] = 1.0
        return cls.from_weights(n, weights)

    @classmethod
    def empirical(cls, n, sample):
        """Frequency table of a multiset of states."""
        sample = np.asarray(sample, dtype=np.int64)
        if sample.size == 0:
            raise DomainError("empirical table of an empty sample")
        counts = np.bincount(sample, minlength=1 << check_width(n))
        return cls.from_weights(n, counts)

    def total(self, states):
        """Mass of a set of states."""
        return float(self.mass[np.asarray(states, dtype=np.int64)].sum())

    def checksum(self):
        return hashlib.sha256(self.mass.tobytes()).hexdigest()


@dataclass(frozen=True, eq=False)
class WalshSpectrum:
    """Unnormalised Walsh coefficients of a table."""

    n: int
    coeff: np.ndarray

    def __post_init__(self):
        coeff = np.asarray(self.coeff)
        if coeff.shape != (1 << check_width(self.n),):
            raise ContractViolation(
                f"spectrum of shape {coeff.shape} for width {self.n}"
            )


def spectrum_of(table):
    return WalshSpectrum(table.n, fwht(table.mass))


def table_from_spectrum(spectrum):
    """Inverse transform; the result may have negative entries."""
    return fwht(spectrum.coeff) / (1 << spectrum.n)


def bernoulli_rate(sigma):
    """Per-bit inclusion rate 1/2 * (1 - exp(-1 / (2 sigma**2)))."""
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    return -0.5 * np.expm1(-1.0 / (2.0 * sigma * sigma))


def sample_band(sigma, K, n, rng):
    """Draw K non-zero masks with independent Bernoulli bits.

    Each all-zero mask is redrawn whole; duplicates are kept.
    """
    n = check_width(n)
    if K < 1:
        raise DomainError(f"K must be at least 1, got {K!r}")
    rate = bernoulli_rate(sigma)
    weights = np.int64(1) << np.arange(n, dtype=np.int64)
    masks = (rng.random((K, n)) < rate).astype(np.int64) @ weights
    zero = np.flatnonzero(masks == 0)
    while zero.size:
        redraw = (rng.random((zero.size, n)) < rate).astype(np.int64)
        masks[zero] = redraw @ weights
        zero = zero[masks[zero] == 0]
    return masks


def empirical_moments(masks, sample, n):
    """Sample means of the characters selected by each mask."""
    sample = np.asarray(sample, dtype=np.int64)
    if sample.size == 0:
        raise DomainError("moments of an empty sample")
    counts = np.bincount(sample, minlength=1 << check_width(n))
    spectrum = fwht(counts.astype(np.float64))
    return spectrum[np.asarray(masks, dtype=np.int64)] / sample.size


@dataclass(frozen=True, eq=False)
class ParityBand:
    """Sampled masks together with their target moments."""

    n: int
    sigma: float
    masks: np.ndarray
    target_moments: np.ndarray

    def __post_init__(self):
        check_width(self.n)
        masks = np.array(self.masks, dtype=np.int64, copy=True)
        moments = np.array(self.target_moments, dtype=np.float64, copy=True)
        if masks.ndim != 1 or masks.shape != moments.shape:
            raise ContractViolation("masks and moments must be equal-length")
        if masks.size == 0:
            raise ContractViolation("band must hold at least one mask")
        if np.any(masks <= 0) or np.any(masks >= (1 << self.n)):
            raise ContractViolation("masks must be non-zero and fit n bits")
        if np.any(np.abs(moments) > 1.0 + TABLE_ATOL):
            raise ContractViolation("moments must lie in [-1, 1]")
        masks.setflags(write=False)
        moments.setflags(write=False)
        object.__setattr__(self, "masks", masks)
        object.__setattr__(self, "target_moments", moments)

    @property
    def K(self):
        return int(self.masks.size)

    def checksum(self):
        digest = hashlib.sha256(self.masks.tobytes())
        digest.update(self.target_moments.tobytes())
        return digest.hexdigest()


@lru_cache(maxsize=8)
def spin_matrix(n):
    """Read-only (2**n, n) matrix of spins s_i = (-1)**x_i."""
    n = check_width(n)
    states = np.arange(1 << n, dtype=np.int64)
    bits = (states[:, None] >> np.arange(n, dtype=np.int64)) & 1
    spins = 1.0 - 2.0 * bits
    spins.setflags(write=False)
    return spins
