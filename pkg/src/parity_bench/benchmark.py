"""
Benchmark instances: target family, training sample and parity band.

Every random draw comes from a stream derived from (seed, stream id), so
an instance is a pure function of its BenchmarkConfig and the training
set does not depend on beta's neighbours, the band or the models.
"""

import hashlib
import logging
import zlib
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractViolation, DegenerateError, DomainError
from .walsh import (
    ParityBand,
    ProbabilityTable,
    check_width,
    empirical_moments,
    popcount,
    sample_band,
)

logger = logging.getLogger("parity_bench.benchmark")

STREAM_TRAIN = 0
STREAM_BAND = 1
STREAM_INIT = 2


def stream_rng(seed, stream, *extra):
    """Independent generator for one named stream of one seed."""
    sequence = np.random.SeedSequence(
        entropy=int(seed), spawn_key=(int(stream),) + tuple(extra)
    )
    return np.random.default_rng(sequence)


def model_init_rng(seed, model_name):
    """Initialisation stream of a model; identical across beta."""
    tag = zlib.crc32(model_name.encode("utf-8"))
    return stream_rng(seed, STREAM_INIT, tag)


@dataclass(frozen=True)
class BenchmarkConfig:
    """Identity of a benchmark instance."""

    n: int = 12
    beta: float = 0.9
    seed: int = 111
    m: int = 200
    sigma: float = 1.0
    K: int = 512
    tau: float = 0.1

    def __post_init__(self):
        check_width(self.n)
        if self.n < 2:
            raise DomainError("instances need n >= 2")
        if not self.beta >= 0:
            raise DomainError(f"beta must be >= 0, got {self.beta!r}")
        if self.m < 1:
            raise DomainError(f"m must be >= 1, got {self.m!r}")
        if not self.sigma > 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma!r}")
        if self.K < 1:
            raise DomainError(f"K must be >= 1, got {self.K!r}")
        if not 0 < self.tau <= 1:
            raise DomainError(f"tau must lie in (0, 1], got {self.tau!r}")

    def identity(self):
        return asdict(self)


@lru_cache(maxsize=8)
def valid_support(n):
    """Even-parity states, sorted ascending."""
    n = check_width(n)
    states = np.arange(1 << n, dtype=np.int64)
    support = states[(popcount(states) & 1) == 0]
    support.setflags(write=False)
    return support


def score(x):
    """Longest run of zeros bracketed by ones on both sides.

    Runs touching either end of the string do not count.
    """
    best = run = 0
    seen_one = False
    for i in range(x.n):
        if x.bit(i):
            if seen_one:
                best = max(best, run)
            seen_one = True
            run = 0
        else:
            run += 1
    return best


@lru_cache(maxsize=8)
def score_table(n):
    """Score of every state, computed column by column."""
    n = check_width(n)
    states = np.arange(1 << n, dtype=np.int64)
    best = np.zeros(states.size, dtype=np.int64)
    run = np.zeros(states.size, dtype=np.int64)
    seen_one = np.zeros(states.size, dtype=bool)
    for i in range(n):
        one = ((states >> i) & 1).astype(bool)
        closing = one & seen_one
        best[closing] = np.maximum(best[closing], run[closing])
        seen_one |= one
        run = np.where(one, 0, run + 1)
    best.setflags(write=False)
    return best


def target_distribution(n, beta):
    """Boltzmann table exp(beta * score) restricted to even parity."""
    if not beta >= 0:
        raise DomainError(f"beta must be >= 0, got {beta!r}")
    support = valid_support(n)
    log_weights = beta * score_table(n)[support].astype(np.float64)
    weights = np.exp(log_weights - log_weights.max())
    mass = np.zeros(1 << n)
    mass[support] = weights / weights.sum()
    return ProbabilityTable(n, mass)


def score_level_marginal(table):
    """Mass per score level, including levels with no mass."""
    levels = score_table(table.n)
    return np.bincount(levels, weights=table.mass, minlength=max(table.n - 1, 1))


def sample_training_set(target, m, rng):
    """Draw m states i.i.d. from a table by inverse CDF."""
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m!r}")
    cdf = np.cumsum(target.mass)
    draws = np.searchsorted(cdf, rng.random(m) * cdf[-1], side="right")
    return np.minimum(draws, target.size - 1).astype(np.int64)


def high_value_threshold(levels, tau):
    """Smallest level Q with at least (1 - tau) of the states below or at it.

    Returns the first sorted level whose cumulative count reaches
    (1 - tau) * len(levels).
    """
    levels = np.sort(np.asarray(levels, dtype=np.int64))
    if levels.size == 0:
        raise DegenerateError("quantile of an empty set")
    cumulative = np.arange(1, levels.size + 1)
    position = np.searchsorted(cumulative, (1 - tau) * levels.size, side="left")
    return int(levels[min(position, levels.size - 1)])


@dataclass(frozen=True, eq=False)
class Instance:
    """A realised benchmark instance.

    Attributes:
        config: The identity the instance was built from.
        target: The target table, supported on the even-parity states.
        train: Training multiset, in draw order.
        band: Sampled masks with moments taken from the training set.
        support: Even-parity states.
        observed: Distinct training states.
        unobserved: Support states never drawn.
        threshold: Score quantile defining the high-value set.
        high_value: Support states scoring at least the threshold.
        unseen_elite: High-value states never drawn.
    """

    config: BenchmarkConfig
    target: ProbabilityTable
    train: np.ndarray
    band: ParityBand
    support: np.ndarray
    observed: np.ndarray
    unobserved: np.ndarray
    threshold: int
    high_value: np.ndarray
    unseen_elite: np.ndarray

    @property
    def n(self):
        return self.config.n

    def train_table(self):
        return ProbabilityTable.empirical(self.n, self.train)

    def train_counts(self):
        values, counts = np.unique(self.train, return_counts=True)
        return dict(zip(values.tolist(), counts.tolist()))

    def train_checksum(self):
        return hashlib.sha256(self.train.tobytes()).hexdigest()

    def to_record(self):
        """JSON-compatible description; replayed by instance_from_record."""
        return {
            "config": self.config.identity(),
            "train": sorted(self.train_counts().items()),
            "band_masks": self.band.masks.tolist(),
            "target_checksum": self.target.checksum(),
            "train_checksum": self.train_checksum(),
            "band_checksum": self.band.checksum(),
            "threshold": self.threshold,
            "high_value_size": int(self.high_value.size),
            "unseen_elite_size": int(self.unseen_elite.size),
        }


def make_instance(config):
    """Build the instance identified by config.

    Raises:
        DegenerateError: If the high-value set is empty.
    """
    n = config.n
    target = target_distribution(n, config.beta)
    train = sample_training_set(
        target, config.m, stream_rng(config.seed, STREAM_TRAIN)
    )
    masks = sample_band(
        config.sigma, config.K, n, stream_rng(config.seed, STREAM_BAND)
    )
    band = ParityBand(n, config.sigma, masks, empirical_moments(masks, train, n))

    support = valid_support(n)
    observed = np.unique(train)
    unobserved = np.setdiff1d(support, observed)
    levels = score_table(n)[support]
    threshold = high_value_threshold(levels, config.tau)
    high_value = support[levels >= threshold]
    if high_value.size == 0:
        raise DegenerateError(f"empty high-value set for {config.identity()}")
    unseen_elite = np.setdiff1d(high_value, observed)
    logger.debug(
        "Instance n=%s beta=%s seed=%s: |O|=%s |H|=%s |E|=%s Q=%s",
        n, config.beta, config.seed, observed.size, high_value.size,
        unseen_elite.size, threshold,
    )
    return Instance(
        config=config,
        target=target,
        train=train,
        band=band,
        support=support,
        observed=observed,
        unobserved=unobserved,
        threshold=threshold,
        high_value=high_value,
        unseen_elite=unseen_elite,
    )


def instance_from_record(record):
    """Rebuild an instance and check it matches a stored record."""
    instance = make_instance(BenchmarkConfig(**record["config"]))
    for field, actual in (
        ("train_checksum", instance.train_checksum()),
        ("band_checksum", instance.band.checksum()),
        ("target_checksum", instance.target.checksum()),
    ):
        expected = record.get(field)
        if expected is not None and expected != actual:
            raise ContractViolation(f"{field} mismatch on replay")
    return instance
