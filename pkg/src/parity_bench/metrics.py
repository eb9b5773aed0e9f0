"""
Exact evaluation metrics: forward KL, its four-term split and the
occupancy-based discovery of unseen high-value states.

All logarithms are natural.
"""

import logging
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import rel_entr

from .benchmark import score_level_marginal
from .errors import ContractViolation, DegenerateError, DomainError
from .walsh import TABLE_ATOL

logger = logging.getLogger("parity_bench.metrics")

KL_FLOOR = 1e-300


@dataclass(frozen=True)
class Divergence:
    value: float
    clamped: bool

    def __float__(self):
        return self.value


def _as_states(states):
    return np.asarray(states, dtype=np.int64)


def forward_kl(target, model, support):
    """KL(target || model) summed over support.

    Model mass below KL_FLOOR is clamped to the floor and the result is
    flagged, so the value is always finite.
    """
    if target.n != model.n:
        raise ContractViolation("target and model widths differ")
    support = _as_states(support)
    p = target.mass[support]
    if abs(p.sum() - 1.0) > TABLE_ATOL:
        raise ContractViolation("target has mass outside the support")
    q = model.mass[support]
    clamped = bool(np.any((q < KL_FLOOR) & (p > 0)))
    value = float(np.sum(rel_entr(p, np.maximum(q, KL_FLOOR))))
    return Divergence(value=value, clamped=clamped)


@dataclass(frozen=True)
class KlBreakdown:
    """Forward KL as leakage + mass split + unseen shape + observed shape.

    Attributes:
        a: Target mass on the unobserved states.
        b: Model mass on the unobserved states, relative to its support mass.
    """

    total: float
    support_leakage: float
    mass_split: float
    unseen_shape: float
    observed_shape: float
    a: float
    b: float
    clamped: bool = False

    def to_dict(self):
        return asdict(self)


def _conditional_kl(p_part, p_total, q_part, q_total):
    """(KL between renormalised parts, clamped flag); zero when p_total is 0."""
    if p_total <= 0:
        return 0.0, False
    pc = p_part / p_total
    qc = q_part / q_total if q_total > 0 else np.zeros_like(q_part)
    clamped = bool(np.any((qc < KL_FLOOR) & (pc > 0)))
    return float(np.sum(rel_entr(pc, np.maximum(qc, KL_FLOOR)))), clamped


def kl_decomposition(target, model, observed, support):
    """Split forward KL over the observed/unobserved partition of support.

    Raises:
        ContractViolation: If observed is not a subset of support.
        DegenerateError: If the model has no mass on support.
    """
    support = _as_states(support)
    observed = _as_states(observed)
    if not np.all(np.isin(observed, support)):
        raise ContractViolation("observed states must lie in the support")
    unobserved = np.setdiff1d(support, observed)

    p, q = target.mass, model.mass
    q_support = float(q[support].sum())
    if q_support <= 0:
        raise DegenerateError("model has no mass on the support")
    q_unseen = float(q[unobserved].sum())
    q_seen = float(q[observed].sum())
    a = float(p[unobserved].sum())
    a_seen = float(p[observed].sum())
    b = q_unseen / q_support

    leakage = max(0.0, -float(np.log(q_support)))
    split = float(
        rel_entr(a, max(b, KL_FLOOR)) + rel_entr(a_seen, max(1.0 - b, KL_FLOOR))
    )
    unseen, clamp_u = _conditional_kl(p[unobserved], a, q[unobserved], q_unseen)
    seen, clamp_o = _conditional_kl(p[observed], a_seen, q[observed], q_seen)
    unseen_shape = a * unseen
    observed_shape = a_seen * seen
    clamped = clamp_u or clamp_o or (a > 0 and b < KL_FLOOR) or (
        a_seen > 0 and 1.0 - b < KL_FLOOR
    )
    return KlBreakdown(
        total=leakage + split + unseen_shape + observed_shape,
        support_leakage=leakage,
        mass_split=split,
        unseen_shape=unseen_shape,
        observed_shape=observed_shape,
        a=a,
        b=b,
        clamped=bool(clamped),
    )


def expected_discoveries(model, elite, Q):
    """Expected number of distinct elite states hit by Q i.i.d. samples."""
    if Q < 1:
        raise DomainError(f"budget must be >= 1, got {Q!r}")
    q = model.mass[_as_states(elite)]
    with np.errstate(divide="ignore"):
        miss = Q * np.log1p(-q)
    return float(np.sum(-np.expm1(miss)))


@dataclass(frozen=True)
class CoverageReport:
    budgets: tuple
    expected_discoveries: tuple
    coverage: tuple
    recovery: tuple
    elite_size: int

    def to_dict(self):
        return {
            "budgets": list(self.budgets),
            "expected_discoveries": list(self.expected_discoveries),
            "coverage": list(self.coverage),
            "recovery": list(self.recovery),
            "elite_size": self.elite_size,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            budgets=tuple(data["budgets"]),
            expected_discoveries=tuple(data["expected_discoveries"]),
            coverage=tuple(data["coverage"]),
            recovery=tuple(data["recovery"]),
            elite_size=int(data["elite_size"]),
        )


def coverage_report(model, elite, budgets):
    """Discoveries, coverage M/Q and recovery M/|E| at each budget.

    Raises:
        DegenerateError: If the elite set is empty.
    """
    elite = _as_states(elite)
    if elite.size == 0:
        raise DegenerateError("coverage of an empty elite set")
    found = [expected_discoveries(model, elite, Q) for Q in budgets]
    return CoverageReport(
        budgets=tuple(int(Q) for Q in budgets),
        expected_discoveries=tuple(found),
        coverage=tuple(M / Q for M, Q in zip(found, budgets)),
        recovery=tuple(M / elite.size for M in found),
        elite_size=int(elite.size),
    )


@dataclass(frozen=True)
class MetricsRecord:
    """Every metric of one model table on one instance.

    Attributes:
        kl: Forward KL over the valid support.
        kl_clamped: Whether any model mass was clamped to KL_FLOOR.
        support_mass: Model mass on the valid support.
        breakdown: Four-term KL split, None if the model misses the support.
        coverage: Discovery metrics, None if the unseen elite is empty.
        score_levels: Model mass per score level.
        extras: Model-specific diagnostics.
    """

    kl: float
    kl_clamped: bool
    support_mass: float
    breakdown: KlBreakdown = None
    coverage: CoverageReport = None
    score_levels: tuple = ()
    extras: dict = None

    def to_dict(self):
        return {
            "kl": self.kl,
            "kl_clamped": self.kl_clamped,
            "support_mass": self.support_mass,
            "breakdown": self.breakdown.to_dict() if self.breakdown else None,
            "coverage": self.coverage.to_dict() if self.coverage else None,
            "score_levels": list(self.score_levels),
            "extras": dict(self.extras or {}),
        }

    @classmethod
    def from_dict(cls, data):
        breakdown = data.get("breakdown")
        coverage = data.get("coverage")
        return cls(
            kl=data["kl"],
            kl_clamped=data["kl_clamped"],
            support_mass=data["support_mass"],
            breakdown=KlBreakdown(**breakdown) if breakdown else None,
            coverage=CoverageReport.from_dict(coverage) if coverage else None,
            score_levels=tuple(data.get("score_levels", ())),
            extras=data.get("extras") or {},
        )


def evaluate(instance, table, budgets, extras=None):
    """Full MetricsRecord of a model table on an instance."""
    kl = forward_kl(instance.target, table, instance.support)
    try:
        breakdown = kl_decomposition(
            instance.target, table, instance.observed, instance.support
        )
    except DegenerateError:
        logger.warning("Model has no mass on the support; no KL breakdown")
        breakdown = None
    coverage = None
    if instance.unseen_elite.size:
        coverage = coverage_report(table, instance.unseen_elite, budgets)
    return MetricsRecord(
        kl=kl.value,
        kl_clamped=kl.clamped,
        support_mass=table.total(instance.support),
        breakdown=breakdown,
        coverage=coverage,
        score_levels=tuple(score_level_marginal(table).tolist()),
        extras=extras or {},
    )
