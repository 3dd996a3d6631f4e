"""Threshold sweeps, channel comparison and sick-day evaluation.

All runs of a sweep share one master seed, so every threshold sees the same
per-event draws (common random numbers).
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .contact_log import Channel, ContactLog
from .epidemic import DiseaseParams, FinalSizeEstimate, SeedingProtocol, run_protocol
from .interventions import IsolateWhenInfectious, RemoveLong, RemoveShort, apply_static, run_isolation_protocol
from .network_metrics import (
    ConstraintReport,
    ProductivityModel,
    UndefinedMultiplierError,
    aggregate,
    constraint_report,
    productivity_multiplier,
)

__all__ = [
    "DEFAULT_SHORT_THRESHOLDS",
    "DEFAULT_LONG_THRESHOLDS",
    "SweepConfig",
    "TradeoffPoint",
    "ChannelComparison",
    "IsolationPoint",
    "run_sweep",
    "compare_channels",
    "evaluate_isolation",
    "tradeoff_csv",
    "CSV_COLUMNS",
]

DEFAULT_SHORT_THRESHOLDS = (0.0, 1.0, 2.0, 3.0, 5.0, 10.0, 15.0, 20.0, 30.0)
DEFAULT_LONG_THRESHOLDS = (10.0, 15.0, 20.0, 26.0, 30.0, 45.0, 60.0, 120.0)

_MODES = {"short": RemoveShort, "long": RemoveLong}


@dataclass(frozen=True)
class SweepConfig:
    mode: str = "short"
    thresholds: tuple[float, ...] | None = None
    params: DiseaseParams = field(default_factory=DiseaseParams)
    protocol: SeedingProtocol = field(default_factory=SeedingProtocol)
    master_seed: int = 0
    channel: Channel = Channel.INTERACTION
    productivity: ProductivityModel = field(default_factory=ProductivityModel)

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"mode must be 'short' or 'long', got {self.mode!r}")
        if self.thresholds is None:
            default = DEFAULT_SHORT_THRESHOLDS if self.mode == "short" else DEFAULT_LONG_THRESHOLDS
            object.__setattr__(self, "thresholds", default)
        ts = tuple(float(t) for t in self.thresholds)
        if not ts:
            raise ValueError("at least one threshold is required")
        if any(t < 0 for t in ts):
            raise ValueError("thresholds must be non-negative")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("thresholds must be strictly ascending")
        object.__setattr__(self, "thresholds", ts)

    def intervention(self, threshold: float):
        return _MODES[self.mode](threshold)


@dataclass(frozen=True)
class TradeoffPoint:
    threshold: float
    mean_final_size: float
    std_error: float
    productivity_multiplier: float | None
    n_events_retained: int
    per_run: tuple[int, ...] = field(default=(), repr=False)
    constraint_mean: float | None = None

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "mean_final_size": self.mean_final_size,
            "std_error": self.std_error,
            "productivity_multiplier": self.productivity_multiplier,
            "n_events_retained": self.n_events_retained,
            "constraint_mean": self.constraint_mean,
        }


def _multiplier(baseline: ConstraintReport, scenario: ConstraintReport, model: ProductivityModel) -> float | None:
    try:
        return productivity_multiplier(baseline, scenario, model)
    except UndefinedMultiplierError:
        return None


def baseline_constraint(log: ContactLog) -> ConstraintReport:
    """Constraint report of the unfiltered interaction network (the SD reference)."""
    return constraint_report(aggregate(log, Channel.INTERACTION))


def run_sweep(log: ContactLog, config: SweepConfig, workers: int | None = 1) -> list[TradeoffPoint]:
    """One tradeoff point per threshold.

    The epidemic runs on ``config.channel``; constraint is always measured on
    the filtered interaction network against the unfiltered one.
    """
    baseline = baseline_constraint(log)
    points = []
    for t in config.thresholds:
        filtered = apply_static(log, config.intervention(t))
        sim_log = filtered.project(config.channel)
        outcomes = run_protocol(sim_log, config.params, config.protocol, config.master_seed, workers)
        est = FinalSizeEstimate.from_sizes([o.final_size for o in outcomes])
        scenario = constraint_report(aggregate(filtered, Channel.INTERACTION))
        points.append(TradeoffPoint(
            threshold=t,
            mean_final_size=est.mean,
            std_error=est.std_error,
            productivity_multiplier=_multiplier(baseline, scenario, config.productivity),
            n_events_retained=len(sim_log),
            per_run=est.per_run,
            constraint_mean=scenario.mean,
        ))
    return points


CSV_COLUMNS = ("threshold", "mean_final_size", "std_error", "productivity_multiplier", "n_events_retained")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def tradeoff_csv(points: Sequence[TradeoffPoint]) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for p in points:
        buf.write(",".join(_cell(getattr(p, c)) for c in CSV_COLUMNS) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------- channel comparison


@dataclass(frozen=True)
class ChannelComparison:
    interaction: FinalSizeEstimate
    proximity: FinalSizeEstimate
    interaction_frequency: tuple[float, ...]
    proximity_frequency: tuple[float, ...]
    rank_correlation: float | None

    def to_dict(self) -> dict:
        def est(e: FinalSizeEstimate) -> dict:
            return {"mean": e.mean, "std_error": e.std_error, "n_runs": e.n_runs}

        return {
            "interaction": est(self.interaction),
            "proximity": est(self.proximity),
            "interaction_frequency": list(self.interaction_frequency),
            "proximity_frequency": list(self.proximity_frequency),
            "rank_correlation": self.rank_correlation,
        }


def _infection_frequency(outcomes, n_people: int) -> np.ndarray:
    counts = np.zeros(n_people)
    for o in outcomes:
        counts[list(o.infected)] += 1
    return counts / len(outcomes)


def _spearman(x: np.ndarray, y: np.ndarray) -> float | None:
    if np.array_equal(x, y):
        return 1.0
    if np.all(x == x[0]) or np.all(y == y[0]):
        return None
    return float(stats.spearmanr(x, y).statistic)


def compare_channels(log: ContactLog, params: DiseaseParams, protocol: SeedingProtocol,
                     master_seed: int = 0, workers: int | None = 1) -> ChannelComparison:
    """Epidemics on the interaction-only and proximity-only projections.

    A channel without events is degenerate (every run has size 1), not an
    error. The correlation is ``None`` when one frequency vector is constant
    and the two differ.
    """
    results = {}
    for channel in (Channel.INTERACTION, Channel.PROXIMITY):
        outcomes = run_protocol(log.project(channel), params, protocol, master_seed, workers)
        results[channel] = (
            FinalSizeEstimate.from_sizes([o.final_size for o in outcomes]),
            _infection_frequency(outcomes, log.n_people),
        )
    (ie, ifreq), (pe, pfreq) = results[Channel.INTERACTION], results[Channel.PROXIMITY]
    return ChannelComparison(ie, pe, tuple(ifreq.tolist()), tuple(pfreq.tolist()), _spearman(ifreq, pfreq))


# ------------------------------------------------------------------ sick days


def absence_adjusted(multiplier: float, absence_fraction: float) -> float:
    return multiplier * (1.0 - absence_fraction)


@dataclass(frozen=True)
class IsolationPoint:
    lag_days: int
    estimate: FinalSizeEstimate
    mean_person_days_absent: float
    mean_absence_fraction: float
    effective_productivity: float

    def to_dict(self) -> dict:
        return {
            "lag_days": self.lag_days,
            "mean_final_size": self.estimate.mean,
            "std_error": self.estimate.std_error,
            "n_runs": self.estimate.n_runs,
            "mean_person_days_absent": self.mean_person_days_absent,
            "mean_absence_fraction": self.mean_absence_fraction,
            "effective_productivity": self.effective_productivity,
        }


def evaluate_isolation(log: ContactLog, params: DiseaseParams, spec: IsolateWhenInfectious,
                       protocol: SeedingProtocol, master_seed: int = 0, workers: int | None = 1,
                       combine: Callable[[float, float], float] = absence_adjusted) -> IsolationPoint:
    """Sick-day policy on ``log``: final size plus the absence it costs.

    The contact network itself is unchanged by the policy, so the constraint
    multiplier is 1.0 and ``combine`` folds in the absence penalty.
    """
    runs = run_isolation_protocol(log, params, spec, protocol, master_seed, workers)
    est = FinalSizeEstimate.from_sizes([o.final_size for o, _ in runs])
    days = float(np.mean([r.person_days_absent for _, r in runs]))
    frac = float(np.mean([r.absence_fraction for _, r in runs]))
    return IsolationPoint(spec.lag_days, est, days, frac, combine(1.0, frac))
