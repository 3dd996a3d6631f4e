"""Organisational responses: duration-threshold filters and sick-day isolation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contact_log import ContactLog
from .epidemic import DiseaseParams, EpidemicOutcome, SeedingProtocol, _Prepared, run_protocol

__all__ = [
    "InterventionSpec",
    "NoIntervention",
    "RemoveShort",
    "RemoveLong",
    "IsolateWhenInfectious",
    "AbsenceReport",
    "apply_static",
    "retained_mask",
    "absence_report",
    "simulate_with_isolation",
    "run_isolation_protocol",
]


class InterventionSpec:
    """Base class of the intervention kinds."""

    static = True


@dataclass(frozen=True)
class NoIntervention(InterventionSpec):
    pass


@dataclass(frozen=True)
class RemoveShort(InterventionSpec):
    """Drop every event strictly shorter than ``threshold`` minutes."""

    threshold: float

    def __post_init__(self):
        if not self.threshold >= 0:
            raise ValueError(f"threshold must be >= 0, got {self.threshold}")


@dataclass(frozen=True)
class RemoveLong(InterventionSpec):
    """Drop every event strictly longer than ``threshold`` minutes."""

    threshold: float

    def __post_init__(self):
        if not self.threshold >= 0:
            raise ValueError(f"threshold must be >= 0, got {self.threshold}")


@dataclass(frozen=True)
class IsolateWhenInfectious(InterventionSpec):
    """Stay home from ``lag_days`` whole days after infection until recovery."""

    lag_days: int = 1
    static = False

    def __post_init__(self):
        if int(self.lag_days) != self.lag_days or self.lag_days < 0:
            raise ValueError(f"lag_days must be a non-negative integer, got {self.lag_days}")


def retained_mask(log: ContactLog, spec: InterventionSpec) -> np.ndarray:
    if isinstance(spec, NoIntervention):
        return np.ones(len(log), dtype=bool)
    if isinstance(spec, RemoveShort):
        return log.duration >= spec.threshold
    if isinstance(spec, RemoveLong):
        return log.duration <= spec.threshold
    raise TypeError(f"{type(spec).__name__} is not a static intervention")


def apply_static(log: ContactLog, spec: InterventionSpec) -> ContactLog:
    """Filter ``log`` by an infection-independent policy.

    Retained events keep their content-derived keys, so runs on the filtered
    log see the same per-event draws as on the original.
    """
    if isinstance(spec, NoIntervention):
        return log
    return log.subset(retained_mask(log, spec))


@dataclass(frozen=True)
class AbsenceReport:
    person_days_absent: int
    absence_fraction: float


def absence_report(log: ContactLog, outcome: EpidemicOutcome, lag_days: int) -> AbsenceReport:
    """Person-days spent at home under the isolation rule.

    A person infected at ``tau`` is flagged absent on every working day ``d``
    with ``d >= day(tau) + lag_days`` that starts before their recovery (and
    before the horizon), whether or not they had events that day.
    """
    L = log.day_length
    days = 0
    for person in outcome.infected:
        tau = outcome.infection_time[person]
        first = math.floor(tau / L) + lag_days
        until = min(outcome.recovery_time[person], log.horizon)
        last_excl = math.ceil(until / L)
        days += max(0, last_excl - first)
    return AbsenceReport(days, days / (log.n_people * log.n_days))


def simulate_with_isolation(log: ContactLog, params: DiseaseParams, spec: IsolateWhenInfectious,
                            seed: int, seed_day: int, replicate: int = 0,
                            master_seed: int = 0) -> tuple[EpidemicOutcome, AbsenceReport]:
    outcome = _Prepared(log, params).run(seed, seed_day, replicate, master_seed, iso_lag=_lag(log, spec))
    return outcome, absence_report(log, outcome, spec.lag_days)


def _lag(log: ContactLog, spec: IsolateWhenInfectious) -> int:
    # a lag past the horizon never triggers; clamp so the kernel's int stays small
    return int(min(spec.lag_days, log.n_days + 1))


def run_isolation_protocol(log: ContactLog, params: DiseaseParams, spec: IsolateWhenInfectious,
                           protocol: SeedingProtocol, master_seed: int = 0,
                           workers: int | None = 1) -> list[tuple[EpidemicOutcome, AbsenceReport]]:
    outcomes = run_protocol(log, params, protocol, master_seed, workers, iso_lag=_lag(log, spec))
    return [(o, absence_report(log, o, spec.lag_days)) for o in outcomes]
