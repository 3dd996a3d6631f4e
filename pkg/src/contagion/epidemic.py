"""Stochastic individual-based SIR replay over a contact log.

Events are atomic at their start time. A susceptible person meeting an
infectious one at event ``e`` is infected iff ``u(e) < p(duration)``, where
``u(e)`` is keyed by the run and the event's identity (see :mod:`contagion.rng`).
Infection is immediately infectious; recovery comes after an exponential
number of working days (``day_length`` minutes each).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numba
import numpy as np

from . import rng
from .contact_log import ContactLog

__all__ = [
    "DiseaseParams",
    "SeedingProtocol",
    "InfectionRecord",
    "EpidemicOutcome",
    "FinalSizeEstimate",
    "transmission_probability",
    "simulate_once",
    "estimate_final_size",
    "run_protocol",
]

HAZARD = "hazard"
LINEAR = "linear"


@dataclass(frozen=True)
class DiseaseParams:
    beta_per_minute: float = 0.007
    gamma_per_day: float = 1.0 / 3.0
    incubation_days: float = 0.0
    model: str = HAZARD

    def __post_init__(self):
        if not self.beta_per_minute >= 0:
            raise ValueError(f"beta_per_minute must be >= 0, got {self.beta_per_minute}")
        if not self.gamma_per_day >= 0:
            raise ValueError(f"gamma_per_day must be >= 0, got {self.gamma_per_day}")
        if self.incubation_days != 0:
            raise ValueError("only a zero incubation period is supported")
        if self.model not in (HAZARD, LINEAR):
            raise ValueError(f"model must be {HAZARD!r} or {LINEAR!r}")


def transmission_probability(duration, params: DiseaseParams):
    """Per-event infection probability for a contact of ``duration`` minutes.

    Hazard form ``1 - exp(-beta * d)`` by default; ``model="linear"`` gives
    ``min(1, beta * d)``. Accepts scalars or arrays.
    """
    d = np.asarray(duration, dtype=np.float64)
    if np.any(d < 0) or np.any(np.isnan(d)):
        raise ValueError("duration must be non-negative")
    beta = params.beta_per_minute
    with np.errstate(invalid="ignore"):
        exposure = np.where(d > 0, beta * d, 0.0)
    if params.model == LINEAR:
        p = np.minimum(exposure, 1.0)
    else:
        p = -np.expm1(-exposure)
    return float(p) if p.ndim == 0 else p


@dataclass(frozen=True)
class SeedingProtocol:
    """Introductions to average over: each seed person on each seed day.

    ``seed_individuals=None`` means the whole roster.
    """

    seed_individuals: tuple[int, ...] | None = None
    seed_days: tuple[int, ...] = (0, 1, 2, 3, 4)
    repetitions_per_combination: int = 1

    def __post_init__(self):
        if self.seed_individuals is not None:
            object.__setattr__(self, "seed_individuals", tuple(sorted(set(int(s) for s in self.seed_individuals))))
        object.__setattr__(self, "seed_days", tuple(sorted(set(int(d) for d in self.seed_days))))
        if self.repetitions_per_combination < 1:
            raise ValueError("repetitions_per_combination must be >= 1")

    @classmethod
    def first_days(cls, log: ContactLog, n_days: int = 5, repetitions: int = 1) -> "SeedingProtocol":
        return cls(None, tuple(range(min(n_days, log.n_days))), repetitions)

    def combinations(self, log: ContactLog) -> list[tuple[int, int, int]]:
        seeds = range(log.n_people) if self.seed_individuals is None else self.seed_individuals
        if len(seeds) == 0:
            raise ValueError("seeding protocol has no seed individuals")
        if len(self.seed_days) == 0:
            raise ValueError("seeding protocol has no seed days")
        for s in seeds:
            if not 0 <= s < log.n_people:
                raise ValueError(f"seed individual {s} outside roster of {log.n_people}")
        for d in self.seed_days:
            if not 0 <= d < log.n_days:
                raise ValueError(f"seed day {d} outside the {log.n_days}-day log")
        return [
            (s, d, r)
            for s in seeds
            for d in self.seed_days
            for r in range(self.repetitions_per_combination)
        ]


class InfectionRecord(NamedTuple):
    infector: int
    infectee: int
    event_index: int
    time: float


@dataclass(frozen=True)
class EpidemicOutcome:
    seed: int
    seed_day: int
    replicate: int
    final_size: int
    infection_records: tuple[InfectionRecord, ...]
    infection_time: np.ndarray = field(repr=False, compare=False)
    recovery_time: np.ndarray = field(repr=False, compare=False)

    @property
    def infected(self) -> frozenset[int]:
        return frozenset([self.seed, *(r.infectee for r in self.infection_records)])

    def __eq__(self, other):
        if not isinstance(other, EpidemicOutcome):
            return NotImplemented
        return (
            (self.seed, self.seed_day, self.replicate, self.final_size, self.infection_records)
            == (other.seed, other.seed_day, other.replicate, other.final_size, other.infection_records)
            and np.array_equal(self.infection_time, other.infection_time)
            and np.array_equal(self.recovery_time, other.recovery_time)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class FinalSizeEstimate:
    mean: float
    std_error: float
    n_runs: int
    per_run: tuple[int, ...]

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "FinalSizeEstimate":
        sizes = tuple(int(s) for s in sizes)
        if not sizes:
            raise ValueError("no runs to summarise")
        arr = np.asarray(sizes, dtype=np.float64)
        n = len(arr)
        se = float(arr.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(float(arr.mean()), se, n, sizes)


# ---------------------------------------------------------------------- kernel


@numba.njit(nogil=True, cache=True)
def _replay(a, b, start, prob, u, first, rec_span, seed, t0, day_length, iso_lag,
            inf_time, rec_time, rec_from, rec_to, rec_event):
    n = rec_span.shape[0]
    infected = np.zeros(n, dtype=np.bool_)
    iso_from = np.full(n, np.inf)
    inf_time[:] = np.inf
    rec_time[:] = np.inf

    infected[seed] = True
    inf_time[seed] = t0
    rec_time[seed] = t0 + rec_span[seed]
    if iso_lag >= 0:
        iso_from[seed] = (math.floor(t0 / day_length) + iso_lag) * day_length
    latest = rec_time[seed]
    k = 0

    for e in range(first, a.shape[0]):
        s = start[e]
        if s >= latest:
            break
        x = a[e]
        y = b[e]
        if infected[x] and iso_from[x] <= s and s < rec_time[x]:
            continue
        if infected[y] and iso_from[y] <= s and s < rec_time[y]:
            continue
        # the seed is live from t0 inclusive, everyone else strictly after infection
        x_live = infected[x] and s < rec_time[x] and (inf_time[x] < s or x == seed)
        y_live = infected[y] and s < rec_time[y] and (inf_time[y] < s or y == seed)
        if x_live and not infected[y]:
            src = x
            dst = y
        elif y_live and not infected[x]:
            src = y
            dst = x
        else:
            continue
        if u[e - first] < prob[e]:
            infected[dst] = True
            inf_time[dst] = s
            rec_time[dst] = s + rec_span[dst]
            if iso_lag >= 0:
                iso_from[dst] = (math.floor(s / day_length) + iso_lag) * day_length
            if rec_time[dst] > latest:
                latest = rec_time[dst]
            rec_from[k] = src
            rec_to[k] = dst
            rec_event[k] = e
            k += 1
    return k


class _Prepared:
    """Per-(log, params) arrays shared by every run."""

    def __init__(self, log: ContactLog, params: DiseaseParams):
        self.log = log
        self.params = params
        self.a = np.ascontiguousarray(log.a)
        self.b = np.ascontiguousarray(log.b)
        self.start = np.ascontiguousarray(log.start)
        self.prob = np.ascontiguousarray(transmission_probability(log.duration, params), dtype=np.float64)
        self.keys = log.event_keys
        self.person_keys = rng.person_keys(log.n_people)

    def recovery_spans(self, master_seed, seed, seed_day, replicate) -> np.ndarray:
        gamma = self.params.gamma_per_day
        if gamma == 0:
            return np.full(self.log.n_people, np.inf)
        key = rng.run_key(master_seed, rng.STREAM_RECOVERY, seed, seed_day, replicate)
        u = rng.keyed_uniforms(self.person_keys, key)
        return -np.log1p(-u) / gamma * self.log.day_length

    def run(self, seed: int, seed_day: int, replicate: int, master_seed: int, iso_lag: int = -1) -> EpidemicOutcome:
        log = self.log
        if not 0 <= seed < log.n_people:
            raise ValueError(f"seed {seed} outside roster of {log.n_people}")
        if not 0 <= seed_day < log.n_days:
            raise ValueError(f"seed day {seed_day} outside the {log.n_days}-day log")
        t0 = seed_day * log.day_length
        first = int(np.searchsorted(self.start, t0, side="left"))
        key = rng.run_key(master_seed, rng.STREAM_TRANSMISSION, seed, seed_day, replicate)
        u = rng.keyed_uniforms(self.keys[first:], key)
        spans = self.recovery_spans(master_seed, seed, seed_day, replicate)
        n = log.n_people
        inf_time = np.empty(n)
        rec_time = np.empty(n)
        rec_from = np.empty(n, dtype=np.int64)
        rec_to = np.empty(n, dtype=np.int64)
        rec_event = np.empty(n, dtype=np.int64)
        k = _replay(self.a, self.b, self.start, self.prob, u, first, spans, seed, t0,
                    log.day_length, iso_lag, inf_time, rec_time, rec_from, rec_to, rec_event)
        records = tuple(
            InfectionRecord(int(rec_from[i]), int(rec_to[i]), int(rec_event[i]), float(self.start[rec_event[i]]))
            for i in range(k)
        )
        inf_time.setflags(write=False)
        rec_time.setflags(write=False)
        return EpidemicOutcome(seed, seed_day, replicate, 1 + k, records, inf_time, rec_time)


def simulate_once(log: ContactLog, params: DiseaseParams, seed: int, seed_day: int,
                  replicate: int = 0, master_seed: int = 0) -> EpidemicOutcome:
    return _Prepared(log, params).run(seed, seed_day, replicate, master_seed)


def _resolve_workers(workers: int | None) -> int:
    if workers is None or workers < 1:
        return 1
    return workers


def run_protocol(log: ContactLog, params: DiseaseParams, protocol: SeedingProtocol,
                 master_seed: int = 0, workers: int | None = 1, iso_lag: int = -1) -> list[EpidemicOutcome]:
    """Every (seed, day, replicate) run of ``protocol``, in protocol order."""
    combos = protocol.combinations(log)
    prepared = _Prepared(log, params)

    def job(combo):
        s, d, r = combo
        return prepared.run(s, d, r, master_seed, iso_lag)

    workers = _resolve_workers(workers)
    if workers == 1:
        return [job(c) for c in combos]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, combos))


def estimate_final_size(log: ContactLog, params: DiseaseParams, protocol: SeedingProtocol,
                        master_seed: int = 0, workers: int | None = 1) -> FinalSizeEstimate:
    outcomes = run_protocol(log, params, protocol, master_seed, workers)
    return FinalSizeEstimate.from_sizes([o.final_size for o in outcomes])
