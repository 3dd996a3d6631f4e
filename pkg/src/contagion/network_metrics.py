"""Weighted contact networks, Burt's constraint and the productivity rule."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contact_log import Channel, ContactLog

__all__ = [
    "WeightedNetwork",
    "ConstraintReport",
    "ProductivityModel",
    "UndefinedMultiplierError",
    "aggregate",
    "burt_constraint",
    "constraint_vector",
    "constraint_report",
    "productivity_multiplier",
]


class UndefinedMultiplierError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class WeightedNetwork:
    n_people: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (self.n_people, self.n_people):
            raise ValueError(f"weights must be {self.n_people}x{self.n_people}, got {w.shape}")
        if np.any(w < 0) or not np.array_equal(w, w.T) or np.any(np.diag(w) != 0):
            raise ValueError("weights must be symmetric, non-negative, with zero diagonal")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def scaled(self, factor: float) -> "WeightedNetwork":
        return WeightedNetwork(self.n_people, self.weights * factor)


def aggregate(log: ContactLog, channel: Channel = Channel.INTERACTION) -> WeightedNetwork:
    """Total contact minutes per pair on one channel."""
    sel = log.channel == int(channel)
    w = np.zeros((log.n_people, log.n_people))
    np.add.at(w, (log.a[sel], log.b[sel]), log.duration[sel])
    return WeightedNetwork(log.n_people, w + w.T)


def constraint_vector(net: WeightedNetwork) -> np.ndarray:
    """Constraint of every node, NaN for isolates.

    c_i = sum over neighbours j of (p_ij + sum_q p_iq p_qj)^2 with
    p_ij = w_ij / sum_k w_ik. The diagonal of P is zero, so the q = i and
    q = j terms of the indirect sum vanish on their own.
    """
    w = net.weights
    strength = w.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(strength[:, None] > 0, w / strength[:, None], 0.0)
    local = (p + p @ p) ** 2
    c = np.where(w > 0, local, 0.0).sum(axis=1)
    c[strength == 0] = np.nan
    return c


def burt_constraint(net: WeightedNetwork, i: int) -> float | None:
    """Constraint of node ``i``; ``None`` when it has no ties."""
    w = net.weights
    row = w[i]
    total = row.sum()
    if total == 0:
        return None
    p_i = row / total
    strength = w.sum(axis=1)
    value = 0.0
    for j in np.flatnonzero(row):
        indirect = 0.0
        for q in np.flatnonzero(row):
            if q == j or w[q, j] == 0:
                continue
            indirect += p_i[q] * w[q, j] / strength[q]
        value += (p_i[j] + indirect) ** 2
    return float(value)


@dataclass(frozen=True)
class ConstraintReport:
    per_node: tuple[float | None, ...]
    mean: float | None
    sd: float | None
    n_isolates: int

    @property
    def n_defined(self) -> int:
        return len(self.per_node) - self.n_isolates

    def to_dict(self) -> dict:
        return {
            "per_node": list(self.per_node),
            "mean": self.mean,
            "sd": self.sd,
            "n_isolates": self.n_isolates,
        }


def constraint_report(net: WeightedNetwork) -> ConstraintReport:
    c = constraint_vector(net)
    defined = c[~np.isnan(c)]
    per_node = tuple(None if math.isnan(v) else float(v) for v in c)
    mean = float(defined.mean()) if defined.size else None
    sd = float(defined.std(ddof=1)) if defined.size > 1 else None
    return ConstraintReport(per_node, mean, sd, int(np.isnan(c).sum()))


@dataclass(frozen=True)
class ProductivityModel:
    percent_per_sd: float = 0.10
    baseline_sd: float | None = None


def productivity_multiplier(baseline: ConstraintReport, scenario: ConstraintReport,
                            model: ProductivityModel | None = None) -> float:
    """Department productivity relative to baseline (1.0 = unchanged).

    Linear in the shift of mean constraint, measured in baseline SDs.
    """
    model = model or ProductivityModel()
    sd = model.baseline_sd if model.baseline_sd is not None else baseline.sd
    if sd is None or not sd > 0:
        raise UndefinedMultiplierError("baseline constraint SD is zero or undefined")
    if baseline.mean is None or scenario.mean is None:
        raise UndefinedMultiplierError("mean constraint undefined (every node isolated)")
    return 1.0 + model.percent_per_sd * (scenario.mean - baseline.mean) / sd
