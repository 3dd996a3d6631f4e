"""Contact-log data model, CSV ingestion and the synthetic workplace generator.

A log is stored column-wise (numpy arrays, read-only) because every consumer
downstream (the epidemic replay, the network aggregation, the threshold
filters) works on whole columns. ``ContactLog.events`` materialises the
row-wise ``ContactEvent`` view on demand.
"""
from __future__ import annotations

import enum
import hashlib
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

__all__ = [
    "Channel",
    "ContactEvent",
    "ContactLog",
    "ContactLogError",
    "LogParseError",
    "LogValidationError",
    "SyntheticLogConfig",
    "read_log",
    "write_log",
    "generate_synthetic",
]

HEADER_TAG = "#contactlog v1"


class ContactLogError(ValueError):
    pass


class LogParseError(ContactLogError):
    def __init__(self, path, lineno: int, message: str):
        self.path = path
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


class LogValidationError(ContactLogError):
    pass


class Channel(enum.IntEnum):
    INTERACTION = 0
    PROXIMITY = 1

    @property
    def code(self) -> str:
        return "I" if self is Channel.INTERACTION else "P"

    @classmethod
    def from_code(cls, code: str) -> "Channel":
        try:
            return {"I": cls.INTERACTION, "P": cls.PROXIMITY}[code]
        except KeyError:
            raise ValueError(f"unknown channel code {code!r} (expected I or P)") from None

    @classmethod
    def parse(cls, name: "str | Channel") -> "Channel":
        if isinstance(name, Channel):
            return name
        lowered = name.strip().lower()
        if lowered in ("i", "interaction"):
            return cls.INTERACTION
        if lowered in ("p", "proximity"):
            return cls.PROXIMITY
        raise ValueError(f"unknown channel {name!r}")


@dataclass(frozen=True)
class ContactEvent:
    a: int
    b: int
    start: float
    duration: float
    channel: Channel = Channel.INTERACTION

    @property
    def end(self) -> float:
        return self.start + self.duration


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ContactLog:
    """Roster size, working-day horizon and a canonically ordered event table.

    Construct through :meth:`from_arrays` or :meth:`from_events`; both
    canonicalise (``a < b``) and sort by ``(start, a, b, channel, duration)``.
    The raw constructor assumes its arrays are already canonical.
    """

    n_people: int
    n_days: int
    day_length: float
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    start: np.ndarray = field(repr=False)
    duration: np.ndarray = field(repr=False)
    channel: np.ndarray = field(repr=False)

    @classmethod
    def from_arrays(cls, n_people, n_days, day_length, a, b, start, duration, channel) -> "ContactLog":
        a = np.asarray(a, dtype=np.int64).ravel()
        b = np.asarray(b, dtype=np.int64).ravel()
        start = np.asarray(start, dtype=np.float64).ravel()
        duration = np.asarray(duration, dtype=np.float64).ravel()
        channel = np.asarray(channel, dtype=np.int8).ravel()
        if not (len(a) == len(b) == len(start) == len(duration) == len(channel)):
            raise LogValidationError("event columns have different lengths")
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        order = np.lexsort((duration, channel, hi, lo, start))
        log = cls(
            int(n_people),
            int(n_days),
            float(day_length),
            _readonly(lo[order]),
            _readonly(hi[order]),
            _readonly(start[order]),
            _readonly(duration[order]),
            _readonly(channel[order]),
        )
        log.validate()
        return log

    @classmethod
    def from_events(cls, n_people: int, n_days: int, day_length: float, events: Iterable[ContactEvent]) -> "ContactLog":
        events = list(events)
        return cls.from_arrays(
            n_people,
            n_days,
            day_length,
            [e.a for e in events],
            [e.b for e in events],
            [e.start for e in events],
            [e.duration for e in events],
            [int(e.channel) for e in events],
        )

    def validate(self) -> None:
        if self.n_people < 1:
            raise LogValidationError(f"n_people must be positive, got {self.n_people}")
        if self.n_days < 1:
            raise LogValidationError(f"n_days must be positive, got {self.n_days}")
        if not (self.day_length > 0 and math.isfinite(self.day_length)):
            raise LogValidationError(f"day_length must be positive, got {self.day_length}")
        if len(self) == 0:
            return
        if np.any(self.a == self.b):
            i = int(np.argmax(self.a == self.b))
            raise LogValidationError(f"self-contact for person {int(self.a[i])} at start={self.start[i]!r}")
        if self.a.min() < 0 or self.b.max() >= self.n_people:
            raise LogValidationError(f"person id outside roster of {self.n_people}")
        if not np.all(np.isfinite(self.start)) or not np.all(np.isfinite(self.duration)):
            raise LogValidationError("non-finite start or duration")
        if np.any(self.duration <= 0):
            raise LogValidationError("event durations must be positive")
        if np.any(self.start < 0):
            raise LogValidationError("event starts must be non-negative")
        over = self.start + self.duration > self.horizon
        if np.any(over):
            i = int(np.argmax(over))
            raise LogValidationError(
                f"event ({int(self.a[i])},{int(self.b[i])}) at start={self.start[i]!r} "
                f"with duration={self.duration[i]!r} exceeds horizon {self.horizon!r}"
            )
        if np.any(~np.isin(self.channel, (0, 1))):
            raise LogValidationError("channel codes must be 0 (interaction) or 1 (proximity)")

    @property
    def horizon(self) -> float:
        return self.day_length * self.n_days

    def __len__(self) -> int:
        return len(self.a)

    @property
    def events(self) -> tuple[ContactEvent, ...]:
        return tuple(
            ContactEvent(int(a), int(b), float(s), float(d), Channel(int(c)))
            for a, b, s, d, c in zip(self.a, self.b, self.start, self.duration, self.channel)
        )

    def day_of(self, time) -> np.ndarray:
        return np.floor_divide(time, self.day_length).astype(np.int64)

    def subset(self, mask: np.ndarray) -> "ContactLog":
        """Log with only the masked events; the roster and horizon are kept."""
        mask = np.asarray(mask, dtype=bool)
        return ContactLog(
            self.n_people,
            self.n_days,
            self.day_length,
            _readonly(self.a[mask]),
            _readonly(self.b[mask]),
            _readonly(self.start[mask]),
            _readonly(self.duration[mask]),
            _readonly(self.channel[mask]),
        )

    def project(self, channel: Channel) -> "ContactLog":
        return self.subset(self.channel == int(channel))

    def count(self, channel: Channel) -> int:
        return int(np.count_nonzero(self.channel == int(channel)))

    @cached_property
    def event_keys(self) -> np.ndarray:
        """Content-derived 64-bit identity of every event, channel excluded.

        Identical events within one channel are told apart by occurrence rank.
        Filtering never changes the key of a retained event, and an
        interaction event and its proximity shadow share a key.
        """
        from .rng import event_keys

        return _readonly(event_keys(self.a, self.b, self.start, self.duration, self.channel))

    def content_hash(self) -> str:
        """Git blob hash of the canonical CSV serialisation."""
        data = serialize(self).encode("utf-8")
        return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()

    def __eq__(self, other) -> bool:
        if not isinstance(other, ContactLog):
            return NotImplemented
        return (
            self.n_people == other.n_people
            and self.n_days == other.n_days
            and self.day_length == other.day_length
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.b, other.b)
            and np.array_equal(self.start, other.start)
            and np.array_equal(self.duration, other.duration)
            and np.array_equal(self.channel, other.channel)
        )

    __hash__ = None  # type: ignore[assignment]


# --------------------------------------------------------------------- CSV I/O


def _fmt(x: float) -> str:
    return repr(float(x))


def serialize(log: ContactLog) -> str:
    lines = [f"{HEADER_TAG} n_people={log.n_people} n_days={log.n_days} day_length={_fmt(log.day_length)}"]
    codes = ("I", "P")
    for a, b, s, d, c in zip(log.a.tolist(), log.b.tolist(), log.start.tolist(), log.duration.tolist(), log.channel.tolist()):
        lines.append(f"{a},{b},{s!r},{d!r},{codes[c]}")
    return "\n".join(lines) + "\n"


def write_log(log: ContactLog, path) -> None:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(serialize(log))
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write contact log: {exc.strerror}", str(path)) from exc


def _parse_header(path, line: str) -> dict:
    if not line.startswith(HEADER_TAG):
        raise LogParseError(path, 1, f"expected header starting with {HEADER_TAG!r}")
    directives = {}
    for token in line[len(HEADER_TAG):].split():
        key, sep, value = token.partition("=")
        if not sep:
            raise LogParseError(path, 1, f"malformed header directive {token!r}")
        try:
            if key in ("n_people", "n_days"):
                directives[key] = int(value)
            elif key == "day_length":
                directives[key] = float(value)
            else:
                raise LogParseError(path, 1, f"unknown header directive {key!r}")
        except ValueError:
            raise LogParseError(path, 1, f"non-numeric value in directive {token!r}") from None
    for key in ("n_days", "day_length"):
        if key not in directives:
            raise LogParseError(path, 1, f"header is missing the {key} directive")
    return directives


def parse_log(text: str, path="<string>") -> ContactLog:
    lines = text.split("\n")
    if not lines or not lines[0].strip():
        raise LogParseError(path, 1, "empty file")
    header = _parse_header(path, lines[0].rstrip("\r"))
    a, b, start, duration, channel = [], [], [], [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise LogParseError(path, lineno, f"expected 5 columns, got {len(parts)}")
        try:
            a.append(int(parts[0]))
            b.append(int(parts[1]))
            start.append(float(parts[2]))
            duration.append(float(parts[3]))
        except ValueError:
            raise LogParseError(path, lineno, f"non-numeric field in {line!r}") from None
        try:
            channel.append(int(Channel.from_code(parts[4].strip())))
        except ValueError as exc:
            raise LogParseError(path, lineno, str(exc)) from None
        if a[-1] == b[-1]:
            raise LogValidationError(f"{path}:{lineno}: self-contact for person {a[-1]}")
    n_people = header.get("n_people")
    if n_people is None:
        if not a:
            raise LogParseError(path, 1, "n_people directive required for a log without events")
        n_people = max(max(a), max(b)) + 1
    try:
        return ContactLog.from_arrays(n_people, header["n_days"], header["day_length"], a, b, start, duration, channel)
    except LogValidationError as exc:
        raise LogValidationError(f"{path}: {exc}") from None


def read_log(path) -> ContactLog:
    with open(path, encoding="utf-8") as fh:
        return parse_log(fh.read(), path=os.fspath(path))


# ------------------------------------------------------------------- generator


@dataclass(frozen=True)
class SyntheticLogConfig:
    """Generative model of a badge-style workplace log.

    Every person starts ``Poisson(mean_events_per_person_day / 2)`` interactions
    per working day, so each person takes part in about
    ``mean_events_per_person_day`` events per day. Partners come from a fixed
    per-person affinity vector drawn from a symmetric Dirichlet. Each
    interaction is mirrored by a proximity event with the same pair, start and
    duration, and extra proximity-only events bring the proximity total to
    ``proximity_inflation`` times the interaction total.
    """

    n_people: int = 36
    n_days: int = 20
    day_length: float = 480.0
    mean_events_per_person_day: float = 20.0
    duration_median: float = 2.0
    duration_shape: float = 1.0
    pair_affinity_concentration: float = 0.5
    proximity_inflation: float = 3.0
    master_seed: int = 0

    def __post_init__(self):
        if self.n_people < 1 or self.n_days < 1:
            raise ValueError("n_people and n_days must be positive")
        if not self.day_length > 0:
            raise ValueError("day_length must be positive")
        if self.mean_events_per_person_day < 0:
            raise ValueError("mean_events_per_person_day must be non-negative")
        if not self.duration_median > 0 or self.duration_shape < 0:
            raise ValueError("duration median must be positive and shape non-negative")
        if not self.pair_affinity_concentration > 0:
            raise ValueError("pair_affinity_concentration must be positive")
        if self.proximity_inflation < 1:
            raise ValueError("proximity_inflation must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")


# Badge records are second-resolution.
_TICK = 1.0 / 60.0


def _draw_events(rng, cfg: SyntheticLogConfig, affinity: np.ndarray, rate: float):
    n, L = cfg.n_people, cfg.day_length
    counts = rng.poisson(rate, size=(cfg.n_days, n))
    total = int(counts.sum())
    day = np.repeat(np.tile(np.arange(cfg.n_days), (n, 1)).T.ravel(), counts.ravel())
    initiator = np.repeat(np.tile(np.arange(n), cfg.n_days), counts.ravel())
    # inverse-CDF partner draw from each initiator's affinity row
    cdf = np.cumsum(affinity, axis=1)
    cdf[:, -1] = 1.0
    u = rng.random(total)
    partner = np.empty(total, dtype=np.int64)
    for i in range(n):
        sel = initiator == i
        partner[sel] = np.searchsorted(cdf[i], u[sel], side="right")
    raw = rng.lognormal(math.log(cfg.duration_median), cfg.duration_shape, size=total)
    duration = np.clip(np.round(raw / _TICK), 1, math.floor(L / _TICK)) * _TICK
    slack = np.maximum(L - duration, 0.0)
    offset = np.floor(rng.random(total) * slack / _TICK) * _TICK
    start = day * L + offset
    # keep the arithmetic from pushing an event a hair past the day boundary
    day_end = (day + 1) * L
    start = np.minimum(start, day_end - duration)
    late = start + duration > day_end
    while np.any(late):
        start[late] = np.nextafter(start[late], -np.inf)
        late = start + duration > day_end
    return initiator, partner, start, duration


def generate_synthetic(config: SyntheticLogConfig) -> ContactLog:
    cfg = config
    n = cfg.n_people
    rng = np.random.default_rng(cfg.master_seed)
    if n < 2 or cfg.mean_events_per_person_day == 0:
        return ContactLog.from_arrays(n, cfg.n_days, cfg.day_length, [], [], [], [], [])

    weights = rng.dirichlet(np.full(n - 1, cfg.pair_affinity_concentration), size=n)
    affinity = np.zeros((n, n))
    for i in range(n):
        affinity[i, np.arange(n) != i] = weights[i]

    rate = cfg.mean_events_per_person_day / 2.0
    ia, ib, istart, idur = _draw_events(rng, cfg, affinity, rate)
    pa, pb, pstart, pdur = _draw_events(rng, cfg, affinity, rate * (cfg.proximity_inflation - 1.0))

    n_i, n_p = len(ia), len(pa)
    return ContactLog.from_arrays(
        n,
        cfg.n_days,
        cfg.day_length,
        np.concatenate([ia, ia, pa]),
        np.concatenate([ib, ib, pb]),
        np.concatenate([istart, istart, pstart]),
        np.concatenate([idur, idur, pdur]),
        np.concatenate([
            np.full(n_i, Channel.INTERACTION, dtype=np.int8),
            np.full(n_i + n_p, Channel.PROXIMITY, dtype=np.int8),
        ]),
    )
