"""Hash-keyed (counter-based) uniforms.

Every random number in a simulation is a pure function of a key: the run
(master seed, seed person, seed day, replicate, stream) and the item it
decides (an event or a person). Nothing is drawn from shared generator state,
so a run gives the same answer whichever other events exist, in whatever
order or on whichever thread it is evaluated.

The mixer is the SplitMix64 finaliser.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

STREAM_TRANSMISSION = 1
STREAM_RECOVERY = 2


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def hash_words(*words: int) -> int:
    h = 0
    for k, w in enumerate(words, start=1):
        h = mix64(h ^ ((w + GOLDEN * k) & MASK64))
    return h


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def _hash_columns(columns) -> np.ndarray:
    h = np.zeros(len(columns[0]), dtype=np.uint64)
    with np.errstate(over="ignore"):
        for k, col in enumerate(columns, start=1):
            h = mix64_array(h ^ (np.asarray(col, dtype=np.uint64) + np.uint64((GOLDEN * k) & MASK64)))
    return h


def to_unit(bits: np.ndarray) -> np.ndarray:
    """Top 53 bits of each word as a double in [0, 1)."""
    return (bits >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def event_keys(a, b, start, duration, channel) -> np.ndarray:
    """Identity of each event from its content; see ``ContactLog.event_keys``.

    Assumes the canonical sort, so exact duplicates within a channel are
    adjacent and get occurrence ranks 0, 1, 2, ...
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    start = np.ascontiguousarray(start, dtype=np.float64)
    duration = np.ascontiguousarray(duration, dtype=np.float64)
    channel = np.asarray(channel)
    n = len(a)
    rank = np.zeros(n, dtype=np.int64)
    if n > 1:
        same = (
            (a[1:] == a[:-1])
            & (b[1:] == b[:-1])
            & (start[1:] == start[:-1])
            & (duration[1:] == duration[:-1])
            & (channel[1:] == channel[:-1])
        )
        idx = np.arange(n)
        run_start = np.where(np.concatenate([[False], same]), 0, idx)
        run_start = np.maximum.accumulate(run_start)
        rank = idx - run_start
    return _hash_columns([a, b, start.view(np.uint64), duration.view(np.uint64), rank])


def run_key(master_seed: int, stream: int, seed: int, seed_day: int, replicate: int) -> int:
    return hash_words(master_seed, stream, seed, seed_day, replicate)


def keyed_uniforms(keys: np.ndarray, key: int) -> np.ndarray:
    """One uniform per item key under the given run key."""
    return to_unit(mix64_array(np.asarray(keys, dtype=np.uint64) ^ np.uint64(key)))


def person_keys(n_people: int) -> np.ndarray:
    return _hash_columns([np.arange(n_people, dtype=np.uint64)])
