import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from contagion import rng
from contagion.contact_log import Channel, ContactEvent, ContactLog, SyntheticLogConfig, generate_synthetic
from contagion.epidemic import (
    DiseaseParams,
    FinalSizeEstimate,
    SeedingProtocol,
    estimate_final_size,
    run_protocol,
    simulate_once,
    transmission_probability,
)
from contagion.interventions import RemoveShort, apply_static

from conftest import chain_log
from oracles import random_small_log, temporal_reach

CERTAIN = DiseaseParams(beta_per_minute=math.inf, gamma_per_day=0.0)


def small_synthetic(seed, **kw):
    cfg = dict(n_people=12, n_days=6, mean_events_per_person_day=10, master_seed=seed)
    cfg.update(kw)
    return generate_synthetic(SyntheticLogConfig(**cfg)).project(Channel.INTERACTION)


# ------------------------------------------------------- transmission probability


def test_probability_examples():
    params = DiseaseParams()
    assert transmission_probability(0.0, params) == 0.0
    assert transmission_probability(1.0, params) == pytest.approx(1 - math.exp(-0.007), abs=1e-15)
    assert transmission_probability(1.0, params) == pytest.approx(0.0069756, abs=1e-7)
    assert transmission_probability(100.0, params) == pytest.approx(0.5034147, abs=1e-7)


def test_probability_negative_duration():
    with pytest.raises(ValueError):
        transmission_probability(-1.0, DiseaseParams())


@given(st.floats(0, 1e4), st.floats(0, 1e4))
def test_probability_monotone_and_bounded(d1, d2):
    params = DiseaseParams()
    p1, p2 = transmission_probability(min(d1, d2), params), transmission_probability(max(d1, d2), params)
    assert 0 <= p1 <= p2 < 1 or (p2 == 1.0 and max(d1, d2) > 5000)


def test_linear_model_is_capped():
    params = DiseaseParams(model="linear")
    assert transmission_probability(10.0, params) == pytest.approx(0.07)
    assert transmission_probability(200.0, params) == 1.0


def test_disease_params_validation():
    with pytest.raises(ValueError):
        DiseaseParams(beta_per_minute=-1)
    with pytest.raises(ValueError):
        DiseaseParams(incubation_days=1)


# ------------------------------------------------------------------ single runs


def test_beta_zero_gives_size_one(chain):
    out = simulate_once(chain, DiseaseParams(beta_per_minute=0.0), 0, 0, 0, 0)
    assert out.final_size == 1 and out.infection_records == ()


def test_chain_forward(chain):
    out = simulate_once(chain, CERTAIN, 0, 0)
    assert out.final_size == 3
    assert [(r.infector, r.infectee) for r in out.infection_records] == [(0, 1), (1, 2)]
    assert [r.time for r in out.infection_records] == [10.0, 20.0]


def test_chain_reversed_cannot_reach_c(reversed_chain):
    out = simulate_once(reversed_chain, CERTAIN, 0, 0)
    assert out.final_size == 2
    assert out.infected == {0, 1}


def test_events_before_seed_day_cannot_transmit():
    log = chain_log(first=(0, 1, 10.0), second=(1, 2, 490.0), n_days=2)
    out = simulate_once(log, CERTAIN, 1, 1)
    assert out.infected == {1, 2}


def test_seed_transmits_at_day_start_inclusive():
    log = ContactLog.from_events(2, 2, 100.0, [ContactEvent(0, 1, 100.0, 1.0)])
    assert simulate_once(log, CERTAIN, 0, 1).final_size == 2


def test_no_relay_within_the_same_instant():
    log = ContactLog.from_events(3, 1, 100.0, [ContactEvent(0, 1, 5.0, 1.0), ContactEvent(1, 2, 5.0, 1.0)])
    assert simulate_once(log, CERTAIN, 0, 0).infected == {0, 1}


def test_isolated_seed_still_counts():
    log = ContactLog.from_events(3, 1, 100.0, [ContactEvent(1, 2, 5.0, 1.0)])
    assert simulate_once(log, DiseaseParams(), 0, 0).final_size == 1


def test_argument_errors(chain):
    with pytest.raises(ValueError):
        simulate_once(chain, DiseaseParams(), 3, 0)
    with pytest.raises(ValueError):
        simulate_once(chain, DiseaseParams(), 0, 1)


def test_recovery_stops_transmission():
    # gamma huge: the seed recovers almost at once
    log = chain_log()
    out = simulate_once(log, DiseaseParams(beta_per_minute=math.inf, gamma_per_day=1e9), 0, 0)
    assert out.final_size == 1


def test_recovery_time_mean_is_three_working_days():
    log = ContactLog.from_events(1, 1, 480.0, [])
    spans = [simulate_once(log, DiseaseParams(), 0, 0, r, 3).recovery_time[0] for r in range(4000)]
    assert np.mean(spans) / 480.0 == pytest.approx(3.0, rel=0.06)


def test_pure_function_of_inputs():
    log = small_synthetic(1)
    a = simulate_once(log, DiseaseParams(), 3, 2, 5, 99)
    b = simulate_once(log, DiseaseParams(), 3, 2, 5, 99)
    assert a == b
    others = [simulate_once(log, DiseaseParams(beta_per_minute=0.05), 3, 2, r, 99).final_size for r in range(30)]
    assert len(set(others)) > 1


@settings(max_examples=40)
@given(st.integers(0, 10_000), st.integers(0, 11), st.integers(0, 5), st.integers(0, 3))
def test_outcome_is_a_tree_rooted_at_seed(log_seed, seed, day, rep):
    log = small_synthetic(log_seed % 50, mean_events_per_person_day=20)
    out = simulate_once(log, DiseaseParams(beta_per_minute=0.05), seed, day, rep, log_seed)
    assert 1 <= out.final_size <= log.n_people
    assert out.final_size == 1 + len(out.infection_records)
    infected_at = {seed: day * log.day_length}
    for rec in out.infection_records:
        assert rec.infectee not in infected_at
        assert rec.infector in infected_at
        assert infected_at[rec.infector] <= rec.time
        assert rec.time < out.recovery_time[rec.infector]
        e = log.events[rec.event_index]
        assert {e.a, e.b} == {rec.infector, rec.infectee} and e.start == rec.time
        infected_at[rec.infectee] = rec.time


# ---------------------------------------------------------------- oracles


def test_matches_reachability_oracle_on_random_logs():
    rs = np.random.default_rng(12)
    for _ in range(30):
        n, n_days, L, raw = random_small_log(rs, integer_times=False)
        log = ContactLog.from_events(n, n_days, L, [ContactEvent(*r) for r in raw])
        triples = [(e.a, e.b, e.start) for e in log.events]
        for seed in range(n):
            for day in range(n_days):
                arrival = temporal_reach(n, triples, seed, day * L)
                out = simulate_once(log, CERTAIN, seed, day)
                assert out.infected == {i for i, t in enumerate(arrival) if t < math.inf}
                assert np.array_equal(np.where(np.isinf(out.infection_time), math.inf, out.infection_time), arrival)


def test_gamma_zero_equals_coupled_bernoulli_reach():
    params = DiseaseParams(beta_per_minute=0.2, gamma_per_day=0.0)
    rs = np.random.default_rng(4)
    for trial in range(20):
        n, n_days, L, raw = random_small_log(rs)
        log = ContactLog.from_events(n, n_days, L, [ContactEvent(*r) for r in raw])
        triples = [(e.a, e.b, e.start) for e in log.events]
        prob = 1 - np.exp(-0.2 * log.duration)
        for rep in range(3):
            seed, day = trial % n, trial % n_days
            u = rng.keyed_uniforms(log.event_keys, rng.run_key(5, rng.STREAM_TRANSMISSION, seed, day, rep))
            arrival = temporal_reach(n, triples, seed, day * L, open_edge=lambda i: u[i] < prob[i])
            out = simulate_once(log, params, seed, day, rep, 5)
            assert out.final_size == sum(t < math.inf for t in arrival)


# ---------------------------------------------------------------- estimates


def test_estimate_beta_zero():
    log = small_synthetic(2)
    est = estimate_final_size(log, DiseaseParams(beta_per_minute=0.0), SeedingProtocol(), 0)
    assert est.mean == 1.0 and est.std_error == 0.0
    assert set(est.per_run) == {1}


@pytest.mark.parametrize("n_people, expected", [(36, 180), (37, 185)])
def test_protocol_run_counts(n_people, expected):
    log = ContactLog.from_events(n_people, 20, 480.0, [])
    est = estimate_final_size(log, DiseaseParams(), SeedingProtocol(), 0)
    assert est.n_runs == expected


def test_chain_expectation_monte_carlo():
    p = 1 - math.exp(-0.7)
    log = chain_log()
    protocol = SeedingProtocol(seed_individuals=(0,), seed_days=(0,), repetitions_per_combination=10_000)
    est = estimate_final_size(log, DiseaseParams(gamma_per_day=0.0), protocol, master_seed=2024)
    assert abs(est.mean - (1 + p + p * p)) < 3 * est.std_error


def test_empty_protocol_rejected(chain):
    with pytest.raises(ValueError):
        estimate_final_size(chain, DiseaseParams(), SeedingProtocol(seed_individuals=()), 0)
    with pytest.raises(ValueError):
        estimate_final_size(chain, DiseaseParams(), SeedingProtocol(seed_days=()), 0)
    with pytest.raises(ValueError):
        estimate_final_size(chain, DiseaseParams(), SeedingProtocol(seed_days=(0, 1)), 0)


def test_final_size_estimate_statistics():
    est = FinalSizeEstimate.from_sizes([1, 2, 3, 6])
    assert est.mean == 3.0
    assert est.std_error == pytest.approx(np.std([1, 2, 3, 6], ddof=1) / 2)
    assert FinalSizeEstimate.from_sizes([4]).std_error == 0.0


def test_worker_count_does_not_change_results():
    log = small_synthetic(8)
    protocol = SeedingProtocol.first_days(log, 5, 2)
    one = run_protocol(log, DiseaseParams(beta_per_minute=0.03), protocol, 1, workers=1)
    many = run_protocol(log, DiseaseParams(beta_per_minute=0.03), protocol, 1, workers=6)
    assert one == many


def test_run_order_does_not_matter():
    log = small_synthetic(8)
    params = DiseaseParams(beta_per_minute=0.03)
    combos = SeedingProtocol.first_days(log).combinations(log)
    forward = [simulate_once(log, params, s, d, r, 4).final_size for s, d, r in combos]
    backward = [simulate_once(log, params, s, d, r, 4).final_size for s, d, r in reversed(combos)]
    assert forward == backward[::-1]
    assert estimate_final_size(log, params, SeedingProtocol.first_days(log), 4).per_run == tuple(forward)


# ---------------------------------------------------------------- coupling


@settings(max_examples=30)
@given(st.integers(0, 500), st.floats(0, 10), st.integers(0, 5))
def test_filtering_never_adds_infections_without_recovery(log_seed, threshold, rep):
    log = small_synthetic(log_seed, mean_events_per_person_day=20)
    params = DiseaseParams(beta_per_minute=0.05, gamma_per_day=0.0)
    filtered = apply_static(log, RemoveShort(threshold))
    for seed in range(0, log.n_people, 3):
        full = simulate_once(log, params, seed, 0, rep, log_seed)
        part = simulate_once(filtered, params, seed, 0, rep, log_seed)
        assert part.infected <= full.infected


@settings(max_examples=30)
@given(st.integers(0, 500), st.floats(0.001, 0.1), st.floats(0.001, 0.1))
def test_beta_monotone_without_recovery(log_seed, b1, b2):
    log = small_synthetic(log_seed)
    lo, hi = sorted((b1, b2))
    for seed in range(0, log.n_people, 4):
        small = simulate_once(log, DiseaseParams(beta_per_minute=lo, gamma_per_day=0.0), seed, 1, 0, 3)
        big = simulate_once(log, DiseaseParams(beta_per_minute=hi, gamma_per_day=0.0), seed, 1, 0, 3)
        assert small.infected <= big.infected


def test_filtering_can_add_infections_once_people_recover():
    # A meets X briefly on day 0 and at length on day 5; X meets Y on day 6.
    # Without the short chat X is infected later, is still infectious on day 6
    # and reaches Y. Recovery makes the removal of events non-monotone.
    L = 480.0
    log = ContactLog.from_events(3, 8, L, [
        ContactEvent(0, 1, 10.0, 0.5),
        ContactEvent(0, 1, 5 * L + 10, 60.0),
        ContactEvent(1, 2, 6 * L + 10, 60.0),
    ])
    params = DiseaseParams(beta_per_minute=math.inf, gamma_per_day=1 / 3)
    filtered = apply_static(log, RemoveShort(1.0))
    worse = [
        r for r in range(2000)
        if simulate_once(filtered, params, 0, 0, r, 0).final_size > simulate_once(log, params, 0, 0, r, 0).final_size
    ]
    assert worse
