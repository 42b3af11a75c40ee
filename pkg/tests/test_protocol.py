import math

import numpy as np
import pytest

from fewcopy import io
from fewcopy.errors import EmptyRecord, MismatchedSet, ScheduleExhausted, WrongProvenance
from fewcopy.protocol import (
    OutcomeRecord,
    analyze,
    estimate_fidelity,
    false_positive_trial,
    run_protocol,
)
from fewcopy.pauli import MixedState
from fewcopy.states import StateSource, basis_state, cluster6
from fewcopy.stats import n_max, confidence_min
from fewcopy.witness import builtin_w1, builtin_w2


def synthetic(mset, S, N):
    outcomes = [1] * S + [0] * (N - S)
    return OutcomeRecord(io.set_id(mset), [0] * N, outcomes)


def test_ideal_state_always_succeeds():
    rec = run_protocol(StateSource.constant(cluster6()), builtin_w2(), 200, np.random.default_rng(0))
    assert rec.S == rec.N == 200


def test_maximally_mixed_rate():
    N = 10_000
    rec = run_protocol(MixedState.maximally_mixed(6), builtin_w2(), N, np.random.default_rng(1))
    p = 65 / 128
    assert abs(rec.S / N - p) < 3 * math.sqrt(p * (1 - p) / N)


def test_product_state_below_full_bound():
    N = 10_000
    rec = run_protocol(basis_state("000000"), builtin_w1(), N, np.random.default_rng(2))
    assert abs(rec.S / N - 0.5) < 3 * math.sqrt(0.25 / N)
    assert rec.S / N < 9 / 16


def test_setting_frequencies_match_weights():
    N = 10_000
    rec = run_protocol(cluster6(), builtin_w1(), N, np.random.default_rng(3))
    frac = np.mean(rec.settings == 0)
    assert abs(frac - 0.5) < 3 * math.sqrt(0.25 / N)


def test_run_protocol_consumes_schedule():
    src = StateSource.drift([cluster6()] * 5)
    assert run_protocol(src, builtin_w2(), 5, np.random.default_rng(0)).N == 5
    with pytest.raises(ScheduleExhausted):
        run_protocol(src, builtin_w2(), 6, np.random.default_rng(0))


def test_run_protocol_deterministic():
    a = run_protocol(StateSource.white_noise(cluster6(), 0.5), builtin_w2(), 100, np.random.default_rng(9))
    b = run_protocol(StateSource.white_noise(cluster6(), 0.5), builtin_w2(), 100, np.random.default_rng(9))
    assert a.rounds == b.rounds


@pytest.mark.parametrize("mset,S,N,attr,lo,hi", [
    (builtin_w2(), 19, 20, "confidence_full", 0.9973, 0.9975),
    (builtin_w1(), 29, 36, "confidence_full", 0.9912, 0.9914),
    (builtin_w2(), 98, 112, "confidence_bisep", 0.99, 1.0),
])
def test_headline_confidences(mset, S, N, attr, lo, hi):
    rep = analyze(synthetic(mset, S, N), mset)
    assert lo <= getattr(rep, attr) <= hi


def test_analyze_fields_and_curve():
    mset = builtin_w2()
    rng = np.random.default_rng(4)
    rec = run_protocol(StateSource.white_noise(cluster6(), 0.8), mset, 60, rng)
    rep = analyze(rec, mset)
    assert rep.p_obs == rec.S / rec.N
    assert rep.delta_full == pytest.approx(rep.p_obs - 5 / 8)
    assert len(rep.curve) == rec.N
    assert rep.curve[-1][:3] == (rep.N, rep.S, rep.confidence_full)
    assert rep.curve[-1][3] == rep.confidence_bisep
    assert rep.fidelity == estimate_fidelity(rec)
    assert analyze(rec, mset) == rep
    # full-separability confidence dominates whenever both are conclusive
    for n, s, cf, cb in rep.curve:
        if s / n > 0.75:
            assert cf >= cb


def test_inconclusive_record():
    rep = analyze(synthetic(builtin_w1(), 5, 10), builtin_w1())
    assert not rep.conclusive_full and rep.confidence_full == 0.0
    assert rep.fidelity is None


def test_analyze_errors():
    with pytest.raises(MismatchedSet):
        analyze(synthetic(builtin_w1(), 3, 4), builtin_w2())
    with pytest.raises(EmptyRecord):
        analyze(OutcomeRecord(io.set_id(builtin_w1()), [], []), builtin_w1())


def test_fidelity_estimates():
    mset = builtin_w2()
    f, s = estimate_fidelity(synthetic(mset, 140, 160))
    assert f == pytest.approx(0.75)
    assert s == pytest.approx(2 * math.sqrt(0.875 * 0.125 / 160))
    assert round(s, 3) == 0.052
    assert estimate_fidelity(synthetic(mset, 30, 30)) == (1.0, 0.0)
    assert estimate_fidelity(synthetic(mset, 15, 30))[0] == 0.0
    with pytest.raises(WrongProvenance):
        estimate_fidelity(synthetic(builtin_w1(), 3, 4))


def test_confidence_crossing_matches_n_max():
    mset = builtin_w2()
    for v in (0.6, 0.746, 0.9, 1.0):
        p_obs = mset.mean_success(StateSource.white_noise(cluster6(), v).states[0])
        predicted = n_max(0.99, 5 / 8, p_obs)
        crossing = next(N for N in range(1, 1000) if confidence_min(p_obs - 5 / 8, 5 / 8, N) >= 0.99)
        assert abs(crossing - predicted) <= 1


def test_false_positive_orthogonal_state():
    from fewcopy.observables import BinaryObservable
    from fewcopy.witness import MeasurementSet

    m = BinaryObservable(1, np.diag([1.0, 0.0]))
    mset = MeasurementSet((m,), np.array([1.0]), 0.5)
    res = false_positive_trial(basis_state("1"), mset, 20, 0.1, 1000, np.random.default_rng(0))
    assert res.rate == 0.0


def test_false_positive_small_run():
    res = false_positive_trial(basis_state("000000"), builtin_w1(), 30, 0.15, 5000, np.random.default_rng(1))
    assert res.within_bound
