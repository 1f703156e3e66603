import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mimopred.tracker import (Predictability, PredictabilityState,
                              blocks_to_predictable, classify, feedback_payload,
                              nmse, record_error)


def test_nmse_basics(rng):
    h = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    assert nmse(h, h) == 0
    assert nmse(np.zeros_like(h), h) == pytest.approx(1.0)
    assert math.isnan(nmse(h, np.zeros_like(h)))


def test_starts_predictable():
    s = PredictabilityState()
    assert s.predictable and s.smoothed == 0


def test_bad_thresholds():
    with pytest.raises(ValueError):
        PredictabilityState(theta_high=0.1, theta_low=0.2)
    with pytest.raises(ValueError):
        PredictabilityState(gamma=0.0)


def test_zero_actual_is_skipped():
    s = PredictabilityState()
    record_error(s, np.ones(4), np.zeros(4))
    assert s.skipped == 1 and s.samples == 0 and s.smoothed == 0


def test_hysteresis_band():
    s = PredictabilityState()
    s.smoothed = 0.15
    assert classify(s) is Predictability.PREDICTABLE
    s.smoothed = 0.25
    assert classify(s) is Predictability.NON_PREDICTABLE
    s.smoothed = 0.15
    assert classify(s) is Predictability.NON_PREDICTABLE
    s.smoothed = 0.05
    assert classify(s) is Predictability.PREDICTABLE


@given(st.lists(st.floats(0, 3), min_size=1, max_size=60))
def test_smoothed_error_is_an_average(errors):
    s = PredictabilityState()
    for e in errors:
        # prediction error with NMSE exactly e
        record_error(s, np.array([1 + math.sqrt(e)]), np.array([1.0]))
    assert 0 <= s.smoothed <= max(errors) + 1e-12


def test_flag_flips_after_sustained_error():
    s = PredictabilityState()
    for i in range(100):
        record_error(s, np.zeros(2), np.ones(2))
        if classify(s) is Predictability.NON_PREDICTABLE:
            break
    # (1 - 0.95^n) > 0.2 first at n = 5
    assert i + 1 == 5


def test_recovery_time_formula():
    s = PredictabilityState(smoothed=1.0, flag=Predictability.NON_PREDICTABLE)
    n = 0
    while classify(s) is Predictability.NON_PREDICTABLE:
        record_error(s, np.ones(2), np.ones(2))
        n += 1
    assert n == blocks_to_predictable(1.0, 0.1, 0.05)
    assert blocks_to_predictable(0.05, 0.1, 0.05) == 0


def test_payloads():
    good = PredictabilityState()
    traj = np.ones((10, 4), dtype=complex)
    p = feedback_payload(good, traj, 3.0)
    assert p.predictable and p.reals == 80
    bad = PredictabilityState(flag=Predictability.NON_PREDICTABLE)
    q = feedback_payload(bad, traj, 3.0)
    assert not q.predictable and q.reals == 1 and q.norm2 == 3.0
