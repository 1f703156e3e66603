import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mimopred.phy import (actual_rate, actual_rates, nominal_rate,
                          transmit_diversity_rate, zf_beamformer, zf_beams)


def _channels(seed, S, M):
    r = np.random.default_rng(seed)
    return (r.standard_normal((S, M)) + 1j * r.standard_normal((S, M))) / np.sqrt(2)


instances = st.tuples(st.integers(0, 2**32 - 1), st.sampled_from([2, 4])).flatmap(
    lambda t: st.tuples(st.just(t[0]), st.integers(1, t[1]), st.just(t[1])))


@given(instances, st.floats(0.1, 1000))
@settings(max_examples=300)
def test_orthogonality_and_perfect_csit(inst, P):
    seed, S, M = inst
    h = _channels(seed, S, M)
    dec = zf_beamformer(h, power=P)
    assert not dec.dropped
    cross = h.conj() @ dec.beams
    off = cross - np.diag(np.diag(cross))
    assert np.max(np.abs(off)) <= 1e-9 * max(1.0, np.max(np.abs(np.diag(cross))))
    np.testing.assert_allclose(np.linalg.norm(dec.beams, axis=0), 1.0, rtol=1e-12)
    assert dec.total_power == pytest.approx(P)
    rep = actual_rate(h, dec, h_hat=h)
    np.testing.assert_allclose(rep.actual, rep.nominal, rtol=1e-9, atol=1e-12)


def test_gain_identity(rng):
    h = _channels(3, 3, 4)
    v = zf_beams(h)
    g = np.abs(np.sum(h.conj() * v.T, axis=1)) ** 2
    inv = np.linalg.inv(h.conj() @ h.T)
    np.testing.assert_allclose(g, 1.0 / np.real(np.diag(inv)), rtol=1e-10)


def test_mismatch_creates_interference(rng):
    h_hat = _channels(1, 3, 4)
    h = h_hat + 0.3 * _channels(2, 3, 4)
    dec = zf_beamformer(h_hat, power=100.0)
    rep = actual_rate(h, dec, h_hat)
    assert np.all(rep.interference > 0)
    assert np.sum(rep.actual) < np.sum(rep.nominal)


def test_batched_rates_match_single():
    h = np.stack([_channels(s, 2, 4) for s in range(5)])
    v = zf_beams(h)
    p = np.array([5.0, 5.0])
    r, _ = actual_rates(h, v, p)
    for i in range(5):
        for k in range(2):
            assert r[i, k] == pytest.approx(nominal_rate(h[i, k], v[i, :, k], 5.0))


def test_collinear_user_dropped():
    h = _channels(4, 2, 4)
    h = np.vstack([h, 0.5 * h[0]])
    dec = zf_beamformer(h, users=[7, 8, 9], power=1.0)
    assert dec.dropped == (9,)
    assert dec.users == (7, 8)


def test_validation():
    with pytest.raises(ValueError):
        zf_beamformer(_channels(0, 3, 2))
    with pytest.raises(ValueError):
        zf_beamformer(_channels(0, 2, 4), users=[1])


def test_transmit_diversity():
    h = np.array([1.0, 1.0j, 0, 0])
    nom, act = transmit_diversity_rate(h, 100.0, 4)
    assert act == pytest.approx(np.log1p(50.0))
    assert nom == act
    nom, act = transmit_diversity_rate(h, 100.0, 4, norm2_feedback=1.0)
    assert nom == pytest.approx(np.log1p(25.0))
    with pytest.raises(ValueError):
        transmit_diversity_rate(h, 0.0, 4)
