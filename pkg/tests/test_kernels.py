"""The compiled core and the numpy fallback must agree."""
import numpy as np
import pytest

from mimopred import kernels
from mimopred.kernels import _fallback

try:
    from mimopred.kernels import _core
except ImportError:  # pragma: no cover - extension not built
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled core not built")


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")


def _h(rng, K, M):
    return rng.standard_normal((K, M)) + 1j * rng.standard_normal((K, M))


@needs_core
def test_synth_grid(rng):
    amps = _h(rng, 30, 4)
    z, tau = rng.uniform(-0.02, 0.02, 30), rng.uniform(0, 0.25, 30)
    t, n = np.arange(-5.0, 15.0), np.array([0.0, 3.0, 199.0])
    np.testing.assert_allclose(_core.synth_grid(amps, z, tau, t, n),
                               _fallback.synth_grid(amps, z, tau, t, n),
                               rtol=1e-10, atol=1e-12)


@needs_core
def test_smoothed_covariance(rng):
    rows = _h(rng, 7, 40)
    np.testing.assert_allclose(_core.smoothed_covariance(rows, 15),
                               _fallback.smoothed_covariance(rows, 15),
                               rtol=1e-10, atol=1e-12)


def test_covariance_is_hermitian_and_persymmetric(rng):
    c = kernels.smoothed_covariance(_h(rng, 3, 30), 10)
    np.testing.assert_allclose(c, c.conj().T, atol=1e-12)
    J = np.eye(10)[::-1]
    np.testing.assert_allclose(c, J @ c.conj() @ J, atol=1e-12)


@needs_core
@pytest.mark.parametrize("seed", range(30))
def test_gains_and_greedy(seed):
    rng = np.random.default_rng(seed)
    K, M = int(rng.integers(1, 9)), int(rng.choice([2, 4]))
    h = _h(rng, K, M)
    sel = np.arange(min(K, M))
    a, b = _core.zf_gains(h, sel), _fallback.zf_gains(h, sel)
    np.testing.assert_allclose(a, b, rtol=1e-10)
    w = rng.uniform(0.1, 3.0, K)
    mask = rng.random(K) < 0.8
    sa, oa = _core.greedy_zf(h, w, mask, 50.0, M)
    sb, ob = _fallback.greedy_zf(h, w, mask, 50.0, M)
    assert list(sa) == list(sb)
    assert oa == pytest.approx(ob, rel=1e-10)


@needs_core
def test_singular_selection(rng):
    h = _h(rng, 2, 4)
    h[1] = 2 * h[0]
    assert _core.zf_gains(h, np.array([0, 1])) is None
    assert _fallback.zf_gains(h, np.array([0, 1])) is None


def test_gain_identity(rng):
    h = _h(rng, 3, 4)
    g = kernels.zf_gains(h, np.array([0, 2]))
    sub = h[[0, 2]]
    inv = np.linalg.inv(sub.conj() @ sub.T)
    np.testing.assert_allclose(g, 1 / np.real(np.diag(inv)), rtol=1e-10)
