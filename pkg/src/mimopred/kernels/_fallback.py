"""Pure numpy versions of the hot kernels.

Every function here has the same signature and semantics as its compiled
counterpart in ``_core.pyx``. The fallback is used when the extension is
not built or when ``MIMOPRED_PURE_PYTHON=1`` is set.
"""
import numpy as np


def synth_grid(amps, zeta, tau, t, n):
    """Evaluate a sum of 2D complex exponentials on a (time, subcarrier) grid.

    Parameters
    ----------
    amps : (S, M) complex ndarray
        Per-component, per-antenna complex amplitude.
    zeta : (S,) float ndarray
        Doppler in cycles per OFDM symbol.
    tau : (S,) float ndarray
        Delay in cycles per subcarrier.
    t, n : 1D float ndarrays
        Symbol and subcarrier indices.

    Returns
    -------
    (len(t), len(n), M) complex ndarray
    """
    amps = np.asarray(amps, dtype=complex)
    t = np.asarray(t, dtype=float)
    n = np.asarray(n, dtype=float)
    et = np.exp(2j * np.pi * np.outer(t, zeta))  # (T, S)
    ef = np.exp(-2j * np.pi * np.outer(tau, n))  # (S, F)
    # (T, S) @ (S, F) per antenna
    out = np.einsum("ts,sf,sm->tfm", et, ef, amps, optimize=True)
    return np.ascontiguousarray(out)


def smoothed_covariance(rows, window):
    """Forward-backward averaged covariance of all length-``window`` snapshots.

    ``rows`` is (R, N); every row contributes its N - window + 1 sliding
    snapshots. The result is normalized by the snapshot count.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=complex))
    r, n = rows.shape
    nsnap = n - window + 1
    if nsnap < 1:
        raise ValueError("window longer than data")
    idx = np.arange(window)[None, :] + np.arange(nsnap)[:, None]
    snaps = rows[:, idx].reshape(r * nsnap, window)  # (R*nsnap, window)
    cov = snaps.T @ snaps.conj() / (r * nsnap)
    exch = cov[::-1, ::-1].conj()
    return 0.5 * (cov + exch)


def zf_gains(h, sel):
    """Effective ZF gains 1 / [(G G^H)^-1]_kk for the users in ``sel``.

    ``h`` is (K, M) with one channel per row. The returned gain equals
    |h_k^H v_k|^2 for the unit-norm pseudoinverse beamformer v_k. Returns
    None when the Gram matrix is not positive definite.
    """
    g = h[list(sel)]
    gram = g.conj() @ g.T
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        return None
    if np.min(np.diag(chol).real) ** 2 <= 1e-14:
        return None
    inv_chol = np.linalg.inv(chol)
    diag = np.sum(np.abs(inv_chol) ** 2, axis=0)
    return 1.0 / diag


def _objective(h, weights, power, sel):
    gains = zf_gains(h, sel)
    if gains is None:
        return -np.inf
    p = power / len(sel)
    return float(np.sum(weights[list(sel)] * np.log1p(gains * p)))


def greedy_zf(h, weights, mask, power, max_users):
    """Greedy weighted-sum-rate user selection with equal-power ZF.

    Parameters
    ----------
    h : (K, M) complex ndarray
        Channels (as seen by the BS) of all users.
    weights : (K,) float ndarray
        Per-user weights, 1 / T_k for proportional fairness.
    mask : (K,) bool ndarray
        Users allowed in the selection.
    power : float
        Total transmit power split equally over the selection.
    max_users : int
        Cap on the selection size.

    Returns
    -------
    selected : list of int
        Users in order of addition.
    objective : float
        Weighted nominal rate sum of the final selection.
    """
    h = np.asarray(h, dtype=complex)
    weights = np.asarray(weights, dtype=float)
    cand = [k for k in range(h.shape[0]) if mask[k]]
    if not cand:
        return [], 0.0
    norms = np.sum(np.abs(h[cand]) ** 2, axis=1)
    single = weights[cand] * np.log1p(power * norms)
    first = cand[int(np.argmax(single))]
    sel = [first]
    best = float(np.max(single))
    while len(sel) < max_users:
        best_k, best_val = -1, best
        for k in cand:
            if k in sel:
                continue
            val = _objective(h, weights, power, sel + [k])
            if val > best_val:
                best_k, best_val = k, val
        if best_k < 0:
            break
        sel.append(best_k)
        best = best_val
    return sel, best
