"""Synthetic sinusoid instances shared by estimator tests."""
import numpy as np

from mimopred.pilots import PilotObservations, PilotPattern


def wrap(x):
    return np.angle(np.exp(1j * np.asarray(x)))


def random_instance(rng, n_comp=None, pattern=PilotPattern(D_t=1, D_f=1, N_t=40, N_f=30),
                    M=2, min_sep=0.15):
    """Noise-free grid sum_i A_i e^{j w_i q} e^{-j v_i m} with well separated
    frequency pairs. Components share a delay with probability 1/3 so that
    paths with several Dopplers are exercised."""
    I = int(rng.integers(1, 6)) if n_comp is None else n_comp
    w, v = [], []
    while len(w) < I:
        if v and rng.random() < 1 / 3:
            cand_v = v[int(rng.integers(len(v)))]
        else:
            cand_v = rng.uniform(0.05, 2 * np.pi - 0.1)
        cand_w = rng.uniform(-np.pi + 0.05, np.pi - 0.05)
        ok_v = all(abs(wrap(cand_v - b)) == 0 or abs(wrap(cand_v - b)) >= min_sep for b in v)
        ok_w = all(abs(wrap(cand_w - a)) >= min_sep for a, b in zip(w, v)
                   if abs(wrap(cand_v - b)) == 0)
        if ok_v and ok_w:
            w.append(cand_w)
            v.append(cand_v)
    w, v = np.array(w), np.array(v)
    amp = (rng.standard_normal((I, M)) + 1j * rng.standard_normal((I, M)))
    amp += np.sign(amp.real) * 0.3  # keep every component clearly present
    q = np.arange(pattern.N_t)
    m = np.arange(pattern.N_f)
    grid = np.einsum("qi,mi,ia->qma", np.exp(1j * np.outer(q, w)),
                     np.exp(-1j * np.outer(m, v)), amp)
    return PilotObservations(grid, 0.0, pattern), w, v, amp


def match(est_w, est_v, w, v):
    """Index of the estimated pair closest to each true pair."""
    idx = []
    for a, b in zip(w, v):
        d = np.abs(wrap(est_w - a)) + np.abs(wrap(est_v - b))
        idx.append(int(np.argmin(d)))
    return np.array(idx)
