# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Semantics mirror ``_fallback``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, log1p, sqrt, M_PI, INFINITY

cnp.import_array()

ctypedef double complex cplx


def synth_grid(amps, zeta, tau, t, n):
    a_arr = np.ascontiguousarray(amps, dtype=np.complex128)
    cdef double[:, ::1] ar = np.ascontiguousarray(a_arr.real)
    cdef double[:, ::1] ai = np.ascontiguousarray(a_arr.imag)
    cdef double[::1] z = np.ascontiguousarray(zeta, dtype=np.float64)
    cdef double[::1] d = np.ascontiguousarray(tau, dtype=np.float64)
    cdef double[::1] tt = np.ascontiguousarray(t, dtype=np.float64)
    cdef double[::1] nn = np.ascontiguousarray(n, dtype=np.float64)
    cdef Py_ssize_t S = ar.shape[0], M = ar.shape[1]
    cdef Py_ssize_t T = tt.shape[0], F = nn.shape[0]
    # accumulate real and imaginary parts separately, (T, F, M, 2)
    acc = np.zeros((T, F, M, 2), dtype=np.float64)
    cdef double[:, :, :, ::1] o = acc
    # per-component time phasors, reused across subcarriers
    cdef double[:, ::1] ctr = np.empty((S, T), dtype=np.float64)
    cdef double[:, ::1] cti = np.empty((S, T), dtype=np.float64)
    cdef Py_ssize_t s, i, f, m
    cdef double ph, fr, fi, wr, wi, br, bi
    with nogil:
        for s in range(S):
            for i in range(T):
                ph = 2.0 * M_PI * z[s] * tt[i]
                ctr[s, i] = cos(ph)
                cti[s, i] = sin(ph)
        for s in range(S):
            for f in range(F):
                ph = -2.0 * M_PI * d[s] * nn[f]
                fr = cos(ph)
                fi = sin(ph)
                for i in range(T):
                    wr = ctr[s, i] * fr - cti[s, i] * fi
                    wi = ctr[s, i] * fi + cti[s, i] * fr
                    for m in range(M):
                        br = ar[s, m]
                        bi = ai[s, m]
                        o[i, f, m, 0] += wr * br - wi * bi
                        o[i, f, m, 1] += wr * bi + wi * br
    return acc.view(np.complex128)[..., 0]


def smoothed_covariance(rows, Py_ssize_t window):
    x_arr = np.atleast_2d(np.ascontiguousarray(rows, dtype=np.complex128))
    cdef double[:, ::1] xr = np.ascontiguousarray(x_arr.real)
    cdef double[:, ::1] xi = np.ascontiguousarray(x_arr.imag)
    cdef Py_ssize_t R = xr.shape[0], N = xr.shape[1]
    cdef Py_ssize_t nsnap = N - window + 1
    if nsnap < 1:
        raise ValueError("window longer than data")
    cr_arr = np.zeros((window, window), dtype=np.float64)
    ci_arr = np.zeros((window, window), dtype=np.float64)
    cdef double[:, ::1] cr = cr_arr
    cdef double[:, ::1] ci = ci_arr
    cdef Py_ssize_t r, s, i, j, e
    cdef double sr, si
    with nogil:
        # first row: C[0, j] = sum_r sum_s x[s] conj(x[s + j])
        for j in range(window):
            sr = 0.0
            si = 0.0
            for r in range(R):
                for s in range(nsnap):
                    sr += xr[r, s] * xr[r, s + j] + xi[r, s] * xi[r, s + j]
                    si += xi[r, s] * xr[r, s + j] - xr[r, s] * xi[r, s + j]
            cr[0, j] = sr
            ci[0, j] = si
        # slide along each diagonal: drop the first snapshot term, add the
        # one past the end
        for i in range(window - 1):
            for j in range(i, window - 1):
                sr = cr[i, j]
                si = ci[i, j]
                e = nsnap
                for r in range(R):
                    sr += (xr[r, e + i] * xr[r, e + j] + xi[r, e + i] * xi[r, e + j]
                           - xr[r, i] * xr[r, j] - xi[r, i] * xi[r, j])
                    si += (xi[r, e + i] * xr[r, e + j] - xr[r, e + i] * xi[r, e + j]
                           - xi[r, i] * xr[r, j] + xr[r, i] * xi[r, j])
                cr[i + 1, j + 1] = sr
                ci[i + 1, j + 1] = si
    cov = (cr_arr + 1j * ci_arr) / (R * nsnap)
    upper = np.triu(cov, 1)
    cov = np.triu(cov) + upper.conj().T
    return 0.5 * (cov + cov[::-1, ::-1].conj())


cdef int _gains(cplx[:, ::1] h, Py_ssize_t* sel, Py_ssize_t s,
                double* out, cplx* gram, cplx* linv) nogil:
    """Fill ``out`` with 1 / [(G G^H)^-1]_kk. Returns 0 if not pos. def."""
    cdef Py_ssize_t M = h.shape[1]
    cdef Py_ssize_t i, j, k, m
    cdef cplx acc
    cdef double dd
    for i in range(s):
        for j in range(s):
            acc = 0
            for m in range(M):
                acc = acc + h[sel[i], m].conjugate() * h[sel[j], m]
            gram[i * s + j] = acc
    # in-place lower Cholesky
    for j in range(s):
        dd = gram[j * s + j].real
        for k in range(j):
            dd -= (gram[j * s + k] * gram[j * s + k].conjugate()).real
        if dd <= 1e-14:
            return 0
        dd = sqrt(dd)
        gram[j * s + j] = dd
        for i in range(j + 1, s):
            acc = gram[i * s + j]
            for k in range(j):
                acc = acc - gram[i * s + k] * gram[j * s + k].conjugate()
            gram[i * s + j] = acc / dd
    # invert the triangular factor
    for i in range(s * s):
        linv[i] = 0
    for j in range(s):
        linv[j * s + j] = 1.0 / gram[j * s + j].real
        for i in range(j + 1, s):
            acc = 0
            for k in range(j, i):
                acc = acc - gram[i * s + k] * linv[k * s + j]
            linv[i * s + j] = acc / gram[i * s + i].real
    for k in range(s):
        dd = 0
        for i in range(s):
            dd += (linv[i * s + k] * linv[i * s + k].conjugate()).real
        out[k] = 1.0 / dd
    return 1


def zf_gains(h, sel):
    cdef cplx[:, ::1] hh = np.ascontiguousarray(h, dtype=np.complex128)
    sel_arr = np.ascontiguousarray(sel, dtype=np.intp)
    cdef Py_ssize_t[::1] sv = sel_arr
    cdef Py_ssize_t s = sv.shape[0]
    out = np.empty(s, dtype=np.float64)
    cdef double[::1] o = out
    gram = np.empty(s * s, dtype=np.complex128)
    linv = np.empty(s * s, dtype=np.complex128)
    cdef cplx[::1] g = gram
    cdef cplx[::1] li = linv
    if not _gains(hh, &sv[0], s, &o[0], &g[0], &li[0]):
        return None
    return out


def greedy_zf(h, weights, mask, double power, Py_ssize_t max_users):
    cdef cplx[:, ::1] hh = np.ascontiguousarray(h, dtype=np.complex128)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef cnp.uint8_t[::1] mk = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t K = hh.shape[0], M = hh.shape[1]
    cdef Py_ssize_t cap = max_users if max_users < K else K
    if cap < 1:
        return [], 0.0
    sel_arr = np.zeros(cap + 1, dtype=np.intp)
    cdef Py_ssize_t[::1] sel = sel_arr
    insel_arr = np.zeros(K, dtype=np.uint8)
    cdef cnp.uint8_t[::1] insel = insel_arr
    gains_arr = np.empty(cap + 1, dtype=np.float64)
    cdef double[::1] gains = gains_arr
    scratch = np.empty(2 * (cap + 1) * (cap + 1), dtype=np.complex128)
    cdef cplx[::1] sc = scratch
    cdef Py_ssize_t half = (cap + 1) * (cap + 1)
    cdef Py_ssize_t k, m, i, ns = 0, best_k
    cdef double nrm, val, best = -INFINITY, best_val, p
    for k in range(K):
        if not mk[k]:
            continue
        nrm = 0
        for m in range(M):
            nrm += (hh[k, m] * hh[k, m].conjugate()).real
        val = w[k] * log1p(power * nrm)
        if val > best:
            best = val
            sel[0] = k
            ns = 1
    if ns == 0:
        return [], 0.0
    insel[sel[0]] = 1
    while ns < cap:
        best_k = -1
        best_val = best
        p = power / (ns + 1)
        for k in range(K):
            if not mk[k] or insel[k]:
                continue
            sel[ns] = k
            if not _gains(hh, &sel[0], ns + 1, &gains[0], &sc[0], &sc[half]):
                continue
            val = 0
            for i in range(ns + 1):
                val += w[sel[i]] * log1p(gains[i] * p)
            if val > best_val:
                best_val = val
                best_k = k
        if best_k < 0:
            break
        sel[ns] = best_k
        insel[best_k] = 1
        ns += 1
        best = best_val
    return [int(sel[i]) for i in range(ns)], float(best)
