# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled vertex scan and orbit minimisation.

Semantics match ``bellforge._pykernels`` exactly; see that module for the
code layout.  Both loops run without the GIL so that callers may split the
work across threads.
"""

from libc.stdint cimport int64_t
from libc.stdlib cimport malloc, free

import numpy as np


def scan_chunk(const int64_t[:, ::1] C, const int64_t[::1] outer_settings,
               int m_last, int64_t lo, int64_t hi, int64_t threshold,
               bint collect, int64_t[::1] out):
    cdef Py_ssize_t dim_outer = C.shape[0]
    cdef int n_outer = outer_settings.shape[0]
    cdef int W = 0
    cdef int p, k, j, m, shift
    cdef Py_ssize_t a, length
    cdef int64_t u, w, val, x, best = 0, best_code = -1
    cdef int64_t n_inner = (<int64_t>1) << m_last
    cdef Py_ssize_t n_out = 0
    cdef int64_t *o
    cdef int64_t *r
    for p in range(n_outer):
        W += outer_settings[p] - 1
    o = <int64_t *> malloc(dim_outer * sizeof(int64_t))
    r = <int64_t *> malloc(m_last * sizeof(int64_t))
    if o == NULL or r == NULL:
        free(o)
        free(r)
        raise MemoryError()
    try:
        with nogil:
            for u in range(lo, hi):
                o[0] = 1
                length = 1
                shift = W
                for p in range(n_outer):
                    m = <int>outer_settings[p]
                    shift -= m - 1
                    a = length - 1
                    while a >= 0:
                        x = o[a]
                        for k in range(m - 1, 0, -1):
                            if (u >> (shift + m - 1 - k)) & 1:
                                o[a * m + k] = -x
                            else:
                                o[a * m + k] = x
                        o[a * m] = x
                        a -= 1
                    length *= m
                for j in range(m_last):
                    val = 0
                    for a in range(dim_outer):
                        val += o[a] * C[a, j]
                    r[j] = val
                for w in range(n_inner):
                    val = 0
                    for j in range(m_last):
                        if (w >> (m_last - 1 - j)) & 1:
                            val -= r[j]
                        else:
                            val += r[j]
                    if best_code < 0 or val > best:
                        best = val
                        best_code = (u << m_last) | w
                    if collect and val == threshold:
                        out[n_out] = (u << m_last) | w
                        n_out += 1
    finally:
        free(o)
        free(r)
    return best, best_code, n_out


def orbit_min(const int64_t[::1] T, settings, party_perms, perm_tabs, sign_tabs):
    cdef int n = len(settings)
    cdef Py_ssize_t dim = T.shape[0]
    cdef int mmax = max(settings)
    cdef int Lmax = max(len(tab) for tab in perm_tabs)
    cdef int q, s, P_rows
    cdef Py_ssize_t t, i

    # padded tables: [q, h, s]
    ptab_np = np.zeros((n, Lmax, mmax), dtype=np.int64)
    stab_np = np.zeros((n, Lmax, mmax), dtype=np.int64)
    for q in range(n):
        ptab_np[q, :len(perm_tabs[q]), :settings[q]] = perm_tabs[q]
        stab_np[q, :len(sign_tabs[q]), :settings[q]] = sign_tabs[q]
    cdef int64_t[:, :, ::1] ptab = ptab_np
    cdef int64_t[:, :, ::1] stab = stab_np
    cdef int64_t[::1] msz = np.asarray(settings, dtype=np.int64)
    cdef int64_t[::1] L = np.asarray([len(tab) for tab in perm_tabs], dtype=np.int64)
    cdef int64_t[::1] old_stride = np.ones(n, dtype=np.int64)
    for q in range(n - 2, -1, -1):
        old_stride[q] = old_stride[q + 1] * msz[q + 1]
    cdef int64_t[:, ::1] PP = np.ascontiguousarray(party_perms, dtype=np.int64)
    P_rows = PP.shape[0]

    best_np = np.asarray(T, dtype=np.int64).copy()
    cdef int64_t[::1] best = best_np
    cand_np = np.zeros(dim, dtype=np.int64)
    cdef int64_t[::1] cand = cand_np
    # per-new-party offset and sign for each setting under the current element
    cdef int64_t[:, ::1] off = np.zeros((n, mmax), dtype=np.int64)
    cdef int64_t[:, ::1] sgn = np.zeros((n, mmax), dtype=np.int64)
    cdef int64_t[::1] h = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] idx = np.zeros(n, dtype=np.int64)
    cdef int64_t old, sign, v
    cdef int state, pi
    cdef bint done

    with nogil:
        for pi in range(P_rows):
            for q in range(n):
                h[q] = 0
            done = False
            while not done:
                for q in range(n):
                    for s in range(msz[q]):
                        off[q, s] = old_stride[PP[pi, q]] * ptab[q, h[q], s]
                        sgn[q, s] = stab[q, h[q], s]
                for q in range(n):
                    idx[q] = 0
                # state: 0 = still equal to best, -1 = smaller (copying), 1 = larger
                state = 0
                for t in range(dim):
                    old = 0
                    sign = 1
                    for q in range(n):
                        old += off[q, idx[q]]
                        sign *= sgn[q, idx[q]]
                    v = sign * T[old]
                    if state == 0:
                        if v > best[t]:
                            state = 1
                            break
                        elif v < best[t]:
                            state = -1
                            for i in range(t):
                                cand[i] = best[i]
                    if state == -1:
                        cand[t] = v
                    q = n - 1
                    while q >= 0:
                        idx[q] += 1
                        if idx[q] < msz[q]:
                            break
                        idx[q] = 0
                        q -= 1
                if state == -1:
                    for i in range(dim):
                        best[i] = cand[i]
                # next local element (mixed radix, last party fastest)
                q = n - 1
                while q >= 0:
                    h[q] += 1
                    if h[q] < L[q]:
                        break
                    h[q] = 0
                    q -= 1
                if q < 0:
                    done = True
    return best_np
