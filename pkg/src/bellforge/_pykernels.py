"""Numpy implementations of the hot loops, used when the compiled module is absent.

Both backends expose the same two functions with identical semantics; see
``_ckernels.pyx`` for the compiled versions.

Vertex scan layout: only canonical assignments are visited (setting 0 of
every party but the last fixed to +1), which hits each distinct polytope
vertex exactly once.  An outer code ``u`` carries the free bits of parties
``0 .. n-2`` (party 0 most significant, setting 1 first); an inner code
``w`` carries all bits of the last party.  The combined code is
``(u << m_last) | w``.  A set bit means outcome -1.
"""

import numpy as np


def party_signs(m, fix_first):
    k = m - 1 if fix_first else m
    codes = np.arange(1 << k, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(k - 1, -1, -1, dtype=np.int64)) & 1
    signs = 1 - 2 * bits
    if fix_first:
        signs = np.hstack([np.ones((len(codes), 1), dtype=np.int64), signs])
    return signs


def outer_rows(outer_settings, lo, hi):
    """Kronecker feature rows of the non-last parties for outer codes lo..hi-1."""
    u = np.arange(lo, hi, dtype=np.int64)
    rows = np.ones((len(u), 1), dtype=np.int64)
    shift = sum(m - 1 for m in outer_settings)
    for m in outer_settings:
        shift -= m - 1
        sub = (u >> shift) & ((1 << (m - 1)) - 1)
        s = party_signs(m, True)[sub]
        rows = (rows[:, :, None] * s[:, None, :]).reshape(len(u), -1)
    return rows


def scan_chunk(C, outer_settings, m_last, lo, hi, threshold, collect, out):
    """Evaluate outer codes ``lo..hi-1`` against every last-party assignment.

    ``C`` has shape ``(prod(outer_settings), m_last)`` and may be int64 or an
    object array of Python ints.  Returns ``(best, best_code, n_written)``;
    when ``collect`` is set, the codes whose value equals ``threshold`` are
    written to ``out`` in increasing order.
    """
    rows = outer_rows(tuple(outer_settings), lo, hi)
    if C.dtype == object:
        rows = rows.astype(object)
    values = (rows @ C) @ party_signs(m_last, False).T.astype(C.dtype)
    flat = values.reshape(-1)
    pos = int(np.argmax(flat))
    best = flat[pos]
    base = lo << m_last
    n = 0
    if collect:
        hits = np.flatnonzero(flat == threshold)
        n = len(hits)
        out[:n] = hits + base
    return best, base + pos, n


def _lexmin_rows(A):
    idx = np.arange(A.shape[0])
    for col in range(A.shape[1]):
        c = A[idx, col]
        idx = idx[c == c.min()]
        if len(idx) == 1:
            break
    return A[idx[0]]


def orbit_min(T, settings, party_perms, perm_tabs, sign_tabs):
    """Lexicographically least image of ``T`` under the local symmetry group.

    An element is a party permutation ``P`` (new party q comes from old party
    ``P[q]``) and, per new party q, a row ``h`` of ``perm_tabs[q]`` /
    ``sign_tabs[q]``: new setting s is old setting ``perm_tabs[q][h, s]``
    with its outcome multiplied by ``sign_tabs[q][h, s]``.
    """
    settings = tuple(settings)
    n = len(settings)
    base = np.asarray(T).reshape(settings)
    best = None
    for P in party_perms:
        X = np.transpose(base, axes=tuple(P))
        for h0 in range(len(perm_tabs[0])):
            sg = sign_tabs[0][h0].reshape((-1,) + (1,) * (n - 1))
            Y = (np.take(X, perm_tabs[0][h0], axis=0) * sg)[None]
            for q in range(1, n):
                # Y: (G, m_0, ..., m_{n-1}); expand axis q+1 over the party's table
                Y = np.take(Y, perm_tabs[q], axis=q + 1)
                Y = np.moveaxis(Y, q + 1, 1)
                shape = [1] * Y.ndim
                shape[1], shape[q + 2] = sign_tabs[q].shape
                Y = Y * sign_tabs[q].reshape(shape)
                Y = Y.reshape((-1,) + settings)
            cand = _lexmin_rows(Y.reshape(Y.shape[0], -1))
            if best is None or tuple(cand) < tuple(best):
                best = cand.copy()
    return np.asarray(best, dtype=np.int64)
