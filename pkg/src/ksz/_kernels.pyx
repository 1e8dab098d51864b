# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: popcount orthogonality and Gray-code sign enumeration.

Both functions mirror ``ksz._fallback`` exactly; ``ksz._engine`` picks one at import.
"""
from libc.stdint cimport int8_t, int64_t, uint64_t


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


def rows_orthogonal(const uint64_t[:, ::1] rows, Py_ssize_t order):
    """True iff every pair of packed rows differs in exactly ``order / 2`` bits."""
    cdef Py_ssize_t t = rows.shape[0]
    cdef Py_ssize_t w = rows.shape[1]
    cdef Py_ssize_t i, j, k
    cdef int64_t pop
    cdef bint ok = True
    cdef const uint64_t* base
    cdef const uint64_t* ri
    cdef const uint64_t* rj
    if t < 2:
        return True
    base = &rows[0, 0]
    with nogil:
        for i in range(t):
            ri = base + i * w
            for j in range(i + 1, t):
                rj = base + j * w
                pop = 0
                for k in range(w):
                    pop += __builtin_popcountll(ri[k] ^ rj[k])
                if 2 * pop != order:
                    ok = False
                    break
            if not ok:
                break
    return ok


def gray_chunk(const int8_t[:, ::1] a, const int64_t[::1] pos_ptr,
               const int64_t[::1] pos_idx, int8_t[::1] v, int64_t[::1] s,
               int nbits, int low_bits, uint64_t base_code):
    """Scan the ``2**low_bits`` codes above ``base_code`` in Gray order.

    ``v`` and ``s`` must hold the sign product and the partial sums for
    ``base_code``; they are updated in place.  Returns ``(best, best_code)``
    with ties going to the smallest code.
    """
    cdef Py_ssize_t q = a.shape[1]
    cdef Py_ssize_t j, r, kk
    cdef uint64_t g
    cdef uint64_t n_steps = (<uint64_t>1) << low_bits
    cdef uint64_t code = base_code
    cdef uint64_t best_code = base_code
    cdef int bit, p
    cdef int64_t val, best, twice
    with nogil:
        best = 0
        for j in range(q):
            best += s[j] if s[j] >= 0 else -s[j]
        g = 1
        while g < n_steps:
            bit = __builtin_ctzll(g)
            code ^= (<uint64_t>1) << bit
            p = nbits - 1 - bit
            for kk in range(pos_ptr[p], pos_ptr[p + 1]):
                r = pos_idx[kk]
                twice = 2 * v[r]
                for j in range(q):
                    s[j] -= twice * a[r, j]
                v[r] = -v[r]
            val = 0
            for j in range(q):
                val += s[j] if s[j] >= 0 else -s[j]
            if val > best or (val == best and code < best_code):
                best = val
                best_code = code
            g += 1
    return best, best_code
