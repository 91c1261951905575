# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Scalar C implementations of the hot loops: the counter-based generator,
batched unit uniforms, region-program membership, rejection sampling, and
hit-or-miss volume counting.  Must stay bit-identical to ``_fallback``;
floating-point expressions mirror that module's operation order and the
extension is built with FP contraction disabled.
"""

from libc.stdint cimport uint64_t, int32_t
from libc.stdlib cimport free, malloc

import numpy as np

cdef uint64_t _MUL0 = 0xD2E7470EE14C6C93u
cdef uint64_t _MUL1 = 0xCA5A826395121157u
cdef uint64_t _WEYL0 = 0x9E3779B97F4A7C15u
cdef uint64_t _WEYL1 = 0xBB67AE8584CAA73Bu
cdef uint64_t _MASK32 = 0xFFFFFFFFu
cdef double _INV53 = 1.0 / 9007199254740992.0

cdef int32_t OP_BOX = 0
cdef int32_t OP_BALL = 1
cdef int32_t OP_UNION = 2
cdef int32_t OP_INTER = 3
cdef int32_t OP_DIFF = 4


cdef inline uint64_t _mulhi(uint64_t a, uint64_t b) nogil:
    cdef uint64_t a_lo = a & _MASK32
    cdef uint64_t a_hi = a >> 32
    cdef uint64_t b_lo = b & _MASK32
    cdef uint64_t b_hi = b >> 32
    cdef uint64_t w = a_lo * b_lo
    cdef uint64_t t1 = a_hi * b_lo
    cdef uint64_t t2 = a_lo * b_hi
    cdef uint64_t carry = ((w >> 32) + (t1 & _MASK32) + (t2 & _MASK32)) >> 32
    return a_hi * b_hi + (t1 >> 32) + (t2 >> 32) + carry


cdef void _philox_block(uint64_t k0, uint64_t k1,
                        uint64_t c0, uint64_t c1, uint64_t c2, uint64_t c3,
                        uint64_t* out) nogil:
    cdef uint64_t x0 = c0, x1 = c1, x2 = c2, x3 = c3
    cdef uint64_t hi0, lo0, hi1, lo1
    cdef int r
    for r in range(10):
        hi0 = _mulhi(_MUL0, x0)
        lo0 = _MUL0 * x0
        hi1 = _mulhi(_MUL1, x2)
        lo1 = _MUL1 * x2
        x0 = hi1 ^ x1 ^ k0
        x1 = lo1
        x2 = hi0 ^ x3 ^ k1
        x3 = lo0
        k0 = k0 + _WEYL0
        k1 = k1 + _WEYL1
    out[0] = x0
    out[1] = x1
    out[2] = x2
    out[3] = x3


def philox4(k0, k1, c0, c1=0, c2=0, c3=0):
    """One Philox 4x64-10 block as a tuple of four 64-bit integers."""
    cdef uint64_t out[4]
    _philox_block(<uint64_t> (k0 & 0xFFFFFFFFFFFFFFFF),
                  <uint64_t> (k1 & 0xFFFFFFFFFFFFFFFF),
                  <uint64_t> (c0 & 0xFFFFFFFFFFFFFFFF),
                  <uint64_t> (c1 & 0xFFFFFFFFFFFFFFFF),
                  <uint64_t> (c2 & 0xFFFFFFFFFFFFFFFF),
                  <uint64_t> (c3 & 0xFFFFFFFFFFFFFFFF),
                  out)
    return out[0], out[1], out[2], out[3]


def fill_unit(k0, k1, pos, n):
    """n unit uniforms for stream positions pos .. pos+n-1."""
    cdef Py_ssize_t m = n
    out = np.empty(max(m, 0), dtype=np.float64)
    if m <= 0:
        return out
    cdef double[::1] ov = out
    cdef uint64_t kk0 = <uint64_t> (k0 & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t kk1 = <uint64_t> (k1 & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t p = <uint64_t> pos
    cdef uint64_t blk[4]
    cdef uint64_t cur = p >> 2
    cdef uint64_t q, b
    cdef Py_ssize_t i
    with nogil:
        _philox_block(kk0, kk1, cur, 0, 0, 0, blk)
        for i in range(m):
            q = p + <uint64_t> i
            b = q >> 2
            if b != cur:
                _philox_block(kk0, kk1, b, 0, 0, 0, blk)
                cur = b
            ov[i] = <double> (blk[q & 3] >> 11) * _INV53
    return out


cdef char _eval_point(const int32_t* codes, const int32_t* offs,
                      Py_ssize_t n_ops, const double* vals,
                      const double* point, Py_ssize_t d, char* stack) nogil:
    cdef Py_ssize_t sp = 0
    cdef Py_ssize_t i, j
    cdef int32_t code, off
    cdef double acc, dx
    cdef char flag
    for i in range(n_ops):
        code = codes[i]
        off = offs[i]
        if code == OP_BOX:
            flag = 1
            for j in range(d):
                if point[j] < vals[off + j] or point[j] > vals[off + d + j]:
                    flag = 0
                    break
            stack[sp] = flag
            sp += 1
        elif code == OP_BALL:
            acc = 0.0
            for j in range(d):
                dx = point[j] - vals[off + j]
                acc = acc + dx * dx
            stack[sp] = 1 if acc <= vals[off + d] else 0
            sp += 1
        elif code == OP_UNION:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] | stack[sp]
        elif code == OP_INTER:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] & stack[sp]
        else:
            sp -= 1
            stack[sp - 1] = stack[sp - 1] & (stack[sp] ^ 1)
    return stack[0]


def contains_many(int32_t[::1] codes, int32_t[::1] offs, double[::1] vals,
                  double[:, ::1] pts):
    """Membership flags (uint8, nonzero = inside) for each row of pts."""
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t d = pts.shape[1]
    cdef Py_ssize_t n_ops = codes.shape[0]
    out = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] ov = out
    cdef char* stack = <char*> malloc(n_ops if n_ops > 0 else 1)
    if stack == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    try:
        with nogil:
            for i in range(n):
                ov[i] = <unsigned char> _eval_point(
                    &codes[0], &offs[0], n_ops, &vals[0], &pts[i, 0], d, stack)
    finally:
        free(stack)
    return out


def rejection_fill(k0, k1, pos, int32_t[::1] codes, int32_t[::1] offs,
                   double[::1] vals, double[::1] lo, double[::1] wid,
                   double[:, ::1] out, max_attempts):
    """Fill `out` with uniform points on the region via rejection.

    One attempt consumes exactly d stream positions.  Returns
    (filled, attempts_total, new_pos); filled < out.shape[0] means some
    point exhausted max_attempts.
    """
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t d = out.shape[1]
    cdef Py_ssize_t n_ops = codes.shape[0]
    cdef uint64_t kk0 = <uint64_t> (k0 & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t kk1 = <uint64_t> (k1 & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t p = <uint64_t> pos
    cdef long long cap = <long long> max_attempts
    cdef long long att, attempts_total = 0
    cdef uint64_t blk[4]
    cdef uint64_t cur, q, b
    cdef bint have_block = 0
    cdef Py_ssize_t i = 0, j
    cdef bint accepted
    cdef double u
    cdef char* stack = <char*> malloc(n_ops if n_ops > 0 else 1)
    cdef double* cand = <double*> malloc((d if d > 0 else 1) * sizeof(double))
    if stack == NULL or cand == NULL:
        free(stack)
        free(cand)
        raise MemoryError()
    cdef Py_ssize_t filled = 0
    try:
        with nogil:
            cur = 0
            for i in range(n):
                att = 0
                accepted = 0
                while att < cap:
                    for j in range(d):
                        q = p + <uint64_t> j
                        b = q >> 2
                        if not have_block or b != cur:
                            _philox_block(kk0, kk1, b, 0, 0, 0, blk)
                            cur = b
                            have_block = 1
                        u = <double> (blk[q & 3] >> 11) * _INV53
                        cand[j] = lo[j] + u * wid[j]
                    p += <uint64_t> d
                    att += 1
                    if _eval_point(&codes[0], &offs[0], n_ops, &vals[0],
                                   cand, d, stack):
                        for j in range(d):
                            out[i, j] = cand[j]
                        accepted = 1
                        break
                attempts_total += att
                if not accepted:
                    break
                filled = i + 1
    finally:
        free(stack)
        free(cand)
    return filled, attempts_total, int(p)


def mc_hits(k0, k1, pos, int32_t[::1] codes, int32_t[::1] offs,
            double[::1] vals, double[::1] lo, double[::1] wid, n_samples):
    """Hit count for hit-or-miss sampling of the region inside its frame."""
    cdef Py_ssize_t n = n_samples
    cdef Py_ssize_t d = lo.shape[0]
    cdef Py_ssize_t n_ops = codes.shape[0]
    cdef uint64_t kk0 = <uint64_t> (k0 & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t kk1 = <uint64_t> (k1 & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t p = <uint64_t> pos
    cdef uint64_t blk[4]
    cdef uint64_t cur = 0, q, b
    cdef bint have_block = 0
    cdef long long hits = 0
    cdef Py_ssize_t i, j
    cdef double u
    cdef char* stack = <char*> malloc(n_ops if n_ops > 0 else 1)
    cdef double* cand = <double*> malloc((d if d > 0 else 1) * sizeof(double))
    if stack == NULL or cand == NULL:
        free(stack)
        free(cand)
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                for j in range(d):
                    q = p + <uint64_t> j
                    b = q >> 2
                    if not have_block or b != cur:
                        _philox_block(kk0, kk1, b, 0, 0, 0, blk)
                        cur = b
                        have_block = 1
                    u = <double> (blk[q & 3] >> 11) * _INV53
                    cand[j] = lo[j] + u * wid[j]
                p += <uint64_t> d
                if _eval_point(&codes[0], &offs[0], n_ops, &vals[0],
                               cand, d, stack):
                    hits += 1
    finally:
        free(stack)
        free(cand)
    return int(hits)
