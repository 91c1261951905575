"""Pure Python kernel backend.

Implements the same surface as the compiled backend (``_core``) using numpy
for the bulk paths and plain integers for scalar work.  Every function here
must produce output bit-identical to ``_core``: the generator is a pure
function of (key, counter), unit uniforms use a fixed 53-bit mapping, and
all floating-point expressions are written in the same operation order as
the compiled loops (numpy does not contract multiply-add, and the extension
is compiled with contraction disabled).
"""

import numpy as np

_M64 = (1 << 64) - 1

# Philox 4x64-10 round constants (multipliers and Weyl key increments).
_MUL0 = 0xD2E7470EE14C6C93
_MUL1 = 0xCA5A826395121157
_WEYL0 = 0x9E3779B97F4A7C15
_WEYL1 = 0xBB67AE8584CAA73B

_ROUNDS = 10
# Key schedule is independent of the counter; precompute per-round keys
# lazily for the vector path (they depend on k0/k1).
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

OP_BOX = 0
OP_BALL = 1
OP_UNION = 2
OP_INTER = 3
OP_DIFF = 4


def philox4(k0, k1, c0, c1=0, c2=0, c3=0):
    """One Philox 4x64-10 block as a tuple of four 64-bit integers."""
    x0, x1, x2, x3 = c0 & _M64, c1 & _M64, c2 & _M64, c3 & _M64
    k0 &= _M64
    k1 &= _M64
    for _ in range(_ROUNDS):
        p0 = _MUL0 * x0
        p1 = _MUL1 * x2
        x0, x1, x2, x3 = (((p1 >> 64) ^ x1 ^ k0) & _M64,
                          p1 & _M64,
                          ((p0 >> 64) ^ x3 ^ k1) & _M64,
                          p0 & _M64)
        k0 = (k0 + _WEYL0) & _M64
        k1 = (k1 + _WEYL1) & _M64
    return x0, x1, x2, x3


def _mulhilo(x, mul):
    """Vector 64x64 -> 128-bit multiply as (high, low) uint64 arrays."""
    m = np.uint64(mul)
    lo = x * m
    x_lo = x & np.uint64(0xFFFFFFFF)
    x_hi = x >> np.uint64(32)
    m_lo = np.uint64(mul & 0xFFFFFFFF)
    m_hi = np.uint64(mul >> 32)
    w = x_lo * m_lo
    t1 = x_hi * m_lo
    t2 = x_lo * m_hi
    carry = ((w >> np.uint64(32))
             + (t1 & np.uint64(0xFFFFFFFF))
             + (t2 & np.uint64(0xFFFFFFFF))) >> np.uint64(32)
    hi = x_hi * m_hi + (t1 >> np.uint64(32)) + (t2 >> np.uint64(32)) + carry
    return hi, lo


def _philox_words(k0, k1, blocks):
    """Philox outputs for an array of block indices, shape (len, 4)."""
    x0 = blocks.astype(np.uint64, copy=True)
    zeros = np.zeros_like(x0)
    x1, x2, x3 = zeros.copy(), zeros.copy(), zeros.copy()
    kk0, kk1 = k0 & _M64, k1 & _M64
    for _ in range(_ROUNDS):
        hi0, lo0 = _mulhilo(x0, _MUL0)
        hi1, lo1 = _mulhilo(x2, _MUL1)
        x0 = hi1 ^ x1 ^ np.uint64(kk0)
        x1 = lo1
        x2 = hi0 ^ x3 ^ np.uint64(kk1)
        x3 = lo0
        kk0 = (kk0 + _WEYL0) & _M64
        kk1 = (kk1 + _WEYL1) & _M64
    return np.stack((x0, x1, x2, x3), axis=1)


def fill_unit(k0, k1, pos, n):
    """n unit uniforms for stream positions pos .. pos+n-1."""
    if n <= 0:
        return np.empty(0, dtype=np.float64)
    b_lo = pos >> 2
    b_hi = (pos + n - 1) >> 2
    blocks = np.arange(b_lo, b_hi + 1, dtype=np.uint64)
    words = _philox_words(k0, k1, blocks).reshape(-1)
    start = pos - 4 * b_lo
    w = words[start:start + n]
    return (w >> np.uint64(11)).astype(np.float64) * _INV53


def _eval_program(codes, offs, vals, pts):
    """Evaluate a postfix region program over points, returning a bool array.

    The per-dimension accumulation order matches the compiled scalar loop
    exactly so membership decisions are identical on both backends.
    """
    n, d = pts.shape
    stack = []
    for code, off in zip(codes, offs):
        if code == OP_BOX:
            m = np.ones(n, dtype=bool)
            for j in range(d):
                c = pts[:, j]
                m &= (c >= vals[off + j]) & (c <= vals[off + d + j])
            stack.append(m)
        elif code == OP_BALL:
            acc = None
            for j in range(d):
                dx = pts[:, j] - vals[off + j]
                acc = dx * dx if acc is None else acc + dx * dx
            stack.append(acc <= vals[off + d])
        elif code == OP_UNION:
            b = stack.pop()
            stack[-1] = stack[-1] | b
        elif code == OP_INTER:
            b = stack.pop()
            stack[-1] = stack[-1] & b
        elif code == OP_DIFF:
            b = stack.pop()
            stack[-1] = stack[-1] & ~b
        else:
            raise ValueError(f"unknown opcode {code}")
    return stack[0]


def contains_many(codes, offs, vals, pts):
    """Membership flags (uint8, nonzero = inside) for each row of pts."""
    return _eval_program(codes, offs, vals, pts).astype(np.uint8)


_REJECT_BATCH_MAX = 1 << 16


def rejection_fill(k0, k1, pos, codes, offs, vals, lo, wid, out, max_attempts):
    """Fill `out` with uniform points on the region via rejection.

    Candidates are drawn from the bounding box frame (lo, wid), one
    attempt consuming exactly d stream positions, candidate j reading
    positions pos + j*d onward.  Because values are addressed by
    position, candidates can be generated in large speculative batches
    and every hit accepted in order; consumption still matches the
    scalar backend attempt for attempt, and the returned position sits
    just past the last accepting attempt.

    Returns (filled, attempts_total, new_pos); filled < out.shape[0]
    means some point exhausted max_attempts.
    """
    n, d = out.shape
    p0 = int(pos)
    if n == 0:
        return 0, 0, p0
    filled = 0
    consumed = 0       # candidates generated so far
    last_accept = -1   # global index of the latest accepting candidate
    attempts_total = 0
    batch = min(max(64, n), 1 << 12)
    while True:
        # The current point may use at most max_attempts candidates past
        # the previous accept; never generate beyond that decision index.
        batch = min(batch, max(last_accept + max_attempts - consumed + 1, 1))
        u = fill_unit(k0, k1, p0 + consumed * d, batch * d).reshape(batch, d)
        cand = lo[None, :] + u * wid[None, :]
        ok = _eval_program(codes, offs, vals, cand)
        for h in np.flatnonzero(ok):
            g = consumed + int(h)
            if g - last_accept > max_attempts:
                break
            out[filled, :] = cand[h]
            attempts_total += g - last_accept
            last_accept = g
            filled += 1
            if filled == n:
                return n, attempts_total, p0 + (g + 1) * d
        consumed += batch
        if consumed > last_accept + max_attempts:
            limit = last_accept + max_attempts
            return filled, attempts_total + max_attempts, p0 + (limit + 1) * d
        rate = (filled + 1) / (consumed + 1)
        need = (n - filled) / rate * 1.3 + 16.0
        batch = int(min(max(64.0, need), _REJECT_BATCH_MAX))


_MC_CHUNK = 1 << 16


def mc_hits(k0, k1, pos, codes, offs, vals, lo, wid, n_samples):
    """Hit count for hit-or-miss sampling of the region inside its frame."""
    d = lo.shape[0]
    hits = 0
    p = int(pos)
    remaining = int(n_samples)
    while remaining > 0:
        m = min(_MC_CHUNK, remaining)
        u = fill_unit(k0, k1, p, m * d).reshape(m, d)
        cand = lo[None, :] + u * wid[None, :]
        hits += int(np.count_nonzero(_eval_program(codes, offs, vals, cand)))
        p += m * d
        remaining -= m
    return hits
