# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Mirrors apfree.kernels.pure operation for operation: same SplitMix64 stream,
same draw order, same exact integer comparisons (128-bit where numerators
over 2q or 4q^2 are squared). Results are bit-identical to the pure backend;
only the speed differs. Requires modulus q <= 2^61 so that every
intermediate fits unsigned __int128 (the dispatch layer enforces this).
"""

import numpy as np

BACKEND = "native"

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"
    ctypedef long long i128 "__int128"

ctypedef unsigned long long u64
ctypedef long long i64

cdef u64 _GOLDEN = 0x9E3779B97F4A7C15ULL
cdef u64 _MIX1 = 0xBF58476D1CE4E5B9ULL
cdef u64 _MIX2 = 0x94D049BB133111EBULL
cdef u64 _U64MAX = 0xFFFFFFFFFFFFFFFFULL

DEF MAX_WIDTH = 64  # up to 32 torus factors per point


cdef inline u64 _mix64(u64 z) nogil:
    z = (z ^ (z >> 30)) * _MIX1
    z = (z ^ (z >> 27)) * _MIX2
    return z ^ (z >> 31)


cdef inline u64 _next_u64(u64* state) nogil:
    state[0] += _GOLDEN
    return _mix64(state[0])


cdef inline u64 _below(u64* state, u64 bound) nogil:
    # Matches rng.SplitMix64.below: mask for powers of two, else rejection.
    cdef u64 limit, u
    if bound & (bound - 1) == 0:
        return _next_u64(state) & (bound - 1)
    limit = (_U64MAX / bound) * bound
    while True:
        u = _next_u64(state)
        if u < limit:
            return u % bound


cdef inline bint _member_pair(u64 ka, u64 kb, u64 q, int variant,
                              u64 en, u64 ed) nogil:
    cdef u128 s = <u128>ka + <u128>kb
    cdef u128 qq = <u128>q
    cdef bint a_low = 2 * ka < q
    cdef bint b_low = 2 * kb < q
    cdef bint in_t
    if variant == 0:
        if (a_low != b_low) and 4 * s < 3 * qq:
            return True
        return (a_low
                and 4 * <u128>ed * s > (3 * <u128>ed + 4 * <u128>en) * qq
                and 4 * s < 5 * qq)
    # T-variant: legacy block minus the pair-sum band [5/6-eps, 5/6).
    if a_low and not b_low:
        in_t = 12 * s >= 7 * qq and 3 * s <= 4 * qq
    elif a_low and b_low:
        in_t = 6 * s > 5 * qq
    elif b_low:
        in_t = (12 * s >= 7 * qq and 6 * s < 5 * qq
                and 2 * (2 * <u128>ka + <u128>kb) < 3 * qq)
    else:
        in_t = False
    if not in_t:
        return False
    return not (6 * <u128>ed * s >= (5 * <u128>ed - 6 * <u128>en) * qq
                and 6 * s < 5 * qq)


cdef inline bint _member_point(u64* nums, int d0, u64 q, int variant,
                               u64 en, u64 ed) nogil:
    cdef int i
    for i in range(d0):
        if not _member_pair(nums[2 * i], nums[2 * i + 1], q, variant, en, ed):
            return False
    return True


def block_member_bulk(nums, q, d0, variant, en, ed):
    """Membership mask for an (m, 2*d0) array of numerators."""
    arr = np.ascontiguousarray(nums, dtype=np.uint64)
    cdef Py_ssize_t m = arr.shape[0]
    out = np.zeros(m, dtype=np.uint8)
    if m == 0:
        return out
    cdef const u64[:, ::1] v = arr
    cdef unsigned char[::1] o = out
    cdef u64 cq = q, cen = en, ced = ed
    cdef int cd0 = d0, cvar = variant
    cdef Py_ssize_t idx
    with nogil:
        for idx in range(m):
            if _member_point(<u64*>&v[idx, 0], cd0, cq, cvar, cen, ced):
                o[idx] = 1
    return out


def orbit_members(mu, step, q, n_max, d0, variant, en, ed):
    """Indices n in [1, n_max] with mu + n*step inside the block."""
    cdef int width = 2 * d0
    if width > MAX_WIDTH:
        raise ValueError("too many torus factors for the native kernel")
    cdef u64 cur[MAX_WIDTH]
    cdef u64 st[MAX_WIDTH]
    cdef int j
    for j in range(width):
        cur[j] = mu[j]
        st[j] = step[j]
    out = np.empty(n_max, dtype=np.int64)
    cdef i64[::1] o = out
    cdef u64 cq = q, cen = en, ced = ed, c
    cdef int cd0 = d0, cvar = variant
    cdef i64 n, cnt = 0, nmax = n_max
    with nogil:
        for n in range(1, nmax + 1):
            for j in range(width):
                c = cur[j] + st[j]
                cur[j] = c - cq if c >= cq else c
            if _member_point(cur, cd0, cq, cvar, cen, ced):
                o[cnt] = n
                cnt += 1
    return out[:cnt].copy()


cdef inline u128 _pair_penalty_min(u64 ka, u64 kb, u64 q) nogil:
    # min over the 16 offset candidates of (d1+d2)^2 + d1^2 over 4q^2;
    # |d1| < 3q and |d1+d2| < 6q, so squares are taken through u128 via abs.
    cdef i128 b1 = <i128>ka * 2
    cdef i128 b2 = <i128>kb * 2
    cdef i128 qq = <i128>q
    cdef i128 d1, d2, t
    cdef u128 ad, d1sq, pen
    cdef u128 best = (<u128>0) - 1
    cdef int s1, s2
    for s1 in range(-2, 2):
        d1 = b1 + s1 * qq
        ad = <u128>(d1 if d1 >= 0 else -d1)
        d1sq = ad * ad
        for s2 in range(-2, 2):
            d2 = b2 + s2 * qq
            t = d1 + d2
            ad = <u128>(t if t >= 0 else -t)
            pen = ad * ad + d1sq
            if pen < best:
                best = pen
    return best


def orbit_first_bad(step, q, n_max, d0, threshold):
    """First n in [1, n_max] whose point n*step has total penalty <= threshold
    (an integer numerator over 4q^2), or -1 if none."""
    cdef int width = 2 * d0
    if width > MAX_WIDTH:
        raise ValueError("too many torus factors for the native kernel")
    if threshold < 0 or threshold >> 128:
        raise ValueError("threshold out of range")
    cdef u64 cur[MAX_WIDTH]
    cdef u64 st[MAX_WIDTH]
    cdef int j, i
    for j in range(width):
        cur[j] = 0
        st[j] = step[j]
    cdef u64 thr_hi = threshold >> 64
    cdef u64 thr_lo = threshold & ((1 << 64) - 1)
    cdef u128 thr = ((<u128>thr_hi) << 64) | (<u128>thr_lo)
    cdef u128 acc
    cdef u64 cq = q, c
    cdef int cd0 = d0
    cdef i64 n, nmax = n_max, found = -1
    cdef bint bad
    with nogil:
        for n in range(1, nmax + 1):
            for j in range(width):
                c = cur[j] + st[j]
                cur[j] = c - cq if c >= cq else c
            acc = 0
            bad = True
            for i in range(cd0):
                acc += _pair_penalty_min(cur[2 * i], cur[2 * i + 1], cq)
                if acc > thr:
                    bad = False
                    break
            if bad:
                found = n
                break
    return int(found)


def sample_triples(trials, d0, q, variant, en, ed, seed, max_draws):
    """Sample `trials` 3-APs inside the D0-fold product block; see the pure
    backend for the staged-rejection contract this mirrors."""
    cdef int width = 2 * d0
    if width > MAX_WIDTH:
        raise ValueError("too many torus factors for the native kernel")
    xs = np.empty((trials, width), dtype=np.uint64)
    ys = np.empty((trials, width), dtype=np.uint64)
    zs = np.empty((trials, width), dtype=np.uint64)
    cdef u64[:, ::1] xv = xs
    cdef u64[:, ::1] yv = ys
    cdef u64[:, ::1] zv = zs
    cdef u64 state = <u64>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef u64 cq = q, cen = en, ced = ed
    cdef u64 xa, xb, ya, yb, za, zb
    cdef u64 draws = 0, budget = max_draws
    cdef int cd0 = d0, cvar = variant, i
    cdef Py_ssize_t t, ntrials = trials
    cdef bint exhausted = False
    with nogil:
        for t in range(ntrials):
            if exhausted:
                break
            for i in range(cd0):
                while True:
                    while True:
                        xa = _below(&state, cq)
                        xb = _below(&state, cq)
                        draws += 2
                        if draws > budget:
                            exhausted = True
                            break
                        if _member_pair(xa, xb, cq, cvar, cen, ced):
                            break
                    if exhausted:
                        break
                    while True:
                        ya = _below(&state, cq)
                        yb = _below(&state, cq)
                        draws += 2
                        if draws > budget:
                            exhausted = True
                            break
                        if _member_pair(ya, yb, cq, cvar, cen, ced):
                            break
                    if exhausted:
                        break
                    za = 2 * ya
                    if za >= cq:
                        za -= cq
                    za = za - xa if za >= xa else za + cq - xa
                    zb = 2 * yb
                    if zb >= cq:
                        zb -= cq
                    zb = zb - xb if zb >= xb else zb + cq - xb
                    if _member_pair(za, zb, cq, cvar, cen, ced):
                        xv[t, 2 * i] = xa
                        xv[t, 2 * i + 1] = xb
                        yv[t, 2 * i] = ya
                        yv[t, 2 * i + 1] = yb
                        zv[t, 2 * i] = za
                        zv[t, 2 * i + 1] = zb
                        break
                if exhausted:
                    break
    if exhausted:
        raise RuntimeError("sampler exceeded its draw budget")
    return xs, ys, zs, int(draws)


def count_aps_pairscan(elements, max_witnesses):
    """Exact count of nontrivial 3-APs within a sorted, duplicate-free int64
    array, via pair scan with a bitset midpoint lookup."""
    e = np.ascontiguousarray(elements, dtype=np.int64)
    cdef Py_ssize_t k = e.shape[0]
    wit = np.empty((max(max_witnesses, 0), 3), dtype=np.int64)
    if k < 3:
        return 0, wit[:0].copy()
    cdef const i64[::1] ev = e
    cdef i64 base = ev[0]
    cdef i64 span = ev[k - 1] - base + 1
    if span > (<i64>1) << 32:
        raise ValueError("value span too large for the bitset pair scan; "
                         "use the convolution counter")
    bits = np.zeros((span + 63) // 64, dtype=np.uint64)
    cdef u64[::1] bv = bits
    cdef i64[:, ::1] wv = wit
    cdef Py_ssize_t i, j
    cdef i64 s, mid, off
    cdef u64 count = 0
    cdef Py_ssize_t nw = 0, cap = max_witnesses
    with nogil:
        for i in range(k):
            off = ev[i] - base
            bv[off >> 6] |= (<u64>1) << (off & 63)
        for i in range(k - 2):
            for j in range(i + 1, k):
                s = ev[i] + ev[j]
                if s & 1:
                    continue
                mid = s >> 1
                off = mid - base
                if bv[off >> 6] & ((<u64>1) << (off & 63)):
                    count += 1
                    if nw < cap:
                        wv[nw, 0] = ev[i]
                        wv[nw, 1] = mid
                        wv[nw, 2] = ev[j]
                        nw += 1
    return int(count), wit[:nw].copy()
