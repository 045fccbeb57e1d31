"""Pure-Python kernel backend.

Reference implementation of the hot loops: block membership on numerators,
orbit scans, bad-direction scans, 3-AP rejection sampling and the pair-scan
progression counter. The native Cython backend mirrors this file operation
for operation (same RNG, same draw order, same comparisons), so both
backends produce bit-identical results for identical inputs.

All arithmetic is on exact integers; a point coordinate is a numerator over
the shared modulus q, a displacement numerator lives over 2q and penalties
over 4q^2.
"""

from __future__ import annotations

import numpy as np

from ..rng import SplitMix64

BACKEND = "pure"


def _member_pair(ka: int, kb: int, q: int, variant: int, en: int, ed: int) -> bool:
    """Membership of one T^2 factor, coordinates ka/q, kb/q."""
    s = ka + kb
    a_low = 2 * ka < q
    b_low = 2 * kb < q
    if variant == 0:
        if (a_low != b_low) and 4 * s < 3 * q:
            return True
        return a_low and 4 * ed * s > (3 * ed + 4 * en) * q and 4 * s < 5 * q
    # T-variant: legacy block minus the pair-sum band [5/6-eps, 5/6).
    if a_low and not b_low:
        in_t = 12 * s >= 7 * q and 3 * s <= 4 * q
    elif a_low and b_low:
        in_t = 6 * s > 5 * q
    elif b_low:
        in_t = (
            12 * s >= 7 * q
            and 6 * s < 5 * q
            and 2 * (2 * ka + kb) < 3 * q
        )
    else:
        in_t = False
    if not in_t:
        return False
    return not (6 * ed * s >= (5 * ed - 6 * en) * q and 6 * s < 5 * q)


def _member_point(nums, d0: int, q: int, variant: int, en: int, ed: int) -> bool:
    for i in range(d0):
        if not _member_pair(nums[2 * i], nums[2 * i + 1], q, variant, en, ed):
            return False
    return True


def block_member_bulk(nums: np.ndarray, q: int, d0: int, variant: int,
                      en: int, ed: int) -> np.ndarray:
    """Membership mask for an (m, 2*d0) array of numerators."""
    rows = np.asarray(nums, dtype=np.uint64).tolist()
    out = np.zeros(len(rows), dtype=np.uint8)
    for idx, row in enumerate(rows):
        if _member_point(row, d0, q, variant, en, ed):
            out[idx] = 1
    return out


def orbit_members(mu, step, q: int, n_max: int, d0: int, variant: int,
                  en: int, ed: int) -> np.ndarray:
    """Indices n in [1, n_max] with mu + n*step inside the block."""
    cur = list(mu)
    st = list(step)
    width = 2 * d0
    hits = []
    for n in range(1, n_max + 1):
        for j in range(width):
            c = cur[j] + st[j]
            cur[j] = c - q if c >= q else c
        if _member_point(cur, d0, q, variant, en, ed):
            hits.append(n)
    return np.asarray(hits, dtype=np.int64)


def _pair_penalty_min(ka: int, kb: int, q: int) -> int:
    """min over the 16 offset candidates of (d1+d2)^2 + d1^2, as an integer
    numerator over 4q^2, with d1 = (2*ka + s1*q)/2q, s1 in {-2,-1,0,1}."""
    best = None
    b1 = 2 * ka
    b2 = 2 * kb
    for s1 in (-2, -1, 0, 1):
        d1 = b1 + s1 * q
        d1sq = d1 * d1
        for s2 in (-2, -1, 0, 1):
            d2 = b2 + s2 * q
            t = d1 + d2
            pen = t * t + d1sq
            if best is None or pen < best:
                best = pen
    return best


def orbit_first_bad(step, q: int, n_max: int, d0: int, threshold: int) -> int:
    """First n in [1, n_max] whose point n*step has total penalty <= threshold
    (threshold is an integer numerator over 4q^2), or -1 if none."""
    cur = [0] * (2 * d0)
    st = list(step)
    width = 2 * d0
    for n in range(1, n_max + 1):
        for j in range(width):
            c = cur[j] + st[j]
            cur[j] = c - q if c >= q else c
        acc = 0
        bad = True
        for i in range(d0):
            acc += _pair_penalty_min(cur[2 * i], cur[2 * i + 1], q)
            if acc > threshold:
                bad = False
                break
        if bad:
            return n
    return -1


def sample_triples(trials: int, d0: int, q: int, variant: int, en: int, ed: int,
                   seed: int, max_draws: int):
    """Sample `trials` 3-APs {x, y=x+alpha, z=x+2*alpha} inside the D0-fold
    product block, uniformly over all such triples on the /q grid.

    Staged per-factor rejection: each factor draws an in-block x-pair, an
    in-block y-pair, and accepts when the induced z-pair is in-block too
    (the acceptance event factorizes over factors, so this matches joint
    rejection exactly). Returns (x, y, z) numerator arrays of shape
    (trials, 2*d0) plus the number of raw 64-bit draws consumed.
    """
    stream = SplitMix64(seed)
    width = 2 * d0
    xs = np.empty((trials, width), dtype=np.uint64)
    ys = np.empty((trials, width), dtype=np.uint64)
    zs = np.empty((trials, width), dtype=np.uint64)
    draws = 0
    for t in range(trials):
        for i in range(d0):
            while True:
                while True:
                    xa = stream.below(q)
                    xb = stream.below(q)
                    draws += 2
                    if draws > max_draws:
                        raise RuntimeError("sampler exceeded its draw budget")
                    if _member_pair(xa, xb, q, variant, en, ed):
                        break
                while True:
                    ya = stream.below(q)
                    yb = stream.below(q)
                    draws += 2
                    if draws > max_draws:
                        raise RuntimeError("sampler exceeded its draw budget")
                    if _member_pair(ya, yb, q, variant, en, ed):
                        break
                za = 2 * ya
                if za >= q:
                    za -= q
                za = za - xa if za >= xa else za + q - xa
                zb = 2 * yb
                if zb >= q:
                    zb -= q
                zb = zb - xb if zb >= xb else zb + q - xb
                if _member_pair(za, zb, q, variant, en, ed):
                    xs[t, 2 * i] = xa
                    xs[t, 2 * i + 1] = xb
                    ys[t, 2 * i] = ya
                    ys[t, 2 * i + 1] = yb
                    zs[t, 2 * i] = za
                    zs[t, 2 * i + 1] = zb
                    break
    return xs, ys, zs, draws


def count_aps_pairscan(elements: np.ndarray, max_witnesses: int):
    """Exact count of nontrivial 3-APs {x<y<z, x+z=2y} within a sorted,
    duplicate-free int64 array; plus the first `max_witnesses` witnesses in
    (x, z) scan order."""
    e = np.asarray(elements, dtype=np.int64)
    k = int(e.size)
    witnesses = []
    count = 0
    for i in range(k - 2):
        s = e[i] + e[i + 1:]
        even = (s & 1) == 0
        mids = s[even] >> 1
        pos = np.searchsorted(e, mids)
        found = (pos < k) & (e[np.minimum(pos, k - 1)] == mids)
        c = int(found.sum())
        count += c
        if c and len(witnesses) < max_witnesses:
            js = np.nonzero(even)[0][found] + i + 1
            for j in js:
                if len(witnesses) >= max_witnesses:
                    break
                x = int(e[i])
                z = int(e[j])
                witnesses.append((x, (x + z) // 2, z))
    wit = np.asarray(witnesses, dtype=np.int64).reshape(-1, 3)
    return count, wit
