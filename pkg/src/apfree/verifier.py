"""Exact detection and counting of 3-term arithmetic progressions.

This is the ground-truth oracle for everything else in the package; both
counters are exact over the integers:

* count_aps_bruteforce: pair scan over (x, z) with a bitset midpoint
  lookup, O(|A|^2); also produces witnesses.
* count_aps_convolution: number-theoretic transform over F_p with
  p = 15*2^27 + 1; the 0/1 indicator's self-convolution coefficients are
  bounded by |A| < p, so the modular result equals the integer result.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from . import kernels

NTT_PRIME = 2013265921  # 15 * 2^27 + 1
NTT_ROOT = 31
_NTT_MAX_LEN = 1 << 27

# One-time primitive-root sanity check: 31^((p-1)/f) != 1 for f in {2,3,5}.
for _f in (2, 3, 5):
    assert pow(NTT_ROOT, (NTT_PRIME - 1) // _f, NTT_PRIME) != 1


class APWitness(NamedTuple):
    """A nontrivial progression x < y < z with x + z = 2y, all in the set."""

    x: int
    y: int
    z: int


def _normalize(a: Iterable[int]) -> np.ndarray:
    e = np.asarray(sorted(set(int(v) for v in a)), dtype=np.int64)
    return e


def count_aps_bruteforce(a: Iterable[int], max_witnesses: int = 100
                         ) -> tuple[int, list[APWitness], bool]:
    """(count, witnesses, capped) for a set of integers.

    Witnesses are reported in (x, z) scan order and capped at
    `max_witnesses` to bound memory on dense inputs.
    """
    e = _normalize(a)
    count, wit = kernels.count_aps_pairscan(e, max_witnesses)
    witnesses = [APWitness(int(x), int(y), int(z)) for x, y, z in wit]
    return int(count), witnesses, int(count) > len(witnesses)


def _power_table(base: int, length: int) -> np.ndarray:
    """base**arange(length) mod p, by binary decomposition of the exponent."""
    out = np.ones(length, dtype=np.uint64)
    exps = np.arange(length, dtype=np.uint64)
    b = base % NTT_PRIME
    bit = 0
    while (1 << bit) < length:
        mask = ((exps >> np.uint64(bit)) & np.uint64(1)).astype(bool)
        out[mask] = out[mask] * np.uint64(b) % np.uint64(NTT_PRIME)
        b = b * b % NTT_PRIME
        bit += 1
    return out


def _ntt(a: np.ndarray, inverse: bool) -> np.ndarray:
    """Iterative radix-2 transform; all products stay below 2^62."""
    n = a.size
    p = np.uint64(NTT_PRIME)
    # bit-reversal permutation
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    bits = n.bit_length() - 1
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    a = a[rev].astype(np.uint64)
    length = 2
    while length <= n:
        half = length // 2
        wn = pow(NTT_ROOT, (NTT_PRIME - 1) // length, NTT_PRIME)
        if inverse:
            wn = pow(wn, NTT_PRIME - 2, NTT_PRIME)
        w = _power_table(wn, half)
        blocks = a.reshape(n // length, length)
        u = blocks[:, :half].copy()  # copy: the first assignment aliases it
        t = blocks[:, half:] * w % p
        blocks[:, :half] = (u + t) % p
        blocks[:, half:] = (u + p - t) % p
        length *= 2
    if inverse:
        n_inv = pow(n, NTT_PRIME - 2, NTT_PRIME)
        a = a * np.uint64(n_inv) % p
    return a


def count_aps_convolution(a: Iterable[int], n: int | None = None) -> int:
    """Exact 3-AP count via S = sum_{y in A} (1_A * 1_A)(2y); returns
    (S - |A|) / 2. Equals count_aps_bruteforce on every input."""
    e = _normalize(a)
    k = int(e.size)
    if k == 0:
        return 0
    if e[0] < 1:
        raise ValueError("elements must be positive integers")
    if n is not None and e[-1] > n:
        raise ValueError("element exceeds the stated universe bound")
    top = int(e[-1])
    size = 1
    while size < 2 * top + 1:
        size *= 2
    if size > _NTT_MAX_LEN:
        raise ValueError(
            f"universe too large for the transform (max element {top}); "
            f"supported up to {(_NTT_MAX_LEN - 1) // 2}"
        )
    # Coefficient bound: each convolution coefficient counts ordered pairs
    # summing to an index, hence <= |A|, which must stay below the prime.
    if k >= NTT_PRIME:
        raise ValueError("set too large for single-prime exactness")
    f = np.zeros(size, dtype=np.uint64)
    f[e] = 1
    fhat = _ntt(f, inverse=False)
    conv = _ntt(fhat * fhat % np.uint64(NTT_PRIME), inverse=True)
    s = int(conv[2 * e].sum(dtype=object))
    assert (s - k) % 2 == 0
    return (s - k) // 2


def is_3ap_free(a: Iterable[int]) -> bool:
    """True iff the set contains no nontrivial 3-term progression."""
    e = _normalize(a)
    if e.size < 3:
        return True
    span = int(e[-1] - e[0]) + 1
    if e.size <= 20000 and span <= (1 << 32):
        count, _, _ = count_aps_bruteforce(e, max_witnesses=1)
        return count == 0
    return count_aps_convolution(e) == 0


def load_elements(path: str | Path) -> tuple[list[int], int | None]:
    """Read a set from newline-delimited integers or constructor JSON.

    Returns (elements, universe_bound_or_None). Raises ValueError on
    malformed input.
    """
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        elements = [int(v) for v in doc["elements"]]
        return elements, int(doc["n"]) if "n" in doc else None
    elements = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        elements.append(int(line))
    return elements, None
