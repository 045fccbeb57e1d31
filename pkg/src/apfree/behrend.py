"""Classic Behrend baseline construction and reference bound curves.

Digit vectors in [0, q)^D are encoded in base 2q, so adding two encoded set
members never carries; a progression x + z = 2y then forces the digit
vectors themselves to satisfy v_x + v_z = 2 v_y, and all three lie on the
same sphere |v|^2 = r: impossible for v_x != v_z by strict convexity.
Picking the fullest sphere shell gives at least q^D / #norms elements by
pigeonhole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .constructor import (ConstructionConfig, ProgressionFreeSet, _int_root,
                          construct, recommended_D, theoretical_bound)
from .torus import format_rational


@dataclass(frozen=True)
class BehrendParams:
    """Digit geometry of one Behrend run: base 2q encoding of [0,q)^D."""

    n: int
    d: int
    q: int
    r: int  # squared norm of the selected shell

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("D must be >= 1")
        if self.q < 1:
            raise ValueError(f"N={self.n} too small for D={self.d}")
        if not 0 <= self.r <= self.d * (self.q - 1) ** 2:
            raise ValueError("shell norm out of range")


def _shell_census(q: int, d: int) -> np.ndarray:
    """counts[r] = #{v in [0,q)^D : |v|^2 = r}, exact in int64
    (q^D <= N stays far below 2^63 for any supported N)."""
    max_norm = d * (q - 1) ** 2
    counts = np.zeros(max_norm + 1, dtype=np.int64)
    counts[0] = 1
    for _ in range(d):
        nxt = np.zeros_like(counts)
        for digit in range(q):
            sq = digit * digit
            if sq > max_norm:
                break
            nxt[sq:] += counts[: max_norm + 1 - sq]
        counts = nxt
    return counts


def _enumerate_shell(q: int, d: int, r: int, tables: list[np.ndarray]
                     ) -> list[tuple[int, ...]]:
    """All digit vectors in [0,q)^D with squared norm r, pruned by the
    per-suffix census tables."""
    out: list[tuple[int, ...]] = []
    vec = [0] * d

    def walk(pos: int, rem: int):
        if pos == d:
            if rem == 0:
                out.append(tuple(vec))
            return
        suffix = tables[d - pos - 1]
        for digit in range(q):
            left = rem - digit * digit
            if left < 0:
                break
            if left < suffix.size and suffix[left] > 0:
                vec[pos] = digit
                walk(pos + 1, left)
        vec[pos] = 0

    walk(0, r)
    return out


def behrend_construct(n: int, d: int) -> ProgressionFreeSet:
    """Largest-shell Behrend set inside [1, n] using D digits.

    q = floor(n^(1/D) / 2); raises when q < 1 (n too small for this D).
    Elements are 1 + sum_i v_i (2q)^i, so everything lands in [1, n].
    """
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    q = _int_root(n, d) // 2
    if q < 1:
        raise ValueError(f"N={n} too small for D={d} (digit base underflow)")
    tables = [_shell_census(q, k) if k else np.array([1], dtype=np.int64)
              for k in range(d + 1)]
    counts = tables[d]
    best_r = int(np.argmax(counts))  # ties resolve to the smallest norm
    vectors = _enumerate_shell(q, d, best_r, tables)
    assert len(vectors) == int(counts[best_r])

    base = 2 * q
    elements = []
    for vec in vectors:
        val = 0
        place = 1
        for digit in vec:
            val += digit * place
            place *= base
        elements.append(val + 1)
    elements.sort()
    if elements and elements[-1] > n:
        raise AssertionError("encoding escaped the universe bound")

    distinct_norms = int(np.count_nonzero(counts))
    params = BehrendParams(n=n, d=d, q=q, r=best_r)
    provenance = {
        "method": "behrend",
        "d": d,
        "epsilon": None,
        "seed": None,
        "q_digits": q,
        "digit_base": base,
        "shell_norm": best_r,
        "shell_size": len(elements),
        "distinct_norms": distinct_norms,
        "pigeonhole_floor": format_rational(
            Fraction(q**d, d * (q - 1) ** 2 + 1) if q > 1 else Fraction(1)
        ),
    }
    return ProgressionFreeSet(n=n, elements=tuple(elements),
                              provenance=provenance)


#: reference curves drop absolute constants; see bound_table's note field.
BOUND_NOTE = (
    "reference curves drop absolute constants; desk-scale sizes do not "
    "demonstrate any asymptotic superiority in either direction"
)


def classic_curve(n: int, d: int) -> float:
    """sqrt(D) * N * 2^-D * N^(-2/D), constants dropped (display only)."""
    return math.sqrt(d) * n * 2.0**-d * n ** (-2.0 / d)


def bound_table(n_list: Iterable[int], modes: tuple[str, ...] = (),
                epsilon: Fraction = Fraction(1, 16), seed: int = 0
                ) -> list[dict]:
    """Reference curves per N, plus achieved sizes for any requested modes
    ("behrend" and/or "forge"). Failures are recorded in the row."""
    rows = []
    for n in n_list:
        d_classic = recommended_D(n, "classic")
        d_new = recommended_D(n, "new")
        row: dict = {
            "n": n,
            "classic_curve": classic_curve(n, d_classic),
            "new_curve": float(theoretical_bound(n, d_new, epsilon)),
            "behrend_size": None,
            "forge_size": None,
            "note": BOUND_NOTE,
        }
        if "behrend" in modes:
            try:
                row["behrend_size"] = len(behrend_construct(n, d_classic).elements)
            except ValueError as exc:
                row["behrend_size"] = f"error: {exc}"
        if "forge" in modes:
            try:
                cfg = ConstructionConfig(n=n, d=d_new, epsilon=epsilon,
                                         seed=seed)
                row["forge_size"] = len(construct(cfg).elements)
            except Exception as exc:  # recorded, run continues
                row["forge_size"] = f"error: {exc}"
        rows.append(row)
    return rows
