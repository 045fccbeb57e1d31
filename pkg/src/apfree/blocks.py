"""Building-block subsets of T^2 and their product powers.

Two block families are provided, each a finite union of half-open polygonal
regions of the unit square (identified with T^2 via canonical lifts):

* U-variant (default): U1 u U2 where
    U1 = {(a,b) in [0,1/2)x[1/2,1) u [1/2,1)x[0,1/2) : a+b < 3/4}
    U2 = {(a,b) in [0,1/2)x[0,1)               : 3/4+eps < a+b < 5/4}
  Exact measure 9/32 - eps/2. This is the variant whose additive properties
  are machine-checked (see apfree.checks) and used by the constructor.

* T-variant (benchmark-only alternate): T1 u T2 with the pair-sum band
  [5/6-eps, 5/6) removed. Only a measure lower bound 7/24 - 2*eps is stated,
  and its additive properties are checked empirically, never assumed.

All boundary comparisons are strict/non-strict exactly as written above;
measure statements depend on the half-open conventions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .torus import TorusVec

HALF = Fraction(1, 2)


class BlockVariant(enum.Enum):
    U_TRUNCATION = "U"
    T_EPS = "T"


#: integer codes used by the kernel backends
VARIANT_CODES = {BlockVariant.U_TRUNCATION: 0, BlockVariant.T_EPS: 1}


@dataclass(frozen=True)
class BlockSpec:
    """Building-block choice plus its rational truncation parameter."""

    variant: BlockVariant = BlockVariant.U_TRUNCATION
    epsilon: Fraction = Fraction(1, 16)

    def __post_init__(self):
        eps = Fraction(self.epsilon)
        object.__setattr__(self, "epsilon", eps)
        if not Fraction(0) < eps < Fraction(1, 4):
            raise ValueError(f"epsilon must lie in (0, 1/4), got {eps}")
        if eps.denominator > 1 << 60:
            raise ValueError("epsilon denominator too large for exact kernels")


def in_U1(a: Fraction, b: Fraction) -> bool:
    """The two off-diagonal corner wedges cut by a+b < 3/4."""
    if not (0 <= a < 1 and 0 <= b < 1):
        return False
    off_diagonal = (a < HALF) != (b < HALF)
    return off_diagonal and a + b < Fraction(3, 4)


def in_U2(a: Fraction, b: Fraction, eps: Fraction) -> bool:
    """The anti-diagonal band 3/4+eps < a+b < 5/4 within the left half."""
    if not (0 <= a < 1 and 0 <= b < 1):
        return False
    return a < HALF and Fraction(3, 4) + eps < a + b < Fraction(5, 4)


def in_T1(a: Fraction, b: Fraction) -> bool:
    if not (0 <= a < 1 and 0 <= b < 1):
        return False
    s = a + b
    if a < HALF and b >= HALF:
        return Fraction(7, 12) <= s <= Fraction(4, 3)
    if a < HALF and b < HALF:
        return s > Fraction(5, 6)
    return False


def in_T2(a: Fraction, b: Fraction) -> bool:
    if not (0 <= a < 1 and 0 <= b < 1):
        return False
    s = a + b
    return (
        a >= HALF
        and b < HALF
        and Fraction(7, 12) <= s < Fraction(5, 6)
        and 2 * a + b < Fraction(3, 2)
    )


def in_block_pair(a: Fraction, b: Fraction, spec: BlockSpec) -> bool:
    """Membership of a single T^2 factor (given by its lift) in the block."""
    if spec.variant is BlockVariant.U_TRUNCATION:
        return in_U1(a, b) or in_U2(a, b, spec.epsilon)
    # T-variant: T1 u T2 with the pair-sum band [5/6-eps, 5/6) removed.
    if not (in_T1(a, b) or in_T2(a, b)):
        return False
    s = a + b
    return not (Fraction(5, 6) - spec.epsilon <= s < Fraction(5, 6))


def in_block(theta: TorusVec, spec: BlockSpec) -> bool:
    """Product-set membership: every T^2 factor's lift must lie in the block."""
    c = theta.coords
    return all(
        in_block_pair(c[2 * i], c[2 * i + 1], spec)
        for i in range(theta.dim_pairs)
    )


def measure_exact(spec: BlockSpec) -> Fraction:
    """Lebesgue measure of the block within T^2.

    U-variant: exact value 9/32 - eps/2 (= 1/16 for the wedges plus
    7/32 - eps/2 for the band). T-variant: the stated lower bound
    7/24 - 2*eps; the exact value is not claimed.
    """
    if spec.variant is BlockVariant.U_TRUNCATION:
        return Fraction(9, 32) - spec.epsilon / 2
    return Fraction(7, 24) - 2 * spec.epsilon


def measure_monte_carlo(spec: BlockSpec, samples: int, seed: int = 0,
                        q: int = (1 << 61) - 1) -> Fraction:
    """Uniform-grid Monte Carlo estimate of the block measure.

    Draws `samples` points on the /q grid and returns the hit fraction as an
    exact rational; deterministic for a fixed seed on either backend.
    """
    import numpy as np

    from . import kernels
    from .rng import SplitMix64, substream_seed

    if samples < 1:
        raise ValueError("samples must be >= 1")
    stream = SplitMix64(substream_seed(seed, 0))
    nums = np.fromiter(
        (stream.below(q) for _ in range(2 * samples)),
        dtype=np.uint64, count=2 * samples,
    ).reshape(samples, 2)
    en, ed = spec.epsilon.numerator, spec.epsilon.denominator
    hits = int(kernels.block_member_bulk(
        nums, q, 1, VARIANT_CODES[spec.variant], en, ed).sum())
    return Fraction(hits, samples)
