"""The three weight functions on (T^2)^{D0} and annulus bucket indexing.

w1 is the L1 norm of the per-factor pair sums, w2 a large quadratic multiple
of their L2 norm squared, and w3 the squared distance of the folded first
coordinates from the all-ones vector. Each weight is additive across T^2
factors. Half-open buckets of width 1/4 (for w1) and delta_hat/2 (for w2+w3)
are what make single buckets 3-AP-safe: any 3-AP inside the product block
either spreads w1 by at least 1/2 or spreads w2+w3 by at least the realized
displacement penalty, which a good direction keeps >= delta_hat.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .torus import TorusVec, first_coord, frac_bracket, pair_sum

#: the quadratic weight constant must satisfy c2 >= 1 + C2_FLOOR_SCALE/eps^2
#: for the product-set inequality's proof to go through (each guarded index
#: must contribute >= 100 after reserving the |d1+d2|^2 terms).
C2_FLOOR_SCALE = 10**8
C2_DEFAULT_SCALE = 10**10


def c2_default(epsilon: Fraction) -> Fraction:
    return Fraction(C2_DEFAULT_SCALE) / (Fraction(epsilon) ** 2)


def c2_floor(epsilon: Fraction) -> Fraction:
    return 1 + Fraction(C2_FLOOR_SCALE) / (Fraction(epsilon) ** 2)


@dataclass(frozen=True)
class WeightParams:
    """Weight constants plus the two bucket widths used by the annulus."""

    epsilon: Fraction
    w23_width: Fraction
    c2: Fraction | None = None
    w1_width: Fraction = field(default=Fraction(1, 4))
    w3_literal: bool = False
    allow_unsafe_c2: bool = False

    def __post_init__(self):
        eps = Fraction(self.epsilon)
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "w23_width", Fraction(self.w23_width))
        c2 = c2_default(eps) if self.c2 is None else Fraction(self.c2)
        object.__setattr__(self, "c2", c2)
        if c2 <= 0:
            raise ValueError("c2 must be positive")
        if not self.allow_unsafe_c2 and c2 < c2_floor(eps):
            raise ValueError(
                f"c2={c2} is below the soundness floor {c2_floor(eps)}; "
                "pass allow_unsafe_c2=True to proceed on verifier-only trust"
            )
        if self.w1_width != Fraction(1, 4):
            raise ValueError("w1 bucket width is fixed at 1/4")
        if self.w23_width <= 0:
            raise ValueError("w23 bucket width must be positive")

    @property
    def is_unsafe(self) -> bool:
        return self.c2 < c2_floor(self.epsilon)


def w1(theta: TorusVec) -> Fraction:
    """L1 norm of the pair sums; range within [0, 2*D0]."""
    return sum(pair_sum(theta), Fraction(0))


def w2(theta: TorusVec, params: WeightParams) -> Fraction:
    """c2 times the squared L2 norm of the pair sums."""
    return params.c2 * sum((s * s for s in pair_sum(theta)), Fraction(0))


def w3(theta: TorusVec, literal: bool = False) -> Fraction:
    """Squared distance of the (folded) first coordinates from all-ones.

    The folded form (default) is the one the midpoint inequalities hold for,
    with per-factor values in (1/4, 1]. `literal=True` skips the fold; it
    exists for comparison only and carries no soundness claim.
    """
    total = Fraction(0)
    for p in first_coord(theta):
        v = p if literal else frac_bracket(p)
        total += (1 - v) ** 2
    return total


def w23(theta: TorusVec, params: WeightParams) -> Fraction:
    return w2(theta, params) + w3(theta, literal=params.w3_literal)


def bucket_pair(theta: TorusVec, params: WeightParams) -> tuple[int, int]:
    """Half-open bucket indices (floor(w1 / (1/4)), floor((w2+w3) / width))."""
    i1 = w1(theta) // params.w1_width
    i2 = w23(theta, params) // params.w23_width
    return int(i1), int(i2)
