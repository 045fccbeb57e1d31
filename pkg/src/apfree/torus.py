"""Exact rational arithmetic on products of the two-dimensional torus.

Points live on the grid {0, 1/Q, ..., (Q-1)/Q} for a single modulus Q, so the
orbit map n -> base + n*step reduces to modular arithmetic on numerators and
every comparison downstream is an exact integer comparison. No floats appear
anywhere on a correctness-critical path.

A point of (T^2)^{D0} is stored as 2*D0 numerators; consecutive numerator
pairs (2i, 2i+1) form the i-th T^2 factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .rng import SplitMix64

Rat = Fraction

#: Conservative per-scalar-coordinate candidate offsets xi such that the
#: half-difference of any 3-AP with common difference alpha satisfies
#: d = lift(alpha) + xi coordinate-wise. (The realizable set is {-1,-1/2,0};
#: +1/2 is kept as deliberate slack and only loosens a measure bound.)
HALF_OFFSET_CANDIDATES: tuple[Fraction, ...] = (
    Fraction(-1),
    Fraction(-1, 2),
    Fraction(0),
    Fraction(1, 2),
)


@dataclass(frozen=True)
class TorusVec:
    """Immutable point of (T^2)^{D0} with all coordinates on the /q grid."""

    nums: tuple[int, ...]
    q: int

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("modulus q must be >= 2")
        if len(self.nums) == 0 or len(self.nums) % 2 != 0:
            raise ValueError("need a positive even number of coordinates")
        for v in self.nums:
            if not 0 <= v < self.q:
                raise ValueError(f"numerator {v} outside [0, q)")

    @property
    def dim_pairs(self) -> int:
        return len(self.nums) // 2

    @property
    def coords(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(v, self.q) for v in self.nums)

    @classmethod
    def from_fractions(cls, coords: Iterable[Fraction], q: int) -> "TorusVec":
        nums = []
        for c in coords:
            c = Fraction(c) % 1
            if q % c.denominator != 0:
                raise ValueError(f"coordinate {c} not on the /{q} grid")
            nums.append(c.numerator * (q // c.denominator))
        return cls(tuple(nums), q)

    @classmethod
    def random(cls, stream: SplitMix64, q: int, dim_pairs: int) -> "TorusVec":
        return cls(tuple(stream.below(q) for _ in range(2 * dim_pairs)), q)


@dataclass(frozen=True)
class LiftVec:
    """Real representative vector: canonical lifts in [0,1)^(2*D0), or
    displacement vectors with coordinates in [-1/2, 1/2]."""

    coords: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coords) == 0 or len(self.coords) % 2 != 0:
            raise ValueError("need a positive even number of coordinates")

    @property
    def dim_pairs(self) -> int:
        return len(self.coords) // 2


def lift(theta: TorusVec) -> LiftVec:
    """Canonical representative in [0,1)^(2*D0) of a torus point."""
    return LiftVec(theta.coords)


def frac_bracket(x: Fraction) -> Fraction:
    """Fold [0,1) onto [0,1/2): identity below 1/2, subtract 1/2 above.

    This is the map that annihilates the half-integer subgroup: the value is
    invariant under adding 1/2 mod 1.
    """
    x = Fraction(x)
    if not 0 <= x < 1:
        raise ValueError(f"frac_bracket domain is [0,1), got {x}")
    return x if x < Fraction(1, 2) else x - Fraction(1, 2)


def frac_bracket_vec(v: LiftVec) -> LiftVec:
    return LiftVec(tuple(frac_bracket(c) for c in v.coords))


def pair_sum(theta: TorusVec) -> tuple[Fraction, ...]:
    """Per-T^2-factor sum of the two lift coordinates; each value in [0,2)."""
    c = theta.coords
    return tuple(c[2 * i] + c[2 * i + 1] for i in range(theta.dim_pairs))


def first_coord(theta: TorusVec) -> tuple[Fraction, ...]:
    """Per-T^2-factor first lift coordinate; each value in [0,1)."""
    c = theta.coords
    return tuple(c[2 * i] for i in range(theta.dim_pairs))


def affine_orbit(mu: TorusVec, theta0: TorusVec, n: int) -> TorusVec:
    """mu + n*theta0 with every coordinate reduced into [0,1).

    Exact: both points share the modulus q, so this is (m + n*t) mod q on
    numerators.
    """
    if n < 0:
        raise ValueError("orbit index must be >= 0")
    if mu.q != theta0.q or mu.dim_pairs != theta0.dim_pairs:
        raise ValueError("mismatched modulus or dimension")
    q = mu.q
    return TorusVec(
        tuple((m + n * t) % q for m, t in zip(mu.nums, theta0.nums)), q
    )


def half_difference(theta_x: TorusVec, theta_z: TorusVec) -> LiftVec:
    """(lift(theta_z) - lift(theta_x)) / 2, coordinates in [-1/2, 1/2].

    Denominators may double: grid points map to the /2q grid.
    """
    if theta_x.dim_pairs != theta_z.dim_pairs:
        raise ValueError("mismatched dimension")
    return LiftVec(
        tuple(
            Fraction(zc - xc, 1) / 2
            for xc, zc in zip(lift(theta_x).coords, lift(theta_z).coords)
        )
    )


def offset_candidates(alpha: TorusVec | None = None) -> tuple[Fraction, ...]:
    """Candidate offsets of half_difference(theta, theta+2*alpha) - lift(alpha)
    per scalar coordinate.

    Independent of alpha: for any realizable 3-AP the offset per coordinate is
    -floor(x + 2a)/2 for some lift coordinate x, hence lies in {-1, -1/2, 0}.
    The returned 4-element superset keeps the extra +1/2 slot deliberately.
    """
    return HALF_OFFSET_CANDIDATES


def realized_offsets(theta: TorusVec, alpha: TorusVec) -> tuple[Fraction, ...]:
    """Per-scalar-coordinate offsets d - lift(alpha) actually realized by the
    3-AP {theta, theta+alpha, theta+2*alpha}."""
    theta_z = affine_orbit(theta, alpha, 2)
    d = half_difference(theta, theta_z)
    a = lift(alpha)
    return tuple(dc - ac for dc, ac in zip(d.coords, a.coords))


def parse_rational(text: str) -> Fraction:
    """Parse "p/q" or "p" into an exact Fraction (no float round trips)."""
    s = text.strip()
    try:
        if "/" in s:
            p, q = s.split("/", 1)
            return Fraction(int(p), int(q))
        return Fraction(int(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational 'p/q' value: {text!r}") from exc


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
