"""Bad directions and the search for a good one.

A direction step alpha is *bad* when, for some per-coordinate choice of
offset from the candidate set {-1, -1/2, 0, 1/2}, the shifted lift
d = lift(alpha) + xi has total displacement penalty
sum_i |d1+d2|^2 + d1^2 below the threshold delta_hat. The penalty decomposes
per T^2 factor, so minimizing per factor is exact.

A good direction theta0 has no bad multiple n*theta0 for n in [1, N]; then
every 3-AP surviving inside one weight bucket pair would need a displacement
penalty below delta_hat, which is impossible. That is the whole safety
argument of the constructor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from . import kernels
from .rng import SplitMix64
from .torus import HALF_OFFSET_CANDIDATES, TorusVec


@dataclass(frozen=True)
class BadSetParams:
    """Penalty threshold plus the ambient problem size.

    enforce_scaling=False permits thresholds that ignore the N^{-2/D}
    scaling; direction search is then expected to fail loudly. Useful for
    diagnostics, never for construction.
    """

    delta_hat: Fraction
    n: int
    d0: int
    enforce_scaling: bool = True

    def __post_init__(self):
        dh = Fraction(self.delta_hat)
        object.__setattr__(self, "delta_hat", dh)
        if self.n < 1 or self.d0 < 1:
            raise ValueError("need n >= 1 and d0 >= 1")
        if not Fraction(0) < dh <= Fraction(1, 400):
            raise ValueError("delta_hat must lie in (0, 1/400]")
        if not self.enforce_scaling:
            return
        # (400*delta_hat)^D * N^2 <= 1, checked by exact integer powers.
        d = 2 * self.d0
        lhs = (400 * dh.numerator) ** d * self.n**2
        rhs = dh.denominator**d
        if lhs > rhs:
            raise ValueError(
                "delta_hat too large: (400*delta_hat)^D * N^2 exceeds 1"
            )


def coord_penalty(alpha_pair: tuple[Fraction, Fraction]) -> Fraction:
    """min over candidate offsets xi of |d1+d2|^2 + d1^2, d = alpha_pair + xi."""
    a1, a2 = Fraction(alpha_pair[0]), Fraction(alpha_pair[1])
    if not (0 <= a1 < 1 and 0 <= a2 < 1):
        raise ValueError("alpha pair must lie in [0,1)^2")
    best = None
    for x1, x2 in product(HALF_OFFSET_CANDIDATES, repeat=2):
        d1 = a1 + x1
        d2 = a2 + x2
        pen = (d1 + d2) ** 2 + d1**2
        if best is None or pen < best:
            best = pen
    return best


def in_bad_set(alpha: TorusVec, params: BadSetParams) -> bool:
    """True iff the summed per-factor minimum penalty is below delta_hat."""
    c = alpha.coords
    total = Fraction(0)
    for i in range(alpha.dim_pairs):
        total += coord_penalty((c[2 * i], c[2 * i + 1]))
        if total >= params.delta_hat:
            return False
    return total < params.delta_hat


def penalty_threshold_int(delta_hat: Fraction, q: int) -> int:
    """Largest integer T with T/(4q^2) < delta_hat.

    Kernel penalties are integer numerators over 4q^2; "penalty < delta_hat"
    is then exactly "numerator <= T".
    """
    dh = Fraction(delta_hat)
    return (dh.numerator * 4 * q * q - 1) // dh.denominator


def expected_bad_bound(d0: int, delta_hat: Fraction, n: int) -> Fraction:
    """Upper bound on the expected number of bad multiples among n draws:
    n * (16*sqrt(delta_hat))^D, evaluated as n * 16^D * delta_hat^{D/2}
    (exact since D = 2*d0 is even). With delta_hat <= (1/400) n^{-2/D} this
    is at most (16/20)^D."""
    d = 2 * d0
    return n * Fraction(16) ** d * Fraction(delta_hat) ** d0


@dataclass
class DirectionSearch:
    """Successful search result: the direction and how it was found."""

    direction: TorusVec
    tries: int
    failures: list[tuple[int, int]] = field(default_factory=list)  # (try, first bad n)


class DirectionSearchError(RuntimeError):
    """Raised when max_tries directions all had a bad multiple."""

    def __init__(self, tries: int, failures: list[tuple[int, int]],
                 expected_bound: Fraction):
        self.tries = tries
        self.failures = failures
        self.expected_bound = expected_bound
        best = max((f[1] for f in failures), default=0)
        super().__init__(
            f"no good direction after {tries} tries "
            f"(cleanest try survived to orbit index {best}; "
            f"expected bad-multiple bound per try was {float(expected_bound):.3g})"
        )


def find_good_direction(params: BadSetParams, q: int, rng: SplitMix64,
                        max_tries: int) -> DirectionSearch:
    """Draw uniform directions until one has no bad multiple in [1, n].

    Deterministic given the stream. Failure raises DirectionSearchError
    carrying per-try first-bad diagnostics and the analytic expected-failure
    bound (with the conservative 4-offset candidate set this is
    (16/20)^D < 1, so one try almost always suffices).
    """
    if max_tries < 1:
        raise ValueError("max_tries must be >= 1")
    threshold = penalty_threshold_int(params.delta_hat, q)
    failures: list[tuple[int, int]] = []
    for attempt in range(1, max_tries + 1):
        cand = TorusVec.random(rng, q, params.d0)
        first_bad = kernels.orbit_first_bad(
            cand.nums, q, params.n, params.d0, threshold
        )
        if first_bad == -1:
            return DirectionSearch(direction=cand, tries=attempt,
                                   failures=failures)
        failures.append((attempt, int(first_bad)))
    raise DirectionSearchError(
        max_tries, failures,
        expected_bad_bound(params.d0, params.delta_hat, params.n),
    )
