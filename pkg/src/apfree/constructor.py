"""End-to-end pipeline producing provably 3-AP-free subsets of [1, N].

Pipeline: derive exact parameters; find a direction whose multiples all
avoid the bad set; walk the orbit base + n*direction for n in [1, N] over a
handful of random base points; keep the orbit points inside the product
block; bucket them by (w1, w2+w3) half-open windows; return the n's of the
fullest bucket.

Safety: three selected indices n1 < n2 < n3 with n1+n3 = 2*n2 would give a
torus 3-AP inside the block whose common difference is a multiple of the
direction. The product-set inequality (machine-checked in apfree.checks)
forces such a progression to spread w1 by >= 1/2 or w2+w3 by >= the
displacement penalty, which the good direction keeps >= delta_hat. Both
spreads exceed what one bucket can contain. A brute-force verification is still
run on every output unless explicitly skipped.

Bucketing the empirical orbit replaces the spec-level measure pigeonhole:
it selects at least as many points in expectation and uses the identical
safety inequality.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import kernels
from .badset import BadSetParams, find_good_direction
from .blocks import VARIANT_CODES, BlockSpec, BlockVariant
from .rng import SplitMix64, substream_seed
from .torus import TorusVec, format_rational
from .verifier import count_aps_bruteforce
from .weights import WeightParams, c2_default

DEFAULT_MODULUS = (1 << 61) - 1
_DYADIC_SCALE = 64  # delta_hat denominators are at most 2^64


def _int_root(x: int, k: int) -> int:
    """floor(x ** (1/k)) for x >= 0, k >= 1, by bisection."""
    if x < 0 or k < 1:
        raise ValueError("need x >= 0 and k >= 1")
    if x in (0, 1) or k == 1:
        return x
    hi = 1 << (x.bit_length() // k + 1)
    lo = 0
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**k <= x:
            lo = mid
        else:
            hi = mid - 1
    return lo


def delta_hat_for(n: int, d: int) -> Fraction:
    """Largest dyadic rational m/2^64 with (400*delta)^D * N^2 <= 1.

    A conservative threshold only shrinks the bad set; soundness is kept by
    using the same value for the w2+w3 bucket width (delta_hat/2).
    """
    if n < 1:
        raise ValueError("N must be >= 1")
    if d < 2 or d % 2 != 0:
        raise ValueError("D must be an even integer >= 2")
    target = 1 << (_DYADIC_SCALE * d)
    lo, hi = 0, (1 << _DYADIC_SCALE) // 400
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if (400 * mid) ** d * n * n <= target:
            lo = mid
        else:
            hi = mid - 1
    if lo == 0:
        raise ValueError(f"N={n} too large for D={d}: threshold underflows")
    return Fraction(lo, 1 << _DYADIC_SCALE)


@dataclass(frozen=True)
class DerivedParams:
    d0: int
    delta_hat: Fraction
    w1_width: Fraction
    w23_width: Fraction
    c2: Fraction


def derive_params(n: int, d: int, epsilon: Fraction,
                  c2_override: Optional[Fraction] = None) -> DerivedParams:
    """All exact parameters implied by (N, D, epsilon)."""
    if d % 2 != 0 or d < 2:
        raise ValueError("D must be an even integer >= 2")
    if n < 1:
        raise ValueError("N must be >= 1")
    eps = Fraction(epsilon)
    dh = delta_hat_for(n, d)
    c2 = Fraction(c2_override) if c2_override is not None else c2_default(eps)
    return DerivedParams(
        d0=d // 2,
        delta_hat=dh,
        w1_width=Fraction(1, 4),
        w23_width=dh / 2,
        c2=c2,
    )


def recommended_D(n: int, mode: str = "new") -> int:
    """Smallest even D at least the mode's dimension formula.

    classic: D >= sqrt(2*log2(N));  new: D >= sqrt(2*log_b(N)) with
    b = sqrt(32/9). Decided by exact integer power comparisons
    (2^(D^2) >= N^2, resp. (32/9)^(D^2) >= N^4).
    """
    if n < 2:
        raise ValueError("N must be >= 2")
    if mode not in ("classic", "new"):
        raise ValueError("mode must be 'classic' or 'new'")
    k = 2
    while k <= 512:
        if mode == "classic":
            ok = (1 << (k * k)) >= n * n
        else:
            ok = 32 ** (k * k) >= 9 ** (k * k) * n**4
        if ok:
            return k
        k += 2
    raise ValueError("N out of supported range")


def theoretical_bound(n: int, d: int, epsilon: Fraction) -> Fraction:
    """Reference curve (1/D^2) * N * (9/32 - eps)^(D/2) * N^(-2/D).

    Constants are dropped; this is a shape reference, not a guarantee. The
    value is exact when N^2 is a perfect D-th power, otherwise the
    conservative rational 1/(floor(N^(2/D)) + 1) replaces N^(-2/D).
    """
    if d % 2 != 0 or d < 2:
        raise ValueError("D must be an even integer >= 2")
    eps = Fraction(epsilon)
    base = Fraction(9, 32) - eps
    if base <= 0:
        raise ValueError("epsilon too large")
    r = _int_root(n * n, d)
    rho = Fraction(1, r) if r**d == n * n else Fraction(1, r + 1)
    return Fraction(n, d * d) * base ** (d // 2) * rho


@dataclass(frozen=True)
class ConstructionConfig:
    n: int
    d: int
    epsilon: Fraction = Fraction(1, 16)
    q: int = DEFAULT_MODULUS
    seed: int = 0
    max_direction_tries: int = 32
    num_mu_samples: int = 8
    c2_override: Optional[Fraction] = None
    allow_unsafe_c2: bool = False
    variant: BlockVariant = BlockVariant.U_TRUNCATION
    w3_literal: bool = False
    skip_verify: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("N must be >= 1")
        if self.d % 2 != 0 or self.d < 2 or self.d > 64:
            raise ValueError("D must be an even integer in [2, 64]")
        eps = Fraction(self.epsilon)
        object.__setattr__(self, "epsilon", eps)
        if not Fraction(0) < eps < Fraction(1, 4):
            raise ValueError("epsilon must lie in (0, 1/4)")
        if not 2 <= self.q <= kernels.MAX_MODULUS:
            raise ValueError(f"modulus must lie in [2, 2^61], got {self.q}")
        if self.num_mu_samples < 1:
            raise ValueError("need at least one base-point sample")
        if self.c2_override is not None:
            object.__setattr__(self, "c2_override", Fraction(self.c2_override))


@dataclass(frozen=True)
class ProgressionFreeSet:
    """A sorted 3-AP-free subset of [1, N] plus how it was produced."""

    n: int
    elements: tuple[int, ...]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(int(v) for v in self.elements))
        prev = 0
        for v in self.elements:
            if not 1 <= v <= self.n:
                raise ValueError(f"element {v} outside [1, {self.n}]")
            if v <= prev:
                raise ValueError("elements must be strictly increasing")
            prev = v

    @property
    def density(self) -> float:
        return len(self.elements) / self.n if self.n else 0.0

    def to_ints_text(self) -> str:
        return "".join(f"{v}\n" for v in self.elements)

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "d": self.provenance.get("d"),
            "epsilon": self.provenance.get("epsilon"),
            "seed": self.provenance.get("seed"),
            "elements": list(self.elements),
            "provenance": self.provenance,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ProgressionFreeSet":
        doc = json.loads(text)
        return cls(n=int(doc["n"]), elements=tuple(int(v) for v in doc["elements"]),
                   provenance=doc.get("provenance", {}))

    def write(self, path: str | Path, fmt: str = "ints") -> None:
        text = self.to_ints_text() if fmt == "ints" else self.to_json()
        Path(path).write_text(text)


def _fold_num_2q(num: int, q: int) -> int:
    """Numerator of frac_bracket(num/q) over denominator 2q."""
    t = 2 * num
    return t if t < q else t - q


def _bucket_ints(nums: tuple[int, ...], q: int, d0: int, params: WeightParams
                 ) -> tuple[int, int]:
    """Integer-only bucket_pair for a grid point given by numerators."""
    s_all = sum(nums)
    i1 = (4 * s_all) // q
    a2 = 0
    w3num = 0
    for i in range(d0):
        ka = nums[2 * i]
        kb = nums[2 * i + 1]
        s = ka + kb
        a2 += s * s
        if params.w3_literal:
            b = 2 * (q - ka)
        else:
            b = 2 * q - _fold_num_2q(ka, q)
        w3num += b * b
    c2 = params.c2
    wnum = 4 * c2.numerator * a2 + c2.denominator * w3num
    wd = params.w23_width
    i2 = (wnum * wd.denominator) // (4 * q * q * c2.denominator * wd.numerator)
    return i1, i2


class ConstructionError(RuntimeError):
    pass


def construct(config: ConstructionConfig, threads: int | None = None
              ) -> ProgressionFreeSet:
    """Run the full pipeline; the result is verified unless skip_verify.

    Deterministic: identical config (including seed) gives identical output
    on either kernel backend. An empty result (no orbit point entered the
    block) is reported with diagnostics, never raised.
    """
    params = derive_params(config.n, config.d, config.epsilon,
                           config.c2_override)
    block = BlockSpec(config.variant, config.epsilon)
    wp = WeightParams(
        epsilon=config.epsilon,
        w23_width=params.w23_width,
        c2=params.c2,
        w3_literal=config.w3_literal,
        allow_unsafe_c2=config.allow_unsafe_c2,
    )
    bad = BadSetParams(delta_hat=params.delta_hat, n=config.n, d0=params.d0)
    dir_stream = SplitMix64(substream_seed(config.seed, 0))
    search = find_good_direction(bad, config.q, dir_stream,
                                 config.max_direction_tries)
    theta0 = search.direction

    mu_stream = SplitMix64(substream_seed(config.seed, 1))
    variant_code = VARIANT_CODES[config.variant]
    en, ed = block.epsilon.numerator, block.epsilon.denominator

    mus = [TorusVec.random(mu_stream, config.q, params.d0)
           for _ in range(config.num_mu_samples)]

    def scan(mu: TorusVec):
        return kernels.orbit_members(mu.nums, theta0.nums, config.q, config.n,
                                     params.d0, variant_code, en, ed)

    if threads and threads > 1 and len(mus) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            member_lists = list(pool.map(scan, mus))
    else:
        member_lists = [scan(mu) for mu in mus]

    best = None  # (count, mu_index, i1, i2, tuple_of_ns)
    in_block_counts = []
    top_buckets: list[tuple[int, int, int, int]] = []
    for j, (mu, members) in enumerate(zip(mus, member_lists)):
        in_block_counts.append(int(members.size))
        buckets: dict[tuple[int, int], list[int]] = {}
        for n_i in members.tolist():
            nums = tuple((m + n_i * t) % config.q
                         for m, t in zip(mu.nums, theta0.nums))
            key = _bucket_ints(nums, config.q, params.d0, wp)
            buckets.setdefault(key, []).append(n_i)
        for key in sorted(buckets):
            ns = buckets[key]
            cand = (-len(ns), j, key[0], key[1])
            if best is None or cand < best[0]:
                best = (cand, tuple(ns), mu)
            top_buckets.append((len(ns), j, key[0], key[1]))

    top_buckets.sort(key=lambda r: (-r[0], r[1], r[2], r[3]))

    provenance = {
        "method": "forge",
        "d": config.d,
        "epsilon": format_rational(config.epsilon),
        "seed": config.seed,
        "q": config.q,
        "variant": config.variant.value,
        "theta0": list(theta0.nums),
        "direction_tries": search.tries,
        "params": {
            "d0": params.d0,
            "delta_hat": format_rational(params.delta_hat),
            "w1_width": format_rational(params.w1_width),
            "w23_width": format_rational(params.w23_width),
            "c2": format_rational(wp.c2),
            "c2_unsafe": wp.is_unsafe,
            "w3_literal": config.w3_literal,
            "mu_samples": config.num_mu_samples,
            "max_direction_tries": config.max_direction_tries,
        },
        "in_block_counts": in_block_counts,
        "top_buckets": [
            {"size": c, "mu_index": j, "r1_bucket": i1, "r2_bucket": str(i2)}
            for c, j, i1, i2 in top_buckets[:5]
        ],
    }

    if best is None:
        provenance.update({
            "mu": None, "r1_bucket": None, "r2_bucket": None,
            "diagnostic": "no orbit point entered the block",
            "verified": True,
        })
        return ProgressionFreeSet(n=config.n, elements=(), provenance=provenance)

    (_, mu_index, i1, i2), ns, mu = best
    provenance.update({
        "mu": list(mu.nums),
        "mu_index": mu_index,
        "r1_bucket": i1,
        "r2_bucket": str(i2),
        "bucket_size": len(ns),
    })

    elements = tuple(sorted(ns))
    must_verify = (not config.skip_verify) or config.variant is BlockVariant.T_EPS
    if must_verify:
        count, witnesses, _ = count_aps_bruteforce(elements, max_witnesses=3)
        if count != 0:
            raise ConstructionError(
                f"internal safety violation: output contains {count} "
                f"progressions, e.g. {witnesses[:3]}"
            )
        provenance["verified"] = True
    else:
        provenance["verified"] = False

    return ProgressionFreeSet(n=config.n, elements=elements,
                              provenance=provenance)
