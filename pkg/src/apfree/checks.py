"""Machine checks of the block's additive properties.

Exhaustive grid checks (exact int64 arithmetic, vectorized):

* check_bracket_law: the fold map's parallelogram defect can only fall
  below 2*d^2 when min(x,z) < 1/2 <= y.
* check_u1_midpoint: within the corner wedges the first-coordinate defect
  dominates 2*d1^2 outright.
* check_one_sided_rounding: midpoints of block points never land on the
  block shifted by (1/2,1/2), (1/2,0) or (0,1/2).

Sampled checks over exact numerators on the /q grid:

* check_quantitative: single-factor disjunction, either the +1/2 pair-sum
  inequality or the exact midpoint pair-sum identity plus (under the
  small-displacement guard) the quadratic fold inequality.
* check_product_set: the D0-fold weight-form disjunction behind the
  constructor's bucket-safety argument.

Every violation record is replayable: `replay_violation(name, record,
params)` recomputes the predicate from the record alone, bit for bit.
A proven statement must report zero violations; any violation points at an
implementation bug or a genuine discrepancy and is surfaced, never
suppressed.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import kernels
from .blocks import BlockSpec, BlockVariant
from .constructor import DEFAULT_MODULUS
from .rng import substream_seed
from .torus import format_rational, parse_rational

SHARD_TRIALS = 4096
MAX_STORED_VIOLATIONS = 100
_COVERAGE_MIN = 0.001  # each disjunct branch must fire this often


def _default_threads(threads: Optional[int]) -> int:
    if threads is not None and threads >= 1:
        return threads
    env = os.environ.get("APFREE_THREADS", "")
    if env.strip().isdigit() and int(env) >= 1:
        return int(env)
    return min(32, os.cpu_count() or 1)


@dataclass
class CheckReport:
    """Outcome of one check: violations empty <=> pass; counterexamples are
    replayable from the record plus params alone."""

    name: str
    trials: int
    violations: list[dict]
    violations_total: int
    stats: dict
    params: dict
    elapsed_ms: float
    coverage_ok: Optional[bool] = None

    @property
    def passed(self) -> bool:
        return self.violations_total == 0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "passed": self.passed,
            "violations_total": self.violations_total,
            "violations": self.violations,
            "stats": self.stats,
            "params": self.params,
            "coverage_ok": self.coverage_ok,
            "elapsed_ms": round(self.elapsed_ms, 3),
        }


# ---------------------------------------------------------------------------
# scalar predicates (shared by replay; the exhaustive checks vectorize them)
# ---------------------------------------------------------------------------

def _fold_over_2g(num2: int, g2: int) -> int:
    """Fold numerator over denominator g2=2g for a value num2/g2 in [0,1]."""
    half = g2 // 2
    return num2 if num2 < half else num2 - half


def bracket_law_violates(nx: int, nz: int, g: int) -> bool:
    """x=nx/g, z=nz/g in [0,1]: premise (fold defect < 2*d^2) without the
    conclusion min(x,z) < 1/2 <= y."""
    g2 = 2 * g
    ny = nx + nz  # y = (x+z)/2 over 2g
    fx = _fold_over_2g(2 * nx, g2)
    fz = _fold_over_2g(2 * nz, g2)
    fy = _fold_over_2g(ny, g2)
    lhs = (g2 - fx) ** 2 + (g2 - fz) ** 2 - 2 * (g2 - fy) ** 2
    rhs = 2 * (nz - nx) ** 2
    premise = lhs < rhs
    conclusion = 2 * min(nx, nz) < g and ny >= g
    return premise and not conclusion


def u1_midpoint_violates(xa: int, xb: int, za: int, zb: int, g: int) -> bool:
    """x=(xa,xb)/g, z=(za,zb)/g both in U1: first-coordinate fold defect must
    be >= 2*d1^2."""
    g2 = 2 * g
    fy = _fold_over_2g(xa + za, g2)
    fx = _fold_over_2g(2 * xa, g2)
    fz = _fold_over_2g(2 * za, g2)
    lhs = (g2 - fx) ** 2 + (g2 - fz) ** 2 - 2 * (g2 - fy) ** 2
    return lhs < 2 * (za - xa) ** 2


def _in_u_over_den(a_num: int, b_num: int, den: int, en: int, ed: int) -> bool:
    """Membership of (a_num/den, b_num/den) in U1 u U2, any denominator."""
    if not (0 <= a_num < den and 0 <= b_num < den):
        return False
    s = a_num + b_num
    a_low = 2 * a_num < den
    b_low = 2 * b_num < den
    if (a_low != b_low) and 4 * s < 3 * den:
        return True
    return a_low and 4 * ed * s > (3 * ed + 4 * en) * den and 4 * s < 5 * den


_ROUNDING_SHIFTS = ((1, 1), (1, 0), (0, 1))  # times 1/2 per coordinate


def one_sided_rounding_violates(xa: int, xb: int, za: int, zb: int, g: int,
                                en: int, ed: int) -> bool:
    """x, z in U (numerators over g): the midpoint y* may not equal u + xi
    for u in U and xi in {(1/2,1/2),(1/2,0),(0,1/2)}."""
    g2 = 2 * g
    ya = xa + za  # over 2g
    yb = xb + zb
    for s1, s2 in _ROUNDING_SHIFTS:
        wa = ya - s1 * g
        wb = yb - s2 * g
        if _in_u_over_den(wa, wb, g2, en, ed):
            return True
    return False


def _fold_over_2q(num: int, q: int) -> int:
    t = 2 * num
    return t if t < q else t - q


def quantitative_eval(x, y, z, q: int, en: int, ed: int) -> dict:
    """Evaluate both disjunct branches on one single-factor triple.

    Numerators over q; 'plus_half' is the +1/2 pair-sum branch, 'freiman_ok'
    the midpoint-identity branch (with the quadratic fold inequality under
    the guard, in its strong 2*d1^2 form; the stated d1^2 form is tallied
    alongside).
    """
    sx = x[0] + x[1]
    sy = y[0] + y[1]
    sz = z[0] + z[1]
    plus_half = 4 * sy >= 2 * (sx + sz) + q
    f1 = 2 * (sy - sx) == sz - sx
    guard = 1000 * ed * abs(sz - sx) <= 2 * q * en
    q2 = 2 * q
    bx = _fold_over_2q(x[0], q)
    by = _fold_over_2q(y[0], q)
    bz = _fold_over_2q(z[0], q)
    lhs = (q2 - bx) ** 2 + (q2 - bz) ** 2 - 2 * (q2 - by) ** 2
    d1sq = (z[0] - x[0]) ** 2
    f2_stated = lhs >= d1sq
    f2_strong = lhs >= 2 * d1sq
    freiman_ok = f1 and ((not guard) or f2_strong)
    return {
        "plus_half": plus_half,
        "freiman1": f1,
        "guard": guard,
        "f2_stated": f2_stated,
        "f2_strong": f2_strong,
        "freiman_ok": freiman_ok,
        "violation": not (plus_half or freiman_ok),
    }


def product_set_eval(x, y, z, q: int, d0: int, c2: Fraction,
                     w3_literal: bool = False) -> dict:
    """Evaluate the weight-form disjunction on one D0-factor triple.

    Also classifies the realized per-coordinate half-difference offsets
    (numerator of d - lift(alpha) over 2q must be a multiple of q in
    {-2q, -q, 0, q}).
    """
    width = 2 * d0
    sx = sum(x)
    sy = sum(y)
    sz = sum(z)
    plus_half = 4 * sy >= 2 * (sx + sz) + q

    c2n, c2d = c2.numerator, c2.denominator
    q2 = 2 * q

    def wnum(p):
        a2 = 0
        w3 = 0
        for i in range(d0):
            s = p[2 * i] + p[2 * i + 1]
            a2 += s * s
            b = 2 * (q - p[2 * i]) if w3_literal else q2 - _fold_over_2q(p[2 * i], q)
            w3 += b * b
        return 4 * c2n * a2 + c2d * w3

    pen = 0
    f1_all = True
    offsets = []
    for i in range(d0):
        dsx = x[2 * i] + x[2 * i + 1]
        dsy = y[2 * i] + y[2 * i + 1]
        dsz = z[2 * i] + z[2 * i + 1]
        ds = dsz - dsx
        d1 = z[2 * i] - x[2 * i]
        pen += ds * ds + d1 * d1
        if 2 * (dsy - dsx) != ds:
            f1_all = False
        for c in (2 * i, 2 * i + 1):
            alpha = (y[c] - x[c]) % q
            off = z[c] - x[c] - 2 * alpha
            offsets.append(off // q if off % q == 0 else None)
    quad_ok = wnum(x) + wnum(z) - 2 * wnum(y) >= c2d * pen
    return {
        "plus_half": plus_half,
        "quad_ok": quad_ok,
        "freiman1_all": f1_all,
        "offsets": offsets,  # in units of q over 2q: -2 -> -1, -1 -> -1/2 ...
        "offset_escape": any(o is None or o not in (-2, -1, 0, 1) for o in offsets),
        "violation": not (plus_half or quad_ok),
    }


# ---------------------------------------------------------------------------
# exhaustive grid checks
# ---------------------------------------------------------------------------

def check_bracket_law(grid: int = 128) -> CheckReport:
    """All x, z in {0, 1/g, ..., 1} with y their midpoint; exhaustive."""
    if grid < 2 or grid % 2 != 0:
        raise ValueError("grid must be an even integer >= 2")
    t0 = time.perf_counter()
    g = grid
    vals = np.arange(g + 1, dtype=np.int64)
    nx, nz = np.meshgrid(vals, vals, indexing="ij")
    nx = nx.ravel()
    nz = nz.ravel()
    g2 = 2 * g

    def fold(v2):
        return np.where(v2 < g, v2, v2 - g)

    ny = nx + nz
    fx = fold(2 * nx)
    fz = fold(2 * nz)
    fy = fold(ny)
    lhs = (g2 - fx) ** 2 + (g2 - fz) ** 2 - 2 * (g2 - fy) ** 2
    premise = lhs < 2 * (nz - nx) ** 2
    conclusion = (2 * np.minimum(nx, nz) < g) & (ny >= g)
    bad = premise & ~conclusion
    idx = np.nonzero(bad)[0][:MAX_STORED_VIOLATIONS]
    violations = [
        {"x": f"{int(nx[i])}/{g}", "z": f"{int(nz[i])}/{g}"} for i in idx
    ]
    return CheckReport(
        name="bracket",
        trials=int(nx.size),
        violations=violations,
        violations_total=int(bad.sum()),
        stats={"premise_fired": int(premise.sum())},
        params={"grid": g},
        elapsed_ms=(time.perf_counter() - t0) * 1e3,
    )


def _u1_grid_points(g: int) -> tuple[np.ndarray, np.ndarray]:
    vals = np.arange(g, dtype=np.int64)
    a, b = np.meshgrid(vals, vals, indexing="ij")
    a = a.ravel()
    b = b.ravel()
    keep = ((2 * a < g) != (2 * b < g)) & (4 * (a + b) < 3 * g)
    return a[keep], b[keep]


def check_u1_midpoint(grid: int = 64) -> CheckReport:
    """All ordered pairs of U1 grid points; exhaustive."""
    if grid < 8 or grid % 2 != 0:
        raise ValueError("grid must be an even integer >= 8")
    t0 = time.perf_counter()
    g = grid
    a, b = _u1_grid_points(g)
    m = a.size
    i = np.repeat(np.arange(m), m)
    j = np.tile(np.arange(m), m)
    xa, za = a[i], a[j]
    g2 = 2 * g

    def fold(v2):
        return np.where(v2 < g, v2, v2 - g)

    fy = fold(xa + za)
    fx = fold(2 * xa)
    fz = fold(2 * za)
    lhs = (g2 - fx) ** 2 + (g2 - fz) ** 2 - 2 * (g2 - fy) ** 2
    bad = lhs < 2 * (za - xa) ** 2
    idx = np.nonzero(bad)[0][:MAX_STORED_VIOLATIONS]
    violations = [
        {
            "x": [f"{int(a[i[t]])}/{g}", f"{int(b[i[t]])}/{g}"],
            "z": [f"{int(a[j[t]])}/{g}", f"{int(b[j[t]])}/{g}"],
        }
        for t in idx
    ]
    return CheckReport(
        name="u1",
        trials=int(m) * int(m),
        violations=violations,
        violations_total=int(bad.sum()),
        stats={"region_points": int(m)},
        params={"grid": g},
        elapsed_ms=(time.perf_counter() - t0) * 1e3,
    )


def check_one_sided_rounding(grid: int = 64,
                             epsilon: Fraction = Fraction(1, 16)
                             ) -> CheckReport:
    """All ordered pairs of block grid points against the three half-integer
    shifts; exhaustive."""
    if grid < 8 or grid % 2 != 0:
        raise ValueError("grid must be an even integer >= 8")
    spec = BlockSpec(BlockVariant.U_TRUNCATION, epsilon)
    en, ed = spec.epsilon.numerator, spec.epsilon.denominator
    if ed * 40 * grid >= 1 << 62:  # int64 headroom for the vectorized path
        raise ValueError("epsilon denominator too large for this grid check")
    t0 = time.perf_counter()
    g = grid
    vals = np.arange(g, dtype=np.int64)
    a, b = np.meshgrid(vals, vals, indexing="ij")
    a = a.ravel()
    b = b.ravel()
    s = a + b
    in_u1 = ((2 * a < g) != (2 * b < g)) & (4 * s < 3 * g)
    in_u2 = (2 * a < g) & (4 * ed * s > (3 * ed + 4 * en) * g) & (4 * s < 5 * g)
    keep = in_u1 | in_u2
    pa, pb = a[keep], b[keep]
    m = pa.size
    i = np.repeat(np.arange(m), m)
    j = np.tile(np.arange(m), m)
    ya = pa[i] + pa[j]  # midpoint numerators over 2g
    yb = pb[i] + pb[j]
    g2 = 2 * g
    bad = np.zeros(ya.shape, dtype=bool)
    for s1, s2 in _ROUNDING_SHIFTS:
        wa = ya - s1 * g
        wb = yb - s2 * g
        inside = (wa >= 0) & (wb >= 0) & (wa < g2) & (wb < g2)
        ws = wa + wb
        w_u1 = ((2 * wa < g2) != (2 * wb < g2)) & (4 * ws < 3 * g2)
        w_u2 = (2 * wa < g2) & (4 * ed * ws > (3 * ed + 4 * en) * g2) \
            & (4 * ws < 5 * g2)
        bad |= inside & (w_u1 | w_u2)
    idx = np.nonzero(bad)[0][:MAX_STORED_VIOLATIONS]
    violations = [
        {
            "x": [f"{int(pa[i[t]])}/{g}", f"{int(pb[i[t]])}/{g}"],
            "z": [f"{int(pa[j[t]])}/{g}", f"{int(pb[j[t]])}/{g}"],
        }
        for t in idx
    ]
    return CheckReport(
        name="rounding",
        trials=int(m) * int(m),
        violations=violations,
        violations_total=int(bad.sum()),
        stats={"region_points": int(m)},
        params={"grid": g, "epsilon": format_rational(spec.epsilon)},
        elapsed_ms=(time.perf_counter() - t0) * 1e3,
    )


# ---------------------------------------------------------------------------
# sampled checks
# ---------------------------------------------------------------------------

def _sample_shards(trials: int, d0: int, q: int, variant_code: int,
                   en: int, ed: int, seed: int, threads: int):
    """Yield (x, y, z, draws) per fixed-size shard, in shard order.

    Shards have their own derived RNG streams, so the merged result is
    independent of the thread count.
    """
    shards = []
    done = 0
    idx = 0
    while done < trials:
        take = min(SHARD_TRIALS, trials - done)
        shards.append((idx, take))
        done += take
        idx += 1

    def run(item):
        shard_idx, take = item
        stream = substream_seed(seed, shard_idx)
        budget = 200_000 * take + 1_000_000
        return kernels.sample_triples(take, d0, q, variant_code, en, ed,
                                      stream, budget)

    if threads > 1 and len(shards) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            yield from pool.map(run, shards)
    else:
        for item in shards:
            yield run(item)


def check_quantitative(epsilon: Fraction = Fraction(1, 16),
                       trials: int = 10**6, seed: int = 0,
                       q: int = DEFAULT_MODULUS,
                       threads: Optional[int] = None) -> CheckReport:
    """Sample `trials` 3-APs inside the single-factor block on the /q grid
    and assert the disjunction; tally each branch."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    spec = BlockSpec(BlockVariant.U_TRUNCATION, epsilon)
    en, ed = spec.epsilon.numerator, spec.epsilon.denominator
    nthreads = _default_threads(threads)
    t0 = time.perf_counter()
    keys = ("plus_half", "freiman1", "guard", "f2_stated", "f2_strong",
            "freiman_ok")
    stats = {k: 0 for k in keys}
    stats.update(plus_half_only=0, freiman_only=0, both=0, draws=0)
    violations: list[dict] = []
    total_violations = 0
    for xs, ys, zs, draws in _sample_shards(trials, 1, q, 0, en, ed, seed,
                                            nthreads):
        stats["draws"] += draws
        for x, y, z in zip(xs.tolist(), ys.tolist(), zs.tolist()):
            r = quantitative_eval(x, y, z, q, en, ed)
            for k in keys:
                stats[k] += bool(r[k])
            if r["plus_half"] and r["freiman_ok"]:
                stats["both"] += 1
            elif r["plus_half"]:
                stats["plus_half_only"] += 1
            elif r["freiman_ok"]:
                stats["freiman_only"] += 1
            if r["violation"]:
                total_violations += 1
                if len(violations) < MAX_STORED_VIOLATIONS:
                    violations.append({"x": x, "y": y, "z": z})
    coverage = (stats["plus_half"] >= _COVERAGE_MIN * trials
                and stats["freiman_ok"] >= _COVERAGE_MIN * trials)
    return CheckReport(
        name="quantitative",
        trials=trials,
        violations=violations,
        violations_total=total_violations,
        stats=stats,
        params={"epsilon": format_rational(spec.epsilon), "q": q,
                "seed": seed, "d0": 1, "variant": "U"},
        elapsed_ms=(time.perf_counter() - t0) * 1e3,
        coverage_ok=bool(coverage),
    )


def check_product_set(epsilon: Fraction = Fraction(1, 16), d0: int = 2,
                      trials: int = 10**5, seed: int = 0,
                      q: int = DEFAULT_MODULUS,
                      c2: Optional[Fraction] = None,
                      w3_literal: bool = False,
                      threads: Optional[int] = None) -> CheckReport:
    """Sample `trials` 3-APs inside the D0-fold product block and assert the
    weight-form disjunction; tally branches and realized offsets."""
    if trials < 1 or d0 < 1:
        raise ValueError("need trials >= 1 and d0 >= 1")
    spec = BlockSpec(BlockVariant.U_TRUNCATION, epsilon)
    en, ed = spec.epsilon.numerator, spec.epsilon.denominator
    from .weights import c2_default

    c2val = Fraction(c2) if c2 is not None else c2_default(spec.epsilon)
    nthreads = _default_threads(threads)
    t0 = time.perf_counter()
    stats = {
        "plus_half": 0, "quad_ok": 0, "freiman1_all": 0,
        "plus_half_only": 0, "quad_only": 0, "both": 0, "draws": 0,
        "offset_escapes": 0,
    }
    offset_counts = {"-1": 0, "-1/2": 0, "0": 0, "1/2": 0}
    violations: list[dict] = []
    total_violations = 0
    for xs, ys, zs, draws in _sample_shards(trials, d0, q, 0, en, ed, seed,
                                            nthreads):
        stats["draws"] += draws
        for x, y, z in zip(xs.tolist(), ys.tolist(), zs.tolist()):
            r = product_set_eval(x, y, z, q, d0, c2val, w3_literal)
            stats["plus_half"] += bool(r["plus_half"])
            stats["quad_ok"] += bool(r["quad_ok"])
            stats["freiman1_all"] += bool(r["freiman1_all"])
            if r["plus_half"] and r["quad_ok"]:
                stats["both"] += 1
            elif r["plus_half"]:
                stats["plus_half_only"] += 1
            elif r["quad_ok"]:
                stats["quad_only"] += 1
            for off in r["offsets"]:
                key = {-2: "-1", -1: "-1/2", 0: "0", 1: "1/2"}.get(off)
                if key is not None:
                    offset_counts[key] += 1
            bad = r["violation"] or r["offset_escape"]
            if r["offset_escape"]:
                stats["offset_escapes"] += 1
            if bad:
                total_violations += 1
                if len(violations) < MAX_STORED_VIOLATIONS:
                    violations.append({"x": x, "y": y, "z": z})
    stats["offset_counts"] = offset_counts
    coverage = (stats["plus_half"] >= _COVERAGE_MIN * trials
                and stats["quad_ok"] >= _COVERAGE_MIN * trials)
    return CheckReport(
        name="product",
        trials=trials,
        violations=violations,
        violations_total=total_violations,
        stats=stats,
        params={"epsilon": format_rational(spec.epsilon), "q": q,
                "seed": seed, "d0": d0, "variant": "U",
                "c2": format_rational(c2val), "w3_literal": w3_literal},
        elapsed_ms=(time.perf_counter() - t0) * 1e3,
        coverage_ok=bool(coverage),
    )


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------

def replay_violation(name: str, record: dict, params: dict) -> bool:
    """Recompute a reported counterexample's predicate from the report alone;
    True means the record indeed violates the check."""
    if name == "bracket":
        g = int(params["grid"])
        nx = parse_rational(record["x"]).numerator * g \
            // parse_rational(record["x"]).denominator
        nz = parse_rational(record["z"]).numerator * g \
            // parse_rational(record["z"]).denominator
        return bracket_law_violates(nx, nz, g)
    if name == "u1":
        g = int(params["grid"])

        def num(s):
            f = parse_rational(s)
            return f.numerator * g // f.denominator

        xa, xb = (num(v) for v in record["x"])
        za, zb = (num(v) for v in record["z"])
        return u1_midpoint_violates(xa, xb, za, zb, g)
    if name == "rounding":
        g = int(params["grid"])
        eps = parse_rational(params["epsilon"])

        def num(s):
            f = parse_rational(s)
            return f.numerator * g // f.denominator

        xa, xb = (num(v) for v in record["x"])
        za, zb = (num(v) for v in record["z"])
        return one_sided_rounding_violates(xa, xb, za, zb, g,
                                           eps.numerator, eps.denominator)
    if name == "quantitative":
        eps = parse_rational(params["epsilon"])
        r = quantitative_eval(record["x"], record["y"], record["z"],
                              int(params["q"]), eps.numerator,
                              eps.denominator)
        return r["violation"]
    if name == "product":
        c2 = parse_rational(params["c2"])
        r = product_set_eval(record["x"], record["y"], record["z"],
                             int(params["q"]), int(params["d0"]), c2,
                             bool(params.get("w3_literal", False)))
        return r["violation"] or r["offset_escape"]
    raise ValueError(f"unknown check name {name!r}")
