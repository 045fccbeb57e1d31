"""Batch command-line front end.

Subcommands: construct, verify, bench, theory-check, backend-bench.
Exit status contract: 0 success / AP-free; 1 verification failure;
2 configuration error; 3 construction failure.

All rational flags are exact "p/q" strings: no floating-point inputs.
Every construct run writes a manifest sufficient to reproduce it exactly.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__, kernels
from .badset import DirectionSearchError
from .behrend import BOUND_NOTE, behrend_construct, classic_curve
from .checks import (check_bracket_law, check_one_sided_rounding,
                     check_product_set, check_quantitative, check_u1_midpoint)
from .constructor import (ConstructionConfig, ConstructionError, construct,
                          recommended_D, theoretical_bound)
from .torus import format_rational, parse_rational
from .verifier import (count_aps_bruteforce, count_aps_convolution,
                       is_3ap_free, load_elements)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_CONFIG = 2
EXIT_CONSTRUCTION = 3

BENCH_HEADER = ["n", "mode", "d", "size", "density", "ref_curve", "ms",
                "verified"]

#: printed by `bench`: the reference curves are shape-only and desk-scale
#: densities must not be read as evidence of asymptotic superiority.
NON_REPRODUCIBILITY_NOTE = (
    "note: reference curves drop absolute constants and the asymptotic "
    "crossover between the two constructions is far beyond desk scale; "
    "the achieved densities below are reported side by side with no "
    "superiority claim in either direction."
)


class CliConfigError(ValueError):
    pass


def _threads_from(args) -> int | None:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("APFREE_THREADS", "").strip()
    if env.isdigit() and int(env) >= 1:
        return int(env)
    return None


def _rat(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise CliConfigError(str(exc)) from exc


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(path: Path, command: str, config: dict,
                    outputs: dict[str, Path], wall_ms: float) -> None:
    doc = {
        "command": command,
        "config": config,
        "version": __version__,
        "backend": kernels.BACKEND,
        "wall_ms": round(wall_ms, 3),
        "outputs": {
            name: {"path": str(p), "sha256": _sha256_file(p)}
            for name, p in outputs.items()
        },
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# construct
# ---------------------------------------------------------------------------

def cmd_construct(args) -> int:
    epsilon = _rat(args.epsilon)
    n = args.n
    d = args.d if args.d is not None else recommended_D(n, "new")
    c2_override = None
    allow_unsafe = False
    if args.unsafe_c2 is not None:
        c2_override = _rat(args.unsafe_c2)
        allow_unsafe = True
    elif args.c2 is not None:
        c2_override = _rat(args.c2)
    try:
        config = ConstructionConfig(
            n=n, d=d, epsilon=epsilon, q=args.q, seed=args.seed,
            num_mu_samples=args.mu_samples,
            max_direction_tries=args.max_direction_tries,
            c2_override=c2_override, allow_unsafe_c2=allow_unsafe,
            w3_literal=args.w3_literal, skip_verify=args.skip_verify,
        )
    except ValueError as exc:
        raise CliConfigError(str(exc)) from exc

    t0 = time.perf_counter()
    try:
        result = construct(config, threads=_threads_from(args))
    except (DirectionSearchError, ConstructionError) as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    wall_ms = (time.perf_counter() - t0) * 1e3

    ext = "json" if args.format == "json" else "txt"
    out = Path(args.out) if args.out else Path(
        f"apfree_n{n}_d{d}_s{args.seed}.{ext}")
    result.write(out, fmt="json" if args.format == "json" else "ints")

    manifest_path = out.with_suffix(out.suffix + ".manifest.json")
    config_doc = {
        "n": n, "d": d, "epsilon": format_rational(epsilon), "q": args.q,
        "seed": args.seed, "mu_samples": args.mu_samples,
        "max_direction_tries": args.max_direction_tries,
        "c2": format_rational(c2_override) if c2_override is not None else None,
        "unsafe_c2": allow_unsafe, "w3_literal": args.w3_literal,
        "skip_verify": args.skip_verify, "format": args.format,
        "derived": result.provenance.get("params", {}),
    }
    _write_manifest(manifest_path, "construct", config_doc, {"set": out},
                    wall_ms)

    bound = theoretical_bound(n, d, epsilon)
    size = len(result.elements)
    status = "verified" if result.provenance.get("verified") else "UNVERIFIED"
    print(f"|A|={size} density={size / n:.3e} ref_bound={float(bound):.3e} "
          f"({status}, {wall_ms:.0f} ms, backend={kernels.BACKEND})")
    for b in result.provenance.get("top_buckets", []):
        print(f"  bucket mu={b['mu_index']} r1={b['r1_bucket']} "
              f"size={b['size']} density={b['size'] / n:.3e}")
    print(f"wrote {out} and {manifest_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    try:
        elements, _ = load_elements(args.infile)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"cannot read set: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    counts = {}
    witnesses = []
    if args.method in ("brute", "both"):
        c, witnesses, capped = count_aps_bruteforce(
            elements, max_witnesses=args.max_witnesses)
        counts["brute"] = c
    if args.method in ("conv", "both"):
        counts["conv"] = count_aps_convolution(elements)

    if len(counts) == 2 and counts["brute"] != counts["conv"]:
        print(f"counter mismatch: brute={counts['brute']} "
              f"conv={counts['conv']}", file=sys.stderr)
        return EXIT_VERIFY_FAIL

    count = next(iter(counts.values()))
    for name, c in counts.items():
        print(f"{name} count: {c}")
    for w in witnesses[:args.max_witnesses]:
        print(f"witness: {w.x} {w.y} {w.z}")
    print(f"set size {len(set(elements))}: "
          f"{'3-AP-free' if count == 0 else f'{count} progressions found'}")
    return EXIT_OK if count == 0 else EXIT_VERIFY_FAIL


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def cmd_bench(args) -> int:
    try:
        n_list = [int(v) for v in args.n_list.split(",") if v.strip()]
        if not n_list:
            raise ValueError("empty --n-list")
    except ValueError as exc:
        raise CliConfigError(f"bad --n-list: {exc}") from exc
    epsilon = _rat(args.epsilon)
    modes = ["behrend", "forge"] if args.modes == "both" else [args.modes]

    print(NON_REPRODUCIBILITY_NOTE, file=sys.stderr)
    print(BOUND_NOTE, file=sys.stderr)

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(BENCH_HEADER)
    any_bad = False
    for n in n_list:
        for mode in modes:
            t0 = time.perf_counter()
            d = None
            size = 0
            verified = False
            ref = ""
            try:
                if mode == "behrend":
                    d = recommended_D(n, "classic")
                    ref = f"{classic_curve(n, d):.6e}"
                    result = behrend_construct(n, d)
                else:
                    d = recommended_D(n, "new")
                    ref = f"{float(theoretical_bound(n, d, epsilon)):.6e}"
                    cfg = ConstructionConfig(n=n, d=d, epsilon=epsilon,
                                             seed=args.seed)
                    result = construct(cfg, threads=_threads_from(args))
                size = len(result.elements)
                verified = is_3ap_free(result.elements)
                if not verified:
                    any_bad = True
            except Exception as exc:
                print(f"row n={n} mode={mode} failed: {exc}", file=sys.stderr)
                verified = False
                any_bad = True
            ms = (time.perf_counter() - t0) * 1e3
            writer.writerow([n, mode, d if d is not None else "",
                             size, f"{size / n:.6e}", ref, f"{ms:.1f}",
                             str(verified).lower()])
    text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_VERIFY_FAIL if any_bad else EXIT_OK


# ---------------------------------------------------------------------------
# theory-check
# ---------------------------------------------------------------------------

def cmd_theory_check(args) -> int:
    suites = (["bracket", "u1", "rounding", "quantitative", "product"]
              if args.suite == "all" else [args.suite])
    epsilon = _rat(args.epsilon)
    threads = _threads_from(args)
    reports = []
    for suite in suites:
        if suite == "bracket":
            rep = check_bracket_law(args.grid if args.grid else 128)
        elif suite == "u1":
            rep = check_u1_midpoint(args.grid if args.grid else 64)
        elif suite == "rounding":
            rep = check_one_sided_rounding(args.grid if args.grid else 64,
                                           epsilon)
        elif suite == "quantitative":
            rep = check_quantitative(epsilon, trials=args.trials,
                                     seed=args.seed, threads=threads)
        else:
            for d0 in args.d0_list:
                rep = check_product_set(epsilon, d0=d0, trials=args.trials,
                                        seed=args.seed, threads=threads)
                reports.append(rep)
            continue
        reports.append(rep)

    total_violations = 0
    for rep in reports:
        total_violations += rep.violations_total
        status = "PASS" if rep.passed else "FAIL"
        extra = ""
        if rep.coverage_ok is False:
            extra = " [insufficient branch coverage]"
        d0 = rep.params.get("d0")
        label = rep.name if d0 is None else f"{rep.name}(d0={d0})"
        print(f"{label}: {status} ({rep.trials} cases, "
              f"{rep.violations_total} violations, {rep.elapsed_ms:.0f} ms)"
              f"{extra}")
        for v in rep.violations[:3]:
            print(f"  counterexample: {v}")

    doc = {"version": __version__, "backend": kernels.BACKEND,
           "reports": [r.to_dict() for r in reports]}
    report_path = Path(args.report)
    report_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"wrote {report_path}")
    return EXIT_OK if total_violations == 0 else EXIT_VERIFY_FAIL


# ---------------------------------------------------------------------------
# backend-bench
# ---------------------------------------------------------------------------

def cmd_backend_bench(args) -> int:
    import numpy as np

    from .rng import SplitMix64

    q = (1 << 61) - 1
    results = []
    backends = kernels.available_backends()
    if "native" not in backends:
        print("native backend unavailable; benchmarking pure only",
              file=sys.stderr)

    stream = SplitMix64(7)
    step = tuple(stream.below(q) for _ in range(4))
    mu = tuple(stream.below(q) for _ in range(4))
    rng = np.random.default_rng(7)
    elems = np.unique(rng.integers(1, 10 * args.set_size, args.set_size))

    workloads = {
        "orbit_scan": lambda k: k.orbit_members(mu, step, q, args.n, 2, 0,
                                                1, 16),
        "bad_scan": lambda k: k.orbit_first_bad(step, q, args.n, 2,
                                                (q * q) // 400),
        "sample_triples": lambda k: k.sample_triples(args.trials, 2, q, 0, 1,
                                                     16, 12345,
                                                     10**9),
        "count_aps": lambda k: k.count_aps_pairscan(elems, 10),
    }
    for name, fn in workloads.items():
        row = {"workload": name}
        for backend in backends:
            impl = kernels.get_backend(backend)
            t0 = time.perf_counter()
            fn(impl)
            row[backend] = (time.perf_counter() - t0) * 1e3
        results.append(row)

    writer = csv.writer(sys.stdout)
    writer.writerow(["workload", "pure_ms", "native_ms", "speedup"])
    for row in results:
        pure_ms = row.get("pure")
        native_ms = row.get("native")
        speedup = (f"{pure_ms / native_ms:.1f}x"
                   if pure_ms and native_ms else "")
        writer.writerow([
            row["workload"],
            f"{pure_ms:.2f}" if pure_ms is not None else "",
            f"{native_ms:.2f}" if native_ms is not None else "",
            speedup,
        ])
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser / entry
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="apfree",
        description="Construct, verify and benchmark 3-AP-free integer sets "
                    "with exact rational arithmetic.",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a 3-AP-free subset of [1,N]")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--d", type=int, default=None,
                   help="even dimension (default: recommended for N)")
    c.add_argument("--epsilon", default="1/16", help="rational, e.g. 1/16")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--mu-samples", type=int, default=8)
    c.add_argument("--max-direction-tries", type=int, default=32)
    c.add_argument("--q", type=int, default=(1 << 61) - 1,
                   help="grid modulus (2..2^61)")
    c.add_argument("--c2", default=None,
                   help="override the quadratic weight constant (rational, "
                        "validated against the soundness floor)")
    c.add_argument("--unsafe-c2", default=None, metavar="C2",
                   help="override c2 below the soundness floor; correctness "
                        "then rests on the verifier alone")
    c.add_argument("--w3-literal", action="store_true",
                   help="use the unfolded w3 form (comparison only)")
    c.add_argument("--skip-verify", action="store_true")
    c.add_argument("--out", default=None)
    c.add_argument("--format", choices=("ints", "json"), default="ints")
    c.add_argument("--threads", type=int, default=None)
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="count 3-APs in a set file")
    v.add_argument("--in", dest="infile", required=True)
    v.add_argument("--method", choices=("brute", "conv", "both"),
                   default="brute")
    v.add_argument("--max-witnesses", type=int, default=100)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="compare constructions across N")
    b.add_argument("--n-list", required=True,
                   help="comma-separated N values")
    b.add_argument("--modes", choices=("behrend", "forge", "both"),
                   default="both")
    b.add_argument("--epsilon", default="1/16")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default=None)
    b.add_argument("--threads", type=int, default=None)
    b.set_defaults(func=cmd_bench)

    t = sub.add_parser("theory-check", help="machine-check the block's "
                                            "additive properties")
    t.add_argument("--suite",
                   choices=("bracket", "u1", "rounding", "quantitative",
                            "product", "all"),
                   default="all")
    t.add_argument("--grid", type=int, default=None,
                   help="grid denominator (defaults: bracket 128, others 64)")
    t.add_argument("--trials", type=int, default=100000)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--epsilon", default="1/16")
    t.add_argument("--d0-list", type=lambda s: [int(v) for v in s.split(",")],
                   default=[1, 2, 3])
    t.add_argument("--report", default="theory_report.json")
    t.add_argument("--threads", type=int, default=None)
    t.set_defaults(func=cmd_theory_check)

    bb = sub.add_parser("backend-bench",
                        help="time the compiled kernels against the pure-"
                             "Python fallback")
    bb.add_argument("--n", type=int, default=100000,
                    help="orbit scan length")
    bb.add_argument("--trials", type=int, default=20000,
                    help="3-AP samples to draw")
    bb.add_argument("--set-size", type=int, default=2000,
                    help="set size for the pair-scan counter")
    bb.set_defaults(func=cmd_backend_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        return args.func(args)
    except (CliConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
