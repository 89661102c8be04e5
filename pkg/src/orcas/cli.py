"""Command-line front end.

Exit codes: 0 success, 2 usage or domain error, 3 search did not converge.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import formats
from .designer import SearchError, db_to_linear, design, design_for_target, evaluate
from .nprs import nprs_weight_distribution
from .nprsd import nprsd_weight_distribution
from .polar import PolarSpec, construct_polar, polar_bler, polar_design_for_target
from .simulator import StopRule, measure_throughput, orcas_codec, polar_codec, run_sweep
from .tree import build_tree, describe, supported_length

EXIT_OK, EXIT_USAGE, EXIT_SEARCH = 0, 2, 3

# polar length matching per (n, rate) for the reference lengths
REFERENCE_MATCHING = {
    (96, 1, 4): ("puncture", "bitrev"),
    (96, 1, 2): ("shorten", "natural"),
    (96, 3, 4): ("shorten", "natural"),
    (640, 1, 4): ("puncture", "natural"),
    (640, 1, 2): ("shorten", "bitrev"),
    (640, 3, 4): ("shorten", "natural"),
}
MATCHING_CHOICES = ("auto", "none", "puncture-natural", "puncture-bitrev", "shorten-natural", "shorten-bitrev")


class UsageError(ValueError):
    pass


def default_matching(n: int, k: int) -> tuple[str, str]:
    for (tn, num, den), choice in REFERENCE_MATCHING.items():
        if tn == n and k * den == n * num:
            return choice
    if n & (n - 1) == 0:
        return "none", "natural"
    raise UsageError(f"no default length matching for ({n}, {k}); pass --matching")


def _write(text: str, out: str | None) -> None:
    if out and out != "-":
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _codec(obj):
    if isinstance(obj, PolarSpec):
        return polar_codec(obj, formats.code_id(obj))
    return orcas_codec(obj.profile, formats.code_id(obj))


def cmd_design(args) -> int:
    if not supported_length(args.n):
        raise UsageError(f"unsupported length {args.n}: must be o * 2^m with o in {{1, 3, 5, 7, 9}}")
    if not 0 <= args.k <= args.n:
        raise UsageError(f"dimension {args.k} outside [0, {args.n}]")
    if args.design_snr_db is not None:
        db = args.design_snr_db
        prof = design(args.n, args.k, db_to_linear(db), exact=args.exact)
    else:
        prof, db = design_for_target(args.n, args.k, args.target_bler, exact=args.exact)
    tree = build_tree(prof)
    db = db if math.isfinite(db) else None
    print(f"# design Es/N0 = {'n/a' if db is None else f'{db:.4f} dB'}")
    print("\n".join(describe(tree)))
    if args.out:
        formats.save(formats.OrcasProfile(prof, db), args.out)
    return EXIT_OK


def cmd_analyze(args) -> int:
    obj = formats.load(args.profile)
    points = []
    for eb in formats.parse_range(args.ebn0_db):
        if isinstance(obj, PolarSpec):
            p = polar_bler(obj, db_to_linear(eb))
        else:
            p = evaluate(db_to_linear(eb), obj.profile)
        points.append((eb, p))
    _write(formats.analyze_rows(points), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    obj = formats.load(args.profile)
    stop = StopRule(args.min_errors, args.max_frames)
    recs = run_sweep(_codec(obj), formats.parse_range(args.ebn0_db), stop, args.seed,
                     chunk_frames=args.chunk, all_zero=args.all_zero)
    _write(formats.result_rows(recs, timing=not args.no_timing), args.out)
    return EXIT_OK


def cmd_weights(args) -> int:
    try:
        wd = nprsd_weight_distribution(args.n, args.k) if args.dual else nprs_weight_distribution(args.n, args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.all:
        items = enumerate(wd.counts)
    else:
        items = ((w, a) for w, a in enumerate(wd.counts) if w > 0 and a)
    print(" ".join(f"A_{w}={a}" for w, a in items))
    return EXIT_OK


def cmd_polar(args) -> int:
    if not 0 <= args.k <= args.n:
        raise UsageError(f"dimension {args.k} outside [0, {args.n}]")
    if args.matching == "auto":
        matching, order = default_matching(args.n, args.k)
    elif args.matching == "none":
        matching, order = "none", "natural"
    else:
        matching, order = args.matching.split("-")
    if args.design_snr_db is not None:
        spec = construct_polar(args.n, args.k, db_to_linear(args.design_snr_db), matching, order)
    else:
        spec = polar_design_for_target(args.n, args.k, args.target_bler, matching, order)
    db = "n/a" if spec.design_snr_db is None else f"{spec.design_snr_db:.4f} dB"
    print(f"# {formats.code_id(spec)} mother length {spec.mother_n}, design Es/N0 = {db}")
    print(f"# removed positions: {' '.join(map(str, spec.removed)) or '-'}")
    print(f"# information positions: {' '.join(map(str, spec.info))}")
    if args.out:
        formats.save(spec, args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    for path in args.profiles:
        obj = formats.load(path)
        rate = measure_throughput(_codec(obj), args.duration, args.ebn0_db, args.batch, args.seed)
        print(f"{formats.code_id(obj)}\t{rate:.0f} codewords/s")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="orcas", description="ORCAS code construction, analysis and simulation.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="construct a rate profile and print its code tree")
    p.add_argument("n", type=int, help="block length")
    p.add_argument("k", type=int, help="dimension")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--target-bler", type=float, default=1e-6, help="design for this analytic BLER (default 1e-6)")
    g.add_argument("--design-snr-db", type=float, help="design at this Es/N0 in dB instead")
    p.add_argument("--exact", action="store_true", help="use quadrature phi instead of the lookup table")
    p.add_argument("--out", help="write the profile JSON here")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("analyze", help="analytic BLER of a profile over an Eb/N0 range")
    p.add_argument("profile", help="profile JSON file")
    p.add_argument("--ebn0-db", required=True, help="start:step:stop, comma list or single value")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="Monte Carlo BLER/BER over an Eb/N0 range")
    p.add_argument("profile", help="profile JSON file (orcas or polar)")
    p.add_argument("--ebn0-db", required=True, help="start:step:stop, comma list or single value")
    p.add_argument("--seed", type=int, default=0, help="64-bit seed (default 0)")
    p.add_argument("--min-errors", type=int, default=100, help="stop after this many frame errors (default 100)")
    p.add_argument("--max-frames", type=int, default=10_000_000, help="frame budget per point (default 1e7)")
    p.add_argument("--chunk", type=int, default=1000, help="frames per random-stream chunk (default 1000)")
    p.add_argument("--all-zero", action="store_true", help="send the all-zero codeword only")
    p.add_argument("--no-timing", action="store_true", help="leave elapsed_s empty for reproducible files")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("weights", help="weight distribution of NPRS (or NPRSD with --dual)")
    p.add_argument("n", type=int, help="block length")
    p.add_argument("k", type=int, help="dimension")
    p.add_argument("--dual", action="store_true", help="high-rate NPRSD code")
    p.add_argument("--all", action="store_true", help="print every A_w including zeros")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("polar", help="construct a length-matched DEGA polar code")
    p.add_argument("n", type=int, help="block length after matching")
    p.add_argument("k", type=int, help="dimension")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--target-bler", type=float, default=1e-6, help="design for this analytic BLER (default 1e-6)")
    g.add_argument("--design-snr-db", type=float, help="design at this Es/N0 in dB instead")
    p.add_argument("--matching", choices=MATCHING_CHOICES, default="auto",
                   help="length matching; auto uses the reference choice for n in {96, 640}")
    p.add_argument("--out", help="write the polar code JSON here")
    p.set_defaults(func=cmd_polar)

    p = sub.add_parser("bench", help="single-process decoding throughput")
    p.add_argument("profiles", nargs="+", help="profile JSON files")
    p.add_argument("--duration", type=float, default=2.0, help="seconds per profile (default 2)")
    p.add_argument("--ebn0-db", type=float, default=2.0, help="channel Eb/N0 of the test frames (default 2)")
    p.add_argument("--batch", type=int, default=2000, help="frames per decoder call (default 2000)")
    p.add_argument("--seed", type=int, default=0, help="seed of the test frames")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEARCH
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
