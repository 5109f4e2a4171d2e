"""Command-line entry point.

Exit codes: 0 success, 1 no result, 2 usage, 3 I/O, 4 data integrity.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import candgen, gparray
from .collider import BucketCorruption, ReplayDivergence, SearchConfig, SolutionRejected
from .formats import FormatError
from .report import check_records, to_tsv, write_report
from .sds import FIXTURE_FILES, FixtureError, format_record, fixture_path, quadruple_record, read_fixture_file
from .seqcore import quadratic_residues

EXIT_OK, EXIT_NONE, EXIT_USAGE, EXIT_IO, EXIT_DATA = 0, 1, 2, 3, 4

log = logging.getLogger("propus")


class UsageError(Exception):
    pass


def _positive_float(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return x


def _load_records(path, index=None):
    records = read_fixture_file(path)
    if index is None:
        return records
    if not 1 <= index <= len(records):
        raise UsageError(f"{path} has {len(records)} records; --index {index} is out of range")
    return [records[index - 1]]


def cmd_enumerate(args) -> int:
    try:
        spec = candgen.CandidateFileSpec(args.v, args.k, args.symmetric, args.psd_bound)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.symmetric and not spec.feasible:
        log.warning("no symmetric subsets of size %d in Z_%d", args.k, args.v)
    res = candgen.emit_files(spec, args.out_prefix)
    print(f"{res.subset_path}\t{res.lines} lines")
    print(f"{res.paf_path}\t{res.lines} lines")
    print(f"examined {res.examined}, accepted {res.lines}, rejection ratio {res.rejection_ratio:.4f}")
    return EXIT_OK


def cmd_bucket(args) -> int:
    buckets = candgen.bucket_split(args.paf, args.subsets, args.source, args.out_prefix)
    print("source\tlead\tcount\tpath")
    for b in buckets:
        print(f"{b.source}\t{b.lead}\t{b.count}\t{b.path}")
    return EXIT_OK


def cmd_search(args) -> int:
    from .search import instances_from_buckets, run_deterministic, run_parallel

    try:
        config = SearchConfig(
            lam=args.lam,
            dp_bits=args.dp_bits,
            max_walk_len=args.max_walk_len,
            time_limit=args.time_limit,
            worker_count=args.workers,
            max_steps=args.max_steps,
            max_solutions=args.max_solutions,
            walks_per_task=args.walks_per_task,
            walks_per_version=args.walks_per_version or None,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.workers < 1 or args.max_solutions < 1 or args.walks_per_task < 1:
        raise UsageError("--workers, --max-solutions and --walks-per-task must be positive")
    groups = []
    for name, spec in (("A", args.bucket_a), ("D", args.bucket_d), ("B", args.bucket_b)):
        found = candgen.discover_buckets(spec, name)
        if not found and not Path(spec).parent.exists():
            raise FileNotFoundError(spec)
        groups.append(found)
    instances = instances_from_buckets(*groups, args.lam)
    log.info("%d bucket triples to search", len(instances))
    out_path = Path(args.out)
    mode = "a" if args.append else "w"
    with open(out_path, mode) as out:

        def emit(sol):
            out.write(format_record(quadruple_record(sol.quadruple, args.lam)) + "\n")
            out.flush()

        runner = run_deterministic if args.workers == 1 else run_parallel
        res = runner(instances, config, seed_base=args.seed_base, store_dir=args.store_path, on_solution=emit)
    st = res.stats
    print(
        f"solutions {len(res.solutions)}\ttriples {len(instances)}\twalks {st.walks}\tsteps {st.steps}"
        f"\tabandoned {st.abandoned}\tcollisions {st.collisions}\telapsed {res.elapsed:.1f}s\tstop {res.stopped_by}"
    )
    for sol in res.solutions:
        H = gparray.assemble_quadruple(sol.quadruple)
        ok = gparray.verify_hadamard(H) and gparray.verify_symmetric(H)
        print(f"solution {sol.indices} in triple {sol.triple}: GP order {H.shape[0]} {'symmetric Hadamard' if ok else 'NOT Hadamard'}")
    if res.rejected:
        for msg in res.rejected:
            print(f"rejected: {msg}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK if res.solutions else EXIT_NONE


def _print_checks(checks) -> int:
    sys.stdout.write(to_tsv(checks))
    passed = sum(c.passed for c in checks)
    print(f"{passed}/{len(checks)} PASS", file=sys.stderr)
    return EXIT_OK if passed == len(checks) else EXIT_DATA


def cmd_check_fixtures(args) -> int:
    records = []
    for name in FIXTURE_FILES:
        path = Path(args.fixtures_dir) / name if args.fixtures_dir else fixture_path(name)
        records.extend(read_fixture_file(path))
    checks = check_records(records, keep_matrix=args.report_dir is not None)
    if args.report_dir is not None:
        for p in write_report(checks, args.report_dir, figures=not args.no_figures):
            log.info("wrote %s", p)
    return _print_checks(checks)


def cmd_verify(args) -> int:
    if args.matrix:
        H = gparray.parse_matrix_text(Path(args.matrix).read_text())
        had, sym = gparray.verify_hadamard(H), gparray.verify_symmetric(H)
        print(f"order\t{H.shape[0]}\nhadamard\t{'yes' if had else 'no'}\nsymmetric\t{'yes' if sym else 'no'}")
        return EXIT_OK if had and sym else EXIT_DATA
    if not args.records:
        raise UsageError("verify needs a record file or --matrix")
    return _print_checks(check_records(_load_records(args.records, args.index)))


def _matrix_from_args(args):
    if getattr(args, "matrix", None):
        return gparray.parse_matrix_text(Path(args.matrix).read_text())
    if not args.records:
        raise UsageError("need a record file or --matrix")
    from .sds import canonicalize

    rec = _load_records(args.records, args.index or 1)[0]
    return gparray.assemble_quadruple(canonicalize(rec))


def cmd_assemble(args) -> int:
    H = _matrix_from_args(args)
    text = gparray.format_matrix_text(H)
    if args.out:
        Path(args.out).write_text(text)
        print(f"{args.out}\torder {H.shape[0]}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_render(args) -> int:
    if args.scale < 1:
        raise UsageError("--scale must be a positive integer")
    H = _matrix_from_args(args)
    gparray.render_image(H, args.out, scale=args.scale)
    print(f"{args.out}\t{H.shape[0]}x{H.shape[0]} (scale {args.scale})")
    if args.figure:
        from .plotting import plot_matrix

        plot_matrix(H, args.figure)
        print(f"{args.figure}\tfigure")
    return EXIT_OK


def cmd_paley(args) -> int:
    try:
        X = quadratic_residues(args.p)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.p % 4 != 3:
        log.warning("p = %d is not 3 mod 4; the residues are not a difference set", args.p)
    print(X)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="propus", description="Propus SDS search and symmetric Hadamard verification")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="enumerate PSD-filtered candidate blocks")
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--psd-bound", type=_positive_float, default=math.inf)
    p.add_argument("--out-prefix", default="candidates")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("bucket", help="split a PAF file by its leading value")
    p.add_argument("--paf", required=True)
    p.add_argument("--subsets")
    p.add_argument("--source", choices=["A", "D", "B"], default="A")
    p.add_argument("--out-prefix")
    p.set_defaults(func=cmd_bucket)

    p = sub.add_parser("search", help="collision search over lambda-compatible bucket triples")
    p.add_argument("--lambda", dest="lam", type=int, required=True)
    p.add_argument("--dp-bits", type=int, default=4)
    p.add_argument("--max-walk-len", type=int)
    p.add_argument("--walks-per-version", type=int, default=1 << 14, help="0 keeps one walk function forever")
    p.add_argument("--walks-per-task", type=int, default=256)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--time-limit", type=_positive_float)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--max-solutions", type=int, default=1)
    p.add_argument("--bucket-a", required=True)
    p.add_argument("--bucket-d", required=True)
    p.add_argument("--bucket-b", required=True)
    p.add_argument("--store-path")
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--out", default="solutions.txt")
    p.add_argument("--append", action="store_true")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify", help="verify records (SDS + GP Hadamard) or a matrix file")
    p.add_argument("records", nargs="?")
    p.add_argument("--index", type=int)
    p.add_argument("--matrix")
    p.set_defaults(func=cmd_verify)

    for name, func, help_ in (
        ("assemble", cmd_assemble, "write the GP matrix of a record as +/- text"),
        ("render", cmd_render, "render a matrix as a PPM image"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("records", nargs="?")
        p.add_argument("--index", type=int)
        p.add_argument("--matrix")
        if name == "render":
            p.add_argument("--out", required=True)
            p.add_argument("--scale", type=int, default=1)
            p.add_argument("--figure", help="also save a matplotlib picture here")
        else:
            p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("check-fixtures", help="verify all bundled solution records")
    p.add_argument("--fixtures-dir")
    p.add_argument("--report-dir", help="write fixtures.tsv and figures here")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_check_fixtures)

    p = sub.add_parser("paley", help="quadratic residues mod p")
    p.add_argument("--p", type=int, required=True)
    p.set_defaults(func=cmd_paley)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, FixtureError, BucketCorruption, ReplayDivergence, SolutionRejected) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
