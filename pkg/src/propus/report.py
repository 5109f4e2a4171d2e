"""Per-record verification table (TSV) with optional figures."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

from .gparray import assemble_quadruple, verify_hadamard, verify_symmetric
from .sds import FixtureError, SdsParams, SolutionRecord, canonicalize, propus_check, validate_params, verify_sds

COLUMNS = ["idx", "tag", "v", "order", "params", "propus", "sds", "hadamard", "symmetric", "status", "note"]


@dataclass
class RecordCheck:
    idx: int
    record: SolutionRecord
    order: int
    params: str = ""
    propus: bool = False
    sds: bool = False
    hadamard: bool = False
    symmetric: bool = False
    note: str = ""
    matrix: object = None
    quadruple: object = None

    @property
    def passed(self) -> bool:
        return self.propus and self.sds and self.hadamard and self.symmetric

    def row(self) -> list[str]:
        yn = lambda b: "yes" if b else "no"  # noqa: E731
        return [
            str(self.idx),
            self.record.tag,
            str(self.record.v),
            str(self.order),
            self.params,
            yn(self.propus),
            yn(self.sds),
            yn(self.hadamard),
            yn(self.symmetric),
            "PASS" if self.passed else "FAIL",
            self.note,
        ]


def check_record_full(idx: int, r: SolutionRecord, keep_matrix=False) -> RecordCheck:
    """canonicalize, propus check, SDS check, GP assembly, Hadamard and symmetry."""
    out = RecordCheck(idx, r, 4 * r.v)
    try:
        q = canonicalize(r)
    except FixtureError as exc:
        out.note = str(exc)
        return out
    p = SdsParams(r.v, tuple(X.k for X in q.blocks), r.lam)
    out.params = str(p)
    out.quadruple = q
    out.propus = propus_check(q)
    pc = validate_params(p)
    out.sds = bool(pc) and verify_sds(q.blocks, p)
    if not pc:
        out.note = "parameter identities fail: " + ",".join(pc.failed)
    elif not out.sds:
        out.note = "PAF sums differ from lambda"
    H = assemble_quadruple(q)
    out.hadamard = verify_hadamard(H)
    out.symmetric = verify_symmetric(H)
    if keep_matrix:
        out.matrix = H
    return out


def check_records(records, keep_matrix=False) -> list[RecordCheck]:
    return [check_record_full(i, r, keep_matrix) for i, r in enumerate(records, start=1)]


def to_tsv(checks) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(COLUMNS)
    for c in checks:
        w.writerow(c.row())
    return buf.getvalue()


def write_report(checks, directory, figures=True) -> list[Path]:
    """``fixtures.tsv`` plus, per passing record, a matrix picture and a PAF profile."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = [directory / "fixtures.tsv"]
    written[0].write_text(to_tsv(checks))
    if not figures:
        return written
    from .plotting import plot_matrix, plot_paf_profile

    for c in checks:
        if c.quadruple is None:
            continue
        stem = f"record{c.idx:02d}_v{c.record.v}"
        if c.matrix is not None:
            written.append(plot_matrix(c.matrix, directory / f"{stem}_matrix.png", title=f"record {c.idx}: order {c.order}"))
        written.append(plot_paf_profile(c.quadruple, c.record.lam, directory / f"{stem}_paf.png"))
    return written
