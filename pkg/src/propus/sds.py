"""Supplementary difference sets: parameters, verification, propus roles, fixtures.

Blocks are kept internally in the GP-array role order (A, B, C, D). The
bundled solutions come in three listing orders, so every fixture record
carries an explicit ordering tag and :func:`canonicalize` maps it to roles.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from .formats import FormatError, parse_header
from .seqcore import ResidueSubset, is_symmetric_subset, paf_indicator, quadratic_residues

BCAD = "BCAD"
ADBC = "ADBC"
DA_PALEY = "DA_PALEY"
TAGS = (BCAD, ADBC, DA_PALEY)

FIXTURE_FILES = ("sds_v23.txt", "sds_v29.txt", "sds_v43.txt")


class CardinalityError(ValueError):
    """Block sizes do not match the SDS parameters."""


class FixtureError(ValueError):
    """A solution record is inconsistent with its ordering tag."""


@dataclass(frozen=True)
class SdsParams:
    v: int
    k: tuple[int, ...]
    lam: int

    def __str__(self):
        return f"({self.v};{','.join(map(str, self.k))};{self.lam})"


@dataclass(frozen=True)
class ParamsCheck:
    counting: bool
    feasibility: bool

    def __bool__(self):
        return self.counting and self.feasibility

    @property
    def failed(self) -> list[str]:
        out = []
        if not self.counting:
            out.append("counting")
        if not self.feasibility:
            out.append("feasibility")
        return out


def validate_params(p: SdsParams) -> ParamsCheck:
    """Check sum k(k-1) = lam(v-1) and sum (v-2k)^2 = 4v."""
    counting = sum(k * (k - 1) for k in p.k) == p.lam * (p.v - 1)
    feasibility = sum((p.v - 2 * k) ** 2 for k in p.k) == 4 * p.v
    return ParamsCheck(counting, feasibility)


def paf_sums(blocks: Sequence[ResidueSubset]) -> list[int]:
    v = blocks[0].v
    return [sum(paf_indicator(X, s) for X in blocks) for s in range(1, (v - 1) // 2 + 1)]


def verify_sds(blocks: Sequence[ResidueSubset], p: SdsParams) -> bool:
    if len(blocks) != len(p.k):
        raise CardinalityError(f"expected {len(p.k)} blocks, got {len(blocks)}")
    for X, k in zip(blocks, p.k):
        if X.v != p.v:
            raise CardinalityError(f"block modulus {X.v} differs from v={p.v}")
        if X.k != k:
            raise CardinalityError(f"block {X} has {X.k} elements, expected {k}")
    if p.v < 3:
        return True
    return all(total == p.lam for total in paf_sums(blocks))


@dataclass(frozen=True)
class PropusQuadruple:
    v: int
    A: ResidueSubset
    B: ResidueSubset
    C: ResidueSubset
    D: ResidueSubset

    @property
    def blocks(self) -> tuple[ResidueSubset, ...]:
        return (self.A, self.B, self.C, self.D)

    def params(self) -> SdsParams:
        k = tuple(X.k for X in self.blocks)
        return SdsParams(self.v, k, sum(k) - self.v)


def propus_check(q: PropusQuadruple) -> bool:
    return is_symmetric_subset(q.A) and q.B == q.C


@dataclass(frozen=True)
class SolutionRecord:
    tag: str
    v: int
    lam: int
    blocks: tuple[ResidueSubset, ...]


def canonicalize(r: SolutionRecord) -> PropusQuadruple:
    if r.tag == BCAD:
        if len(r.blocks) != 4:
            raise FixtureError(f"{r.tag} record needs 4 blocks, got {len(r.blocks)}")
        B, C, A, D = r.blocks
    elif r.tag == ADBC:
        if len(r.blocks) != 4:
            raise FixtureError(f"{r.tag} record needs 4 blocks, got {len(r.blocks)}")
        A, D, B, C = r.blocks
    elif r.tag == DA_PALEY:
        if len(r.blocks) != 2:
            raise FixtureError(f"{r.tag} record needs 2 blocks, got {len(r.blocks)}")
        D, A = r.blocks
        B = C = quadratic_residues(r.v)
    else:
        raise FixtureError(f"unknown ordering tag {r.tag!r}")
    if not is_symmetric_subset(A):
        raise FixtureError(f"A-block {A} is not symmetric under tag {r.tag}")
    if B != C:
        raise FixtureError(f"B and C blocks differ under tag {r.tag}")
    return PropusQuadruple(r.v, A, B, C, D)


def record_params(r: SolutionRecord) -> SdsParams:
    q = canonicalize(r)
    return SdsParams(r.v, tuple(X.k for X in q.blocks), r.lam)


def check_record(r: SolutionRecord) -> tuple[PropusQuadruple, bool]:
    """Canonicalize and verify a record; returns the quadruple and the SDS verdict."""
    q = canonicalize(r)
    p = SdsParams(r.v, tuple(X.k for X in q.blocks), r.lam)
    return q, bool(validate_params(p)) and propus_check(q) and verify_sds(q.blocks, p)


def parse_fixture_text(text: str, source="<input>") -> list[SolutionRecord]:
    records = []
    current = None
    lines = text.splitlines() + [""]
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            if current is not None:
                records.append(_finish_record(current, source))
                current = None
            continue
        if line.startswith("tag="):
            if current is not None:
                records.append(_finish_record(current, source))
            fields = parse_header(line, source, lineno)
            try:
                current = {
                    "tag": fields["tag"],
                    "v": int(fields["v"]),
                    "lam": int(fields["lambda"]),
                    "blocks": [],
                    "lineno": lineno,
                }
            except (KeyError, ValueError):
                raise FormatError(source, lineno, "record header needs tag=, v=, lambda=") from None
            continue
        if current is None:
            raise FormatError(source, lineno, "block line outside a record")
        try:
            current["blocks"].append(ResidueSubset(current["v"], tuple(int(t) for t in line.split())))
        except ValueError as exc:
            raise FormatError(source, lineno, str(exc)) from None
    return records


def _finish_record(cur, source) -> SolutionRecord:
    if cur["tag"] not in TAGS:
        raise FormatError(source, cur["lineno"], f"unknown tag {cur['tag']!r}")
    return SolutionRecord(cur["tag"], cur["v"], cur["lam"], tuple(cur["blocks"]))


def read_fixture_file(path) -> list[SolutionRecord]:
    path = Path(path)
    return parse_fixture_text(path.read_text(), source=path)


def format_record(r: SolutionRecord) -> str:
    lines = [f"tag={r.tag} v={r.v} lambda={r.lam}"]
    lines += [" ".join(map(str, X.elements)) for X in r.blocks]
    return "\n".join(lines) + "\n"


def quadruple_record(q: PropusQuadruple, lam: int | None = None) -> SolutionRecord:
    """ADBC-tagged record for a quadruple, as written by the search."""
    if lam is None:
        lam = q.params().lam
    return SolutionRecord(ADBC, q.v, lam, (q.A, q.D, q.B, q.C))


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("propus") / "data" / name))


def load_fixtures(directory=None) -> list[SolutionRecord]:
    """All bundled solutions, in listing order (v=23, v=29, v=43)."""
    records = []
    for name in FIXTURE_FILES:
        path = Path(directory) / name if directory is not None else fixture_path(name)
        records.extend(read_fixture_file(path))
    return records
