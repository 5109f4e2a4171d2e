"""Candidate block enumeration, PSD filtering, PAF files and bucketing.

Candidates come out in lexicographic order of their element lists. That
order is load-bearing: line numbers are the key space of the collision
search, so files must be byte-stable across runs.
"""
from __future__ import annotations

import itertools
import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .formats import (
    FormatError,
    format_row,
    paf_header,
    read_paf_file,
    read_subset_rows,
    subset_header,
)
from .seqcore import ResidueSubset, dft_matrix, paf_indicator_rows, psd_rows

log = logging.getLogger(__name__)

PSD_TOL = 1e-6
CHUNK = 1 << 16


@dataclass(frozen=True)
class CandidateFileSpec:
    v: int
    k: int
    symmetric: bool = False
    psd_bound: float = math.inf

    def __post_init__(self):
        if self.v < 1 or self.v % 2 == 0:
            raise ValueError(f"v must be a positive odd integer, got {self.v}")
        if not 0 <= self.k <= self.v:
            raise ValueError(f"k must lie in [0, {self.v}], got {self.k}")
        if not self.psd_bound > 0:
            raise ValueError(f"psd bound must be positive, got {self.psd_bound}")

    @property
    def feasible(self) -> bool:
        if not self.symmetric:
            return True
        return self.k // 2 <= (self.v - 1) // 2

    def unfiltered_count(self) -> int:
        if self.symmetric:
            if not self.feasible:
                return 0
            return math.comb((self.v - 1) // 2, self.k // 2)
        return math.comb(self.v, self.k)


@dataclass
class EnumerationStats:
    examined: int = 0
    accepted: int = 0

    @property
    def rejection_ratio(self) -> float:
        return 1.0 - self.accepted / self.examined if self.examined else 0.0


def symmetric_subsets(v: int, k: int) -> list[tuple[int, ...]]:
    """Every symmetric k-subset of Z_v, sorted lexicographically.

    Symmetry pairs j with v - j; odd k forces 0 in.
    """
    pairs = range(1, (v - 1) // 2 + 1)
    base = (0,) if k % 2 else ()
    out = []
    for choice in itertools.combinations(pairs, k // 2):
        out.append(tuple(sorted(base + choice + tuple(v - j for j in choice))))
    out.sort()
    return out


def _raw_batches(spec: CandidateFileSpec) -> Iterator[np.ndarray]:
    if spec.symmetric:
        if not spec.feasible:
            log.warning("no symmetric subsets of size %d exist in Z_%d", spec.k, spec.v)
            return
        subsets = symmetric_subsets(spec.v, spec.k)
        for start in range(0, len(subsets), CHUNK):
            chunk = subsets[start : start + CHUNK]
            yield np.array(chunk, dtype=np.int64).reshape(len(chunk), spec.k)
        return
    it = itertools.combinations(range(spec.v), spec.k)
    while True:
        block = list(itertools.islice(it, CHUNK))
        if not block:
            return
        yield np.array(block, dtype=np.int64).reshape(len(block), spec.k)


def _pm_rows(elements: np.ndarray, v: int) -> np.ndarray:
    pm = np.ones((elements.shape[0], v), dtype=np.float64)
    if elements.shape[1]:
        np.put_along_axis(pm, elements, -1.0, axis=1)
    return pm


def _psd_mask(elements: np.ndarray, v: int, bound: float, omega) -> np.ndarray:
    if math.isinf(bound) or v == 1:
        return np.ones(elements.shape[0], dtype=bool)
    spectra = psd_rows(_pm_rows(elements, v), omega[:, 1:])
    return spectra.max(axis=1) <= bound + PSD_TOL


def candidate_batches(spec: CandidateFileSpec, stats: EnumerationStats | None = None):
    """Yield arrays of accepted candidates (one row of elements per subset)."""
    omega = dft_matrix(spec.v)
    for elements in _raw_batches(spec):
        mask = _psd_mask(elements, spec.v, spec.psd_bound, omega)
        if stats is not None:
            stats.examined += len(elements)
            stats.accepted += int(mask.sum())
        yield elements[mask]


def enumerate_candidates(spec: CandidateFileSpec, stats: EnumerationStats | None = None):
    for batch in candidate_batches(spec, stats):
        for row in batch:
            yield ResidueSubset(spec.v, tuple(int(e) for e in row))


def psd_filter(X: ResidueSubset, bound: float) -> bool:
    """True iff max over nonzero frequencies of PSD(X) <= bound (within 1e-6)."""
    if not bound > 0:
        raise ValueError("psd bound must be positive")
    elements = np.array([X.elements], dtype=np.int64).reshape(1, X.k)
    return bool(_psd_mask(elements, X.v, bound, dft_matrix(X.v))[0])


def indicator_rows(elements: np.ndarray, v: int) -> np.ndarray:
    ind = np.zeros((elements.shape[0], v), dtype=np.int16)
    if elements.shape[1]:
        np.put_along_axis(ind, elements, 1, axis=1)
    return ind


@dataclass(frozen=True)
class EmitResult:
    subset_path: Path
    paf_path: Path
    lines: int
    examined: int

    @property
    def rejection_ratio(self) -> float:
        return 1.0 - self.lines / self.examined if self.examined else 0.0


def output_paths(prefix) -> tuple[Path, Path]:
    prefix = str(prefix)
    return Path(prefix + ".subsets"), Path(prefix + ".paf")


def emit_files(spec: CandidateFileSpec, out_prefix) -> EmitResult:
    """Write ``<prefix>.subsets`` and the line-aligned ``<prefix>.paf``."""
    subset_path, paf_path = output_paths(out_prefix)
    stats = EnumerationStats()
    with open(subset_path, "w") as fs, open(paf_path, "w") as fp:
        fs.write(subset_header(spec.v, spec.k) + "\n")
        fp.write(paf_header(spec.v) + "\n")
        for batch in candidate_batches(spec, stats):
            if not len(batch):
                continue
            pafs = paf_indicator_rows(indicator_rows(batch, spec.v))
            fs.writelines(format_row(row) + "\n" for row in batch)
            fp.writelines(format_row(row) + "\n" for row in pafs)
    return EmitResult(subset_path, paf_path, stats.accepted, stats.examined)


@dataclass(frozen=True)
class Bucket:
    source: str
    lead: int | None
    count: int
    path: Path
    subset_path: Path | None = None

    def load(self):
        """Return ``(v, element_rows, paf_rows)``; element rows are None without a subset file."""
        v, rows = read_paf_file(self.path)
        elements = None
        if self.subset_path is not None and self.subset_path.exists():
            sv, _, elements = read_subset_rows(self.subset_path)
            if sv != v or len(elements) != len(rows):
                raise FormatError(self.subset_path, 1, f"not line-aligned with {self.path}")
        return v, elements, rows


def _strip_suffix(path: Path, suffix: str) -> str:
    s = str(path)
    return s[: -len(suffix)] if s.endswith(suffix) else s


def bucket_split(paf_path, subset_path=None, source: str = "A", out_prefix=None) -> list[Bucket]:
    """Split a PAF file (and its aligned subset file) by the value at shift 1.

    Bucket files are ``<prefix>.lead<value>.paf`` / ``.subsets``; buckets come
    back sorted by lead.
    """
    paf_path = Path(paf_path)
    if subset_path is None:
        guess = Path(_strip_suffix(paf_path, ".paf") + ".subsets")
        subset_path = guess if guess.exists() else None
    prefix = str(out_prefix) if out_prefix is not None else _strip_suffix(paf_path, ".paf")
    v, rows = read_paf_file(paf_path)
    subsets = None
    if subset_path is not None:
        sv, k, subsets = read_subset_rows(subset_path)
        if sv != v or len(subsets) != len(rows):
            raise FormatError(subset_path, 1, f"not line-aligned with {paf_path}")
    if not len(rows):
        return []
    buckets = []
    for lead in np.unique(rows[:, 0]) if rows.shape[1] else []:
        idx = np.flatnonzero(rows[:, 0] == lead)
        bpaf = Path(f"{prefix}.lead{int(lead)}.paf")
        with open(bpaf, "w") as fh:
            fh.write(paf_header(v) + "\n")
            fh.writelines(format_row(rows[i]) + "\n" for i in idx)
        bsub = None
        if subsets is not None:
            bsub = Path(f"{prefix}.lead{int(lead)}.subsets")
            with open(bsub, "w") as fh:
                fh.write(subset_header(v, k) + "\n")
                fh.writelines(format_row(subsets[i]) + "\n" for i in idx)
        buckets.append(Bucket(source, int(lead), len(idx), bpaf, bsub))
    return buckets


def _count_lines(path) -> int:
    """Data lines below the header."""
    with open(path) as fh:
        return max(sum(1 for _ in fh) - 1, 0)


_LEAD_RE = re.compile(r"\.lead(\d+)\.paf$")


def discover_buckets(spec: str, source: str) -> list[Bucket]:
    """Buckets named by a prefix (``<prefix>.lead*.paf``) or a single PAF file.

    A lone PAF file is a bucket with ``lead=None``, matched against any lead.
    """
    p = Path(spec)
    if p.is_file():
        m = _LEAD_RE.search(p.name)
        lead = int(m.group(1)) if m else None
        sub = Path(_strip_suffix(p, ".paf") + ".subsets")
        return [Bucket(source, lead, _count_lines(p), p, sub if sub.exists() else None)]
    found = []
    for cand in sorted(p.parent.glob(p.name + ".lead*.paf")):
        m = _LEAD_RE.search(cand.name)
        if not m or cand.name[: -len(m.group(0))] != p.name:
            continue
        sub = Path(_strip_suffix(cand, ".paf") + ".subsets")
        found.append(Bucket(source, int(m.group(1)), _count_lines(cand), cand, sub if sub.exists() else None))
    found.sort(key=lambda b: b.lead)
    return found


def bucket_triples(buckets_a, buckets_d, buckets_b, lam: int):
    """Triples whose leads satisfy lead_A + lead_D + 2 * lead_B = lam."""
    out = []
    for a in buckets_a:
        for d in buckets_d:
            for b in buckets_b:
                if None in (a.lead, d.lead, b.lead) or a.lead + d.lead + 2 * b.lead == lam:
                    out.append((a, d, b))
    return out
