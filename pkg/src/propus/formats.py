"""Line-oriented text formats for candidate subsets and PAF vectors.

Subset file::

    v=23 k=9
    0 2 3 6 10 13 17 20 21
    ...

PAF file (line-aligned with its subset file)::

    v=23 form=indicator n=11
    4 3 ...
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .seqcore import ResidueSubset


class FormatError(ValueError):
    """A malformed line in one of the text formats."""

    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


def parse_header(line: str, path="<input>", lineno=1) -> dict:
    fields = {}
    for tok in line.split():
        key, sep, value = tok.partition("=")
        if not sep or not key:
            raise FormatError(path, lineno, f"bad header token {tok!r}")
        fields[key] = value
    return fields


def _int_field(fields, key, path, lineno):
    try:
        return int(fields[key])
    except (KeyError, ValueError):
        raise FormatError(path, lineno, f"header needs integer field {key}=") from None


def subset_header(v: int, k: int) -> str:
    return f"v={v} k={k}"


def paf_header(v: int, n: int | None = None) -> str:
    if n is None:
        n = (v - 1) // 2
    return f"v={v} form=indicator n={n}"


def format_row(values) -> str:
    return " ".join(str(int(x)) for x in values)


def read_subset_file(path) -> tuple[int, int, list[ResidueSubset]]:
    path = Path(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError(path, 1, "missing header")
    fields = parse_header(lines[0], path, 1)
    v = _int_field(fields, "v", path, 1)
    k = _int_field(fields, "k", path, 1)
    subsets = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            elems = tuple(int(t) for t in line.split())
            X = ResidueSubset(v, elems)
        except ValueError as exc:
            raise FormatError(path, lineno, str(exc)) from None
        if X.k != k:
            raise FormatError(path, lineno, f"expected {k} elements, got {X.k}")
        subsets.append(X)
    return v, k, subsets


def _fast_rows(lines, width: int):
    """Parse uniform integer rows in one go; None when any line is off."""
    toks = [line.split() for line in lines]
    if any(len(t) != width for t in toks):
        return None
    try:
        flat = np.array([x for t in toks for x in t], dtype=np.int64)
    except ValueError:
        return None
    return flat.reshape(len(lines), width)


def read_subset_rows(path) -> tuple[int, int, np.ndarray]:
    """Like :func:`read_subset_file` but returns an (m, k) element array."""
    path = Path(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError(path, 1, "missing header")
    fields = parse_header(lines[0], path, 1)
    v = _int_field(fields, "v", path, 1)
    k = _int_field(fields, "k", path, 1)
    rows = _fast_rows(lines[1:], k)
    ok = rows is not None
    if ok and len(rows):
        ok = bool(rows.min() >= 0 and rows.max() < v and (k < 2 or np.all(np.diff(rows, axis=1) > 0)))
    if not ok:
        # slow path pinpoints the offending line
        _, _, subsets = read_subset_file(path)
        rows = np.array([X.elements for X in subsets], dtype=np.int64).reshape(len(subsets), k)
    return v, k, rows


def read_paf_file(path) -> tuple[int, np.ndarray]:
    """Return ``(v, rows)`` with rows an int16 array of shape (lines, n)."""
    path = Path(path)
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError(path, 1, "missing header")
    fields = parse_header(lines[0], path, 1)
    v = _int_field(fields, "v", path, 1)
    n = _int_field(fields, "n", path, 1)
    if fields.get("form", "indicator") != "indicator":
        raise FormatError(path, 1, "only form=indicator PAF files are supported")
    if n != (v - 1) // 2:
        raise FormatError(path, 1, f"n={n} does not match folded length for v={v}")
    fast = _fast_rows(lines[1:], n)
    if fast is not None and (not len(fast) or fast.min() >= 0):
        return v, fast.astype(np.int16)
    rows = np.empty((len(lines) - 1, n), dtype=np.int16)
    for lineno, line in enumerate(lines[1:], start=2):
        toks = line.split()
        if len(toks) != n:
            raise FormatError(path, lineno, f"expected {n} values, got {len(toks)}")
        try:
            rows[lineno - 2] = [int(t) for t in toks]
        except ValueError:
            raise FormatError(path, lineno, f"non-integer value in {line!r}") from None
        if rows[lineno - 2].min() < 0:
            raise FormatError(path, lineno, "indicator PAF values must be nonnegative")
    return v, rows


def write_lines(path, header: str, rows) -> int:
    count = 0
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(format_row(row) + "\n")
            count += 1
    return count
