"""Small bucket triples with exactly one planted solution.

Filler lines are drawn at random. Any filler line that would create a
second golden triple is redrawn, so the planted (i, j, k) is the unique
solution (checked by brute force over all triples).
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .candgen import symmetric_subsets
from .formats import format_row, paf_header, subset_header
from .sds import PropusQuadruple, canonicalize, load_fixtures
from .seqcore import ResidueSubset, paf_vector


@dataclass
class PlantedInstance:
    v: int
    lam: int
    subsets: tuple[list[ResidueSubset], list[ResidueSubset], list[ResidueSubset]]
    planted: tuple[int, int, int]
    quadruple: PropusQuadruple

    def rows(self, which: int) -> np.ndarray:
        return np.array([paf_vector(X) for X in self.subsets[which]], dtype=np.int16)


def golden_triples(a_rows, d_rows, b_rows, lam) -> list[tuple[int, int, int]]:
    """Brute-force every (i, j, k) with a_i + d_j + 2 b_k = lam coordinatewise."""
    a = np.asarray(a_rows, dtype=np.int64)
    d = np.asarray(d_rows, dtype=np.int64)
    b = np.asarray(b_rows, dtype=np.int64)
    out = []
    for k in range(len(b)):
        target = lam - 2 * b[k]
        hits = np.all(a[:, None, :] + d[None, :, :] == target, axis=2)
        out.extend((int(i), int(j), k) for i, j in zip(*np.nonzero(hits)))
    return sorted(out)


def build_planted(size: int = 8, seed: int = 0, record_index: int = 0) -> PlantedInstance:
    """Plant fixture solution ``record_index`` into buckets of ``size`` lines each."""
    rec = load_fixtures()[record_index]
    q = canonicalize(rec)
    for attempt in range(100):
        inst = _attempt(rec.v, rec.lam, q, size, random.Random(f"{seed}:{attempt}"))
        if inst is not None:
            return inst
    raise RuntimeError("could not build a planted instance with a unique solution")


def _attempt(v, lam, q, size, rng):
    sym_pool = [ResidueSubset(v, s) for s in symmetric_subsets(v, q.A.k) if s != q.A.elements]

    def fillers(block, count):
        out = set()
        while len(out) < count:
            X = ResidueSubset.of(v, rng.sample(range(v), block.k))
            if X != block:
                out.add(X)
        return sorted(out, key=lambda X: X.elements)

    pos = tuple(rng.randrange(size) for _ in range(3))
    a_list = rng.sample(sym_pool, size - 1)
    d_list = fillers(q.D, size - 1)
    b_list = fillers(q.B, size - 1)
    rng.shuffle(d_list)
    rng.shuffle(b_list)
    for lst, block, p in zip((a_list, d_list, b_list), (q.A, q.D, q.B), pos):
        lst.insert(p, block)
    rows = [np.array([paf_vector(X) for X in lst]) for lst in (a_list, d_list, b_list)]
    if golden_triples(*rows, lam) != [pos]:
        return None
    return PlantedInstance(v, lam, (a_list, d_list, b_list), pos, q)


def write_planted(inst: PlantedInstance, directory) -> dict[str, Path]:
    """Write ``A.paf/.subsets``, ``D.*``, ``B.*`` into ``directory``; returns the PAF paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = {}
    for name, subs in zip("ADB", inst.subsets):
        k = subs[0].k
        with open(directory / f"{name}.subsets", "w") as fh:
            fh.write(subset_header(inst.v, k) + "\n")
            fh.writelines(str(X) + "\n" for X in subs)
        with open(directory / f"{name}.paf", "w") as fh:
            fh.write(paf_header(inst.v) + "\n")
            fh.writelines(format_row(paf_vector(X)) + "\n" for X in subs)
        out[name] = directory / f"{name}.paf"
    return out
