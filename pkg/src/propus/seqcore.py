"""Residue subsets of Z_v, their +/-1 sequences, autocorrelation and spectra.

A block X of an SDS is stored as a :class:`ResidueSubset`. Its binary
sequence has -1 exactly at the positions in X and +1 elsewhere. Two
autocorrelation forms are supported:

* indicator form, ``|X & (X + s)|``, which is what the matching files hold;
* +/-1 form, ``sum_j x_j * x_{j+s}``.

They are linked by ``paf_pm = v - 4 * (k - paf_indicator)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

INDICATOR = "indicator"
PM = "pm"


@dataclass(frozen=True)
class ResidueSubset:
    """Sorted distinct residues modulo ``v``."""

    v: int
    elements: tuple[int, ...]

    def __post_init__(self):
        if self.v < 1:
            raise ValueError(f"modulus must be positive, got {self.v}")
        prev = -1
        for e in self.elements:
            if not isinstance(e, (int, np.integer)):
                raise TypeError(f"residues must be integers, got {e!r}")
            if e <= prev or e >= self.v:
                raise ValueError(
                    f"elements must be strictly increasing in [0, {self.v - 1}]: {self.elements}"
                )
            prev = e
        object.__setattr__(self, "elements", tuple(int(e) for e in self.elements))

    @classmethod
    def of(cls, v: int, elements: Iterable[int]) -> ResidueSubset:
        """Build from any iterable of residues already in ``[0, v)``; sorts and rejects duplicates."""
        elems = sorted(int(e) for e in elements)
        if len(set(elems)) != len(elems):
            raise ValueError(f"duplicate residues in {elems}")
        return cls(v, tuple(elems))

    @property
    def k(self) -> int:
        return len(self.elements)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, item):
        return item in set(self.elements)

    def translate(self, c: int) -> ResidueSubset:
        return ResidueSubset.of(self.v, ((e + c) % self.v for e in self.elements))

    def negate(self) -> ResidueSubset:
        return ResidueSubset.of(self.v, ((-e) % self.v for e in self.elements))

    def __str__(self):
        return " ".join(map(str, self.elements))


def subset_to_pm_sequence(X: ResidueSubset) -> np.ndarray:
    x = np.ones(X.v, dtype=np.int64)
    x[list(X.elements)] = -1
    return x


def pm_sequence_to_subset(x) -> ResidueSubset:
    x = np.asarray(x)
    if not np.all((x == 1) | (x == -1)):
        raise ValueError("sequence entries must be +1 or -1")
    return ResidueSubset(len(x), tuple(int(j) for j in np.flatnonzero(x == -1)))


def is_symmetric_subset(X: ResidueSubset) -> bool:
    s = set(X.elements)
    return all((-e) % X.v in s for e in s)


def _check_shift(v: int, s: int):
    if not 1 <= s <= v - 1:
        raise ValueError(f"shift must be in 1..{v - 1}, got {s}")


def paf_indicator(X: ResidueSubset, s: int) -> int:
    _check_shift(X.v, s)
    members = set(X.elements)
    return sum(1 for e in members if (e + s) % X.v in members)


def paf_pm(x, s: int) -> int:
    x = np.asarray(x, dtype=np.int64)
    _check_shift(len(x), s)
    return int(np.dot(x, np.roll(x, -s)))


def paf_pm_full(x) -> np.ndarray:
    """Unfolded +/-1 autocorrelation over shifts 0..v-1 (index 0 equals v)."""
    x = np.asarray(x, dtype=np.int64)
    return np.array([int(np.dot(x, np.roll(x, -s))) for s in range(len(x))])


def paf_vector(X: ResidueSubset, form: str = INDICATOR) -> tuple[int, ...]:
    """Folded autocorrelation profile at shifts ``1..(v-1)//2``."""
    n = (X.v - 1) // 2
    if form == INDICATOR:
        return tuple(paf_indicator(X, s) for s in range(1, n + 1))
    if form == PM:
        x = subset_to_pm_sequence(X)
        return tuple(paf_pm(x, s) for s in range(1, n + 1))
    raise ValueError(f"unknown PAF form {form!r}")


def paf_indicator_rows(indicator: np.ndarray) -> np.ndarray:
    """Folded indicator PAFs for a batch of 0/1 rows of shape (m, v)."""
    ind = np.asarray(indicator, dtype=np.int16)
    v = ind.shape[1]
    n = (v - 1) // 2
    out = np.empty((ind.shape[0], n), dtype=np.int16)
    for s in range(1, n + 1):
        out[:, s - 1] = (ind * np.roll(ind, -s, axis=1)).sum(axis=1)
    return out


def psd(x, s: int) -> float:
    """Squared modulus of the DFT of ``x`` at frequency ``s``, with omega = exp(2*pi*i/v)."""
    x = np.asarray(x)
    v = len(x)
    acc = 0j
    for j, xj in enumerate(x):
        acc += int(xj) * cmath.exp(2j * math.pi * ((j * s) % v) / v)
    return abs(acc) ** 2


def dft_matrix(v: int) -> np.ndarray:
    j = np.arange(v)
    return np.exp(2j * np.pi * (np.outer(j, j) % v) / v)


def psd_rows(pm_rows: np.ndarray, omega: np.ndarray | None = None) -> np.ndarray:
    """PSD at every frequency 0..v-1 for a batch of +/-1 rows. Direct summation, no FFT."""
    pm_rows = np.atleast_2d(pm_rows)
    if omega is None:
        omega = dft_matrix(pm_rows.shape[1])
    return np.abs(pm_rows @ omega) ** 2


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, math.isqrt(p) + 1))


def quadratic_residues(p: int) -> ResidueSubset:
    """Nonzero squares mod ``p``. For p = 3 (mod 4) this is the Paley difference set."""
    if p % 2 == 0 or not is_prime(p):
        raise ValueError(f"{p} is not an odd prime")
    return ResidueSubset.of(p, {(j * j) % p for j in range(1, p)})
