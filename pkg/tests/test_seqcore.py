import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from propus.seqcore import (
    PM,
    ResidueSubset,
    is_symmetric_subset,
    paf_indicator,
    paf_pm,
    paf_pm_full,
    paf_vector,
    pm_sequence_to_subset,
    psd,
    psd_rows,
    quadratic_residues,
    subset_to_pm_sequence,
)

A23 = ResidueSubset(23, (0, 2, 3, 6, 10, 13, 17, 20, 21))
A29 = ResidueSubset(29, (0, 4, 5, 6, 7, 9, 13, 16, 20, 22, 23, 24, 25))
QR43 = (1, 4, 6, 9, 10, 11, 13, 14, 15, 16, 17, 21, 23, 24, 25, 31, 35, 36, 38, 40, 41)


def brute_paf(X, s):
    """Count ordered pairs (x, y) of X with y - x = s (mod v)."""
    return sum(1 for x in X for y in X if (y - x) % X.v == s)


@st.composite
def subsets(draw, odd_only=True):
    v = draw(st.integers(1, 21).map(lambda t: 2 * t + 1))
    elems = draw(st.sets(st.integers(0, v - 1), max_size=v))
    return ResidueSubset.of(v, elems)


def test_subset_rejects_unsorted_and_out_of_range():
    with pytest.raises(ValueError):
        ResidueSubset(5, (2, 1))
    with pytest.raises(ValueError):
        ResidueSubset(5, (0, 5))
    with pytest.raises(ValueError):
        ResidueSubset.of(5, [1, 1])


def test_pm_sequence_examples():
    assert subset_to_pm_sequence(ResidueSubset(5, ())).tolist() == [1, 1, 1, 1, 1]
    assert subset_to_pm_sequence(ResidueSubset(5, (1, 4))).tolist() == [1, -1, 1, 1, -1]
    x = subset_to_pm_sequence(A23)
    assert np.flatnonzero(x == -1).tolist() == list(A23.elements)
    assert len(x) == 23


@given(subsets())
def test_round_trip(X):
    assert pm_sequence_to_subset(subset_to_pm_sequence(X)) == X


@pytest.mark.parametrize(
    "X, expected",
    [
        (A23, True),
        (ResidueSubset(5, (0, 1)), False),
        (A29, True),
        (ResidueSubset(29, (0, 1, 28)), True),
    ],
)
def test_is_symmetric(X, expected):
    negated = {(-e) % X.v for e in X.elements}
    assert (negated == set(X.elements)) is expected
    assert is_symmetric_subset(X) is expected


def test_paf_indicator_examples():
    assert paf_indicator(ResidueSubset(7, (0, 1, 2)), 1) == 2
    for s in range(1, 5):
        assert paf_indicator(ResidueSubset(5, (0,)), s) == 0
    # frozen from the pair-counting oracle
    assert [paf_indicator(A23, s) for s in range(1, 12)] == [2, 2, 5, 5, 2, 3, 4, 4, 2, 4, 3]
    assert [brute_paf(A23, s) for s in range(1, 12)] == [2, 2, 5, 5, 2, 3, 4, 4, 2, 4, 3]


def test_paf_rejects_zero_shift():
    with pytest.raises(ValueError):
        paf_indicator(A23, 0)
    with pytest.raises(ValueError):
        paf_pm(subset_to_pm_sequence(A23), 23)


def test_paf_pm_examples():
    assert all(paf_pm(np.ones(7, dtype=int), s) == 7 for s in range(1, 7))
    x = subset_to_pm_sequence(ResidueSubset(7, (0, 1, 2)))
    assert paf_pm(x, 1) == sum(int(x[j]) * int(x[(j + 1) % 7]) for j in range(7)) == 3
    assert all(paf_pm(subset_to_pm_sequence(ResidueSubset(5, (0,))), s) == 1 for s in range(1, 5))


def test_paf_vector_examples():
    assert paf_vector(ResidueSubset(5, ())) == (0, 0)
    assert paf_vector(ResidueSubset(7, (0, 1, 2))) == (2, 1, 0)
    assert paf_vector(ResidueSubset(7, (0, 1, 2)), PM) == (3, -1, -5)
    with pytest.raises(ValueError):
        paf_vector(A23, "fourier")


@given(subsets())
def test_fold_symmetry(X):
    x = subset_to_pm_sequence(X)
    for s in range(1, X.v):
        assert paf_indicator(X, s) == paf_indicator(X, X.v - s) == brute_paf(X, s)
        assert paf_pm(x, s) == paf_pm(x, X.v - s)


@given(subsets())
def test_bridge_identity(X):
    x = subset_to_pm_sequence(X)
    for s in range(1, X.v):
        assert paf_pm(x, s) == X.v - 4 * (X.k - paf_indicator(X, s))


@given(subsets())
def test_pm_paf_congruent_to_v_mod_4(X):
    for val in paf_vector(X, PM):
        assert (val - X.v) % 4 == 0 and -X.v <= val <= X.v


def test_psd_examples():
    ones = np.ones(5, dtype=int)
    assert psd(ones, 0) == pytest.approx(25)
    for s in range(1, 5):
        assert psd(ones, s) == pytest.approx(0, abs=1e-12)


@settings(max_examples=60)
@given(subsets())
def test_spectral_identity_and_parseval(X):
    x = subset_to_pm_sequence(X)
    v = X.v
    paf = paf_pm_full(x)
    assert paf[0] == v
    omega = cmath.exp(2j * math.pi / v)
    total = 0.0
    for s in range(v):
        via_paf = sum(int(paf[k]) * omega ** ((k * s) % v) for k in range(v))
        p = psd(x, s)
        assert abs(p - via_paf) <= 1e-9 * v
        total += p
    assert abs(total - v * v) <= 1e-6
    assert np.allclose(psd_rows(x[None, :])[0], [psd(x, s) for s in range(v)], atol=1e-9)


@given(subsets())
def test_symmetric_parity(X):
    sym = ResidueSubset.of(X.v, set(X.elements) | {(-e) % X.v for e in X.elements})
    assert is_symmetric_subset(sym)
    assert len(set(sym.elements) - {0}) % 2 == 0


def test_quadratic_residues():
    assert quadratic_residues(7).elements == (1, 2, 4)
    Q = quadratic_residues(43)
    assert Q.elements == QR43
    assert Q.k == 21
    diffs = {}
    for a in Q:
        for b in Q:
            if a != b:
                diffs[(a - b) % 43] = diffs.get((a - b) % 43, 0) + 1
    assert sorted(diffs) == list(range(1, 43))
    assert set(diffs.values()) == {10}
    assert set(paf_vector(Q)) == {10}


@pytest.mark.parametrize("p", [1, 9, 15, 2, 21])
def test_quadratic_residues_rejects_non_primes(p):
    with pytest.raises(ValueError):
        quadratic_residues(p)


def test_translate_negate():
    X = ResidueSubset(7, (0, 1, 3))
    assert X.translate(1).elements == (1, 2, 4)
    assert X.negate().elements == (0, 4, 6)
    assert paf_vector(X.translate(5)) == paf_vector(X) == paf_vector(X.negate())
