from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from propus.gparray import (
    assemble_gp,
    assemble_quadruple,
    back_identity,
    circulant,
    format_matrix_text,
    hadamard_defect,
    is_circulant,
    parse_matrix_text,
    ppm_bytes,
    read_ppm,
    render_image,
    verify_hadamard,
    verify_symmetric,
)
from propus.sds import PropusQuadruple
from propus.seqcore import subset_to_pm_sequence

DATA = Path(__file__).parent / "data"

ORDER4 = np.array([[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, -1, 1], [1, -1, 1, -1]])


def order4():
    one = np.array([[1]])
    return assemble_gp(one, one, one, one)


def test_circulant_examples():
    assert circulant([1]).tolist() == [[1]]
    assert circulant([1, -1, 1]).tolist() == [[1, -1, 1], [1, 1, -1], [-1, 1, 1]]
    M = circulant(np.arange(5))
    assert is_circulant(M)
    assert all(M[i, j] == (j - i) % 5 for i in range(5) for j in range(5))


def test_circulant_of_symmetric_block_is_symmetric(quadruples):
    C = circulant(subset_to_pm_sequence(quadruples[0].A))
    assert np.array_equal(C, C.T)


def test_back_identity():
    assert back_identity(1).tolist() == [[1]]
    assert back_identity(2).tolist() == [[0, 1], [1, 0]]
    R = back_identity(3)
    assert np.array_equal(R @ R, np.eye(3, dtype=int))
    assert np.array_equal(R, R.T)


@given(st.integers(0, 20).flatmap(lambda t: st.lists(st.sampled_from([1, -1]), min_size=2 * t + 1, max_size=2 * t + 1)))
def test_xr_is_symmetric(row):
    X = circulant(row)
    R = back_identity(len(row))
    assert np.array_equal(X.T, R @ X @ R)
    XR = X @ R
    assert np.array_equal(XR, XR.T)


def test_order4_example():
    H = order4()
    assert H.tolist() == ORDER4.tolist()
    assert verify_hadamard(H) and verify_symmetric(H)


def test_verify_negative_cases():
    assert not verify_hadamard(np.ones((2, 2), dtype=int))
    C = circulant([1, -1, 1, 1, 1])
    assert not verify_symmetric(C)
    with pytest.raises(ValueError):
        verify_hadamard(np.zeros((2, 2)))


def test_assemble_rejects_mismatched_orders():
    with pytest.raises(ValueError):
        assemble_gp(np.eye(3), np.eye(3), np.eye(2), np.eye(3))


def test_fixture_orders_and_hadamard(quadruples):
    orders = [assemble_quadruple(q).shape[0] for q in quadruples]
    assert orders == [92] * 4 + [116] * 15 + [172]
    for q in quadruples:
        H = assemble_quadruple(q)
        assert not np.any(hadamard_defect(H))
        assert verify_symmetric(H)


def test_breaking_b_equals_c_breaks_symmetry(quadruples):
    for q in (quadruples[0], quadruples[4], quadruples[-1]):
        C = q.B.translate(1)
        assert C != q.B
        H = assemble_quadruple(PropusQuadruple(q.v, q.A, q.B, C, q.D))
        assert not verify_symmetric(H)


def test_golden_ppm_and_pixel_counts(tmp_path):
    out = render_image(order4(), tmp_path / "o4.ppm")
    golden = (DATA / "gp_order4.ppm").read_bytes()
    assert out.read_bytes() == golden
    img = read_ppm(out)
    assert img.shape == (4, 4, 3)
    red = np.all(img == (255, 0, 0), axis=2).sum()
    white = np.all(img == (255, 255, 255), axis=2).sum()
    assert (white, red) == (10, 6)


def test_ppm_scale():
    data = ppm_bytes(order4(), scale=3)
    assert data.startswith(b"P6\n12 12\n255\n")
    assert len(data) == len(b"P6\n12 12\n255\n") + 12 * 12 * 3


def test_rendered_symmetric_images_equal_transpose(quadruples, tmp_path):
    for n, q in enumerate(quadruples):
        img = read_ppm(render_image(assemble_quadruple(q), tmp_path / f"h{n}.ppm"))
        assert np.array_equal(img, img.transpose(1, 0, 2))


def test_matrix_text_round_trip(quadruples):
    H = assemble_quadruple(quadruples[0])
    text = format_matrix_text(H)
    assert text.splitlines()[0] == "92"
    assert set("".join(text.splitlines()[1:])) <= {"+", "-"}
    assert np.array_equal(parse_matrix_text(text), H)
    assert parse_matrix_text((DATA / "gp_order4.txt").read_text()).tolist() == ORDER4.tolist()
    with pytest.raises(ValueError):
        parse_matrix_text("3\n+++\n++\n+++\n")
