"""Circulant algebra, GP-array assembly and exact Hadamard verification.

All verification is integer arithmetic on dense int64 arrays; orders stay
below 200 so nothing needs to be clever here.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .sds import PropusQuadruple
from .seqcore import subset_to_pm_sequence

WHITE = (255, 255, 255)
RED = (255, 0, 0)


def circulant(first_row) -> np.ndarray:
    """entry(i, j) = first_row[(j - i) mod v]."""
    row = np.asarray(first_row, dtype=np.int64)
    v = len(row)
    idx = (np.arange(v)[None, :] - np.arange(v)[:, None]) % v
    return row[idx]


def back_identity(v: int) -> np.ndarray:
    if v < 1:
        raise ValueError("order must be positive")
    return np.eye(v, dtype=np.int64)[::-1].copy()


def is_circulant(M) -> bool:
    M = np.asarray(M)
    return M.ndim == 2 and M.shape[0] == M.shape[1] and np.array_equal(M, circulant(M[0]))


def assemble_gp(A, B, C, D) -> np.ndarray:
    """The 4v x 4v GP array::

        A     BR     CR     DR
        CR    D'R    -A     -B'R
        BR    -A     -D'R   C'R
        DR    -C'R   B'R    -A

    where ' is transposition and R the back identity.
    """
    mats = [np.asarray(M, dtype=np.int64) for M in (A, B, C, D)]
    v = mats[0].shape[0]
    for M in mats:
        if M.shape != (v, v):
            raise ValueError(f"all blocks must be {v}x{v}, got {M.shape}")
    A, B, C, D = mats
    R = back_identity(v)
    return np.block(
        [
            [A, B @ R, C @ R, D @ R],
            [C @ R, D.T @ R, -A, -B.T @ R],
            [B @ R, -A, -D.T @ R, C.T @ R],
            [D @ R, -C.T @ R, B.T @ R, -A],
        ]
    )


def quadruple_circulants(q: PropusQuadruple) -> tuple[np.ndarray, ...]:
    return tuple(circulant(subset_to_pm_sequence(X)) for X in q.blocks)


def assemble_quadruple(q: PropusQuadruple) -> np.ndarray:
    return assemble_gp(*quadruple_circulants(q))


def _require_pm(H):
    H = np.asarray(H, dtype=np.int64)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    if not np.all((H == 1) | (H == -1)):
        raise ValueError("matrix entries must be +1 or -1")
    return H


def hadamard_defect(H) -> np.ndarray:
    """H H^T - n I; zero exactly when H is Hadamard."""
    H = _require_pm(H)
    n = H.shape[0]
    return H @ H.T - n * np.eye(n, dtype=np.int64)


def verify_hadamard(H) -> bool:
    return not np.any(hadamard_defect(H))


def verify_symmetric(H) -> bool:
    H = np.asarray(H)
    return H.shape[0] == H.shape[1] and np.array_equal(H, H.T)


def ppm_bytes(H, scale: int = 1) -> bytes:
    H = _require_pm(H)
    if scale < 1:
        raise ValueError("scale must be a positive integer")
    if scale > 1:
        H = np.kron(H, np.ones((scale, scale), dtype=np.int64))
    rgb = np.empty(H.shape + (3,), dtype=np.uint8)
    rgb[H == 1] = WHITE
    rgb[H == -1] = RED
    rows, cols = H.shape
    return f"P6\n{cols} {rows}\n255\n".encode("ascii") + rgb.tobytes()


def render_image(H, path, scale: int = 1) -> Path:
    """Write H as a binary PPM: +1 white, -1 red, one pixel per entry (times ``scale``)."""
    path = Path(path)
    path.write_bytes(ppm_bytes(H, scale))
    return path


def read_ppm(path) -> np.ndarray:
    """Read a P6 file as written by :func:`render_image` into an (h, w, 3) uint8 array."""
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6" or int(parts[3]) != 255:
        raise ValueError(f"{path}: not an 8-bit P6 pixmap")
    w, h = int(parts[1]), int(parts[2])
    raw = parts[4]
    if len(raw) != w * h * 3:
        raise ValueError(f"{path}: truncated pixel data")
    return np.frombuffer(raw, dtype=np.uint8).reshape(h, w, 3)


def format_matrix_text(H) -> str:
    """Order on the first line, then one row per line of ``+``/``-`` glyphs."""
    H = _require_pm(H)
    lines = [str(H.shape[0])]
    lines += ["".join("+" if x == 1 else "-" for x in row) for row in H]
    return "\n".join(lines) + "\n"


def parse_matrix_text(text: str) -> np.ndarray:
    lines = text.split()
    n = int(lines[0])
    rows = lines[1:]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"matrix text does not describe an order-{n} matrix")
    table = {"+": 1, "-": -1}
    try:
        return np.array([[table[c] for c in r] for r in rows], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"unexpected glyph {exc.args[0]!r}") from None
