"""Matrix and image files.

Matrices are stored as headerless CSV (floats in shortest round-trip form)
or as a little-endian binary blob: ``b"CORU"``, rows and cols as ``<u8``,
then ``rows * cols`` ``<f8`` values row-major. Images are PGM (P2 or P5,
maxval up to 255); pixels read as floats on the ``[0, 255]`` scale and are
written as P5 after clamping and half-to-even rounding.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .matcore import ShapeError, as_matrix

__all__ = [
    "MAGIC",
    "matrix_format",
    "read_matrix",
    "write_matrix",
    "read_pgm",
    "write_pgm",
    "read_pgm_stack",
    "expand_stack",
]

MAGIC = b"CORU"
_HEADER = struct.Struct("<4sQQ")


def matrix_format(path: str) -> str:
    """``"bin"`` for ``.bin`` paths, ``"csv"`` otherwise."""
    return "bin" if str(path).lower().endswith(".bin") else "csv"


def write_matrix(path: str, a, fmt: str | None = None) -> None:
    a = as_matrix(a)
    fmt = fmt or matrix_format(path)
    if fmt == "bin":
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, a.shape[0], a.shape[1]))
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())
    elif fmt == "csv":
        # repr of a Python float is the shortest string that round-trips
        lines = [",".join(repr(float(x)) for x in row) for row in a]
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")


def read_matrix(path: str, fmt: str | None = None) -> np.ndarray:
    """Read a matrix file.

    Raises:
        ShapeError: malformed header, truncated payload or ragged CSV rows.
        OSError: the file cannot be opened.
    """
    fmt = fmt or matrix_format(path)
    if fmt == "bin":
        with open(path, "rb") as fh:
            blob = fh.read()
        if len(blob) < _HEADER.size:
            raise ShapeError(f"{path}: truncated header")
        magic, rows, cols = _HEADER.unpack_from(blob)
        if magic != MAGIC:
            raise ShapeError(f"{path}: bad magic {magic!r}")
        payload = blob[_HEADER.size:]
        if len(payload) != 8 * rows * cols:
            raise ShapeError(f"{path}: expected {rows * cols} values, found {len(payload) // 8}")
        return np.frombuffer(payload, dtype="<f8").reshape(rows, cols).astype(np.float64)
    if fmt != "csv":
        raise ValueError(f"unknown matrix format {fmt!r}")
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                try:
                    rows.append([float(x) for x in line.split(",")])
                except ValueError as exc:
                    raise ShapeError(f"{path}: {exc}") from None
    if not rows:
        raise ShapeError(f"{path}: empty matrix")
    if len({len(r) for r in rows}) != 1:
        raise ShapeError(f"{path}: rows have differing column counts")
    return np.array(rows, dtype=np.float64)


def _pgm_tokens(data: bytes, count: int):
    """First ``count`` header tokens and the offset just past the last one."""
    tokens = []
    pos = 0
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise ShapeError("truncated PGM header")
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def read_pgm(path: str) -> np.ndarray:
    """Pixel matrix of a P2/P5 graymap, scaled so maxval maps to 255."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, pos = _pgm_tokens(data, 4)
    kind = tokens[0]
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ShapeError(f"{path}: bad PGM header") from None
    if kind not in (b"P2", b"P5") or width < 1 or height < 1 or not 1 <= maxval <= 255:
        raise ShapeError(f"{path}: unsupported PGM (type {kind!r}, maxval {maxval})")
    if kind == b"P5":
        raw = data[pos + 1:pos + 1 + width * height]
        if len(raw) != width * height:
            raise ShapeError(f"{path}: truncated pixel data")
        pix = np.frombuffer(raw, dtype=np.uint8).astype(np.float64)
    else:
        values = data[pos:].split()
        if len(values) < width * height:
            raise ShapeError(f"{path}: truncated pixel data")
        pix = np.array([int(v) for v in values[:width * height]], dtype=np.float64)
    if pix.max(initial=0) > maxval:
        raise ShapeError(f"{path}: pixel exceeds maxval {maxval}")
    pix = pix.reshape(height, width)
    return pix if maxval == 255 else pix * (255.0 / maxval)


def write_pgm(path: str, a) -> None:
    """Write a P5 graymap; values are clamped to [0, 255] and rounded half-to-even."""
    a = as_matrix(a)
    pix = np.rint(np.clip(a, 0.0, 255.0)).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (a.shape[1], a.shape[0]))
        fh.write(pix.tobytes())


def read_pgm_stack(paths) -> np.ndarray:
    """Stack equally sized frames as columns (one vectorized frame per column)."""
    frames = [read_pgm(p) for p in paths]
    if not frames:
        raise ShapeError("empty frame list")
    if len({f.shape for f in frames}) != 1:
        raise ShapeError("frames differ in size")
    return np.column_stack([f.reshape(-1) for f in frames])


def expand_stack(spec: str) -> list[str]:
    """Frame list from a directory (sorted ``*.pgm``) or a comma list."""
    if os.path.isdir(spec):
        names = sorted(n for n in os.listdir(spec) if n.lower().endswith(".pgm"))
        return [os.path.join(spec, n) for n in names]
    return [p for p in spec.split(",") if p]
