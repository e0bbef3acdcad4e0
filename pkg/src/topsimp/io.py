"""Readers and writers for PGM images, OFF meshes and plain value files."""

import math
import re
from pathlib import Path

import numpy as np

from .errors import ParseError

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _read_bytes(src):
    if isinstance(src, (bytes, bytearray)):
        return bytes(src)
    return Path(src).read_bytes()


def _read_text(src):
    if isinstance(src, (bytes, bytearray)):
        return bytes(src).decode()
    return Path(src).read_text()


# ---------------------------------------------------------------------- PGM
def parse_pgm(src):
    """Parse an ASCII (P2) or binary (P5) PGM image.

    Returns
    -------
    (ndarray, int)
        ``(rows, cols)`` float array of pixel values and the maxval.
    """
    data = _read_bytes(src)
    pos = 0
    header = []
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise ParseError("malformed PGM header")
        header.append(m.group(1))
        pos = m.end()
    magic = header[0]
    if magic not in (b"P2", b"P5"):
        raise ParseError(f"not a PGM file (magic {magic!r})")
    try:
        cols, rows, maxval = (int(t) for t in header[1:])
    except ValueError:
        raise ParseError("malformed PGM header") from None
    if cols < 1 or rows < 1:
        raise ParseError("PGM image must be at least 1x1")
    if not 0 < maxval <= 65535:
        raise ParseError(f"PGM maxval {maxval} out of range")
    count = rows * cols
    if magic == b"P5":
        pos += 1    # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = count * dtype.itemsize
        if len(data) - pos < need:
            raise ParseError("truncated PGM body")
        vals = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    else:
        body = re.sub(rb"#[^\n]*", b"", data[pos:]).split()
        if len(body) < count:
            raise ParseError("truncated PGM body")
        try:
            vals = np.array([int(t) for t in body[:count]], dtype=np.int64)
        except ValueError:
            raise ParseError("non-integer PGM sample") from None
    if vals.min() < 0 or vals.max() > maxval:
        raise ParseError("PGM sample exceeds maxval")
    return vals.reshape(rows, cols).astype(float), maxval


def write_pgm(path, pixels, maxval=None, binary=True):
    """Write an integer image as P5 (or P2 with ``binary=False``)."""
    pixels = np.asarray(pixels)
    if maxval is None:
        maxval = max(1, int(pixels.max()))
    rows, cols = pixels.shape
    head = f"{'P5' if binary else 'P2'}\n{cols} {rows}\n{maxval}\n".encode()
    if binary:
        dtype = ">u2" if maxval > 255 else "u1"
        body = pixels.astype(dtype).tobytes()
    else:
        body = "\n".join(" ".join(str(int(v)) for v in row)
                         for row in pixels).encode() + b"\n"
    Path(path).write_bytes(head + body)


def quantize(values, maxval):
    """Map reals to ``0..maxval`` integers.

    Values already inside ``[0, maxval]`` keep scale 1 and offset 0; others
    are mapped linearly onto the range. Returns ``(ints, scale, offset,
    max_error)`` where ``value ~ offset + scale * int``.
    """
    values = np.asarray(values, dtype=float)
    lo = min(0.0, float(values.min()))
    hi = max(float(maxval), float(values.max()))
    if lo == 0.0 and hi == maxval:
        scale, offset = 1.0, 0.0
    else:
        scale, offset = (hi - lo) / maxval, lo
    q = np.clip(np.rint((values - offset) / scale), 0, maxval).astype(np.int64)
    err = float(np.abs(offset + scale * q - values).max())
    return q, scale, offset, err


# ---------------------------------------------------------------------- OFF
def parse_off(src, values=None):
    """Parse an ASCII OFF triangle mesh.

    A scalar per vertex is taken from a fourth coordinate column, or from
    ``values`` (a path or a sequence). Polygons other than triangles are
    rejected.

    Returns
    -------
    (int, ndarray, ndarray, ndarray or None)
        Vertex count, ``(t, 3)`` triangles, ``(n, 3)`` coordinates and the
        per-vertex scalars.
    """
    text = _read_text(src)
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("OFF"):
        raise ParseError("missing OFF header")
    rest = lines[0][3:].split()
    lines = lines[1:]
    if not rest:
        if not lines:
            raise ParseError("missing OFF counts")
        rest = lines[0].split()
        lines = lines[1:]
    try:
        nv, nf = int(rest[0]), int(rest[1])
    except (ValueError, IndexError):
        raise ParseError("malformed OFF counts") from None
    if len(lines) < nv + nf:
        raise ParseError("truncated OFF body")
    try:
        rows = [[float(x) for x in ln.split()] for ln in lines[:nv]]
        faces = [[int(x) for x in ln.split()] for ln in lines[nv:nv + nf]]
    except ValueError:
        raise ParseError("non-numeric OFF entry") from None
    widths = {len(r) for r in rows}
    if nv and (len(widths) != 1 or widths.pop() not in (3, 4)):
        raise ParseError("OFF vertices need 3 or 4 columns")
    coords = np.array(rows, dtype=float).reshape(nv, -1)
    scalars = coords[:, 3].copy() if coords.shape[1] == 4 else None
    tris = []
    for fc in faces:
        if not fc or fc[0] != 3 or len(fc) < 4:
            raise ParseError("only triangular OFF faces are supported")
        tris.append(fc[1:4])
    tris = np.array(tris, dtype=np.int64).reshape(-1, 3)
    if tris.size and (tris.min() < 0 or tris.max() >= nv):
        raise ParseError("OFF face index out of range")
    if values is not None:
        vals = (parse_values(values) if isinstance(values, (str, Path, bytes))
                else np.asarray(values, dtype=float).ravel())
        if vals.size != nv:
            raise ParseError(f"expected {nv} vertex values, got {vals.size}")
        scalars = vals
    return nv, tris, coords[:, :3], scalars


def parse_values(src):
    """Newline-delimited (or whitespace separated) real values."""
    text = _read_text(src)
    try:
        return np.array([float(t) for t in text.split()], dtype=float)
    except ValueError:
        raise ParseError("non-numeric value") from None


def parse_values_tsv(src):
    """Tab separated grid of reals, one image row per line."""
    text = _read_text(src)
    try:
        rows = [[float(t) for t in ln.split("\t")]
                for ln in text.splitlines() if ln.strip()]
    except ValueError:
        raise ParseError("non-numeric value") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise ParseError("values grid must be rectangular and non-empty")
    return np.array(rows, dtype=float)


def format_value(x):
    """Shortest round-tripping text for a float; ``inf`` for infinity."""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def emit_values(path, values):
    Path(path).write_text("".join(format_value(v) + "\n" for v in values))


def emit_values_tsv(path, grid):
    grid = np.atleast_2d(grid)
    Path(path).write_text("".join(
        "\t".join(format_value(v) for v in row) + "\n" for row in grid))


def emit_diagram(path, diagram):
    Path(path).write_text(diagram.to_tsv())
