"""File formats: binary PGM (P5, maxval 255), raw byte messages, and the
``PHK1`` ciphertext container.

Container layout (little endian)::

    magic     4 bytes  b"PHK1"
    rows      u32      padded row count
    cols      u32      padded column count
    pad_rows  u8
    pad_cols  u8
    payload   rows * cols signed 64-bit entries, row-major
"""

import struct

import numpy as np

from .blockcipher import MessageMatrix, binarize, debinarize

MAGIC = b"PHK1"
_HEADER = struct.Struct("<4sIIBB")
HEADER_SIZE = _HEADER.size
_WHITESPACE = b" \t\n\r\v\f"


class FormatError(ValueError):
    """Malformed input file; ``offset`` is the byte position of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


def parse_pgm(data):
    """Parse binary PGM bytes into a MessageMatrix of pixel values."""
    data = bytes(data)
    if data[:2] != b"P5":
        raise FormatError("not a binary PGM: magic must be 'P5'", 0)
    pos = 2
    fields = []
    while len(fields) < 3:
        # whitespace and comments between header tokens
        while pos < len(data) and (data[pos] in _WHITESPACE or data[pos] == ord("#")):
            if data[pos] == ord("#"):
                nl = data.find(b"\n", pos)
                pos = len(data) if nl < 0 else nl + 1
            else:
                pos += 1
        start = pos
        while pos < len(data) and data[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise FormatError("expected a decimal header field", pos)
        fields.append((int(data[start:pos]), start))
    (width, _), (height, _), (maxval, maxval_at) = fields
    if pos >= len(data) or data[pos] not in _WHITESPACE:
        raise FormatError("header must end with a single whitespace byte", pos)
    pos += 1
    if maxval != 255:
        raise FormatError(f"maxval must be 255, got {maxval}", maxval_at)
    if width < 1 or height < 1:
        raise FormatError(f"invalid image size {width}x{height}", 2)
    need = width * height
    payload = data[pos:pos + need]
    if len(payload) < need:
        raise FormatError(
            f"truncated payload: expected {need} bytes, found {len(payload)}",
            pos + len(payload),
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return MessageMatrix.from_array(pixels)


def write_pgm(m):
    """Serialize the unpadded part of a MessageMatrix as canonical P5 bytes."""
    a = np.asarray(m.original() if isinstance(m, MessageMatrix) else m)
    if a.size and (a.min() < 0 or a.max() > 255):
        raise ValueError("pixel values must lie in [0, 255]")
    h, w = a.shape
    return b"P5\n%d %d\n255\n" % (w, h) + a.astype(np.uint8).tobytes()


def raw_to_matrix(data):
    """Raw bytes -> binary image: one byte per row, eight bit columns."""
    bits = binarize(data)
    return MessageMatrix.from_array(bits.reshape(-1, 8).astype(np.int64))


def matrix_to_raw(m):
    a = np.asarray(m.original())
    if a.size and (a.shape[1] != 8 or a.min() < 0 or a.max() > 1):
        raise ValueError("raw message matrix must be an Lx8 matrix of bits")
    return debinarize(a.ravel())


def pack_cipher(m):
    a = m.entries
    if a.dtype == object:
        raise OverflowError("ciphertext entries exceed the signed 64-bit container range")
    header = _HEADER.pack(MAGIC, m.rows, m.cols, m.pad_rows, m.pad_cols)
    return header + np.ascontiguousarray(a, dtype="<i8").tobytes()


def unpack_cipher(data):
    data = bytes(data)
    if len(data) < _HEADER.size:
        raise FormatError("truncated container header", len(data))
    magic, rows, cols, pad_rows, pad_cols = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad container magic {magic!r}", 0)
    if rows % 2 or cols % 2:
        raise FormatError("container dimensions must be even", 4)
    if pad_rows > 1 or pad_cols > 1:
        raise FormatError("padding flags must be 0 or 1", 12)
    need = rows * cols * 8
    body = data[_HEADER.size:]
    if len(body) != need:
        raise FormatError(
            f"payload size {len(body)} does not match {rows}x{cols} entries",
            _HEADER.size + min(len(body), need),
        )
    a = np.frombuffer(body, dtype="<i8").astype(np.int64).reshape(rows, cols)
    return MessageMatrix(a, pad_rows, pad_cols)
