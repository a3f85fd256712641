"""Hill-style 2x2 block-matrix cipher with the unimodular key [[1, 1], [k2, k2 + 1]].

Every 2x2 row-major tile P of the message matrix is encrypted as P @ Mk2 and
decrypted as C @ inv(Mk2). det(Mk2) == 1, so the inverse is an integer matrix
and the roundtrip is exact.

Integer arithmetic is int64 when the products provably fit, and Python ints
(object arrays) otherwise.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels

_I64_MAX = (1 << 63) - 1


@dataclass(frozen=True)
class CipherKeyMatrix:
    k2: int
    entries: tuple
    inverse_entries: tuple

    @property
    def determinant(self):
        (a, b), (c, d) = self.entries
        return a * d - b * c

    def as_array(self, inverse=False):
        m = self.inverse_entries if inverse else self.entries
        return np.array(m, dtype=object)


def key_matrix(k2):
    k2 = int(k2)
    if k2 < 1:
        raise ValueError(f"k2 must be a positive integer, got {k2}")
    key = CipherKeyMatrix(
        k2=k2,
        entries=((1, 1), (k2, k2 + 1)),
        inverse_entries=((k2 + 1, -1), (-k2, 1)),
    )
    if key.determinant != 1:  # holds algebraically; kept as a guard
        raise ArithmeticError("key matrix is not unimodular")
    return key


# -- bits and compression ---------------------------------------------------

def binarize(data):
    """Expand bytes to bits, most significant bit first."""
    return np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))


def debinarize(bits):
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % 8:
        raise ValueError(f"bit count {bits.size} is not a multiple of 8")
    return np.packbits(bits).tobytes()


@dataclass(frozen=True)
class CompressedBits:
    runs: tuple
    original_bit_count: int


def compress(bits):
    """Run-length encode a bit sequence into alternating (bit, length) runs."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size == 0:
        return CompressedBits((), 0)
    edges = np.flatnonzero(np.diff(bits)) + 1
    starts = np.concatenate(([0], edges))
    lengths = np.diff(np.concatenate((starts, [bits.size])))
    runs = tuple((int(bits[s]), int(n)) for s, n in zip(starts, lengths))
    return CompressedBits(runs, int(bits.size))


def decompress(c):
    if not c.runs:
        return np.zeros(0, dtype=np.uint8)
    values = np.array([b for b, _ in c.runs], dtype=np.uint8)
    lengths = np.array([n for _, n in c.runs], dtype=np.int64)
    out = np.repeat(values, lengths)
    if out.size != c.original_bit_count:
        raise ValueError("run lengths do not add up to the original bit count")
    return out


# -- message matrix and block partition ---------------------------------------

@dataclass(frozen=True, eq=False)
class MessageMatrix:
    """Integer matrix padded to even dimensions; padding entries are zero."""

    entries: np.ndarray
    pad_rows: int = 0
    pad_cols: int = 0

    @classmethod
    def from_array(cls, a):
        a = _as_int_array(a)
        if a.ndim != 2:
            raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
        pr, pc = a.shape[0] % 2, a.shape[1] % 2
        if pr or pc:
            a = np.pad(a, ((0, pr), (0, pc)))
        return cls(a, pr, pc)

    @property
    def rows(self):
        return self.entries.shape[0]

    @property
    def cols(self):
        return self.entries.shape[1]

    def original(self):
        return self.entries[: self.rows - self.pad_rows, : self.cols - self.pad_cols]

    def __eq__(self, other):
        if not isinstance(other, MessageMatrix):
            return NotImplemented
        return (self.pad_rows, self.pad_cols) == (other.pad_rows, other.pad_cols) \
            and self.entries.shape == other.entries.shape \
            and bool(np.all(self.entries == other.entries))


@dataclass(frozen=True, eq=False)
class BlockSet:
    """Row-major 2x2 tiles, shape (count, 2, 2)."""

    blocks: np.ndarray

    @property
    def count(self):
        return self.blocks.shape[0]

    def __eq__(self, other):
        if not isinstance(other, BlockSet):
            return NotImplemented
        return self.blocks.shape == other.blocks.shape \
            and bool(np.all(self.blocks == other.blocks))


class CipherBlockSet(BlockSet):
    pass


def to_block_matrix(m):
    r, c = m.rows, m.cols
    if r % 2 or c % 2:
        raise ValueError("message matrix must be padded to even dimensions")
    blocks = m.entries.reshape(r // 2, 2, c // 2, 2).swapaxes(1, 2).reshape(-1, 2, 2)
    return BlockSet(blocks.copy())


def from_block_matrix(b, rows, cols, pad_rows=0, pad_cols=0):
    """Reassemble row-major tiles into a (rows x cols) matrix; rows/cols are padded sizes."""
    if rows % 2 or cols % 2 or b.count != rows * cols // 4:
        raise ValueError(
            f"{b.count} blocks cannot fill a {rows}x{cols} matrix of 2x2 tiles"
        )
    a = b.blocks.reshape(rows // 2, cols // 2, 2, 2).swapaxes(1, 2).reshape(rows, cols)
    return MessageMatrix(a.copy(), int(pad_rows), int(pad_cols))


def encrypt_blocks(p, key):
    return CipherBlockSet(_blocks_times(p.blocks, key.entries))


def decrypt_blocks(c, key):
    return BlockSet(_blocks_times(c.blocks, key.inverse_entries))


# -- whole-matrix fast path ---------------------------------------------------

def encrypt_matrix(m, key):
    """Same result as encrypt_blocks over to_block_matrix(m), without the partition copy."""
    return MessageMatrix(_tiles_times(m.entries, key.entries), m.pad_rows, m.pad_cols)


def decrypt_matrix(c, key):
    return MessageMatrix(_tiles_times(c.entries, key.inverse_entries),
                         c.pad_rows, c.pad_cols)


def round_off(m):
    """Round to the nearest integer, ties away from zero."""
    x = np.asarray(m, dtype=np.float64)
    r = np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5))
    return MessageMatrix.from_array(r.astype(np.int64))


def _as_int_array(a):
    a = np.asarray(a)
    if a.dtype == object:
        return _narrow(a)
    if not np.issubdtype(a.dtype, np.integer):
        raise TypeError(f"message entries must be integers, got {a.dtype}")
    return a.astype(np.int64)


def _narrow(a):
    """object -> int64 when every entry fits, else keep exact Python ints."""
    if a.size == 0:
        return a.astype(np.int64)
    if max(abs(int(a.max())), abs(int(a.min()))) <= _I64_MAX:
        return a.astype(np.int64)
    return a


def _fits_int64(a, key):
    if a.size == 0:
        return True
    peak = max(abs(int(a.max())), abs(int(a.min())))
    col = max(abs(key[0][j]) + abs(key[1][j]) for j in range(2))
    return peak * col <= _I64_MAX


def _tiles_times(a, key):
    if a.ndim != 2 or a.shape[1] % 2 or a.shape[0] % 2:
        raise ValueError("message matrix must be padded to even dimensions")
    if a.dtype != object and _fits_int64(a, key):
        k = np.array(key, dtype=np.int64)
        return kernels.tile_matmul(np.ascontiguousarray(a, dtype=np.int64), k)
    k = np.array(key, dtype=object)
    out = a.astype(object).reshape(a.shape[0], -1, 2) @ k
    return _narrow(out.reshape(a.shape))


def _blocks_times(blocks, key):
    if blocks.dtype != object and _fits_int64(blocks, key):
        return blocks.astype(np.int64) @ np.array(key, dtype=np.int64)
    return _narrow(blocks.astype(object) @ np.array(key, dtype=object))
