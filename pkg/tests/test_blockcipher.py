import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from phykey_lab.blockcipher import (BlockSet, CipherBlockSet, CompressedBits,
                                    MessageMatrix, binarize, compress, debinarize,
                                    decompress, decrypt_blocks, decrypt_matrix,
                                    encrypt_blocks, encrypt_matrix, from_block_matrix,
                                    key_matrix, round_off, to_block_matrix)


def matmul2(a, b):
    return [[a[i][0] * b[0][j] + a[i][1] * b[1][j] for j in range(2)] for i in range(2)]


def blocks(*mats):
    return BlockSet(np.array(mats, dtype=np.int64))


def test_key_matrix_k2_1():
    k = key_matrix(1)
    assert k.entries == ((1, 1), (1, 2))
    assert k.inverse_entries == ((2, -1), (-1, 1))


def test_key_matrix_paper_value():
    assert key_matrix(21428).entries == ((1, 1), (21428, 21429))


def test_key_matrix_k2_2_inverse():
    k = key_matrix(2)
    assert matmul2(k.entries, k.inverse_entries) == [[1, 0], [0, 1]]
    assert matmul2(k.inverse_entries, k.entries) == [[1, 0], [0, 1]]


@pytest.mark.parametrize("k2", [0, -3])
def test_key_matrix_rejects(k2):
    with pytest.raises(ValueError):
        key_matrix(k2)


@settings(max_examples=500)
@given(st.integers(1, 10**9))
def test_unimodular(k2):
    k = key_matrix(k2)
    assert k.determinant == 1
    assert matmul2(k.entries, k.inverse_entries) == [[1, 0], [0, 1]]


@pytest.mark.parametrize("data, bits", [
    (b"\x00", "00000000"),
    (b"\xa5", "10100101"),
    (b"", ""),
    (b"\x01\x80", "0000000110000000"),
])
def test_binarize(data, bits):
    assert "".join(map(str, binarize(data))) == bits
    assert debinarize(binarize(data)) == data


def _bits(s):
    return np.array([int(c) for c in s], dtype=np.uint8)


@pytest.mark.parametrize("s, runs", [
    ("00001111", ((0, 4), (1, 4))),
    ("1", ((1, 1),)),
    ("010101", ((0, 1), (1, 1), (0, 1), (1, 1), (0, 1), (1, 1))),
    ("", ()),
])
def test_compress(s, runs):
    c = compress(_bits(s))
    assert c.runs == runs
    assert c.original_bit_count == len(s)
    assert np.array_equal(decompress(c), _bits(s))


def test_decompress_checks_count():
    with pytest.raises(ValueError):
        decompress(CompressedBits(((0, 3),), 4))


def test_compress_lossless_long(rng):
    for n in (1, 2, 10**3, 10**5):
        b = (rng.random(n) < rng.random()).astype(np.uint8)
        c = compress(b)
        assert sum(length for _, length in c.runs) == n
        assert all(x[0] != y[0] for x, y in zip(c.runs, c.runs[1:]))
        assert np.array_equal(decompress(c), b)


@given(st.lists(st.integers(0, 1), max_size=300))
def test_compress_roundtrip_property(bits):
    b = np.array(bits, dtype=np.uint8)
    assert np.array_equal(decompress(compress(b)), b)


def test_single_tile():
    m = MessageMatrix.from_array([[1, 2], [3, 4]])
    b = to_block_matrix(m)
    assert b.count == 1
    assert b.blocks[0].tolist() == [[1, 2], [3, 4]]
    assert from_block_matrix(b, 2, 2) == m


def test_tiles_follow_loop_order():
    a = np.arange(1, 17).reshape(4, 4)
    b = to_block_matrix(MessageMatrix.from_array(a))
    # enumerate tiles exactly like the i=1:2:rows, j=1:2:cols loop
    expected = [a[i:i + 2, j:j + 2].tolist() for i in range(0, 4, 2) for j in range(0, 4, 2)]
    assert b.count == 4
    assert b.blocks.tolist() == expected
    assert expected[0] == [[1, 2], [5, 6]]
    assert np.array_equal(from_block_matrix(b, 4, 4).entries, a)


def test_odd_dimensions_padded():
    a = np.arange(1, 10).reshape(3, 3)
    m = MessageMatrix.from_array(a)
    assert (m.rows, m.cols, m.pad_rows, m.pad_cols) == (4, 4, 1, 1)
    assert m.entries[3].tolist() == [0, 0, 0, 0] and m.entries[:, 3].tolist() == [0] * 4
    b = to_block_matrix(m)
    assert b.count == 4
    back = from_block_matrix(b, 4, 4, 1, 1)
    assert np.array_equal(back.original(), a)


def test_from_block_matrix_count_mismatch():
    with pytest.raises(ValueError):
        from_block_matrix(blocks([[1, 2], [3, 4]]), 4, 4)


def test_to_block_matrix_needs_even():
    with pytest.raises(ValueError):
        to_block_matrix(MessageMatrix(np.zeros((3, 2), dtype=np.int64)))


@pytest.mark.parametrize("p, k2, c", [
    ([[1, 0], [0, 1]], 2, [[1, 1], [2, 3]]),
    ([[1, 2], [3, 4]], 2, [[5, 7], [11, 15]]),
    ([[0, 0], [0, 0]], 7, [[0, 0], [0, 0]]),
])
def test_encrypt_blocks(p, k2, c):
    key = key_matrix(k2)
    assert matmul2(p, key.entries) == c
    out = encrypt_blocks(blocks(p), key)
    assert isinstance(out, CipherBlockSet)
    assert out.blocks[0].tolist() == c


@pytest.mark.parametrize("c, k2, p", [
    ([[5, 7], [11, 15]], 2, [[1, 2], [3, 4]]),
    ([[1, 1], [2, 3]], 2, [[1, 0], [0, 1]]),
])
def test_decrypt_blocks(c, k2, p):
    assert matmul2(c, key_matrix(k2).inverse_entries) == p
    out = decrypt_blocks(CipherBlockSet(np.array([c])), key_matrix(k2))
    assert out.blocks[0].tolist() == p


def test_matrix_path_equals_block_path(rng):
    for _ in range(50):
        r, c = rng.integers(1, 40, size=2)
        m = MessageMatrix.from_array(rng.integers(0, 256, (r, c)))
        key = key_matrix(int(rng.integers(1, 10**6)))
        via_blocks = from_block_matrix(encrypt_blocks(to_block_matrix(m), key),
                                       m.rows, m.cols, m.pad_rows, m.pad_cols)
        assert encrypt_matrix(m, key) == via_blocks


def test_roundtrip_100x100(rng):
    m = MessageMatrix.from_array(rng.integers(0, 256, (100, 100)))
    key = key_matrix(21428)
    c = encrypt_matrix(m, key)
    assert not np.array_equal(c.entries, m.entries)
    assert decrypt_matrix(c, key) == m


@settings(max_examples=100, deadline=None)
@given(hnp.arrays(np.int64, hnp.array_shapes(min_dims=2, max_dims=2, max_side=21),
                  elements=st.integers(0, 255)),
       st.integers(1, 10**6))
def test_roundtrip_property(a, k2):
    m = MessageMatrix.from_array(a)
    key = key_matrix(k2)
    assert decrypt_matrix(encrypt_matrix(m, key), key) == m
    assert decrypt_blocks(encrypt_blocks(to_block_matrix(m), key), key) == to_block_matrix(m)


def test_large_key_uses_exact_integers():
    # decrypting needs products near 255 * k2**2, far beyond int64
    k2 = 10**15
    m = MessageMatrix.from_array(np.array([[255, 255], [0, 1]]))
    key = key_matrix(k2)
    c = encrypt_matrix(m, key)
    assert c.entries.dtype == np.int64
    assert c.entries[0].tolist() == [255 + 255 * k2, 255 + 255 * (k2 + 1)]
    assert decrypt_matrix(c, key) == m


def test_huge_key_stays_exact():
    k2 = 2**80
    m = MessageMatrix.from_array(np.array([[7, 9], [1, 0]]))
    key = key_matrix(k2)
    c = encrypt_matrix(m, key)
    assert c.entries.dtype == object
    assert int(c.entries[0, 1]) == 7 + 9 * (k2 + 1)
    assert np.array_equal(decrypt_matrix(c, key).entries, m.entries)


def test_wrong_key_does_not_decrypt(rng):
    m = MessageMatrix.from_array(rng.integers(0, 256, (8, 8)))
    c = encrypt_matrix(m, key_matrix(5))
    assert decrypt_matrix(c, key_matrix(6)) != m


@pytest.mark.parametrize("x, y", [
    ([[1.0, 2.0]], [[1, 2]]),
    ([[1.4999]], [[1]]),
    ([[2.5]], [[3]]),
    ([[-2.5]], [[-3]]),
    ([[-0.4]], [[0]]),
])
def test_round_off(x, y):
    assert round_off(x).original().tolist() == y


def test_round_off_identity_on_integers(rng):
    a = rng.integers(-1000, 1000, (6, 6))
    assert np.array_equal(round_off(a).entries, a)


def test_float_entries_rejected():
    with pytest.raises(TypeError):
        MessageMatrix.from_array(np.array([[0.5]]))
