"""Gray-mapped M-PSK over AWGN, and Monte Carlo BER curves."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .rng import RngSeed


@dataclass(frozen=True, eq=False)
class SymbolStream:
    symbols: np.ndarray
    order_m: int
    pad_bits: int = 0

    def __len__(self):
        return self.symbols.size


@dataclass(frozen=True)
class BerPoint:
    ebn0_db: float
    bits_simulated: int
    errors: int

    @property
    def ber(self):
        return self.errors / self.bits_simulated


def bits_per_symbol(order_m):
    order_m = int(order_m)
    if order_m < 2 or order_m & (order_m - 1):
        raise ValueError(f"PSK order must be a power of 2 >= 2, got {order_m}")
    return order_m.bit_length() - 1


def gray(k):
    return k ^ (k >> 1)


def inverse_gray(g):
    k = g
    shift = g >> 1
    while shift:
        k ^= shift
        shift >>= 1
    return k


def constellation(order_m):
    """Points exp(i(2 pi k / M + pi / M)) for M > 2, and +1/-1 for BPSK; index k."""
    bits_per_symbol(order_m)
    if order_m == 2:
        return np.array([1.0 + 0j, -1.0 + 0j])
    phase = 2 * np.pi * np.arange(order_m) / order_m + np.pi / order_m
    return np.cos(phase) + 1j * np.sin(phase)


def psk_modulate(bits, order_m=2):
    """Map bits to unit-energy symbols; the tail is zero-padded to a whole symbol."""
    k = bits_per_symbol(order_m)
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    pad = (-bits.size) % k
    if pad:
        bits = np.concatenate((bits, np.zeros(pad, dtype=np.uint8)))
    labels = bits.reshape(-1, k) @ (1 << np.arange(k - 1, -1, -1))
    index = np.array([inverse_gray(g) for g in range(order_m)])[labels]
    return SymbolStream(constellation(order_m)[index], order_m, pad)


def noise_sigma(ebn0_db, order_m):
    """Per-dimension noise std for unit-energy symbols at the given Eb/N0."""
    if math.isinf(ebn0_db) and ebn0_db > 0:
        return 0.0
    ebn0 = 10.0 ** (ebn0_db / 10.0)
    return math.sqrt(1.0 / (2.0 * bits_per_symbol(order_m) * ebn0))


def awgn(s, ebn0_db, rng):
    """Add circular complex Gaussian noise; ``ebn0_db=inf`` returns the input."""
    if math.isnan(ebn0_db) or ebn0_db == -math.inf:
        raise ValueError(f"Eb/N0 must be finite or +inf, got {ebn0_db}")
    sigma = noise_sigma(ebn0_db, s.order_m)
    if sigma == 0.0:
        return SymbolStream(s.symbols.copy(), s.order_m, s.pad_bits)
    gen = rng.generator() if isinstance(rng, RngSeed) else rng
    n = s.symbols.size
    noise = gen.standard_normal(n) + 1j * gen.standard_normal(n)
    return SymbolStream(s.symbols + sigma * noise, s.order_m, s.pad_bits)


def psk_demodulate(s, order_m=None):
    """Minimum-distance decision and inverse Gray map; padding bits are removed."""
    order_m = s.order_m if order_m is None else order_m
    k = bits_per_symbol(order_m)
    pts = constellation(order_m)
    sym = np.asarray(s.symbols, dtype=np.complex128)
    idx = kernels.psk_nearest(
        np.ascontiguousarray(sym.real), np.ascontiguousarray(sym.imag),
        np.ascontiguousarray(pts.real), np.ascontiguousarray(pts.imag),
    )
    labels = np.array([gray(i) for i in range(order_m)])[idx]
    bits = ((labels[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8).ravel()
    if s.pad_bits:
        bits = bits[: bits.size - s.pad_bits]
    return bits


def ber_theory_bpsk(ebn0_db):
    """0.5 * erfc(sqrt(Eb/N0)) for coherent BPSK."""
    if ebn0_db == math.inf:
        return 0.0
    if ebn0_db == -math.inf:
        return 0.5
    return 0.5 * math.erfc(math.sqrt(10.0 ** (ebn0_db / 10.0)))


def ber_point(n_bits, ebn0_db, order_m, rng):
    """One Monte Carlo point; all randomness comes from ``rng`` (a numpy Generator)."""
    bits = rng.integers(0, 2, size=n_bits, dtype=np.uint8)
    rx = psk_demodulate(awgn(psk_modulate(bits, order_m), ebn0_db, rng), order_m)
    return BerPoint(float(ebn0_db), int(n_bits), int(np.count_nonzero(rx != bits)))


def ber_curve(n_bits, ebn0_list, order_m=2, rng=RngSeed(), workers=1):
    """BER at each Eb/N0; point i draws from stream ``rng.generator(i)``.

    Results do not depend on ``workers``.
    """
    if n_bits < 1:
        raise ValueError("n_bits must be >= 1")
    bits_per_symbol(order_m)
    ebn0_list = [float(e) for e in ebn0_list]

    def run(i):
        return ber_point(n_bits, ebn0_list[i], order_m, rng.generator(i))

    if workers <= 1:
        return [run(i) for i in range(len(ebn0_list))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(len(ebn0_list))))
