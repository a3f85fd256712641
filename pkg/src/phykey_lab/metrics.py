"""Scalability factor, empirical CDF, bit-rate samples, and the monobit test."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CdfSeries:
    points: tuple  # ((value, cumulative_prob), ...)

    @property
    def values(self):
        return [v for v, _ in self.points]

    @property
    def probs(self):
        return [p for _, p in self.points]


@dataclass(frozen=True)
class ScalabilityReport:
    input_frobenius: float
    output_frobenius: float
    block_count: int
    factor: float


def _frobenius(a):
    a = np.asarray(a)
    if a.dtype == object:
        return math.sqrt(sum(int(x) * int(x) for x in a.ravel()))
    return float(np.linalg.norm(a.astype(np.float64)))


def scalability_factor(plaintext, ciphertext):
    """(||C||_F / ||P||_F) * block_count, block_count = rows * cols / 4.

    Both arguments are MessageMatrix instances of equal (padded) shape.
    """
    p, c = plaintext.entries, ciphertext.entries
    if p.shape != c.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {c.shape}")
    fp = _frobenius(p)
    if fp == 0.0:
        raise ValueError("scalability factor is undefined for an all-zero plaintext")
    fc = _frobenius(c)
    blocks = p.shape[0] * p.shape[1] // 4
    return ScalabilityReport(fp, fc, blocks, fc / fp * blocks)


def empirical_cdf(samples):
    """Right-continuous ECDF at each distinct sample value."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("empirical_cdf needs at least one sample")
    if np.isnan(x).any():
        raise ValueError("samples must not contain NaN")
    values, counts = np.unique(x, return_counts=True)
    cum = np.cumsum(counts)
    n = x.size
    # integer counts keep the last probability exactly 1.0
    return CdfSeries(tuple((float(v), int(k) / n) for v, k in zip(values, cum)))


def bitrate_samples(ber_points, symbol_rate=1e6, order_m=2):
    """Effective throughput symbol_rate * log2(M) * (1 - BER) per BER point, bits/s."""
    if symbol_rate <= 0:
        raise ValueError("symbol_rate must be positive")
    k = math.log2(order_m)
    out = []
    for p in ber_points:
        ber = p.ber if hasattr(p, "ber") else float(p)
        out.append(symbol_rate * k * (1.0 - ber))
    return out


def monobit_p(bits):
    """NIST SP 800-22 frequency (monobit) test p-value."""
    bits = np.asarray(bits).ravel()
    n = bits.size
    if n == 0:
        raise ValueError("monobit test needs at least one bit")
    ones = int(np.count_nonzero(bits))
    s = abs(2 * ones - n) / math.sqrt(n)
    # erfc underflows for long constant runs; the p-value stays positive
    return max(math.erfc(s / math.sqrt(2)), math.ulp(0.0))
