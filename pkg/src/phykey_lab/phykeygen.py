"""Channel-reciprocity key generation: RSS and channel-phase quantizers.

Alice and Bob observe the same block-fading Rayleigh coefficient h through
independent additive noise; Eve observes an independent channel. Each side
quantizes its own observations, the kept probe indices are exchanged in the
clear and intersected, and the surviving bits form the key.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .metrics import monobit_p
from .rng import RngSeed

SCHEMES = ("rss", "phase")


@dataclass(frozen=True, eq=False)
class ChannelProbeSet:
    alice: np.ndarray
    bob: np.ndarray
    eve: np.ndarray
    snr_db: float
    coherence_block: int

    @property
    def n_probes(self):
        return self.alice.size


@dataclass(frozen=True, eq=False)
class KeyBitstream:
    bits: np.ndarray
    kept_indices: np.ndarray
    scheme: str

    def __len__(self):
        return self.bits.size

    @property
    def bits_per_probe(self):
        return self.bits.size // self.kept_indices.size if self.kept_indices.size else 0


@dataclass(frozen=True)
class QuantizerConfig:
    q_plus: float = 0.8
    q_minus: float = -0.8
    window: int = 250
    sectors: int = 4

    def __post_init__(self):
        if not self.q_minus < self.q_plus:
            raise ValueError(f"need q_minus < q_plus, got {self.q_minus} >= {self.q_plus}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if self.sectors < 2 or self.sectors & (self.sectors - 1):
            raise ValueError(f"sectors must be a power of 2 >= 2, got {self.sectors}")


@dataclass(frozen=True)
class KgMetrics:
    kdp: float
    kgr: float
    monobit_p: float
    eve_kdp: float = math.nan
    empty_trials: int = 0


def _complex_gaussian(gen, n, var):
    s = math.sqrt(var / 2.0)
    return s * gen.standard_normal(n) + 1j * (s * gen.standard_normal(n))


def simulate_probes(n_probes, snr_db, coherence_block=1, rng=RngSeed()):
    """Draw one probe set. ``snr_db=inf`` gives noiseless, perfectly reciprocal probes.

    The draw order does not depend on ``snr_db``, so reusing a seed across SNR
    values yields the same fading and unit-noise samples at every SNR.
    """
    if n_probes < 1 or coherence_block < 1:
        raise ValueError("n_probes and coherence_block must be >= 1")
    gen = rng.generator() if isinstance(rng, RngSeed) else rng
    n_blocks = -(-n_probes // coherence_block)
    h = np.repeat(_complex_gaussian(gen, n_blocks, 1.0), coherence_block)[:n_probes]
    g_e = np.repeat(_complex_gaussian(gen, n_blocks, 1.0), coherence_block)[:n_probes]
    noise = [_complex_gaussian(gen, n_probes, 1.0) for _ in range(3)]
    if snr_db == math.inf:
        scale = 0.0
    else:
        scale = math.sqrt(10.0 ** (-snr_db / 10.0))
    return ChannelProbeSet(
        alice=h + scale * noise[0],
        bob=h + scale * noise[1],
        eve=g_e + scale * noise[2],
        snr_db=float(snr_db),
        coherence_block=int(coherence_block),
    )


def rss_quantize(obs, cfg=QuantizerConfig()):
    """Two-threshold RSS quantizer over consecutive windows, one bit per kept probe."""
    obs = np.asarray(obs)
    if cfg.window > obs.size:
        raise ValueError(f"window {cfg.window} exceeds {obs.size} observations")
    rss = np.ascontiguousarray(np.abs(obs) ** 2, dtype=np.float64)
    return rss_bits_from_values(rss, cfg)


def rss_bits_from_values(rss, cfg=QuantizerConfig()):
    rss = np.ascontiguousarray(rss, dtype=np.float64)
    decision = kernels.rss_threshold(rss, cfg.window, cfg.q_plus, cfg.q_minus)
    kept = np.flatnonzero(decision >= 0)
    return KeyBitstream(decision[kept].astype(np.uint8), kept, "rss")


def phase_quantize(obs, cfg=QuantizerConfig(), coherence_block=1):
    """Uniform phase sectors, Gray-coded, on the first probe of each coherence block."""
    obs = np.asarray(obs, dtype=np.complex128)
    used = np.arange(0, obs.size, coherence_block)
    used = used[obs[used] != 0]
    theta = np.mod(np.angle(obs[used]), 2 * np.pi)
    sector = np.minimum((theta * cfg.sectors / (2 * np.pi)).astype(np.int64),
                        cfg.sectors - 1)
    code = sector ^ (sector >> 1)
    k = cfg.sectors.bit_length() - 1
    bits = ((code[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8).ravel()
    return KeyBitstream(bits, used, "phase")


def reconcile_indices(a, b):
    """Restrict both streams to the probe indices kept by both sides."""
    if a.scheme != b.scheme:
        raise ValueError(f"scheme mismatch: {a.scheme} vs {b.scheme}")
    common, ia, ib = np.intersect1d(a.kept_indices, b.kept_indices,
                                    assume_unique=True, return_indices=True)
    return _select(a, common, ia), _select(b, common, ib)


def _select(k, common, pos):
    w = k.bits_per_probe
    if w == 0:
        return KeyBitstream(np.zeros(0, dtype=np.uint8), common, k.scheme)
    take = (pos[:, None] * w + np.arange(w)).ravel()
    return KeyBitstream(k.bits[take], common, k.scheme)


def key_disagreement_probability(a, b):
    """Fraction of differing bits; 0.0 for two empty streams."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) == 0:
        return 0.0
    return float(np.count_nonzero(a.bits != b.bits)) / len(a)


def key_generation_rate(k, n_probes):
    if n_probes < 1:
        raise ValueError("n_probes must be >= 1")
    return len(k) / n_probes


def quantize(scheme, obs, cfg, coherence_block=1):
    if scheme == "rss":
        return rss_quantize(obs, cfg)
    if scheme == "phase":
        return phase_quantize(obs, cfg, coherence_block)
    raise ValueError(f"unknown scheme {scheme!r}")


@dataclass(frozen=True, eq=False)
class TrialKeys:
    alice: KeyBitstream
    bob: KeyBitstream
    eve_alice: KeyBitstream
    eve: KeyBitstream


def run_trial(scheme, probes, cfg):
    """Quantize one probe set and reconcile Alice with Bob and with Eve."""
    qa = quantize(scheme, probes.alice, cfg, probes.coherence_block)
    qb = quantize(scheme, probes.bob, cfg, probes.coherence_block)
    qe = quantize(scheme, probes.eve, cfg, probes.coherence_block)
    alice, bob = reconcile_indices(qa, qb)
    eve_alice, eve = reconcile_indices(qa, qe)
    return TrialKeys(alice, bob, eve_alice, eve)


def collect_trials(n_probes, snr_db, schemes, configs, trials, rng,
                   coherence_block=1, workers=1):
    """TrialKeys per trial for each scheme: ``{scheme: [TrialKeys, ...]}``.

    Trial t draws from ``rng.generator(t)`` at every SNR.
    """
    def one(t):
        probes = simulate_probes(n_probes, snr_db, coherence_block, rng.generator(t))
        return {s: run_trial(s, probes, configs[s]) for s in schemes}

    if workers <= 1:
        per_trial = [one(t) for t in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(one, range(trials)))
    return {s: [r[s] for r in per_trial] for s in schemes}


def summarize(results, n_probes):
    kdp, kgr, mono, eve = [], [], [], []
    empty = 0
    for r in results:
        kdp.append(key_disagreement_probability(r.alice, r.bob))
        kgr.append(key_generation_rate(r.alice, n_probes))
        eve.append(key_disagreement_probability(r.eve_alice, r.eve))
        if len(r.alice):
            mono.append(monobit_p(r.alice.bits))
        else:
            empty += 1
    return KgMetrics(
        kdp=math.fsum(kdp) / len(kdp),
        kgr=math.fsum(kgr) / len(kgr),
        monobit_p=math.fsum(mono) / len(mono) if mono else math.nan,
        eve_kdp=math.fsum(eve) / len(eve),
        empty_trials=empty,
    )


def compare_schemes(n_probes, snr_list, cfg_rss=QuantizerConfig(),
                    cfg_phase=QuantizerConfig(), trials=50, rng=RngSeed(),
                    coherence_block=1, schemes=SCHEMES, workers=1):
    """Trial-averaged metrics for every (scheme, snr) cell, scheme-major order."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    configs = {"rss": cfg_rss, "phase": cfg_phase}
    cells = {}
    for snr in snr_list:
        by_scheme = collect_trials(n_probes, snr, schemes, configs, trials, rng,
                                   coherence_block, workers)
        for s in schemes:
            cells[s, snr] = summarize(by_scheme[s], n_probes)
    return [(s, float(snr), cells[s, snr]) for s in schemes for snr in snr_list]
