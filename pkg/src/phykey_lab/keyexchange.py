"""Modified Diffie-Hellman exchange and the two verification gates.

All arithmetic is on Python integers, so moduli and exponents of any size are
exact. Secrets either come from the caller or from a seeded generator; nothing
here reads OS entropy.
"""

from dataclasses import dataclass, field

from .rng import RngSeed

# Deterministic Miller-Rabin: the first 13 primes are a complete witness set
# below 3.3170e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_EXACT_BOUND = 3_317_044_064_679_887_385_961_981
# Above the bound the same test runs with more fixed witnesses (probabilistic,
# but reproducible).
_MR_EXTRA_WITNESSES = (43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103,
                       107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163)


@dataclass(frozen=True)
class PublicParams:
    modulus_n: int
    generator_g: int
    prime_checked: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.modulus_n < 2:
            raise ValueError(f"modulus must be >= 2, got {self.modulus_n}")
        if not 1 <= self.generator_g < self.modulus_n:
            raise ValueError(
                f"generator must lie in [1, {self.modulus_n}), got {self.generator_g}"
            )


@dataclass(frozen=True)
class SecretExponent:
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"secret exponent must be >= 0, got {self.value}")


@dataclass(frozen=True)
class KeyShare:
    value: int
    modulus_n: int

    def __post_init__(self):
        if not 0 <= self.value < self.modulus_n:
            raise ValueError(f"share {self.value} outside [0, {self.modulus_n})")


@dataclass(frozen=True)
class SharedKey:
    value: int
    modulus_n: int | None = None

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"shared key must be >= 0, got {self.value}")
        if self.modulus_n is not None and self.value >= self.modulus_n:
            raise ValueError(f"shared key {self.value} outside [0, {self.modulus_n})")


@dataclass(frozen=True)
class VerificationToken:
    c1: int
    k2: int


def is_probable_prime(n):
    """Miller-Rabin with a fixed witness set; exact for n < 3.3e24."""
    if n < 2:
        return False
    witnesses = _MR_WITNESSES
    if n >= _MR_EXACT_BOUND:
        witnesses = _MR_WITNESSES + _MR_EXTRA_WITNESSES
    for p in witnesses:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in witnesses:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def make_params(modulus_n, generator_g):
    modulus_n, generator_g = int(modulus_n), int(generator_g)
    if modulus_n < 2:
        raise ValueError(f"modulus must be >= 2, got {modulus_n}")
    return PublicParams(modulus_n, generator_g, is_probable_prime(modulus_n))


def public_share(params, secret):
    """g^secret mod N."""
    return KeyShare(pow(params.generator_g, secret.value, params.modulus_n),
                    params.modulus_n)


def shared_key(params, other_share, own_secret):
    """other_share^own_secret mod N."""
    if other_share.modulus_n != params.modulus_n:
        raise ValueError("share was produced under a different modulus")
    return SharedKey(pow(other_share.value, own_secret.value, params.modulus_n),
                     params.modulus_n)


def verify_common(cmk_local, cmk_entered):
    """Common-key gate: exact equality of the local and the entered value."""
    return int(cmk_local.value if isinstance(cmk_local, SharedKey) else cmk_local) \
        == int(cmk_entered)


def issue_token(k2, cmk2):
    k2 = int(k2)
    cmk = int(cmk2.value if isinstance(cmk2, SharedKey) else cmk2)
    if k2 < 1:
        raise ValueError(f"encryption key must be >= 1, got {k2}")
    if cmk < 1:
        raise ValueError(f"common key must be >= 1 to issue a token, got {cmk}")
    return VerificationToken(c1=k2 * cmk, k2=k2)


def verify_encryption_key(k2_entered, token, cmk2):
    """Encryption-key gate ``k2 == c1 / cmk2`` with exact integer division.

    A non-zero remainder rejects rather than rounding.
    """
    cmk = int(cmk2.value if isinstance(cmk2, SharedKey) else cmk2)
    if cmk < 1:
        return False
    q, r = divmod(token.c1, cmk)
    return r == 0 and q == int(k2_entered)


def draw_secret(rng, bits):
    """Secret in [1, 2**bits) drawn from a numpy Generator."""
    if bits < 1:
        raise ValueError("secret bit length must be >= 1")
    nbytes = (bits + 7) // 8
    while True:
        value = int.from_bytes(rng.bytes(nbytes), "big") & ((1 << bits) - 1)
        if value:
            return SecretExponent(value)


def exchange(params, secret_a, secret_b):
    """Run both sides of the exchange. Returns (share_a, share_b, key_alice, key_bob)."""
    share_a = public_share(params, secret_a)
    share_b = public_share(params, secret_b)
    return (share_a, share_b,
            shared_key(params, share_b, secret_a),
            shared_key(params, share_a, secret_b))


def exchange_summary(params, secret_a, secret_b):
    """JSON-ready dict with the fields printed by the ``keyexchange`` subcommand."""
    share_a, share_b, key_a, key_b = exchange(params, secret_a, secret_b)
    if key_a != key_b:  # cannot happen for a correct pow(); guards regressions
        raise AssertionError("key agreement failed")
    return {
        "n": params.modulus_n,
        "g": params.generator_g,
        "share_a": share_a.value,
        "share_b": share_b.value,
        "shared_key": key_a.value,
        "prime_checked": params.prime_checked,
    }


def seeded_secrets(seed, bits):
    rng = RngSeed(seed).generator()
    return draw_secret(rng, bits), draw_secret(rng, bits)
