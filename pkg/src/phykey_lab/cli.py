"""``phykey-lab`` command-line entry point.

Subcommands: keyexchange, encrypt, decrypt, pipeline, ber, phykey, report.
Every output file is written to a temporary sibling and renamed into place,
so a failing command never leaves a partial output behind.

Exit codes: 0 ok, 1 file/parse/argument error, 2 wrong common key,
3 wrong encryption key.
"""

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import blockcipher, keyexchange, metrics
from .channelsim import BerPoint, ber_curve
from .formats import (HEADER_SIZE, FormatError, matrix_to_raw, pack_cipher, parse_pgm,
                      raw_to_matrix, unpack_cipher, write_pgm)
from .phykeygen import SCHEMES, QuantizerConfig, compare_schemes
from .rng import RngSeed

DEFAULT_SEED = 42
DEFAULT_MODULUS = 2_147_483_647  # 2**31 - 1, prime
DEFAULT_GENERATOR = 7  # primitive root of 2**31 - 1
BER_HEADER = ("ebn0_db", "ber", "bits", "errors")
PHYKEY_HEADER = ("scheme", "snr_db", "kdp", "kgr", "monobit_p")
REPORT_HEADER = ("bitrate", "cdf")

EXIT_OK, EXIT_IO, EXIT_COMMON_KEY, EXIT_ENCRYPTION_KEY = 0, 1, 2, 3

class GateError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code

# -- helpers -------------------------------------------------------------------

def fmt(x):
    """Floats with 10 significant digits; ints unchanged."""
    if isinstance(x, float):
        return format(x, ".10g")
    return str(x)

def parse_float_list(text):
    out = []
    for item in text.split(","):
        item = item.strip()
        if item:
            out.append(float(item))
    if not out:
        raise argparse.ArgumentTypeError(f"empty list: {text!r}")
    return out

def atomic_write(path, data):
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

def emit(data, out):
    """Write to ``out`` atomically, or to stdout when no path is given."""
    if out in (None, "-"):
        sys.stdout.write(data if isinstance(data, str) else data.decode())
    else:
        atomic_write(out, data)

def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()

def sha256_hex(data):
    return hashlib.sha256(data).hexdigest()

def read_message(path, raw):
    data = Path(path).read_bytes()
    return data, (raw_to_matrix(data) if raw else parse_pgm(data))

def write_message(m, raw):
    return matrix_to_raw(m) if raw else write_pgm(m)

# -- pipeline ------------------------------------------------------------------

@dataclass
class RunConfig:
    input: str
    raw: bool = False
    modulus: int = DEFAULT_MODULUS
    generator: int = DEFAULT_GENERATOR
    secret_a: int | None = None
    secret_b: int | None = None
    beta2: int | None = None
    common_key: int | None = None
    k2: int | None = None
    secret_bits: int = 16
    seed: int = DEFAULT_SEED
    cipher_out: str | None = None
    decrypted_out: str | None = None
    report_out: str | None = None
    verbose: bool = False

@dataclass
class PipelineReport:
    n: int
    g: int
    prime_checked: bool
    share_a: int
    share_b: int
    shared_key: int
    common_key_ok: bool
    encryption_key_ok: bool
    scalability_factor: float | None
    input_sha256: str
    cipher_sha256: str | None
    output_sha256: str | None
    roundtrip_ok: bool
    compressed_runs: int
    unexplained_paper_value: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

def derive_k2(cmk):
    """Encryption key from the agreed common key (always >= 1)."""
    return int(cmk) + 1

def run_pipeline(cfg, transcript=None):
    """Key exchange, gates, encryption, decryption and scalability for one file.

    ``transcript`` collects the console-style lines shown in verbose mode.
    Raises GateError when a gate rejects; nothing is written in that case.
    """
    say = transcript.append if transcript is not None else (lambda _line: None)
    params = keyexchange.make_params(cfg.modulus, cfg.generator)
    if cfg.secret_a is None or cfg.secret_b is None:
        drawn_a, drawn_b = keyexchange.seeded_secrets(cfg.seed, cfg.secret_bits)
    alpha1 = keyexchange.SecretExponent(cfg.secret_a) if cfg.secret_a is not None else drawn_a
    beta1 = keyexchange.SecretExponent(cfg.secret_b) if cfg.secret_b is not None else drawn_b
    beta2 = keyexchange.SecretExponent(cfg.beta2) if cfg.beta2 is not None else beta1

    ak1 = keyexchange.public_share(params, alpha1)
    bk1 = keyexchange.public_share(params, beta1)
    cmk1 = keyexchange.shared_key(params, bk1, alpha1)  # Alice
    cmk2 = keyexchange.shared_key(params, ak1, beta2)  # Bob, from the entered beta
    k2_true = derive_k2(cmk1.value)

    say(f"N = {params.modulus_n}")
    say(f"alpha1 = {alpha1.value}")
    say(f"beta1 = {beta1.value}")
    say(f"k1 = {k2_true}")

    source, plain = read_message(cfg.input, cfg.raw)
    runs = blockcipher.compress(blockcipher.binarize(source))
    key = blockcipher.key_matrix(k2_true)
    cipher = blockcipher.encrypt_matrix(plain, key)
    cipher_bytes = pack_cipher(cipher)

    say(f"beta2 = {beta2.value}")
    say(f"cmk2 = {cmk2.value}")
    cmk3 = cmk2.value if cfg.common_key is None else int(cfg.common_key)
    say(f"cmk3 = {cmk3}")
    if not keyexchange.verify_common(cmk1, cmk3):
        say("wrong common key")
        raise GateError(EXIT_COMMON_KEY, "wrong common key")
    say("correct common key")

    if cmk2.value < 1:
        raise ValueError("common key is 0; choose other secrets")
    token = keyexchange.issue_token(derive_k2(cmk2.value), cmk2)
    k2_entered = token.k2 if cfg.k2 is None else int(cfg.k2)
    say(f"k2 = {k2_entered}")
    if not keyexchange.verify_encryption_key(k2_entered, token, cmk2):
        say("wrong encryption key")
        raise GateError(EXIT_ENCRYPTION_KEY, "wrong encryption key")
    say("Correct encryption key")

    decrypted = blockcipher.decrypt_matrix(unpack_cipher(cipher_bytes),
                                           blockcipher.key_matrix(k2_entered))
    restored = blockcipher.round_off(decrypted.original())
    out_bytes = write_message(restored, cfg.raw)
    scal = metrics.scalability_factor(plain, cipher).factor if plain.entries.any() else None
    if scal is not None:
        say(f"The scalability factor is {scal:.4f}")

    report = PipelineReport(
        n=params.modulus_n, g=params.generator_g, prime_checked=params.prime_checked,
        share_a=ak1.value, share_b=bk1.value, shared_key=cmk1.value,
        common_key_ok=True, encryption_key_ok=True,
        scalability_factor=scal,
        input_sha256=sha256_hex(source),
        cipher_sha256=sha256_hex(cipher_bytes),
        output_sha256=sha256_hex(out_bytes),
        roundtrip_ok=out_bytes == source,
        compressed_runs=len(runs.runs),
        unexplained_paper_value={"k1": k2_true},
    )
    if cfg.cipher_out:
        atomic_write(cfg.cipher_out, cipher_bytes)
    if cfg.decrypted_out:
        atomic_write(cfg.decrypted_out, out_bytes)
    if cfg.report_out:
        atomic_write(cfg.report_out, report.to_json())
    return report

# -- subcommands -----------------------------------------------------------------

def cmd_keyexchange(args):
    params = keyexchange.make_params(args.modulus, args.generator)
    if args.secret_a is not None and args.secret_b is not None:
        a = keyexchange.SecretExponent(args.secret_a)
        b = keyexchange.SecretExponent(args.secret_b)
    elif args.secret_a is None and args.secret_b is None:
        a, b = keyexchange.seeded_secrets(args.seed, args.secret_bits)
    else:
        raise ValueError("give both --secret-a and --secret-b, or neither")
    summary = keyexchange.exchange_summary(params, a, b)
    emit(json.dumps(summary) + "\n", args.out)
    return EXIT_OK

def _require_out(args):
    if not args.out:
        raise ValueError(f"{args.command} needs --out FILE")

def cmd_encrypt(args):
    _require_out(args)
    _, plain = read_message(args.input, args.raw)
    cipher = blockcipher.encrypt_matrix(plain, blockcipher.key_matrix(args.k2))
    atomic_write(args.out, pack_cipher(cipher))
    return EXIT_OK

def cmd_decrypt(args):
    _require_out(args)
    cipher = unpack_cipher(Path(args.input).read_bytes())
    plain = blockcipher.decrypt_matrix(cipher, blockcipher.key_matrix(args.k2))
    atomic_write(args.out, write_message(blockcipher.round_off(plain.original()), args.raw))
    return EXIT_OK

def cmd_pipeline(args):
    cfg = RunConfig(
        input=args.input, raw=args.raw, modulus=args.modulus, generator=args.generator,
        secret_a=args.secret_a, secret_b=args.secret_b, beta2=args.beta2,
        common_key=args.common_key, k2=args.k2, secret_bits=args.secret_bits,
        seed=args.seed, cipher_out=args.cipher_out, decrypted_out=args.decrypted_out,
        report_out=args.out, verbose=args.verbose,
    )
    lines = []
    try:
        report = run_pipeline(cfg, lines)
    finally:
        if args.verbose:
            for line in lines:
                print(line, file=sys.stderr)
    if args.out is None:
        sys.stdout.write(report.to_json())
    return EXIT_OK

def cmd_ber(args):
    points = ber_curve(args.bits, args.ebn0, args.order, RngSeed(args.seed), args.threads)
    rows = [(p.ebn0_db, p.ber, p.bits_simulated, p.errors) for p in points]
    emit(csv_text(BER_HEADER, rows), args.out)
    return EXIT_OK

def cmd_phykey(args):
    cfg = QuantizerConfig(q_plus=args.q_plus, q_minus=args.q_minus,
                          window=args.window, sectors=args.sectors)
    schemes = SCHEMES if args.scheme == "both" else (args.scheme,)
    table = compare_schemes(args.probes, args.snr, cfg, cfg, args.trials,
                            RngSeed(args.seed), args.coherence, schemes, args.threads)
    rows = [(s, snr, m.kdp, m.kgr, m.monobit_p) for s, snr, m in table]
    emit(csv_text(PHYKEY_HEADER, rows), args.out)
    return EXIT_OK

def read_ber_csv(path):
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != BER_HEADER:
            raise FormatError(f"{path}: expected header {','.join(BER_HEADER)}", 0)
        return [BerPoint(float(r["ebn0_db"]), int(r["bits"]), int(r["errors"]))
                for r in reader]

def read_phykey_csv(path):
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != PHYKEY_HEADER:
            raise FormatError(f"{path}: expected header {','.join(PHYKEY_HEADER)}", 0)
        return list(reader)

def cmd_report(args):
    points = read_ber_csv(args.ber_csv)
    rates = metrics.bitrate_samples(points, args.symbol_rate, args.order)
    cdf = metrics.empirical_cdf(rates)
    summary = {"rows": len(cdf.points)}
    if args.phykey_csv:
        rows = read_phykey_csv(args.phykey_csv)
        summary["phykey_rows"] = len(rows)
    if (args.plain is None) != (args.cipher is None):
        raise ValueError("--plain and --cipher must be given together")
    if args.plain is not None:
        _, plain = read_message(args.plain, args.raw)
        cipher_bytes = Path(args.cipher).read_bytes()
        cipher = unpack_cipher(cipher_bytes)
        summary["scalability_factor"] = metrics.scalability_factor(plain, cipher).factor
        summary["monobit_p"] = metrics.monobit_p(blockcipher.binarize(cipher_bytes[HEADER_SIZE:]))
    # CSV first, summary second: neither is written if the inputs are bad
    emit(csv_text(REPORT_HEADER, cdf.points), args.out)
    if args.plain is not None or args.summary:
        text = json.dumps(summary, sort_keys=True) + "\n"
        if args.summary:
            atomic_write(args.summary, text)
        else:
            sys.stderr.write(text)
    return EXIT_OK

# -- argument parsing ------------------------------------------------------------

_GLOBAL_DEFAULTS = {"seed": DEFAULT_SEED, "verbose": False, "out": None}


def _global_flags():
    # defaults are suppressed so a subcommand cannot reset a value given
    # before it; main() fills them in afterwards
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                   help=f"random seed (default {DEFAULT_SEED})")
    p.add_argument("--verbose", "-v", action="store_true", default=argparse.SUPPRESS)
    p.add_argument("--out", default=argparse.SUPPRESS, help="output file (default stdout)")
    return p


def build_parser():
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="phykey-lab", parents=[common],
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keyexchange", parents=[common], help="Diffie-Hellman agreement")
    p.add_argument("--modulus", type=int, default=DEFAULT_MODULUS)
    p.add_argument("--generator", type=int, default=DEFAULT_GENERATOR)
    p.add_argument("--secret-a", type=int)
    p.add_argument("--secret-b", type=int)
    p.add_argument("--secret-bits", type=int, default=16)
    p.set_defaults(func=cmd_keyexchange)

    for name, func in (("encrypt", cmd_encrypt), ("decrypt", cmd_decrypt)):
        p = sub.add_parser(name, parents=[common], help=f"{name} a PGM or raw file")
        p.add_argument("--in", dest="input", required=True)
        p.add_argument("--k2", type=int, required=True)
        p.add_argument("--raw", action="store_true", help="raw bytes instead of PGM")
        p.set_defaults(func=func)

    p = sub.add_parser("pipeline", parents=[common],
                       help="key exchange, gates, encrypt and decrypt one file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--raw", action="store_true")
    p.add_argument("--modulus", type=int, default=DEFAULT_MODULUS)
    p.add_argument("--generator", type=int, default=DEFAULT_GENERATOR)
    p.add_argument("--secret-a", type=int)
    p.add_argument("--secret-b", type=int)
    p.add_argument("--secret-bits", type=int, default=16)
    p.add_argument("--beta2", type=int, help="beta entered on the decryption side")
    p.add_argument("--common-key", type=int, help="common key entered at the gate")
    p.add_argument("--k2", type=int, help="encryption key entered at the gate")
    p.add_argument("--cipher-out")
    p.add_argument("--decrypted-out")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("ber", parents=[common], help="PSK/AWGN BER curve")
    p.add_argument("--bits", type=int, default=10**6)
    p.add_argument("--ebn0", type=parse_float_list, default=[0, 2, 4, 6, 8])
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_ber)

    p = sub.add_parser("phykey", parents=[common], help="RSS vs phase key generation")
    p.add_argument("--probes", type=int, default=10**4)
    p.add_argument("--snr", type=parse_float_list, default=[0, 10, 20, 30])
    p.add_argument("--scheme", choices=("rss", "phase", "both"), default="both")
    p.add_argument("--sectors", type=int, default=4)
    p.add_argument("--q-plus", type=float, default=0.8)
    p.add_argument("--q-minus", type=float, default=-0.8)
    p.add_argument("--window", type=int, default=250)
    p.add_argument("--coherence", type=int, default=1)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_phykey)

    p = sub.add_parser("report", parents=[common], help="bit-rate CDF and summary")
    p.add_argument("--ber-csv", required=True)
    p.add_argument("--phykey-csv")
    p.add_argument("--symbol-rate", type=float, default=1e6)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--plain")
    p.add_argument("--cipher")
    p.add_argument("--raw", action="store_true")
    p.add_argument("--summary", help="JSON summary path (default stderr)")
    p.set_defaults(func=cmd_report)
    return parser

def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, value in _GLOBAL_DEFAULTS.items():
        if not hasattr(args, name):
            setattr(args, name, value)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except GateError as e:
        print(str(e), file=sys.stderr)
        return e.code
    except (OSError, ValueError, OverflowError) as e:
        # FormatError is a ValueError
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO

if __name__ == "__main__":
    sys.exit(main())
