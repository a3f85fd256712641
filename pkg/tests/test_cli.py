import csv
import json

import pytest

from phykey_lab.blockcipher import MessageMatrix
from phykey_lab.cli import RunConfig, main, run_pipeline
from phykey_lab.formats import write_pgm


@pytest.fixture
def image(tmp_path, rng):
    path = tmp_path / "in.pgm"
    path.write_bytes(write_pgm(MessageMatrix.from_array(rng.integers(0, 256, (64, 64)))))
    return path


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def test_keyexchange_explicit(capsys):
    assert main(["keyexchange", "--modulus", "23", "--generator", "5",
                 "--secret-a", "6", "--secret-b", "15"]) == 0
    out = capsys.readouterr().out
    assert json.loads(out) == {"n": 23, "g": 5, "share_a": 8, "share_b": 19,
                               "shared_key": 2, "prime_checked": True}
    assert list(json.loads(out)) == ["n", "g", "share_a", "share_b", "shared_key",
                                     "prime_checked"]


def test_keyexchange_seeded(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["keyexchange", "--seed", "9", "--secret-bits", "64", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    d = json.loads(a.read_text())
    assert d["prime_checked"] is True


def test_keyexchange_composite_modulus(capsys):
    assert main(["keyexchange", "--modulus", "5392", "--generator", "3",
                 "--secret-a", "8", "--secret-b", "9"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["prime_checked"] is False
    assert d["shared_key"] == pow(3, 72, 5392)


def test_keyexchange_bad_args(capsys):
    assert main(["keyexchange", "--modulus", "23", "--generator", "30",
                 "--secret-a", "1", "--secret-b", "2"]) == 1
    assert main(["keyexchange", "--secret-a", "3"]) == 1


def test_global_flags_before_subcommand(capsys):
    main(["--seed", "7", "keyexchange"])
    before = capsys.readouterr().out
    main(["keyexchange", "--seed", "7"])
    assert capsys.readouterr().out == before


def test_encrypt_decrypt_pgm(image, tmp_path):
    c, d = tmp_path / "c.phk", tmp_path / "d.pgm"
    assert main(["encrypt", "--in", str(image), "--out", str(c), "--k2", "21428"]) == 0
    assert c.read_bytes()[:4] == b"PHK1"
    assert main(["decrypt", "--in", str(c), "--out", str(d), "--k2", "21428"]) == 0
    assert d.read_bytes() == image.read_bytes()


def test_encrypt_decrypt_raw_odd_length(tmp_path):
    src = tmp_path / "msg.bin"
    src.write_bytes(b"secret message!")
    c, d = tmp_path / "c.phk", tmp_path / "d.bin"
    assert main(["encrypt", "--raw", "--in", str(src), "--out", str(c), "--k2", "5"]) == 0
    assert main(["decrypt", "--raw", "--in", str(c), "--out", str(d), "--k2", "5"]) == 0
    assert d.read_bytes() == src.read_bytes()


def test_decrypt_wrong_key_fails_cleanly(image, tmp_path):
    c, d = tmp_path / "c.phk", tmp_path / "d.pgm"
    main(["encrypt", "--in", str(image), "--out", str(c), "--k2", "100"])
    # wrong inverse yields out-of-range pixels -> error, no output file
    assert main(["decrypt", "--in", str(c), "--out", str(d), "--k2", "101"]) == 1
    assert not d.exists()


def test_encrypt_errors(tmp_path):
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P5 4 4 255 \x00")
    out = tmp_path / "c.phk"
    assert main(["encrypt", "--in", str(bad), "--out", str(out), "--k2", "3"]) == 1
    assert main(["encrypt", "--in", str(tmp_path / "missing"), "--out", str(out),
                 "--k2", "3"]) == 1
    assert main(["encrypt", "--in", str(bad), "--k2", "3"]) == 1
    assert not out.exists()
    assert [p.name for p in tmp_path.iterdir()] == ["bad.pgm"]


def test_pipeline_roundtrip(image, tmp_path, capsys):
    report = tmp_path / "r.json"
    dec = tmp_path / "d.pgm"
    assert main(["pipeline", "--in", str(image), "--out", str(report),
                 "--decrypted-out", str(dec), "--verbose"]) == 0
    r = json.loads(report.read_text())
    assert r["common_key_ok"] and r["encryption_key_ok"] and r["roundtrip_ok"]
    assert r["input_sha256"] == r["output_sha256"]
    assert dec.read_bytes() == image.read_bytes()
    lines = capsys.readouterr().err.splitlines()
    heads = [ln.split(" =")[0] for ln in lines[:8]]
    assert heads == ["N", "alpha1", "beta1", "k1", "beta2", "cmk2", "cmk3",
                     "correct common key"]
    assert lines[-2] == "Correct encryption key"
    assert lines[-1].startswith("The scalability factor is ")


def test_pipeline_wrong_common_key(image, tmp_path, capsys):
    out = tmp_path / "out"
    out.mkdir()
    rc = main(["pipeline", "--in", str(image), "--common-key", "12345",
               "--out", str(out / "r.json"), "--cipher-out", str(out / "c.phk")])
    assert rc == 2
    assert "wrong common key" in capsys.readouterr().err
    assert list(out.iterdir()) == []


def test_pipeline_wrong_beta2(image, tmp_path):
    rc = main(["pipeline", "--in", str(image), "--secret-a", "11", "--secret-b", "13",
               "--beta2", "14"])
    assert rc == 2


def test_pipeline_wrong_encryption_key(image, tmp_path, capsys):
    out = tmp_path / "out"
    out.mkdir()
    rc = main(["pipeline", "--in", str(image), "--k2", "1",
               "--out", str(out / "r.json"), "--cipher-out", str(out / "c.phk")])
    assert rc == 3
    assert "wrong encryption key" in capsys.readouterr().err
    assert list(out.iterdir()) == []


def test_gate_ordering(image):
    # encryption-key gate is never reached when the common-key gate fails
    transcript = []
    with pytest.raises(Exception) as e:
        run_pipeline(RunConfig(input=str(image), common_key=1, k2=1), transcript)
    assert e.value.code == 2
    assert not any(line.startswith("k2") for line in transcript)


def test_pipeline_raw(tmp_path):
    src = tmp_path / "m.bin"
    src.write_bytes(bytes(range(256)) * 3 + b"x")
    r = run_pipeline(RunConfig(input=str(src), raw=True, modulus=5392, generator=3,
                               secret_a=8, secret_b=9))
    assert r.roundtrip_ok and r.prime_checked is False
    assert r.unexplained_paper_value == {"k1": r.shared_key + 1}


def test_pipeline_deterministic(image, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["pipeline", "--in", str(image), "--seed", "5", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_ber_csv(tmp_path):
    out = tmp_path / "ber.csv"
    assert main(["ber", "--bits", "20000", "--ebn0", "0,4,inf", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["ebn0_db", "ber", "bits", "errors"]
    assert len(rows) == 4
    assert rows[3] == ["inf", "0", "20000", "0"]
    for _, ber, bits, errors in rows[1:]:
        assert float(ber) == pytest.approx(int(errors) / int(bits), rel=1e-9)


def test_ber_ten_significant_digits(tmp_path):
    out = tmp_path / "ber.csv"
    main(["ber", "--bits", "30001", "--ebn0", "1", "--out", str(out)])
    _, row = read_csv(out)
    assert row[1] == format(int(row[3]) / 30001, ".10g")


def test_phykey_csv(tmp_path):
    out = tmp_path / "pk.csv"
    assert main(["phykey", "--probes", "1000", "--snr", "0,30", "--trials", "3",
                 "--scheme", "both", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["scheme", "snr_db", "kdp", "kgr", "monobit_p"]
    assert [r[:2] for r in rows[1:]] == [["rss", "0"], ["rss", "30"],
                                         ["phase", "0"], ["phase", "30"]]


def test_phykey_single_scheme(tmp_path):
    out = tmp_path / "pk.csv"
    assert main(["phykey", "--probes", "500", "--snr", "10", "--trials", "2",
                 "--scheme", "phase", "--sectors", "8", "--coherence", "5",
                 "--out", str(out)]) == 0
    (_, row) = read_csv(out)
    assert row[0] == "phase" and float(row[3]) == pytest.approx(3 / 5)


def test_phykey_bad_config(tmp_path):
    assert main(["phykey", "--q-plus", "-1", "--q-minus", "1", "--trials", "1"]) == 1


def test_report(image, tmp_path):
    ber = tmp_path / "ber.csv"
    pk = tmp_path / "pk.csv"
    cipher = tmp_path / "c.phk"
    main(["ber", "--bits", "10000", "--ebn0", "0,2,4,6", "--out", str(ber)])
    main(["phykey", "--probes", "500", "--snr", "10", "--trials", "2", "--out", str(pk)])
    main(["encrypt", "--in", str(image), "--out", str(cipher), "--k2", "2"])
    out, summary = tmp_path / "cdf.csv", tmp_path / "s.json"
    assert main(["report", "--ber-csv", str(ber), "--phykey-csv", str(pk),
                 "--symbol-rate", "1e6", "--plain", str(image), "--cipher", str(cipher),
                 "--out", str(out), "--summary", str(summary)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["bitrate", "cdf"]
    assert rows[-1][1] == "1"
    s = json.loads(summary.read_text())
    assert set(s) == {"rows", "phykey_rows", "scalability_factor", "monobit_p"}
    assert s["rows"] == len(rows) - 1 == 4
    assert s["phykey_rows"] == 2
    assert s["scalability_factor"] > 0


def test_report_rejects_wrong_header(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    out = tmp_path / "o.csv"
    assert main(["report", "--ber-csv", str(bad), "--out", str(out)]) == 1
    assert not out.exists()
