import subprocess
import sys

import pytest

from algproof.cli import main
from algproof.experiment import CSV_HEADER, read_csv
from algproof.formats import read_pcr, read_sos
from algproof.pcr import pcr_metrics
from algproof.sos import sos_metrics


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("kind", ["pcr", "sos"])
def test_gen_verify_metrics(tmp_path, capsys, kind):
    path = tmp_path / f"q3.{kind}"
    assert run(capsys, "gen", "proof", "--system", "qn", "--n", 3, "--kind", kind, "-o", path)[0] == 0
    assert (tmp_path / "q3.system").exists()
    code, out, _ = run(capsys, "verify", kind, path)
    assert code == 0 and out.strip() == "ok"
    code, out, _ = run(capsys, "metrics", kind, path)
    assert code == 0
    assert "degree: 2" in out
    assert "max_coeff_bits: 9" in out
    code, out, _ = run(capsys, "metrics", kind, path, "--csv")
    assert code == 0
    header, values = out.strip().splitlines()
    assert header.split(",")[0] == "degree" and values.split(",")[0] == "2"


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_round_trip_preserves_metrics(tmp_path, capsys, n):
    from algproof.families import generate_qn_pcr_refutation, generate_qn_sos_refutation
    run(capsys, "gen", "proof", "--n", n, "--kind", "pcr", "-o", tmp_path / "p.pcr")
    run(capsys, "gen", "proof", "--n", n, "--kind", "sos", "-o", tmp_path / "s.sos")
    assert pcr_metrics(read_pcr(tmp_path / "p.pcr")) == pcr_metrics(generate_qn_pcr_refutation(n))
    assert sos_metrics(read_sos(tmp_path / "s.sos")) == sos_metrics(generate_qn_sos_refutation(n))


def test_gen_is_byte_identical(tmp_path, capsys):
    for name in ("a", "b"):
        (tmp_path / name).mkdir()
        run(capsys, "gen", "proof", "--n", 3, "--kind", "pcr", "-o", tmp_path / name / "q.pcr")
        run(capsys, "gen", "system", "--family", "knapsack", "--vars", 4, "--k", "9/4", "-o",
            tmp_path / name / "k.system")
    for f in ("q.pcr", "q.system", "k.system"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_corrupted_certificate_exits_1_with_residual(tmp_path, capsys):
    path = tmp_path / "q2.sos"
    run(capsys, "gen", "proof", "--n", 2, "--kind", "sos", "-o", path)
    text = path.read_text().replace("8 | x[1,1]", "9 | x[1,1]", 1)
    path.write_text(text)
    code, out, _ = run(capsys, "verify", "sos", path)
    assert code == 1
    assert "residual:" in out
    code, out, _ = run(capsys, "metrics", "sos", path)
    assert code == 1


def test_corrupted_proof_reports_line(tmp_path, capsys):
    path = tmp_path / "q1.pcr"
    run(capsys, "gen", "proof", "--n", "1", "--kind", "pcr", "-o", path)
    lines = path.read_text().splitlines()
    i = next(k for k, l in enumerate(lines) if "| LIFT" in l)
    idx, rule, poly = lines[i].split(" | ")
    lines[i] = " | ".join([idx, rule, poly + " + 1"])
    path.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "verify", "pcr", path)
    assert code == 1
    assert f"line {idx.strip()}" in out


def test_bounded(tmp_path, capsys):
    path = tmp_path / "q2.pcr"
    run(capsys, "gen", "proof", "--n", 2, "--kind", "pcr", "-o", path)
    assert run(capsys, "bounded", "pcr", path, "--R", 16)[0] == 0
    assert run(capsys, "bounded", "pcr", path, "--R", 15)[0] == 1
    assert run(capsys, "bounded", "pcr", path, "--R", 0)[0] == 2


def test_usage_errors(tmp_path, capsys):
    assert run(capsys, "verify", "pcr", tmp_path / "missing.pcr")[0] == 2
    assert run(capsys, "gen", "proof", "--n", 2, "-o", tmp_path / "x")[0] == 2
    assert run(capsys, "pe", "check")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    bad = tmp_path / "bad.pcr"
    bad.write_text("system: none\npairs: 1\n---\n1 | FOO | x[1]\n")
    assert run(capsys, "verify", "pcr", bad)[0] == 2


def test_experiment_csv(tmp_path, capsys):
    out = tmp_path / "growth.csv"
    assert run(capsys, "experiment", "--n-max", 3, "-o", out)[0] == 0
    rows = read_csv(out)
    assert len(rows) == 6
    assert list(rows[0]) == CSV_HEADER
    assert all(r["verify_ok"] == "true" for r in rows)
    assert [int(r["max_coeff_bits"]) for r in rows] == [3, 3, 5, 5, 9, 9]
    assert run(capsys, "experiment", "--n-max", 5, "-o", out)[0] == 2


def test_bit_cap_aborts(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("WORKBENCH_MAX_BITS", "8")
    code, _, err = run(capsys, "gen", "proof", "--n", 3, "--kind", "pcr", "-o", tmp_path / "q.pcr")
    assert code == 1
    assert "aborted" in err


def test_pe_commands(tmp_path, capsys):
    code, out, _ = run(capsys, "pe", "check", "--vars", 4, "--k", "9/4", "--degree", 2)
    assert code == 0 and out.strip().endswith("ok")
    code, out, _ = run(capsys, "pe", "check", "--vars", 2, "--k", "3/2", "--degree", 2)
    assert code == 1 and "FAILED" in out

    S = tmp_path / "S.txt"
    S.write_text("grid: 2 4\n1\n" + "\n".join(f"x[{i},{j}]" for i in (1, 2) for j in range(1, 5)) + "\n")
    assert run(capsys, "pe", "product", "--n", 2, "--monomials", S)[0] == 0

    M = tmp_path / "m.txt"
    M.write_text("2\n1 1/2\n1/2 1\n")
    assert run(capsys, "pe", "psd", "--matrix", M)[:2] == (0, "psd\n")
    M.write_text("2\n0 1\n1 0\n")
    assert run(capsys, "pe", "psd", "--matrix", M)[0] == 1
    M.write_text("2\n0 1\n1\n")
    assert run(capsys, "pe", "psd", "--matrix", M)[0] == 2


def test_bound_cert(tmp_path, capsys):
    S = tmp_path / "S.txt"
    S.write_text("pairs: 2\n1\nx[1]\nx[2]\n")
    out = tmp_path / "c.sos"
    code, _, err = run(capsys, "bound-cert", "--poly", "3*x[1]*x[2] - x[1]", "--monomials", S, "-o", out)
    assert code == 0
    assert "r = 3" in err
    assert run(capsys, "verify", "sos", out)[0] == 0
    assert run(capsys, "bound-cert", "--poly", "x[1]*x[2]", "--monomials", S, "-o", out)[0] == 0
    S.write_text("pairs: 3\n1\nx[1]\n")
    assert run(capsys, "bound-cert", "--poly", "x[2]", "--monomials", S)[0] == 2


def test_module_entry_point(tmp_path):
    path = tmp_path / "q.sos"
    subprocess.run([sys.executable, "-m", "algproof", "gen", "proof", "--n", "1", "--kind", "sos",
                    "-o", str(path)], check=True)
    res = subprocess.run([sys.executable, "-m", "algproof", "verify", "sos", str(path)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "ok"
