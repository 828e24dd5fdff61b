from __future__ import annotations

import csv
import io
import math
import subprocess
import sys

import pytest

from entconc.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_fig1_schema_and_examples(capsys):
    code, out, _ = run(["fig1"], capsys)
    assert code == 0
    table = rows(out)
    assert list(table[0]) == ["cos2theta", "method", "yield_per_pair"]
    assert len(table) == 99 * 6
    half = {r["method"]: float(r["yield_per_pair"]) for r in table if r["cos2theta"] == "0.5"}
    assert half["asymptotic"] == 1.0 and half["procrustean"] == 1.0
    assert half["schmidt(2)"] == pytest.approx(0.25)
    assert half["schmidt(4)"] == pytest.approx(0.49234, abs=1e-5)


def test_fig1_custom_n(capsys):
    code, out, _ = run(["fig1", "--grid-points", "3", "--n", "16"], capsys)
    assert code == 0
    assert {r["method"] for r in rows(out)} == {"asymptotic", "schmidt(16)", "procrustean"}
    assert [r["cos2theta"] for r in rows(out)][::3] == ["0.25", "0.5", "0.75"]


def test_concentrate_summary_row(capsys):
    code, out, _ = run(["concentrate", "--cos2", "0.75", "--n", "8", "--trials", "20", "--seed", "4"],
                       capsys)
    assert code == 0
    table = rows(out)
    assert len(table) == 21
    assert table[-1]["status"] == "summary" and table[-1]["trial"] == "summary"
    rates = [float(r["yield_rate"]) for r in table[:-1]]
    assert float(table[-1]["yield_rate"]) == pytest.approx(sum(rates) / len(rates))
    assert all(r["status"] in ("success", "failure") for r in table[:-1])


def test_concentrate_replay_file(tmp_path, capsys):
    ks = tmp_path / "k.txt"
    ks.write_text("1\n1\n1\n")
    code, out, _ = run(["concentrate", "--n", "2", "--k-file", str(ks)], capsys)
    assert code == 0
    (row,) = rows(out)
    assert row["ell"] == "1" and row["m"] == "1" and row["status"] == "success"


def test_qdc_columns(capsys):
    code, out, _ = run(["qdc", "--theta", repr(math.pi / 6), "--n", "4", "8", "--delta", "0.1"],
                       capsys)
    assert code == 0
    table = rows(out)
    assert list(table[0]) == ["theta", "n", "delta", "retained_dim", "retained_mass", "fidelity",
                              "max_ent_fidelity", "overlap"]
    assert float(table[1]["fidelity"]) == pytest.approx(0.7967176912352447, abs=1e-12)


def test_dilute_demo(capsys):
    code, out, _ = run(["dilute", "--cos2", "0.9", "--n", "10", "--delta", "0.25", "--seed", "3"],
                       capsys)
    assert code == 0
    (row,) = rows(out)
    assert row["singlets"] == "8" and row["cbits"] == "16"


def test_dilute_singlet_target(capsys):
    code, out, _ = run(["dilute", "--cos2", "0.5", "--n", "1"], capsys)
    assert code == 0 and rows(out)[0]["singlets"] == "1"


@pytest.mark.parametrize("argv", [
    ["concentrate", "--epsilon", "0"],
    ["concentrate", "--n", "4", "8"],
    ["concentrate", "--trials", "0"],
    ["qdc", "--cos2", "1.5"],
    ["qdc", "--theta", "2.0"],
    ["qdc", "--delta", "-1"],
    ["dilute", "--n", "0"],
    ["fig1", "--grid-points", "0"],
    ["concentrate", "--k-file", "/nonexistent/k.txt"],
])
def test_validation_errors_exit_2(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2 and out == "" and "error" in err


def test_conflicting_angle_flags_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["qdc", "--theta", "0.5", "--cos2", "0.5"])
    assert exc.value.code == 2


def test_unwritable_output_exit_2(tmp_path, capsys):
    code, _, err = run(["fig1", "--out", str(tmp_path / "missing" / "f.csv")], capsys)
    assert code == 2 and "cannot write" in err


def test_out_file(tmp_path, capsys):
    target = tmp_path / "q.csv"
    assert main(["qdc", "--n", "4", "--out", str(target)]) == 0
    assert target.read_text().startswith("theta,n,delta")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "entconc", "fig1", "--grid-points", "1"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[0] == "cos2theta,method,yield_per_pair"
