import csv
import io
import json

import pytest

from hyperc2pf.cli import fmt, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_truth_table_passes(capsys):
    code, out, err = run_cli(capsys, "truth-table")
    lines = out.strip().splitlines()
    assert code == 0
    assert len(lines) == 65
    assert lines[-1].startswith("PASS")
    assert err == ""


def test_scan_reflection_cold_cavity(capsys):
    code, out, _ = run_cli(capsys, "scan-reflection", "--g", "0", "--kappa", "1", "--gamma", "0.1", "--detuning-range", "0", "0", "--points", "1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["re_r"] == "-1" and rows[0]["im_r"] == "0"


def test_scan_reflection_grid(capsys):
    code, out, _ = run_cli(capsys, "scan-reflection", "--g", "1", "--kappa", "1", "--gamma", "0.5", "--detuning-range", "-2", "2", "--points", "5")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 5
    assert all(float(r["abs_r"]) <= 1 + 1e-12 for r in rows)


def test_sweep_csv(capsys, tmp_path):
    out_file = tmp_path / "s.csv"
    svg = tmp_path / "s.svg"
    code, _, _ = run_cli(capsys, "sweep", "--xmin", "0.5", "--xmax", "5", "--points", "3", "--samples", "2000", "--seed", "1", "--out", str(out_file), "--svg", str(svg))
    assert code == 0
    raw = out_file.read_bytes()
    assert b"\r" not in raw
    rows = list(csv.DictReader(io.StringIO(raw.decode())))
    assert len(rows) == 3
    assert rows[0]["eta_closed"] == fmt(11011 / 131072)
    assert rows[0]["eta_closed"].startswith("0.084007")
    assert svg.read_text().startswith("<svg")


def test_sweep_quad_sampler(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--xmin", "1", "--xmax", "2", "--points", "2", "--sampler", "quad", "--samples", "3")
    assert code == 0
    assert len(out.strip().splitlines()) == 3


@pytest.mark.parametrize(
    "argv",
    [
        ("sweep", "--xmin", "0.2"),
        ("sweep", "--xmin", "2", "--xmax", "1"),
        ("sweep", "--points", "0"),
        ("scan-reflection", "--g", "1", "--kappa", "0", "--gamma", "1"),
        ("simulate", "--input", "angles=1,2"),
        ("simulate", "--input", "basis=a:R:a1"),
        ("simulate", "--input", "nonsense"),
        ("simulate", "--input", "angles=0,0,0,0,0,0", "--pair", "r=2"),
        ("simulate", "--input", "angles=0,0,0,0,0,0", "--branch", "fixed=+"),
        ("simulate", "--input", "angles=0,0,0,0,0,0", "--branch", "sample=x"),
        ("simulate", "--input", "angles=0,0,0,0,0,0", "--netlist", "/nonexistent.net"),
        ("bogus",),
        (),
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == 2
    assert err.startswith("error: ") and err.count("\n") == 1


def test_sweep_requires_seed_in_ci(capsys, monkeypatch):
    monkeypatch.setenv("CI", "1")
    code, _, err = run_cli(capsys, "sweep", "--points", "1", "--xmin", "1", "--xmax", "1")
    assert code == 2 and "--seed" in err


def test_netlist_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.net"
    bad.write_text("photon a spatial (a1, a2)\nnv 1 init plus\nNV 2 a direct\n")
    code, _, err = run_cli(capsys, "simulate", "--netlist", str(bad), "--input", "angles=1,2")
    assert code == 2
    assert err == "error: line 3, column 4: undeclared NV '2'\n"


def test_simulate_ideal_with_checkpoints(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "simulate", "--input", "basis=a:L:a2,b:L:b2,c:L:c2", "--branch", "fixed=+,-,+,-", "--dump-checkpoints", str(tmp_path))
    assert code == 0
    report = json.loads(out)
    (branch,) = report["branches"]
    assert branch["probability"] == pytest.approx(1 / 16)
    amps = branch["photonic"]["amplitudes"]
    assert len(amps) == 1 and amps[0][0] == [1, 1, 1, 1, 1, 1]
    assert sorted(p.name for p in tmp_path.iterdir()) == [f"step_{k}.json" for k in range(1, 9)]
    snap = json.loads((tmp_path / "step_8.json").read_text())
    assert [a["name"] for a in snap["axes"]][:2] == ["pol_a", "spat_a"]


def test_simulate_enumerate_and_sample(capsys):
    code, out, _ = run_cli(capsys, "simulate", "--input", "angles=0.1,0.2,0.3,0.4,0.5,0.6", "--pair", "x=2")
    assert code == 0 and len(json.loads(out)["branches"]) == 16
    code, out, _ = run_cli(capsys, "simulate", "--input", "angles=0.1,0.2,0.3,0.4,0.5,0.6", "--branch", "sample=4", "--pair", "r=0.5,0.1,r0=-1,0")
    assert code == 0 and len(json.loads(out)["branches"]) == 1


def test_simulate_total_loss_exit_1(capsys):
    code, _, err = run_cli(capsys, "simulate", "--input", "basis=a:R:a1,b:R:b1,c:R:c1", "--pair", "r=0,0,r0=0,0")
    assert code == 1 and err.startswith("error: ")


def test_simulate_netlist_without_measurements(capsys, tmp_path):
    net = tmp_path / "one.net"
    net.write_text("photon a spatial (a1, a2)\nnv 1 init plus\nNV 1 a both\n")
    code, out, _ = run_cli(capsys, "simulate", "--netlist", str(net), "--input", "basis=a:L:a1")
    report = json.loads(out)
    assert code == 0 and "state" in report
    # L with spin + is uncoupled: reflects with -1
    assert report["state"]["amplitudes"] == [[[1, 0, 0], -1.0, 0.0]]


def test_fmt():
    assert fmt(-0.0) == "0"
    assert fmt(1 / 3) == "0.333333333333"
