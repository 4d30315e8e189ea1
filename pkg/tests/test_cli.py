import csv

import pytest

from spde2d.cli import main
from spde2d.phi import phi

SMALL = "N = 100\nM1 = 40\nM2 = 40\nL1 = 16\nL2 = 16\nm1 = 6\nn = 10\nreps = 2\n"


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "small.cfg"
    p.write_text(SMALL)
    return p


def test_simulate_then_fit(tmp_path, cfg_path, capsys):
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out), "--seed", "5"]) == 0
    assert (out / "field.bin").exists()
    assert main(["fit-coeff", "--config", str(cfg_path), "--field", str(out / "field.bin")]) == 0
    text = capsys.readouterr().out
    assert "theta2_hat = " in text and "flagged = " in text
    assert main(["fit-reaction", "--config", str(cfg_path), "--field", str(out / "field.bin")]) == 0
    assert "theta0_hat = " in capsys.readouterr().out


def test_simulate_csv_matches_binary(tmp_path, cfg_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["simulate", "--config", str(cfg_path), "--out", str(a)])
    main(["simulate", "--config", str(cfg_path), "--out", str(b), "--format", "csv"])
    capsys.readouterr()
    main(["fit-coeff", "--config", str(cfg_path), "--field", str(a / "field.bin")])
    main(["fit-coeff", "--config", str(cfg_path), "--field", str(b / "field.csv")])
    first, second = capsys.readouterr().out.split("flagged")[:2]
    assert first.strip() == second.split("\n", 1)[1].strip()


def test_mc_writes_artifacts(tmp_path, cfg_path, capsys):
    out = tmp_path / "mc"
    assert main(["mc", "--config", str(cfg_path), "--reps", "2", "--threads", "2", "--out", str(out)]) == 0
    with open(out / "replications.csv", newline="") as fh:
        assert len(list(csv.DictReader(fh))) == 2
    assert (out / "summary.csv").exists() and (out / "conditions.txt").exists()
    assert "theta2_hat" in capsys.readouterr().out


def test_phi_table(tmp_path):
    out = tmp_path / "phi.csv"
    assert main(["phi", "--r", "1.8974", "--theta2-min", "0.1", "--theta2-max", "0.5", "--points", "3",
                 "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "theta2,phi" and len(rows) == 4
    t, v = (float(s) for s in rows[2].split(","))
    assert t == pytest.approx(0.3) and v == phi(1.8974, 0.5, t)


def test_check_conditions(capsys, tmp_path):
    assert main(["check-conditions", "--out", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    assert "C3" in text and "rate R = " in text
    assert (tmp_path / "conditions.txt").read_text() == text


def test_invalid_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("b = 0.07\n")
    assert main(["check-conditions", "--config", str(bad)]) == 2
    bad.write_text("nonsense = 1\n")
    assert main(["mc", "--config", str(bad)]) == 2
    assert main(["mc", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert "invalid configuration" in capsys.readouterr().err


def test_all_replications_failing_exit_code(cfg_path, tmp_path, monkeypatch):
    import spde2d.harness as harness
    from spde2d.errors import DegenerateDataError

    def boom(*a, **k):
        raise DegenerateDataError("no signal")

    monkeypatch.setattr(harness, "fit_coeff", boom)
    assert main(["mc", "--config", str(cfg_path), "--out", str(tmp_path / "x")]) == 3


def test_grid_mismatch_is_config_error(tmp_path, cfg_path):
    main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path)])
    other = tmp_path / "other.cfg"
    other.write_text(SMALL.replace("N = 100", "N = 200"))
    assert main(["fit-coeff", "--config", str(other), "--field", str(tmp_path / "field.bin")]) == 2
