import json

import pytest

from gaussbath.cli import main


def test_validate_ok(tiny_config, capsys):
    assert main(["validate", str(tiny_config())]) == 0
    assert "ok" in capsys.readouterr().out


def test_validate_bad(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('[model]\nkind = "cavity"\n')
    assert main(["validate", str(bad)]) == 2
    assert "invalid input" in capsys.readouterr().err


def test_validate_missing_file(tmp_path):
    assert main(["validate", str(tmp_path / "nope.toml")]) == 4


def test_run_writes_outputs(tiny_config, tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(tiny_config()), "--out-dir", str(out)]) == 0
    assert {p.name for p in out.iterdir()} == {"tiny.csv", "tiny.json", "tiny.png"}


def test_run_overrides_and_no_plot(tiny_config, tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(tiny_config()), "--out-dir", str(out), "--dt", "5e-4", "--samples", "6", "--no-plot"]) == 0
    meta = json.loads((out / "tiny.json").read_text())
    assert meta["overrides"] == {"dt": 5e-4, "samples": 6}
    assert not (out / "tiny.png").exists()


def test_run_bad_override(tiny_config, tmp_path):
    assert main(["run", str(tiny_config()), "--out-dir", str(tmp_path), "--samples", "7"]) == 2


def test_failed_gate_exit_code(tiny_config, tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(tiny_config(dt=5e-3)), "--out-dir", str(out), "--no-plot"]) == 3
    assert (out / "tiny.csv").exists()


def test_numerical_abort_exit_code(tiny_config, tmp_path):
    assert main(["run", str(tiny_config(dt=0.1)), "--out-dir", str(tmp_path), "--no-plot"]) == 3


def test_unwritable_out_dir(tiny_config, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", str(tiny_config()), "--out-dir", str(blocker), "--no-plot"]) == 4


def test_env_out_dir(tiny_config, tmp_path, monkeypatch):
    monkeypatch.setenv("GAUSSBATH_OUT_DIR", str(tmp_path / "env"))
    assert main(["run", str(tiny_config()), "--no-plot"]) == 0
    assert (tmp_path / "env" / "tiny.csv").exists()


def test_parallel_jobs(tiny_config, tmp_path):
    a = tiny_config(name="a.toml")
    b = tiny_config(coupling=0.1, name="b.toml")
    out = tmp_path / "out"
    assert main(["run", str(a), str(b), "--jobs", "2", "--out-dir", str(out), "--no-plot"]) == 0
    # both configs carry run name "tiny"; the second overwrites the first, so
    # only check that something was written
    assert (out / "tiny.csv").exists()


def test_oracle_command(tiny_oracle_config, tmp_path, capsys):
    assert main(["oracle", str(tiny_oracle_config), "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "tiny_oracle_oracle.csv").exists()
    assert "max |gaussian - fock|" in capsys.readouterr().out


def test_preset_choices():
    with pytest.raises(SystemExit):
        main(["preset", "fig7"])
