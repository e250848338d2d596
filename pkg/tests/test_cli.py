import json
import subprocess
import sys

import pytest

from heiscarleson.cli import ConfigError, eval_number, read_config, resolve, run


def _summaries(path):
    return [r for r in map(json.loads, path.read_text().splitlines()) if r["type"] == "summary"]


def test_exit_zero_on_pass(tmp_path):
    out = tmp_path / "o.jsonl"
    assert run(["identities", "--seed", "3", "--samples", "2000", "--out", str(out)]) == 0
    s = _summaries(out)
    assert [r["check"] for r in s] == ["identities", "radial_curves"]
    assert all(r["passed"] and r["seed"] == 3 for r in s)


def test_exit_one_on_failed_check(tmp_path):
    assert run(["conformal", "--seed", "0", "--samples", "50", "--tol", "1e-14", "--out", str(tmp_path / "o")]) == 1


@pytest.mark.parametrize("argv", [
    ["identities"],  # stochastic without a seed
    ["bogus", "--seed", "1"],
    ["identities", "--seed", "1", "--nope", "3"],
    ["identities", "--seed", "-1"],
    ["thm12", "--seed", "1", "--measure", "other"],
    ["thm12", "--seed", "1", "--radius", "2"],  # unit ball only
])
def test_exit_two_on_bad_config(argv, capsys):
    assert run(argv) == 2
    assert "error" in capsys.readouterr().err


def test_deterministic_commands_need_no_seed():
    rc = resolve(["solve"])
    assert rc.seed is None and rc.command == "solve"


def test_eval_number():
    assert eval_number("1/64") == 1 / 64
    assert eval_number("0.25") == 0.25
    with pytest.raises(ValueError):
        eval_number("__import__('os')")


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# a comment\nseed = 5\ngrid-h = 1/48\nwalks = 123  # trailing\nradii = 0.25, 0.125\n\n")
    assert read_config(str(cfg)) == {"seed": 5, "grid_h": 1 / 48, "walks": 123, "radii": (0.25, 0.125)}
    rc = resolve(["walk", "--config", str(cfg), "--walks", "50"])
    assert rc.seed == 5 and rc.grid_h == 1 / 48 and rc.walks == 50 and rc.workers == 1


def test_config_file_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("seed = 1\ncolour = blue\n")
    with pytest.raises(ConfigError):
        read_config(str(cfg))
    assert run(["identities", "--config", str(cfg)]) == 2


def test_thm12_bytes_identical_across_workers(tmp_path):
    outs = []
    for w in ("1", "2"):
        p = tmp_path / f"w{w}.jsonl"
        run(["thm12", "--seed", "4", "--configs", "4", "--samples", "400", "--workers", w, "--out", str(p)])
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_energy_output_fields(tmp_path):
    out = tmp_path / "e.jsonl"
    code = run(["energy", "--seed", "2", "--grid-h", "1/16", "--walks", "2000", "--out", str(out)])
    assert code in (0, 1)
    (s,) = _summaries(out)
    assert {"lhs", "rhs", "ratio"} <= set(s)
    assert s["seed"] == 2


def test_csv_output(tmp_path):
    csv = tmp_path / "r.csv"
    assert run(["domain-probe", "--seed", "1", "--samples", "4", "--out", str(tmp_path / "o"), "--csv", str(csv)]) == 0
    lines = csv.read_text().splitlines()
    assert len(lines) == 5


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "heiscarleson", "identities", "--seed", "1", "--samples", "500"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert all(json.loads(line)["type"] in ("record", "summary") for line in r.stdout.splitlines())
