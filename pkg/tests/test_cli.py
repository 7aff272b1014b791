import json
import subprocess
import sys

import pytest

from besicovitch.cli import main
from besicovitch.config import DEFAULTS, ConfigError, read_config


def run(tmp_path, *args, config=None):
    argv = list(args) + ["--output", str(tmp_path / "out")]
    if config is not None:
        path = tmp_path / "run.ini"
        path.write_text(config)
        argv += ["--config", str(path)]
    return main(argv)


def summary(tmp_path):
    return json.loads((tmp_path / "out" / "summary.json").read_text())


def test_kappa_of_the_example(tmp_path, capsys):
    assert run(tmp_path, "kappa") == 0
    assert capsys.readouterr().out.strip() == "0.666667"
    doc = summary(tmp_path)
    assert doc["results"]["kappa"] == pytest.approx(2 / 3, abs=1e-12)


def test_kappa_violation(tmp_path):
    assert run(tmp_path, "kappa", "--set", "kappa.L1=1", "--set", "kappa.L2=1") == 2
    assert summary(tmp_path)["results"]["kappa"] == 2.0


def test_malformed_expression(tmp_path, capsys):
    assert run(tmp_path, "seminorm", "--set", "function.expr=(+ (sin 1 0) (cos x 0))") == 1
    assert "line 1, column 19" in capsys.readouterr().err


@pytest.mark.parametrize(
    "config",
    ["[nonsense]\nkey = 1\n", "[kappa]\nnope = 1\n", "[kappa]\nL1 = one sixth\n", "no section header\n"],
)
def test_bad_config_files(tmp_path, config):
    assert run(tmp_path, "kappa", config=config) == 1


def test_missing_config_file(tmp_path):
    assert main(["kappa", "--config", str(tmp_path / "absent.ini")]) == 1


def test_bad_flag_is_a_config_error(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["kappa", "--seed", "many"])
    assert info.value.code == 1


def test_unstable_spectrum(tmp_path):
    assert run(tmp_path, "solve", "--set", "system.eigenvalues=-1, 0.5") == 2


def test_non_convergence_writes_trace(tmp_path):
    config = """
[system]
eigenvalues = -1
F = (+ (cos 1 0) (scale 0.3 (sinof (u 0))))
L1 = 0.3
[solve]
t_max = 10
max_iter = 2
tol = 1e-14
"""
    assert run(tmp_path, "solve", config=config) == 3
    lines = (tmp_path / "out" / "residuals.csv").read_text().splitlines()
    assert lines[0] == "iteration,residual,ratio" and len(lines) == 3
    assert summary(tmp_path)["status"] == "non-convergence"


def test_solve_closed_form(tmp_path):
    assert run(tmp_path, "solve", "--set", "solve.t_max=20") == 0
    res = summary(tmp_path)["results"]
    assert res["converged"] and res["iterations"] == 2 and res["apriori_satisfied"]
    assert not res["vanishes_at_zero"]
    header = (tmp_path / "out" / "solution.csv").read_text().splitlines()[0]
    assert header == "t,x0"


def test_summary_embeds_resolved_config(tmp_path):
    assert run(tmp_path, "seminorm", "--set", "seminorm.n_sweeps=3", "--set", "seminorm.frequencies=1") == 0
    doc = summary(tmp_path)
    assert list(doc) == ["command", "status", "config", "results"]
    assert list(doc["config"]) == list(DEFAULTS)
    for section in DEFAULTS:
        assert list(doc["config"][section]) == list(DEFAULTS[section])
    assert doc["config"]["seminorm"]["n_sweeps"] == "3"
    assert doc["results"]["coefficients"][0]["value"]["im"] == pytest.approx(-0.5, abs=1e-3)


def test_translations_command(tmp_path):
    assert run(tmp_path, "translations", "--set", "translations.scan_max=8", "--set", "translations.scan_step=0.05") == 0
    res = summary(tmp_path)["results"]
    assert res["n_accepted"] >= 1
    assert (tmp_path / "out" / "scan_curve.csv").read_text().startswith("tau,distance\n")


def _outputs(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}


@pytest.mark.parametrize(
    "args",
    [
        ["bochner", "--set", "bochner.n_shifts=15", "--seed", "7"],
        ["contraction", "--set", "contraction.n_pairs=3", "--set", "solve.t_max=10", "--set", "solve.history_horizon=8"],
    ],
    ids=["bochner", "contraction"],
)
def test_determinism(tmp_path, monkeypatch, args):
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        d.mkdir()
        monkeypatch.chdir(d)
        assert main(args + ["--output", "out", "--threads", "2" if name == "b" else "1"]) == 0
        outs.append(_outputs(d / "out"))
    a, b = outs
    assert a.keys() == b.keys()
    for key in a:
        if key == "summary.json":
            ja, jb = json.loads(a[key]), json.loads(b[key])
            ja["config"]["run"].pop("threads"), jb["config"]["run"].pop("threads")
            assert ja == jb
        else:
            assert a[key] == b[key]


def test_seed_changes_random_draws(tmp_path):
    assert run(tmp_path, "bochner", "--set", "bochner.n_shifts=5", "--seed", "1") == 0
    first = summary(tmp_path)["results"]["shifts"]
    assert run(tmp_path, "bochner", "--set", "bochner.n_shifts=5", "--seed", "2") == 0
    assert summary(tmp_path)["results"]["shifts"] != first


def test_contraction_command(tmp_path):
    args = ["contraction", "--set", "contraction.n_pairs=4", "--set", "solve.t_max=20",
            "--set", "solve.history_horizon=10", "--set", "example.K=4"]
    assert run(tmp_path, *args) == 0
    res = summary(tmp_path)["results"]
    assert res["within_kappa"] and len(res["ratios"]) == 4


def test_example_command_short(tmp_path):
    args = ["example", "--set", "example.t_max=120", "--set", "example.history_horizon=20",
            "--set", "example.scan_max=20", "--set", "example.scan_step=0.5", "--set", "example.K=4"]
    assert run(tmp_path, *args) == 0
    res = summary(tmp_path)["results"]
    assert res["constants"] == {"N": 1.0, "lambda": 1.0, "L1": 1 / 6, "L2": 1 / 2, "kappa": 2 / 3, "tau_bar": 4.0}
    assert res["translations"]["accepted"] >= 1
    names = {p.name for p in (tmp_path / "out").iterdir()}
    assert names == {"summary.json", "residuals.csv", "solution.csv", "translations.json", "scan_curve.csv"}


def test_read_config_fractions_and_auto(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[kappa]\nL1 = 1/6   # comment\n[seminorm]\nquad_step = auto\n")
    typed, raw = read_config(path)
    assert typed["kappa"]["L1"] == 1 / 6
    assert typed["seminorm"]["quad_step"] is None
    with pytest.raises(ConfigError):
        read_config(None, ["kappa.L1"])


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "besicovitch", "kappa", "--output", str(tmp_path / "o")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and proc.stdout.strip() == "0.666667"
