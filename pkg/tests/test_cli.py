import json

import numpy as np
import pytest

import inertia_hd as ih
from inertia_hd import cli

QUAD_RUN = """
title = "cli quadratic"

[problem]
kind = "quadratic"
diag = [1.0, 10.0]
start = [1.0, 1.0]

[run]
max_iter = 300

[[method]]
name = "igahd"
alpha = 4.0
beta = 0.5
s = 0.1

[[method]]
name = "fista"
alpha = 4.0
"""

LASSO_RUN = """
[problem]
kind = "lasso"
m = 10
n = 20
sparsity = 3
seed = 0

[run]
max_iter = 50
presolve_factor = 2

[[method]]
name = "igahd_rls"
alpha = 4.0
beta = 0.5
"""


def write_cfg(tmp_path, text, name="exp.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def strip_walltime(report: dict) -> dict:
    for m in report["methods"]:
        m.pop("wall_time_s", None)
    return report


def test_run_quadratic_files_and_report(tmp_path):
    cfg = write_cfg(tmp_path, QUAD_RUN)
    out = tmp_path / "out"
    assert cli.main(["run", str(cfg), "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == [
        "00_igahd_a4_b0.5.csv",
        "01_fista_a4.csv",
        "distance.svg",
        "fgap.svg",
        "report.json",
    ]
    report = json.loads((out / "report.json").read_text())
    assert report["title"] == "cli quadratic"
    assert len(report["config_digest"]) == 64
    igahd, fista = report["methods"]
    assert igahd["name"] == "igahd_a4_b0.5" and fista["method"] == "fista"
    assert igahd["rate_fits"]["f_gap"]["slope"] < -1.0
    assert igahd["condition_report"]["constraints"]["alpha >= 3"] is True
    trace = ih.RunTrace.from_csv(out / "00_igahd_a4_b0.5.csv")
    assert trace.k[0] == 5 and len(trace) == 300


def test_run_is_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, QUAD_RUN)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", str(cfg), "--out", str(out1)]) == 0
    assert cli.main(["run", str(cfg), "--out", str(out2)]) == 0
    for name in ("00_igahd_a4_b0.5.csv", "01_fista_a4.csv", "fgap.svg", "distance.svg"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    r1 = strip_walltime(json.loads((out1 / "report.json").read_text()))
    r2 = strip_walltime(json.loads((out2 / "report.json").read_text()))
    assert r1 == r2


def test_run_seed_override_changes_lasso(tmp_path):
    cfg = write_cfg(tmp_path, LASSO_RUN)
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    assert cli.main(["run", str(cfg), "--out", str(out1), "--seed", "1"]) == 0
    assert cli.main(["run", str(cfg), "--out", str(out2), "--seed", "2"]) == 0
    a = (out1 / "00_igahd_rls_a4_b0.5.csv").read_text()
    b = (out2 / "00_igahd_rls_a4_b0.5.csv").read_text()
    assert a != b


def test_run_max_iter_override(tmp_path):
    cfg = write_cfg(tmp_path, QUAD_RUN)
    out = tmp_path / "short"
    assert cli.main(["run", str(cfg), "--out", str(out), "--max-iter", "7"]) == 0
    trace = ih.RunTrace.from_csv(out / "01_fista_a4.csv")
    assert len(trace) == 7


def test_default_out_dir_next_to_config(tmp_path):
    cfg = write_cfg(tmp_path, QUAD_RUN, name="myexp.toml")
    assert cli.main(["run", str(cfg), "--max-iter", "10"]) == 0
    assert (tmp_path / "myexp_out" / "report.json").exists()


@pytest.mark.parametrize(
    "text",
    [
        "[problem]\nkind = 'quadratic'\ndiag = [1.0]\nwhatever = 3\n[[method]]\nname = 'igahd'\n",
        "[[method]]\nname = 'igahd'\n",  # no problem table
        "[problem]\nkind = 'quadratic'\ndiag = [1.0]\n[[method]]\nname = 'sgd'\n",
        "[problem]\nkind = 'quadratic'\ndiag = [1.0]\n[[method]]\nname = 'igahd'\nbeta = 5.0\ns = 0.1\n",
        "[problem]\nkind = 'quadratic'\ndiag = [1.0]\n[run]\nbogus = 1\n[[method]]\nname = 'igahd'\n",
        "[problem]\nkind = 'lasso'\nm = 5\nn = 10\nsparsity = 2\n[[method]]\nname = 'ipahd'\n",
        "[problem\n",  # broken TOML
    ],
)
def test_run_config_errors(tmp_path, capsys, text):
    cfg = write_cfg(tmp_path, text)
    out = tmp_path / "never"
    assert cli.main(["run", str(cfg), "--out", str(out)]) == 1
    assert "config error" in capsys.readouterr().err
    assert not out.exists()  # validation happens before any output


def test_missing_config_file(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "nope.toml")]) == 1
    assert "config error" in capsys.readouterr().err


def test_negative_max_iter_override(tmp_path, capsys):
    cfg = write_cfg(tmp_path, QUAD_RUN)
    assert cli.main(["run", str(cfg), "--max-iter", "-3"]) == 1
    assert "config error" in capsys.readouterr().err


def test_check_discrete_failure(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        "[check]\nkind = 'discrete'\nalpha = 4.0\nh = 1.0\nbeta = 0.0\nb = 1.0\nk_max = 100\n",
    )
    assert cli.main(["check", str(cfg)]) == 3
    output = capsys.readouterr().out
    assert "FAIL: G2 first violated at 1" in output
    # check is read-only: nothing besides the config in the directory
    assert [p.name for p in tmp_path.iterdir()] == ["exp.toml"]


def test_check_continuous_pass(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        "[check]\nkind = 'continuous'\nschedule = 'corrected_b'\nalpha = 4.0\nbeta = 1.0\n",
    )
    assert cli.main(["check", str(cfg)]) == 0
    output = capsys.readouterr().out
    assert "all conditions hold on the grid" in output
    assert "C1: holds" in output


def test_check_epsilon_out_of_range(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        "[check]\nkind = 'continuous'\nschedule = 'corrected_b'\nalpha = 4.0\nbeta = 1.0\nepsilon = 9.0\n",
    )
    assert cli.main(["check", str(cfg)]) == 1


def test_ode_outputs(tmp_path):
    cfg = write_cfg(
        tmp_path,
        """
[problem]
kind = "quadratic"
diag = [1.0, 10.0]

[ode]
schedule = "constant_beta"
alpha = 4.0
beta = 1.0
t_end = 50.0
x0 = [1.0, 1.0]
""",
    )
    out = tmp_path / "ode_out"
    assert cli.main(["ode", str(cfg), "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["fgap_t.svg", "report.json", "trajectory.csv"]
    report = json.loads((out / "report.json").read_text())
    fit = report["methods"][0]["rate_fits"]["f_gap"]
    assert fit is not None and fit["slope"] < -1.0
    traj = ih.TrajectoryTrace.from_csv(out / "trajectory.csv")
    assert traj.t[0] == pytest.approx(1.0) and traj.t[-1] == pytest.approx(50.0)


def test_ode_requires_quadratic(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        "[problem]\nkind = 'lasso'\nm = 5\nn = 10\nsparsity = 2\n\n[ode]\nalpha = 4.0\n",
    )
    assert cli.main(["ode", str(cfg)]) == 1


def test_ode_numeric_failure_exit_code(tmp_path, capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise ih.NumericError("integration blew up")

    monkeypatch.setattr(cli, "integrate_trajectory", boom)
    cfg = write_cfg(
        tmp_path,
        "[problem]\nkind = 'quadratic'\ndiag = [1.0]\n\n[ode]\nalpha = 4.0\nbeta = 1.0\n",
    )
    assert cli.main(["ode", str(cfg)]) == 2
    assert "numeric failure" in capsys.readouterr().err


def test_sweep_grid(tmp_path):
    cfg = write_cfg(
        tmp_path,
        """
[problem]
kind = "quadratic"
diag = [1.0, 10.0]
start = [1.0, 1.0]

[run]
max_iter = 60

[sweep]
method = "igahd"
alpha = [4.0, 6.0]
beta = [0.0, 0.5]
s = 0.1
""",
    )
    out = tmp_path / "sweep_out"
    assert cli.main(["sweep", str(cfg), "--out", str(out)]) == 0
    csvs = sorted(p.name for p in out.glob("*.csv"))
    assert csvs == [
        "00_igahd_a4_b0.csv",
        "01_igahd_a4_b0.5.csv",
        "02_igahd_a6_b0.csv",
        "03_igahd_a6_b0.5.csv",
    ]
    report = json.loads((out / "report.json").read_text())
    assert len(report["methods"]) == 4
    alphas = {m["params"]["alpha"] for m in report["methods"]}
    assert alphas == {4.0, 6.0}


def test_sweep_requires_tables(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[problem]\nkind = 'quadratic'\ndiag = [1.0]\n")
    assert cli.main(["sweep", str(cfg)]) == 1
    cfg2 = write_cfg(
        tmp_path,
        "[sweep]\nmethod = 'igahd'\nalpha = [4.0]\nbeta = []\n",
        name="exp2.toml",
    )
    assert cli.main(["sweep", str(cfg2)]) == 1
