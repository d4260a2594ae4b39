import io
import math
import subprocess
import sys

import numpy as np
import pytest

from rdarnoldi.cli import main
from rdarnoldi.errors import ConfigError
from rdarnoldi.experiments import (
    ExperimentConfig,
    read_csv,
    run_convergence_experiment,
    run_residual_experiment,
    run_window_experiment,
    write_csv,
)


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run_cli(*argv):
    out = io.StringIO()
    return main(list(argv), out=out), out.getvalue()


# configuration


def test_config_parses_all_kinds():
    cfg = ExperimentConfig.from_text(
        "# comment line\nM = 60\nc = 2, 4\nk = 1\nh = 0.1  # trailing\ntau = 15/cos\noracle = off\nstop_mode = bound_fe1\n"
    )
    assert (cfg.M, cfg.c, cfg.k, cfg.h, cfg.tau, cfg.oracle) == (60, (2.0, 4.0), (1,), 0.1, "15/cos", False)
    assert cfg.stop_mode == "bound_fe1"


@pytest.mark.parametrize(
    "text,line",
    [
        ("M = 50\nspeed = 3\n", 2),
        ("M = 50\nh = fast\n", 2),
        ("\n\nM 50\n", 3),
        ("oracle = maybe\n", 1),
        ("tau = -3\n", 1),
    ],
)
def test_config_errors_are_line_numbered(text, line):
    with pytest.raises(ConfigError, match=f"cfg:{line}:"):
        ExperimentConfig.from_text(text, source="cfg")


@pytest.mark.parametrize(
    "kw", [dict(operator="pde"), dict(operator="file"), dict(k=(7,)), dict(h=0.0), dict(stop_mode="x"), dict(theta="wide"), dict(M=1), dict(c=())]
)
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        ExperimentConfig(**kw)


def test_oracle_stopping_needs_oracle():
    with pytest.raises(ConfigError):
        ExperimentConfig(stop_mode="oracle", oracle=False)


def test_describe_round_trips():
    cfg = ExperimentConfig(M=80, c=(2.0, 4.0), k=(0, 2), h=0.05, tau="8/cos", tau_factors=(1.0, 0.5))
    text = "\n".join(cfg.describe().split(" "))
    assert ExperimentConfig.from_text(text) == cfg


# CSV layout


def test_csv_layout(tmp_path):
    path = write_csv(str(tmp_path / "a.csv"), ["m", "x"], [(1, 0.1), (2, None)], "note")
    lines = open(path).read().splitlines()
    assert lines[0] == "# note"
    assert lines[1] == "m,x"
    assert lines[2] == "1,1.000000000000000e-01"
    assert lines[3] == "2,nan"
    comment, header, data = read_csv(path)
    assert comment == "note" and header == ["m", "x"] and data.shape == (2, 2)


def test_csv_values_keep_twelve_digits(tmp_path):
    x = math.pi * 1e-7
    path = write_csv(str(tmp_path / "b.csv"), ["x"], [(x,)], "")
    assert abs(read_csv(path)[2][0, 0] - x) <= 1e-14 * x


# experiments


def large_step_config(tmp_path, **kw):
    base = dict(M=200, c=(2.0, 4.0), k=(0, 1, 2), h=0.5, tau="8/cos", stop_mode="oracle", out=str(tmp_path))
    base.update(kw)
    return ExperimentConfig(**base)


def test_large_step_bound_covers_error(tmp_path):
    records = run_convergence_experiment(large_step_config(tmp_path))
    assert len(records) == 6
    for rec in records:
        assert rec.converged
        _, header, data = read_csv(rec.path)
        assert header == ["m", "true_error", "bound_fe1", "bound_fe2", "residual", "subdiag_product"]
        assert np.all(data[:, 2] >= data[:, 1])
        assert np.all(data[:, 3] >= data[:, 1])


def test_small_step_is_slower(tmp_path):
    fast = run_convergence_experiment(large_step_config(tmp_path / "a"))
    slow = run_convergence_experiment(large_step_config(tmp_path / "b", h=0.05, tau="15/cos"))
    for f, s in zip(fast, slow):
        assert (f.c, f.k) == (s.c, s.k)
        assert s.report.m[-1] > f.report.m[-1]


def test_tau_robustness_runs(tmp_path):
    cfg = ExperimentConfig(
        M=200, c=(2.0,), k=(1,), h=0.1, tau="15/cos", tau_factors=(1.0, 0.5, 2.0), stop_mode="oracle", out=str(tmp_path)
    )
    base, half, double = run_convergence_experiment(cfg)
    assert half.tau == pytest.approx(base.tau / 2) and double.tau == pytest.approx(2 * base.tau)
    assert all(r.converged for r in (base, half, double))
    n = base.report.m[-1]
    assert half.report.m[-1] <= n + 3 and double.report.m[-1] <= n + 3
    assert half.report.m[-1] <= n
    assert sorted(p.name for p in tmp_path.iterdir()) == [
        "converge_k1_c2.csv",
        "converge_k1_c2_x0p5.csv",
        "converge_k1_c2_x2.csv",
    ]


def test_residual_experiment(tmp_path):
    cfg = ExperimentConfig(M=100, c=(2.0, 4.0), k=(1, 2), h=0.1, tau="15/cos", out=str(tmp_path))
    records = run_residual_experiment(cfg)
    assert len(records) == 4
    for rec in records:
        assert rec.theta < math.pi / 3
        _, header, data = read_csv(rec.path)
        assert header == ["m", "true_error", "residual"]
        for err, res in data[:, 1:]:
            if res <= 1e-12:
                break
            if err <= 1e-4:
                assert 1e-2 <= res / err <= 1e2


def test_residual_experiment_breakdown(tmp_path):
    cfg = ExperimentConfig(M=10, c=(2.0,), k=(1,), h=0.1, tau="5", tolerance=1e-15, max_m=10, out=str(tmp_path))
    (rec,) = run_residual_experiment(cfg)
    _, _, data = read_csv(rec.path)
    assert data[-1, 0] == 10 and data[-1, 2] == 0.0
    assert data[-1, 1] <= 1e-13


def test_residual_experiment_needs_oracle(tmp_path):
    with pytest.raises(ConfigError):
        run_residual_experiment(ExperimentConfig(M=500, out=str(tmp_path)))


def test_window_experiment(tmp_path):
    path, rows = run_window_experiment(ExperimentConfig(k=(0,), theta="0", out=str(tmp_path)))
    _, header, data = read_csv(path)
    assert header == ["m", "tau1_extra1", "tau2_extra1", "tau1_extra2", "tau2_extra2"]
    assert data[:, 0].tolist() == list(range(2, 41))
    m = data[:, 0]
    assert np.all(data[:, 1] < m) and np.all(m < data[:, 2])
    assert np.all(data[:, 3] <= data[:, 1]) and np.all(data[:, 2] <= data[:, 4])
    for lo, hi in ((1, 2), (3, 4)):
        width = (data[:, hi] - data[:, lo])[m >= 5]
        assert np.all(np.diff(width) >= 0)


# command line


def test_cli_converge_is_deterministic(tmp_path):
    cfg = write_config(tmp_path, "M = 60\nc = 2\nk = 0, 1\nh = 0.1\ntau = auto\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli("converge", "--config", cfg, "--out", str(a), "--seed", "7")[0] == 0
    assert run_cli("converge", "--config", cfg, "--out", str(b), "--seed", "7")[0] == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == ["converge_k0_c2.csv", "converge_k1_c2.csv"]
    for n in names:
        ta, tb = (a / n).read_bytes(), (b / n).read_bytes()
        assert ta.replace(str(a).encode(), b"") == tb.replace(str(b).encode(), b"")


def test_cli_comment_records_resolved_config(tmp_path):
    cfg = write_config(tmp_path, "M = 40\nc = 4\nk = 2\nh = 0.5\ntau = 8/cos\n")
    code, _ = run_cli("converge", "--config", cfg, "--out", str(tmp_path / "o"), "--seed", "3", "--oracle", "off")
    assert code == 0
    comment, header, _ = read_csv(str(tmp_path / "o" / "converge_k2_c4.csv"))
    for item in ("M=40", "c=4.0", "k=2", "h=0.5", "tau=8/cos", "seed=3", "oracle=False", "resolved_tau="):
        assert item in comment
    assert "true_error" not in header


def test_cli_window_and_calibrate(tmp_path):
    code, text = run_cli("window", "--out", str(tmp_path))
    assert code == 0 and text.strip().endswith("window.csv")
    cfg = write_config(tmp_path, "c = 2\nk = 1\nh = 0.1\n")
    code, text = run_cli("calibrate", "--config", cfg, "--out", str(tmp_path))
    assert code == 0 and "target_m=14" in text
    _, header, data = read_csv(str(tmp_path / "calibrate.csv"))
    assert header[:4] == ["c", "k", "theta", "target_m"] and data[0, 3] == 14


def test_cli_sector_prints_theta(tmp_path):
    cfg = write_config(tmp_path, "M = 200\nc = 2, 4\n")
    code, text = run_cli("sector", "--config", cfg)
    assert code == 0
    lines = text.strip().splitlines()
    assert lines[0].startswith("c=2 M=200 theta=0.30") and lines[1].startswith("c=4 M=200 theta=0.56")


def test_cli_phi_writes_vector(tmp_path):
    cfg = write_config(tmp_path, "M = 80\nc = 2\nk = 1\nh = 0.1\ntau = 15/cos\n")
    code, _ = run_cli("phi", "--config", cfg, "--out", str(tmp_path))
    assert code == 0
    y = np.loadtxt(tmp_path / "phi_k1_c2.txt")
    from rdarnoldi.operators import make_advection_diffusion
    from rdarnoldi.phifun import phi_oracle_dense

    v = np.ones(80) / math.sqrt(80)
    ref = phi_oracle_dense(1, 0.1, make_advection_diffusion(80, 2.0).to_dense(), v)
    assert y.shape == (80,) and np.max(np.abs(y - ref)) <= 1e-10


def test_cli_large_mode_drops_oracle(tmp_path):
    cfg = write_config(tmp_path, "c = 2\nk = 1\nh = 0.1\ntau = 15/cos\nmax_m = 20\n")
    code, _ = run_cli("converge", "--config", cfg, "--out", str(tmp_path), "--large")
    assert code == 0
    comment, header, _ = read_csv(str(tmp_path / "converge_k1_c2.csv"))
    assert "M_run=1000" in comment and "true_error" not in header


def test_cli_exit_code_config_error(tmp_path, capsys):
    cfg = write_config(tmp_path, "M = 50\nwidth = 3\n")
    assert run_cli("converge", "--config", cfg)[0] == 1
    assert f"{cfg}:2: unknown key 'width'" in capsys.readouterr().err
    assert run_cli("converge", "--config", str(tmp_path / "missing.cfg"))[0] == 1
    bad = write_config(tmp_path, "operator = file\nfile = nowhere.mtx\ntau = 5\n", "f.cfg")
    assert run_cli("phi", "--config", bad, "--out", str(tmp_path / "none"))[0] == 1
    assert not (tmp_path / "none").exists()
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1


def test_cli_exit_code_numerical_failure(tmp_path, capsys):
    # L = I: with h = tau = 1 the shifted matrix I - L is exactly singular
    mtx = tmp_path / "eye.mtx"
    mtx.write_text("3 3\n1 1 1.0\n2 2 1.0\n3 3 1.0\n")
    cfg = write_config(tmp_path, f"operator = file\nfile = {mtx}\ntau = 1\nh = 1\ntheta = 0\nk = 0\n")
    assert run_cli("phi", "--config", cfg, "--out", str(tmp_path))[0] == 2
    assert "numerical failure" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "rdarnoldi", "window", "--out", str(tmp_path)], capture_output=True, text=True
    )
    assert proc.returncode == 0 and (tmp_path / "window.csv").exists()
