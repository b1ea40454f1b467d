import dataclasses
import math

import numpy as np
import pytest

from wdspectral import pipeline
from wdspectral.archive import ArchiveError, load_archive, save_archive
from wdspectral.classical import ClassicalTrajectory, integrate, write_trajectory_csv
from wdspectral.cli import main
from wdspectral.config import ConfigError, RunConfig

SMALL = dict(N=8, grid_M=24)


# -- configuration ---------------------------------------------------------------

def test_config_text_with_comments_and_overrides():
    text = """
    # run for the widened packet
    basis = fourier   # trailing comment
    N = 12
    L = 9.5
    k = -1
    quad_panels = auto
    grid_box = -6 6, -5 5
    """
    cfg = RunConfig.from_text(text, {"chi": "5", "workers": 3})
    assert (cfg.basis, cfg.N, cfg.L, cfg.k, cfg.chi, cfg.workers) == ("fourier", 12, 9.5, -1.0, 5.0, 3)
    assert cfg.quad_panels is None and cfg.grid_box == (-6.0, 6.0, -5.0, 5.0)
    assert RunConfig.from_text(cfg.to_text()) == cfg


def test_defaults_are_valid():
    cfg = RunConfig()
    cfg.validate()
    assert cfg.N == 35 and cfg.grid_M == 128 and cfg.t_max == pytest.approx(2 * math.pi)


@pytest.mark.parametrize("text,key", [
    ("basis = chebyshev", "basis"),
    ("N = 0", "N"),
    ("N = 3.5", "N"),
    ("omega1 = -1", "omega1"),
    ("omega2 = nan", "omega2"),
    ("basis = fourier", "L"),
    ("basis = fourier\nL = -2", "L"),
    ("k = inf", "k"),
    ("chi = 0", "chi"),
    ("slope = steep", "slope"),
    ("slope_weight = -1", "slope_weight"),
    ("N = 3\ncount = 10", "count"),
    ("quad_scheme = monte_carlo", "quad_scheme"),
    ("quad_family = simpson", "quad_family"),
    ("quad_panels = 0", "quad_panels"),
    ("quad_nodes = 0", "quad_nodes"),
    ("quad_box = 0", "quad_box"),
    ("grid_box = 1 2 3", "grid_box"),
    ("grid_box = 1 0 0 1", "grid_box"),
    ("grid_M = 1", "grid_M"),
    ("reference_terms = 1", "reference_terms"),
    ("t_max = 0", "t_max"),
    ("tol = -1e-9", "tol"),
    ("workers = 0", "workers"),
    ("k = -1\nchi = 0.5", "chi"),
    ("colour = blue", "colour"),
])
def test_validation_names_the_field(text, key):
    with pytest.raises(ConfigError) as exc:
        RunConfig.from_text(text)
    assert exc.value.key == key
    assert str(exc.value).startswith(key)


def test_malformed_line_is_reported():
    with pytest.raises(ConfigError, match="line 2"):
        RunConfig.from_text("N = 4\nthis is not a setting\n")


# -- archive ---------------------------------------------------------------------

@pytest.fixture(scope="module")
def small_run():
    return pipeline.run_solve(RunConfig(k=1.0, **SMALL))


def test_archive_round_trip(tmp_path, small_run):
    cfg = RunConfig(k=1.0, **SMALL)
    path = tmp_path / "a.txt"
    save_archive(path, small_run.solution, cfg, small_run.provenance)
    sol, cfg2, prov = load_archive(path)
    assert cfg2 == cfg
    assert prov["quadrature_scheme"] == "lightcone"
    u = np.linspace(-7, 7, 23)
    a = small_run.solution.evaluate(u, u)
    b = sol.evaluate(u, u)
    assert np.abs(a - b).max() <= 1e-12
    assert np.array_equal(sol.bundle.vectors, small_run.solution.bundle.vectors)
    assert np.array_equal(sol.lam, small_run.solution.lam)


def test_archive_rejects_bad_magic_and_version(tmp_path, small_run):
    path = tmp_path / "a.txt"
    save_archive(path, small_run.solution, RunConfig(k=1.0, **SMALL))
    lines = path.read_text().splitlines()
    bad = tmp_path / "bad_magic.txt"
    bad.write_text("\n".join(["NOT-AN-ARCHIVE"] + lines[1:]))
    with pytest.raises(ArchiveError, match="magic"):
        load_archive(bad)
    bad = tmp_path / "bad_version.txt"
    bad.write_text("\n".join([lines[0], "version 99"] + lines[2:]))
    with pytest.raises(ArchiveError, match="version"):
        load_archive(bad)


# -- pipeline --------------------------------------------------------------------

def test_empty_sweep():
    assert pipeline.sweep(RunConfig(**SMALL), "N", []) == []


def test_failed_sweep_point_is_nan():
    rows = pipeline.sweep(RunConfig(basis="fourier", L=6.0, k=1.0, N=4), "L", [2.0])
    assert len(rows) == 1 and math.isnan(rows[0][1]) and rows[0][2]


def test_sweep_rejects_unknown_parameter():
    with pytest.raises(ValueError):
        pipeline.sweep(RunConfig(**SMALL), "omega1", [1.0])
    with pytest.raises(ValueError):
        pipeline.sweep(RunConfig(**SMALL), "L", [6.0])


def test_n_sweep_against_reference_is_nonincreasing():
    rows = pipeline.sweep(RunConfig(grid_M=64), "N", [15, 20, 25, 30, 35])
    d = [r[1] for r in rows]
    assert all(b <= a for a, b in zip(d, d[1:]))
    assert d[-1] < 5e-6


def test_crest_of_zero_solution_is_zero(small_run):
    sol = small_run.solution
    zero = dataclasses.replace(sol, lam=np.zeros_like(sol.lam))
    data = pipeline.crest_samples(zero, integrate(4.0, 1.0, np.pi))
    assert np.all(data[:, 3:] == 0)
    assert pipeline.relative_variation(data[:, 6]) == 0.0
    assert pipeline.sign_changes(data[:, 3]) == 0


def test_crest_single_point_path(small_run):
    traj = ClassicalTrajectory(t=np.array([0.0]), u=np.array([-4.0]), v=np.array([0.0]),
                               du=np.array([0.0]), dv=np.array([4.0]), constraint=np.array([0.0]),
                               chi=4.0, k=1.0, tol=1e-9)
    data = pipeline.crest_samples(small_run.solution, traj)
    assert data.shape == (1, 7)


def test_crest_rejects_path_outside_fourier_box():
    sol = pipeline.run_solve(RunConfig(basis="fourier", N=4, L=3.0)).solution
    with pytest.raises(ValueError, match="box"):
        pipeline.crest_samples(sol, integrate(4.0, 0.0, np.pi))


# -- command line ----------------------------------------------------------------

def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_solve_is_deterministic_across_workers(tmp_path, capsys):
    paths = []
    for w in (1, 8):
        out = tmp_path / f"w{w}"
        code, _, _ = _run(capsys, "solve", "--k", 1, "--N", 10, "--grid-M", 32, "--workers", w, "--out", out)
        assert code == 0
        paths.append(out)
    a, b = [(p / "psi_grid.csv").read_bytes() for p in paths]
    assert a == b
    a, b = [(p / "solution.txt").read_text().split("[fit]")[1] for p in paths]
    assert a == b


def test_cli_every_subcommand(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("N = 10\ngrid_M = 32\nk = 0\n")
    out = tmp_path / "out"

    code, text, _ = _run(capsys, "solve", "--config", cfg, "--out", out)
    assert code == 0 and "fit residual" in text
    assert (out / "solution.txt").exists() and (out / "psi_grid.csv").exists()

    code, text, _ = _run(capsys, "solve", "--config", cfg, "--N", 8, "--out", out, "--archive", "coarse.txt")
    assert code == 0

    code, text, _ = _run(capsys, "compare", out / "solution.txt")
    assert code == 0 and "delta" in text
    code, text, _ = _run(capsys, "compare", out / "solution.txt", out / "coarse.txt")
    assert code == 0 and "self" in text.lower()

    code, text, _ = _run(capsys, "classical", "--config", cfg, "--out", out)
    assert code == 0 and "radius range" in text
    assert (out / "trajectory.csv").exists()

    code, text, _ = _run(capsys, "crest", out / "solution.txt", "--trajectory-csv", out / "trajectory.csv",
                         "--out", out)
    assert code == 0 and "sign changes" in text
    rows = np.loadtxt(out / "crest.csv", delimiter=",", comments="#", skiprows=3)
    assert rows.shape[1] == 7

    code, text, _ = _run(capsys, "sweep", "--config", cfg, "--parameter", "N", "--values", 6, 8,
                         "--out", out)
    assert code == 0
    table = (out / "sweep.csv").read_text().splitlines()
    assert table[3] == "N,delta,argmin,error" and len(table) == 6
    assert sum(int(r.split(",")[2]) for r in table[4:]) == 1


def test_cli_config_error_exit_code(tmp_path, capsys):
    code, _, err = _run(capsys, "solve", "--N", 0, "--out", tmp_path)
    assert code == 2 and "N" in err


def test_cli_compare_without_reference(tmp_path, capsys, small_run):
    path = tmp_path / "a.txt"
    save_archive(path, small_run.solution, RunConfig(k=1.0, **SMALL))
    code, _, err = _run(capsys, "compare", path)
    assert code == 2 and "reference" in err


def test_cli_crest_single_row(tmp_path, capsys, small_run):
    path = tmp_path / "a.txt"
    save_archive(path, small_run.solution, RunConfig(k=1.0, **SMALL))
    traj = ClassicalTrajectory(t=np.array([0.0]), u=np.array([-4.0]), v=np.array([0.0]),
                               du=np.array([0.0]), dv=np.array([4.0]), constraint=np.array([0.0]),
                               chi=4.0, k=1.0, tol=1e-9)
    write_trajectory_csv(tmp_path / "one.csv", traj)
    code, _, _ = _run(capsys, "crest", path, "--trajectory-csv", tmp_path / "one.csv", "--out", tmp_path)
    assert code == 0
    rows = np.loadtxt(tmp_path / "crest.csv", delimiter=",", comments="#", skiprows=3, ndmin=2)
    assert rows.shape == (1, 7)
