"""
Command-line driver.

Subcommands: solve, classical, compare, sweep, crest. Every configuration key
is accepted as ``--key value`` (underscores or dashes) and overrides the
``--config`` file.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import pipeline
from .archive import load_archive, save_archive
from .classical import integrate, read_trajectory_csv, write_trajectory_csv
from .config import ConfigError, RunConfig
from .metrics import delta, write_grid_csv

log = logging.getLogger("wdspectral")

_CONFIG_ONLY = ("workers", "out")  # have dedicated flags below


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--workers", type=int, help="worker threads for assembly")
    p.add_argument("--out", help="output directory")
    g = p.add_argument_group("configuration overrides")
    for key in RunConfig.keys():
        if key in _CONFIG_ONLY:
            continue
        flag = "--" + key.replace("_", "-")
        aliases = [flag] + (["--" + key] if "_" in key else [])
        g.add_argument(*aliases, dest=f"cfg_{key}", metavar="VALUE",
                       nargs="+" if key == "grid_box" else None)


def _load_config(args, base: RunConfig = None) -> RunConfig:
    """Config file (or ``base``) with command-line overrides applied."""
    overrides = {}
    for key in RunConfig.keys():
        val = getattr(args, f"cfg_{key}", None)
        if val is not None:
            overrides[key] = " ".join(val) if isinstance(val, list) else val
    if args.workers is not None:
        overrides["workers"] = str(args.workers)
    if args.out is not None:
        overrides["out"] = args.out
    if args.config:
        return RunConfig.from_file(args.config, overrides)
    return RunConfig.from_text(base.to_text() if base else "", overrides)


def _out_path(cfg: RunConfig, name: str) -> str:
    os.makedirs(cfg.out, exist_ok=True)
    return os.path.join(cfg.out, name)


# -- subcommands -------------------------------------------------------------

def cmd_solve(args) -> int:
    cfg = _load_config(args)
    res = pipeline.run_solve(cfg)
    sol = res.solution
    arch = _out_path(cfg, args.archive)
    save_archive(arch, sol, cfg, res.provenance)
    grid = pipeline.solution_grid(sol, cfg)
    grid_path = _out_path(cfg, args.grid)
    write_grid_csv(grid_path, grid)
    print(f"archive: {arch}")
    print(f"grid: {grid_path}")
    print(f"fit residual: value={sol.value_residual:.6e} slope={sol.slope_residual:.6e}"
          f"{' (degenerate)' if sol.degenerate else ''}")
    print(f"null gap_ratio: {sol.bundle.gap_ratio:.6e}"
          f"{' (weak gap)' if sol.bundle.gap_warning else ''}")
    return 0


def cmd_classical(args) -> int:
    cfg = _load_config(args)
    traj = integrate(cfg.chi, cfg.k, cfg.t_max, cfg.tol)
    path = _out_path(cfg, args.trajectory)
    write_trajectory_csv(path, traj)
    mask = traj.away_from_singular()
    r = traj.radius()
    print(f"trajectory: {path} ({len(traj)} samples{', truncated' if traj.truncated else ''})")
    print(f"radius range: [{r.min():.9g}, {r.max():.9g}]")
    print(f"max |constraint| away from singular lines: {np.abs(traj.constraint[mask]).max():.3e}")
    print(f"singular events: {len(traj.singular_events)}")
    return 0


def cmd_compare(args) -> int:
    sol_a, cfg_a, _ = load_archive(args.archive_a)
    # grid settings come from the first archive unless overridden
    cfg = _load_config(args, base=cfg_a)
    grid_a = pipeline.solution_grid(sol_a, cfg)
    if args.archive_b:
        sol_b, _, _ = load_archive(args.archive_b)
        report = delta(grid_a, pipeline.solution_grid(sol_b, cfg), "a_norm")
    else:
        if not pipeline.has_reference(cfg):
            print("error: a closed-form reference exists only for k = 0 with omega1 = omega2",
                  file=sys.stderr)
            return 2
        report = delta(grid_a, pipeline.reference_grid(cfg), "b_norm")
    print(report)
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    rows = pipeline.sweep(cfg, args.parameter, args.values)
    path = _out_path(cfg, args.table)
    finite = [i for i, r in enumerate(rows) if np.isfinite(r[1])]
    best = min(finite, key=lambda i: rows[i][1]) if finite else None
    with open(path, "w") as fh:
        fh.write(f"# parameter={args.parameter}\n# basis={cfg.basis}\n# k={cfg.k!r}\n")
        fh.write(f"{args.parameter},delta,argmin,error\n")
        for i, (val, d, err) in enumerate(rows):
            fh.write(f"{val!r},{d:.17g},{int(i == best)},{err}\n")
    for i, (val, d, _) in enumerate(rows):
        print(f"{args.parameter}={val!r} delta={d:.6e}{'  <- argmin' if i == best else ''}")
    print(f"table: {path}")
    return 0


def cmd_crest(args) -> int:
    sol, cfg, _ = load_archive(args.archive)
    if args.trajectory_csv:
        traj = read_trajectory_csv(args.trajectory_csv)
    else:
        traj = integrate(cfg.chi, cfg.k, cfg.t_max, cfg.tol)
    data = pipeline.crest_samples(sol, traj)
    out = args.out or cfg.out
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, args.crest)
    with open(path, "w") as fh:
        fh.write(f"# chi={traj.chi!r}\n# k={traj.k!r}\n")
        fh.write("t,u,v,re,im,abs2_re,abs2\n")
        np.savetxt(fh, data, fmt="%.17g", delimiter=",")
    print(f"crest: {path}")
    print(f"Re psi sign changes: {pipeline.sign_changes(data[:, 3])}")
    print(f"|psi|^2 relative variation: {pipeline.relative_variation(data[:, 6]):.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wdspectral", description=__doc__.strip().splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="assemble, extract the null space, fit and render")
    _add_config_flags(p)
    p.add_argument("--archive", default="solution.txt", help="archive file name")
    p.add_argument("--grid", default="psi_grid.csv", help="grid CSV file name")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("classical", help="integrate the classical trajectory")
    _add_config_flags(p)
    p.add_argument("--trajectory", default="trajectory.csv")
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("compare", help="delta between two archives or against the k = 0 reference")
    p.add_argument("archive_a")
    p.add_argument("archive_b", nargs="?")
    _add_config_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="delta as a function of L, N or chi")
    _add_config_flags(p)
    p.add_argument("--parameter", required=True, choices=("L", "N", "chi"))
    p.add_argument("--values", nargs="*", default=[])
    p.add_argument("--table", default="sweep.csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("crest", help="sample a solution along a classical path")
    p.add_argument("archive")
    p.add_argument("--trajectory-csv", help="path CSV; default integrates from the archive config")
    p.add_argument("--out")
    p.add_argument("--crest", default="crest.csv")
    p.set_defaults(func=cmd_crest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except pipeline.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
