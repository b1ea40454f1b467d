"""
End-to-end drivers built from a :class:`RunConfig`.

These are the functions behind the command-line subcommands; they return
in-memory results so scripts and tests can use them directly.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from .assembly import GalerkinSystem, galerkin_matrix, lightcone_panels
from .basis import FOURIER
from .classical import ClassicalTrajectory
from .config import RunConfig
from .metrics import ErrorReport, GridField, delta, reference_k0
from .solver import WaveSolution, coherent_coefficients, fit_lambda, null_space, project_initial_data

log = logging.getLogger(__name__)


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage, cause):
        self.stage = stage
        super().__init__(f"{stage} failed: {cause}")


@dataclass(frozen=True)
class SolveResult:
    solution: WaveSolution
    system: GalerkinSystem
    provenance: dict


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:  # surfaced with the stage that raised it
        raise StageError(name, exc) from exc


def run_solve(config: RunConfig) -> SolveResult:
    """Assemble D, extract the null space and fit the coherent initial data."""
    config.validate()
    spec = config.basis_spec()
    quad = config.quadrature()
    if config.k < 0:
        near = lightcone_panels(spec, quad)
        shown = ", ".join(f"({i},{j})" for i, j in near[:8])
        log.warning("k < 0: %d quadrature panels lie near the light-cone lines u = +-v "
                    "where the solution is expected to be fragile: %s%s",
                    len(near), shown, " ..." if len(near) > 8 else "")
    t0 = time.perf_counter()
    system = _stage("assembly", galerkin_matrix, spec, config.potential(), quad, config.workers)
    t1 = time.perf_counter()
    bundle = _stage("null space", null_space, system, config.count)
    t2 = time.perf_counter()
    init = _stage("initial data", lambda: project_initial_data(
        coherent_coefficients(config.chi, max(config.N, 2), config.slope, spec.omega2),
        spec, terms=config.reference_terms))
    solution = _stage("fit", fit_lambda, bundle, spec, init, config.slope_weight)
    t3 = time.perf_counter()
    prov = {f"quadrature_{key}": val for key, val in system.quadrature.items()}
    prov.update(assembly_seconds=round(t1 - t0, 3), eigensolve_seconds=round(t2 - t1, 3),
                fit_seconds=round(t3 - t2, 3))
    return SolveResult(solution, system, prov)


def solution_grid(solution: WaveSolution, config: RunConfig) -> GridField:
    meta = {"basis": config.basis, "N": config.N, "k": config.k, "chi": config.chi}
    if config.basis == FOURIER:
        meta["L"] = config.L
    return GridField.from_function(solution.evaluate, config.grid_box, config.grid_M, meta)


def reference_grid(config: RunConfig) -> GridField:
    return reference_k0(config.chi, config.omega1, config.reference_terms,
                        config.grid_box, config.grid_M, config.slope)


def has_reference(config: RunConfig) -> bool:
    """The closed-form reference exists for k = 0 with equal frequencies."""
    return config.k == 0 and config.omega1 == config.omega2


def compare_to_reference(solution: WaveSolution, config: RunConfig) -> ErrorReport:
    return delta(solution_grid(solution, config), reference_grid(config), "b_norm")


def self_consistency(a: WaveSolution, b: WaveSolution, config: RunConfig) -> ErrorReport:
    """delta of the lower truncation ``b`` against ``a``, normalized by ``a``."""
    return delta(solution_grid(a, config), solution_grid(b, config), "a_norm")


def sweep(config: RunConfig, parameter: str, values, coarse_step: int = 5):
    """delta for each value of ``parameter`` in {"L", "N", "chi"}.

    With a closed-form reference (k = 0, equal frequencies) each run is
    compared against it; otherwise against the same run with N reduced by
    ``coarse_step``. Failed runs give NaN.

    Returns
    -------
    rows : list of (value, delta, error_message)
    """
    if parameter not in ("L", "N", "chi"):
        raise ValueError(f"cannot sweep {parameter!r}; choose L, N or chi")
    if parameter == "L" and config.basis != FOURIER:
        raise ValueError("an L sweep needs the fourier basis")
    rows = []
    for raw in values:
        value = int(raw) if parameter == "N" else float(raw)
        try:
            cfg = config.replace(**{parameter: value})
            fine = run_solve(cfg).solution
            if has_reference(cfg):
                d = compare_to_reference(fine, cfg).delta
            else:
                coarse = run_solve(cfg.replace(N=cfg.N - coarse_step)).solution
                d = self_consistency(fine, coarse, cfg).delta
            rows.append((value, d, ""))
        except Exception as exc:  # a failed run becomes a NaN row
            log.warning("sweep %s=%s failed: %s", parameter, value, exc)
            rows.append((value, float("nan"), str(exc).replace("\n", " ")))
    return rows


def crest_samples(solution: WaveSolution, traj: ClassicalTrajectory) -> np.ndarray:
    """psi along a trajectory: columns t, u, v, Re psi, Im psi, |Re psi|^2, |psi|^2."""
    u = np.asarray(traj.u, dtype=float)
    v = np.asarray(traj.v, dtype=float)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ValueError("trajectory contains non-finite points")
    spec = solution.spec
    if spec.kind == FOURIER and (np.abs(u).max() > spec.L or np.abs(v).max() > spec.L):
        raise ValueError(f"trajectory leaves the Fourier box [-{spec.L}, {spec.L}]^2")
    psi = solution.evaluate_points(u, v)
    return np.column_stack([traj.t, u, v, psi.real, psi.imag, psi.real ** 2, np.abs(psi) ** 2])


def sign_changes(x) -> int:
    s = np.sign(np.asarray(x))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def relative_variation(x) -> float:
    """(max - min) / max of a non-negative series."""
    x = np.asarray(x)
    top = x.max()
    return float((top - x.min()) / top) if top > 0 else 0.0


def ray_argmax(solution: WaveSolution, angles, r_max: float = 8.0, dr: float = 0.01,
               r_min: float = 0.5) -> np.ndarray:
    """Radius of max |psi|^2 along rays from the origin at the given angles."""
    r = np.arange(r_min, r_max + 0.5 * dr, dr)
    out = []
    for th in np.asarray(angles, dtype=float):
        p = np.abs(solution.evaluate_points(r * np.cos(th), r * np.sin(th))) ** 2
        out.append(r[int(np.argmax(p))])
    return np.array(out)
