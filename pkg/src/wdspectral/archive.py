"""
Versioned plain-text archive of a fitted wave solution.

Layout::

    WDSPECTRAL-SOLUTION-ARCHIVE
    version 1
    [config]          key = value lines (see RunConfig)
    [provenance]      key = value lines (quadrature, timings, ...)
    [fit]             requested_count, gap_ratio, residuals, degenerate flag
    [eigenvalues]     one value per line
    [vectors B count] B lines, count values each
    [lambda count]    "re im" per line
    [initial count]   "c_re c_im d_re d_im" per line

All floats are written with 17 significant digits so a save/load round trip
reproduces the solution exactly.
"""
from __future__ import annotations

import numpy as np

from .config import RunConfig
from .solver import InitialData, NullSpaceBundle, WaveSolution

MAGIC = "WDSPECTRAL-SOLUTION-ARCHIVE"
VERSION = 1
_FMT = "%.17g"


class ArchiveError(ValueError):
    """Malformed or incompatible archive file."""


def _fmt(x) -> str:
    return _FMT % x


def save_archive(path, solution: WaveSolution, config: RunConfig, provenance=None) -> None:
    b = solution.bundle
    init = solution.init
    lines = [MAGIC, f"version {VERSION}", "[config]"]
    lines += config.to_text().splitlines()
    lines.append("[provenance]")
    for key, val in (provenance or {}).items():
        lines.append(f"{key} = {val}")
    lines.append("[fit]")
    lines += [
        f"requested_count = {b.requested_count}",
        f"gap_ratio = {_fmt(b.gap_ratio)}",
        f"slope_weight = {_fmt(solution.slope_weight)}",
        f"value_residual = {_fmt(solution.value_residual)}",
        f"slope_residual = {_fmt(solution.slope_residual)}",
        f"degenerate = {int(solution.degenerate)}",
        f"chi = {_fmt(init.chi if init is not None else float('nan'))}",
        f"slope = {init.slope if init is not None else 'none'}",
    ]
    lines.append("[eigenvalues]")
    lines += [_fmt(x) for x in b.eigenvalues]
    B, count = b.vectors.shape
    lines.append(f"[vectors {B} {count}]")
    lines += [" ".join(_fmt(x) for x in row) for row in b.vectors]
    lines.append(f"[lambda {count}]")
    lines += [f"{_fmt(z.real)} {_fmt(z.imag)}" for z in solution.lam]
    if init is not None:
        c = np.asarray(init.value_coeffs, dtype=complex)
        d = np.asarray(init.slope_coeffs, dtype=complex)
        lines.append(f"[initial {c.size}]")
        lines += [f"{_fmt(x.real)} {_fmt(x.imag)} {_fmt(y.real)} {_fmt(y.imag)}" for x, y in zip(c, d)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _sections(lines):
    out = {}
    name = None
    for line in lines:
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1]
            out[name] = []
        elif name is not None:
            out[name].append(line)
    return out


def _find(sections, prefix):
    for name, body in sections.items():
        parts = name.split()
        if parts[0] == prefix:
            return [int(x) for x in parts[1:]], body
    raise ArchiveError(f"missing [{prefix}] section")


def _kv(body):
    out = {}
    for line in body:
        key, _, val = line.partition("=")
        out[key.strip()] = val.strip()
    return out


def load_archive(path):
    """Read an archive; returns ``(solution, config, provenance)``."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MAGIC:
        raise ArchiveError(f"{path}: not a solution archive (bad magic line)")
    try:
        version = int(lines[1].split()[1])
    except (IndexError, ValueError):
        raise ArchiveError(f"{path}: missing format version") from None
    if version != VERSION:
        raise ArchiveError(f"{path}: unsupported archive version {version}")
    sec = _sections(lines[2:])
    config = RunConfig.from_text("\n".join(sec.get("config", [])))
    provenance = _kv(sec.get("provenance", []))
    fit = _kv(sec.get("fit", []))
    eig = np.array([float(x) for x in sec.get("eigenvalues", [])])
    (B, count), body = _find(sec, "vectors")
    vectors = np.array([[float(x) for x in row.split()] for row in body]).reshape(B, count)
    (nl,), body = _find(sec, "lambda")
    lam = np.array([complex(*map(float, row.split())) for row in body])
    if lam.size != count or eig.size != count:
        raise ArchiveError(f"{path}: inconsistent section sizes")
    spec = config.basis_spec()
    if spec.size != B:
        raise ArchiveError(f"{path}: vector length {B} does not match the basis size {spec.size}")
    bundle = NullSpaceBundle(vectors, eig, int(fit.get("requested_count", count)),
                             float(fit.get("gap_ratio", "inf")))
    init = None
    if any(name.split()[0] == "initial" for name in sec):
        _, body = _find(sec, "initial")
        arr = np.array([[float(x) for x in row.split()] for row in body]).reshape(-1, 4)
        init = InitialData(arr[:, 0] + 1j * arr[:, 1], arr[:, 2] + 1j * arr[:, 3],
                           float(fit.get("chi", "nan")), fit.get("slope", "canonical"))
    solution = WaveSolution(
        spec=spec,
        bundle=bundle,
        lam=lam,
        init=init,
        slope_weight=float(fit.get("slope_weight", 1.0)),
        value_residual=float(fit.get("value_residual", 0.0)),
        slope_residual=float(fit.get("slope_residual", 0.0)),
        degenerate=bool(int(fit.get("degenerate", 0))),
    )
    return solution, config, provenance
