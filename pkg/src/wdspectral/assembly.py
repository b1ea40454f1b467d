"""
Assembly of the coupling matrix C and the Galerkin matrix D = diag + C.

For a product basis phi_a(u) phi_b(v) the coupling matrix is

    C[(a, b), (a', b')] = integral phi_a(u) phi_b(v) f_eff(u, v) phi_a'(u) phi_b'(v) du dv

with ``f_eff = f`` for the oscillator basis (the harmonic terms are diagonal)
and ``f_eff = f + omega1**2 u**2 - omega2**2 v**2`` for the Fourier basis.

Rather than forming B**2 two-dimensional integrals, both schemes contract
per-direction pair tables:

* tensor:    G = (Pu @ F) @ Pv.T with Pu[(a, a'), p] = phi_a(u_p) phi_a'(u_p) w_p
* lightcone: G[:, q] = vec(Phi_q diag(w_q f(., v_q)) Phi_q.T), then G @ Pv.T,
             where the inner u-rule depends on v_q through its kink points.

G is indexed by ((a, a'), (b, b')) and is permuted into C[(a, b), (a', b')].
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .basis import FOURIER, OSCILLATOR, BasisSpec, basis_matrix
from .quadrature import (AUTO, LIGHTCONE, TENSOR, TRAPEZOID, NonFiniteIntegrandError,
                         QuadratureSettings, composite, lightcone_u_rule, lightcone_v_rule)

log = logging.getLogger(__name__)

SUPPORT_TOL = 1e-8


class ConfigurationError(ValueError):
    """Assembly settings incompatible with the basis."""


def f_wdw(u, v, k: float):
    """Curvature potential (9/4) k (u**2 - v**2)**(1/3), real cube root."""
    return 2.25 * k * np.cbrt(np.subtract(np.square(u), np.square(v)))


@dataclass(frozen=True)
class PotentialSpec:
    """The multiplicative potential added to the hyperbolic operator.

    Parameters
    ----------
    k : float
        Curvature constant of the built-in potential f_wdw.
    custom : callable, optional
        Vectorized ``f(u, v)`` replacing the built-in potential. A custom
        potential is assumed smooth unless ``custom_kinked`` is set.
    """

    k: float = 0.0
    custom: Optional[Callable] = None
    custom_kinked: bool = False

    def f(self, u, v):
        if self.custom is not None:
            return self.custom(u, v)
        return f_wdw(u, v, self.k)

    @property
    def vanishes(self) -> bool:
        return self.custom is None and self.k == 0

    @property
    def kinked(self) -> bool:
        if self.custom is not None:
            return self.custom_kinked
        return self.k != 0

    def effective(self, spec: BasisSpec) -> Callable:
        """The function integrated against basis pairs for ``spec``."""
        if spec.kind == OSCILLATOR:
            return self.f
        w1, w2 = spec.omega1 ** 2, spec.omega2 ** 2

        def f_prime(u, v):
            return self.f(u, v) + w1 * np.square(u) - w2 * np.square(v)

        return f_prime

    def describe(self) -> dict:
        return {"k": self.k, "custom": None if self.custom is None else getattr(
            self.custom, "__name__", "custom")}


def diagonal_term(spec: BasisSpec, idx) -> float:
    """Differential-operator eigenvalue of one product basis function.

    Oscillator: (2m+1) omega1 - (2n+1) omega2.
    Fourier: (m pi / L)**2 - (n pi / L)**2, independent of the parities.
    """
    flat = spec.flatten(*idx) if isinstance(idx, tuple) else int(idx)
    a, b = spec.split(flat)
    return float(diagonal(spec)[a * spec.n_dir + b])


def _factor_eigenvalues(spec: BasisSpec):
    if spec.kind == OSCILLATOR:
        n = np.arange(spec.N)
        return (2 * n + 1) * spec.omega1, (2 * n + 1) * spec.omega2
    m = np.concatenate([np.arange(spec.N), np.arange(1, spec.N + 1)])
    lam = (m * np.pi / spec.L) ** 2
    return lam, lam


def diagonal(spec: BasisSpec) -> np.ndarray:
    """Diagonal part of D as a flat vector of length B."""
    lu, lv = _factor_eigenvalues(spec)
    return (lu[:, None] - lv[None, :]).ravel()


def _pair_table(phi: np.ndarray, w: np.ndarray) -> np.ndarray:
    # phi: (n, Q) -> (n*n, Q) with rows (a, a')
    n = phi.shape[0]
    return (phi[:, None, :] * phi[None, :, :] * w).reshape(n * n, -1)


def _to_coupling(G: np.ndarray, n: int) -> np.ndarray:
    return np.ascontiguousarray(G.reshape(n, n, n, n).transpose(0, 2, 1, 3)).reshape(n * n, n * n)


def check_support(spec: BasisSpec, half_width: float, tol: float = SUPPORT_TOL) -> None:
    """Reject oscillator integration boxes that cut off the basis tails."""
    if spec.kind != OSCILLATOR:
        return
    for direction in ("u", "v"):
        edge = np.abs(basis_matrix(spec, [half_width], direction)).max()
        if edge > tol:
            raise ConfigurationError(
                f"integration half-width {half_width:g} too small for N={spec.N}: "
                f"basis magnitude {edge:.2e} at the box edge ({direction}) exceeds {tol:g}")


def _resolve_scheme(settings: QuadratureSettings, pot: PotentialSpec) -> str:
    if settings.scheme != AUTO:
        return settings.scheme
    return LIGHTCONE if pot.kinked else TENSOR


def _tensor_coupling(spec, f_eff, settings, workers):
    U = settings.box(spec)
    P = settings.resolved_panels(spec.N)
    rule = composite(settings.family, P, settings.nodes_per_panel, -U, U)
    x, w = rule.nodes, rule.weights
    F = np.asarray(f_eff(x[:, None], x[None, :]), dtype=float)
    if not np.all(np.isfinite(F)):
        i, j = np.unravel_index(np.argmax(~np.isfinite(F)), F.shape)
        raise NonFiniteIntegrandError((float(x[i]), float(x[j])), F[i, j])
    Pu = _pair_table(basis_matrix(spec, x, "u"), w)
    Pv = _pair_table(basis_matrix(spec, x, "v"), w)
    rows = Pu.shape[0]
    blocks = _row_blocks(rows, workers)

    PF = np.empty((rows, x.size))

    def work(sl):
        PF[sl] = Pu[sl] @ F

    _run(work, blocks, workers)
    return _to_coupling(PF @ Pv.T, spec.n_dir)


def _lightcone_coupling(spec, f_eff, settings, workers):
    U = settings.box(spec)
    P = settings.resolved_panels(spec.N)
    npp = settings.nodes_per_panel
    vrule = lightcone_v_rule(U, P, npp)
    vq = vrule.nodes
    n = spec.n_dir
    H = np.empty((n * n, vq.size))

    def work(sl):
        for q in range(sl.start, sl.stop):
            urule = lightcone_u_rule(vq[q], U, P, npp)
            x = urule.nodes
            vals = np.asarray(f_eff(x, np.full_like(x, vq[q])), dtype=float)
            if not np.all(np.isfinite(vals)):
                p = int(np.argmax(~np.isfinite(vals)))
                raise NonFiniteIntegrandError((float(x[p]), float(vq[q])), vals[p])
            phi = basis_matrix(spec, x, "u")
            H[:, q] = ((phi * (urule.weights * vals)) @ phi.T).ravel()

    _run(work, _row_blocks(vq.size, workers), workers)
    Pv = _pair_table(basis_matrix(spec, vq, "v"), vrule.weights)
    return _to_coupling(H @ Pv.T, n)


BLOCK_ROWS = 64


def _row_blocks(n: int, workers: int):
    # block size is fixed so every block sees the same BLAS call whatever the
    # worker count; only the scheduling changes
    return [slice(a, min(a + BLOCK_ROWS, n)) for a in range(0, n, BLOCK_ROWS)]


def _run(fn, blocks, workers):
    if workers <= 1 or len(blocks) == 1:
        for b in blocks:
            fn(b)
        return
    with ThreadPoolExecutor(max_workers=workers) as ex:
        for fut in [ex.submit(fn, b) for b in blocks]:
            fut.result()


def coupling_matrix(spec: BasisSpec, pot: PotentialSpec, quad: Optional[QuadratureSettings] = None,
                    workers: int = 1, symmetrize: bool = True) -> np.ndarray:
    """Coupling matrix C of ``pot`` between all pairs of product functions.

    Every entry is computed from the same fixed set of nodes and reduced in a
    fixed order, so the result does not depend on ``workers``.
    """
    quad = quad or QuadratureSettings()
    if spec.kind == FOURIER and quad.half_width is not None and quad.half_width != spec.L:
        raise ConfigurationError("the Fourier basis is integrated over exactly [-L, L]")
    check_support(spec, quad.box(spec))
    if spec.kind == OSCILLATOR and pot.vanishes:
        return np.zeros((spec.size, spec.size))
    scheme = _resolve_scheme(quad, pot)
    if scheme == LIGHTCONE and quad.family == TRAPEZOID:
        raise ConfigurationError("the lightcone scheme uses Gauss panels only")
    f_eff = pot.effective(spec)
    if scheme == TENSOR:
        C = _tensor_coupling(spec, f_eff, quad, workers)
    else:
        C = _lightcone_coupling(spec, f_eff, quad, workers)
    if symmetrize:
        C = 0.5 * (C + C.T)
    return C


@dataclass(frozen=True)
class GalerkinSystem:
    """Assembled Galerkin matrix D and its provenance."""

    spec: BasisSpec
    potential: PotentialSpec
    C: np.ndarray
    D: np.ndarray
    quadrature: dict = field(default_factory=dict)


def galerkin_matrix(spec: BasisSpec, pot: PotentialSpec, quad: Optional[QuadratureSettings] = None,
                    workers: int = 1) -> GalerkinSystem:
    """Assemble D = diag + C, symmetrized."""
    quad = quad or QuadratureSettings()
    C = coupling_matrix(spec, pot, quad, workers=workers, symmetrize=False)
    asym = np.abs(C - C.T).max() if C.size else 0.0
    if asym > 1e-8:
        log.warning("coupling matrix asymmetry %.3e exceeds 1e-8 before symmetrization", asym)
    C = 0.5 * (C + C.T)
    D = C.copy()
    D[np.diag_indices_from(D)] += diagonal(spec)
    scheme = "none" if (spec.kind == OSCILLATOR and pot.vanishes) else _resolve_scheme(quad, pot)
    desc = quad.describe(spec, scheme)
    desc["asymmetry"] = float(asym)
    for arr in (C, D):
        arr.setflags(write=False)
    return GalerkinSystem(spec, pot, C, D, desc)


def lightcone_panels(spec: BasisSpec, quad: QuadratureSettings, width: float = 0.5):
    """Outer quadrature panels whose nodes come within ``width`` of |u| = |v|.

    Used to report where a negative-curvature run is expected to be fragile.
    """
    U = quad.box(spec)
    P = quad.resolved_panels(spec.N)
    edges = np.linspace(-U, U, P + 1)
    out = []
    for i in range(P):
        for j in range(P):
            ulo, uhi, vlo, vhi = edges[i], edges[i + 1], edges[j], edges[j + 1]
            # distance from the box to the lines u = v and u = -v
            d1 = max(0.0, max(ulo - vhi, vlo - uhi)) / np.sqrt(2)
            d2 = max(0.0, max(ulo + vlo, -(uhi + vhi))) / np.sqrt(2)
            if min(d1, d2) <= width / np.sqrt(2):
                out.append((i, j))
    return out


def dump_matrix(path, M: np.ndarray, header: dict) -> None:
    """Write a matrix as plain text, one row per line, 17 significant digits."""
    with open(path, "w") as fh:
        for key, val in header.items():
            fh.write(f"# {key}={val}\n")
        np.savetxt(fh, np.asarray(M), fmt="%.17g")


def load_matrix(path):
    """Read a matrix written by :func:`dump_matrix`; returns (matrix, header)."""
    header = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, val = line[1:].strip().partition("=")
            header[key] = val
    return np.loadtxt(path, comments="#", ndmin=2), header
