"""
Null-space extraction, initial-data fitting and evaluation of wave solutions.

Admissible solutions of D A = 0 are spanned by the eigenvectors of D with the
smallest |eigenvalue|. A wave packet is the complex superposition
psi = sum_i lambda_i psi_i whose trace psi(u, 0) and slope d psi/dv (u, 0)
match the requested initial data in the u-direction basis.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.special import gammaln

from .assembly import GalerkinSystem
from .basis import OSCILLATOR, BasisSpec, basis_matrix, hermite_functions
from .quadrature import composite

log = logging.getLogger(__name__)

GAP_WARNING = 10.0


@dataclass(frozen=True)
class NullSpaceBundle:
    """Eigenpairs of D with the smallest |eigenvalue|.

    ``vectors`` has shape (B, count); column i is the flattened A'^i.
    """

    vectors: np.ndarray
    eigenvalues: np.ndarray
    requested_count: int
    gap_ratio: float

    @property
    def gap_warning(self) -> bool:
        return not self.gap_ratio >= GAP_WARNING

    def __len__(self):
        return self.vectors.shape[1]


def null_space(system: GalerkinSystem, count: Optional[int] = None) -> NullSpaceBundle:
    """Select the ``count`` eigenvectors of D with smallest |eigenvalue|.

    ``count`` defaults to N (oscillator) or 2N (Fourier).
    """
    spec = system.spec
    if count is None:
        count = spec.N if spec.kind == OSCILLATOR else 2 * spec.N
    B = system.D.shape[0]
    if not 1 <= count <= B:
        raise ValueError(f"count must lie in [1, {B}], got {count}")
    w, V = linalg.eigh(system.D)
    order = np.argsort(np.abs(w), kind="stable")
    sel = order[:count]
    mags = np.abs(w[order])
    if count < B:
        gap = mags[count] / mags[count - 1] if mags[count - 1] > 0 else np.inf
    else:
        gap = np.inf
    bundle = NullSpaceBundle(np.ascontiguousarray(V[:, sel]), w[sel], int(count), float(gap))
    if bundle.gap_warning:
        log.warning("weak null-space gap: |lambda_%d|/|lambda_%d| = %.3g", count + 1, count, gap)
    return bundle


def eigenfunction_matrix(bundle: NullSpaceBundle, i: int, spec: BasisSpec) -> np.ndarray:
    """Coefficient matrix A^i[a, b] (u-factor a, v-factor b) of null vector i."""
    if not 0 <= i < len(bundle):
        raise IndexError(f"eigenfunction {i} out of range [0, {len(bundle)})")
    return bundle.vectors[:, i].reshape(spec.n_dir, spec.n_dir)


# -- initial data ------------------------------------------------------------

@dataclass(frozen=True)
class InitialData:
    """psi(u, 0) and d psi/dv (u, 0) as coefficient vectors in the u basis."""

    value_coeffs: np.ndarray
    slope_coeffs: np.ndarray
    chi: float
    slope: str = "canonical"


def _log_coherent(chi: float, n: np.ndarray) -> np.ndarray:
    # log |c_n| without the sign of chi
    lc = -0.25 * chi * chi - 0.5 * (n * np.log(2.0) + gammaln(n + 1.0))
    if chi == 0:
        return np.where(n == 0, lc, -np.inf)
    return lc + n * np.log(abs(chi))


def coherent_series(chi: float, n_terms: int) -> np.ndarray:
    """Coherent-state amplitudes exp(-chi**2/4) chi**n / sqrt(2**n n!) for all n."""
    n = np.arange(n_terms)
    sign = np.where((n % 2 == 1) & (chi < 0), -1.0, 1.0)
    return sign * np.exp(_log_coherent(chi, n))


def canonical_slope_coefficients(chi: float, n_terms: int, omega: float = 1.0) -> np.ndarray:
    """Slope coefficients d_n = c_n sqrt(omega) H_n'(0) / h_n.

    ``h_n = (-1)**(n/2) n! / (n/2)!`` on the principal branch, i.e.
    ``i**n n! / Gamma(n/2 + 1)``. It equals H_n(0) for even n, where the
    slope term vanishes, and is imaginary for odd n, which makes the packet
    complex: d_n = -2i c_n Gamma(n/2 + 1) / Gamma(n/2 + 1/2) for odd n.
    """
    n = np.arange(n_terms)
    d = np.zeros(n_terms, dtype=complex)
    odd = n % 2 == 1
    no = n[odd].astype(float)
    logmag = _log_coherent(chi, no) + gammaln(no / 2 + 1) - gammaln(no / 2 + 0.5)
    sign = -1.0 if chi < 0 else 1.0
    d[odd] = -2j * sign * np.sqrt(omega) * np.exp(logmag)
    return d


def coherent_coefficients(chi: float, N: int, slope: str = "canonical",
                          omega: float = 1.0) -> InitialData:
    """Initial data of the symmetric coherent packet of radius chi.

    ``value_coeffs`` keeps the even-n amplitudes only (the packet
    exp(-(u-chi)**2/2) + exp(-(u+chi)**2/2) is even). ``slope`` selects the
    canonical slope (see :func:`canonical_slope_coefficients`) or ``"zero"``.
    """
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    c = coherent_series(chi, N)
    c[1::2] = 0.0
    if slope == "canonical":
        d = canonical_slope_coefficients(chi, N, omega)
    elif slope == "zero":
        d = np.zeros(N, dtype=complex)
    else:
        raise ValueError(f"slope must be 'canonical' or 'zero', got {slope!r}")
    return InitialData(c, d, float(chi), slope)


def closed_form_coefficients(chi: float, n_terms: int, omega: float = 1.0,
                             slope: str = "canonical") -> np.ndarray:
    """Diagonal coefficients A_n of the k = 0, omega1 = omega2 solution.

    psi = sum_n A_n alpha_n(u) beta_n(v) reproduces the initial data exactly:
    A_n beta_n(0) = c_n for even n and A_n beta_n'(0) = d_n for odd n, i.e.
    A_n = c_n / (nu_n h_n) with nu_n = (omega/pi)**(1/4) / sqrt(2**n n!).
    """
    n = np.arange(n_terms)
    logmag = (_log_coherent(chi, n) + 0.25 * np.log(np.pi / omega)
              + 0.5 * (n * np.log(2.0) + gammaln(n + 1.0))
              - (gammaln(n + 1.0) - gammaln(n / 2.0 + 1.0)))
    sign = np.where((n % 2 == 1) & (chi < 0), -1.0, 1.0)
    A = sign * np.exp(logmag) * (1j) ** (-n)
    if slope == "zero":
        A[1::2] = 0.0
    return A


def project_initial_data(init: InitialData, spec: BasisSpec, terms: int = 120,
                         nodes: int = 400) -> InitialData:
    """Re-express oscillator-basis initial data in the u basis of ``spec``.

    The packet functions are rebuilt from ``terms`` coherent amplitudes with
    frequency ``spec.omega1`` and projected by Gauss-Legendre quadrature on
    the u-domain. Oscillator specs return the data truncated to N unchanged.
    """
    if spec.kind == OSCILLATOR:
        N = spec.N
        c = np.zeros(N)
        d = np.zeros(N, dtype=complex)
        m = min(N, init.value_coeffs.size)
        c[:m] = init.value_coeffs[:m]
        m = min(N, init.slope_coeffs.size)
        d[:m] = init.slope_coeffs[:m]
        return InitialData(c, d, init.chi, init.slope)
    full = coherent_coefficients(init.chi, terms, init.slope, omega=spec.omega2)
    rule = composite("gauss_legendre", max(8, nodes // 16), 16, -spec.L, spec.L)
    alpha = hermite_functions(terms, rule.nodes, spec.omega1)
    f0 = full.value_coeffs @ alpha
    f1 = full.slope_coeffs @ alpha
    phi = basis_matrix(spec, rule.nodes, "u") * rule.weights
    return InitialData(phi @ f0, phi @ f1, init.chi, init.slope)


# -- fitting -----------------------------------------------------------------

@dataclass(frozen=True)
class WaveSolution:
    """Superposition sum_i lambda_i psi_i of null-space eigenfunctions."""

    spec: BasisSpec
    bundle: NullSpaceBundle
    lam: np.ndarray
    init: Optional[InitialData] = None
    slope_weight: float = 1.0
    value_residual: float = 0.0
    slope_residual: float = 0.0
    degenerate: bool = False
    meta: dict = field(default_factory=dict)

    def coefficient_vector(self) -> np.ndarray:
        """Flattened complex coefficients sum_i lambda_i A'^i."""
        return self.bundle.vectors @ self.lam

    def coefficient_matrix(self) -> np.ndarray:
        n = self.spec.n_dir
        return self.coefficient_vector().reshape(n, n)

    def evaluate(self, u, v) -> np.ndarray:
        """psi on the tensor grid u x v, shape (len(u), len(v))."""
        return evaluate(self, (u, v))

    def evaluate_points(self, u, v) -> np.ndarray:
        """psi at the paired points (u[p], v[p])."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        v = np.atleast_1d(np.asarray(v, dtype=float))
        Pu = basis_matrix(self.spec, u, "u")
        Pv = basis_matrix(self.spec, v, "v")
        return np.einsum("ap,ab,bp->p", Pu, self.coefficient_matrix(), Pv)


def trace_matrices(bundle: NullSpaceBundle, spec: BasisSpec):
    """Per-eigenfunction v = 0 traces in coefficient space.

    Returns
    -------
    P, Q : ndarray, shape (n_dir, count)
        P[:, i] = A^i @ phi_v(0) and Q[:, i] = A^i @ phi_v'(0).
    """
    n = spec.n_dir
    A = bundle.vectors.reshape(n, n, -1)
    b0 = basis_matrix(spec, [0.0], "v")[:, 0]
    b1 = basis_matrix(spec, [0.0], "v", derivative=1)[:, 0]
    P = np.einsum("abi,b->ai", A, b0)
    Q = np.einsum("abi,b->ai", A, b1)
    return P, Q


def fit_lambda(bundle: NullSpaceBundle, spec: BasisSpec, init: InitialData,
               slope_weight: float = 1.0, rcond: float = 1e-12) -> WaveSolution:
    """Least-squares weights matching the initial trace and slope.

    Minimizes ||P lam - c||**2 + slope_weight ||Q lam - d||**2 over complex
    lam. Rank-deficient systems return the minimum-norm solution with the
    ``degenerate`` flag set.
    """
    if len(bundle) == 0:
        raise ValueError("empty null-space bundle")
    if slope_weight < 0:
        raise ValueError("slope_weight must be non-negative")
    n = spec.n_dir
    if init.value_coeffs.size > n or init.slope_coeffs.size > n:
        raise ValueError(f"initial data longer than the u basis ({n})")
    c = np.zeros(n, dtype=complex)
    d = np.zeros(n, dtype=complex)
    c[:init.value_coeffs.size] = init.value_coeffs
    d[:init.slope_coeffs.size] = init.slope_coeffs
    P, Q = trace_matrices(bundle, spec)
    sw = np.sqrt(slope_weight)
    M = np.vstack([P, sw * Q])
    rhs = np.concatenate([c, sw * d])
    lam, _, rank, sv = np.linalg.lstsq(M, rhs, rcond=rcond)
    degenerate = rank < M.shape[1]
    if degenerate:
        log.warning("rank-deficient initial-data fit (rank %d of %d)", rank, M.shape[1])
    return WaveSolution(
        spec=spec,
        bundle=bundle,
        lam=lam,
        init=init,
        slope_weight=float(slope_weight),
        value_residual=float(np.linalg.norm(P @ lam - c)),
        slope_residual=float(np.linalg.norm(Q @ lam - d)),
        degenerate=bool(degenerate),
    )


def evaluate(solution: WaveSolution, grid) -> np.ndarray:
    """psi sampled on the tensor grid ``(u_points, v_points)``.

    Two dense products: Phi_u.T @ A @ Phi_v.
    """
    u, v = grid
    Pu = basis_matrix(solution.spec, u, "u")
    Pv = basis_matrix(solution.spec, v, "v")
    return Pu.T @ solution.coefficient_matrix() @ Pv


def galerkin_residual(solution: WaveSolution, system: GalerkinSystem) -> float:
    """||D x|| / ||x|| for the fitted coefficient vector x."""
    x = solution.coefficient_vector()
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ValueError("galerkin residual undefined for the zero solution")
    return float(np.linalg.norm(system.D @ x) / nx)


def solve(system: GalerkinSystem, init: InitialData, slope_weight: float = 1.0,
          count: Optional[int] = None, terms: int = 120) -> WaveSolution:
    """Null space + projected initial data + fit, in one call."""
    bundle = null_space(system, count)
    data = project_initial_data(init, system.spec, terms=terms)
    return fit_lambda(bundle, system.spec, data, slope_weight)
