"""
Orthonormal product bases on the (u, v) plane.

Two families are supported:

* ``oscillator`` -- Hermite functions (harmonic oscillator eigenstates) with
  frequency ``omega1`` along u and ``omega2`` along v, quantum numbers
  ``0 .. N-1`` in each direction.
* ``fourier`` -- sines and cosines on the periodic box ``[-L, L]``, 2N
  functions per direction (cos m=0..N-1, sin m=1..N).

A two-dimensional basis function is the product of a u-factor and a v-factor.
Flat indices enumerate ``a * n_dir + b`` where ``a`` is the u-factor index and
``b`` the v-factor index.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

PI_QUARTER = np.pi ** -0.25

OSCILLATOR = "oscillator"
FOURIER = "fourier"
SIN = "sin"
COS = "cos"


@dataclass(frozen=True)
class BasisSpec:
    """Which basis, its truncation and its scale parameters.

    Parameters
    ----------
    kind : {"oscillator", "fourier"}
    N : int
        Truncation per direction.
    omega1, omega2 : float
        Oscillator frequencies along u and v. They also enter the Fourier
        effective potential.
    L : float, optional
        Half-width of the periodic Fourier box. Required iff kind="fourier".
    """

    kind: str
    N: int
    omega1: float = 1.0
    omega2: float = 1.0
    L: Optional[float] = None

    def __post_init__(self):
        if self.kind not in (OSCILLATOR, FOURIER):
            raise ValueError(f"kind must be 'oscillator' or 'fourier', got {self.kind!r}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if not self.omega1 > 0:
            raise ValueError(f"omega1 must be positive, got {self.omega1!r}")
        if not self.omega2 > 0:
            raise ValueError(f"omega2 must be positive, got {self.omega2!r}")
        if self.kind == FOURIER:
            if self.L is None or not self.L > 0:
                raise ValueError(f"L must be positive for the fourier basis, got {self.L!r}")
        elif self.L is not None:
            raise ValueError("L is only meaningful for the fourier basis")
        object.__setattr__(self, "N", int(self.N))

    @property
    def n_dir(self) -> int:
        """Number of one-dimensional factors per direction."""
        return self.N if self.kind == OSCILLATOR else 2 * self.N

    @property
    def size(self) -> int:
        """Total basis size B (N**2 or 4 N**2)."""
        return self.n_dir ** 2

    # -- index bookkeeping -------------------------------------------------

    def factor_label(self, a: int) -> Union[int, Tuple[int, str]]:
        """Structured label of a one-dimensional factor index.

        Oscillator factors are labelled by their quantum number; Fourier
        factors by ``(m, parity)``.
        """
        if not 0 <= a < self.n_dir:
            raise IndexError(f"factor index {a} out of range [0, {self.n_dir})")
        if self.kind == OSCILLATOR:
            return a
        if a < self.N:
            return (a, COS)
        return (a - self.N + 1, SIN)

    def factor_index(self, label) -> int:
        """Inverse of :meth:`factor_label`."""
        if self.kind == OSCILLATOR:
            m = int(label)
            if not 0 <= m < self.N:
                raise IndexError(f"quantum number {m} out of range [0, {self.N})")
            return m
        m, parity = label
        if parity == COS and 0 <= m < self.N:
            return m
        if parity == SIN and 1 <= m <= self.N:
            return self.N + m - 1
        raise IndexError(f"fourier label {label!r} not in the basis (N={self.N})")

    def flatten(self, *index) -> int:
        """Flat index of a structured index.

        ``flatten(m, n)`` for the oscillator basis and
        ``flatten(m, n, i, j)`` (``i``, ``j`` parities) for the Fourier basis.
        """
        if self.kind == OSCILLATOR:
            if len(index) != 2:
                raise ValueError("oscillator index is (m, n)")
            a, b = self.factor_index(index[0]), self.factor_index(index[1])
        else:
            if len(index) != 4:
                raise ValueError("fourier index is (m, n, i, j)")
            m, n, i, j = index
            a, b = self.factor_index((m, i)), self.factor_index((n, j))
        return a * self.n_dir + b

    def unflatten(self, flat: int):
        """Structured index of a flat index: (m, n) or (m, n, i, j)."""
        if not 0 <= flat < self.size:
            raise IndexError(f"flat index {flat} out of range [0, {self.size})")
        a, b = divmod(int(flat), self.n_dir)
        if self.kind == OSCILLATOR:
            return (a, b)
        (m, i), (n, j) = self.factor_label(a), self.factor_label(b)
        return (m, n, i, j)

    def split(self, flat: int) -> Tuple[int, int]:
        """(u-factor, v-factor) indices of a flat index."""
        if not 0 <= flat < self.size:
            raise IndexError(f"flat index {flat} out of range [0, {self.size})")
        return divmod(int(flat), self.n_dir)


# -- oscillator functions ----------------------------------------------------

def hermite_functions(n_max: int, x, omega: float = 1.0) -> np.ndarray:
    """Normalized Hermite functions alpha_0 .. alpha_{n_max-1} at points x.

    Uses the three-term recurrence for the normalized functions, so no
    factorials or raw Hermite polynomials are formed and the evaluation is
    overflow free for large n.

    Returns
    -------
    ndarray, shape (n_max, len(x))
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    if not omega > 0:
        raise ValueError("omega must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xi = np.sqrt(omega) * x
    out = np.empty((n_max, xi.size))
    if n_max == 0:
        return out
    out[0] = PI_QUARTER * np.exp(-0.5 * xi * xi)
    if n_max > 1:
        out[1] = np.sqrt(2.0) * xi * out[0]
    for n in range(2, n_max):
        out[n] = xi * np.sqrt(2.0 / n) * out[n - 1] - np.sqrt((n - 1.0) / n) * out[n - 2]
    out *= omega ** 0.25
    return out


def hermite_function_derivatives(n_max: int, x, omega: float = 1.0) -> np.ndarray:
    """First derivatives d/dx alpha_n(x) for n < n_max.

    Uses alpha_n' = sqrt(omega) (sqrt(n/2) alpha_{n-1} - sqrt((n+1)/2) alpha_{n+1}).
    """
    h = hermite_functions(n_max + 1, x, omega)
    out = np.empty((n_max, h.shape[1]))
    for n in range(n_max):
        lower = np.sqrt(n / 2.0) * h[n - 1] if n > 0 else 0.0
        out[n] = lower - np.sqrt((n + 1) / 2.0) * h[n + 1]
    return np.sqrt(omega) * out


def oscillator_function(n: int, x, omega: float = 1.0):
    """alpha_n(x) for a single quantum number n (scalar or array x)."""
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a non-negative integer, got {n!r}")
    scalar = np.ndim(x) == 0
    val = hermite_functions(int(n) + 1, np.ravel(x), omega)[-1]
    return float(val[0]) if scalar else val.reshape(np.shape(x))


def oscillator_eigenvalue(n: int, omega: float) -> float:
    """Eigenvalue (2n+1) omega of -d2/dx2 + omega^2 x^2 on alpha_n."""
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a non-negative integer, got {n!r}")
    if not omega > 0:
        raise ValueError("omega must be positive")
    return (2 * n + 1) * omega


# -- fourier functions -------------------------------------------------------

def fourier_function(m: int, parity: str, x, L: float):
    """Unit-norm trigonometric function on [-L, L].

    ``sin``: sin(m pi x / L)/sqrt(L), m >= 1.
    ``cos``: cos(m pi x / L)/sqrt(L) for m >= 1 and 1/sqrt(2L) for m = 0.
    """
    if not L > 0:
        raise ValueError("L must be positive")
    if int(m) != m or m < 0:
        raise ValueError(f"m must be a non-negative integer, got {m!r}")
    x = np.asarray(x, dtype=float)
    k = m * np.pi / L
    if parity == SIN:
        if m == 0:
            raise ValueError("sin with m=0 is the null function and is excluded")
        val = np.sin(k * x) / np.sqrt(L)
    elif parity == COS:
        if m == 0:
            val = np.full_like(x, 1.0 / np.sqrt(2.0 * L))
        else:
            val = np.cos(k * x) / np.sqrt(L)
    else:
        raise ValueError(f"parity must be 'sin' or 'cos', got {parity!r}")
    return float(val) if val.ndim == 0 else val


def fourier_functions(N: int, x, L: float, derivative: int = 0) -> np.ndarray:
    """All 2N Fourier factors (cos 0..N-1 then sin 1..N) at x.

    Returns
    -------
    ndarray, shape (2N, len(x))
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m = np.arange(N)[:, None]
    ks = np.arange(1, N + 1)[:, None] * np.pi / L
    kc = m * np.pi / L
    phase = kc * x
    phase_s = ks * x
    if derivative == 0:
        c = np.cos(phase)
        s = np.sin(phase_s)
    elif derivative == 1:
        c = -kc * np.sin(phase)
        s = ks * np.cos(phase_s)
    else:
        raise ValueError("only derivative orders 0 and 1 are supported")
    c = c / np.sqrt(L)
    c[0] *= 1.0 / np.sqrt(2.0)
    return np.vstack([c, s / np.sqrt(L)])


# -- product basis -----------------------------------------------------------

def basis_matrix(spec: BasisSpec, points, direction: str = "u", derivative: int = 0) -> np.ndarray:
    """One-dimensional factors of ``spec`` evaluated at ``points``.

    Row ``f``, column ``p`` holds factor ``f`` at point ``p``. The u-direction
    uses ``omega1`` and the v-direction ``omega2`` for the oscillator basis.
    """
    if direction not in ("u", "v"):
        raise ValueError("direction must be 'u' or 'v'")
    points = np.atleast_1d(np.asarray(points, dtype=float))
    if spec.kind == OSCILLATOR:
        omega = spec.omega1 if direction == "u" else spec.omega2
        if derivative == 0:
            return hermite_functions(spec.N, points, omega)
        if derivative == 1:
            return hermite_function_derivatives(spec.N, points, omega)
        raise ValueError("only derivative orders 0 and 1 are supported")
    return fourier_functions(spec.N, points, spec.L, derivative)


def _factor_value(spec: BasisSpec, a: int, x: float, direction: str) -> float:
    label = spec.factor_label(a)
    if spec.kind == OSCILLATOR:
        omega = spec.omega1 if direction == "u" else spec.omega2
        return oscillator_function(label, x, omega)
    m, parity = label
    return fourier_function(m, parity, x, spec.L)


def basis_value(spec: BasisSpec, idx, u: float, v: float) -> float:
    """Value of one product basis function at (u, v).

    ``idx`` is a flat index or a structured tuple accepted by
    :meth:`BasisSpec.flatten`.
    """
    flat = spec.flatten(*idx) if isinstance(idx, tuple) else int(idx)
    a, b = spec.split(flat)
    return _factor_value(spec, a, u, "u") * _factor_value(spec, b, v, "v")
