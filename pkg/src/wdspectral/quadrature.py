"""
One- and two-dimensional quadrature rules.

Besides plain Gauss-Legendre, composite and trapezoid rules, this module
provides *kink-adapted* composite rules: panels are broken at given points
where the integrand carries a cube-root type kink, and the panels touching
those points are pulled back through a cubic map ``x = a + h s**3`` that turns
``|x - a|**(1/3)`` into a smooth function of ``s``. The light-cone kink of
``(u**2 - v**2)**(1/3)`` is handled this way (see :func:`lightcone_u_rule`).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

GAUSS_LEGENDRE = "gauss_legendre"
COMPOSITE_GAUSS = "composite_gauss"
TRAPEZOID = "trapezoid"

FAMILIES = (GAUSS_LEGENDRE, COMPOSITE_GAUSS, TRAPEZOID)


class NonFiniteIntegrandError(FloatingPointError):
    """Raised when an integrand is NaN or infinite at a quadrature node."""

    def __init__(self, node, value):
        self.node = node
        self.value = value
        super().__init__(f"non-finite integrand value {value!r} at node {node!r}")


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a one-dimensional rule on ``domain``."""

    nodes: np.ndarray
    weights: np.ndarray
    domain: tuple
    family: str

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size < 1:
            raise ValueError("nodes and weights must be 1-D arrays of equal, nonzero length")
        a, b = self.domain
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if nodes[0] < a or nodes[-1] > b:
            raise ValueError("nodes must lie inside the domain")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "domain", (float(a), float(b)))

    def __len__(self):
        return self.nodes.size

    def integrate(self, f: Callable) -> float:
        """Apply the rule to a vectorized integrand."""
        vals = np.asarray(f(self.nodes), dtype=float)
        _check_finite(vals, self.nodes)
        return float(self.weights @ vals)


def _check_interval(a, b):
    if not a < b:
        raise ValueError(f"require a < b, got a={a!r}, b={b!r}")


def _check_finite(vals, nodes_u, nodes_v=None):
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = np.unravel_index(np.argmax(bad), vals.shape)
        if nodes_v is None:
            node = float(nodes_u[idx[0]])
        else:
            node = (float(nodes_u[idx[0]]), float(nodes_v[idx[1]]))
        raise NonFiniteIntegrandError(node, vals[idx])


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    """n-point Gauss-Legendre rule on [a, b], exact to degree 2n-1."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    _check_interval(a, b)
    x, w = np.polynomial.legendre.leggauss(int(n))
    h = 0.5 * (b - a)
    return QuadratureRule(0.5 * (a + b) + h * x, h * w, (a, b), GAUSS_LEGENDRE)


def trapezoid(n: int, a: float = 0.0, b: float = 1.0) -> QuadratureRule:
    """Uniform trapezoid rule with n points, endpoints half weighted."""
    if int(n) != n or n < 2:
        raise ValueError(f"trapezoid rule needs at least 2 points, got {n!r}")
    _check_interval(a, b)
    x = np.linspace(a, b, int(n))
    w = np.full(int(n), (b - a) / (n - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return QuadratureRule(x, w, (a, b), TRAPEZOID)


def composite(family: str, panels: int, nodes_per_panel: int, a: float, b: float) -> QuadratureRule:
    """Concatenate ``panels`` equal panels of a base rule on [a, b].

    For the trapezoid family shared panel endpoints are merged so the result
    is the uniform trapezoid rule with ``panels * (nodes_per_panel - 1) + 1``
    points.
    """
    if int(panels) != panels or panels < 1:
        raise ValueError(f"panels must be a positive integer, got {panels!r}")
    _check_interval(a, b)
    if family == TRAPEZOID:
        return trapezoid(int(panels) * (int(nodes_per_panel) - 1) + 1, a, b)
    if family not in (GAUSS_LEGENDRE, COMPOSITE_GAUSS):
        raise ValueError(f"unknown quadrature family {family!r}")
    base = gauss_legendre(nodes_per_panel)
    edges = np.linspace(a, b, int(panels) + 1)
    h = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + h[:, None] * base.nodes).ravel()
    w = (h[:, None] * base.weights).ravel()
    return QuadratureRule(x, w, (a, b), COMPOSITE_GAUSS)


# -- kink-adapted rules --------------------------------------------------------

_GL_CACHE: dict = {}


def _unit_gauss(n):
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[n]


def _mapped_panel(a, b, n, kink_left, kink_right):
    s, ws = _unit_gauss(n)
    h = b - a
    if kink_left and kink_right:
        # quintic smoothstep: triple zeros of x-a and b-x at the ends
        phi = s ** 3 * (10.0 - 15.0 * s + 6.0 * s * s)
        dphi = 30.0 * s * s * (1.0 - s) ** 2
        return a + h * phi, h * dphi * ws
    if kink_left:
        return a + h * s ** 3, 3.0 * h * s * s * ws
    if kink_right:
        t = 1.0 - s
        return b - h * t ** 3, 3.0 * h * t * t * ws
    return a + h * s, h * ws


def kink_adapted_rule(a: float, b: float, kinks: Sequence[float], panel_width: float,
                      nodes_per_panel: int) -> QuadratureRule:
    """Composite Gauss rule on [a, b] with panels broken at ``kinks``.

    Each sub-interval between consecutive break points is divided into
    ``ceil(length / panel_width)`` equal panels; panels adjacent to a kink are
    cubically graded toward it.
    """
    _check_interval(a, b)
    cuts = sorted({float(k) for k in kinks if a < k < b})
    bounds = [a] + cuts + [b]
    is_kink = [False] + [True] * len(cuts) + [False]
    xs, ws = [], []
    for i in range(len(bounds) - 1):
        lo, hi = bounds[i], bounds[i + 1]
        if hi - lo <= 0:
            continue
        m = max(1, int(np.ceil((hi - lo) / panel_width - 1e-9)))
        edges = np.linspace(lo, hi, m + 1)
        for p in range(m):
            x, w = _mapped_panel(edges[p], edges[p + 1], nodes_per_panel,
                                 is_kink[i] and p == 0, is_kink[i + 1] and p == m - 1)
            xs.append(x)
            ws.append(w)
    x = np.concatenate(xs)
    w = np.concatenate(ws)
    # graded panels put their first node extremely close to the kink; drop
    # coincident nodes (zero-weight contributions) to keep nodes increasing
    keep = np.concatenate([[True], np.diff(x) > 0])
    return QuadratureRule(x[keep], w[keep], (a, b), COMPOSITE_GAUSS)


def lightcone_v_rule(half_width: float, panels: int, nodes_per_panel: int) -> QuadratureRule:
    """Outer (v) rule on [-U, U], graded toward v = 0."""
    return kink_adapted_rule(-half_width, half_width, [0.0], 2.0 * half_width / panels,
                             nodes_per_panel)


def lightcone_u_rule(v: float, half_width: float, panels: int, nodes_per_panel: int) -> QuadratureRule:
    """Inner (u) rule on [-U, U] for fixed v, graded toward u = -|v| and u = +|v|."""
    av = abs(float(v))
    return kink_adapted_rule(-half_width, half_width, [-av, av], 2.0 * half_width / panels,
                             nodes_per_panel)


# -- 2-D integration ---------------------------------------------------------

def integrate_2d(rule_u: QuadratureRule, rule_v: QuadratureRule, f: Callable) -> float:
    """Tensor-product integral sum_{p,q} w_p w_q f(u_p, v_q).

    ``f`` is called once on the full node mesh (``indexing='ij'``); the
    weighted reduction is two fixed-order dot products.
    """
    U, V = np.meshgrid(rule_u.nodes, rule_v.nodes, indexing="ij")
    vals = np.asarray(f(U, V), dtype=float)
    if vals.shape != U.shape:
        vals = np.broadcast_to(vals, U.shape)
    _check_finite(vals, rule_u.nodes, rule_v.nodes)
    return float(rule_u.weights @ (vals @ rule_v.weights))


# -- assembly settings -------------------------------------------------------

LIGHTCONE = "lightcone"
TENSOR = "tensor"
AUTO = "auto"


@dataclass(frozen=True)
class QuadratureSettings:
    """How Galerkin integrals are discretized.

    Parameters
    ----------
    scheme : {"auto", "lightcone", "tensor"}
        ``tensor`` is a plain tensor-product rule; ``lightcone`` breaks the
        inner u panels at u = +-|v| and grades them (needed for the cube-root
        potential). ``auto`` picks ``lightcone`` whenever the built-in potential
        is active (k != 0) and ``tensor`` otherwise.
    family : {"gauss_legendre", "trapezoid"}
        Panel rule of the tensor scheme.
    panels : int, optional
        Panels per direction; ``None`` selects ``max(16, ceil(1.5 N))``.
    nodes_per_panel : int
    half_width : float, optional
        Integration box half-width U for the oscillator basis; ``None``
        selects ``max(8, chi + 6, sqrt(2N - 1) + 4) / sqrt(min(omega))``.
        Ignored for the Fourier basis, whose box is exactly [-L, L].
    """

    scheme: str = AUTO
    family: str = GAUSS_LEGENDRE
    panels: Optional[int] = None
    nodes_per_panel: int = 16
    half_width: Optional[float] = None
    chi: float = 4.0

    def __post_init__(self):
        if self.scheme not in (AUTO, LIGHTCONE, TENSOR):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown quadrature family {self.family!r}")
        if self.panels is not None and (int(self.panels) != self.panels or self.panels < 1):
            raise ValueError(f"panels must be a positive integer, got {self.panels!r}")
        if int(self.nodes_per_panel) != self.nodes_per_panel or self.nodes_per_panel < 1:
            raise ValueError("nodes_per_panel must be a positive integer")
        if self.family == TRAPEZOID and self.nodes_per_panel < 2:
            raise ValueError("trapezoid panels need at least 2 nodes")
        if self.half_width is not None and not self.half_width > 0:
            raise ValueError("half_width must be positive")

    def resolved_panels(self, N: int) -> int:
        if self.panels is not None:
            return int(self.panels)
        p = max(16, int(np.ceil(1.5 * N)))
        return p + (p % 2)

    def box(self, spec) -> float:
        """Half-width of the square integration box for ``spec``."""
        if spec.kind == "fourier":
            return float(spec.L)
        if self.half_width is not None:
            return float(self.half_width)
        w = min(spec.omega1, spec.omega2)
        return max(8.0, self.chi + 6.0, np.sqrt(2.0 * spec.N - 1.0) + 4.0) / np.sqrt(w)

    def describe(self, spec, scheme: str) -> dict:
        return {
            "scheme": scheme,
            "family": self.family,
            "panels": self.resolved_panels(spec.N),
            "nodes_per_panel": int(self.nodes_per_panel),
            "half_width": self.box(spec),
        }
