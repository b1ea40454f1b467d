"""
Grid fields and relative L2-type error measures between wave solutions.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import hermite_functions
from .solver import closed_form_coefficients

REFERENCE = "reference"
SELF_CONSISTENCY = "self_consistency"


@dataclass(frozen=True)
class GridField:
    """Complex samples on a uniform M x M grid (endpoints included).

    ``values[i, j]`` is the field at ``(u[i], v[j])``.
    """

    u_min: float
    u_max: float
    v_min: float
    v_max: float
    M: int
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 2:
            raise ValueError(f"M must be an integer >= 2, got {self.M!r}")
        if not (self.u_min < self.u_max and self.v_min < self.v_max):
            raise ValueError("grid box must have positive extent")
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.M, self.M):
            raise ValueError(f"values must have shape ({self.M}, {self.M}), got {vals.shape}")
        object.__setattr__(self, "values", vals)

    @property
    def u(self) -> np.ndarray:
        return np.linspace(self.u_min, self.u_max, self.M)

    @property
    def v(self) -> np.ndarray:
        return np.linspace(self.v_min, self.v_max, self.M)

    @property
    def spacing(self):
        return ((self.u_max - self.u_min) / (self.M - 1), (self.v_max - self.v_min) / (self.M - 1))

    @property
    def box(self):
        return (self.u_min, self.u_max, self.v_min, self.v_max)

    def same_grid(self, other: "GridField") -> bool:
        return self.M == other.M and np.allclose(self.box, other.box, rtol=0, atol=1e-12)

    @classmethod
    def from_function(cls, fn, box=(-8.0, 8.0, -8.0, 8.0), M: int = 128, meta=None) -> "GridField":
        """Sample ``fn(u_points, v_points) -> (M, M)`` on a uniform grid."""
        u = np.linspace(box[0], box[1], M)
        v = np.linspace(box[2], box[3], M)
        return cls(*box, M, fn(u, v), dict(meta or {}))

    def scaled(self, c) -> "GridField":
        return GridField(*self.box, self.M, c * self.values, dict(self.meta))


@dataclass(frozen=True)
class ErrorReport:
    delta: float
    M: int
    which: str
    box: tuple

    def __str__(self):
        return f"delta={self.delta:.6e} ({self.which}, M={self.M}, box={self.box})"


def delta(a: GridField, b: GridField, denominator: str = "b_norm") -> ErrorReport:
    """sqrt(sum |a - b|^2 / sum |denom|^2) over the grid.

    ``denominator="b_norm"`` normalizes by the reference field b;
    ``"a_norm"`` by a (self-consistency between two truncations, with a the
    larger one).
    """
    if not a.same_grid(b):
        raise ValueError("fields live on different grids")
    if denominator == "b_norm":
        den, which = b.values, REFERENCE
    elif denominator == "a_norm":
        den, which = a.values, SELF_CONSISTENCY
    else:
        raise ValueError(f"denominator must be 'b_norm' or 'a_norm', got {denominator!r}")
    norm = np.sum(np.abs(den) ** 2)
    if norm == 0:
        raise ZeroDivisionError("denominator field vanishes on the grid")
    d = np.sqrt(np.sum(np.abs(a.values - b.values) ** 2) / norm)
    return ErrorReport(float(d), a.M, which, a.box)


def reference_k0(chi: float, omega: float = 1.0, terms: int = 120,
                 box=(-8.0, 8.0, -8.0, 8.0), M: int = 128, slope: str = "canonical") -> GridField:
    """Closed-form k = 0 packet sum_n A_n alpha_n(u) beta_n(v), n < terms."""
    if terms < 2:
        raise ValueError("terms must be at least 2")
    A = closed_form_coefficients(chi, terms, omega, slope)

    def fn(u, v):
        return hermite_functions(terms, u, omega).T @ (A[:, None] * hermite_functions(terms, v, omega))

    meta = {"source": "closed_form_k0", "chi": chi, "omega": omega, "terms": terms}
    return GridField.from_function(fn, box, M, meta)


def write_grid_csv(path, grid: GridField) -> None:
    """Row-major CSV with columns u,v,re,im,abs2 and a commented header."""
    U, V = np.meshgrid(grid.u, grid.v, indexing="ij")
    vals = grid.values
    with open(path, "w") as fh:
        fh.write(f"# box={grid.u_min!r},{grid.u_max!r},{grid.v_min!r},{grid.v_max!r}\n")
        fh.write(f"# M={grid.M}\n")
        for key, val in grid.meta.items():
            fh.write(f"# {key}={val}\n")
        fh.write("u,v,re,im,abs2\n")
        data = np.column_stack([U.ravel(), V.ravel(), vals.real.ravel(), vals.imag.ravel(),
                                (np.abs(vals) ** 2).ravel()])
        np.savetxt(fh, data, fmt="%.17g", delimiter=",")


def read_grid_csv(path) -> GridField:
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, val = line[1:].strip().partition("=")
            meta[key] = val
    # the column-name line is the first non-comment line
    data = np.loadtxt(path, comments="#", delimiter=",", skiprows=len(meta) + 1, ndmin=2)
    box = tuple(float(x) for x in meta.pop("box").split(","))
    M = int(meta.pop("M"))
    values = (data[:, 2] + 1j * data[:, 3]).reshape(M, M)
    return GridField(*box, M, values, meta)
