"""
Run configuration: a flat set of typed keys read from ``key = value`` text.

Every key can be overridden from the command line (see :mod:`wdspectral.cli`).
Validation happens before any computation and names the offending key.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from typing import Optional

from .assembly import PotentialSpec
from .basis import FOURIER, OSCILLATOR, BasisSpec
from .quadrature import FAMILIES, AUTO, LIGHTCONE, TENSOR, QuadratureSettings


class ConfigError(ValueError):
    """Invalid configuration value; ``key`` names the field."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


def _optional_float(text):
    return None if text.strip().lower() in ("", "none", "auto") else float(text)


def _optional_int(text):
    return None if text.strip().lower() in ("", "none", "auto") else int(text)


def _floats(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


@dataclass(frozen=True)
class RunConfig:
    basis: str = OSCILLATOR
    N: int = 35
    omega1: float = 1.0
    omega2: float = 1.0
    L: Optional[float] = None
    k: float = 0.0
    chi: float = 4.0
    slope: str = "canonical"
    slope_weight: float = 1.0
    count: Optional[int] = None
    quad_scheme: str = AUTO
    quad_family: str = "gauss_legendre"
    quad_panels: Optional[int] = None
    quad_nodes: int = 16
    quad_box: Optional[float] = None
    grid_box: tuple = (-8.0, 8.0, -8.0, 8.0)
    grid_M: int = 128
    reference_terms: int = 120
    t_max: float = 2 * math.pi
    tol: float = 1e-9
    workers: int = 1
    out: str = "."

    # -- construction ------------------------------------------------------

    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls)]

    @classmethod
    def parse_value(cls, key: str, text: str):
        if key not in _PARSERS:
            raise ConfigError(key, "unknown configuration key")
        try:
            return _PARSERS[key](text.strip())
        except ValueError as exc:
            raise ConfigError(key, f"cannot parse {text!r} ({exc})") from None

    @classmethod
    def from_text(cls, text: str, overrides: Optional[dict] = None) -> "RunConfig":
        """Parse ``key = value`` lines; ``#`` starts a comment."""
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}", f"expected key = value, got {raw!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            values[key] = cls.parse_value(key, val)
        for key, val in (overrides or {}).items():
            values[key] = cls.parse_value(key, val) if isinstance(val, str) else val
        cfg = cls(**values)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path, overrides: Optional[dict] = None) -> "RunConfig":
        with open(path) as fh:
            return cls.from_text(fh.read(), overrides)

    def replace(self, **changes) -> "RunConfig":
        cfg = dataclasses.replace(self, **changes)
        cfg.validate()
        return cfg

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            val = getattr(self, f.name)
            if val is None:
                s = "none"
            elif isinstance(val, tuple):
                s = " ".join(repr(float(x)) for x in val)
            elif isinstance(val, float):
                s = repr(val)
            else:
                s = str(val)
            lines.append(f"{f.name} = {s}")
        return "\n".join(lines) + "\n"

    # -- validation --------------------------------------------------------

    def validate(self) -> None:
        def positive(key, allow_none=False):
            val = getattr(self, key)
            if val is None and allow_none:
                return
            if val is None or not (math.isfinite(val) and val > 0):
                raise ConfigError(key, f"must be a positive finite number, got {val!r}")

        def integer(key, low, allow_none=False):
            val = getattr(self, key)
            if val is None and allow_none:
                return
            if not isinstance(val, int) or isinstance(val, bool) or val < low:
                raise ConfigError(key, f"must be an integer >= {low}, got {val!r}")

        if self.basis not in (OSCILLATOR, FOURIER):
            raise ConfigError("basis", f"must be 'oscillator' or 'fourier', got {self.basis!r}")
        integer("N", 1)
        positive("omega1")
        positive("omega2")
        if self.basis == FOURIER and self.L is None:
            raise ConfigError("L", "required for the fourier basis")
        positive("L", allow_none=True)
        if not math.isfinite(self.k):
            raise ConfigError("k", "must be finite")
        positive("chi")
        if self.slope not in ("canonical", "zero"):
            raise ConfigError("slope", f"must be 'canonical' or 'zero', got {self.slope!r}")
        if not (math.isfinite(self.slope_weight) and self.slope_weight >= 0):
            raise ConfigError("slope_weight", "must be a non-negative finite number")
        integer("count", 1, allow_none=True)
        if self.count is not None and self.count > self.basis_spec().size:
            raise ConfigError("count", f"exceeds the basis size {self.basis_spec().size}")
        if self.quad_scheme not in (AUTO, LIGHTCONE, TENSOR):
            raise ConfigError("quad_scheme", f"unknown scheme {self.quad_scheme!r}")
        if self.quad_family not in FAMILIES:
            raise ConfigError("quad_family", f"unknown family {self.quad_family!r}")
        integer("quad_panels", 1, allow_none=True)
        integer("quad_nodes", 2 if self.quad_family == "trapezoid" else 1)
        positive("quad_box", allow_none=True)
        if len(self.grid_box) != 4 or not all(math.isfinite(x) for x in self.grid_box):
            raise ConfigError("grid_box", "needs four finite numbers u_min u_max v_min v_max")
        u0, u1, v0, v1 = self.grid_box
        if not (u0 < u1 and v0 < v1):
            raise ConfigError("grid_box", "must have u_min < u_max and v_min < v_max")
        integer("grid_M", 2)
        integer("reference_terms", 2)
        positive("t_max")
        positive("tol")
        integer("workers", 1)
        if self.k < 0 and 2.25 * self.k * self.chi ** (2.0 / 3.0) + self.chi ** 2 < 0:
            raise ConfigError("chi", "too small for the classical initial velocity at this k")

    # -- builders ----------------------------------------------------------

    def basis_spec(self) -> BasisSpec:
        return BasisSpec(self.basis, self.N, self.omega1, self.omega2,
                         self.L if self.basis == FOURIER else None)

    def potential(self) -> PotentialSpec:
        return PotentialSpec(k=self.k)

    def quadrature(self) -> QuadratureSettings:
        return QuadratureSettings(scheme=self.quad_scheme, family=self.quad_family,
                                  panels=self.quad_panels, nodes_per_panel=self.quad_nodes,
                                  half_width=self.quad_box, chi=self.chi)


_PARSERS = {
    "basis": str,
    "N": int,
    "omega1": float,
    "omega2": float,
    "L": _optional_float,
    "k": float,
    "chi": float,
    "slope": str,
    "slope_weight": float,
    "count": _optional_int,
    "quad_scheme": str,
    "quad_family": str,
    "quad_panels": _optional_int,
    "quad_nodes": int,
    "quad_box": _optional_float,
    "grid_box": _floats,
    "grid_M": int,
    "reference_terms": int,
    "t_max": float,
    "tol": float,
    "workers": int,
    "out": str,
}
