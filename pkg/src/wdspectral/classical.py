"""
Classical trajectories of the curvature-coupled indefinite oscillator.

Dynamics (unit frequencies) with constraint

    u'' = -u - (3k/4) u / |u^2 - v^2|^(2/3)
    v'' = -v - (3k/4) v / |u^2 - v^2|^(2/3)
    E   = u'^2 + u^2 - v'^2 - v^2 + (9/4) k cbrt(u^2 - v^2) = 0

The force is singular on the light-cone lines u = +-v, which trajectories
cross. Integration therefore runs in light-cone variables s = u + v,
w = u - v with s = sigma^3, w = zeta^3 and the time transform
dt = sigma^2 zeta^2 dtau, in which the equations of motion are polynomial:

    sigma' = zeta^2 s_t / 3          zeta' = sigma^2 w_t / 3
    s_t'   = -sigma^5 zeta^2 - (3k/4) sigma^3
    w_t'   = -sigma^2 zeta^5 - (3k/4) zeta^3
    t'     = sigma^2 zeta^2

(s_t, w_t are the physical velocities ds/dt, dw/dt). Steps are uniform in
tau, so physical-time steps shrink automatically near the singular lines.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.optimize import brentq

EPS_REG = 1e-12
EPS_SING = 1e-6

# reference tau step giving a constraint drift of ~1e-9 per period at chi=4
_H_REF = 4e-3
_TOL_REF = 1e-9
# step ~ tol**(2/9): error of the order-5 pair falls at least linearly in tol
_STEP_EXPONENT = 2.0 / 9.0


def constraint_residual(u, v, du, dv, k: float):
    """Zero-energy constraint E(u, v, du, dv)."""
    return du * du + u * u - dv * dv - v * v + 2.25 * k * np.cbrt(u * u - v * v)


@dataclass(frozen=True)
class ClassicalState:
    t: float
    u: float
    v: float
    du: float
    dv: float

    def constraint(self, k: float) -> float:
        return float(constraint_residual(self.u, self.v, self.du, self.dv, k))


def initial_state(chi: float, k: float) -> ClassicalState:
    """u = -chi, v = 0, du = 0 and dv > 0 chosen so that E = 0."""
    if not chi > 0:
        raise ValueError(f"chi must be positive, got {chi!r}")
    rad = chi * chi + 2.25 * k * np.cbrt(chi * chi)
    if rad < 0:
        # chi^2 + (9/4) k chi^(2/3) >= 0  <=>  chi^(4/3) >= -(9/4) k
        chi_min = (-2.25 * k) ** 0.75
        raise ValueError(f"no real initial velocity for chi={chi!r}, k={k!r}: "
                         f"need chi >= {chi_min:.6g}")
    return ClassicalState(0.0, -float(chi), 0.0, 0.0, float(np.sqrt(rad)))


def rhs(state: ClassicalState, k: float, eps_reg: float = EPS_REG):
    """(du, dv, ddu, ddv) in physical time with a floored singular denominator."""
    u, v = state.u, state.v
    den = max(abs(u * u - v * v) ** (2.0 / 3.0), eps_reg)
    c = 0.75 * k / den
    return (state.du, state.dv, -u - c * u, -v - c * v)


# -- regularized system ------------------------------------------------------

def _to_reg(state: ClassicalState) -> np.ndarray:
    s = state.u + state.v
    w = state.u - state.v
    return np.array([state.t, np.cbrt(s), np.cbrt(w), state.du + state.dv, state.du - state.dv])


def _from_reg(Y: np.ndarray):
    s = Y[1] ** 3
    w = Y[2] ** 3
    return Y[0], 0.5 * (s + w), 0.5 * (s - w), 0.5 * (Y[3] + Y[4]), 0.5 * (Y[3] - Y[4])


def regularized_rhs(y: np.ndarray, k: float) -> np.ndarray:
    """Derivative of (t, sigma, zeta, s_t, w_t) with respect to tau."""
    _, sg, ze, sd, wd = y
    s2 = sg * sg
    z2 = ze * ze
    c = 0.75 * k
    return np.array([
        s2 * z2,
        z2 * sd / 3.0,
        s2 * wd / 3.0,
        -s2 * sg ** 3 * z2 - c * sg ** 3,
        -z2 * ze ** 3 * s2 - c * ze ** 3,
    ])


# Dormand-Prince 5(4)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _dp_step(y, h, k):
    K = np.empty((7, y.size))
    K[0] = regularized_rhs(y, k)
    for i in range(1, 7):
        K[i] = regularized_rhs(y + h * (np.asarray(_A[i]) @ K[:i]), k)
    return y + h * (_B5 @ K), h * (_E @ K)


@dataclass
class ClassicalTrajectory:
    """Time-ordered samples with the constraint residual at every sample."""

    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    constraint: np.ndarray
    singular_events: List[float] = field(default_factory=list)
    truncated: bool = False
    chi: float = float("nan")
    k: float = 0.0
    tol: float = 1e-9
    rejected_steps: int = 0

    def __len__(self):
        return self.t.size

    def states(self):
        for row in zip(self.t, self.u, self.v, self.du, self.dv):
            yield ClassicalState(*map(float, row))

    def away_from_singular(self, factor: float = 10.0, eps_sing: float = EPS_SING) -> np.ndarray:
        """Mask of samples with |u^2 - v^2| > factor * eps_sing."""
        return np.abs(self.u * self.u - self.v * self.v) > factor * eps_sing

    def radius(self) -> np.ndarray:
        return np.hypot(self.u, self.v)

    def angle(self) -> np.ndarray:
        """Unwrapped polar angle of (u, v)."""
        return np.unwrap(np.arctan2(self.v, self.u))

    def radius_at_angles(self, angles) -> np.ndarray:
        """Radius where the first full revolution passes each polar angle.

        Angles are taken modulo 2 pi; NaN where the trajectory does not cover
        the angle.
        """
        th = self.angle()
        th = th - th[0]
        sign = np.sign(th[-1]) or 1.0
        th = sign * th
        upto = np.searchsorted(np.maximum.accumulate(th), 2 * np.pi, side="right")
        th_rev = th[:upto + 1]
        r_rev = self.radius()[:upto + 1]
        start = np.arctan2(self.v[0], self.u[0])
        rel = np.mod(sign * (np.asarray(angles, dtype=float) - start), 2 * np.pi)
        mono = np.maximum.accumulate(th_rev)
        out = np.interp(rel, mono, r_rev, left=np.nan, right=np.nan)
        out[rel > mono[-1]] = np.nan
        return out


def _event_time(y0, y1, comp):
    # linear interpolation of the crossing of a regularized coordinate
    a, b = y0[comp], y1[comp]
    frac = a / (a - b)
    return float(y0[0] + frac * (y1[0] - y0[0]))


def integrate_from(state: ClassicalState, k: float, t_max: float, tol: float = 1e-9,
                   eps_sing: float = EPS_SING, max_steps: int = 2_000_000) -> ClassicalTrajectory:
    """Integrate from an arbitrary state for a physical duration ``t_max``.

    Steps are uniform in the regularized time tau with size proportional to
    tol**(2/9); each step is checked with the embedded 4th-order estimate and
    retried at half size when the estimate exceeds ``tol``. The last step is
    shortened to land on ``t_max`` exactly.
    """
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max!r}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    h0 = _H_REF * (tol / _TOL_REF) ** _STEP_EXPONENT
    t_end = state.t + t_max
    y = _to_reg(state)
    ys = [y]
    events: List[float] = []
    rejected = 0
    truncated = False
    stall = 0
    for _ in range(max_steps):
        h = h0
        for _retry in range(40):
            y_new, err = _dp_step(y, h, k)
            if np.abs(err).max() <= tol:
                break
            h *= 0.5
            rejected += 1
        else:
            truncated = True
            break
        if y_new[0] >= t_end:
            y_new = _land_on(y, h, k, t_end)
            _record_events(y, y_new, events)
            ys.append(y_new)
            break
        _record_events(y, y_new, events)
        if y_new[0] - y[0] <= 1e-15 * max(1.0, abs(y[0])):
            stall += 1
            if stall > 1000:
                truncated = True
                ys.append(y_new)
                break
        else:
            stall = 0
        y = y_new
        ys.append(y)
    else:
        truncated = True
    Y = np.array(ys).T
    t, u, v, du, dv = _from_reg(Y)
    x = u * u - v * v
    near = np.abs(x) < eps_sing
    for ti in t[near]:
        if not any(abs(ti - e) < 1e-9 for e in events):
            events.append(float(ti))
    return ClassicalTrajectory(
        t=t, u=u, v=v, du=du, dv=dv,
        constraint=constraint_residual(u, v, du, dv, k),
        singular_events=sorted(events),
        truncated=truncated,
        k=float(k),
        tol=float(tol),
        rejected_steps=rejected,
    )


def _record_events(y0, y1, events):
    for comp in (1, 2):
        if y0[comp] == 0.0 or np.sign(y0[comp]) != np.sign(y1[comp]):
            events.append(_event_time(y0, y1, comp))


def _land_on(y, h, k, t_end):
    # step length so that t(tau + h) = t_end; t is increasing in h
    def gap(hh):
        return _dp_step(y, hh, k)[0][0] - t_end

    hs = brentq(gap, 0.0, h, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    y_new = _dp_step(y, hs, k)[0].copy()
    y_new[0] = t_end
    return y_new


def integrate(chi: float, k: float, t_max: float = 2 * np.pi, tol: float = 1e-9,
              eps_sing: float = EPS_SING) -> ClassicalTrajectory:
    """Trajectory from :func:`initial_state` over ``[0, t_max]``."""
    traj = integrate_from(initial_state(chi, k), k, t_max, tol, eps_sing)
    traj.chi = float(chi)
    return traj


def write_trajectory_csv(path, traj: ClassicalTrajectory) -> None:
    with open(path, "w") as fh:
        fh.write(f"# chi={traj.chi!r}\n# k={traj.k!r}\n# tol={traj.tol!r}\n")
        fh.write(f"# truncated={int(traj.truncated)}\n")
        fh.write("# singular_events=" + " ".join(f"{e:.17g}" for e in traj.singular_events) + "\n")
        fh.write("t,u,v,du,dv,constraint_residual\n")
        for row in zip(traj.t, traj.u, traj.v, traj.du, traj.dv, traj.constraint):
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def read_trajectory_csv(path) -> ClassicalTrajectory:
    meta = {}
    with open(path) as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key] = val
        elif line and not line.startswith("t,"):
            body.append([float(x) for x in line.split(",")])
    arr = np.array(body, dtype=float).reshape(-1, 6).T
    events = [float(x) for x in meta.get("singular_events", "").split()]
    return ClassicalTrajectory(
        t=arr[0], u=arr[1], v=arr[2], du=arr[3], dv=arr[4], constraint=arr[5],
        singular_events=events, truncated=bool(int(meta.get("truncated", "0"))),
        chi=float(meta.get("chi", "nan")), k=float(meta.get("k", "0")),
        tol=float(meta.get("tol", "1e-9")),
    )
