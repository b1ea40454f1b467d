import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from wdspectral.classical import (ClassicalState, constraint_residual, initial_state, integrate, integrate_from,
                                  read_trajectory_csv, rhs, write_trajectory_csv)


def test_initial_state_examples():
    s = initial_state(4.0, 0.0)
    assert (s.t, s.u, s.v, s.du) == (0.0, -4.0, 0.0, 0.0)
    assert s.dv == pytest.approx(4.0, rel=1e-15)
    # sqrt(16 +- (9/4) 4^(2/3)); the 6-digit values quoted for these are rounded loosely
    assert initial_state(4.0, 1.0).dv == pytest.approx(4.655068, abs=1e-5)
    assert initial_state(4.0, 1.0).dv == pytest.approx(np.sqrt(16 + 2.25 * 4 ** (2 / 3)), rel=1e-15)
    assert initial_state(4.0, -1.0).dv == pytest.approx(3.214093, abs=1e-5)
    assert initial_state(4.0, -1.0).dv == pytest.approx(np.sqrt(16 - 2.25 * 4 ** (2 / 3)), rel=1e-15)


@settings(max_examples=50, deadline=None)
@given(chi=st.floats(0.5, 20), k=st.floats(-0.5, 3))
def test_initial_state_satisfies_constraint(chi, k):
    assume(chi * chi + 2.25 * k * chi ** (2 / 3) > 0)  # real initial velocity
    s = initial_state(chi, k)
    assert abs(s.constraint(k)) <= 1e-13 * max(1.0, chi * chi)


def test_initial_state_domain_errors():
    with pytest.raises(ValueError, match="chi"):
        initial_state(0.5, -1.0)
    with pytest.raises(ValueError):
        initial_state(-1.0, 0.0)


def test_rhs_examples():
    assert rhs(ClassicalState(0, -4, 0, 0, 4), 0.0) == (0, 4, 4, 0)
    du, dv, ddu, ddv = rhs(ClassicalState(0, 2, 0, 0, 0), 1.0)
    # force consistent with the constraint: (3k/4) u / |u^2 - v^2|^(2/3)
    assert ddu == pytest.approx(-2 - 0.75 * 2 / 4 ** (2 / 3), rel=1e-14)
    assert ddu == pytest.approx(-2.595275, abs=1e-6)
    assert ddv == 0.0
    out = rhs(ClassicalState(0, 1.5, 1.5, 0.2, -0.1), 1.0, eps_reg=1e-12)
    assert all(np.isfinite(out))


@settings(max_examples=40, deadline=None)
@given(u=st.floats(-5, 5), v=st.floats(-5, 5), du=st.floats(-3, 3), dv=st.floats(-3, 3), k=st.floats(-2, 2))
def test_force_is_the_gradient_of_the_constraint(u, v, du, dv, k):
    # dE/dt = 2 du (u'' + u + (3k/4) u x^(-2/3)) - 2 dv (v'' + v + (3k/4) v x^(-2/3)) vanishes
    x = u * u - v * v
    if abs(x) < 1e-3:
        return
    _, _, ddu, ddv = rhs(ClassicalState(0, u, v, du, dv), k)
    h = 1e-6
    dE = (constraint_residual(u + h * du, v + h * dv, du + h * ddu, dv + h * ddv, k)
          - constraint_residual(u - h * du, v - h * dv, du - h * ddu, dv - h * ddv, k)) / (2 * h)
    scale = 1 + abs(k) * abs(x) ** (-2 / 3) * (abs(u) + abs(v)) + u * u + v * v + du * du + dv * dv
    assert abs(dE) < 1e-6 * scale


def test_circle_for_k0():
    tr = integrate(4.0, 0.0, 2 * np.pi, 1e-9)
    assert not tr.truncated
    assert np.all(np.diff(tr.t) > 0) and len(tr) >= 2
    assert tr.t[-1] == pytest.approx(2 * np.pi, abs=1e-14)
    assert np.abs(tr.radius() - 4).max() < 1e-6
    # exact solution (-chi cos t, chi sin t) within 10 tol
    assert np.abs(tr.u + 4 * np.cos(tr.t)).max() < 10 * 1e-9
    assert np.abs(tr.v - 4 * np.sin(tr.t)).max() < 10 * 1e-9


def test_period_is_two_pi_for_k0():
    tr = integrate(4.0, 0.0, 2.5 * np.pi, 1e-9)
    # upward crossing of v = 0 after the start
    i = np.nonzero((tr.v[:-1] < 0) & (tr.v[1:] >= 0))[0][0]
    t0 = tr.t[i] - tr.v[i] * (tr.t[i + 1] - tr.t[i]) / (tr.v[i + 1] - tr.v[i])
    assert t0 == pytest.approx(2 * np.pi, abs=1e-5)


@pytest.mark.parametrize("k", [1.0, -1.0])
def test_constraint_conservation_and_tol_scaling(k):
    prev = None
    for tol in (1e-9, 5e-10, 2.5e-10):
        tr = integrate(4.0, k, 2 * np.pi, tol)
        m = tr.away_from_singular()
        e = np.abs(tr.constraint[m]).max()
        assert e < 1e-7
        assert e <= 3.0 * tol  # C = 3 fixed from the measured ~0.7 tol
        if prev is not None:
            assert e <= 0.5 * prev
        prev = e
    assert tr.singular_events


def test_curvature_widens_or_narrows_the_path():
    r_plus = integrate(4.0, 1.0).radius()
    r_minus = integrate(4.0, -1.0).radius()
    assert r_plus.min() > 4 - 1e-6 and r_plus.max() > 4.1
    assert r_minus.max() < 4 + 1e-6 and r_minus.min() < 3.8


@pytest.mark.parametrize("k", [0.0, 1.0, -1.0])
def test_time_reversal(k):
    tol = 1e-9
    tr = integrate(4.0, k, np.pi, tol)
    end = list(tr.states())[-1]
    back = integrate_from(ClassicalState(0.0, end.u, end.v, -end.du, -end.dv), k, np.pi, tol)
    start = initial_state(4.0, k)
    assert abs(back.u[-1] - start.u) < 100 * tol
    assert abs(back.v[-1] - start.v) < 100 * tol
    assert abs(back.du[-1] + start.du) < 100 * tol
    assert abs(back.dv[-1] + start.dv) < 100 * tol


def test_radius_at_angles_for_circle():
    tr = integrate(4.0, 0.0)
    r = tr.radius_at_angles(np.linspace(0, 2 * np.pi, 16, endpoint=False))
    np.testing.assert_allclose(r, 4.0, atol=1e-6)


def test_integrate_argument_errors():
    with pytest.raises(ValueError):
        integrate(4.0, 0.0, t_max=-1.0)
    with pytest.raises(ValueError):
        integrate(4.0, 0.0, tol=0.0)


def test_trajectory_csv_round_trip(tmp_path):
    tr = integrate(4.0, 1.0, np.pi, 1e-9)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(path, tr)
    text = path.read_text().splitlines()
    assert text[0].startswith("# chi=") and "t,u,v,du,dv,constraint_residual" in text
    back = read_trajectory_csv(path)
    for name in ("t", "u", "v", "du", "dv", "constraint"):
        assert np.array_equal(getattr(back, name), getattr(tr, name))
    assert back.singular_events == tr.singular_events
    assert (back.chi, back.k, back.tol) == (4.0, 1.0, 1e-9)
