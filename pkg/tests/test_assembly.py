import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wdspectral.assembly import (ConfigurationError, PotentialSpec, coupling_matrix, diagonal,
                                 diagonal_term, dump_matrix, f_wdw, galerkin_matrix, lightcone_panels,
                                 load_matrix)
from wdspectral.basis import COS, SIN, BasisSpec, basis_matrix
from wdspectral.quadrature import (QuadratureSettings, composite, integrate_2d, lightcone_u_rule,
                                   lightcone_v_rule)


# -- potential -----------------------------------------------------------------

def test_f_wdw_examples():
    assert f_wdw(2.0, 1.0, 1.0) == pytest.approx(2.25 * 3 ** (1 / 3), rel=1e-15)
    assert f_wdw(2.0, 1.0, 1.0) == pytest.approx(3.245061, abs=1e-6)
    assert f_wdw(1.0, 2.0, 1.0) == pytest.approx(-3.245061, abs=1e-6)
    for k in (-1.0, 0.0, 2.0):
        assert f_wdw(3.0, 3.0, k) == 0.0
        assert f_wdw(3.0, -3.0, k) == 0.0


@settings(max_examples=100, deadline=None)
@given(u=st.floats(-50, 50), v=st.floats(-50, 50), k=st.floats(-3, 3))
def test_f_wdw_exchange_antisymmetry(u, v, k):
    assert f_wdw(u, v, k) == -f_wdw(v, u, k)


# -- diagonal ------------------------------------------------------------------

def test_diagonal_term_examples():
    osc = BasisSpec("oscillator", 6)
    assert diagonal_term(osc, (2, 5)) == -6
    for m in range(6):
        assert diagonal_term(osc, (m, m)) == 0
    four = BasisSpec("fourier", 3, L=np.pi)
    for i in (SIN, COS):
        for j in (SIN, COS):
            assert diagonal_term(four, (2, 1, i, j)) == pytest.approx(3.0, rel=1e-14)


def test_diagonal_uses_both_frequencies():
    spec = BasisSpec("oscillator", 4, omega1=1.5, omega2=0.5)
    d = diagonal(spec).reshape(4, 4)
    m, n = np.meshgrid(np.arange(4), np.arange(4), indexing="ij")
    np.testing.assert_allclose(d, (2 * m + 1) * 1.5 - (2 * n + 1) * 0.5, rtol=0, atol=1e-15)


# -- coupling matrix -------------------------------------------------------------

def test_oscillator_k0_coupling_is_zero():
    C = coupling_matrix(BasisSpec("oscillator", 5), PotentialSpec(k=0))
    assert np.abs(C).max() < 1e-14


@pytest.mark.parametrize("L", [4.0, 9.0])
def test_fourier_k0_constant_mode_moments(L):
    w1, w2 = 2.0, 1.0
    spec = BasisSpec("fourier", 4, omega1=w1, omega2=w2, L=L)
    C = coupling_matrix(spec, PotentialSpec(k=0))
    # <u^2> on the constant mode is L^2/3; on cos(m pi x/L) it is L^2/3 + L^2/(2 m^2 pi^2)
    i = spec.flatten(0, 0, COS, COS)
    assert C[i, i] == pytest.approx((w1 ** 2 - w2 ** 2) * L * L / 3, rel=1e-12)
    i = spec.flatten(0, 2, COS, COS)
    expected = w1 ** 2 * L * L / 3 - w2 ** 2 * (L * L / 3 + L * L / (8 * np.pi ** 2))
    assert C[i, i] == pytest.approx(expected, rel=1e-12)


def test_ground_state_self_coupling_vanishes_for_k1():
    spec = BasisSpec("oscillator", 3)
    C = coupling_matrix(spec, PotentialSpec(k=1))
    assert abs(C[0, 0]) < 1e-8


def test_fourier_n1_galerkin_oracle():
    L, w1, w2 = 3.0, 1.2, 0.7
    spec = BasisSpec("fourier", 1, omega1=w1, omega2=w2, L=L)
    sysm = galerkin_matrix(spec, PotentialSpec(k=0))
    x2 = np.diag([L * L / 3, L * L / 3 - L * L / (2 * np.pi ** 2)])  # factors: cos0, sin1
    lam = np.array([0.0, (np.pi / L) ** 2])
    I = np.eye(2)
    C = w1 ** 2 * np.kron(x2, I) - w2 ** 2 * np.kron(I, x2)
    D = C + np.diag((lam[:, None] - lam[None, :]).ravel())
    np.testing.assert_allclose(sysm.C, C, atol=1e-12)
    np.testing.assert_allclose(sysm.D, D, atol=1e-12)
    assert sysm.D.shape == (4, 4)


def test_galerkin_k0_null_diagonal():
    sysm = galerkin_matrix(BasisSpec("oscillator", 7), PotentialSpec(k=0))
    assert np.count_nonzero(sysm.D - np.diag(np.diag(sysm.D))) == 0
    assert np.count_nonzero(np.diag(sysm.D) == 0) == 7


def test_galerkin_k0_nonresonant_has_no_zero():
    sysm = galerkin_matrix(BasisSpec("oscillator", 7, omega1=1.0, omega2=np.sqrt(2)), PotentialSpec(k=0))
    assert np.abs(np.diag(sysm.D)).min() > 1e-3


@pytest.mark.parametrize("kind,k", [("oscillator", 1.0), ("oscillator", -1.0), ("fourier", 1.0), ("fourier", 0.0)])
def test_symmetry_before_symmetrization(kind, k):
    spec = BasisSpec(kind, 5, L=6.0 if kind == "fourier" else None)
    C = coupling_matrix(spec, PotentialSpec(k=k), symmetrize=False)
    assert np.abs(C - C.T).max() < 1e-8
    sysm = galerkin_matrix(spec, PotentialSpec(k=k))
    assert np.abs(sysm.D - sysm.D.T).max() < 1e-12
    assert sysm.quadrature["asymmetry"] < 1e-8


def test_quadrature_refinement_convergence():
    spec = BasisSpec("oscillator", 10)
    pot = PotentialSpec(k=1)
    c1 = coupling_matrix(spec, pot, QuadratureSettings(panels=16))
    c2 = coupling_matrix(spec, pot, QuadratureSettings(panels=32))
    assert np.abs(c1 - c2).max() < 1e-6


@pytest.mark.parametrize("kind,k", [("oscillator", 1.0), ("fourier", -1.0), ("fourier", 0.0)])
def test_bitwise_determinism_across_workers(kind, k):
    spec = BasisSpec(kind, 6, L=7.0 if kind == "fourier" else None)
    pot = PotentialSpec(k=k)
    ref = coupling_matrix(spec, pot, workers=1)
    for w in (2, 3, 8):
        assert np.array_equal(coupling_matrix(spec, pot, workers=w), ref)


def _brute_force_lightcone(spec, pot, quad):
    U = quad.box(spec)
    P = quad.resolved_panels(spec.N)
    npp = quad.nodes_per_panel
    vr = lightcone_v_rule(U, P, npp)
    f = pot.effective(spec)
    B = spec.size
    C = np.zeros((B, B))
    for q, v in enumerate(vr.nodes):
        ur = lightcone_u_rule(v, U, P, npp)
        pu = basis_matrix(spec, ur.nodes, "u")
        pv = basis_matrix(spec, [v], "v")[:, 0]
        fw = ur.weights * f(ur.nodes, np.full_like(ur.nodes, v)) * vr.weights[q]
        for I in range(B):
            a, b = spec.split(I)
            for J in range(B):
                a2, b2 = spec.split(J)
                C[I, J] += np.sum(pu[a] * pu[a2] * fw) * pv[b] * pv[b2]
    return C


def _brute_force_tensor(spec, pot, quad):
    U = quad.box(spec)
    rule = composite(quad.family, quad.resolved_panels(spec.N), quad.nodes_per_panel, -U, U)
    f = pot.effective(spec)
    B = spec.size
    C = np.zeros((B, B))
    pu = basis_matrix(spec, rule.nodes, "u")
    pv = basis_matrix(spec, rule.nodes, "v")
    for I in range(B):
        a, b = spec.split(I)
        for J in range(B):
            a2, b2 = spec.split(J)
            C[I, J] = integrate_2d(rule, rule, lambda u, v: (
                np.outer(pu[a] * pu[a2], pv[b] * pv[b2]) * f(u, v)))
    return C


@pytest.mark.parametrize("N", [1, 2, 4])
def test_brute_force_oracle_lightcone(N):
    spec = BasisSpec("oscillator", N, omega1=1.0, omega2=1.3)
    pot = PotentialSpec(k=1)
    quad = QuadratureSettings(panels=16, nodes_per_panel=8)
    fast = coupling_matrix(spec, pot, quad, symmetrize=False)
    assert np.abs(fast - _brute_force_lightcone(spec, pot, quad)).max() < 1e-12


@pytest.mark.parametrize("kind,N", [("oscillator", 3), ("fourier", 2)])
def test_brute_force_oracle_tensor(kind, N):
    spec = BasisSpec(kind, N, L=4.0 if kind == "fourier" else None)
    pot = PotentialSpec(custom=lambda u, v: np.cos(u) * v + u * u * v * v)
    quad = QuadratureSettings(scheme="tensor", panels=8, nodes_per_panel=8)
    fast = coupling_matrix(spec, pot, quad, symmetrize=False)
    assert np.abs(fast - _brute_force_tensor(spec, pot, quad)).max() < 1e-12


def test_trapezoid_family_matches_gauss_for_smooth_potential():
    spec = BasisSpec("oscillator", 4)
    pot = PotentialSpec(custom=lambda u, v: np.exp(-0.1 * (u * u + v * v)))
    g = coupling_matrix(spec, pot, QuadratureSettings(scheme="tensor"))
    t = coupling_matrix(spec, pot, QuadratureSettings(scheme="tensor", family="trapezoid", panels=64))
    assert np.abs(g - t).max() < 1e-10


def test_box_too_small_is_a_configuration_error():
    with pytest.raises(ConfigurationError):
        coupling_matrix(BasisSpec("oscillator", 35), PotentialSpec(k=1), QuadratureSettings(half_width=5.0))
    with pytest.raises(ConfigurationError):
        coupling_matrix(BasisSpec("fourier", 2, L=3.0), PotentialSpec(k=1), QuadratureSettings(half_width=4.0))


def test_non_finite_potential_is_reported():
    from wdspectral.quadrature import NonFiniteIntegrandError
    pot = PotentialSpec(custom=lambda u, v: np.where(u > 1, np.inf, 0.0) + 0 * v)
    with pytest.raises(NonFiniteIntegrandError):
        coupling_matrix(BasisSpec("oscillator", 2), pot, QuadratureSettings(scheme="tensor"))


def test_lightcone_panels_found_for_negative_curvature():
    spec = BasisSpec("oscillator", 6)
    quad = QuadratureSettings()
    near = lightcone_panels(spec, quad)
    P = quad.resolved_panels(6)
    assert near and all(0 <= i < P and 0 <= j < P for i, j in near)
    assert (0, 0) in near and (0, P - 1) in near  # the corners touch u = v and u = -v


def test_matrix_dump_round_trip(tmp_path):
    sysm = galerkin_matrix(BasisSpec("oscillator", 3), PotentialSpec(k=1))
    path = tmp_path / "D.txt"
    dump_matrix(path, sysm.D, {"kind": "oscillator", "N": 3, **sysm.quadrature})
    D, header = load_matrix(path)
    assert np.array_equal(D, sysm.D)
    assert header["N"] == "3" and header["scheme"] == "lightcone"
