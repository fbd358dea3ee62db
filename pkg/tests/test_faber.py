import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from decaybounds.faber import (DecayEnvelope, faber_coefficients, faber_poly_apply, faber_polys,
                               faber_series_apply, generic_bound_thm2, generic_envelope, optimize_tau,
                               phi, psi, tail_bound_thm1)
from decaybounds.regions import DiskRegion, EllipseRegion

E21 = EllipseRegion(0, 2, 1)


def test_psi_examples():
    assert psi(E21, 1) == pytest.approx(2)
    assert psi(E21, 1j) == pytest.approx(1j)
    assert psi(DiskRegion(1 + 1j, 2), 0.5) == pytest.approx(2 + 1j)
    with pytest.raises(ZeroDivisionError):
        psi(E21, 0)


@pytest.mark.parametrize("z", [1.5, 2j, -3])
def test_phi_inverts_psi(z):
    assert abs(phi(E21, psi(E21, z)) - z) <= 1e-12


def test_phi_examples():
    assert phi(DiskRegion(0, 1), 3) == pytest.approx(3)
    assert abs(phi(EllipseRegion(5, 2, 1), 0)) == pytest.approx((5 + math.sqrt(22)) / 3, rel=1e-14)
    assert abs(phi(EllipseRegion(5, 2, 1), 0)) == pytest.approx(3.230, abs=5e-4)


@pytest.mark.parametrize("region", [E21, EllipseRegion(1 - 2j, 1, 3), DiskRegion(2, 0.7),
                                    EllipseRegion(0, 1, 1e-3)])
@pytest.mark.parametrize("r", [1.1, 2, 10])
def test_round_trip_on_circles(region, r):
    z = r * np.exp(2j * np.pi * np.arange(64) / 64)
    assert np.max(np.abs(phi(region, psi(region, z)) - z)) <= 1e-12 * r


def test_phi_maps_boundary_to_unit_circle():
    for region in (E21, EllipseRegion(3j, 0.5, 2)):
        assert np.allclose(np.abs(phi(region, region.boundary(100))), 1, atol=1e-12)


def test_exp_coefficients_on_unit_disk_are_taylor():
    fc = faber_coefficients(np.exp, DiskRegion(0, 1), 2.0)
    for j in range(16):
        assert abs(fc[j] - 1 / math.factorial(j)) <= 1e-12


def test_identity_has_two_term_expansion():
    fc = faber_coefficients(lambda z: z, EllipseRegion(4, 2, 1), 2.0)
    assert fc[0] == pytest.approx(4, abs=1e-12)
    assert fc[1] == pytest.approx(1.5, abs=1e-12)
    assert np.max(np.abs(fc.coeffs[2:])) <= 1e-12


def test_constant_coefficients():
    fc = faber_coefficients(lambda z: 7 + 0 * z, E21, 1.5)
    assert fc[0] == pytest.approx(7)
    assert np.max(np.abs(fc.coeffs[1:])) <= 1e-12


def test_coefficient_errors():
    with pytest.raises(ValueError):
        faber_coefficients(np.exp, E21, 1.0)
    with pytest.raises(ValueError):
        faber_coefficients(np.exp, E21, 2.0, n_quad=1000)
    with pytest.raises(ValueError):
        pole = psi(E21, 1.5)  # on the level curve, hit by the node at angle 0
        faber_coefficients(lambda z: 1 / (z - pole), E21, 1.5)


def test_coefficient_bound_and_quadrature_convergence():
    f, tau = np.exp, 2.0
    fc = faber_coefficients(f, E21, tau, n_quad=1024)
    j = np.arange(len(fc))
    assert np.all(np.abs(fc.coeffs) <= tau ** (-j) * fc.node_max * (1 + 1e-12))
    fc2 = faber_coefficients(f, E21, tau, n_quad=2048)
    scale = np.max(np.abs(fc.coeffs))
    assert np.max(np.abs(fc2.coeffs[: len(fc)] - fc.coeffs)) <= 1e-12 * scale


def test_faber_poly_examples():
    A = np.diag([2.0, -1.0])
    assert np.array_equal(faber_poly_apply(E21, 0, A), np.eye(2))
    assert faber_poly_apply(DiskRegion(0, 2), 3, np.array([[2.0]]))[0, 0] == pytest.approx(1)
    assert faber_poly_apply(E21, 1, np.array([[2.0]]))[0, 0] == pytest.approx(4 / 3)
    with pytest.raises(ValueError):
        faber_poly_apply(E21, -1, A)


def test_leading_coefficient_matches_laurent_expansion():
    # phi(w) ~ w / cap with cap = (a+b)/2, so Phi_1 has leading coefficient 2/(a+b)
    w = 1e7
    assert phi(E21, w) / w == pytest.approx(2 / 3, rel=1e-10)
    # Phi_n(psi(z)) = z^n + ((a-b)/(a+b))^n z^-n: the polynomial part of phi^n
    z = 1.7 * np.exp(0.3j)
    q = (E21.a - E21.b) / (E21.a + E21.b)
    for n, P in zip(range(8), faber_polys(E21, np.array([[psi(E21, z)]]))):
        want = 1.0 if n == 0 else z**n + q**n * z ** (-n)
        assert P[0, 0] == pytest.approx(want, rel=1e-12)


def test_vertical_ellipse_polys_real_on_real_input():
    V = EllipseRegion(0.5, 1, 3)
    X = np.array([[0.3, 1.0], [0.0, -0.2]])
    for n, P in zip(range(10), faber_polys(V, X)):
        assert np.max(np.abs(P.imag)) <= 1e-10 * max(1, np.max(np.abs(P)))


def test_series_reproduces_exp_on_small_matrix(rng):
    A = 0.3 * (rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
    R = 1.5 * np.linalg.norm(A, 2)
    D = DiskRegion(0, R)
    fc = faber_coefficients(np.exp, D, 2.0)
    import scipy.linalg
    assert np.linalg.norm(faber_series_apply(fc, A, 40) - scipy.linalg.expm(A)) <= 1e-12


def test_tail_bound_examples():
    fc = faber_coefficients(np.exp, DiskRegion(0, 1), 2.0)
    want = 2 * sum(1 / math.factorial(j) for j in range(5, 40))
    assert tail_bound_thm1(fc, 5) == pytest.approx(want, rel=1e-10)
    assert tail_bound_thm1(fc, 5) == pytest.approx(0.019897, abs=1e-6)
    const = faber_coefficients(lambda z: 3 + 0 * z, E21, 2.0)
    assert tail_bound_thm1(const, 1) == pytest.approx(0, abs=1e-14)
    fcE = faber_coefficients(np.exp, E21, 2.0)
    assert tail_bound_thm1(fcE, 0) >= tail_bound_thm1(fcE, 1)


def test_tail_bound_needs_convergence():
    # pole just outside the region: coefficients decay like 1.049^-j
    fc = faber_coefficients(lambda z: 1 / (z - 2.05), E21, 1.01, n_quad=256)
    with pytest.raises(ValueError):
        tail_bound_thm1(fc, 0)


def test_thm2_examples():
    direct = 2 * (5 / 4) * math.e**5 * 5.0**-5
    val = generic_bound_thm2(np.exp, DiskRegion(0, 1), 5.0, 5)
    assert val == pytest.approx(direct * 1.001, rel=1e-12)
    assert val == pytest.approx(0.1187, rel=2e-3)
    r = generic_bound_thm2(np.exp, E21, 3.0, 11) / generic_bound_thm2(np.exp, E21, 3.0, 10)
    assert r == pytest.approx(1 / 3, rel=1e-12)
    with pytest.raises(ValueError):
        generic_bound_thm2(np.exp, E21, 1.0, 3)


@pytest.mark.parametrize("xi", range(3, 11))
def test_tail_below_thm2(xi):
    tau = 3.0
    fc = faber_coefficients(np.exp, E21, tau)
    assert tail_bound_thm1(fc, xi) <= generic_bound_thm2(np.exp, E21, tau, xi)


def test_optimize_tau_single_point_and_constant():
    t, b = optimize_tau(np.exp, E21, 5, tau_grid=[2.5])
    assert t == 2.5 and b == generic_bound_thm2(np.exp, E21, 2.5, 5)
    grid = np.linspace(1.5, 50, 40)
    t, _ = optimize_tau(lambda z: 1 + 0 * z, E21, 5, tau_grid=grid, refine=False)
    assert t == grid[-1]


def _analytic_objective(tau, xi):
    # log of 2 tau/(tau-1) exp(max Re psi) tau^-xi * 1.001 for exp on E21
    return math.log(2 * tau / (tau - 1)) + (3 * tau + 1 / tau) / 2 - xi * math.log(tau) + math.log(1.001)


@pytest.mark.parametrize("xi", [3, 5, 9, 15])
def test_optimize_tau_finds_true_minimizer(xi):
    fine = np.exp(np.linspace(math.log(1.001), math.log(50), 200_001))
    vals = [_analytic_objective(t, xi) for t in fine[::50]]
    i = int(np.argmin(vals))
    t_brute = fine[::50][i]
    t, b = optimize_tau(np.exp, E21, xi)
    assert t == pytest.approx(t_brute, rel=2e-3)
    assert math.log(b) <= min(vals) + 1e-9


def test_optimize_tau_rejects_no_room():
    with pytest.raises(ValueError):
        optimize_tau(np.exp, E21, 5, tau_max=1.0001)


def test_generic_envelope_respects_singularity():
    f = lambda z: 1 / (z - 4)  # noqa: E731
    env = generic_envelope(f, E21, singularities=[4])
    assert env.params["tau_max"] < abs(phi(E21, 4))
    assert env(1) > env(10) > 0


def test_envelope_sentinel():
    env = DecayEnvelope(lambda xi: 1.0 / xi, xi_min=3, description="t")
    assert env(2) == math.inf and env(3) == pytest.approx(1 / 3)
    assert env.table([2, 3]) == [(2, math.inf, False), (3, 1 / 3, True)]


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.1, 4), b=st.floats(0.1, 4), cr=st.floats(-3, 3), ci=st.floats(-3, 3),
       r=st.floats(1.01, 20), th=st.floats(0, 6.283))
def test_round_trip_property(a, b, cr, ci, r, th):
    E = EllipseRegion(complex(cr, ci), a, b)
    z = r * complex(math.cos(th), math.sin(th))
    assert abs(phi(E, psi(E, z)) - z) <= 1e-9 * r
