import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from decaybounds.bounds import exp_bound
from decaybounds.krylov import (ExactOperator, InexactSchedule, PerturbedOperator, apriori_residual_bound,
                                arnoldi, decay_weights, inexact_arnoldi_run, krylov_approx,
                                relaxation_schedule, residual_rm, true_residual)
from decaybounds.matrices import spectral_norm, toeplitz
from decaybounds.oracle import eval_matfun
from decaybounds.regions import EllipseRegion, fit_ellipse, fov_boundary

from conftest import random_banded

T200 = toeplitz([1, 2, 0.1, -1], 1, 200).data
V200 = np.ones(200) / math.sqrt(200)


def test_breakdown_on_invariant_subspace():
    A = np.diag([3.0, 1.0, 2.0])
    dec = arnoldi(ExactOperator(A), np.array([1.0, 0, 0]), 3)
    assert dec.breakdown and dec.m == 1 and dec.H[0, 0] == 3
    assert residual_rm(dec, "exp") == 0.0


def test_full_dimension_is_exact(rng):
    A = random_banded(rng, 12, 2, 1, shift=3)
    v = rng.standard_normal(12)
    dec = arnoldi(ExactOperator(A), v, 12)
    for kind in ("exp", "negexp", "phi1"):
        y = krylov_approx(dec, kind)
        assert np.linalg.norm(y - eval_matfun(kind, A) @ v) <= 1e-9 * np.linalg.norm(v)


def test_exp_of_zero_reproduces_vector(rng):
    v = rng.standard_normal(6)
    dec = arnoldi(ExactOperator(np.zeros((6, 6))), v, 1)
    assert np.allclose(krylov_approx(dec, "exp"), v)


def test_arnoldi_invariants_on_preset():
    dec = arnoldi(ExactOperator(T200), V200, 20)
    V = dec.V
    assert np.linalg.norm(V.conj().T @ V - np.eye(21)) <= 1e-10
    em = np.zeros(20)
    em[-1] = 1
    rel = T200 @ dec.Vm - dec.Vm @ dec.H - dec.h_next * np.outer(V[:, 20], em)
    assert np.linalg.norm(rel) <= 1e-10 * spectral_norm(T200)
    assert np.all(np.tril(dec.H, -2) == 0)


def test_arnoldi_argument_errors():
    with pytest.raises(ValueError):
        arnoldi(ExactOperator(np.eye(2)), np.zeros(2), 1)
    with pytest.raises(ValueError):
        arnoldi(ExactOperator(np.eye(2)), np.ones(2), 2, [0.0])


@pytest.mark.parametrize("seed", range(3))
def test_residual_identity_random_banded(seed):
    rng = np.random.default_rng(seed)
    A = random_banded(rng, 50, 2, 2, shift=4)
    v = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    dec = arnoldi(ExactOperator(A), v, 15)
    for m in range(2, 16):
        d = dec.truncated(m)
        assert residual_rm(d, "negexp") == pytest.approx(true_residual(A, d, "negexp"), abs=1e-10)


def test_residual_identity_fig5_left_m10():
    d = arnoldi(ExactOperator(T200), V200, 10)
    assert abs(residual_rm(d, "negexp") - true_residual(T200, d, "negexp")) <= 1e-10


def test_residual_converges_monotonically_fig5_left():
    dec = arnoldi(ExactOperator(T200), V200, 20)
    r = [residual_rm(dec.truncated(m), "negexp") for m in range(1, 21)]
    assert all(x > y for x, y in zip(r, r[1:]))
    assert r[-1] < 1e-10


def test_apriori_bound_is_reflected_exp_bound():
    E = EllipseRegion(1.5 + 0.2j, 2.3, 1.1)
    mirrored = exp_bound(EllipseRegion(-E.center, E.a, E.b))
    for m in range(3, 30):
        assert apriori_residual_bound(E, 2.5, m) == pytest.approx(2.5 * mirrored(m - 1), rel=1e-12)
    assert apriori_residual_bound(E, 2.5, 2) == math.inf


def test_apriori_bound_dominates_residuals():
    E = fit_ellipse(fov_boundary(T200))
    h = spectral_norm(T200)
    dec = arnoldi(ExactOperator(T200), V200, 30)
    for m in range(3, 31):
        assert residual_rm(dec.truncated(m), "negexp") <= apriori_residual_bound(E, h, m)


def test_schedule_first_branch_example():
    sch = relaxation_schedule(1e-10, 0.1, 10, np.ones(10))
    assert isinstance(sch, InexactSchedule)
    assert np.allclose(sch.eps_bar, 1e-11, rtol=1e-15)


def test_schedule_budget_branch_for_negligible_entries():
    s = np.array([1.0, 1.0, 1e-30, 1e-30, 1e-30])
    sch = relaxation_schedule(1e-10, 0.1, 5, s)
    rest = math.sqrt(0.1**2 - 2 * 2e-11**2) / 3
    assert sch.eps_bar[2] == pytest.approx(rest, rel=1e-12)
    assert sch.budget_used <= 0.1


def test_schedule_errors():
    with pytest.raises(ValueError):
        relaxation_schedule(0, 0.1, 2, [1, 1])
    with pytest.raises(ValueError):
        relaxation_schedule(1e-10, 0.1, 2, [1, 0])
    with pytest.raises(ValueError):
        relaxation_schedule(1e-10, 0.1, 3, [1, 1])


@settings(max_examples=100, deadline=None)
@given(tol=st.floats(1e-14, 1e-2), eps_m=st.floats(1e-8, 1.0), m=st.integers(1, 60), data=st.data())
def test_schedule_budget_never_exceeded(tol, eps_m, m, data):
    s = data.draw(st.lists(st.floats(1e-300, 1e6), min_size=m, max_size=m))
    sch = relaxation_schedule(tol, eps_m, m, s)
    assert math.sqrt(sum(e * e for e in sch.eps_bar)) <= eps_m
    assert np.all(sch.eps_bar > 0)


@settings(max_examples=50, deadline=None)
@given(m=st.integers(2, 40), data=st.data())
def test_schedule_monotone_until_budget_branch(m, data):
    s = sorted(data.draw(st.lists(st.floats(1e-20, 1e3), min_size=m, max_size=m)), reverse=True)
    tol, eps_m = 1e-10, 1e-1
    sch = relaxation_schedule(tol, eps_m, m, s)
    relaxed = (tol / m) * np.maximum(1, 1 / np.asarray(s))
    first_budget = next((j for j in range(m) if sch.eps_bar[j] != relaxed[j]), m)
    assert np.all(np.diff(sch.eps_bar[:first_budget]) >= 0)


def test_fig5_schedule_grows_after_initial_steps():
    E = fit_ellipse(fov_boundary(T200))
    s = decay_weights("negexp", E, 20, 0.1)
    sch = relaxation_schedule(1e-10, 0.1, 20, s)
    assert np.all(np.diff(sch.eps_bar[2:]) >= 0)
    assert sch.eps_bar[-1] > 1e3 * sch.eps_bar[0]


def test_zero_tolerances_match_exact_arnoldi():
    op = PerturbedOperator(T200, seed=1)
    run = inexact_arnoldi_run(op, V200, "negexp", np.zeros(12))
    dec = arnoldi(ExactOperator(T200), V200, 12)
    assert np.allclose(run.decomposition.H_ext, dec.H_ext, rtol=0, atol=1e-14)
    exact = [residual_rm(dec.truncated(j), "negexp") for j in range(1, 13)]
    assert np.allclose(run.residuals, exact, rtol=1e-12, atol=0)
    assert np.all(run.gap_bounds == 0)


def test_perturbed_operator_records_exact_norms():
    op = PerturbedOperator(np.eye(5), seed=7)
    op.apply(np.ones(5), 0.25)
    assert np.linalg.norm(op.perturbations[0]) == pytest.approx(0.25, rel=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_gap_bound_holds_random(seed):
    rng = np.random.default_rng(seed)
    A = random_banded(rng, 40, 2, 1, shift=3)
    eps = rng.uniform(0, 1e-2, 15)
    run = inexact_arnoldi_run(PerturbedOperator(A, seed), rng.standard_normal(40), "negexp", eps, A)
    gap = np.abs(run.true_residuals - run.residuals)
    assert np.all(gap <= run.gap_bounds)


def test_hessenberg_of_perturbed_run_stays_in_inflated_region():
    E = fit_ellipse(fov_boundary(T200))
    eps_m = 0.1
    s = decay_weights("negexp", E, 20, eps_m)
    run = inexact_arnoldi_run(PerturbedOperator(T200, 3), V200, "negexp", relaxation_schedule(1e-10, eps_m, 20, s))
    col = np.abs(eval_matfun("negexp", run.decomposition.H)[:, 0])
    assert np.all(col <= s + 1e-13)


def test_decay_weights_kinds():
    E = EllipseRegion(2.5, 1.8, 1.7)
    w = decay_weights("expnegsqrt", E, 10, 0.1)
    assert np.all(w > 0) and w[-1] < w[1]
    with pytest.raises(ValueError):
        decay_weights("phi1", E, 5, 0.1)
