import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from splitlab import certificates as cert
from splitlab import operators as ops
from splitlab.algorithms import SILVER_RATIO


def _thm31_symbolic(N):
    """Exact rational expansion of the KM multiplier identity in one dimension."""
    w = sp.symbols(f"w1:{N + 2}")
    W = lambda k: w[k - 1]  # noqa: E731
    n = sp.Integer(N)
    lhs = 0
    for k in range(1, N):
        c = k * (n - 1) ** (N - k - 1) / (2 * n ** (N - k))
        lhs += c * ((W(k + 1) - W(k)) ** 2 - (2 * W(k + 2) - 3 * W(k + 1) + W(k)) ** 2)
    lhs += (W(N) ** 2 - (2 * W(N + 1) - W(N)) ** 2) / (2 * n)
    for k in range(1, N - 1):
        c = (N - k - 1) * (n - 1) ** (N - k - 1) / (2 * n ** (N + 1 - k))
        lhs += c * (W(k) ** 2 - (2 * W(k + 1) - W(k)) ** 2)
    a = (n - 1) / n
    rhs = ((n - 1) ** (N - 1) / n**N * W(1) ** 2 - (W(N + 1) - W(N)) ** 2
           - (W(N + 1) - 2 * a * W(N) + a * W(N - 1)) ** 2)
    for k in range(1, N - 1):
        rhs -= k * (n - 1) ** (N - 2 - k) / n ** (N - k - 1) * (W(k + 2) - 2 * a * W(k + 1) + a * W(k)) ** 2
    return sp.expand(lhs - rhs)


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_km_multiplier_identity_exact_in_rationals(N):
    assert _thm31_symbolic(N) == 0


def test_km_multiplier_examples():
    rep = cert.check_thm31_identity(2, dim=1, trials=100, seed=0)
    assert rep.passed and rep.max_abs_residual <= 1e-9
    lhs, rhs = cert.thm31_sides(np.zeros((4, 2)))
    assert lhs == 0 and rhs == 0
    for N in range(2, 11):
        for dim in range(1, 6):
            assert cert.check_thm31_identity(N, dim, 100, seed=1).max_abs_residual <= 1e-8
    with pytest.raises(ValueError):
        cert.check_thm31_identity(1)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(1, 4), st.floats(0.1, 10.0), st.integers(0, 1000))
def test_km_multiplier_homogeneous_degree_two(N, dim, t, seed):
    w = np.random.default_rng(seed).normal(size=(N + 1, dim))
    l1, r1 = cert.thm31_sides(w)
    l2, r2 = cert.thm31_sides(t * w)
    assert l2 == pytest.approx(t**2 * l1, rel=1e-12, abs=1e-12 * t**2)
    assert r2 == pytest.approx(t**2 * r1, rel=1e-12, abs=1e-12 * t**2)


def test_error_bound_identity_constants_at_unit_point():
    c = cert.prop44_constants(1.0, 1.0)
    assert (c.S, c.C, c.D) == (3.0, 6.0, 11.0)
    assert (c.Dprime, c.P1, c.P2) == (17.0, 17.0, 33.0)
    assert (c.alpha1, c.alpha2, c.alpha3) == (6.0, 6.0, 12.0)
    assert c.E == pytest.approx(4 + 7 / 11, rel=1e-14)
    assert c.mu_lambda == 3.0


def test_error_bound_identity_single_point_and_zero_sample():
    rep = cert.check_prop44(1.0, 1.0, trials=100, seed=0)
    assert rep.passed, rep.summary()
    assert rep.details["lambda_spread"] <= 1e-12
    c = cert.prop44_constants(0.4, 0.3)
    z = np.zeros((1, 2))
    lhs, rhs, _ = cert.prop44_sides(c, z, z, z, z, z)
    assert lhs[0] == 0 and rhs[0] == 0


def test_error_bound_identity_untranslated_frame_is_pinpointed():
    rep = cert.check_prop44(0.5, 0.5, trials=50, seed=0, translate=False)
    assert not rep.passed
    assert "w_star" in rep.notes


def test_error_bound_identity_grid_signs():
    rep = cert.check_prop44_grid(20, trials=100, seed=0)
    assert rep.passed, rep.summary()
    assert rep.trials == 40000 and not rep.sign_violations
    for i in range(1, 21):
        for j in range(1, 21):
            c = cert.prop44_constants(i / 20, j / 20)
            assert c.D >= 0 and c.E >= 0 and c.P2 >= 0 and c.Dprime > 0


def test_error_bound_identity_deterministic():
    a = cert.check_prop44(0.35, 0.8, trials=30, seed=4)
    b = cert.check_prop44(0.35, 0.8, trials=30, seed=4)
    assert a.max_abs_residual == b.max_abs_residual


def test_error_bound_identity_rejects_out_of_range():
    with pytest.raises(ValueError):
        cert.prop44_constants(1.0, 1.5)


def test_silver_lemma_base_exact_in_rationals():
    x0, x1, g1, xs, f0, f1, Fs = sp.symbols("x0 x1 g1 xs f0 f1 Fs")
    r2 = sp.sqrt(2)
    rho = 1 + r2
    g0 = (x0 - x1) / r2
    lhs = (rho * (f0 - f1 - g1 * (x0 - x1) - (g1 - g0) ** 2 / 2)
           + (f1 - f0 - g0 * (x1 - x0) - (g1 - g0) ** 2 / 2))
    rhs = ((2 * rho - 1) * (Fs - f1) + (x0 - xs) ** 2 / 2
           - r2 * (Fs - f0 - g0 * (xs - x0) - g0**2 / 2)
           - rho * (Fs - f1 - g1 * (xs - x1) - g1**2 / 2)
           - (x1 - rho * g1 - xs) ** 2 / 2)
    assert sp.simplify(sp.expand(lhs - rhs)) == 0


def test_silver_lemma_examples():
    rep = cert.check_lemma51("base_identity", trials=100, seed=0)
    assert rep.passed and rep.max_abs_residual <= 1e-9
    rep = cert.check_lemma51("trajectory", k=2, F=ops.Quadratic([[1.0]]), x0=[1.0])
    assert rep.passed and rep.min_margin >= -1e-8
    rep = cert.check_lemma51("trajectory", k=3, F=ops.Huber(0.1), x0=[0.0])
    assert rep.min_margin == 0.0
    with pytest.raises(ops.NotSmoothError):
        cert.check_lemma51("trajectory", k=1, F=ops.L1(1.0), x0=[1.0])
    with pytest.raises(ValueError):
        cert.check_lemma51("other")


@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("delta", [0.01, 0.1, 0.5, 2.0])
def test_silver_lemma_trajectory_on_huber(k, delta):
    rep = cert.check_lemma51("trajectory", k=k, F=ops.Huber(delta), x0=[1.0])
    assert rep.passed, rep.summary()
    # the inequality implies the silver-GD gap bound
    bound = 1 / (4 * SILVER_RATIO**k - 2)
    assert rep.details["gap"] <= bound * rep.details["dist0_sq"] * (1 + 1e-12)


def test_interpolation_examples():
    rep = cert.check_interpolation(ops.Quadratic([[1.0]]), trials=100, seed=0)
    assert rep.passed and abs(rep.min_margin) <= 1e-12
    for delta in (0.05, 0.5, 3.0):
        assert cert.check_interpolation(ops.Huber(delta), trials=200, seed=1).passed
    f = ops.Huber(0.3)
    x = np.array([0.7])
    g = f.gradient(x)
    assert f.value(x) - f.value(x) - g @ (x - x) - 0.0 == 0.0


def test_interpolation_detects_wrong_constant():
    # declaring L too small makes the inequality fail for a quadratic with curvature 4
    f = ops.Quadratic([[4.0]], smoothness_L=1.0)
    assert not cert.check_interpolation(f, trials=50, seed=0).passed


def test_report_summary_mentions_outcome():
    rep = cert.check_thm31_identity(3, 2, 5, 0)
    assert rep.summary().startswith("[PASS] thm31")
    assert math.isfinite(rep.max_abs_residual)
