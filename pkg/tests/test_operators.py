import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from splitlab import operators as ops


def _oracles():
    rng = np.random.default_rng(11)
    G = rng.normal(size=(3, 3))
    H = rng.normal(size=(3, 3))
    return {
        "zero": ops.ZeroOperator(),
        "linear": ops.LinearMonotone(G @ G.T / 3 + (H - H.T)),
        "line": ops.NormalConeOfLine([1.0, -2.0, 0.5]),
        "l1": ops.Subdifferential(ops.L1(0.7)),
        "quad": ops.Subdifferential(ops.Quadratic(G @ G.T, rng.normal(size=3))),
        "huber": ops.Subdifferential(ops.Huber(0.3)),
        "box": ops.Subdifferential(ops.IndicatorOfBox(-0.5, 0.8)),
        "sum": ops.SumOperator((ops.LinearMonotone(H - H.T), ops.Subdifferential(ops.Quadratic(np.eye(3))))),
    }


ORACLES = _oracles()


# ---- resolvent ---------------------------------------------------------------


def test_zero_resolvent_is_identity():
    assert np.array_equal(ops.resolvent(ops.ZeroOperator(), 1.0, [3.0, -2.0]), [3.0, -2.0])


def test_skew_resolvent_hand_solve():
    M = np.array([[0.0, -1.0], [1.0, 0.0]])
    z = ops.resolvent(ops.LinearMonotone(M), 1.0, [1.0, 0.0])
    # (I + M) z = w by hand: z1 - z2 = 1, z1 + z2 = 0
    assert np.allclose(z, [0.5, -0.5], atol=1e-15)
    assert np.allclose(z + M @ z, [1.0, 0.0], atol=1e-15)


def test_normal_cone_resolvent_is_projection_any_gamma():
    a, b = 2.5, -1.25
    for gamma in (0.7, 1.0, 13.0):
        assert np.array_equal(ops.resolvent(ops.NormalConeOfLine([1.0, 0.0]), gamma, [a, b]), [a, 0.0])


def test_reflected_resolvent_examples():
    x_axis = ops.NormalConeOfLine([1.0, 0.0])
    assert np.array_equal(ops.reflected_resolvent(x_axis, 0.3, [2.0, 5.0]), [2.0, -5.0])
    assert np.array_equal(ops.reflected_resolvent(ops.ZeroOperator(), 1.0, [4.0, 1.0]), [4.0, 1.0])
    diag = ops.NormalConeOfLine([1.0, 1.0])
    assert np.allclose(ops.reflected_resolvent(diag, 2.0, [1.0, 0.0]), [0.0, 1.0], atol=1e-15)


def test_resolvent_rejects_bad_inputs():
    with pytest.raises(ValueError):
        ops.resolvent(ops.ZeroOperator(), 0.0, [1.0])
    with pytest.raises(ValueError):
        ops.resolvent(ops.NormalConeOfLine([1.0, 0.0]), 1.0, [1.0, 2.0, 3.0])


def test_linear_monotone_construction_check():
    with pytest.raises(ValueError):
        ops.LinearMonotone(np.array([[-1.0, 0.0], [0.0, 1.0]]))
    ops.LinearMonotone(np.array([[0.0, 3.0], [-3.0, 0.0]]))  # skew is fine


def test_linear_resolvent_inclusion():
    rng = np.random.default_rng(1)
    op = ORACLES["linear"]
    for gamma in (0.1, 1.0, 10.0):
        w = rng.normal(size=3)
        z = op.resolvent(gamma, w)
        assert np.allclose(w - z, gamma * op.apply(z), atol=1e-12)


# ---- prox / value / gradient -------------------------------------------------


def test_prox_examples():
    half_sq = ops.Quadratic(np.eye(2))
    w = np.array([3.0, -1.0])
    assert np.allclose(ops.prox(half_sq, 1.0, w), w / 2, atol=1e-15)
    assert ops.prox(ops.L1(1.0), 1.0, [2.0])[0] == 1.0


def test_huber_prox_against_brute_force():
    f = ops.Huber(0.5)
    p = ops.prox(f, 1.0, [2.0])[0]
    obj = lambda z: f.value([z]) + 0.5 * (z - 2.0) ** 2
    grid = np.linspace(-1, 3, 40001)
    z0 = grid[np.argmin([obj(z) for z in grid])]
    ref = minimize_scalar(obj, bracket=(z0 - 1e-3, z0, z0 + 1e-3), tol=1e-12).x
    assert abs(ref - 1.5) < 1e-6
    assert p == pytest.approx(1.5, abs=1e-15)


def test_value_examples():
    assert ops.value(ops.Quadratic([[1.0]]), [2.0]) == 2.0
    assert ops.value(ops.IndicatorOfLine([1.0, 0.0]), [1.0, 1e-12]) == 0.0
    assert ops.value(ops.IndicatorOfLine([1.0, 0.0]), [1.0, 1e-3]) == ops.INF
    # Huber(1) at 3: linear branch delta*|x| - delta^2/2, checked against the inf-convolution definition
    h = ops.Huber(1.0)
    grid = np.linspace(-5, 5, 200001)
    moreau = np.min(np.abs(grid) + 0.5 * (3.0 - grid) ** 2)
    assert h.value([3.0]) == 2.5
    assert moreau == pytest.approx(2.5, abs=1e-8)


def test_gradient_examples():
    assert np.array_equal(ops.gradient(ops.Quadratic(np.eye(2)), [1.0, 2.0]), [1.0, 2.0])
    assert ops.gradient(ops.Huber(1.0), [3.0])[0] == 1.0
    b = np.array([0.5, -2.0])
    assert np.array_equal(ops.gradient(ops.Quadratic(np.diag([2.0, 3.0]), b), [0.0, 0.0]), b)
    with pytest.raises(ops.NotSmoothError):
        ops.gradient(ops.L1(1.0), [0.0, 1.0])


def test_quadratic_rejects_indefinite():
    with pytest.raises(ValueError):
        ops.Quadratic(np.diag([1.0, -0.5]))


def test_huber_metadata():
    assert ops.Huber(0.2).smoothness_L == 1.0
    with pytest.raises(ValueError):
        ops.Huber(0.0)


# ---- DR operator -------------------------------------------------------------


def _two_line_pair():
    return ops.NormalConeOfLine([1.0, 1.0]), ops.NormalConeOfLine([1.0, 0.0])


def test_dr_apply_two_subspace_example():
    A, B = _two_line_pair()
    Tw, x, y = ops.dr_operator_apply(A, B, 1.0, 1.0, [1.0, 0.0])
    assert np.allclose(Tw, [0.5, 0.5], atol=1e-15)
    assert np.allclose(x, [1.0, 0.0]) and np.allclose(y, [0.5, 0.5])


def test_dr_apply_trivial_cases():
    Z = ops.ZeroOperator()
    w = np.array([0.3, -7.0])
    assert np.array_equal(ops.dr_operator_apply(Z, Z, 2.0, 1.3, w)[0], w)
    A, B = _two_line_pair()
    assert np.array_equal(ops.dr_operator_apply(A, B, 1.0, 0.0, w)[0], w)


def test_dr_matrix_examples():
    A, B = _two_line_pair()
    assert np.allclose(ops.dr_operator_matrix(A, B, 1.0, 1.0), [[0.5, -0.5], [0.5, 0.5]], atol=1e-15)
    Z = ops.ZeroOperator()
    assert np.array_equal(ops.dr_operator_matrix(Z, Z, 1.0, 1.0, dim=3), np.eye(3))
    for N in (3, 5, 17):
        th = math.asin(1 / math.sqrt(N))
        rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        T = ops.dr_operator_matrix(ops.NormalConeOfLine([1.0, 1 / math.sqrt(N - 1)]),
                                   ops.NormalConeOfLine([1.0, 0.0]), 1.0, 1.0)
        assert np.allclose(T, math.sqrt((N - 1) / N) * rot, atol=1e-14)


def test_dr_matrix_rejects_nonlinear():
    with pytest.raises(ValueError):
        ops.dr_operator_matrix(ops.Subdifferential(ops.L1(1.0)), ops.ZeroOperator(), 1.0, 1.0, dim=2)


@pytest.mark.parametrize("name", sorted(ORACLES))
@pytest.mark.parametrize("lam", [0.3, 1.0, 1.7, 2.5])
def test_dr_step_matches_reflection_form(name, lam):
    rng = np.random.default_rng(5)
    A, B = ORACLES[name], ORACLES["linear"]
    for _ in range(20):
        w = rng.normal(size=3)
        Tw = ops.dr_operator_apply(A, B, 0.8, lam, w)[0]
        RR = ops.reflected_resolvent(A, 0.8, ops.reflected_resolvent(B, 0.8, w))
        assert np.allclose(Tw, (1 - lam / 2) * w + (lam / 2) * RR, atol=1e-12)


# ---- invariants --------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(ORACLES))
@pytest.mark.parametrize("gamma", [0.1, 1.0, 10.0])
def test_firm_nonexpansiveness(name, gamma):
    op = ORACLES[name]
    rng = np.random.default_rng([3, int(gamma * 10)])
    for _ in range(100):
        w1, w2 = 2 * rng.normal(size=(2, 3))
        d = op.resolvent(gamma, w1) - op.resolvent(gamma, w2)
        assert d @ (w1 - w2) >= d @ d - 1e-10
        r = ops.reflected_resolvent(op, gamma, w1) - ops.reflected_resolvent(op, gamma, w2)
        assert np.linalg.norm(r) <= np.linalg.norm(w1 - w2) + 1e-10


FUNCTIONS = {
    "quad": ops.Quadratic(np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 0.0]]), [1.0, 0.0, -1.0]),
    "l1": ops.L1(0.4),
    "line": ops.IndicatorOfLine([1.0, 2.0, -1.0]),
    "box": ops.IndicatorOfBox(-1.0, 0.5),
    "huber": ops.Huber(0.7),
    "zero": ops.ZeroFunction(),
    "scaled": ops.ScaledSum(((2.0, ops.Huber(0.3)),)),
}


@pytest.mark.parametrize("name", sorted(FUNCTIONS))
def test_prox_optimality(name):
    f = FUNCTIONS[name]
    rng = np.random.default_rng(9)
    for gamma in (0.1, 1.0, 10.0):
        for _ in range(50):
            w = 2 * rng.normal(size=3)
            p = f.prox(gamma, w)
            y = f.prox(1.0, 2 * rng.normal(size=3)) if name in ("line", "box") else 2 * rng.normal(size=3)
            assert f.value(y) >= f.value(p) + (w - p) @ (y - p) / gamma - 1e-9


def test_projection_idempotent():
    line = ops.IndicatorOfLine([3.0, -1.0, 2.0])
    rng = np.random.default_rng(2)
    for _ in range(50):
        p = line.project(rng.normal(size=3))
        assert np.allclose(line.project(p), p, atol=1e-14, rtol=0)


def test_declared_cocoercivity_on_samples():
    ops_with_beta = [
        ops.Subdifferential(ops.Quadratic(np.diag([4.0, 1.0]))),
        ops.Subdifferential(ops.Huber(0.2)),
        ops.LinearMonotone(np.array([[1.0, 0.5], [-0.5, 1.0]]) / 2.5, beta_cocoercive=2.0),
    ]
    rng = np.random.default_rng(4)
    for B in ops_with_beta:
        beta = B.beta_cocoercive
        assert beta is not None
        for _ in range(100):
            x, y = 2 * rng.normal(size=(2, 2))
            d = B.apply(x) - B.apply(y)
            assert d @ (x - y) >= beta * (d @ d) - 1e-10


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0.05, 20.0), st.floats(-10.0, 10.0))
def test_huber_prox_is_stationary(delta, gamma, w):
    f = ops.Huber(delta)
    p = f.prox(gamma, [w])[0]
    # 0 = grad f(p) + (p - w) / gamma
    assert f.gradient([p])[0] + (p - w) / gamma == pytest.approx(0.0, abs=1e-9 * max(1.0, abs(w) / gamma))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=6), st.floats(0.01, 10.0), st.floats(0.0, 3.0))
def test_soft_threshold_shrinks(w, gamma, weight):
    p = ops.L1(weight).prox(gamma, w)
    w = np.asarray(w)
    assert np.all(np.abs(p) <= np.abs(w))
    assert np.all(np.abs(w - p) <= gamma * weight + 1e-12)
