"""Problem instances with known solutions and fixed points.

Two kinds of instance live here: the two-dimensional worst cases on which
the sublinear DR rate is attained exactly, and seeded random families used to
exercise the bounds and to search for counterexamples to the conjectured
rates.  Random instances are built *backwards*: a solution ``x*`` and a
subgradient certificate are drawn first, and the data are chosen to make them
optimal, so every instance carries an exact reference solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
from scipy.stats import ortho_group

from . import operators as ops
from .algorithms import drs_composite_run

__all__ = [
    "INSTANCE_IDS",
    "Instance",
    "NonexpansiveMap",
    "two_subspace_feasibility",
    "skew_rotation",
    "composite_fixed_point",
    "huber_1d",
    "huber_instance",
    "random_quadratic_composite",
    "strongly_monotone_linear",
    "random_nonexpansive_map",
    "random_monotone_pair",
    "random_cocoercive_inclusion",
    "random_huber_composite",
    "reference_solution_by_drs",
    "make_instance",
]


@dataclass(frozen=True, eq=False)
class NonexpansiveMap:
    """Linear map ``w -> M w`` with ``||M|| <= 1``; fixed point 0."""

    matrix: np.ndarray

    def __call__(self, w):
        return self.matrix @ np.asarray(w, dtype=np.float64)

    @property
    def dim(self):
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class Instance:
    """A monotone inclusion ``0 in A x + B x`` and/or a composite problem ``min f + g``.

    For composite instances ``A = subdiff g`` and ``B = subdiff f``, so both
    views are available.  ``fixed_point`` maps a stepsize to a fixed point of
    the DR operator (the fixed-point set does not depend on the relaxation).
    """

    id: str
    dim: int
    A: ops.OperatorOracle | None = None
    B: ops.OperatorOracle | None = None
    f: ops.FunctionOracle | None = None
    g: ops.FunctionOracle | None = None
    S: NonexpansiveMap | None = None
    known_solution: np.ndarray | None = None
    fixed_point_fn: Callable[[float], np.ndarray] | None = None
    fixed_point_set: str = "point"
    constants: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    @property
    def is_composite(self) -> bool:
        return self.f is not None and self.g is not None

    @property
    def is_linear(self) -> bool:
        if self.S is not None:
            return True
        return self.A is not None and self.A.is_linear and self.B.is_linear

    def fixed_point(self, gamma: float = 1.0) -> np.ndarray:
        if self.fixed_point_fn is None:
            raise ValueError(f"instance {self.id!r} has no known fixed point")
        return np.asarray(self.fixed_point_fn(gamma), dtype=np.float64)

    def dr_matrix(self, gamma: float, lam: float) -> np.ndarray:
        if self.S is not None:
            return 0.5 * (np.eye(self.dim) + self.S.matrix)
        return ops.dr_operator_matrix(self.A, self.B, gamma, lam, self.dim)

    def fixed_subspace(self, gamma: float = 1.0) -> np.ndarray:
        """Orthonormal basis of ``ker(I - T)`` (linear instances only)."""
        T = self.dr_matrix(gamma, 1.0)
        return scipy.linalg.null_space(np.eye(self.dim) - T, rcond=1e-10)

    def dist_to_fixed_set(self, w, gamma: float = 1.0) -> float:
        w = np.asarray(w, dtype=np.float64)
        if self.fixed_point_set == "point":
            return float(np.linalg.norm(w - self.fixed_point(gamma)))
        if self.fixed_point_set == "subspace":
            V = self.fixed_subspace(gamma)
            return float(np.linalg.norm(w - V @ (V.T @ w)))
        raise ValueError(f"fixed-point set of {self.id!r} is unknown")

    def objective(self, x) -> float:
        return self.f.value(x) + self.g.value(x)

    @property
    def optimal_value(self) -> float:
        return self.objective(self.known_solution)

    def stationarity_residual(self, gamma: float = 1.0) -> float:
        """Distance of 0 from ``A x* + B x*``, reconstructed from one DR step at ``w*``.

        At ``w*``: ``(w* - x)/gamma`` is in ``B x`` and ``(2x - w* - y)/gamma`` in
        ``A y``; the reported value is ``||x - x*|| + ||y - x*|| +
        ||(w* - x)/gamma + (2x - w* - y)/gamma||``.
        """
        w = self.fixed_point(gamma)
        _, x, y = ops.dr_operator_apply(self.A, self.B, gamma, 1.0, w)
        xs = self.known_solution
        u = (w - x) / gamma
        v = (2 * x - w - y) / gamma
        return float(np.linalg.norm(x - xs) + np.linalg.norm(y - xs) + np.linalg.norm(u + v))


def _composite(id, f, g, x_star, constants, params):
    dim = x_star.size
    A = ops.Subdifferential(g)
    B = ops.Subdifferential(f)
    grad = f.gradient(x_star)
    return Instance(
        id=id, dim=dim, A=A, B=B, f=f, g=g,
        known_solution=x_star,
        fixed_point_fn=lambda gamma: x_star + gamma * grad,
        constants=constants, params=params,
    )


def _rng(seed):
    return np.random.default_rng(seed)


def _orthogonal(dim, rng):
    if dim == 1:
        return np.array([[1.0]])
    return ortho_group.rvs(dim, random_state=rng)


def two_subspace_feasibility(N: int) -> Instance:
    """Normal cones of two lines in the plane meeting at the Friedrichs angle ``arcsin(1/sqrt(N))``.

    ``B`` is the normal cone of the x-axis ``P`` and ``A`` that of
    ``Q = {(t, t / sqrt(N-1))}``.  With ``lambda = 1`` the DR operator is
    ``sqrt((N-1)/N)`` times the rotation by ``arcsin(1/sqrt(N))``, and the
    fixed-point residual after ``N`` steps from a unit vector equals
    ``(N-1)^(N-1) / N^N`` exactly.
    """
    if isinstance(N, bool) or int(N) != N or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N!r}")
    N = int(N)
    P = np.array([1.0, 0.0])
    Q = np.array([1.0, 1.0 / math.sqrt(N - 1)])
    zero = np.zeros(2)
    return Instance(
        id="two-subspace", dim=2,
        A=ops.NormalConeOfLine(Q), B=ops.NormalConeOfLine(P),
        known_solution=zero,
        fixed_point_fn=lambda gamma: zero.copy(),
        constants={"theta": math.asin(1.0 / math.sqrt(N)), "contraction": math.sqrt((N - 1) / N)},
        params={"N": N},
    )


def skew_rotation(N: int) -> Instance:
    """``B = 0`` and ``A`` the skew map ``x -> (-x2, x1) / sqrt(N-1)``.

    ``B`` is cocoercive (any modulus); ``beta_cocoercive=1`` is recorded.
    At ``gamma = 1`` the DR operator is ``(I + A)^{-1}``, which scales by
    ``sqrt((N-1)/N)`` and rotates by ``-arcsin(1/sqrt(N))``.
    """
    if isinstance(N, bool) or int(N) != N or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N!r}")
    N = int(N)
    s = 1.0 / math.sqrt(N - 1)
    M = np.array([[0.0, -s], [s, 0.0]])
    zero = np.zeros(2)
    return Instance(
        id="skew", dim=2,
        A=ops.LinearMonotone(M), B=ops.ZeroOperator(beta_cocoercive=1.0),
        known_solution=zero,
        fixed_point_fn=lambda gamma: zero.copy(),
        constants={"beta": 1.0, "theta": math.asin(1.0 / math.sqrt(N))},
        params={"N": N},
    )


def composite_fixed_point(instance: Instance, x_star, gamma: float, tol: float = 1e-10) -> np.ndarray:
    """Fixed point ``w* = x* + gamma grad f(x*)`` of the composite DR operator.

    Raises ``ValueError`` if ``w*`` is not fixed to within ``tol`` (relative to
    ``max(1, ||w*||)``), which means ``x_star`` was not optimal.
    """
    f, g = instance.f, instance.g
    x_star = ops.as_vector(x_star, instance.dim)
    w_star = x_star + gamma * f.gradient(x_star)
    x = f.prox(gamma, w_star)
    y = g.prox(gamma, 2 * x - w_star)
    err = float(np.linalg.norm(y - x))
    if err > tol * max(1.0, float(np.linalg.norm(w_star))):
        raise ValueError(f"x_star is not optimal: ||T w* - w*|| = {err:.3e}")
    return w_star


def huber_1d(delta: float) -> ops.Huber:
    """1-smooth Huber function with threshold ``delta`` (minimizer 0)."""
    return ops.Huber(float(delta))


def huber_instance(delta: float = 1.0, dim: int = 1) -> Instance:
    f = huber_1d(delta)
    return _composite("huber", f, ops.ZeroFunction(), np.zeros(dim),
                      {"L": 1.0}, {"delta": float(delta), "dim": dim})


def _quadratic(dim, L, rng, min_ratio=0.1):
    eig = np.empty(dim)
    eig[0] = L
    eig[1:] = rng.uniform(min_ratio * L, L, size=dim - 1)
    U = _orthogonal(dim, rng)
    Q = (U * eig) @ U.T
    return 0.5 * (Q + Q.T), float(eig.min())


def _sample_solution(dim, g_kind, rng):
    """Draw ``(g, x*, s)`` with ``s`` a subgradient of ``g`` at ``x*``."""
    if g_kind == "zero":
        x = rng.normal(size=dim)
        return ops.ZeroFunction(), x, np.zeros(dim), {}
    if g_kind == "l1":
        tau = rng.uniform(0.1, 1.0)
        x = rng.normal(size=dim)
        zero = rng.random(dim) < 0.4
        x[zero] = 0.0
        s = np.where(zero, rng.uniform(-1.0, 1.0, size=dim), np.sign(x))
        return ops.L1(tau), x, tau * s, {"weight": tau}
    if g_kind == "box":
        r = rng.uniform(0.2, 1.0)
        u = rng.random(dim)
        x = rng.uniform(-0.9 * r, 0.9 * r, size=dim)
        upper, lower = u < 0.3, u > 0.7
        x[upper], x[lower] = r, -r
        s = np.zeros(dim)
        s[upper] = rng.uniform(0.0, 1.0, size=upper.sum())
        s[lower] = -rng.uniform(0.0, 1.0, size=lower.sum())
        return ops.IndicatorOfBox(-r, r), x, s, {"radius": r}
    raise ValueError(f"unknown g_kind {g_kind!r}; expected zero, l1 or box")


def random_quadratic_composite(dim: int, L: float, g_kind: str = "zero", seed: int = 0) -> Instance:
    """``f = 0.5 x'Qx + b'x`` (spectrum in ``[0.1 L, L]``, top eigenvalue ``L``) plus ``g``.

    ``g_kind`` is ``zero``, ``l1`` or ``box``.  The solution ``x*`` and a
    subgradient ``s`` of ``g`` at ``x*`` are drawn first; ``b = -Q x* - s``
    then makes ``x*`` the unique minimizer.
    """
    if dim < 1 or not L > 0:
        raise ValueError("need dim >= 1 and L > 0")
    rng = _rng(seed)
    Q, mu = _quadratic(dim, L, rng)
    g, x_star, s, gpar = _sample_solution(dim, g_kind, rng)
    b = -Q @ x_star - s
    f = ops.Quadratic(Q, b, smoothness_L=float(L), strong_convexity=mu)
    params = {"dim": dim, "L": float(L), "g_kind": g_kind, "seed": seed, **gpar}
    return _composite("rand-quad", f, g, x_star, {"L": float(L), "mu_f": mu}, params)


def random_huber_composite(dim: int, L: float, g_kind: str = "l1", seed: int = 0) -> Instance:
    """``f = L * Huber_delta`` (separable, L-smooth, minimizer 0) plus ``g`` in {zero, l1}.

    Both terms are minimized at the origin, so ``x* = 0`` and ``w* = 0``.
    """
    if g_kind not in ("zero", "l1"):
        raise ValueError("g_kind must be zero or l1")
    rng = _rng(seed)
    delta = float(10 ** rng.uniform(-2, 0.5))
    f = ops.ScaledSum(((float(L), ops.Huber(delta)),))
    g = ops.ZeroFunction() if g_kind == "zero" else ops.L1(rng.uniform(0.05, 1.0))
    params = {"dim": dim, "L": float(L), "delta": delta, "g_kind": g_kind, "seed": seed}
    return _composite("rand-huber", f, g, np.zeros(dim), {"L": float(L)}, params)


def reference_solution_by_drs(instance: Instance, tol: float = 1e-13, max_iter: int = 200_000,
                              chunk: int = 500) -> np.ndarray:
    """Oracle solution from a long DRS run with ``gamma = 1/L``, ``lambda = 1``.

    Independent of how the instance was generated; iterates until
    ``||T w - w|| <= tol`` and returns ``prox_{gamma f}(w)``.
    """
    L = instance.constants.get("L") or instance.f.smoothness_L or 1.0
    gamma = 1.0 / L
    w = np.zeros(instance.dim)
    done = 0
    while done < max_iter:
        tr = drs_composite_run(instance.f, instance.g, gamma, 1.0, w, chunk)
        w = tr.w[-1]
        done += chunk
        if math.sqrt(tr.residual_sq[-1]) <= tol:
            break
    return instance.f.prox(gamma, w)


def strongly_monotone_linear(dim: int, mu: float, beta: float, seed: int = 0,
                             skew_scale: float = 1.0, spread: bool = True) -> Instance:
    """Linear instance with restricted strong monotonicity and a cocoercive ``B``.

    ``A = mu I + S`` with ``S`` a random skew matrix (scaled by ``skew_scale``)
    and ``B = (I + K) / (2 beta)`` with ``K`` symmetric, ``||K|| <= 1``
    (``K = I`` when ``spread`` is false, so ``B = I / beta``).  Then ``B`` is
    ``beta``-cocoercive, ``<Ax + Bx, x> >= mu ||x||^2`` and the solution set
    is ``{0}``.
    """
    if not (mu > 0 and beta > 0):
        raise ValueError("need mu > 0 and beta > 0")
    rng = _rng(seed)
    G = rng.normal(size=(dim, dim))
    S = skew_scale * 0.5 * (G - G.T)
    if spread:
        U = _orthogonal(dim, rng)
        K = (U * rng.uniform(-1.0, 1.0, size=dim)) @ U.T
        K = 0.5 * (K + K.T)
    else:
        K = np.eye(dim)
    A = ops.LinearMonotone(mu * np.eye(dim) + S, mu_strong=mu)
    B = ops.LinearMonotone((np.eye(dim) + K) / (2.0 * beta), beta_cocoercive=beta)
    zero = np.zeros(dim)
    return Instance(
        id="sm-linear", dim=dim, A=A, B=B,
        known_solution=zero,
        fixed_point_fn=lambda gamma: zero.copy(),
        constants={"beta": float(beta), "mu_f": float(mu)},
        params={"dim": dim, "mu": float(mu), "beta": float(beta), "seed": seed},
    )


def random_nonexpansive_map(dim: int, seed: int = 0, factor: float | None = None,
                            rotate: bool = True) -> NonexpansiveMap:
    """``c * U`` with ``U`` a random rotation and ``c`` uniform in ``[0.9, 1]``."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = _rng(seed)
    c = rng.uniform(0.9, 1.0) if factor is None else float(factor)
    U = _orthogonal(dim, rng) if rotate else np.eye(dim)
    if dim > 1 and rotate and np.linalg.det(U) < 0:
        U[:, 0] = -U[:, 0]
    return NonexpansiveMap(c * U)


def nonexpansive_instance(dim: int, seed: int = 0, factor: float | None = None) -> Instance:
    S = random_nonexpansive_map(dim, seed, factor)
    zero = np.zeros(dim)
    c = float(np.linalg.norm(S.matrix, 2))
    return Instance(
        id="rand-nonexp", dim=dim, S=S,
        fixed_point_fn=lambda gamma: zero.copy(),
        fixed_point_set="point" if c < 1 else "subspace",
        constants={"factor": c},
        params={"dim": dim, "seed": seed},
    )


def _random_monotone_operator(dim, rng):
    kind = rng.choice(["linear", "line", "l1", "quadratic", "zero"])
    if kind == "linear":
        G = rng.normal(size=(dim, dim))
        H = rng.normal(size=(dim, dim))
        return ops.LinearMonotone(G @ G.T / dim + (H - H.T))
    if kind == "line":
        return ops.NormalConeOfLine(rng.normal(size=dim))
    if kind == "l1":
        return ops.Subdifferential(ops.L1(rng.uniform(0.1, 2.0)))
    if kind == "quadratic":
        G = rng.normal(size=(dim, dim))
        return ops.Subdifferential(ops.Quadratic(G @ G.T))
    return ops.ZeroOperator()


def random_monotone_pair(dim: int, seed: int = 0) -> Instance:
    """Random ``A``, ``B`` (linear, normal cone of a line, l1, quadratic, zero).

    Every kind has ``J(0) = 0``, so ``w* = 0`` is always a fixed point; the
    full fixed-point set may be larger.
    """
    rng = _rng(seed)
    A = _random_monotone_operator(dim, rng)
    B = _random_monotone_operator(dim, rng)
    zero = np.zeros(dim)
    return Instance(
        id="rand-monotone", dim=dim, A=A, B=B,
        fixed_point_fn=lambda gamma: zero.copy(),
        fixed_point_set="unknown",
        params={"dim": dim, "seed": seed},
    )


def random_cocoercive_inclusion(dim: int, beta: float, g_kind: str = "l1", seed: int = 0) -> Instance:
    """``B x = M x + c`` with ``M = (I + K) / (2 beta)``, ``K = t U`` (``U`` orthogonal, ``t <= 1``).

    ``M`` is in general not symmetric, so ``B`` is a ``beta``-cocoercive
    operator that is not a gradient.  ``A = subdiff g``.
    """
    rng = _rng(seed)
    t = rng.uniform(0.0, 1.0)
    K = t * _orthogonal(dim, rng)
    M = (np.eye(dim) + K) / (2.0 * beta)
    g, x_star, s, gpar = _sample_solution(dim, g_kind, rng)
    c = -M @ x_star - s
    B = ops.LinearMonotone(M, offset=c, beta_cocoercive=float(beta))
    Bx = M @ x_star + c
    return Instance(
        id="rand-coco", dim=dim, A=ops.Subdifferential(g), B=B, g=g,
        known_solution=x_star,
        fixed_point_fn=lambda gamma: x_star + gamma * Bx,
        constants={"beta": float(beta)},
        params={"dim": dim, "beta": float(beta), "g_kind": g_kind, "seed": seed, **gpar},
    )


INSTANCE_IDS = ("two-subspace", "skew", "huber", "rand-quad", "sm-linear", "rand-nonexp",
                "rand-monotone", "rand-coco", "rand-huber")


def make_instance(id: str, **params) -> Instance:
    """Build an instance from its stable id and keyword parameters."""
    builders = {
        "two-subspace": lambda N=2: two_subspace_feasibility(int(N)),
        "skew": lambda N=2: skew_rotation(int(N)),
        "huber": lambda delta=1.0, dim=1: huber_instance(float(delta), int(dim)),
        "rand-quad": lambda dim=2, L=1.0, g_kind="zero", seed=0: random_quadratic_composite(
            int(dim), float(L), str(g_kind), int(seed)),
        "sm-linear": lambda dim=2, mu=1.0, beta=1.0, seed=0: strongly_monotone_linear(
            int(dim), float(mu), float(beta), int(seed)),
        "rand-nonexp": lambda dim=2, seed=0, factor=None: nonexpansive_instance(
            int(dim), int(seed), None if factor is None else float(factor)),
        "rand-monotone": lambda dim=2, seed=0: random_monotone_pair(int(dim), int(seed)),
        "rand-coco": lambda dim=2, beta=1.0, g_kind="l1", seed=0: random_cocoercive_inclusion(
            int(dim), float(beta), str(g_kind), int(seed)),
        "rand-huber": lambda dim=2, L=1.0, g_kind="l1", seed=0: random_huber_composite(
            int(dim), float(L), str(g_kind), int(seed)),
    }
    if id not in builders:
        raise ValueError(f"unknown instance id {id!r}; known: {', '.join(INSTANCE_IDS)}")
    try:
        return builders[id](**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for instance {id!r}: {exc}") from None
