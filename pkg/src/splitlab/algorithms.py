"""Trace-producing runners for Douglas-Rachford type iterations and gradient descent.

All runners are deterministic and store the full iterate history.  Iterates
are stored in 0-based arrays: ``trace.w[0]`` is ``w^1`` and
``trace.residual_sq[k - 1]`` is ``||w^{k+1} - w^k||^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .operators import (
    FunctionOracle,
    NotSmoothError,
    OperatorOracle,
    Subdifferential,
    as_vector,
)

__all__ = [
    "SILVER_RATIO",
    "Trace",
    "GDTrace",
    "StepsizeSchedule",
    "silver_schedule",
    "relaxation_sequence",
    "drs_run",
    "drs_composite_run",
    "accelerated_drs_run",
    "km_run",
    "gd_run",
    "fixed_point_residual",
]

SILVER_RATIO = 1.0 + math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class Trace:
    """Full record of one fixed-point style run.

    Attributes
    ----------
    w : ndarray, shape (N + 1, n)
        ``w^1, ..., w^{N+1}``.
    x, y : ndarray, shape (N, n), or None
        Resolvent outputs of each step (``None`` for plain KM runs).
    residual_sq : ndarray, shape (N,)
        ``||lambda_k (y^k - x^k)||^2``; for DRS and KM this is ``||w^{k+1} - w^k||^2``.
    gamma : float
    lambdas : ndarray, shape (N,)
    u : ndarray, shape (N + 1, n), or None
        Non-extrapolated sequence of the accelerated variant.
    """

    w: np.ndarray
    x: np.ndarray | None
    y: np.ndarray | None
    residual_sq: np.ndarray
    gamma: float
    lambdas: np.ndarray
    u: np.ndarray | None = None
    algorithm: str = "drs"

    @property
    def n_iter(self) -> int:
        return len(self.residual_sq)

    @property
    def dim(self) -> int:
        return self.w.shape[1]


@dataclass(frozen=True, eq=False)
class GDTrace:
    """Gradient-descent record: ``x[i]`` is ``x^i`` for ``i = 0..N``."""

    x: np.ndarray
    grads: np.ndarray
    values: np.ndarray
    steps: np.ndarray

    @property
    def n_iter(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class StepsizeSchedule:
    values: tuple
    k_level: int

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)


def silver_schedule(k: int) -> StepsizeSchedule:
    """Silver stepsize schedule of length ``2**k - 1``.

    ``pi_1 = [sqrt(2)]`` and ``pi_{j+1} = [pi_j, 1 + rho**(j - 1), pi_j]``
    with ``rho = 1 + sqrt(2)``.
    """
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ValueError(f"silver schedule level must be a positive integer, got {k!r}")
    k = int(k)
    if k > 20:
        raise ValueError("silver schedule level above 20 is not supported")
    values = [math.sqrt(2.0)]
    for j in range(1, k):
        values = values + [1.0 + SILVER_RATIO ** (j - 1)] + values
    return StepsizeSchedule(tuple(values), k)


def relaxation_sequence(lambdas, N: int) -> np.ndarray:
    """Broadcast a scalar relaxation, or take the first ``N`` of a schedule."""
    if np.isscalar(lambdas):
        return np.full(N, float(lambdas))
    lam = np.asarray(list(lambdas), dtype=np.float64)
    if lam.ndim != 1 or lam.size < N:
        raise ValueError(f"relaxation schedule has {lam.size} entries, need {N}")
    return lam[:N].copy()


def _check_run_args(gamma, N):
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    return float(gamma), int(N)


def _splitting_loop(first, second, gamma, lambdas, w1, N, momentum=None, algorithm="drs"):
    gamma, N = _check_run_args(gamma, N)
    lam = relaxation_sequence(lambdas, N)
    w = as_vector(w1).copy()
    n = w.size
    W = np.empty((N + 1, n))
    X = np.empty((N, n))
    Y = np.empty((N, n))
    res = np.empty(N)
    U = None
    W[0] = w
    if momentum is not None:
        U = np.empty((N + 1, n))
        U[0] = w
    for k in range(N):
        x = first(gamma, W[k])
        y = second(gamma, 2.0 * x - W[k])
        step = lam[k] * (y - x)
        X[k], Y[k] = x, y
        res[k] = step @ step
        if U is None:
            W[k + 1] = W[k] + step
        else:
            U[k + 1] = W[k] + step
            beta = momentum(k + 1)
            W[k + 1] = U[k + 1] + beta * (U[k + 1] - U[k])
    return Trace(W, X, Y, res, gamma, lam, U, algorithm)


def drs_run(A: OperatorOracle, B: OperatorOracle, gamma: float, lambdas, w1, N: int) -> Trace:
    """Douglas-Rachford splitting for ``0 in A x + B x``.

    Each step computes ``x = J_{gamma B}(w)``, ``y = J_{gamma A}(2x - w)`` and
    ``w <- w + lambda_k (y - x)``.  ``lambdas`` is a scalar or a sequence with
    at least ``N`` entries.
    """
    return _splitting_loop(B.resolvent, A.resolvent, gamma, lambdas, w1, N, algorithm="drs")


def drs_composite_run(f: FunctionOracle, g: FunctionOracle, gamma: float, lambdas, w1,
                      N: int) -> Trace:
    """DRS for ``min f + g``; ``f`` is proxed first, ``g`` second."""
    return _splitting_loop(f.prox, g.prox, gamma, lambdas, w1, N, algorithm="drs-composite")


def default_momentum(k: int) -> float:
    return k / (k + 3.0)


def accelerated_drs_run(f: FunctionOracle, g: FunctionOracle, gamma: float, lam, w1, N: int,
                        momentum: Callable[[int], float] | None = None) -> Trace:
    """Accelerated DRS with extrapolation ``w^{k+1} = u^{k+1} + m_k (u^{k+1} - u^k)``.

    The momentum coefficient is ``m_k = k / (k + 3)`` from the first iterate on,
    unless ``momentum`` supplies another sequence (indexed from ``k = 1``).
    """
    momentum = default_momentum if momentum is None else momentum
    return _splitting_loop(f.prox, g.prox, gamma, lam, w1, N, momentum=momentum,
                           algorithm="accel-drs")


def km_run(S: Callable, w1, N: int) -> Trace:
    """Krasnoselskii-Mann iteration ``w^{k+1} = (w^k + S w^k) / 2``."""
    _, N = _check_run_args(1.0, N)
    w = as_vector(w1).copy()
    W = np.empty((N + 1, w.size))
    res = np.empty(N)
    W[0] = w
    for k in range(N):
        W[k + 1] = 0.5 * W[k] + 0.5 * np.asarray(S(W[k]), dtype=np.float64)
        d = W[k + 1] - W[k]
        res[k] = d @ d
    return Trace(W, None, None, res, 1.0, np.ones(N), None, "km")


def gd_run(F: FunctionOracle, h: Sequence[float], x0, N: int | None = None) -> GDTrace:
    """Gradient descent ``x^{i+1} = x^i - h_i grad F(x^i)`` for ``i = 0..N-1``.

    ``h`` is used as given; scale it by ``1/L`` before calling.
    """
    if isinstance(F, Subdifferential):
        F = F.f
    if not F.is_smooth:
        raise NotSmoothError(f"gradient descent needs a smooth function, got {type(F).__name__}")
    steps = np.asarray(list(h), dtype=np.float64)
    N = steps.size if N is None else int(N)
    if N < 1 or N > steps.size:
        raise ValueError(f"need 1 <= N <= len(h) = {steps.size}, got {N}")
    steps = steps[:N]
    x = as_vector(x0).copy()
    X = np.empty((N + 1, x.size))
    G = np.empty((N + 1, x.size))
    V = np.empty(N + 1)
    X[0] = x
    for i in range(N + 1):
        G[i] = F.gradient(X[i])
        V[i] = F.value(X[i])
        if i < N:
            X[i + 1] = X[i] - steps[i] * G[i]
    return GDTrace(X, G, V, steps)


def fixed_point_residual(trace: Trace, k: int) -> float:
    """``||T w^k - w^k||^2`` for ``1 <= k <= N``."""
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= trace.n_iter:
        raise IndexError(f"k must lie in [1, {trace.n_iter}], got {k!r}")
    return float(trace.residual_sq[int(k) - 1])
