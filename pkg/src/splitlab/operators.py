"""Oracles for maximally monotone operators and closed convex functions.

Every oracle is an immutable object.  Operators are evaluated through their
resolvent ``J_{gamma A} = (I + gamma A)^{-1}``; functions through their value,
proximal map and (when smooth) gradient.  The module-level functions
(:func:`resolvent`, :func:`prox`, ...) are the public entry points; the
methods on the oracle classes hold the per-kind closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "INF",
    "MEMBERSHIP_TOL",
    "NotSmoothError",
    "as_vector",
    "FunctionOracle",
    "Quadratic",
    "L1",
    "IndicatorOfLine",
    "IndicatorOfBox",
    "Huber",
    "ZeroFunction",
    "ScaledSum",
    "OperatorOracle",
    "LinearMonotone",
    "NormalConeOfLine",
    "Subdifferential",
    "ZeroOperator",
    "SumOperator",
    "resolvent",
    "reflected_resolvent",
    "prox",
    "value",
    "gradient",
    "dr_operator_apply",
    "dr_operator_matrix",
]

#: Distinguished value returned for points outside the domain of a function.
INF = math.inf

#: Indicator functions treat points within this distance of the set as members.
MEMBERSHIP_TOL = 1e-9

_PSD_TOL = 1e-10


class NotSmoothError(ValueError):
    """Raised when a gradient is requested where the function is not differentiable."""


def as_vector(w, dim: int | None = None) -> np.ndarray:
    """Return ``w`` as a 1-D float64 array, checking finiteness and dimension."""
    v = np.atleast_1d(np.asarray(w, dtype=np.float64))
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    if dim is not None and v.size != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {v.size}")
    return v


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return gamma


def _frozen_array(a, ndim: int) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, ndmin=ndim)
    arr.setflags(write=False)
    return arr


# --------------------------------------------------------------------------
# Functions
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FunctionOracle:
    """Base class for closed proper convex functions.

    Subclasses implement ``_value``, ``_prox`` and optionally ``_gradient``.
    ``dim`` is ``None`` for functions that are defined in every dimension
    (separable kinds).
    """

    smoothness_L: float | None = field(default=None, kw_only=True)
    strong_convexity: float | None = field(default=None, kw_only=True)

    @property
    def dim(self) -> int | None:
        return None

    @property
    def is_smooth(self) -> bool:
        return self.smoothness_L is not None

    def _coerce(self, x) -> np.ndarray:
        return as_vector(x, self.dim)

    def value(self, x) -> float:
        return self._value(self._coerce(x))

    def prox(self, gamma: float, w) -> np.ndarray:
        return self._prox(_check_gamma(gamma), self._coerce(w))

    def gradient(self, x) -> np.ndarray:
        return self._gradient(self._coerce(x))

    def _gradient(self, x):
        raise NotSmoothError(f"{type(self).__name__} has no gradient")


@dataclass(frozen=True, eq=False)
class Quadratic(FunctionOracle):
    """``f(x) = 0.5 x^T Q x + b^T x`` with ``Q`` symmetric positive semidefinite."""

    Q: np.ndarray = None
    b: np.ndarray | None = None

    def __post_init__(self):
        Q = np.array(self.Q, dtype=np.float64, ndmin=2)
        if Q.shape[0] != Q.shape[1]:
            raise ValueError("Q must be square")
        if not np.allclose(Q, Q.T, atol=1e-12, rtol=0):
            raise ValueError("Q must be symmetric")
        Q = 0.5 * (Q + Q.T)
        eig = np.linalg.eigvalsh(Q)
        if eig[0] < -_PSD_TOL * max(1.0, abs(eig[-1])):
            raise ValueError(f"Q must be positive semidefinite (min eigenvalue {eig[0]:.3e})")
        b = np.zeros(Q.shape[0]) if self.b is None else as_vector(self.b, Q.shape[0])
        object.__setattr__(self, "Q", _frozen_array(Q, 2))
        object.__setattr__(self, "b", _frozen_array(b, 1))
        if self.smoothness_L is None:
            object.__setattr__(self, "smoothness_L", float(max(eig[-1], 0.0)))
        if self.strong_convexity is None:
            object.__setattr__(self, "strong_convexity", float(max(eig[0], 0.0)))

    @property
    def dim(self):
        return self.Q.shape[0]

    def _value(self, x):
        return float(0.5 * x @ self.Q @ x + self.b @ x)

    def _prox(self, gamma, w):
        n = self.dim
        return scipy.linalg.solve(np.eye(n) + gamma * self.Q, w - gamma * self.b, assume_a="pos")

    def _gradient(self, x):
        return self.Q @ x + self.b


@dataclass(frozen=True, eq=False)
class L1(FunctionOracle):
    """``f(x) = weight * ||x||_1``."""

    weight: float = 1.0

    def __post_init__(self):
        if not self.weight >= 0:
            raise ValueError("weight must be nonnegative")

    def _value(self, x):
        return float(self.weight * np.abs(x).sum())

    def _prox(self, gamma, w):
        t = gamma * self.weight
        return np.sign(w) * np.maximum(np.abs(w) - t, 0.0)

    def _gradient(self, x):
        if self.weight > 0 and np.any(x == 0):
            raise NotSmoothError("L1 norm is not differentiable at a zero coordinate")
        return self.weight * np.sign(x)


@dataclass(frozen=True, eq=False)
class IndicatorOfLine(FunctionOracle):
    """Indicator of the line ``span(d)`` through the origin.

    ``d`` need not be normalized; projections use ``<d, w> / <d, d>``, which is
    exact for directions with small integer entries.
    """

    d: np.ndarray = None

    def __post_init__(self):
        d = as_vector(self.d)
        if not np.any(d):
            raise ValueError("direction must be nonzero")
        object.__setattr__(self, "d", _frozen_array(d, 1))

    @property
    def dim(self):
        return self.d.size

    def project(self, w) -> np.ndarray:
        w = self._coerce(w)
        return (self.d @ w) / (self.d @ self.d) * self.d

    def distance(self, w) -> float:
        w = self._coerce(w)
        return float(np.linalg.norm(w - self.project(w)))

    def _value(self, x):
        return 0.0 if self.distance(x) <= MEMBERSHIP_TOL else INF

    def _prox(self, gamma, w):
        return self.project(w)


@dataclass(frozen=True, eq=False)
class IndicatorOfBox(FunctionOracle):
    """Indicator of the box ``{x : lo <= x <= hi}`` (bounds broadcast)."""

    lo: np.ndarray = None
    hi: np.ndarray = None

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=np.float64))
        if np.any(lo > hi):
            raise ValueError("empty box")
        object.__setattr__(self, "lo", _frozen_array(lo, 1))
        object.__setattr__(self, "hi", _frozen_array(hi, 1))

    @property
    def dim(self):
        n = max(self.lo.size, self.hi.size)
        return None if n == 1 else n

    def _value(self, x):
        viol = np.maximum(self.lo - x, 0.0) + np.maximum(x - self.hi, 0.0)
        return 0.0 if np.linalg.norm(viol) <= MEMBERSHIP_TOL else INF

    def _prox(self, gamma, w):
        return np.clip(w, self.lo, self.hi)


@dataclass(frozen=True, eq=False)
class Huber(FunctionOracle):
    """Separable Huber function with threshold ``delta`` (1-smooth).

    Per coordinate: ``t^2 / 2`` for ``|t| <= delta`` and
    ``delta |t| - delta^2 / 2`` otherwise.
    """

    delta: float = 1.0

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        object.__setattr__(self, "smoothness_L", 1.0)
        object.__setattr__(self, "strong_convexity", 0.0)

    def _value(self, x):
        a = np.abs(x)
        d = self.delta
        return float(np.where(a <= d, 0.5 * x * x, d * a - 0.5 * d * d).sum())

    def _prox(self, gamma, w):
        d = self.delta
        inner = np.abs(w) <= d * (1.0 + gamma)
        return np.where(inner, w / (1.0 + gamma), w - gamma * d * np.sign(w))

    def _gradient(self, x):
        return np.clip(x, -self.delta, self.delta)


@dataclass(frozen=True, eq=False)
class ZeroFunction(FunctionOracle):
    """The zero function; its prox is the identity."""

    def __post_init__(self):
        object.__setattr__(self, "smoothness_L", 0.0)
        object.__setattr__(self, "strong_convexity", 0.0)

    def _value(self, x):
        return 0.0

    def _prox(self, gamma, w):
        return w.copy()

    def _gradient(self, x):
        return np.zeros_like(x)


@dataclass(frozen=True, eq=False)
class ScaledSum(FunctionOracle):
    """``f = sum_i c_i f_i`` with nonnegative weights ``c_i``.

    The prox is available for a single scaled term (``prox_{gamma c f}``) and
    for sums of quadratics, which are merged into one quadratic.
    """

    terms: tuple = ()

    def __post_init__(self):
        terms = tuple((float(c), f) for c, f in self.terms)
        if not terms:
            raise ValueError("ScaledSum needs at least one term")
        if any(c < 0 for c, _ in terms):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "terms", terms)
        if self.smoothness_L is None and all(f.is_smooth for _, f in terms):
            object.__setattr__(self, "smoothness_L", sum(c * f.smoothness_L for c, f in terms))
        if self.strong_convexity is None:
            mus = [f.strong_convexity for _, f in terms]
            if all(m is not None for m in mus):
                object.__setattr__(
                    self, "strong_convexity", sum(c * m for (c, _), m in zip(terms, mus))
                )

    @property
    def dim(self):
        dims = {f.dim for _, f in self.terms} - {None}
        if len(dims) > 1:
            raise ValueError(f"inconsistent term dimensions {dims}")
        return dims.pop() if dims else None

    def _value(self, x):
        total = 0.0
        for c, f in self.terms:
            v = f._value(x)
            if v == INF:
                return INF
            total += c * v
        return total

    def _gradient(self, x):
        return sum(c * f._gradient(x) for c, f in self.terms)

    def _prox(self, gamma, w):
        live = [(c, f) for c, f in self.terms if c > 0 and not isinstance(f, ZeroFunction)]
        if not live:
            return w.copy()
        if len(live) == 1:
            c, f = live[0]
            return f._prox(gamma * c, w)
        if all(isinstance(f, Quadratic) for _, f in live):
            Q = sum(c * f.Q for c, f in live)
            b = sum(c * f.b for c, f in live)
            return Quadratic(Q, b)._prox(gamma, w)
        raise NotImplementedError("prox of a general sum has no closed form")


# --------------------------------------------------------------------------
# Operators
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OperatorOracle:
    """Base class for maximally monotone operators.

    ``beta_cocoercive`` and ``mu_strong`` are declared structural constants;
    they are metadata and are checked by sampling in the test-suite, not here.
    """

    beta_cocoercive: float | None = field(default=None, kw_only=True)
    mu_strong: float | None = field(default=None, kw_only=True)

    @property
    def dim(self) -> int | None:
        return None

    @property
    def is_linear(self) -> bool:
        return False

    def resolvent(self, gamma: float, w) -> np.ndarray:
        return self._resolvent(_check_gamma(gamma), as_vector(w, self.dim))

    def apply(self, x) -> np.ndarray:
        """Evaluate a single-valued operator at ``x``."""
        return self._apply(as_vector(x, self.dim))

    def _apply(self, x):
        raise ValueError(f"{type(self).__name__} is set-valued; apply() is undefined")

    def linear_part(self) -> np.ndarray:
        raise ValueError(f"{type(self).__name__} is not linear")


@dataclass(frozen=True, eq=False)
class LinearMonotone(OperatorOracle):
    """``A x = M x + offset`` with ``M + M^T`` positive semidefinite."""

    M: np.ndarray = None
    offset: np.ndarray | None = None

    def __post_init__(self):
        M = np.array(self.M, dtype=np.float64, ndmin=2)
        if M.shape[0] != M.shape[1]:
            raise ValueError("M must be square")
        eig = np.linalg.eigvalsh(M + M.T)
        if eig[0] < -_PSD_TOL:
            raise ValueError(f"M + M^T is not positive semidefinite (min eigenvalue {eig[0]:.3e})")
        object.__setattr__(self, "M", _frozen_array(M, 2))
        if self.offset is not None:
            object.__setattr__(self, "offset", _frozen_array(as_vector(self.offset, M.shape[0]), 1))

    @property
    def dim(self):
        return self.M.shape[0]

    @property
    def is_linear(self):
        return self.offset is None or not np.any(self.offset)

    def linear_part(self):
        return np.array(self.M)

    def _apply(self, x):
        y = self.M @ x
        return y if self.offset is None else y + self.offset

    def _resolvent(self, gamma, w):
        rhs = w if self.offset is None else w - gamma * self.offset
        lu = scipy.linalg.lu_factor(np.eye(self.dim) + gamma * self.M)
        return scipy.linalg.lu_solve(lu, rhs)


@dataclass(frozen=True, eq=False)
class NormalConeOfLine(OperatorOracle):
    """Normal cone of the line ``span(d)``; its resolvent is the projection."""

    d: np.ndarray = None

    def __post_init__(self):
        d = as_vector(self.d)
        if not np.any(d):
            raise ValueError("direction must be nonzero")
        object.__setattr__(self, "d", _frozen_array(d, 1))

    @property
    def dim(self):
        return self.d.size

    @property
    def is_linear(self):
        return True

    def linear_part(self):
        raise ValueError("normal cone is set-valued; use its projection matrix")

    def projection_matrix(self) -> np.ndarray:
        return np.outer(self.d, self.d) / (self.d @ self.d)

    def _resolvent(self, gamma, w):
        return (self.d @ w) / (self.d @ self.d) * self.d


@dataclass(frozen=True, eq=False)
class Subdifferential(OperatorOracle):
    """Subdifferential of a closed proper convex function; resolvent is the prox."""

    f: FunctionOracle = None

    def __post_init__(self):
        if not isinstance(self.f, FunctionOracle):
            raise TypeError("Subdifferential wraps a FunctionOracle")
        if self.beta_cocoercive is None and self.f.smoothness_L:
            object.__setattr__(self, "beta_cocoercive", 1.0 / self.f.smoothness_L)
        if self.mu_strong is None and self.f.strong_convexity is not None:
            object.__setattr__(self, "mu_strong", self.f.strong_convexity)

    @property
    def dim(self):
        return self.f.dim

    @property
    def is_linear(self):
        f = self.f
        return isinstance(f, ZeroFunction) or (isinstance(f, Quadratic) and not np.any(f.b))

    def linear_part(self):
        if isinstance(self.f, Quadratic):
            return np.array(self.f.Q)
        raise ValueError("subdifferential is not linear")

    def _apply(self, x):
        return self.f.gradient(x)

    def _resolvent(self, gamma, w):
        return self.f.prox(gamma, w)


@dataclass(frozen=True, eq=False)
class ZeroOperator(OperatorOracle):
    """The zero operator; every point is a zero and ``J`` is the identity."""

    @property
    def is_linear(self):
        return True

    def _apply(self, x):
        return np.zeros_like(x)

    def _resolvent(self, gamma, w):
        return w.copy()


@dataclass(frozen=True, eq=False)
class SumOperator(OperatorOracle):
    """Sum of single-valued affine monotone operators (resolvent by direct solve)."""

    parts: tuple = ()

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("SumOperator needs at least one part")
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self):
        dims = {p.dim for p in self.parts} - {None}
        if len(dims) > 1:
            raise ValueError(f"inconsistent part dimensions {dims}")
        return dims.pop() if dims else None

    def _apply(self, x):
        return sum(p._apply(x) for p in self.parts)

    def _affine(self, n):
        M = np.zeros((n, n))
        c = np.zeros(n)
        for p in self.parts:
            if isinstance(p, ZeroOperator):
                continue
            if isinstance(p, LinearMonotone):
                M += p.M
                if p.offset is not None:
                    c += p.offset
            elif isinstance(p, Subdifferential) and isinstance(p.f, (Quadratic, ZeroFunction)):
                if isinstance(p.f, Quadratic):
                    M += p.f.Q
                    c += p.f.b
            else:
                raise NotImplementedError("resolvent of a sum needs affine parts")
        return M, c

    @property
    def is_linear(self):
        try:
            _, c = self._affine(self.dim or 1)
        except NotImplementedError:
            return False
        return not np.any(c)

    def linear_part(self):
        return self._affine(self.dim)[0]

    def _resolvent(self, gamma, w):
        M, c = self._affine(w.size)
        return np.linalg.solve(np.eye(w.size) + gamma * M, w - gamma * c)


# --------------------------------------------------------------------------
# Functional interface
# --------------------------------------------------------------------------


def resolvent(op: OperatorOracle, gamma: float, w) -> np.ndarray:
    """Return ``z = (I + gamma op)^{-1} w``, so that ``w - z`` lies in ``gamma op(z)``."""
    return op.resolvent(gamma, w)


def reflected_resolvent(op: OperatorOracle, gamma: float, w) -> np.ndarray:
    """Return ``2 J_{gamma op}(w) - w``."""
    w = as_vector(w, op.dim)
    return 2.0 * op.resolvent(gamma, w) - w


def prox(f: FunctionOracle, gamma: float, w) -> np.ndarray:
    """Proximal map ``argmin_z f(z) + ||z - w||^2 / (2 gamma)``."""
    return f.prox(gamma, w)


def value(f: FunctionOracle, x) -> float:
    """Function value, :data:`INF` outside the domain."""
    return f.value(x)


def gradient(f: FunctionOracle, x) -> np.ndarray:
    """Gradient of a smooth function; raises :class:`NotSmoothError` otherwise."""
    return f.gradient(x)


def dr_operator_apply(A: OperatorOracle, B: OperatorOracle, gamma: float, lam: float, w):
    """One Douglas-Rachford step.

    Parameters
    ----------
    A, B : OperatorOracle
        ``B`` is resolved first, ``A`` second.
    gamma : float
        Positive stepsize.
    lam : float
        Relaxation parameter.
    w : array_like
        Current point.

    Returns
    -------
    Tw, x, y : ndarray
        ``x = J_{gamma B}(w)``, ``y = J_{gamma A}(2x - w)`` and
        ``Tw = w + lam (y - x)``.
    """
    w = as_vector(w)
    x = resolvent(B, gamma, w)
    y = resolvent(A, gamma, 2.0 * x - w)
    return w + lam * (y - x), x, y


def dr_operator_matrix(A: OperatorOracle, B: OperatorOracle, gamma: float, lam: float,
                       dim: int | None = None) -> np.ndarray:
    """Matrix of the (linear) DR operator, built column by column from ``T e_i``."""
    for op in (A, B):
        if not op.is_linear:
            raise ValueError(f"{type(op).__name__} is not a linear operator")
    n = dim or A.dim or B.dim
    if n is None:
        raise ValueError("dimension cannot be inferred; pass dim")
    cols = [dr_operator_apply(A, B, gamma, lam, e)[0] for e in np.eye(n)]
    return np.column_stack(cols)
