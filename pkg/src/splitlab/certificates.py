"""Numerical checks of the multiplier identities behind the rate proofs.

Each check samples the free variables of an identity (or runs the method and
evaluates an inequality), and returns a :class:`CertificateReport`.  The
identities are polynomial in the sampled vectors, so agreement on random
points detects transcription errors with probability one.  Samples are
rescaled so that the largest sampled vector has norm 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import operators as ops
from .algorithms import SILVER_RATIO, gd_run, silver_schedule

__all__ = [
    "CERTIFICATE_IDS",
    "CertificateReport",
    "Prop44Constants",
    "prop44_constants",
    "thm31_sides",
    "prop44_sides",
    "lemma51_base_sides",
    "lemma51_expression",
    "check_thm31_identity",
    "check_prop44",
    "check_prop44_grid",
    "check_lemma51",
    "check_interpolation",
]

CERTIFICATE_IDS = ("thm31", "prop44", "lemma51-base", "lemma51-traj", "interp")

RHO = SILVER_RATIO


@dataclass
class CertificateReport:
    id: str
    trials: int
    max_abs_residual: float
    tolerance: float
    sign_violations: list = field(default_factory=list)
    outcome: str = "pass"
    min_margin: float | None = None
    notes: str = ""
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.outcome == "pass"

    def summary(self) -> str:
        extra = f" min_margin={self.min_margin:.3e}" if self.min_margin is not None else ""
        viol = f" sign_violations={len(self.sign_violations)}" if self.sign_violations else ""
        note = f" ({self.notes})" if self.notes else ""
        return (f"[{'PASS' if self.passed else self.outcome.upper()}] {self.id}: trials={self.trials} "
                f"max_residual={self.max_abs_residual:.3e} tol={self.tolerance:g}{extra}{viol}{note}")


def _dots(a, b):
    return np.einsum("...i,...i->...", a, b)


def _sq(a):
    return _dots(a, a)


def _normalize(*arrays):
    """Scale a batch of samples so each trial's largest vector has norm <= 1."""
    norms = [np.linalg.norm(a, axis=-1) for a in arrays]
    big = np.max(np.stack([n.reshape(n.shape[0], -1).max(axis=1) for n in norms]), axis=0)
    big = np.where(big > 0, big, 1.0)
    return [a / big.reshape((-1,) + (1,) * (a.ndim - 1)) for a in arrays]


def _pinpoint(sides, sample: dict) -> str:
    """Name the sampled variable whose removal shrinks the mismatch the most."""
    base = abs(np.subtract(*sides(**sample)))
    best, best_drop = None, 0.0
    for name, v in sample.items():
        trial = dict(sample, **{name: np.zeros_like(v)})
        drop = base - abs(np.subtract(*sides(**trial)))
        if drop > best_drop:
            best, best_drop = name, drop
    return f"mismatch concentrated in terms involving {best!r}" if best else "mismatch not localized"


# --------------------------------------------------------------------------
# Multiplier sum for the KM rate with lambda = 1
# --------------------------------------------------------------------------


def thm31_sides(w):
    """Both sides of the KM multiplier identity (``w* = 0``).

    ``w`` has shape ``(..., N + 1, n)`` holding ``w^1..w^{N+1}``; ``S w^k`` is
    replaced by ``2 w^{k+1} - w^k``.  Returns ``(lhs, rhs)``.
    """
    w = np.asarray(w, dtype=np.float64)
    N = w.shape[-2] - 1
    if N < 2:
        raise ValueError("identity needs N >= 2")
    W = lambda k: w[..., k - 1, :]  # noqa: E731  1-based access
    Nf = float(N)
    lhs = 0.0
    for k in range(1, N):
        c = k * (Nf - 1) ** (N - k - 1) / (2 * Nf ** (N - k))
        lhs = lhs + c * (_sq(W(k + 1) - W(k)) - _sq(2 * W(k + 2) - 2 * W(k + 1) - W(k + 1) + W(k)))
    lhs = lhs + (_sq(W(N)) - _sq(2 * W(N + 1) - W(N))) / (2 * Nf)
    for k in range(1, N - 1):
        c = (N - k - 1) * (Nf - 1) ** (N - k - 1) / (2 * Nf ** (N + 1 - k))
        lhs = lhs + c * (_sq(W(k)) - _sq(2 * W(k + 1) - W(k)))
    a = (Nf - 1) / Nf
    rate = (Nf - 1) ** (N - 1) / Nf**N
    rhs = (rate * _sq(W(1)) - _sq(W(N + 1) - W(N))
           - _sq(W(N + 1) - 2 * a * W(N) + a * W(N - 1)))
    for k in range(1, N - 1):
        c = k * (Nf - 1) ** (N - 2 - k) / Nf ** (N - k - 1)
        rhs = rhs - c * _sq(W(k + 2) - 2 * a * W(k + 1) + a * W(k))
    return lhs, rhs


def check_thm31_identity(N: int, dim: int = 2, trials: int = 100, seed: int = 0,
                         tol: float = 1e-8) -> CertificateReport:
    """Sample ``w^1..w^{N+1}`` and compare both sides of the KM multiplier identity."""
    if N < 2:
        raise ValueError("N must be >= 2")
    rng = np.random.default_rng([seed, N, dim])
    (w,) = _normalize(rng.normal(size=(trials, N + 1, dim)))
    lhs, rhs = thm31_sides(w)
    err = np.abs(lhs - rhs)
    worst = int(np.argmax(err))
    rep = CertificateReport("thm31", trials, float(err.max()), tol,
                            details={"N": N, "dim": dim, "seed": seed})
    if rep.max_abs_residual > tol:
        rep.outcome = "fail"
        rep.notes = f"worst trial {worst}: lhs={lhs[worst]:.6e} rhs={rhs[worst]:.6e}"
    return rep


# --------------------------------------------------------------------------
# Error-bound modulus under restricted strong monotonicity (beta = 1)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Prop44Constants:
    gamma: float
    mu_f_bar: float
    alpha1: float
    alpha2: float
    alpha3: float
    S: float
    C: float
    D: float
    E: float
    Dprime: float
    P1: float
    P2: float

    @property
    def mu_lambda(self) -> float:
        """``mu * lambda``, which does not depend on ``lambda``."""
        g, m = self.gamma, self.mu_f_bar
        return (g + g * m + 1.0) / (g * m)

    def signs_ok(self) -> bool:
        return self.D >= 0 and self.E >= 0 and self.P2 >= 0


def prop44_constants(gamma: float, mu_f_bar: float) -> Prop44Constants:
    """Multipliers and completing-the-square constants, normalized to ``beta = 1``."""
    g, m = float(gamma), float(mu_f_bar)
    if not (0 < g and 0 < m <= 1):
        raise ValueError("need gamma > 0 and mu_f_bar in (0, 1]")
    S = 1 + g * (1 + m)
    a1 = 2 / m**2 * (g * (1 - m**2) + 1 / g + 2)
    a2 = 2 * g * S
    a3 = 2 * (g + 1) * S / m
    C = (g + 1) * ((m + 1) * g + 1)
    D = 2 * C - 1
    E = ((g + m * g + 1) ** 2 / m**2 + 8 * g**2 * C
         - (-2 * g * m**2 + (2 * g**2 + 4 * g + 2) / g) * (g - 1) / m**2
         - (16 * g**2 * C**2 / D if D != 0 else math.inf))
    Dp = (2 - 2 * m**2 * g**4 - 6 * m**2 * g**3 - 4 * m**2 * g**2 + 4 * m * g**4 + 8 * m * g**3
          + m * g**2 + 2 * m * g - 2 * g**4 - 2 * g**3 + 7 * g**2 + 9 * g)
    P1 = (2 * m**2 * g**4 - 4 * m**2 * g**2 + 2 * m * g**3 + m * g**2 + 2 * m * g
          - 2 * g**4 - 2 * g**3 + 7 * g**2 + 9 * g + 2)
    P2 = (-3 * m**3 * g**5 - 10 * m**3 * g**4 - 8 * m**3 * g**3 - 3 * m**2 * g**5
          - 7 * m**2 * g**4 - 8 * m**2 * g**3 - 4 * m**2 * g**2 - m * g**5 + 4 * m * g**4
          + 19 * m * g**3 + 22 * m * g**2 + 8 * m * g - g**5 - 3 * g**4 + g**3 + 11 * g**2
          + 12 * g + 4)
    return Prop44Constants(g, m, a1, a2, a3, S, C, D, E, Dp, P1, P2)


def prop44_sides(c: Prop44Constants, w, w_star, x, y, u_y, lam: float = 1.0,
                 translate: bool = True):
    """Both sides of the multiplier identity, plus the sum of absolute term sizes.

    With ``x* = 0``: ``u_x = (w - x)/gamma``, ``v_y = (2x - w - y)/gamma`` and
    ``B x* = w*/gamma``.  The identity only holds in the frame where ``B x* = 0``;
    with ``translate`` the sample is first moved there (``w -> w - w*``,
    ``u_y -> u_y - w*/gamma``, which leaves ``x``, ``y`` and the iteration
    unchanged after shifting ``B`` by the constant ``B x*``).
    """
    g, m = c.gamma, c.mu_f_bar
    if translate:
        w = w - w_star
        u_y = u_y - w_star / g
        w_star = np.zeros_like(w_star)
    u_x = (w - x) / g
    v_y = (2 * x - w - y) / g
    bxs = w_star / g
    groups_l = [
        c.alpha3 * (_dots(u_y + v_y, y) - m * _sq(y)),
        c.alpha1 * (_dots(u_x - u_y, x - y) - _sq(u_x - u_y)),
        c.alpha2 * (_dots(u_y - bxs, y) - _sq(u_y - bxs)),
    ]
    mu = c.mu_lambda / lam
    Tw_w = lam * (y - x)
    t1 = (w - w_star - 4 * g * c.C / c.D * u_x
          - (g * (g + m * g + 1) + c.C / m) / c.D * u_y
          - 2 * (m * g + 0.5) * c.C / (m * c.D) * v_y)
    t2 = u_x - c.P1 / c.Dprime * u_y + 2 * m * g**3 * (2 * g + 3) / c.Dprime * v_y
    # (m-1)^2 ||u_y - v_y/(m-1)||^2 written without the 1/(m-1) singularity at m = 1
    t3 = (m - 1) * u_y - v_y
    groups_r = [
        mu**2 * _sq(Tw_w),
        -_sq(w - w_star),
        -c.D * _sq(t1),
        -c.E * _sq(t2),
        -g * c.P2 / (m**2 * c.Dprime) * _sq(t3),
    ]
    lhs = sum(groups_l)
    rhs = sum(groups_r)
    scale = sum(np.abs(t) for t in groups_l) + sum(np.abs(t) for t in groups_r)
    return lhs, rhs, scale


def check_prop44(gamma: float, mu_f_bar: float, trials: int = 100, seed: int = 0, dim: int = 3,
                 tol: float = 1e-6, lambdas=(0.5, 1.0, 1.5), translate: bool = True) -> CertificateReport:
    """Relative residual of the multiplier identity and signs of ``D``, ``E``, ``P2``.

    The residual is ``|lhs - rhs| / sum |terms|`` and must agree across
    ``lambdas`` (the identity is lambda-free once ``mu lambda`` is fixed).
    """
    c = prop44_constants(gamma, mu_f_bar)
    rep = CertificateReport("prop44", trials, 0.0, tol,
                            details={"gamma": c.gamma, "mu_f_bar": c.mu_f_bar, "constants": c,
                                     "translate": translate})
    if c.D == 0 or c.Dprime == 0:
        rep.outcome = "degenerate"
        rep.notes = f"zero denominator: D={c.D}, D'={c.Dprime}"
        return rep
    signs = {"D": c.D, "E": c.E, "P2": c.P2}
    rep.sign_violations = [(c.gamma, c.mu_f_bar, k, v) for k, v in signs.items() if v < 0]

    rng = np.random.default_rng([seed, int(round(gamma * 1e6)), int(round(mu_f_bar * 1e6))])
    w, ws, x, y, uy = _normalize(*rng.normal(size=(5, trials, dim)))
    rel = {}
    for lam in lambdas:
        lhs, rhs, scale = prop44_sides(c, w, ws, x, y, uy, lam, translate)
        rel[lam] = np.abs(lhs - rhs) / np.maximum(scale, np.finfo(float).tiny)
    base = rel[lambdas[0]]
    spread = max(float(np.max(np.abs(r - base))) for r in rel.values())
    rep.max_abs_residual = float(max(r.max() for r in rel.values()))
    rep.details["lambda_spread"] = spread
    if rep.max_abs_residual > tol:
        rep.outcome = "fail"
        i = int(np.argmax(base))
        sample = dict(w=w[i], w_star=ws[i], x=x[i], y=y[i], u_y=uy[i])
        rep.notes = _pinpoint(lambda **s: prop44_sides(c, **s, translate=translate)[:2], sample)
    elif spread > 1e-9:
        rep.outcome = "fail"
        rep.notes = f"residual depends on lambda (spread {spread:.3e})"
    elif rep.sign_violations:
        rep.outcome = "fail"
        rep.notes = "negative square coefficient"
    return rep


def check_prop44_grid(n: int = 20, trials: int = 100, seed: int = 0, tol: float = 1e-6
                      ) -> CertificateReport:
    """Run :func:`check_prop44` on the grid ``{1/n, ..., 1}^2`` and aggregate."""
    grid = [(i / n, j / n) for i in range(1, n + 1) for j in range(1, n + 1)]
    reports = [check_prop44(g, m, trials, seed, tol=tol) for g, m in grid]
    out = CertificateReport("prop44", trials * len(grid),
                            max(r.max_abs_residual for r in reports), tol,
                            details={"grid": n, "points": len(grid)})
    out.sign_violations = [v for r in reports for v in r.sign_violations]
    bad = [r for r in reports if not r.passed]
    if bad:
        out.outcome = "degenerate" if all(r.outcome == "degenerate" for r in bad) else "fail"
        r = bad[0]
        out.notes = f"{len(bad)} grid points failed; first at gamma={r.details['gamma']}, mu={r.details['mu_f_bar']}: {r.notes}"
    return out


# --------------------------------------------------------------------------
# Silver-stepsize gradient descent
# --------------------------------------------------------------------------


def lemma51_base_sides(x0, x1, g1, x_star, f0, f1, F_star):
    """Both sides of the ``k = 1`` identity with ``g0 = (x0 - x1)/h0``, ``h0 = sqrt(2)``."""
    h0 = math.sqrt(2.0)
    g0 = (x0 - x1) / h0
    lhs = (RHO * (f0 - f1 - _dots(g1, x0 - x1) - 0.5 * _sq(g1 - g0))
           + (f1 - f0 - _dots(g0, x1 - x0) - 0.5 * _sq(g1 - g0)))
    rhs = ((2 * RHO - 1) * (F_star - f1) + 0.5 * _sq(x0 - x_star)
           - h0 * (F_star - f0 - _dots(g0, x_star - x0) - 0.5 * _sq(g0))
           - RHO * (F_star - f1 - _dots(g1, x_star - x1) - 0.5 * _sq(g1))
           - 0.5 * _sq(x1 - RHO * g1 - x_star))
    return lhs, rhs


def lemma51_expression(trace, k: int, x_star, F_star: float) -> float:
    """Value of the silver-schedule inequality along a GD trace (nonnegative when it holds)."""
    N = 2**k - 1
    if trace.n_iter != N:
        raise ValueError(f"trace has {trace.n_iter} steps, expected {N}")
    X, G, V, h = trace.x, trace.grads, trace.values, trace.steps
    xs = np.asarray(x_star, dtype=np.float64)
    rk = RHO**k

    def gap(i):
        return F_star - V[i] - G[i] @ (xs - X[i]) - 0.5 * G[i] @ G[i]

    total = (2 * rk - 1) * (F_star - V[N]) + 0.5 * (X[0] - xs) @ (X[0] - xs)
    total -= sum(h[i] * gap(i) for i in range(N))
    total -= rk * gap(N)
    r = X[N] - rk * G[N] - xs
    return float(total - 0.5 * r @ r)


def check_lemma51(mode: str = "base_identity", k: int = 1, F=None, x0=None, x_star=None,
                  F_star: float | None = None, trials: int = 100, seed: int = 0, dim: int = 2,
                  tol: float | None = None) -> CertificateReport:
    """Check the silver-schedule lemma.

    ``mode="base_identity"`` samples free variables of the ``k = 1`` identity;
    ``mode="trajectory"`` runs GD with the level-``k`` silver schedule on the
    1-smooth ``F`` from ``x0`` and requires the inequality to hold (value
    ``>= -tol``).  ``x_star`` defaults to 0 and ``F_star`` to ``F(x_star)``.
    """
    if mode == "base_identity":
        tol = 1e-9 if tol is None else tol
        rng = np.random.default_rng([seed, dim])
        x0_, x1, g1, xs = _normalize(*rng.normal(size=(4, trials, dim)))
        f0, f1, fs = rng.normal(size=(3, trials))
        lhs, rhs = lemma51_base_sides(x0_, x1, g1, xs, f0, f1, fs)
        err = np.abs(lhs - rhs)
        rep = CertificateReport("lemma51-base", trials, float(err.max()), tol,
                                details={"dim": dim, "seed": seed})
        if rep.max_abs_residual > tol:
            rep.outcome = "fail"
            i = int(np.argmax(err))
            sample = dict(x0=x0_[i], x1=x1[i], g1=g1[i], x_star=xs[i], f0=f0[i], f1=f1[i], F_star=fs[i])
            rep.notes = _pinpoint(lemma51_base_sides, sample)
        return rep
    if mode == "trajectory":
        tol = 1e-8 if tol is None else tol
        if F is None:
            raise ValueError("trajectory mode needs a smooth F")
        if isinstance(F, ops.Subdifferential):
            F = F.f
        if not F.is_smooth:
            raise ops.NotSmoothError("trajectory mode needs a smooth F")
        if F.smoothness_L is not None and F.smoothness_L > 1 + 1e-12:
            raise ValueError(f"F must be 1-smooth, got L={F.smoothness_L}")
        x0 = ops.as_vector(1.0 if x0 is None else x0)
        xs = np.zeros_like(x0) if x_star is None else ops.as_vector(x_star, x0.size)
        Fs = F.value(xs) if F_star is None else float(F_star)
        tr = gd_run(F, silver_schedule(k), x0)
        val = lemma51_expression(tr, k, xs, Fs)
        rep = CertificateReport("lemma51-traj", 1, 0.0, tol, min_margin=val,
                                details={"k": k, "gap": float(tr.values[-1] - Fs),
                                         "dist0_sq": float((x0 - xs) @ (x0 - xs))})
        if val < -tol:
            rep.outcome = "fail"
            rep.notes = f"inequality violated by {val:.3e}"
        return rep
    raise ValueError(f"unknown mode {mode!r}; expected base_identity or trajectory")


def check_interpolation(F, trials: int = 100, seed: int = 0, dim: int = 2, scale: float | None = None,
                        tol: float = 1e-9) -> CertificateReport:
    """Sampled ``F(y) >= F(x) + <grad F(x), y - x> + ||grad F(y) - grad F(x)||^2 / (2L)``."""
    if isinstance(F, ops.Subdifferential):
        F = F.f
    L = F.smoothness_L
    if not L:
        raise ops.NotSmoothError("interpolation check needs an L-smooth F with L > 0")
    n = F.dim or dim
    if scale is None:
        scale = 3.0 * F.delta if isinstance(F, ops.Huber) else 1.0
    rng = np.random.default_rng([seed, n])
    pts = scale * rng.normal(size=(trials, 2, n))
    margins = np.empty(trials)
    for t in range(trials):
        x, y = pts[t]
        gx, gy = F.gradient(x), F.gradient(y)
        margins[t] = F.value(y) - F.value(x) - gx @ (y - x) - (gy - gx) @ (gy - gx) / (2 * L)
    rep = CertificateReport("interp", trials, 0.0, tol, min_margin=float(margins.min()),
                            details={"L": L})
    if rep.min_margin < -tol:
        rep.outcome = "fail"
        rep.notes = f"interpolation violated at trial {int(np.argmin(margins))}"
    return rep
