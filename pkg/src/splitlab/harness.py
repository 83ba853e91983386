"""Run methods on instances and compare what is observed with the bound values.

The central entry point is :func:`verify_bound`, which picks the observed
quantity that matches the bound (final residual, per-step contraction,
error-bound ratio or objective gap) and scales the bound constant by the
initial distance to the solution.  :func:`conjecture_search` draws random
admissible cells for the conjectured rates and records the worst ratio;
violations are findings, not errors.

Every random cell derives its generator from ``(seed, trial)`` alone, so
any cell can be re-run in isolation from its descriptor.
"""

from __future__ import annotations

import io
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import operators as ops
from .algorithms import (
    accelerated_drs_run,
    drs_composite_run,
    drs_run,
    gd_run,
    km_run,
    silver_schedule,
)
from .instances import Instance, make_instance, reference_solution_by_drs, INSTANCE_IDS
from .rates import (
    COMPOSITE_GAMMA_FACTOR,
    CONJECTURE_IDS,
    GOLDEN,
    BoundSpec,
    InapplicableBoundError,
    evaluate,
    km_sublinear_constant,
)

__all__ = [
    "ALGORITHM_IDS",
    "REL_TOL",
    "ABS_TOL",
    "ORACLE_ABS_TOL",
    "VIOLATION_TOL",
    "TRACE_HEADER",
    "BOUND_HEADER",
    "BoundCheckReport",
    "SearchReport",
    "ConfigError",
    "verify_bound",
    "bound_for",
    "estimate_error_bound_mu",
    "observed_rate",
    "check_eb_necessity",
    "conjecture_search",
    "reproduce_trial",
    "huber_tightness_sweep",
    "trace_csv",
    "bound_csv",
    "run_experiment",
    "parse_config",
    "two_subspace_extras",
]

ALGORITHM_IDS = ("drs", "drs-composite", "accel-drs", "km", "gd")

REL_TOL = 1e-7
ABS_TOL = 1e-12
ORACLE_ABS_TOL = 1e-6
VIOLATION_TOL = 1e-6

TRACE_HEADER = "iter,residual_sq,dist_sq,obj_gap,w_coords"
BOUND_HEADER = "bound_id,instance_id,gamma,lambda,N,lhs,rhs,ratio,pass"

_RESIDUAL_BOUNDS = ("km-sublinear", "km-sublinear-l1", "conj-cocoercive")
_GAP_BOUNDS = ("conj-composite", "conj-silver-drs", "conj-accel")
_EB_BOUNDS = ("eb-from-rate", "rsm-eb")

SUSPENDED_FEJER_NOTE = "relaxations above 2 in the silver schedule: Fejer monotonicity not assumed"


def _fmt(v) -> str:
    """Shortest round-trip decimal of a float (``repr`` of a Python float)."""
    return repr(float(v))


def _ratio(lhs: float, rhs: float, floor: float = 0.0) -> float:
    """``lhs / rhs``; 0 when ``rhs = 0`` and ``lhs`` is within ``floor`` of zero."""
    if rhs == 0.0:
        return 0.0 if abs(lhs) <= floor else math.inf
    return lhs / rhs


@dataclass
class BoundCheckReport:
    """Observed left-hand side against the bound's right-hand side.

    ``passed`` is ``lhs <= rhs * (1 + 1e-7) + abs_tol``; ``abs_tol`` is
    ``1e-12`` unless the reference solution came from an iterative oracle.
    """

    bound_id: str
    instance_id: str
    gamma: float
    lam: object
    N: int
    lhs: float
    rhs: float
    notes: str = ""
    conjecture: bool = False
    abs_tol: float = ABS_TOL

    @property
    def ratio(self) -> float:
        return _ratio(self.lhs, self.rhs, self.abs_tol)

    @property
    def passed(self) -> bool:
        return bool(self.lhs <= self.rhs * (1.0 + REL_TOL) + self.abs_tol)

    @property
    def lambda_label(self) -> str:
        return self.lam if isinstance(self.lam, str) else _fmt(self.lam)

    def csv_row(self) -> str:
        return ",".join([
            self.bound_id, self.instance_id, _fmt(self.gamma), self.lambda_label, str(self.N),
            _fmt(self.lhs), _fmt(self.rhs), _fmt(self.ratio), "true" if self.passed else "false",
        ])

    def summary(self) -> str:
        tag = "CONJECTURE " if self.conjecture else ""
        verdict = "PASS" if self.passed else ("VIOLATION" if self.conjecture else "FAIL")
        s = (f"[{verdict}] {tag}{self.bound_id} on {self.instance_id}: gamma={self.gamma:.6g} "
             f"lambda={self.lambda_label} N={self.N} lhs={self.lhs:.10e} rhs={self.rhs:.10e} "
             f"ratio={self.ratio:.12f}")
        return s + (f" ({self.notes})" if self.notes else "")


@dataclass
class SearchReport:
    """Worst ratio found by a randomized search; reproducible from ``(target, budget, seed, dim)``."""

    target: str
    budget: int
    seed: int
    dim: int
    best_ratio: float
    best: dict
    violations: list = field(default_factory=list)
    ratios: np.ndarray | None = field(default=None, repr=False)

    @property
    def found_violation(self) -> bool:
        return bool(self.violations)

    def summary(self) -> str:
        head = (f"{'CONJECTURE ' if self.target in CONJECTURE_IDS else ''}{self.target}: "
                f"budget={self.budget} seed={self.seed} dim={self.dim} best_ratio={self.best_ratio:.12f} "
                f"violations={len(self.violations)}")
        lines = [head, f"  best cell: {json.dumps(self.best, sort_keys=True)}"]
        for v in self.violations:
            lines.append(f"  VIOLATION ratio={v['ratio']:.12f} reproduce: {json.dumps(v, sort_keys=True)}")
        return "\n".join(lines)


class ConfigError(ValueError):
    """Malformed experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


# --------------------------------------------------------------------------
# Distances to the fixed-point set
# --------------------------------------------------------------------------


def _dist_sq_fn(instance: Instance, gamma: float):
    """Return ``w -> dist(w, Fix T)^2`` for rows of a 2-D array."""
    kind = instance.fixed_point_set
    if kind == "point":
        ws = instance.fixed_point(gamma)

        def dist_sq(W):
            D = np.atleast_2d(W) - ws
            return np.einsum("ij,ij->i", D, D)

        return dist_sq
    if kind == "subspace":
        V = instance.fixed_subspace(gamma)

        def dist_sq(W):
            W = np.atleast_2d(W)
            D = W - (W @ V) @ V.T
            return np.einsum("ij,ij->i", D, D)

        return dist_sq
    raise ValueError(f"fixed-point set of instance {instance.id!r} is not known")


def _initial_dist_sq(instance: Instance, w1, gamma: float) -> tuple[float, str]:
    """Squared distance used to scale a bound; falls back to a known fixed point."""
    if instance.fixed_point_set in ("point", "subspace"):
        return float(_dist_sq_fn(instance, gamma)(w1)[0]), ""
    d = w1 - instance.fixed_point(gamma)
    return float(d @ d), "scaled by ||w1 - w*|| for one known fixed point"


# --------------------------------------------------------------------------
# Running algorithms
# --------------------------------------------------------------------------


def _default_algorithm(instance: Instance, bound_id: str) -> str:
    if bound_id == "silver-gd":
        return "gd"
    if bound_id == "conj-accel":
        return "accel-drs"
    if bound_id in _GAP_BOUNDS:
        return "drs-composite"
    if instance.S is not None:
        return "km"
    return "drs"


def _run(instance: Instance, algorithm: str, gamma: float, lambdas, w1, N: int):
    if algorithm == "drs":
        if instance.A is None:
            raise ValueError(f"instance {instance.id!r} has no operator pair for DRS")
        return drs_run(instance.A, instance.B, gamma, lambdas, w1, N)
    if algorithm == "drs-composite":
        if not instance.is_composite:
            raise ValueError(f"instance {instance.id!r} is not a composite problem")
        return drs_composite_run(instance.f, instance.g, gamma, lambdas, w1, N)
    if algorithm == "accel-drs":
        if not instance.is_composite:
            raise ValueError(f"instance {instance.id!r} is not a composite problem")
        return accelerated_drs_run(instance.f, instance.g, gamma, lambdas, w1, N)
    if algorithm == "km":
        if instance.S is None:
            raise ValueError(f"instance {instance.id!r} has no nonexpansive map")
        return km_run(instance.S, w1, N)
    raise ValueError(f"unknown algorithm {algorithm!r}; known: {', '.join(ALGORITHM_IDS)}")


def _reference(instance: Instance):
    """``(x*, F*, abs_tol)``; falls back to the iterative oracle when no solution is stored."""
    if instance.known_solution is not None:
        xs = instance.known_solution
        return xs, instance.objective(xs), ABS_TOL
    if not instance.is_composite:
        raise ValueError(f"instance {instance.id!r} has no reference solution")
    xs = reference_solution_by_drs(instance)
    return xs, instance.objective(xs), ORACLE_ABS_TOL


def _start(instance: Instance, w1):
    if w1 is None:
        w1 = np.zeros(instance.dim)
        w1[0] = 1.0
    return ops.as_vector(w1, instance.dim)


def _max_eb_ratio(instance: Instance, trace, gamma: float) -> float:
    """``max_k dist(w^k) / ||T w^k - w^k||`` over ``k = 1..N`` (0/0 counts as 0)."""
    dist = np.sqrt(_dist_sq_fn(instance, gamma)(trace.w[:-1]))
    res = np.sqrt(trace.residual_sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(dist == 0.0, 0.0, dist / res)
    return float(r.max())


def observed_rate(instance: Instance, trace, gamma: float | None = None) -> float:
    """Largest per-step contraction ``dist(w^{k+1}) / dist(w^k)`` (steps from the set are skipped)."""
    gamma = trace.gamma if gamma is None else gamma
    d = np.sqrt(_dist_sq_fn(instance, gamma)(trace.w))
    prev, nxt = d[:-1], d[1:]
    ok = prev > 0
    if not ok.any():
        return 0.0
    return float((nxt[ok] / prev[ok]).max())


def verify_bound(instance: Instance, algorithm: str | None, bound: BoundSpec, gamma: float = 1.0,
                 lam=1.0, N: int | None = None, w1=None, x0=None) -> BoundCheckReport:
    """Run ``algorithm`` on ``instance`` and compare the observed quantity with ``bound``.

    Parameters
    ----------
    algorithm : str or None
        One of :data:`ALGORITHM_IDS`; ``None`` picks the method the bound is about.
    lam : float or sequence
        Relaxation (constant or per-step).  Silver bounds ignore it and use
        the silver schedule.
    N : int, optional
        Iteration count; taken from the bound's ``N`` (or ``k``) when omitted.
    w1, x0 : array_like, optional
        Starting point; defaults to the first unit vector.

    Raises
    ------
    InapplicableBoundError
        If the bound's parameters lie outside the stated range.
    ValueError
        If the instance lacks the reference solution the bound needs.
    """
    rhs_const = evaluate(bound)
    bid = bound.id
    p = bound.params
    algorithm = algorithm or _default_algorithm(instance, bid)
    notes = []
    lam_label = lam if np.isscalar(lam) else "schedule"

    if bid == "silver-gd":
        k = int(p["k"])
        N = 2**k - 1
        if instance.f is None or (instance.g is not None and not isinstance(instance.g, ops.ZeroFunction)):
            raise ValueError("silver-gd needs a smooth unconstrained instance")
        L = p["L"]
        x_start = _start(instance, x0 if x0 is not None else w1)
        xs, Fs, atol = _reference(instance)
        tr = gd_run(instance.f, silver_schedule(k).as_array() / L, x_start)
        lhs = float(tr.values[-1] - Fs)
        d = x_start - xs
        return BoundCheckReport(bid, instance.id, 1.0 / L, f"silver:{k}", N, lhs,
                                rhs_const * float(d @ d), "gap F(x^N) - F*", False, atol)

    if bid == "conj-silver-drs":
        k = int(p["k"])
        N = 2**k
        lam = list(silver_schedule(k).values) + [1.0]
        lam_label = f"silver:{k}+1"
        notes.append(SUSPENDED_FEJER_NOTE)
    elif N is None:
        if "N" not in p:
            raise ValueError(f"bound {bid!r} needs an explicit N")
        N = int(p["N"])
    N = int(N)

    w_start = _start(instance, w1)
    tr = _run(instance, algorithm, gamma, lam, w_start, N)
    atol = ABS_TOL

    if bid in _RESIDUAL_BOUNDS:
        lhs = float(tr.residual_sq[-1])
        d0, note = _initial_dist_sq(instance, w_start, gamma)
        rhs = rhs_const * d0
        notes.append(note or "residual ||w^{N+1} - w^N||^2")
    elif bid == "linear-eb":
        lhs = observed_rate(instance, tr, gamma)
        rhs = rhs_const
        notes.append("max per-step dist contraction")
    elif bid in _EB_BOUNDS:
        lhs = _max_eb_ratio(instance, tr, gamma)
        rhs = rhs_const
        notes.append("max dist(w^k)/||T w^k - w^k|| over the trajectory")
    elif bid in _GAP_BOUNDS:
        xs, Fs, atol = _reference(instance)
        lhs = float(instance.objective(tr.y[-1]) - Fs)
        d0, note = _initial_dist_sq(instance, w_start, gamma)
        rhs = rhs_const * d0
        notes.append(note or "gap f(y^N) + g(y^N) - F*")
    else:  # pragma: no cover - every id is handled above
        raise ValueError(f"no observation rule for bound {bid!r}")
    return BoundCheckReport(bid, instance.id, float(gamma), lam_label, N, lhs, rhs,
                            "; ".join(n for n in notes if n), bound.is_conjecture, atol)


def _instance_L(instance: Instance) -> float:
    L = instance.constants.get("L")
    if L is None and instance.f is not None:
        L = instance.f.smoothness_L
    if L is None:
        raise ValueError(f"instance {instance.id!r} has no smoothness constant")
    return float(L)


def _instance_beta(instance: Instance) -> float:
    beta = instance.constants.get("beta")
    if beta is None and instance.B is not None:
        beta = instance.B.beta_cocoercive
    if beta is None:
        raise ValueError(f"instance {instance.id!r} has no cocoercivity constant")
    return float(beta)


def bound_for(bound_id: str, instance: Instance, gamma: float = 1.0, lam: float = 1.0,
              N: int | None = None, **overrides) -> BoundSpec:
    """Fill a bound's parameters from the run settings and the instance constants.

    ``linear-eb`` takes ``mu`` from :func:`estimate_error_bound_mu` at the
    given ``(gamma, lam)``; ``eb-from-rate`` takes ``r`` from an observed run
    of length ``N``.  Any parameter may be overridden by keyword.
    """
    need = {
        "km-sublinear": ("N", "lam"),
        "km-sublinear-l1": ("N",),
        "linear-eb": ("mu", "lam"),
        "eb-from-rate": ("r",),
        "rsm-eb": ("gamma", "beta", "mu_f", "lam"),
        "silver-gd": ("k", "L"),
        "conj-cocoercive": ("N", "lam", "beta", "gamma"),
        "conj-composite": ("N", "lam", "gamma", "L"),
        "conj-silver-drs": ("k", "gamma", "L"),
        "conj-accel": ("N", "lam", "gamma", "L"),
    }
    if bound_id not in need:
        raise ValueError(f"unknown bound id {bound_id!r}")
    values = {}
    for name in need[bound_id]:
        if name in overrides:
            values[name] = overrides[name]
        elif name == "N":
            if N is None:
                raise ValueError(f"bound {bound_id!r} needs N")
            values[name] = N
        elif name == "lam":
            values[name] = lam
        elif name == "gamma":
            values[name] = gamma
        elif name == "L":
            values[name] = _instance_L(instance)
        elif name == "beta":
            values[name] = _instance_beta(instance)
        elif name == "mu_f":
            values[name] = instance.constants["mu_f"]
        elif name == "mu":
            values[name] = estimate_error_bound_mu(instance, gamma, lam)
        elif name == "r":
            if N is None:
                raise ValueError("eb-from-rate needs N to observe a rate")
            tr = _run(instance, _default_algorithm(instance, bound_id), gamma, lam,
                      _start(instance, None), N)
            values[name] = observed_rate(instance, tr, gamma)
        elif name == "k":
            raise ValueError(f"bound {bound_id!r} needs the silver level k")
    return BoundSpec(bound_id, values)


# --------------------------------------------------------------------------
# Error-bound constants
# --------------------------------------------------------------------------


def estimate_error_bound_mu(instance: Instance, gamma: float = 1.0, lam: float = 1.0) -> float:
    """Smallest ``mu`` with ``dist(w, Fix T) <= mu ||(I - T) w||`` for a linear DR operator.

    Computed as the reciprocal of the smallest singular value of ``I - T`` on
    the orthogonal complement of ``ker(I - T)``; ``math.inf`` when that
    complement is trivial (``T = I``).
    """
    if not instance.is_linear:
        raise ValueError(f"instance {instance.id!r} is not linear")
    T = instance.dr_matrix(gamma, lam)
    s = np.linalg.svd(np.eye(instance.dim) - T, compute_uv=False)
    cutoff = 1e-12 * max(1.0, float(s.max()))
    nz = s[s > cutoff]
    if nz.size == 0:
        return math.inf
    return float(1.0 / nz.min())


def check_eb_necessity(trace, r: float, instance: Instance, gamma: float | None = None
                       ) -> BoundCheckReport:
    """Check ``dist(w^k) <= ||T w^k - w^k|| / (1 - r)`` at every stored iterate.

    ``r`` is a linear rate observed on (or claimed for) the run.  ``r = 0``
    is accepted (the stated range is open but the inequality is still
    meaningful); ``r >= 1`` or ``r < 0`` raises
    :class:`InapplicableBoundError`.
    """
    if not 0.0 <= r < 1.0:
        raise InapplicableBoundError(f"eb-from-rate: r={r!r} outside [0, 1)")
    gamma = trace.gamma if gamma is None else gamma
    bound = BoundSpec("eb-from-rate", r=r)
    rhs = evaluate(bound, force=True)
    lhs = _max_eb_ratio(instance, trace, gamma)
    return BoundCheckReport("eb-from-rate", instance.id, float(gamma), float(trace.lambdas[0]),
                            trace.n_iter, lhs, rhs, "max dist/residual over all iterates")


# --------------------------------------------------------------------------
# Conjecture search
# --------------------------------------------------------------------------


def _sample_cell(target: str, seed: int, trial: int, dim: int) -> dict:
    """Draw one admissible cell; depends only on ``(target, seed, trial, dim)``."""
    rng = np.random.default_rng([seed, trial])
    d = int(rng.integers(1, dim + 1))
    inst_seed = int(rng.integers(0, 2**31 - 1))
    L = float(10 ** rng.uniform(-0.5, 0.5))
    if target == "conj-cocoercive":
        family = str(rng.choice(["rand-quad", "rand-coco", "rand-huber"]))
    else:
        family = str(rng.choice(["rand-quad", "rand-huber"]))
    if family == "rand-huber":
        params = {"dim": d, "L": L, "g_kind": str(rng.choice(["zero", "l1"])), "seed": inst_seed}
    elif family == "rand-quad":
        params = {"dim": d, "L": L, "g_kind": str(rng.choice(["zero", "l1", "box"])), "seed": inst_seed}
    else:
        params = {"dim": d, "beta": 1.0 / L, "g_kind": str(rng.choice(["zero", "l1", "box"])),
                  "seed": inst_seed}
    u_gamma = float(rng.uniform(0.01, 0.99))
    u_lam = float(rng.uniform(0.01, 0.99))
    N = int(rng.integers(1, 21))
    cell = {"target": target, "seed": seed, "trial": trial, "dim": dim,
            "instance": family, "params": params}
    if target == "conj-cocoercive":
        cell.update(gamma=u_gamma / L, lam=2.0 * u_lam, N=N)
    elif target == "conj-composite":
        cell.update(gamma=u_gamma * COMPOSITE_GAMMA_FACTOR / L, lam=GOLDEN * u_lam, N=N)
    elif target == "conj-silver-drs":
        cell.update(gamma=u_gamma * COMPOSITE_GAMMA_FACTOR / L, k=int(rng.integers(1, 4)))
    elif target == "conj-accel":
        cell.update(gamma=float(rng.uniform(0.01, 1.0)) / L, lam=float(rng.uniform(0.01, 1.0)), N=N)
    else:
        raise ValueError(f"unknown conjecture target {target!r}; known: {', '.join(CONJECTURE_IDS)}")
    cell["start_at_solution"] = bool(rng.random() < 0.02)
    cell["start_scale"] = float(10 ** rng.uniform(-1, 1))
    cell["start_seed"] = int(rng.integers(0, 2**31 - 1))
    return cell


def _run_cell(cell: dict) -> BoundCheckReport:
    inst = make_instance(cell["instance"], **cell["params"])
    gamma = cell["gamma"]
    ws = inst.fixed_point(gamma)
    if cell["start_at_solution"]:
        w1 = ws.copy()
    else:
        w1 = ws + cell["start_scale"] * np.random.default_rng(cell["start_seed"]).normal(size=inst.dim)
    target = cell["target"]
    if target == "conj-silver-drs":
        bound = bound_for(target, inst, gamma, k=cell["k"])
        return verify_bound(inst, None, bound, gamma, 1.0, None, w1)
    bound = bound_for(target, inst, gamma, cell["lam"], cell["N"])
    return verify_bound(inst, None, bound, gamma, cell["lam"], cell["N"], w1)


def reproduce_trial(target: str, seed: int, trial: int, dim: int = 5) -> BoundCheckReport:
    """Re-run a single search cell from its ``(target, seed, trial, dim)`` key."""
    return _run_cell(_sample_cell(target, seed, trial, dim))


def conjecture_search(target: str, budget: int, seed: int = 0, dim: int = 5) -> SearchReport:
    """Sample ``budget`` admissible cells for a conjectured rate and record the worst ratio.

    Cells draw from the random quadratic, cocoercive-linear and Huber families
    (dimension ``1..dim``), with stepsize and relaxation uniform inside the
    conjecture's stated ranges and ``N`` in ``1..20`` (silver level ``k`` in
    ``1..3``).  A cell is a violation when its ratio exceeds ``1 + 1e-6``;
    violations are returned with the full cell descriptor.
    """
    if target not in CONJECTURE_IDS:
        raise ValueError(f"unknown conjecture target {target!r}; known: {', '.join(CONJECTURE_IDS)}")
    if isinstance(budget, bool) or int(budget) != budget or budget < 1:
        raise ValueError(f"budget must be a positive integer, got {budget!r}")
    if dim < 1:
        raise ValueError("dim must be >= 1")
    ratios = np.empty(int(budget))
    cells = {}
    violations = []
    for i in range(int(budget)):
        cell = _sample_cell(target, seed, i, dim)
        rep = _run_cell(cell)
        ratios[i] = rep.ratio
        cells[i] = cell
        if rep.ratio > 1.0 + VIOLATION_TOL:
            violations.append({**cell, "ratio": rep.ratio, "lhs": rep.lhs, "rhs": rep.rhs})
    best_i = int(np.argmax(ratios))
    best = {**cells[best_i], "ratio": float(ratios[best_i])}
    return SearchReport(target, int(budget), seed, dim, float(ratios[best_i]), best, violations, ratios)


def huber_tightness_sweep(k: int, deltas=None, x0: float = 1.0) -> SearchReport:
    """Sweep the Huber threshold and report the largest gap / silver-GD-bound ratio.

    GD with the level-``k`` silver schedule is run on the 1-smooth Huber
    function from ``x0``; the default grid is 4001 log-spaced thresholds in
    ``[1e-4, 1]``.
    """
    if k not in (1, 2, 3):
        raise ValueError(f"k must be 1, 2 or 3, got {k!r}")
    deltas = np.logspace(-4.0, 0.0, 4001) if deltas is None else np.asarray(deltas, dtype=np.float64)
    if deltas.size < 1:
        raise ValueError("empty threshold grid")
    rhs = evaluate(BoundSpec("silver-gd", k=k, L=1.0)) * x0 * x0
    steps = silver_schedule(k)
    ratios = np.empty(deltas.size)
    for i, delta in enumerate(deltas):
        tr = gd_run(ops.Huber(float(delta)), steps, [x0])
        ratios[i] = _ratio(float(tr.values[-1]), rhs)
    j = int(np.argmax(ratios))
    best = {"k": k, "delta": float(deltas[j]), "x0": float(x0), "ratio": float(ratios[j])}
    violations = [{"k": k, "delta": float(deltas[i]), "ratio": float(ratios[i])}
                  for i in np.flatnonzero(ratios > 1.0 + VIOLATION_TOL)]
    return SearchReport("silver-gd-huber", int(deltas.size), 0, 1, float(ratios[j]), best,
                        violations, ratios)


# --------------------------------------------------------------------------
# Serialization and experiment configs
# --------------------------------------------------------------------------


def trace_csv(trace, instance: Instance | None = None, gamma: float | None = None) -> str:
    """Trace as CSV text with header ``iter,residual_sq,dist_sq,obj_gap,w_coords``.

    Row ``k`` (``1..N``) holds ``||w^{k+1} - w^k||^2``, ``dist(w^k)^2``,
    ``f(y^k) + g(y^k) - F*`` and the coordinates of ``w^k`` separated by
    spaces.  Unavailable quantities are left empty.
    """
    gamma = trace.gamma if gamma is None else gamma
    N = trace.n_iter
    dist = [""] * N
    gap = [""] * N
    if instance is not None:
        try:
            ds = _dist_sq_fn(instance, gamma)(trace.w[:N])
            dist = [_fmt(v) for v in ds]
        except ValueError:
            pass
        if instance.is_composite and instance.known_solution is not None and trace.y is not None:
            Fs = instance.optimal_value
            gap = [_fmt(instance.objective(trace.y[k]) - Fs) for k in range(N)]
    out = io.StringIO()
    out.write(TRACE_HEADER + "\n")
    for k in range(N):
        coords = " ".join(_fmt(c) for c in trace.w[k])
        out.write(f"{k + 1},{_fmt(trace.residual_sq[k])},{dist[k]},{gap[k]},{coords}\n")
    return out.getvalue()


def bound_csv(reports) -> str:
    """Bound-check reports as CSV text with header :data:`BOUND_HEADER`."""
    return BOUND_HEADER + "\n" + "".join(r.csv_row() + "\n" for r in reports)


def _parse_kv(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError("param", f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _lambda_from(cfg: dict):
    sched = cfg.get("lambda_schedule")
    if sched is not None:
        if not isinstance(sched, str) or not sched.startswith("silver:"):
            raise ConfigError("lambda_schedule", f"expected 'silver:K', got {sched!r}")
        try:
            k = int(sched.split(":", 1)[1])
        except ValueError:
            raise ConfigError("lambda_schedule", f"bad level in {sched!r}") from None
        try:
            return list(silver_schedule(k).values), sched
        except ValueError as exc:
            raise ConfigError("lambda_schedule", str(exc)) from None
    lam = cfg.get("lambda", 1.0)
    if isinstance(lam, bool) or not isinstance(lam, (int, float)) or not math.isfinite(lam):
        raise ConfigError("lambda", f"expected a number, got {lam!r}")
    return float(lam), float(lam)


def parse_config(cfg) -> dict:
    """Validate a run/check configuration and return it normalized.

    Accepts a mapping or JSON text.  Keys mirror the command-line flags:
    ``instance``, ``params``, ``algorithm``, ``gamma``, ``lambda`` or
    ``lambda_schedule``, ``iters``, ``w1``, ``out``, ``bound``, ``bound_out``.
    """
    if isinstance(cfg, (str, bytes)):
        try:
            cfg = json.loads(cfg)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    if not isinstance(cfg, dict):
        raise ConfigError("config", "expected a JSON object")
    inst = cfg.get("instance")
    if inst not in INSTANCE_IDS:
        raise ConfigError("instance", f"expected one of {', '.join(INSTANCE_IDS)}, got {inst!r}")
    params = cfg.get("params", {})
    if isinstance(params, list):
        params = _parse_kv(params)
    if not isinstance(params, dict):
        raise ConfigError("params", "expected an object of key/value pairs")
    iters = cfg.get("iters")
    if iters in (None, "") or isinstance(iters, bool) or not isinstance(iters, int) or iters < 1:
        raise ConfigError("iters", f"expected a positive integer, got {iters!r}")
    gamma = cfg.get("gamma", 1.0)
    if isinstance(gamma, bool) or not isinstance(gamma, (int, float)) or not gamma > 0:
        raise ConfigError("gamma", f"expected a positive number, got {gamma!r}")
    lam, lam_label = _lambda_from(cfg)
    algorithm = cfg.get("algorithm")
    if algorithm is not None and algorithm not in ALGORITHM_IDS:
        raise ConfigError("algorithm", f"expected one of {', '.join(ALGORITHM_IDS)}, got {algorithm!r}")
    bound = cfg.get("bound")
    try:
        instance = make_instance(inst, **params)
    except ValueError as exc:
        raise ConfigError("params", str(exc)) from None
    w1 = cfg.get("w1")
    if isinstance(w1, str):
        try:
            w1 = [float(t) for t in w1.split(",")]
        except ValueError:
            raise ConfigError("w1", f"expected comma-separated numbers, got {w1!r}") from None
    if w1 is not None:
        if not isinstance(w1, list) or len(w1) != instance.dim:
            raise ConfigError("w1", f"expected {instance.dim} coordinates, got {w1!r}")
    return {
        "instance": instance, "instance_id": inst, "params": params, "iters": iters,
        "gamma": float(gamma), "lambda": lam, "lambda_label": lam_label,
        "algorithm": algorithm, "w1": w1, "out": cfg.get("out"), "bound": bound,
        "bound_out": cfg.get("bound_out"), "k": cfg.get("k"),
    }


def _write(path: str, text: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def run_experiment(config) -> dict:
    """Run one configured experiment and write its CSV files.

    Writes the trace CSV to ``out`` and, when ``bound`` is given, the
    bound-check CSV to ``bound_out``.  Returns ``{"trace": text, "bound":
    text or None, "report": BoundCheckReport or None}``; gradient-descent
    bound checks produce no trace.  Output depends on
    the configuration only.
    """
    c = parse_config(config)
    inst = c["instance"]
    w1 = _start(inst, c["w1"])
    algorithm = c["algorithm"] or _default_algorithm(inst, c["bound"] or "")
    text = None
    if algorithm == "gd":
        if c["bound"] != "silver-gd":
            raise ConfigError("algorithm", "gd runs are only available through the silver-gd bound check")
    else:
        try:
            trace = _run(inst, algorithm, c["gamma"], c["lambda"], w1, c["iters"])
        except ValueError as exc:
            raise ConfigError("algorithm", str(exc)) from None
        text = trace_csv(trace, inst, c["gamma"])
        if c["out"]:
            _write(c["out"], text)
    report = None
    btext = None
    if c["bound"]:
        lam = c["lambda"] if np.isscalar(c["lambda"]) else 1.0
        try:
            extra = {"k": c["k"]} if c["k"] is not None else {}
            bound = bound_for(c["bound"], inst, c["gamma"], lam, c["iters"], **extra)
            report = verify_bound(inst, c["algorithm"], bound, c["gamma"], c["lambda"],
                                  c["iters"], w1)
        except (ValueError, KeyError) as exc:
            raise ConfigError("bound", str(exc)) from None
        btext = bound_csv([report])
        if c["bound_out"]:
            _write(c["bound_out"], btext)
    return {"trace": text, "bound": btext, "report": report}


def two_subspace_extras(N: int) -> dict:
    """Observed ``dist_P(y^N)`` on the two-line instance with ``w^N`` rotated onto ``P``.

    The start ``w^1`` is the unit vector at angle ``-(N-1) theta`` so that
    ``w^N`` lies on the x-axis.  Two candidate closed forms are reported next
    to the observed value; neither is asserted.
    """
    inst = make_instance("two-subspace", N=N)
    theta = inst.constants["theta"]
    phi = -(N - 1) * theta
    w1 = np.array([math.cos(phi), math.sin(phi)])
    tr = drs_run(inst.A, inst.B, 1.0, 1.0, w1, N)
    y = tr.y[-1]
    return {
        "N": N,
        "w_N": tr.w[N - 1].tolist(),
        "dist_P_yN": abs(float(y[1])),
        "candidate_a": math.sqrt(km_sublinear_constant(N)),
        "candidate_b": math.sqrt((N - 1) ** N / N ** (N + 1)),
    }
