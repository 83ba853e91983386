"""Closed-form rate bounds and their parameter-range checks.

A :class:`BoundSpec` names one bound by a stable string id and carries its
scalar parameters.  :func:`evaluate` returns the constant in front of the
initial distance (``||w^1 - w*||^2`` or ``||x^0 - x*||^2``), or the rate /
modulus itself for the linear-convergence bounds.

Conjectured bounds are flagged through :attr:`BoundSpec.is_conjecture`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Mapping

from .algorithms import SILVER_RATIO

__all__ = [
    "BOUND_IDS",
    "CONJECTURE_IDS",
    "BoundSpec",
    "InapplicableBoundError",
    "Interval",
    "evaluate",
    "applicable",
    "theoretical_km_rate_lambda_range",
    "km_sublinear_constant",
]

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0
COMPOSITE_GAMMA_FACTOR = 2.0 * math.sqrt(2.0) - 1.0

KM_WINDOW_NOTE = (
    "lambda window [1, 1 + sqrt((k-1)/k)) read with k := N (interpretation)"
)


class InapplicableBoundError(ValueError):
    """Raised when a bound is evaluated outside its stated parameter range."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    closed_lo: bool = True
    closed_hi: bool = False
    note: str = ""

    @property
    def is_empty(self) -> bool:
        if self.lo < self.hi:
            return False
        return not (self.lo == self.hi and self.closed_lo and self.closed_hi)

    def __contains__(self, t) -> bool:
        above = t >= self.lo if self.closed_lo else t > self.lo
        below = t <= self.hi if self.closed_hi else t < self.hi
        return above and below


def _open(lo, hi):
    return Interval(lo, hi, False, False)


def _left_open(lo, hi):
    return Interval(lo, hi, False, True)


def theoretical_km_rate_lambda_range(N: int) -> Interval:
    """Relaxation window ``[1, 1 + sqrt((N-1)/N))`` of the general-lambda KM bound.

    The window variable is read as the iteration count ``N``; this is an
    interpretation and is carried in ``Interval.note``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    return Interval(1.0, 1.0 + math.sqrt((N - 1) / N), True, False, KM_WINDOW_NOTE)


def km_sublinear_constant(N: int) -> float:
    """``(N-1)^(N-1) / N^N`` with ``0^0 = 1``, computed in log space for large N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if N == 1:
        return 1.0
    return math.exp((N - 1) * math.log(N - 1) - N * math.log(N))


def _km(p):
    lam, N = p["lam"], p["N"]
    return lam * km_sublinear_constant(N) / (2.0 - lam)


def _linear_eb(p):
    mu, lam = p["mu"], p["lam"]
    return math.sqrt(1.0 - (2.0 / lam - 1.0) / mu**2)


def _rsm(p):
    gamma, beta, mu_f, lam = p["gamma"], p["beta"], p["mu_f"], p["lam"]
    m = min(mu_f * beta, 1.0)
    return (gamma + gamma * m + beta) / (lam * gamma * m)


def _silver_gd(p):
    return p["L"] / (4.0 * SILVER_RATIO ** p["k"] - 2.0)


def _conj_coco(p):
    lam, N = p["lam"], p["N"]
    return lam**2 / ((N - 1) * lam + 1.0) ** 2


def _conj_comp(p):
    lam, N, gamma = p["lam"], p["N"], p["gamma"]
    return 1.0 / (4.0 * gamma * ((N - 1) * lam + 1.0))


def _conj_silver(p):
    return 1.0 / (4.0 * p["gamma"] * SILVER_RATIO ** p["k"])


def _conj_accel(p):
    lam, N, gamma = p["lam"], p["N"], p["gamma"]
    return 2.0 / (gamma * ((N * N + 7 * N - 8) * lam + 8.0))


def _pos_int(name, v):
    if isinstance(v, bool) or int(v) != v or v < 1:
        return f"{name}={v!r} must be a positive integer"
    return None


def _positive(name, v):
    return None if v > 0 else f"{name}={v!r} must be positive"


def _in(name, v, interval: Interval, label: str):
    return None if v in interval else f"{name}={v!r} outside {label}"


def _chk_km(p):
    yield _pos_int("N", p["N"])
    window = theoretical_km_rate_lambda_range(int(p["N"]))
    yield _in("lam", p["lam"], window, f"[1, 1+sqrt((N-1)/N)) ({KM_WINDOW_NOTE})")


def _chk_km1(p):
    yield _pos_int("N", p["N"])


def _chk_linear_eb(p):
    yield _positive("mu", p["mu"])
    yield _in("lam", p["lam"], _open(0.0, 2.0), "(0, 2)")
    if p["mu"] > 0 and 0 < p["lam"] < 2 and not p["mu"] ** 2 > 2.0 / p["lam"] - 1.0:
        yield f"mu^2={p['mu'] ** 2!r} must exceed 2/lam - 1 for a rate in (0, 1)"


def _chk_eb_rate(p):
    yield _in("r", p["r"], _open(0.0, 1.0), "(0, 1)")


def _chk_rsm(p):
    yield _positive("beta", p["beta"])
    yield _positive("mu_f", p["mu_f"])
    yield _in("lam", p["lam"], _open(0.0, 2.0), "(0, 2)")
    if p["beta"] > 0:
        yield _in("gamma", p["gamma"], _left_open(0.0, p["beta"]), "(0, beta]")


def _chk_silver_gd(p):
    yield _pos_int("k", p["k"])
    yield _positive("L", p["L"])


def _chk_conj_coco(p):
    yield _pos_int("N", p["N"])
    yield _positive("beta", p["beta"])
    yield _in("lam", p["lam"], _open(0.0, 2.0), "(0, 2)")
    if p["beta"] > 0:
        yield _in("gamma", p["gamma"], _open(0.0, p["beta"]), "(0, beta)")


def _chk_conj_comp(p):
    yield _pos_int("N", p["N"])
    yield _positive("L", p["L"])
    yield _in("lam", p["lam"], _open(0.0, GOLDEN), "(0, (1+sqrt5)/2)")
    if p["L"] > 0:
        yield _in("gamma", p["gamma"], _open(0.0, COMPOSITE_GAMMA_FACTOR / p["L"]),
                  "(0, (2sqrt2-1)/L)")


def _chk_conj_silver(p):
    yield _pos_int("k", p["k"])
    yield _positive("L", p["L"])
    if p["L"] > 0:
        yield _in("gamma", p["gamma"], _open(0.0, COMPOSITE_GAMMA_FACTOR / p["L"]),
                  "(0, (2sqrt2-1)/L)")


def _chk_conj_accel(p):
    yield _pos_int("N", p["N"])
    yield _positive("L", p["L"])
    yield _in("lam", p["lam"], _left_open(0.0, 1.0), "(0, 1]")
    if p["L"] > 0:
        yield _in("gamma", p["gamma"], _left_open(0.0, 1.0 / p["L"]), "(0, 1/L]")


@dataclass(frozen=True)
class _Rule:
    params: tuple
    formula: Callable[[Mapping], float]
    check: Callable
    conjecture: bool = False


_RULES = {
    "km-sublinear": _Rule(("N", "lam"), _km, _chk_km),
    "km-sublinear-l1": _Rule(("N",), lambda p: km_sublinear_constant(int(p["N"])), _chk_km1),
    "linear-eb": _Rule(("mu", "lam"), _linear_eb, _chk_linear_eb),
    "eb-from-rate": _Rule(("r",), lambda p: 1.0 / (1.0 - p["r"]), _chk_eb_rate),
    "rsm-eb": _Rule(("gamma", "beta", "mu_f", "lam"), _rsm, _chk_rsm),
    "silver-gd": _Rule(("k", "L"), _silver_gd, _chk_silver_gd),
    "conj-cocoercive": _Rule(("N", "lam", "beta", "gamma"), _conj_coco, _chk_conj_coco, True),
    "conj-composite": _Rule(("N", "lam", "gamma", "L"), _conj_comp, _chk_conj_comp, True),
    "conj-silver-drs": _Rule(("k", "gamma", "L"), _conj_silver, _chk_conj_silver, True),
    "conj-accel": _Rule(("N", "lam", "gamma", "L"), _conj_accel, _chk_conj_accel, True),
}

BOUND_IDS = tuple(_RULES)
CONJECTURE_IDS = tuple(k for k, r in _RULES.items() if r.conjecture)


@dataclass(frozen=True)
class BoundSpec:
    """A named bound with its parameters, e.g. ``BoundSpec("linear-eb", mu=2, lam=1)``."""

    id: str
    params: Mapping = field(default_factory=dict)

    def __init__(self, id: str, params: Mapping | None = None, **kwargs):
        if id not in _RULES:
            raise ValueError(f"unknown bound id {id!r}; known: {', '.join(BOUND_IDS)}")
        merged = dict(params or {}, **kwargs)
        need = _RULES[id].params
        missing = [k for k in need if k not in merged]
        extra = [k for k in merged if k not in need]
        if missing or extra:
            raise ValueError(f"bound {id!r} takes parameters {need}; missing {missing}, unexpected {extra}")
        object.__setattr__(self, "id", id)
        object.__setattr__(self, "params", MappingProxyType({k: float(merged[k]) for k in need}))

    @property
    def is_conjecture(self) -> bool:
        return _RULES[self.id].conjecture

    @property
    def label(self) -> str:
        return f"CONJECTURE {self.id}" if self.is_conjecture else self.id

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"BoundSpec({self.id!r}, {args})"


def applicable(b: BoundSpec) -> tuple[bool, str]:
    """Check the stated parameter ranges; returns ``(ok, reason)``."""
    reasons = [r for r in _RULES[b.id].check(b.params) if r]
    return (not reasons, "; ".join(reasons) if reasons else "ok")


def evaluate(b: BoundSpec, force: bool = False) -> float:
    """Value of the bound's constant; raises :class:`InapplicableBoundError` unless ``force``."""
    if not force:
        ok, why = applicable(b)
        if not ok:
            raise InapplicableBoundError(f"{b.id}: {why}")
    return float(_RULES[b.id].formula(b.params))
