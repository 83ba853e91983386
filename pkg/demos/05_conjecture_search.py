"""
Searching for counterexamples to conjectured rates
==================================================

Four conjectured rates are tested by randomised search.  Three survive 1000
trials; the cocoercive one does not once the relaxation exceeds sqrt2.
"""
import numpy as np

from splitlab import harness, operators as ops
from splitlab.algorithms import drs_run
from splitlab.rates import BoundSpec, evaluate

for target in ("conj-composite", "conj-silver-drs", "conj-accel", "conj-cocoercive"):
    rep = harness.conjecture_search(target, 1000, seed=0, dim=5)
    print(rep.summary())

###############################################################################
# The violation reproduces from its (target, seed, trial) triple.
rep = harness.conjecture_search("conj-cocoercive", 1000, seed=0, dim=5)
v = rep.violations[0]
print(harness.reproduce_trial("conj-cocoercive", 0, v["trial"], 5).summary())

###############################################################################
# A closed-form counterexample: B = 0 is cocoercive for every beta and A is the
# normal cone of {0}, so the DR operator is (1 - lam) I.  After two steps the
# residual is lam^2 (lam - 1)^2 ||w1||^2, above the conjectured
# lam^2 / (lam + 1)^2 ||w1||^2 exactly when lam > sqrt2.
A = ops.Subdifferential(ops.IndicatorOfBox(0.0, 0.0))
B = ops.ZeroOperator(beta_cocoercive=1.0)
for lam in (1.2, np.sqrt(2), 1.6, 1.9):
    tr = drs_run(A, B, 0.5, lam, [1.0], 2)
    bound = evaluate(BoundSpec("conj-cocoercive", N=2, lam=lam, beta=1.0, gamma=0.5), force=True)
    print(f"lam={lam:.4f}: residual {tr.residual_sq[1]:.6f} vs conjectured {bound:.6f}")
