"""
Gradient descent with silver stepsizes
======================================

The silver schedule (sqrt2, 2, sqrt2, 2 + sqrt2, ...) of length ``2^k - 1``
reaches a gap of at most ``L ||x0 - x*||^2 / (4 rho^k - 2)`` with
``rho = 1 + sqrt2``.  A one-dimensional Huber function nearly attains it.
"""
import numpy as np

from splitlab import certificates as cert
from splitlab import harness
from splitlab.algorithms import SILVER_RATIO, silver_schedule
from splitlab.instances import make_instance
from splitlab.rates import BoundSpec

for k in (1, 2, 3):
    print(k, np.round(silver_schedule(k).as_array(), 4))

###############################################################################
# Bound check on a quadratic and on a Huber function.
for inst in (make_instance("rand-quad", dim=3, L=1.0, g_kind="zero", seed=2),
             make_instance("huber", delta=0.1)):
    for k in (1, 2, 3, 4):
        x0 = inst.known_solution + 1.0
        print(harness.verify_bound(inst, "gd", BoundSpec("silver-gd", k=k, L=1.0), x0=x0).summary())

###############################################################################
# Tightness: sweep the Huber threshold; the best one is 1/(2 rho^k - 1).
for k in (1, 2, 3):
    rep = harness.huber_tightness_sweep(k)
    print(f"k={k}: best ratio {rep.best_ratio:.8f} at delta={rep.best['delta']:.5f} "
          f"(1/(2 rho^k - 1) = {1 / (2 * SILVER_RATIO**k - 1):.5f})")

###############################################################################
# The inequality behind the bound, evaluated along a trajectory.
print(cert.check_lemma51("trajectory", k=3, F=make_instance("huber", delta=0.2).f, x0=[1.0]).summary())
