"""
Linear convergence under an error bound
=======================================

If ``dist(w, Fix T) <= mu ||(I - T) w||`` then relaxed DR contracts at rate
``sqrt(1 - (2/lam - 1)/mu^2)``.  On the two-line instance ``mu`` can be read
off the spectrum and the rate is attained exactly.
"""
import numpy as np

from splitlab import harness
from splitlab.algorithms import drs_run
from splitlab.instances import strongly_monotone_linear, two_subspace_feasibility
from splitlab.rates import BoundSpec, evaluate

###############################################################################
# Spectral error-bound constant and the observed per-step contraction.
inst = two_subspace_feasibility(9)
for lam in (0.5, 1.0, 1.5):
    mu = harness.estimate_error_bound_mu(inst, 1.0, lam)
    tr = drs_run(inst.A, inst.B, 1.0, lam, [1.0, 0.0], 30)
    rate = harness.observed_rate(inst, tr)
    print(f"lam={lam}: mu={mu:.6f}  observed={rate:.12f}  bound={evaluate(BoundSpec('linear-eb', mu=mu, lam=lam)):.12f}")

###############################################################################
# The constant scales like 1/lam: using the lam = 1 value (sqrt(N) = 3) at
# lam = 0.5 would give a bound that the iteration exceeds.
print("bound with mu=3 at lam=0.5:", evaluate(BoundSpec("linear-eb", mu=3.0, lam=0.5)))

###############################################################################
# Strongly monotone + cocoercive pair: the closed-form constant is an error bound.
inst = strongly_monotone_linear(4, 0.5, 1.0, seed=1)
gamma, lam = 0.7, 1.2
mu = evaluate(BoundSpec("rsm-eb", gamma=gamma, beta=1.0, mu_f=0.5, lam=lam))
T = inst.dr_matrix(gamma, lam)
W = np.random.default_rng(0).normal(size=(10_000, 4))
ratio = np.linalg.norm(W, axis=1) / (mu * np.linalg.norm(W @ (np.eye(4) - T).T, axis=1))
print(f"mu = {mu:.4f}; worst dist / (mu * residual) over 10^4 samples: {ratio.max():.4f}")

###############################################################################
# Conversely, a linear rate r gives the error bound with mu = 1/(1 - r).
tr = drs_run(inst.A, inst.B, gamma, lam, W[0], 40)
r = harness.observed_rate(inst, tr, gamma)
print(harness.check_eb_necessity(tr, r, inst, gamma).summary())
