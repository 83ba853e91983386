"""
Numerical proof certificates
============================

The rate proofs rest on algebraic identities.  Each is checked here on random
samples; a failure would name the offending term.
"""
from splitlab import certificates as cert
from splitlab.operators import Huber, Quadratic

###############################################################################
# Multiplier identity behind the sublinear rate.
for N in (2, 5, 10):
    print(cert.check_thm31_identity(N, dim=3, trials=100, seed=0).summary())

###############################################################################
# Error-bound identity for strongly monotone + cocoercive pairs, with the sign
# conditions of its coefficients, on a 20 x 20 grid of (gamma, mu_f).
print(cert.check_prop44_grid(20, trials=50, seed=0).summary())
print(cert.prop44_constants(1.0, 1.0))

###############################################################################
# Base identity of the silver-schedule lemma and the smooth interpolation
# inequality.
print(cert.check_lemma51("base_identity", trials=200, seed=0).summary())
print(cert.check_interpolation(Quadratic([[1.0, 0.0], [0.0, 0.25]])).summary())
print(cert.check_interpolation(Huber(0.3)).summary())
