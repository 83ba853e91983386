"""
Tight sublinear rate of Douglas-Rachford splitting
==================================================

For two lines through the origin meeting at angle ``arcsin(1/sqrt(N))``, the
DR operator is a scaled rotation and the fixed-point residual after ``N``
steps equals ``(N-1)^(N-1) / N^N`` times the squared initial distance -- the
worst case allowed by the general bound.
"""
import numpy as np

from splitlab import harness
from splitlab.algorithms import drs_run
from splitlab.instances import two_subspace_feasibility
from splitlab.rates import BoundSpec, evaluate

###############################################################################
# One instance, one run: the residual hits the bound exactly at step N.
N = 6
inst = two_subspace_feasibility(N)
print("DR matrix for N = 6:\n", inst.dr_matrix(1.0, 1.0))
tr = drs_run(inst.A, inst.B, 1.0, 1.0, [1.0, 0.0], N)
print("residuals ||w^{k+1} - w^k||^2:", np.round(tr.residual_sq, 6))
print("bound at N:", evaluate(BoundSpec("km-sublinear-l1", N=N)))

###############################################################################
# The same through the harness, for a range of N.
for N in (2, 5, 10, 25, 50):
    rep = harness.verify_bound(two_subspace_feasibility(N), "drs", BoundSpec("km-sublinear-l1", N=N),
                               1.0, 1.0, N, [1.0, 0.0])
    print(rep.summary())

###############################################################################
# Where does y^N sit?  Its distance to the solution line equals
# sqrt((N-1)^N / N^(N+1)), not sqrt((N-1)^(N-1) / N^N).
for N in (2, 3, 8):
    ex = harness.two_subspace_extras(N)
    print(N, ex["dist_P_yN"], ex["candidate_a"], ex["candidate_b"])
