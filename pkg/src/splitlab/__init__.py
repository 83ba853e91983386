"""Douglas-Rachford splitting: exact-rate instances, bound checks and proof certificates.

Modules
-------
operators
    Function and operator oracles (prox, resolvents, the DR operator).
algorithms
    DRS, accelerated DRS, Krasnoselskii-Mann and gradient-descent runners.
rates
    Closed-form bounds, their parameter ranges, and the conjectured rates.
instances
    Worst-case instances and seeded random families with known solutions.
certificates
    Numerical checks of the multiplier identities behind the rate proofs.
harness
    Bound verification, error-bound estimation, conjecture search, CSV output.
"""

from . import algorithms, certificates, harness, instances, operators, rates
from .algorithms import (
    SILVER_RATIO,
    accelerated_drs_run,
    drs_composite_run,
    drs_run,
    gd_run,
    km_run,
    silver_schedule,
)
from .harness import (
    BoundCheckReport,
    SearchReport,
    conjecture_search,
    estimate_error_bound_mu,
    verify_bound,
)
from .instances import make_instance
from .rates import BoundSpec, applicable, evaluate

__version__ = "0.1.0"

__all__ = [
    "algorithms", "certificates", "harness", "instances", "operators", "rates",
    "SILVER_RATIO", "silver_schedule", "drs_run", "drs_composite_run", "accelerated_drs_run",
    "km_run", "gd_run", "BoundSpec", "evaluate", "applicable", "make_instance",
    "verify_bound", "estimate_error_bound_mu", "conjecture_search", "BoundCheckReport",
    "SearchReport",
]
