"""Verification toolkit for stochastic and convex orders of probability measures.

Exact rational arithmetic is used wherever the inputs allow it; truncated
and discretized laws carry explicit error bookkeeping instead.
"""

from .families import (
    ContinuousFamily,
    binomial,
    continuous,
    discretize,
    geometric,
    negative_binomial,
    poisson,
)
from .majorization import (
    ExponentTuple,
    enumerate_tuples,
    leq,
    satisfies_S,
    transfer_chain,
)
from .measures import (
    FiniteMeasure,
    convolve,
    convolve_power,
    dirac,
    expectation,
    mean,
    mixture,
    pushforward_affine,
)
from .muirhead import (
    DistributionPolynomial,
    arrangement,
    eval_operator,
    eval_poly,
    rasa_gap,
    rasa_gap_m,
    symmetrize,
    verify_muirhead,
)
from .orders import (
    ConvexTestFunction,
    OrderVerdict,
    check_cx,
    check_st,
    convex_battery,
    four_point_check,
    stop_loss,
)

__version__ = "0.1.0"
