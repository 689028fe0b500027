"""Usual stochastic order and convex order on finite measures.

Both checks reduce to finitely many linear constraints:

* ``a <=st b`` iff ``F_a(x) >= F_b(x)`` for every point of the union support,
  since both CDFs are right-continuous step functions that only jump there;
* ``a <=cx b`` iff the means agree and ``stop_loss(a, t) <= stop_loss(b, t)``
  at every point of the union support.  Each stop-loss transform is
  piecewise linear with kinks only at support points, and with equal means
  the difference vanishes at both infinities, so the kinks are enough.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import DefectBudgetError
from .measures import EXACT, FiniteMeasure, Scalar, mean, scalar_to_json, to_scalar

__all__ = [
    "DEFAULT_TOL",
    "ConvexTestFunction",
    "OrderVerdict",
    "QuadrupleError",
    "check_cx",
    "check_st",
    "convex_battery",
    "four_point_check",
    "stop_loss",
]

DEFAULT_TOL = 1e-9

CDF = "cdf"
STOPLOSS = "stoploss"
MEAN = "mean"


@dataclass(frozen=True)
class OrderVerdict:
    """Outcome of an order check.

    ``margin`` is the smallest slack over all checked constraints (negative
    iff some constraint is violated); ``witness`` is where it occurs.
    """

    holds: bool
    margin: Scalar
    witness: Scalar | None
    constraint_kind: str
    tol: Scalar = 0

    def to_json(self) -> dict[str, Any]:
        return {
            "holds": self.holds,
            "margin": scalar_to_json(self.margin),
            "witness": None if self.witness is None else scalar_to_json(self.witness),
            "constraint": self.constraint_kind,
        }


def _resolve_tol(a: FiniteMeasure, b: FiniteMeasure, tol: Any) -> Scalar:
    exact = a.regime == EXACT and b.regime == EXACT
    if tol is None:
        return Fraction(0) if exact else DEFAULT_TOL
    tol = to_scalar(tol)
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    return tol if exact else float(tol)


def _pair(a: FiniteMeasure, b: FiniteMeasure):
    if a.regime == EXACT and b.regime == EXACT:
        return a, b
    return a.as_float(), b.as_float()


def _union_support(a: FiniteMeasure, b: FiniteMeasure) -> list[Scalar]:
    if a.regime == EXACT:
        return sorted(set(a.support) | set(b.support))
    return np.union1d(a.xs, b.xs).tolist()


def check_st(a: FiniteMeasure, b: FiniteMeasure, tol: Any = None) -> OrderVerdict:
    """Decide ``a <=st b``."""
    tol = _resolve_tol(a, b, tol)
    if a.mass_defect + b.mass_defect > tol:
        raise DefectBudgetError(
            f"combined mass defect {a.mass_defect + b.mass_defect:.3g} exceeds tol {tol}"
        )
    a, b = _pair(a, b)
    if a.regime == EXACT:
        points = _union_support(a, b)
        fa = _step_cdf(a, points)
        fb = _step_cdf(b, points)
        slack = [x - y for x, y in zip(fa, fb)]
        i = min(range(len(points)), key=slack.__getitem__)
        margin, witness = slack[i], points[i]
    else:
        points = np.union1d(a.xs, b.xs)
        fa = np.cumsum(a.ws)[np.searchsorted(a.xs, points, side="right") - 1]
        fa = np.where(points < a.xs[0], 0.0, fa)
        fb = np.cumsum(b.ws)[np.searchsorted(b.xs, points, side="right") - 1]
        fb = np.where(points < b.xs[0], 0.0, fb)
        slack = fa - fb
        i = int(np.argmin(slack))
        margin, witness = float(slack[i]), float(points[i])
    return OrderVerdict(margin >= -tol, margin, witness, CDF, tol)


def _step_cdf(m: FiniteMeasure, points: list[Fraction]) -> list[Fraction]:
    out = []
    acc = Fraction(0)
    j = 0
    for x in points:
        while j < len(m) and m.support[j] <= x:
            acc += m.weights[j]
            j += 1
        out.append(acc)
    return out


def stop_loss(a: FiniteMeasure, t: Any) -> Scalar:
    """``E max(0, X - t)`` for ``X ~ a``."""
    t = to_scalar(t)
    if a.regime == EXACT and isinstance(t, Fraction):
        return sum(((x - t) * w for x, w in a if x > t), Fraction(0))
    t = float(t)
    above = a.xs > t
    return math.fsum(((a.xs[above] - t) * a.ws[above]).tolist())


def _stop_loss_curve(m: FiniteMeasure, points):
    """Stop-loss transform of ``m`` at every point of a sorted list."""
    if m.regime == EXACT:
        # sweep right-to-left: SL(t) = sum_{x > t} (x - t) w = S1(t) - t * S0(t)
        out = [Fraction(0)] * len(points)
        s0 = s1 = Fraction(0)
        j = len(m) - 1
        for i in range(len(points) - 1, -1, -1):
            t = points[i]
            while j >= 0 and m.support[j] > t:
                s0 += m.weights[j]
                s1 += m.support[j] * m.weights[j]
                j -= 1
            out[i] = s1 - t * s0
        return out
    t = np.asarray(points, dtype=float)
    # suffix sums over atoms strictly above t
    idx = np.searchsorted(m.xs, t, side="right")
    s0 = np.concatenate((np.cumsum(m.ws[::-1])[::-1], [0.0]))
    s1 = np.concatenate((np.cumsum((m.xs * m.ws)[::-1])[::-1], [0.0]))
    return s1[idx] - t * s0[idx]


def check_cx(a: FiniteMeasure, b: FiniteMeasure, tol: Any = None) -> OrderVerdict:
    """Decide ``a <=cx b`` via equal means and stop-loss dominance at the kinks.

    The mean slack is ``-|mean(a) - mean(b)| / (1 + max |mean|)`` so that one
    tolerance serves every constraint.
    """
    tol = _resolve_tol(a, b, tol)
    for m in (a, b):
        if m.mass_defect and m.mass_defect * m.diameter > tol:
            raise DefectBudgetError(
                f"mass defect {m.mass_defect:.3g} times diameter {m.diameter} exceeds tol {tol}"
            )
    a, b = _pair(a, b)
    ma, mb = mean(a), mean(b)
    mean_slack = -abs(ma - mb) / (1 + max(abs(ma), abs(mb)))
    points = _union_support(a, b)
    sa = _stop_loss_curve(a, points)
    sb = _stop_loss_curve(b, points)
    if a.regime == EXACT:
        slack = [y - x for x, y in zip(sa, sb)]
        i = min(range(len(points)), key=slack.__getitem__)
        sl_margin, sl_witness = slack[i], points[i]
    else:
        slack = np.asarray(sb) - np.asarray(sa)
        i = int(np.argmin(slack))
        sl_margin, sl_witness = float(slack[i]), float(points[i])
        mean_slack = float(mean_slack)
    if mean_slack < sl_margin:
        margin, witness, kind = mean_slack, ma, MEAN
    else:
        margin, witness, kind = sl_margin, sl_witness, STOPLOSS
    return OrderVerdict(margin >= -tol, margin, witness, kind, tol)


# ----------------------------------------------------------------------
# convex test functions

STOP_LOSS = "stop_loss"
ABS_DEV = "abs_dev"
SQUARE = "square"
EXP_SCALED = "exp_scaled"


@dataclass(frozen=True)
class ConvexTestFunction:
    """One of ``max(0, x - t)``, ``|x - c|``, ``x**2`` or ``exp(s * x)``.

    Calls accept scalars (Fractions stay exact except for ``exp_scaled``)
    and numpy arrays.
    """

    kind: str
    param: Scalar | None = None

    def __post_init__(self) -> None:
        if self.kind not in (STOP_LOSS, ABS_DEV, SQUARE, EXP_SCALED):
            raise ValueError(f"unknown test function kind {self.kind!r}")
        if self.kind != SQUARE and self.param is None:
            raise ValueError(f"{self.kind} needs a parameter")

    def __call__(self, x):
        p = self.param
        if isinstance(x, np.ndarray):
            if self.kind == STOP_LOSS:
                return np.maximum(0.0, x - float(p))
            if self.kind == ABS_DEV:
                return np.abs(x - float(p))
            if self.kind == SQUARE:
                return x * x
            return np.exp(float(p) * x)
        if self.kind == SQUARE:
            return x * x
        if self.kind == EXP_SCALED:
            return math.exp(float(p) * float(x))
        if not (isinstance(x, Fraction) and isinstance(p, Fraction)):
            x, p = float(x), float(p)
        if self.kind == STOP_LOSS:
            return max(x - p, 0 * p)
        return abs(x - p)

    @property
    def name(self) -> str:
        return self.kind if self.param is None else f"{self.kind}({self.param})"

    def __str__(self) -> str:
        return self.name


def convex_battery(
    domain_lo: Any, domain_hi: Any, count: int, *, exp_scale: Any = 1
) -> list[ConvexTestFunction]:
    """Stop-loss kinks at ``count`` equispaced interior points plus three smooth probes.

    The probes are ``|x - midpoint|``, ``x**2`` and ``exp(exp_scale * x)``;
    pass ``exp_scale=None`` to leave out the exponential (it is never exact).
    """
    lo, hi = to_scalar(domain_lo), to_scalar(domain_hi)
    if not lo < hi:
        raise ValueError("domain_lo must be below domain_hi")
    if count < 1:
        raise ValueError("count must be at least 1")
    step = (hi - lo) / (count + 1)
    battery = [ConvexTestFunction(STOP_LOSS, lo + i * step) for i in range(1, count + 1)]
    battery.append(ConvexTestFunction(ABS_DEV, (lo + hi) / 2))
    battery.append(ConvexTestFunction(SQUARE))
    if exp_scale is not None:
        battery.append(ConvexTestFunction(EXP_SCALED, to_scalar(exp_scale)))
    return battery


class QuadrupleError(ValueError):
    """The quadruple does not satisfy a <= min(b, c), max(b, c) <= d, a + d = b + c."""


def four_point_check(
    phi: Callable[[Any], Any], a: Any, b: Any, c: Any, d: Any, tol: float = 0.0
) -> bool:
    """Whether ``phi(b) + phi(c) <= phi(a) + phi(d)`` (up to ``tol``).

    Admissible means ``a <= b, c <= d`` read as a chain: both middle points
    lie in ``[a, d]``.  Reading it as two separate inequalities admits
    ``(1, 2, 0, 1)``, where every convex ``phi`` kinked at 1 fails.  Every
    convex ``phi`` passes for admissible quadruples; a quadruple that is not
    admissible raises :class:`QuadrupleError`.
    """
    a, b, c, d = (to_scalar(v) for v in (a, b, c, d))
    exact = all(isinstance(v, Fraction) for v in (a, b, c, d))
    if not (a <= min(b, c) and max(b, c) <= d):
        raise QuadrupleError(f"need a <= b, c <= d, got {(a, b, c, d)}")
    sum_gap = (a + d) - (b + c)
    if (sum_gap != 0) if exact else abs(sum_gap) > 1e-12 * (1 + abs(a) + abs(d)):
        raise QuadrupleError(f"need a + d = b + c, got {(a, b, c, d)}")
    return phi(b) + phi(c) <= phi(a) + phi(d) + tol
