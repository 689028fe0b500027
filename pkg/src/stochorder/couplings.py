"""Monotone couplings witnessing the usual stochastic order.

Each sampler draws pairs ``(x, y)`` with ``x <= y`` guaranteed by the
construction itself, never by rejection, and with marginals equal to the
two ordered laws.  :func:`audit` checks both properties by simulation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, NamedTuple

import numpy as np
from scipy import stats

from . import families
from .errors import HypothesisError

__all__ = [
    "CoupledPair",
    "CouplingAuditReport",
    "CouplingSampler",
    "audit",
    "couple_beta",
    "couple_gamma",
    "couple_negative_binomial",
    "couple_normal",
    "couple_poisson",
    "ks_threshold",
    "make_sampler",
]

KINDS = ("poisson", "negative_binomial", "gamma", "beta", "normal")
# parameter names per kind, in CLI order
PARAMS = {
    "poisson": ("l1", "l2"),
    "negative_binomial": ("r1", "p1", "r2", "p2"),
    "gamma": ("a1", "b1", "a2", "b2"),
    "beta": ("a1", "b1", "a2", "b2"),
    "normal": ("m1", "m2", "var"),
}


class CoupledPair(NamedTuple):
    x: float
    y: float


def _gamma(rng: np.random.Generator, shape: float, size: int) -> np.ndarray:
    # Gamma(0, .) is the point mass at 0
    if shape == 0:
        return np.zeros(size)
    return rng.gamma(shape, 1.0, size)


def _nb(rng: np.random.Generator, r: float, p: float, size: int) -> np.ndarray:
    """NB(r, p) as a Poisson count at the gamma-distributed time p/(1-p) * T."""
    if r == 0 or p == 0:
        return np.zeros(size)
    return rng.poisson(p / (1 - p) * _gamma(rng, r, size)).astype(float)


@dataclass(frozen=True)
class CouplingSampler:
    """A monotone coupling of two ordered laws from one family."""

    kind: str
    params: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown coupling kind {self.kind!r}")
        if len(self.params) != len(PARAMS[self.kind]):
            raise ValueError(
                f"{self.kind} takes parameters {PARAMS[self.kind]}, got {self.params}"
            )
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        self._check()

    def _check(self) -> None:
        k, v = self.kind, self.params
        if k == "poisson":
            ok = 0 <= v[0] <= v[1]
        elif k == "negative_binomial":
            r1, p1, r2, p2 = v
            ok = 0 <= r1 <= r2 and 0 <= p1 <= p2 < 1
        elif k == "gamma":
            a1, b1, a2, b2 = v
            ok = 0 <= a1 <= a2 and b1 >= b2 > 0
        elif k == "beta":
            a1, b1, a2, b2 = v
            ok = min(v) >= 0 and a1 <= a2 and b1 >= b2 and a1 + b1 > 0 and a2 + b2 > 0
        else:
            ok = v[0] <= v[1] and v[2] > 0
        if not ok:
            names = ", ".join(f"{n}={x:g}" for n, x in zip(PARAMS[k], v))
            raise HypothesisError(f"{k} coupling needs ordered parameters, got {names}")

    def draw(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """``n`` coupled pairs as two arrays."""
        k, v = self.kind, self.params
        if k == "poisson":
            l1, l2 = v
            x = rng.poisson(l1, n).astype(float)
            z = rng.poisson(l2 - l1, n)
            return x, x + z
        if k == "negative_binomial":
            r1, p1, r2, p2 = v
            t = _gamma(rng, r1, n)
            theta1, theta2 = p1 / (1 - p1), p2 / (1 - p2)
            # the Poisson process at time theta1*T, then its independent increment to theta2*T
            x = rng.poisson(theta1 * t).astype(float)
            inc = rng.poisson((theta2 - theta1) * t)
            z = _nb(rng, r2 - r1, p2, n)
            return x, x + inc + z
        if k == "gamma":
            a1, b1, a2, b2 = v
            x = _gamma(rng, a1, n) / b1
            z = _gamma(rng, a2 - a1, n) / b1
            return x, (b1 / b2) * (x + z)
        if k == "beta":
            a1, b1, a2, b2 = v
            u = _gamma(rng, a1, n)
            vv = _gamma(rng, a2 - a1, n)
            w = _gamma(rng, b2, n)
            z = _gamma(rng, b1 - b2, n)
            return u / (u + w + z), (u + vv) / (u + vv + w)
        m1, m2, var = v
        x = rng.normal(m1, math.sqrt(var), n)
        return x, x + (m2 - m1)

    def marginals(self) -> tuple[Any, Any]:
        """The two target laws, as truncated measures or continuous families."""
        k, v = self.kind, self.params
        if k == "poisson":
            return families.poisson(v[0], 1e-15), families.poisson(v[1], 1e-15)
        if k == "negative_binomial":
            return (
                families.negative_binomial(v[0], v[1], 1e-15),
                families.negative_binomial(v[2], v[3], 1e-15),
            )
        if k == "gamma":
            return families.continuous("gamma", v[0], v[1]), families.continuous("gamma", v[2], v[3])
        if k == "beta":
            return families.continuous("beta", v[0], v[1]), families.continuous("beta", v[2], v[3])
        return (
            families.continuous("normal", v[0], v[2]),
            families.continuous("normal", v[1], v[2]),
        )


def make_sampler(kind: str, *params: Any) -> CouplingSampler:
    return CouplingSampler(kind, tuple(float(p) for p in params))


def _single(kind: str, params: tuple, rng: np.random.Generator) -> CoupledPair:
    x, y = CouplingSampler(kind, params).draw(1, rng)
    return CoupledPair(float(x[0]), float(y[0]))


def couple_poisson(l1, l2, rng: np.random.Generator) -> CoupledPair:
    """``x ~ Poiss(l1)``, ``y = x + Poiss(l2 - l1)``."""
    return _single("poisson", (l1, l2), rng)


def couple_negative_binomial(r1, p1, r2, p2, rng: np.random.Generator) -> CoupledPair:
    """Poisson process read at ``theta1 * T`` and ``theta2 * T``, plus an independent NB(r2 - r1, p2)."""
    return _single("negative_binomial", (r1, p1, r2, p2), rng)


def couple_gamma(a1, b1, a2, b2, rng: np.random.Generator) -> CoupledPair:
    """``y = (b1 / b2) * (x + z)`` with ``z ~ Gamma(a2 - a1, b1)``."""
    return _single("gamma", (a1, b1, a2, b2), rng)


def couple_beta(a1, b1, a2, b2, rng: np.random.Generator) -> CoupledPair:
    """Gamma-ratio construction ``x = U/(U+W+Z)``, ``y = (U+V)/(U+V+W)``."""
    return _single("beta", (a1, b1, a2, b2), rng)


def couple_normal(m1, m2, var, rng: np.random.Generator) -> CoupledPair:
    """Shift coupling ``y = x + (m2 - m1)``."""
    return _single("normal", (m1, m2, var), rng)


# ----------------------------------------------------------------------
# audits


@dataclass(frozen=True)
class CouplingAuditReport:
    kind: str
    params: tuple[float, ...]
    samples: int
    dominance_violations: int
    ks_distance_x: float
    ks_distance_y: float
    seed: int

    def to_json(self) -> dict[str, Any]:
        out = asdict(self)
        out["params"] = list(self.params)
        return out


def _ks_lattice(sample: np.ndarray, law) -> float:
    """KS distance to a law on the non-negative integers.

    Both CDFs are step functions jumping only at integers, so comparing them
    at ``0..max(sample)`` covers the supremum.
    """
    top = int(sample.max())
    grid = np.arange(top + 1)
    counts = np.bincount(sample.astype(np.int64), minlength=top + 1)
    emp = np.cumsum(counts) / sample.size
    cdf = np.cumsum(np.array([law.weight(k) for k in range(top + 1)], dtype=float))
    return float(np.max(np.abs(emp - cdf[grid])))


def _ks(sample: np.ndarray, law) -> float:
    if isinstance(law, families.ContinuousFamily):
        if law.atom is not None:
            return float(np.mean(sample != law.atom))
        return float(stats.kstest(sample, law.cdf).statistic)
    return _ks_lattice(sample, law)


def audit(sampler: CouplingSampler, n: int, seed: int = 0) -> CouplingAuditReport:
    """Draw ``n`` pairs and report dominance violations and marginal KS distances."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    x, y = sampler.draw(n, rng)
    law_x, law_y = sampler.marginals()
    return CouplingAuditReport(
        kind=sampler.kind,
        params=sampler.params,
        samples=n,
        dominance_violations=int(np.count_nonzero(x > y)),
        ks_distance_x=_ks(x, law_x),
        ks_distance_y=_ks(y, law_y),
        seed=seed,
    )


def ks_threshold(n: int, safety: float = 2.0) -> float:
    """A KS acceptance bound ``1.95 / sqrt(n) * (1 + safety)``."""
    return 1.95 / math.sqrt(n) * (1 + safety)
