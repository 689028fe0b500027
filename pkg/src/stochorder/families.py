"""Named distribution families.

Discrete families come back as (possibly truncated) :class:`FiniteMeasure`
values; gamma, beta and normal laws are :class:`ContinuousFamily`
descriptors that can be discretized onto a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
from scipy import integrate, special, stats

from .measures import (
    EXACT,
    FLOAT,
    FiniteMeasure,
    Scalar,
    dirac,
    to_scalar,
)

__all__ = [
    "ContinuousFamily",
    "DEFAULT_TAIL_EPS",
    "binomial",
    "continuous",
    "discretize",
    "geometric",
    "negative_binomial",
    "poisson",
]

DEFAULT_TAIL_EPS = 1e-12
# discretize refuses grids that leave out more than this much probability
DEFAULT_MAX_TAIL = 1e-9


def binomial(n: int, x: Any) -> FiniteMeasure:
    """B(n, x): weight ``C(n, k) x^k (1 - x)^(n - k)`` at each ``k``.

    Rational ``x`` gives an exact-regime measure built by Pascal's recursion.
    """
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a non-negative integer, got {n!r}")
    n = int(n)
    x = to_scalar(x)
    if not 0 <= x <= 1:
        raise ValueError(f"binomial parameter {x} outside [0, 1]")
    if isinstance(x, Fraction):
        # row k of Pascal's triangle in x: B(k+1, x) = B(k, x) * B(1, x)
        row = [Fraction(1)]
        for _ in range(n):
            nxt = [Fraction(0)] * (len(row) + 1)
            for k, w in enumerate(row):
                nxt[k] += w * (1 - x)
                nxt[k + 1] += w * x
            row = nxt
        pts = [(Fraction(k), w) for k, w in enumerate(row) if w]
        return FiniteMeasure(
            tuple(k for k, _ in pts), tuple(w for _, w in pts), EXACT, Fraction(0)
        )
    ks = np.arange(n + 1)
    ws = stats.binom.pmf(ks, n, x)
    return FiniteMeasure._from_float_arrays(ks.astype(float), ws, 0.0)


def _truncated(log_pmf, sf, tail_eps: float, start_hint: int) -> FiniteMeasure:
    """Keep ``0..K`` with ``K`` minimal such that the omitted tail is < tail_eps."""
    k = max(int(start_hint), 0)
    while sf(k) >= tail_eps:
        k += max(1, k // 8)
    # step back to the minimal K
    lo, hi = -1, k
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if sf(mid) >= tail_eps:
            lo = mid
        else:
            hi = mid
    ks = np.arange(hi + 1)
    ws = np.exp(log_pmf(ks))
    defect = max(0.0, 1.0 - math.fsum(ws.tolist()))
    return FiniteMeasure._from_float_arrays(ks.astype(float), ws, defect)


def _check_tail_eps(tail_eps: float) -> float:
    tail_eps = float(tail_eps)
    if not 0 < tail_eps < 1:
        raise ValueError(f"tail_eps must lie in (0, 1), got {tail_eps}")
    return tail_eps


def poisson(lam: Any, tail_eps: float = DEFAULT_TAIL_EPS) -> FiniteMeasure:
    """Poiss(lam) truncated so the omitted tail is below ``tail_eps``."""
    lam = to_scalar(lam)
    if lam < 0:
        raise ValueError(f"Poisson parameter must be >= 0, got {lam}")
    tail_eps = _check_tail_eps(tail_eps)
    if lam == 0:
        return dirac(0.0)
    lam = float(lam)
    return _truncated(
        lambda ks: -lam + ks * math.log(lam) - special.gammaln(ks + 1),
        lambda k: stats.poisson.sf(k, lam),
        tail_eps,
        lam,
    )


def negative_binomial(
    r: Any, p: Any, tail_eps: float = DEFAULT_TAIL_EPS
) -> FiniteMeasure:
    """NB(r, p) with weight ``Gamma(k+r) / (Gamma(r) k!) p^k (1-p)^r`` at ``k``.

    The mean is ``r p / (1 - p)``.  scipy's ``nbinom`` is parametrized by
    ``1 - p`` instead.
    """
    r, p = to_scalar(r), to_scalar(p)
    if r < 0:
        raise ValueError(f"negative binomial r must be >= 0, got {r}")
    if not 0 <= p < 1:
        raise ValueError(f"negative binomial p must lie in [0, 1), got {p}")
    tail_eps = _check_tail_eps(tail_eps)
    if r == 0 or p == 0:
        return dirac(0.0)
    r, p = float(r), float(p)
    log_q = math.log1p(-p)
    return _truncated(
        lambda ks: (
            special.gammaln(ks + r)
            - special.gammaln(r)
            - special.gammaln(ks + 1)
            + ks * math.log(p)
            + r * log_q
        ),
        lambda k: stats.nbinom.sf(k, r, 1.0 - p),
        tail_eps,
        r * p / (1.0 - p),
    )


def geometric(p: Any, tail_eps: float = DEFAULT_TAIL_EPS) -> FiniteMeasure:
    """Geom(p) = NB(1, 1 - p): weight ``(1 - p)^k p`` at ``k``."""
    p = to_scalar(p)
    if not 0 < p <= 1:
        raise ValueError(f"geometric p must lie in (0, 1], got {p}")
    return negative_binomial(1, 1 - p, tail_eps)


# ----------------------------------------------------------------------
# continuous laws

GAMMA = "gamma"
BETA = "beta"
NORMAL = "normal"


@dataclass(frozen=True)
class ContinuousFamily:
    """Gamma (shape, rate), beta (shape, shape) or normal (mean, variance) law.

    Degenerate parameter values follow the point-mass conventions:
    gamma and beta with zero first shape are the point mass at 0, beta with
    zero second shape the point mass at 1.
    """

    kind: str
    a: float
    b: float
    _law: Any = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        a, b = float(self.a), float(self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if self.kind == GAMMA:
            if a < 0 or b <= 0:
                raise ValueError(f"gamma needs shape >= 0 and rate > 0, got {a}, {b}")
            law = stats.gamma(a, scale=1.0 / b) if a > 0 else None
        elif self.kind == BETA:
            if a < 0 or b < 0 or a + b <= 0:
                raise ValueError(f"beta needs shapes >= 0 with a positive sum, got {a}, {b}")
            law = stats.beta(a, b) if a > 0 and b > 0 else None
        elif self.kind == NORMAL:
            if b <= 0:
                raise ValueError(f"normal variance must be > 0, got {b}")
            law = stats.norm(a, math.sqrt(b))
        else:
            raise ValueError(f"unknown continuous family {self.kind!r}")
        object.__setattr__(self, "_law", law)
        if law is not None:
            total = self._density_mass()
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"{self} density integrates to {total!r}")

    @property
    def atom(self) -> float | None:
        """Location of the point mass for degenerate parameters, else None."""
        if self._law is not None:
            return None
        return 1.0 if self.kind == BETA and self.b == 0 else 0.0

    def _density_mass(self) -> float:
        lo, hi = self.support_bounds()
        if self.kind == NORMAL:
            m, s = self.a, math.sqrt(self.b)
            pieces = [(-math.inf, m - s), (m - s, m + s), (m + s, math.inf)]
        elif self.kind == GAMMA:
            mode = max((self.a - 1) / self.b, 0.0)
            cut = mode + 1.0 / self.b
            pieces = [(0.0, cut), (cut, math.inf)]
        else:
            pieces = [(0.0, 0.5), (0.5, 1.0)]
        total = 0.0
        for lo, hi in pieces:
            val, _ = integrate.quad(
                self.density, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200
            )
            total += val
        return total

    def support_bounds(self) -> tuple[float, float]:
        if self.kind == NORMAL:
            return -math.inf, math.inf
        if self.kind == GAMMA:
            return 0.0, math.inf
        return 0.0, 1.0

    def density(self, x):
        if self._law is None:
            raise ValueError(f"{self} is a point mass and has no density")
        return self._law.pdf(x)

    def cdf(self, x):
        if self._law is None:
            out = np.where(np.asarray(x, dtype=float) >= self.atom, 1.0, 0.0)
            return out if np.ndim(x) else float(out)
        return self._law.cdf(x)

    def sf(self, x):
        if self._law is None:
            return 1.0 - self.cdf(x)
        return self._law.sf(x)

    def ppf(self, q):
        if self._law is None:
            return self.atom
        return self._law.ppf(q)

    def mean(self) -> float:
        if self._law is None:
            return self.atom
        if self.kind == GAMMA:
            return self.a / self.b
        if self.kind == BETA:
            return self.a / (self.a + self.b)
        return self.a

    def variance(self) -> float:
        if self._law is None:
            return 0.0
        return float(self._law.var())

    def stop_loss(self, t: float) -> float:
        """``E max(0, X - t)`` from closed forms."""
        t = float(t)
        if self._law is None:
            return max(0.0, self.atom - t)
        a, b = self.a, self.b
        if self.kind == NORMAL:
            s = math.sqrt(b)
            z = (t - a) / s
            return s * stats.norm.pdf(z) + (a - t) * stats.norm.sf(z)
        if self.kind == GAMMA:
            if t <= 0:
                return a / b - t
            # E[X; X > t] = (a/b) Q(a+1, bt)
            return (a / b) * special.gammaincc(a + 1, b * t) - t * special.gammaincc(a, b * t)
        if t <= 0:
            return a / (a + b) - t
        if t >= 1:
            return 0.0
        # E[X; X > t] = a/(a+b) (1 - I_t(a+1, b))
        upper_1 = special.betainc(b, a + 1, 1 - t)
        upper_0 = special.betainc(b, a, 1 - t)
        return a / (a + b) * upper_1 - t * upper_0

    def __str__(self) -> str:
        return f"{self.kind}({self.a:g}, {self.b:g})"


def continuous(kind: str, a: Any, b: Any) -> ContinuousFamily:
    """Construct a gamma(shape, rate), beta(a, b) or normal(mean, variance) law."""
    return ContinuousFamily(kind, float(to_scalar(a)), float(to_scalar(b)))


def discretize(
    f: ContinuousFamily,
    grid_n: int,
    lo: Any,
    hi: Any,
    *,
    max_tail: float = DEFAULT_MAX_TAIL,
) -> FiniteMeasure:
    """Put the mass of each of ``grid_n`` equal cells of [lo, hi] at its midpoint.

    The mass outside [lo, hi] becomes ``mass_defect``; ValueError if it
    exceeds ``max_tail``.
    """
    lo, hi = float(to_scalar(lo)), float(to_scalar(hi))
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    if f.atom is not None:
        if not lo <= f.atom <= hi:
            raise ValueError(f"grid [{lo}, {hi}] excludes the atom of {f}")
        return dirac(float(f.atom))
    edges = np.linspace(lo, hi, grid_n + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    # split at the median so both halves difference well-conditioned values
    cdf = f.cdf(edges)
    sf = f.sf(edges)
    use_sf = edges > f.ppf(0.5)
    ws = np.where(use_sf[1:], sf[:-1] - sf[1:], cdf[1:] - cdf[:-1])
    ws = np.clip(ws, 0.0, None)
    defect = float(cdf[0] + sf[-1])
    if defect > max_tail:
        raise ValueError(
            f"grid [{lo}, {hi}] leaves out mass {defect:.3g} of {f} (> {max_tail:g})"
        )
    return FiniteMeasure._from_float_arrays(mids, ws, defect, 0.0)
