"""Convolution polynomials of measures and the Muirhead-type convex order.

For measures ``mu_1..mu_k`` and an exponent tuple ``p``, the arrangement
``mu_pi^(p)`` convolves ``mu_{pi(l)}`` with itself ``p_l`` times for every
``l``; the symmetrization ``mu^(p)`` is the uniform mixture over all ``k!``
arrangements.  :func:`verify_muirhead` checks ``mu^(p) <=cx mu^(q)`` for
``p`` majorized by ``q``, both directly and along a transfer chain.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any

from scipy import integrate

from . import families
from .errors import HypothesisError
from .majorization import ExponentTuple, leq, transfer_chain
from .measures import (
    EXACT,
    FLOAT,
    FiniteMeasure,
    Scalar,
    convolve,
    convolve_power,
    dirac,
    expectation,
    mixture,
    pushforward_affine,
    scalar_from_json,
    scalar_to_json,
    to_scalar,
)
from .orders import ConvexTestFunction, OrderVerdict, check_cx, check_st

__all__ = [
    "DistributionPolynomial",
    "GapReport",
    "MuirheadReport",
    "arrangement",
    "continuous_rasa_gap",
    "eval_operator",
    "eval_poly",
    "rasa_gap",
    "rasa_gap_m",
    "symmetrize",
    "verify_muirhead",
]


def _check_lengths(measures: Sequence[FiniteMeasure], p: Sequence[int]) -> ExponentTuple:
    p = p if isinstance(p, ExponentTuple) else ExponentTuple(p)
    if len(measures) != len(p):
        raise ValueError(f"{len(measures)} measures but exponent tuple {p} has length {len(p)}")
    return p


def _zero_like(measures: Sequence[FiniteMeasure]) -> FiniteMeasure:
    return dirac(0.0) if any(m.regime == FLOAT for m in measures) else dirac(0)


def arrangement(
    measures: Sequence[FiniteMeasure], p: Sequence[int], pi: Sequence[int]
) -> FiniteMeasure:
    """``mu_{pi[0]}^{*p_1} * ... * mu_{pi[k-1]}^{*p_k}`` with 0-based ``pi``."""
    p = _check_lengths(measures, p)
    if sorted(pi) != list(range(len(p))):
        raise ValueError(f"{pi} is not a permutation of 0..{len(p) - 1}")
    out = _zero_like(measures)
    for exp, idx in zip(p, pi):
        if exp:
            out = convolve(out, convolve_power(measures[idx], exp))
    return out


def _multiset_permutations(items: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Distinct orderings of a multiset, each once."""
    counts: dict[int, int] = {}
    for it in items:
        counts[it] = counts.get(it, 0) + 1
    keys = sorted(counts, reverse=True)
    n = len(items)

    def rec(prefix: list[int]) -> Iterator[tuple[int, ...]]:
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for key in keys:
            if counts[key]:
                counts[key] -= 1
                prefix.append(key)
                yield from rec(prefix)
                prefix.pop()
                counts[key] += 1

    return rec([])


def symmetrize(measures: Sequence[FiniteMeasure], p: Sequence[int]) -> FiniteMeasure:
    """Uniform mixture of all ``k!`` arrangements of ``p`` over ``measures``.

    Permutations that hand the same exponent to the same measure give the
    same arrangement, so only the distinct exponent assignments are built;
    each stands for ``prod(multiplicity!)`` permutations, which makes the
    mixture uniform over the distinct assignments.
    """
    p = _check_lengths(measures, p)
    powers: dict[tuple[int, int], FiniteMeasure] = {}

    def power(i: int, e: int) -> FiniteMeasure:
        if (i, e) not in powers:
            powers[i, e] = convolve_power(measures[i], e)
        return powers[i, e]

    parts = []
    for assignment in _multiset_permutations(list(p)):
        out = _zero_like(measures)
        for i, e in enumerate(assignment):
            if e:
                out = convolve(out, power(i, e))
        parts.append(out)
    regime = FLOAT if any(m.regime == FLOAT for m in parts) else EXACT
    c = Fraction(1, len(parts)) if regime == EXACT else 1.0 / len(parts)
    return mixture([c] * len(parts), parts)


@dataclass
class MuirheadReport:
    """Endpoint verdict for ``mu^(p) <=cx mu^(q)`` plus per-step chain diagnostics."""

    p: ExponentTuple
    q: ExponentTuple
    verdict: OrderVerdict
    chain: list[ExponentTuple]
    step_verdicts: list[OrderVerdict]
    comparable: bool
    incomparable_pairs: list[tuple[int, int]] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.verdict.holds

    @property
    def consistent(self) -> bool:
        """Whether the step verdicts agree with the endpoint verdict.

        Steps that all hold force the endpoint to hold (cx is transitive).
        Under the comparability hypothesis every step must hold as well, so
        any disagreement then points at numerical trouble.
        """
        steps_hold = all(v.holds for v in self.step_verdicts)
        if steps_hold and not self.verdict.holds:
            return False
        if self.comparable and not steps_hold:
            return False
        return True

    def to_json(self) -> dict[str, Any]:
        return {
            "p": list(self.p),
            "q": list(self.q),
            "comparable": self.comparable,
            "incomparable_pairs": [list(pair) for pair in self.incomparable_pairs],
            "chain": [list(t) for t in self.chain],
            "steps": [
                {"from": list(a), "to": list(b), **v.to_json()}
                for a, b, v in zip(self.chain, self.chain[1:], self.step_verdicts)
            ],
            "endpoint": self.verdict.to_json(),
            "consistent": self.consistent,
        }


def verify_muirhead(
    measures: Sequence[FiniteMeasure],
    p: Sequence[int],
    q: Sequence[int],
    tol: Any = None,
    *,
    unconditional: bool = False,
) -> MuirheadReport:
    """Check ``mu^(p) <=cx mu^(q)`` for pairwise st-comparable measures.

    Raises :class:`HypothesisError` when some pair of measures is not
    st-comparable, unless ``unconditional`` is set.
    """
    p = _check_lengths(measures, p)
    q = _check_lengths(measures, q)
    if not leq(p, q):
        raise ValueError(f"{p} is not majorized by {q}")
    bad = []
    for i, j in combinations(range(len(measures)), 2):
        a, b = measures[i], measures[j]
        if not (check_st(a, b, tol).holds or check_st(b, a, tol).holds):
            bad.append((i, j))
    if bad and not unconditional:
        raise HypothesisError(
            "measures not pairwise comparable in the usual stochastic order: "
            + ", ".join(f"({i}, {j})" for i, j in bad)
        )
    chain = transfer_chain(p, q)
    sym = {t: symmetrize(measures, t) for t in chain}
    steps = [check_cx(sym[a], sym[b], tol) for a, b in zip(chain, chain[1:])]
    verdict = check_cx(sym[p], sym[q], tol)
    return MuirheadReport(p, q, verdict, chain, steps, not bad, bad)


# ----------------------------------------------------------------------
# gap functionals


@dataclass(frozen=True)
class GapReport:
    """One evaluated gap: family, parameter point, test function, scale, value."""

    family: str
    params: str
    phi: ConvexTestFunction
    scale: Scalar
    gap: Scalar
    regime: str

    CSV_COLUMNS = ("family", "params", "phi_kind", "phi_param", "scale", "gap", "regime")

    def csv_row(self) -> list[str]:
        param = "" if self.phi.param is None else str(self.phi.param)
        return [
            self.family,
            self.params,
            self.phi.kind,
            param,
            str(self.scale),
            _fmt(self.gap),
            self.regime,
        ]


def _fmt(value: Scalar) -> str:
    return str(value) if isinstance(value, Fraction) else repr(float(value))


def rasa_gap(
    a: FiniteMeasure, b: FiniteMeasure, phi: Callable[[Any], Any], scale: Any
) -> Scalar:
    """``E phi(S(a*a)) + E phi(S(b*b)) - 2 E phi(S(a*b))`` with ``S(x) = scale * x``.

    With ``a = B(n, x)``, ``b = B(n, y)`` and ``scale = 1/(2n)`` this is the
    double sum in Rasa's Bernstein inequality.
    """
    aa = pushforward_affine(convolve(a, a), scale)
    bb = pushforward_affine(convolve(b, b), scale)
    ab = pushforward_affine(convolve(a, b), scale)
    return expectation(aa, phi) + expectation(bb, phi) - 2 * expectation(ab, phi)


def rasa_gap_m(
    measures: Sequence[FiniteMeasure], phi: Callable[[Any], Any], scale: Any
) -> Scalar:
    """``sum_l E phi(S(mu_l^{*m})) - m E phi(S(mu_1 * ... * mu_m))``."""
    m = len(measures)
    if m < 2:
        raise ValueError("need at least two measures")
    total = sum(
        (expectation(pushforward_affine(convolve_power(mu, m), scale), phi) for mu in measures[1:]),
        expectation(pushforward_affine(convolve_power(measures[0], m), scale), phi),
    )
    prod = measures[0]
    for mu in measures[1:]:
        prod = convolve(prod, mu)
    return total - m * expectation(pushforward_affine(prod, scale), phi)


def continuous_rasa_gap(
    f1: families.ContinuousFamily,
    f2: families.ContinuousFamily,
    phis: Sequence[Callable[[Any], Any]],
    scale: Any = Fraction(1, 2),
    *,
    grid_n: int = 4000,
    lo: float | None = None,
    hi: float | None = None,
    tail: float = 1e-12,
) -> tuple[list[float], float, tuple[FiniteMeasure, FiniteMeasure]]:
    """Rasa gaps of two continuous laws through a shared midpoint discretization.

    Returns the gaps, the discretization budget ``(support diameter) * (grid
    spacing)`` measured on the scaled sum, and the two discretized measures.
    The grid defaults to the ``tail`` / ``1 - tail`` quantile hull of both laws.
    """
    if lo is None:
        lo = min(_lower(f, tail) for f in (f1, f2))
    if hi is None:
        hi = max(_upper(f, tail) for f in (f1, f2))
    mu = families.discretize(f1, grid_n, lo, hi, max_tail=4 * tail)
    nu = families.discretize(f2, grid_n, lo, hi, max_tail=4 * tail)
    spacing = (hi - lo) / grid_n
    s = abs(float(to_scalar(scale)))
    budget = (2 * (hi - lo) * s) * (spacing * s)
    aa = pushforward_affine(convolve(mu, mu), scale)
    bb = pushforward_affine(convolve(nu, nu), scale)
    ab = pushforward_affine(convolve(mu, nu), scale)
    gaps = [
        expectation(aa, phi) + expectation(bb, phi) - 2 * expectation(ab, phi)
        for phi in phis
    ]
    return gaps, budget, (mu, nu)


def _lower(f: families.ContinuousFamily, tail: float) -> float:
    if f.atom is not None:
        return f.atom
    lo, _ = f.support_bounds()
    # a finite endpoint is exact; ppf near 0 is slow and noisy for small shapes
    return lo if math.isfinite(lo) else float(f.ppf(tail))


def _upper(f: families.ContinuousFamily, tail: float) -> float:
    if f.atom is not None:
        return f.atom
    _, hi = f.support_bounds()
    return hi if math.isfinite(hi) else float(f.ppf(1 - tail))


# ----------------------------------------------------------------------
# positive linear operators


def eval_operator(
    family_kind: str,
    params: Sequence[Any],
    phi: Callable[[Any], Any],
    x: Any,
    *,
    tail_eps: float = families.DEFAULT_TAIL_EPS,
) -> Scalar:
    """Evaluate a Bernstein-type operator at ``x``.

    ``family_kind`` / ``params``:

    * ``"bernstein"``, ``(n,)``: ``sum_i b_{n,i}(x) phi(i/n)``
    * ``"szasz"``, ``(n,)``: ``sum_i s_i(n x) phi(i/n)``
    * ``"baskakov"``, ``(n,)``: ``sum_i v_{n,i}(x) phi(i/n)``, via NB(n, x/(1+x))
    * ``"beta"``, ``(t,)``: ``int_0^1 phi(u) beta_{xt,(1-x)t}(u) du``
    """
    x = to_scalar(x)
    if family_kind == "bernstein":
        (n,) = params
        if not 0 <= x <= 1:
            raise ValueError("Bernstein operators need x in [0, 1]")
        law = families.binomial(int(n), x)
        return expectation(pushforward_affine(law, Fraction(1, int(n))), phi)
    if family_kind == "szasz":
        (n,) = params
        if x < 0:
            raise ValueError("Szasz operators need x >= 0")
        law = families.poisson(int(n) * x, tail_eps)
        return expectation(pushforward_affine(law, Fraction(1, int(n))), phi)
    if family_kind == "baskakov":
        (n,) = params
        if x < 0:
            raise ValueError("Baskakov operators need x >= 0")
        law = families.negative_binomial(int(n), x / (1 + x), tail_eps)
        return expectation(pushforward_affine(law, Fraction(1, int(n))), phi)
    if family_kind == "beta":
        (t,) = params
        t = float(to_scalar(t))
        if not 0 <= x <= 1 or t <= 0:
            raise ValueError("beta operators need x in [0, 1] and t > 0")
        x = float(x)
        if x in (0.0, 1.0):
            return float(phi(x))
        law = families.continuous("beta", x * t, (1 - x) * t)
        val, _ = integrate.quad(
            lambda u: float(phi(u)) * law.density(u), 0.0, 1.0,
            epsabs=1e-12, epsrel=1e-10, limit=200,
        )
        return val
    raise ValueError(f"unknown operator family {family_kind!r}")


# ----------------------------------------------------------------------
# distribution polynomials


@dataclass(frozen=True)
class DistributionPolynomial:
    """``sum_j c_j prod_i x_i^{e_ji}`` with non-negative coefficients summing to one."""

    terms: tuple[tuple[Scalar, tuple[int, ...]], ...]
    arity: int

    def __post_init__(self) -> None:
        terms = tuple((to_scalar(c), tuple(int(e) for e in es)) for c, es in self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise ValueError("polynomial needs at least one term")
        for c, es in terms:
            if c < 0:
                raise ValueError(f"negative coefficient {c}")
            if len(es) != self.arity:
                raise ValueError(f"term exponents {es} do not match arity {self.arity}")
            if any(e < 0 for e in es):
                raise ValueError(f"negative exponent in {es}")
        total = sum(c for c, _ in terms)
        if (abs(total - 1) > 1e-12) if isinstance(total, float) else total != 1:
            raise ValueError(f"coefficients sum to {total}; the polynomial must be 1 at all-ones")

    def __call__(self, *xs: Any) -> Any:
        return sum(c * math.prod(x**e for x, e in zip(xs, es)) for c, es in self.terms)

    def to_json(self) -> dict[str, Any]:
        return {
            "arity": self.arity,
            "terms": [{"c": scalar_to_json(c), "e": list(es)} for c, es in self.terms],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> DistributionPolynomial:
        return cls(
            tuple((scalar_from_json(t["c"]), tuple(t["e"])) for t in data["terms"]),
            int(data["arity"]),
        )


def eval_poly(
    poly: DistributionPolynomial, measures: Sequence[FiniteMeasure]
) -> FiniteMeasure:
    """Substitute measures into ``poly``: products become convolutions, sums mixtures."""
    if len(measures) != poly.arity:
        raise ValueError(f"polynomial has arity {poly.arity}, got {len(measures)} measures")
    parts = []
    for _, es in poly.terms:
        out = _zero_like(measures)
        for mu, e in zip(measures, es):
            if e:
                out = convolve(out, convolve_power(mu, e))
        parts.append(out)
    return mixture([c for c, _ in poly.terms], parts)
