"""End-to-end exact reproductions of the two published counterexamples."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction as F
from typing import Any

from .measures import convolve, dirac, mean, mixture
from .muirhead import DistributionPolynomial, eval_poly
from .orders import check_cx, check_st, stop_loss

__all__ = ["Check", "REPRODUCTIONS", "nonconverse_example", "polynomial_example"]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def to_json(self) -> dict[str, Any]:
        return {"check": self.name, "passed": self.passed, "detail": self.detail}


def nonconverse_example() -> list[Check]:
    """mu = 1/2 d_-3 + 1/2 d_1, nu = 3/4 d_0 + 1/4 d_4.

    Neither is st-below the other, yet mu*nu <=cx (mu*mu + nu*nu)/2.
    """
    mu = mixture([F(1, 2), F(1, 2)], [dirac(-3), dirac(1)])
    nu = mixture([F(3, 4), F(1, 4)], [dirac(0), dirac(4)])
    lhs = convolve(mu, nu)
    rhs = mixture([F(1, 2), F(1, 2)], [convolve(mu, mu), convolve(nu, nu)])
    st_mn = check_st(mu, nu)
    st_nm = check_st(nu, mu)
    cx = check_cx(lhs, rhs)
    return [
        Check("mu <=st nu fails", not st_mn.holds, f"margin {st_mn.margin} at {st_mn.witness}"),
        Check("nu <=st mu fails", not st_nm.holds, f"margin {st_nm.margin} at {st_nm.witness}"),
        Check(
            "mu*nu = {-3: 3/8, 1: 1/2, 5: 1/8}",
            lhs.as_dict() == {F(-3): F(3, 8), F(1): F(1, 2), F(5): F(1, 8)},
            repr(lhs),
        ),
        Check("means agree", mean(lhs) == mean(rhs) == 0, f"{mean(lhs)} vs {mean(rhs)}"),
        Check(
            "mu*nu <=cx (mu*mu + nu*nu)/2 with exact margin >= 0",
            cx.holds and isinstance(cx.margin, F) and cx.margin >= 0,
            f"margin {cx.margin}",
        ),
    ]


V_POLY = DistributionPolynomial(((F(1, 2), (3, 1)), (F(1, 2), (1, 3))), 2)
W_POLY = DistributionPolynomial(
    ((F(1, 8), (4, 0)), (F(3, 4), (2, 2)), (F(1, 8), (0, 4))), 2
)


def polynomial_example() -> list[Check]:
    """V = (x^3 y + x y^3)/2 and W = (x^4 + 6 x^2 y^2 + y^4)/8 at mu = d_0, nu = (d_0 + d_1)/2.

    W - V >= 0 on the reals, but V(mu, nu) is not cx-below W(mu, nu).
    """
    mu = dirac(0)
    nu = mixture([F(1, 2), F(1, 2)], [dirac(0), dirac(1)])
    v = eval_poly(V_POLY, [mu, nu])
    w = eval_poly(W_POLY, [mu, nu])
    v_expected = {F(k): F(c, 16) for k, c in enumerate((5, 7, 3, 1))}
    w_expected = {F(k): F(c, 128) for k, c in enumerate((41, 52, 30, 4, 1))}
    sl_v, sl_w = stop_loss(v, 2), stop_loss(w, 2)
    cx = check_cx(v, w)
    return [
        Check("mu <=st nu", check_st(mu, nu).holds, ""),
        Check("V(mu, nu) weights", v.as_dict() == v_expected, repr(v)),
        Check("W(mu, nu) weights", w.as_dict() == w_expected, repr(w)),
        Check("means agree", mean(v) == mean(w) == 2 * (mean(mu) + mean(nu)), f"{mean(v)}"),
        Check("stop-loss at 2: 1/16 vs 6/128", sl_v == F(1, 16) and sl_w == F(6, 128), f"{sl_v} vs {sl_w}"),
        Check(
            "V(mu, nu) <=cx W(mu, nu) fails at t = 2",
            not cx.holds and cx.witness == 2,
            f"margin {cx.margin} at {cx.witness} ({cx.constraint_kind})",
        ),
    ]


REPRODUCTIONS: dict[str, Callable[[], list[Check]]] = {
    "ex2.4": nonconverse_example,
    "ex3.9": polynomial_example,
}
