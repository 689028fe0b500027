"""Finitely supported probability measures and their algebra.

A :class:`FiniteMeasure` lives in one of two scalar regimes:

* ``"exact"``: support points and weights are :class:`fractions.Fraction`
  values and no operation ever rounds;
* ``"float"``: binary64 floats, with explicit tolerances wherever two
  values are compared.

Operations combining an exact measure with a float measure coerce the exact
one to floats first.  Truncated infinite-support laws carry their omitted
probability in ``mass_defect``; it is propagated, never renormalized away.
"""

from __future__ import annotations

import math
import numbers
import warnings
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Union

import numpy as np

__all__ = [
    "EXACT",
    "FLOAT",
    "SNAP_TOL",
    "WEIGHT_TOL",
    "FiniteMeasure",
    "Scalar",
    "convolve",
    "convolve_power",
    "dirac",
    "expectation",
    "mean",
    "mixture",
    "pushforward_affine",
    "to_scalar",
    "variance",
]

Scalar = Union[Fraction, float]

EXACT = "exact"
FLOAT = "float"

# Float pairwise sums of lattice points closer than this collapse to one atom.
SNAP_TOL = 1e-12
# Allowed |sum(weights) + mass_defect - 1| for float measures.
WEIGHT_TOL = 1e-9


def to_scalar(value: Any) -> Scalar:
    """Coerce ``value`` to a Fraction when it is rational, else to a float.

    Strings are parsed as ``"p/q"``, integers or decimals (all exact).
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, numbers.Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise ValueError(f"non-finite scalar {value!r}")
        return float(value)
    if isinstance(value, numbers.Real):
        return float(value)
    raise TypeError(f"cannot interpret {value!r} as a scalar")


def regime_of(values: Iterable[Scalar]) -> str:
    return FLOAT if any(isinstance(v, float) for v in values) else EXACT


def _in_regime(value: Scalar, regime: str) -> Scalar:
    return float(value) if regime == FLOAT else value


def scalar_to_json(value: Scalar) -> str | float:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return float(value)


def scalar_from_json(value: Any) -> Scalar:
    if isinstance(value, str):
        return Fraction(value)
    return to_scalar(value)


@dataclass(frozen=True, eq=False)
class FiniteMeasure:
    """A finitely supported probability measure.

    Use :meth:`from_atoms` (or the module-level helpers) rather than the raw
    constructor; the constructor only validates, it does not normalize.
    """

    support: tuple[Scalar, ...]
    weights: tuple[Scalar, ...]
    regime: str = EXACT
    mass_defect: Scalar = Fraction(0)

    def __post_init__(self) -> None:
        if self.regime not in (EXACT, FLOAT):
            raise ValueError(f"unknown regime {self.regime!r}")
        if len(self.support) != len(self.weights):
            raise ValueError("support and weights differ in length")
        if not self.support:
            raise ValueError("a probability measure needs at least one atom")
        if any(w <= 0 for w in self.weights):
            raise ValueError("all weights must be positive")
        if any(b <= a for a, b in zip(self.support, self.support[1:])):
            raise ValueError("support must be strictly increasing")
        if self.mass_defect < 0:
            raise ValueError("mass_defect must be non-negative")
        if self.regime == EXACT:
            if any(not isinstance(v, Fraction) for v in self.support + self.weights):
                raise TypeError("exact-regime measures hold Fractions only")
            if self.mass_defect != 0:
                raise ValueError("mass_defect must be 0 in the exact regime")
            if sum(self.weights) != 1:
                raise ValueError(f"weights sum to {sum(self.weights)}, not 1")
        else:
            total = math.fsum(self.weights) + self.mass_defect
            if abs(total - 1.0) > WEIGHT_TOL:
                raise ValueError(
                    f"weights plus mass_defect sum to {total!r}, not 1"
                )

    # ------------------------------------------------------------------
    # construction

    @classmethod
    def from_atoms(
        cls,
        atoms: Mapping[Any, Any] | Iterable[tuple[Any, Any]],
        *,
        regime: str | None = None,
        mass_defect: Any = 0,
        snap_tol: float = SNAP_TOL,
    ) -> FiniteMeasure:
        """Build a measure from ``{point: weight}`` or ``(point, weight)`` pairs.

        Duplicate points are merged, zero weights dropped.  The regime is
        inferred (any float input makes it ``"float"``) unless given.
        """
        pairs = atoms.items() if isinstance(atoms, Mapping) else atoms
        xs: list[Scalar] = []
        ws: list[Scalar] = []
        for x, w in pairs:
            xs.append(to_scalar(x))
            ws.append(to_scalar(w))
        defect = to_scalar(mass_defect)
        if regime is None:
            regime = regime_of(xs + ws + [defect])
        if any(w < 0 for w in ws):
            raise ValueError("negative weight")
        if regime == EXACT:
            if any(isinstance(v, float) for v in xs + ws + [defect]):
                raise TypeError("float input cannot build an exact measure")
            merged: dict[Fraction, Fraction] = {}
            for x, w in zip(xs, ws):
                if w:
                    merged[x] = merged.get(x, Fraction(0)) + w
            points = sorted(merged)
            return cls(
                tuple(points), tuple(merged[x] for x in points), EXACT, Fraction(0)
            )
        return cls._from_float_arrays(
            np.asarray(xs, dtype=float),
            np.asarray(ws, dtype=float),
            float(defect),
            snap_tol,
        )

    @classmethod
    def _from_float_arrays(
        cls,
        xs: np.ndarray,
        ws: np.ndarray,
        mass_defect: float,
        snap_tol: float = SNAP_TOL,
    ) -> FiniteMeasure:
        keep = ws > 0
        xs, ws = xs[keep], ws[keep]
        if xs.size == 0:
            raise ValueError("a probability measure needs at least one atom")
        order = np.argsort(xs, kind="stable")
        xs, ws = xs[order], ws[order]
        # a new group starts wherever the gap to the previous point exceeds snap_tol
        starts = np.concatenate(([True], np.diff(xs) > snap_tol))
        if not starts.all():
            group = np.cumsum(starts) - 1
            wsum = np.bincount(group, weights=ws)
            xs = np.bincount(group, weights=ws * xs) / wsum
            ws = wsum
            # weighted means of merged groups can in principle touch; keep order strict
            strict = np.concatenate(([True], np.diff(xs) > 0))
            if not strict.all():
                group = np.cumsum(strict) - 1
                wsum = np.bincount(group, weights=ws)
                xs = np.bincount(group, weights=ws * xs) / wsum
                ws = wsum
        return cls(
            tuple(xs.tolist()), tuple(ws.tolist()), FLOAT, max(float(mass_defect), 0.0)
        )

    # ------------------------------------------------------------------
    # views

    def __len__(self) -> int:
        return len(self.support)

    def __iter__(self):
        return iter(zip(self.support, self.weights))

    def __repr__(self) -> str:
        atoms = ", ".join(f"{x}: {w}" for x, w in list(self)[:8])
        more = ", ..." if len(self) > 8 else ""
        defect = f", defect={self.mass_defect:.3g}" if self.mass_defect else ""
        return f"FiniteMeasure[{self.regime}]({{{atoms}{more}}}{defect})"

    def __eq__(self, other: object) -> bool:
        """Exact structural equality (use :meth:`isclose` for float measures)."""
        if not isinstance(other, FiniteMeasure):
            return NotImplemented
        return (
            self.regime == other.regime
            and self.support == other.support
            and self.weights == other.weights
            and self.mass_defect == other.mass_defect
        )

    def __hash__(self) -> int:
        return hash((self.regime, self.support, self.weights, self.mass_defect))

    def isclose(self, other: FiniteMeasure, tol: float = 1e-12) -> bool:
        """Element-wise comparison of atoms and weights within ``tol``."""
        if len(self) != len(other):
            return False
        a, b = self.as_float(), other.as_float()
        return (
            np.allclose(a.xs, b.xs, rtol=0, atol=tol)
            and np.allclose(a.ws, b.ws, rtol=0, atol=tol)
            and abs(a.mass_defect - b.mass_defect) <= tol
        )

    def weight(self, x: Any) -> Scalar:
        """Weight of the atom at ``x`` (zero when ``x`` is not in the support)."""
        x = to_scalar(x)
        if self.regime == FLOAT:
            i = int(np.searchsorted(self.xs, float(x)))
            for j in (i - 1, i):
                if 0 <= j < len(self) and abs(self.xs[j] - float(x)) <= SNAP_TOL:
                    return self.weights[j]
            return 0.0
        return dict(zip(self.support, self.weights)).get(x, Fraction(0))

    def as_dict(self) -> dict[Scalar, Scalar]:
        return dict(zip(self.support, self.weights))

    @cached_property
    def xs(self) -> np.ndarray:
        return np.array([float(x) for x in self.support])

    @cached_property
    def ws(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])

    @property
    def total_weight(self) -> Scalar:
        if self.regime == EXACT:
            return sum(self.weights, Fraction(0))
        return math.fsum(self.weights)

    @property
    def diameter(self) -> Scalar:
        return self.support[-1] - self.support[0]

    def cdf(self, x: Any) -> Scalar:
        """``F(x) = mu((-inf, x])`` over the retained atoms."""
        x = to_scalar(x)
        if self.regime == EXACT and isinstance(x, Fraction):
            return sum((w for p, w in self if p <= x), Fraction(0))
        i = int(np.searchsorted(self.xs, float(x), side="right"))
        return math.fsum(self.weights[:i])

    def as_float(self) -> FiniteMeasure:
        if self.regime == FLOAT:
            return self
        return FiniteMeasure(
            tuple(float(x) for x in self.support),
            tuple(float(w) for w in self.weights),
            FLOAT,
            0.0,
        )

    # ------------------------------------------------------------------
    # serialization

    def to_json(self) -> dict[str, Any]:
        return {
            "regime": self.regime,
            "atoms": [
                {"x": scalar_to_json(x), "w": scalar_to_json(w)} for x, w in self
            ],
            "mass_defect": scalar_to_json(self.mass_defect),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> FiniteMeasure:
        regime = data.get("regime", EXACT)
        if regime not in (EXACT, FLOAT):
            raise ValueError(f"unknown regime {regime!r}")
        atoms = [
            (scalar_from_json(a["x"]), scalar_from_json(a["w"])) for a in data["atoms"]
        ]
        defect = scalar_from_json(data.get("mass_defect", 0))
        if regime == FLOAT:
            atoms = [(float(x), float(w)) for x, w in atoms]
            defect = float(defect)
        return cls.from_atoms(atoms, regime=regime, mass_defect=defect)


# ----------------------------------------------------------------------
# constructors and algebra


def dirac(x: Any) -> FiniteMeasure:
    """The point mass at ``x``."""
    x = to_scalar(x)
    if isinstance(x, float):
        return FiniteMeasure((x,), (1.0,), FLOAT, 0.0)
    return FiniteMeasure((x,), (Fraction(1),), EXACT, Fraction(0))


def _common_regime(measures: Sequence[FiniteMeasure]) -> str:
    return FLOAT if any(m.regime == FLOAT for m in measures) else EXACT


def mixture(
    coeffs: Sequence[Any],
    parts: Sequence[FiniteMeasure],
    *,
    tol: float = WEIGHT_TOL,
) -> FiniteMeasure:
    """The convex combination ``sum(c_i * part_i)``.

    Raises ValueError for negative coefficients or coefficients that do not
    sum to one (within ``tol`` if any coefficient or part is a float).
    """
    if len(coeffs) != len(parts):
        raise ValueError("coeffs and parts differ in length")
    if not parts:
        raise ValueError("empty mixture")
    cs = [to_scalar(c) for c in coeffs]
    if any(c < 0 for c in cs):
        raise ValueError("negative mixture coefficient")
    regime = _common_regime(parts)
    if regime == EXACT and regime_of(cs) == FLOAT:
        regime = FLOAT
    if regime == EXACT:
        if sum(cs) != 1:
            raise ValueError(f"mixture coefficients sum to {sum(cs)}, not 1")
        acc: dict[Fraction, Fraction] = {}
        for c, part in zip(cs, parts):
            if not c:
                continue
            for x, w in part:
                acc[x] = acc.get(x, Fraction(0)) + c * w
        return FiniteMeasure.from_atoms(acc, regime=EXACT)
    fc = [float(c) for c in cs]
    if abs(math.fsum(fc) - 1.0) > tol:
        raise ValueError(f"mixture coefficients sum to {math.fsum(fc)!r}, not 1")
    kept = [(c, p.as_float()) for c, p in zip(fc, parts) if c > 0]
    xs = np.concatenate([p.xs for _, p in kept])
    ws = np.concatenate([c * p.ws for c, p in kept])
    defect = math.fsum(c * float(p.mass_defect) for c, p in kept)
    return FiniteMeasure._from_float_arrays(xs, ws, defect)


def _lattice(m: FiniteMeasure, step: Scalar | None = None):
    """Return ``(origin, step, offsets)`` if the support sits on a lattice.

    ``offsets`` are non-negative integers with ``x = origin + offset * step``.
    When ``step`` is given, only that spacing is tried.
    """
    x0 = m.support[0]
    if len(m) == 1:
        return x0, step, [0]
    if m.regime == EXACT:
        if step is None:
            diffs = [x - x0 for x in m.support[1:]]
            num = 0
            den = 1
            for d in diffs:
                num = math.gcd(num, d.numerator)
                den = den * d.denominator // math.gcd(den, d.denominator)
            step = Fraction(num, den)
        offsets = []
        for x in m.support:
            q = (x - x0) / step
            if q.denominator != 1:
                return None
            offsets.append(int(q))
        return x0, step, offsets
    xs = m.xs
    if step is None:
        step = float(np.min(np.diff(xs)))
        # refine over the whole span; a single difference carries too much rounding
        span = xs[-1] - xs[0]
        step = float(span / np.rint(span / step))
    q = (xs - xs[0]) / step
    rounded = np.rint(q)
    if np.max(np.abs(q - rounded)) > 1e-9:
        return None
    return float(xs[0]), float(step), rounded.astype(np.int64)


# dense kernels are only worth it when the lattice is not too sparse
_MAX_DENSE = 1 << 22


def _convolve_exact(a: FiniteMeasure, b: FiniteMeasure) -> FiniteMeasure:
    la = _lattice(a)
    lb = None
    if la is not None:
        step = la[1]
        if step is None:
            lb = _lattice(b)
        else:
            lb = _lattice(b, step)
    if la is not None and lb is not None:
        step = la[1] if la[1] is not None else lb[1]
        ra, rb = la[2], lb[2]
        size = ra[-1] + rb[-1] + 1
        if size * 2 <= _MAX_DENSE and size <= 16 * len(a) * len(b):
            acc = [Fraction(0)] * size
            for i, wa in zip(ra, a.weights):
                for j, wb in zip(rb, b.weights):
                    acc[i + j] += wa * wb
            origin = la[0] + lb[0]
            st = step if step is not None else Fraction(0)
            pts = [(origin + k * st, w) for k, w in enumerate(acc) if w]
            return FiniteMeasure(
                tuple(x for x, _ in pts), tuple(w for _, w in pts), EXACT, Fraction(0)
            )
    acc2: dict[Fraction, Fraction] = {}
    for x, wa in a:
        for y, wb in b:
            acc2[x + y] = acc2.get(x + y, Fraction(0)) + wa * wb
    return FiniteMeasure.from_atoms(acc2, regime=EXACT)


def _convolve_float(
    a: FiniteMeasure, b: FiniteMeasure, snap_tol: float
) -> FiniteMeasure:
    defect = 1.0 - (1.0 - float(a.mass_defect)) * (1.0 - float(b.mass_defect))
    if len(a) == 1 or len(b) == 1:
        point, other = (a, b) if len(a) == 1 else (b, a)
        return FiniteMeasure._from_float_arrays(
            other.xs + point.xs[0], other.ws * point.ws[0], defect, snap_tol
        )
    la = _lattice(a)
    if la is not None:
        lb = _lattice(b, la[1])
        if lb is None:
            lb_own = _lattice(b)
            if lb_own is not None and abs(lb_own[1] - la[1]) <= 1e-12 * abs(la[1]):
                lb = lb_own
        if lb is not None:
            size = int(la[2][-1] + lb[2][-1] + 1)
            if size <= _MAX_DENSE and size <= 16 * len(a) * len(b):
                da = np.zeros(int(la[2][-1]) + 1)
                db = np.zeros(int(lb[2][-1]) + 1)
                da[la[2]] = a.ws
                db[lb[2]] = b.ws
                dense = np.convolve(da, db)
                idx = np.nonzero(dense > 0)[0]
                xs = la[0] + lb[0] + idx * la[1]
                return FiniteMeasure._from_float_arrays(
                    xs, dense[idx], defect, snap_tol
                )
    xs = np.add.outer(a.xs, b.xs).ravel()
    ws = np.multiply.outer(a.ws, b.ws).ravel()
    return FiniteMeasure._from_float_arrays(xs, ws, defect, snap_tol)


def convolve(
    a: FiniteMeasure, b: FiniteMeasure, *, snap_tol: float = SNAP_TOL
) -> FiniteMeasure:
    """Law of ``X + Y`` for independent ``X ~ a`` and ``Y ~ b``."""
    if a.regime == EXACT and b.regime == EXACT:
        return _convolve_exact(a, b)
    return _convolve_float(a.as_float(), b.as_float(), snap_tol)


def convolve_power(a: FiniteMeasure, m: int) -> FiniteMeasure:
    """``m``-fold self-convolution; the empty power is the point mass at 0."""
    if m < 0 or int(m) != m:
        raise ValueError(f"convolution power must be a non-negative integer, got {m}")
    m = int(m)
    result = dirac(0.0) if a.regime == FLOAT else dirac(0)
    base = a
    while m:
        if m & 1:
            result = convolve(result, base)
        m >>= 1
        if m:
            base = convolve(base, base)
    return result


def pushforward_affine(a: FiniteMeasure, scale: Any, shift: Any = 0) -> FiniteMeasure:
    """Image of ``a`` under ``x -> scale * x + shift``."""
    s, t = to_scalar(scale), to_scalar(shift)
    if s == 0:
        raise ValueError("scale must be non-zero")
    if a.regime == EXACT and isinstance(s, Fraction) and isinstance(t, Fraction):
        pts = [(s * x + t, w) for x, w in a]
        if s < 0:
            pts.reverse()
        return FiniteMeasure(
            tuple(x for x, _ in pts), tuple(w for _, w in pts), EXACT, Fraction(0)
        )
    f = a.as_float()
    return FiniteMeasure._from_float_arrays(
        float(s) * f.xs + float(t), f.ws, float(f.mass_defect), 0.0
    )


def mean(a: FiniteMeasure) -> Scalar:
    """First moment over the retained support."""
    if a.regime == EXACT:
        return sum((x * w for x, w in a), Fraction(0))
    return math.fsum((a.xs * a.ws).tolist())


def variance(a: FiniteMeasure) -> Scalar:
    m = mean(a)
    return expectation(a, lambda x: (x - m) * (x - m))


def expectation(a: FiniteMeasure, phi: Callable[[Any], Any]) -> Scalar:
    """``sum(phi(x) * w)`` over the atoms of ``a``.

    Float measures first try ``phi`` on the whole support array and fall back
    to point-wise evaluation when ``phi`` is not vectorized.
    """
    if a.regime == FLOAT:
        vals = None
        try:
            with np.errstate(all="ignore"), warnings.catch_warnings():
                # scalar-only callables such as math.exp accept size-1 arrays with a warning
                warnings.simplefilter("error", DeprecationWarning)
                out = phi(a.xs)
            arr = np.asarray(out, dtype=float)
            if arr.shape == a.xs.shape:
                vals = arr
        except (TypeError, ValueError, DeprecationWarning):
            vals = None
        if vals is None:
            vals = np.array([_eval(phi, x) for x in a.support], dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = a.support[int(np.argmin(np.isfinite(vals)))]
            raise ValueError(f"phi is undefined at support point {bad!r}")
        return math.fsum((vals * a.ws).tolist())
    terms = [_eval(phi, x) * w for x, w in a]
    if any(isinstance(t, float) for t in terms):
        return math.fsum(float(t) for t in terms)
    return sum(terms, Fraction(0))


def _eval(phi: Callable[[Any], Any], x: Scalar) -> Scalar:
    try:
        value = phi(x)
    except (ArithmeticError, ValueError) as exc:
        raise ValueError(f"phi is undefined at support point {x!r}") from exc
    value = to_scalar(value) if not isinstance(value, (Fraction, float)) else value
    if isinstance(value, float) and not math.isfinite(value):
        raise ValueError(f"phi is undefined at support point {x!r}")
    return value
