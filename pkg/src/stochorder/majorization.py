"""Exponent tuples, their majorization order and transfer chains."""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from itertools import accumulate

__all__ = [
    "ExponentTuple",
    "enumerate_tuples",
    "leq",
    "potential",
    "satisfies_S",
    "transfer_chain",
]


class ExponentTuple(tuple):
    """Non-increasing tuple of non-negative integers.

    Unsorted input is rejected, not sorted.
    """

    def __new__(cls, entries: Iterable[int]) -> ExponentTuple:
        entries = tuple(entries)
        for e in entries:
            if isinstance(e, bool) or int(e) != e or e < 0:
                raise ValueError(f"exponents must be non-negative integers, got {entries}")
        entries = tuple(int(e) for e in entries)
        if not entries:
            raise ValueError("exponent tuples need at least one entry")
        if any(x < y for x, y in zip(entries, entries[1:])):
            raise ValueError(f"exponents must be non-increasing, got {entries}")
        return super().__new__(cls, entries)

    @classmethod
    def parse(cls, text: str) -> ExponentTuple:
        """Parse ``"1,1,0"``."""
        try:
            return cls(int(part) for part in text.split(","))
        except ValueError as exc:
            raise ValueError(f"bad exponent tuple {text!r}: {exc}") from None

    @property
    def k(self) -> int:
        return len(self)

    def __repr__(self) -> str:
        return f"ExponentTuple({tuple(self)})"

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self)) + ")"


def _as_tuple(p) -> ExponentTuple:
    return p if isinstance(p, ExponentTuple) else ExponentTuple(p)


def _prefix_gaps(p: ExponentTuple, q: ExponentTuple) -> list[int]:
    """``sum_{l <= m} (q_l - p_l)`` for m = 1..k."""
    return list(accumulate(b - a for a, b in zip(p, q)))


def leq(p, q) -> bool:
    """``p`` is majorized by ``q``: equal totals, prefix sums of p at most those of q."""
    p, q = _as_tuple(p), _as_tuple(q)
    if len(p) != len(q):
        raise ValueError(f"length mismatch: {p} vs {q}")
    gaps = _prefix_gaps(p, q)
    return gaps[-1] == 0 and all(g >= 0 for g in gaps)


def potential(p, q) -> int:
    """Sum of the prefix-sum gaps; strictly decreases along a transfer chain."""
    return sum(_prefix_gaps(_as_tuple(p), _as_tuple(q)))


def satisfies_S(p, q) -> tuple[int, int] | None:
    """The 1-based ``(l1, l2)`` of a single unit transfer from ``p`` to ``q``.

    Returns None when ``q`` is not one transfer away from ``p``.
    """
    p, q = _as_tuple(p), _as_tuple(q)
    if not leq(p, q):
        raise ValueError(f"{p} is not majorized by {q}")
    diff = [(l, b - a) for l, (a, b) in enumerate(zip(p, q), start=1) if a != b]
    if len(diff) != 2:
        return None
    (l1, d1), (l2, d2) = diff
    if d1 == 1 and d2 == -1:
        return l1, l2
    return None


def transfer_chain(p, q) -> list[ExponentTuple]:
    """A chain ``p = p^0 < p^1 < ... < p^I = q`` of single unit transfers.

    Each step takes the leftmost maximal block ``l1 <= m < l2`` of strictly
    positive prefix-sum gaps (zero gap at ``l1 - 1`` and at ``l2``) and moves
    one unit from coordinate ``l2`` to coordinate ``l1``.
    """
    p, q = _as_tuple(p), _as_tuple(q)
    if not leq(p, q):
        raise ValueError(f"{p} is not majorized by {q}")
    chain = [p]
    cur = list(p)
    while True:
        gaps = _prefix_gaps(ExponentTuple(cur), q)
        try:
            l1 = next(m for m, g in enumerate(gaps) if g > 0)
        except StopIteration:
            break
        l2 = next(m for m in range(l1 + 1, len(gaps)) if gaps[m] == 0)
        cur[l1] += 1
        cur[l2] -= 1
        chain.append(ExponentTuple(cur))
    return chain


def _partitions(total: int, k: int, cap: int) -> Iterator[tuple[int, ...]]:
    if k == 0:
        if total == 0:
            yield ()
        return
    for first in range(min(total, cap), -1, -1):
        if first * k < total:
            break
        for rest in _partitions(total - first, k - 1, first):
            yield (first,) + rest


def enumerate_tuples(k: int, total: int) -> list[ExponentTuple]:
    """All exponent tuples of length ``k`` summing to ``total``, lexicographically descending."""
    if k < 1 or total < 0:
        raise ValueError("need k >= 1 and total >= 0")
    return [ExponentTuple(t) for t in _partitions(total, k, total)]
