import itertools

import pytest

from stochorder.majorization import (
    ExponentTuple,
    enumerate_tuples,
    leq,
    potential,
    satisfies_S,
    transfer_chain,
)


def brute_tuples(k, total):
    """Every non-increasing k-tuple with the given total, from the full integer box."""
    return sorted(
        (t for t in itertools.product(range(total + 1), repeat=k)
         if sum(t) == total and all(a >= b for a, b in zip(t, t[1:]))),
        reverse=True,
    )


def brute_leq(p, q):
    return sum(p) == sum(q) and all(sum(p[:m]) <= sum(q[:m]) for m in range(1, len(p) + 1))


def brute_S(p, q):
    diff = [l for l in range(len(p)) if p[l] != q[l]]
    return len(diff) == 2 and q[diff[0]] == p[diff[0]] + 1 and q[diff[1]] == p[diff[1]] - 1


SMALL = [(k, total) for k in range(1, 6) for total in range(0, 9)]


class TestExponentTuple:
    def test_parse(self):
        assert ExponentTuple.parse("1,1,0") == (1, 1, 0)
        assert ExponentTuple.parse("1,1,0").k == 3
        assert str(ExponentTuple((2, 0))) == "(2,0)"

    @pytest.mark.parametrize("bad", [(0, 1), (1, -1), (), (1.5,), (True,)])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            ExponentTuple(bad)

    def test_parse_error(self):
        with pytest.raises(ValueError):
            ExponentTuple.parse("1,x")


class TestLeq:
    def test_examples(self):
        assert leq((1, 1), (2, 0))
        assert leq((1, 1, 1), (2, 1, 0))
        assert not leq((2, 0), (1, 1))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            leq((1, 1), (2, 0, 0))

    def test_different_totals(self):
        assert not leq((1, 0), (2, 0))

    @pytest.mark.parametrize("k,total", SMALL)
    def test_matches_definition(self, k, total):
        ts = enumerate_tuples(k, total)
        for p, q in itertools.product(ts, repeat=2):
            assert leq(p, q) == brute_leq(p, q)

    @pytest.mark.parametrize("k,total", SMALL)
    def test_partial_order(self, k, total):
        ts = enumerate_tuples(k, total)
        rel = {(p, q): leq(p, q) for p in ts for q in ts}
        for p in ts:
            assert rel[p, p]
        for p, q in itertools.product(ts, repeat=2):
            if p != q:
                assert not (rel[p, q] and rel[q, p])
        for p, q, r in itertools.product(ts, repeat=3):
            if rel[p, q] and rel[q, r]:
                assert rel[p, r]


class TestSatisfiesS:
    def test_examples(self):
        assert satisfies_S((1, 1), (2, 0)) == (1, 2)
        assert satisfies_S((1, 1, 1), (2, 1, 0)) == (1, 3)
        assert satisfies_S((1, 1, 1, 1), (4, 0, 0, 0)) is None
        assert satisfies_S((2, 0), (2, 0)) is None

    def test_precondition(self):
        with pytest.raises(ValueError):
            satisfies_S((2, 0), (1, 1))

    @pytest.mark.parametrize("k,total", SMALL)
    def test_matches_definition(self, k, total):
        ts = enumerate_tuples(k, total)
        for p, q in itertools.product(ts, repeat=2):
            if leq(p, q):
                found = satisfies_S(p, q)
                assert (found is not None) == brute_S(p, q)
                if found:
                    l1, l2 = found
                    assert l1 < l2
                    assert q[l1 - 1] == p[l1 - 1] + 1 and q[l2 - 1] == p[l2 - 1] - 1


class TestTransferChain:
    def test_trivial(self):
        assert transfer_chain((2, 0), (2, 0)) == [(2, 0)]

    def test_single_step(self):
        assert transfer_chain((1, 1, 1), (2, 1, 0)) == [(1, 1, 1), (2, 1, 0)]

    def test_long_chain(self):
        chain = transfer_chain((1, 1, 1, 1), (4, 0, 0, 0))
        assert chain[0] == (1, 1, 1, 1) and chain[-1] == (4, 0, 0, 0)
        assert all(satisfies_S(a, b) for a, b in zip(chain, chain[1:]))
        assert len(chain) - 1 <= potential((1, 1, 1, 1), (4, 0, 0, 0)) == 6

    def test_precondition(self):
        with pytest.raises(ValueError):
            transfer_chain((2, 0), (1, 1))

    @pytest.mark.parametrize("k,total", SMALL)
    def test_exhaustive(self, k, total):
        ts = enumerate_tuples(k, total)
        for p, q in itertools.product(ts, repeat=2):
            if not leq(p, q):
                continue
            chain = transfer_chain(p, q)
            assert chain[0] == p and chain[-1] == q
            assert all(isinstance(t, ExponentTuple) for t in chain)
            pots = [potential(t, q) for t in chain]
            assert len(chain) - 1 <= potential(p, q)
            assert all(a > b for a, b in zip(pots, pots[1:]))
            assert pots[-1] == 0
            for a, b in zip(chain, chain[1:]):
                assert brute_S(a, b) and leq(a, b)
            if satisfies_S(p, q):
                assert len(chain) == 2


class TestEnumerate:
    def test_examples(self):
        assert enumerate_tuples(2, 2) == [(2, 0), (1, 1)]
        assert enumerate_tuples(3, 3) == [(3, 0, 0), (2, 1, 0), (1, 1, 1)]
        assert len(enumerate_tuples(5, 6)) == 10
        assert enumerate_tuples(3, 0) == [(0, 0, 0)]

    @pytest.mark.parametrize("k,total", SMALL)
    def test_matches_brute_force(self, k, total):
        assert [tuple(t) for t in enumerate_tuples(k, total)] == brute_tuples(k, total)

    def test_errors(self):
        with pytest.raises(ValueError):
            enumerate_tuples(0, 1)
        with pytest.raises(ValueError):
            enumerate_tuples(2, -1)
