from collections import Counter
from itertools import combinations, permutations
from math import comb

import pytest

from odt.combgen import (comb_rank, comb_unrank, kcombs, kperms, nested_combs, nested_combs_mixed,
                         nested_count, perms)


def revolving_door(n, k):
    """Recursive definition of the order, used as the oracle for the iterative stream."""
    if k == 0:
        return [()]
    if k > n:
        return []
    return revolving_door(n - 1, k) + [c + (n - 1,) for c in reversed(revolving_door(n - 1, k - 1))]


@pytest.mark.parametrize("n", range(0, 10))
def test_kcombs_matches_recursive_order(n):
    for k in range(0, n + 1):
        assert list(kcombs(k, n)) == revolving_door(n, k)


def test_kcombs_examples():
    assert {frozenset(c) for c in kcombs(2, 3)} == {frozenset(s) for s in [(0, 1), (1, 2), (0, 2)]}
    assert list(kcombs(0, 5)) == [()]
    assert list(kcombs(4, 3)) == []
    seq = list(kcombs(2, 5))
    assert len(seq) == 10
    for a, b in zip(seq, seq[1:]):
        assert len(set(a) ^ set(b)) == 2


def test_kcombs_counts_and_adjacency():
    for n in range(0, 9):
        for k in range(0, n + 1):
            seq = list(kcombs(k, n))
            assert len(seq) == comb(n, k)
            assert set(seq) == set(combinations(range(n), k))
            for a, b in zip(seq, seq[1:]):
                assert len(set(a) - set(b)) == 1


def test_kcombs_mid_stream():
    full = list(kcombs(3, 8))
    for start in range(0, len(full), 7):
        for stop in (start + 1, start + 5, len(full)):
            assert list(kcombs(3, 8, start, stop)) == full[start:stop]


def test_rank_unrank():
    assert comb_rank(next(kcombs(2, 5))) == 0
    for i, c in enumerate(kcombs(3, 6)):
        assert comb_rank(c) == i
        assert comb_unrank(i, 3, 6) == c
    with pytest.raises(ValueError):
        comb_unrank(comb(6, 3), 3, 6)
    with pytest.raises(ValueError):
        comb_rank((2, 1))


def test_perms():
    assert list(perms(["a"])) == [["a"]]
    assert sorted(map(tuple, perms("ab"))) == [("a", "b"), ("b", "a")]
    assert len(list(perms("abcd"))) == 24
    assert sorted(map(tuple, perms(range(5)))) == sorted(permutations(range(5)))


def test_kperms():
    assert len(list(kperms(2, ["r1", "r2", "r3"]))) == 6
    assert sorted(map(tuple, kperms(3, "abc"))) == sorted(permutations("abc"))


@pytest.mark.parametrize("n", range(0, 7))
def test_kperms_factorization(n):
    items = list(range(n))
    for k in range(0, min(n, 3) + 1):
        lhs = Counter(map(tuple, kperms(k, items)))
        rhs = Counter(tuple(p) for c in kcombs(k, n) for p in perms(list(c)))
        assert lhs == rhs


def literal_nested(K, G, N):
    """Direct transcription of the incremental update loop.

    css[j] holds the j-combinations of the points seen so far; ncss[j] the
    j-sets of inner combinations seen so far.  New inner G-combinations at
    step n are the (G-1)-combinations of 0..n-1 extended by n, and every new
    inner combination extends the (j-1)-sets already built.
    """
    css = [[()]] + [[] for _ in range(G)]
    ncss = [[()]] + [[] for _ in range(K)]
    inner = []
    for n in range(N):
        new_css = [[] for _ in range(G + 1)]
        for j in range(G, 0, -1):
            new_css[j] = [c + (n,) for c in css[j - 1]]
        for j in range(1, G + 1):
            css[j] = css[j] + new_css[j]
        for c in new_css[G]:
            idx = comb_rank(c)
            inner.append(idx)
            for j in range(K, 0, -1):
                ncss[j] = ncss[j] + [tuple(sorted(s + (idx,))) for s in ncss[j - 1]]
    return ncss[K]


@pytest.mark.parametrize("N,G,K", [(N, G, K) for N in range(1, 7) for G in (1, 2) for K in (1, 2) if G <= N])
def test_nested_against_literal(N, G, K):
    out = list(nested_combs(K, G, N))
    assert len(out) == comb(comb(N, G), K)
    assert Counter(out) == Counter(literal_nested(K, G, N))
    assert all(list(c) == sorted(set(c)) and c[-1] < comb(N, G) for c in out)


def test_nested_examples():
    assert len(list(nested_combs(2, 2, 5))) == 45
    assert list(nested_combs(1, 3, 3)) == [(0,)]
    assert len(list(nested_combs_mixed(1, [1, 2], 4))) == 10
    assert len(list(nested_combs_mixed(2, [1, 2], 4))) == 45
    assert Counter(nested_combs_mixed(2, [2], 5)) == Counter(nested_combs(2, 2, 5))
    assert nested_count(2, [1, 2], 4) == 45


def test_nested_sink_precedes_use():
    seen = {}
    for c in nested_combs_mixed(2, [1, 2], 5, sink=lambda i, cb: seen.setdefault(i, cb)):
        assert all(i in seen for i in c)
    assert {len(v) for k, v in seen.items() if k < 5} == {1}
    assert all(seen[5 + r] == comb_unrank(r, 2, 5) for r in range(10))


def test_nested_errors():
    with pytest.raises(ValueError):
        nested_combs_mixed(1, [2, 1], 4)
    with pytest.raises(OverflowError):
        nested_combs(4, 20, 60)
