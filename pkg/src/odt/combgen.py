"""Combination, permutation and nested-combination generators.

All combination streams use the revolving-door order defined by

    R(n, 0) = [()]
    R(n, k) = R(n-1, k) ++ reverse(R(n-1, k-1)) with n-1 appended

so consecutive outputs differ by one element swapped out and one swapped
in.  The position of a combination in this stream is its rank.
"""

from __future__ import annotations

from math import comb
from typing import Callable, Iterator, Optional, Sequence

INT64_MAX = 2**63 - 1

Sink = Callable[[int, tuple], None]


def kcombs(k: int, n: int, start: int = 0, stop: Optional[int] = None) -> Iterator[tuple]:
    """k-subsets of ``range(n)`` in revolving-door order, ranks ``start <= r < stop``.

    Iterative successor (Knuth's Algorithm R) so the cost per step does not
    grow with n; starting mid-stream only needs an unrank.
    """
    if k < 0 or k > n:
        return
    total = comb(n, k)
    stop = total if stop is None else min(stop, total)
    if start >= stop:
        return
    if k == 0:
        yield ()
        return
    # c[1..k] ascending, c[k+1] = n sentinel; c[0] unused
    c = [0] + list(comb_unrank(start, k, n)) + [n]
    t = k
    for _ in range(stop - start - 1):
        yield tuple(c[1:t + 1])
        if t % 2:
            if c[1] + 1 < c[2]:
                c[1] += 1
                continue
            j, step = 2, "dec"
        else:
            if c[1] > 0:
                c[1] -= 1
                continue
            j, step = 2, "inc"
        while True:
            if step == "dec":
                if c[j] >= j:
                    c[j] = c[j - 1]
                    c[j - 1] = j - 2
                    break
                j += 1
                step = "inc"
            else:
                if c[j] + 1 < c[j + 1]:
                    c[j - 1] = c[j]
                    c[j] += 1
                    break
                j += 1
                if j > t:
                    raise AssertionError("revolving-door successor ran past the last combination")
                step = "dec"
    yield tuple(c[1:t + 1])


def comb_rank(c: Sequence[int], n: Optional[int] = None) -> int:
    """Position of ``c`` in :func:`kcombs` order (independent of ``n``)."""
    r = 0
    prev = -1
    for i, x in enumerate(c, start=1):
        if x <= prev or x < 0 or (n is not None and x >= n):
            raise ValueError(f"not a strictly increasing combination over range({n}): {tuple(c)}")
        prev = x
        r = comb(x + 1, i) - 1 - r
    return r


def comb_unrank(rank: int, k: int, n: int) -> tuple:
    if not 0 <= rank < comb(n, k):
        raise ValueError(f"rank {rank} out of range for C({n},{k}) = {comb(n, k)}")
    out = [0] * k
    hi = n
    for i in range(k, 0, -1):
        m = i - 1
        while m + 1 < hi and comb(m + 1, i) <= rank:
            m += 1
        out[i - 1] = m
        rank = comb(m + 1, i) - 1 - rank
        hi = m
    return tuple(out)


def perms(items: Sequence) -> Iterator[list]:
    """All orderings, built by inserting the head into every slot of the tail's orderings."""
    items = list(items)
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for p in perms(rest):
        for i in range(len(p) + 1):
            yield p[:i] + [head] + p[i:]


def kperms(k: int, items: Sequence) -> Iterator[list]:
    """Ordered k-selections, drawn element by element."""
    items = list(items)
    if k == 0:
        yield []
        return
    for i, x in enumerate(items):
        for p in kperms(k - 1, items[:i] + items[i + 1:]):
            yield [x] + p


def _block_order(k: int, m: int) -> Iterator[tuple]:
    """k-subsets of ``range(m)`` in the order the incremental outer update leaves them."""
    if k == 0:
        yield ()
        return
    for j in range(m - 1, k - 2, -1):
        for c in _block_order(k - 1, j):
            yield c + (j,)


def nested_count(K: int, Gs: Sequence[int], N: int) -> int:
    return comb(sum(comb(N, g) for g in Gs), K)


def nested_combs(K: int, G: int, N: int, sink: Optional[Sink] = None) -> Iterator[tuple]:
    """(K, G)-nested combinations as strictly increasing tuples of inner ranks.

    Inner G-combinations arrive one point at a time; ``sink(rank, comb)`` is
    called for each before any outer combination that uses it is yielded.
    """
    if K < 1 or G < 1 or N < G:
        raise ValueError(f"need K >= 1, G >= 1, N >= G (got K={K}, G={G}, N={N})")
    return _nested(K, [G], N, sink)


def nested_combs_mixed(K: int, Gs: Sequence[int], N: int, sink: Optional[Sink] = None) -> Iterator[tuple]:
    """Nested combinations over the disjoint union of several inner sizes.

    Inner index of a G-combination with rank r is r + sum(C(N, G') for G' < G).
    """
    Gs = list(Gs)
    if not Gs or any(b <= a for a, b in zip(Gs, Gs[1:])):
        raise ValueError(f"inner sizes must be strictly ascending: {Gs}")
    if K < 1 or Gs[0] < 1 or Gs[-1] > N:
        raise ValueError(f"need K >= 1, 1 <= G <= N (got K={K}, Gs={Gs}, N={N})")
    return _nested(K, Gs, N, sink)


def _nested(K: int, Gs: list, N: int, sink: Optional[Sink]) -> Iterator[tuple]:
    total = nested_count(K, Gs, N)
    if total > INT64_MAX:
        raise OverflowError(f"C(sum C({N},G), {K}) = {total} exceeds the 64-bit stream width")
    return _nested_stream(K, Gs, N, sink)


def _nested_stream(K: int, Gs: list, N: int, sink: Optional[Sink]) -> Iterator[tuple]:
    offsets = {}
    acc = 0
    for g in Gs:
        offsets[g] = acc
        acc += comb(N, g)
    arrivals: list = []
    for n in range(N):
        fresh = []
        for g in reversed(Gs):
            if n < g - 1:
                continue
            for r in range(comb(n, g), comb(n + 1, g)):
                idx = r + offsets[g]
                if sink is not None:
                    sink(idx, comb_unrank(r, g, N))
                fresh.append(idx)
        for idx in fresh:
            t = len(arrivals)
            arrivals.append(idx)
            for c in _block_order(K - 1, t):
                yield tuple(sorted([arrivals[p] for p in c] + [idx]))
