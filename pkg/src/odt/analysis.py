"""Exact search-space censuses and the worst-case counting formulas."""

from __future__ import annotations

import math
from math import comb, factorial
from typing import Optional, Sequence

from .combgen import kcombs
from .core import BudgetExceeded, Dataset, IndexSet
from .geometry import cover_count, surface_arity
from .rules import AncestryMatrix, ancestry_matrix, gen_splits_axis, splits
from .trees import RuleGen, depth_candidates

DEFAULT_BUDGET = 10**7


def catalan(n: int) -> int:
    if n < 0:
        raise ValueError("n must be >= 0")
    return comb(2 * n, n) // (n + 1)


class _Budget:
    def __init__(self, limit: int):
        self.limit, self.used = limit, 0

    def tick(self) -> None:
        self.used += 1
        if self.used > self.limit:
            raise BudgetExceeded(f"census exceeded its budget of {self.limit} steps")


def count_proper_trees(rs: Sequence[int], A: AncestryMatrix, budget: Optional[_Budget] = None) -> int:
    """Number of distinct proper trees using exactly the rules ``rs``."""
    memo: dict = {}

    def go(sub: tuple) -> int:
        if not sub:
            return 1
        hit = memo.get(sub)
        if hit is not None:
            return hit
        if budget is not None:
            budget.tick()
        total = 0
        for plus, _, minus in splits(sub, A):
            left = go(plus)
            if left:
                total += left * go(minus)
        memo[sub] = total
        return total

    return go(tuple(rs))


def census_size_trees(rules: Sequence, A: Optional[AncestryMatrix], K: int,
                      budget: int = DEFAULT_BUDGET) -> int:
    """Distinct proper trees with exactly K rules, summed over all K-subsets of ``rules``."""
    rules = list(rules)
    if len(rules) < K:
        raise ValueError(f"need at least K={K} rules, have {len(rules)}")
    A = ancestry_matrix(rules) if A is None else A
    b = _Budget(budget)
    total = 0
    for c in kcombs(K, len(rules)):
        b.tick()
        total += count_proper_trees(c, A, b)
    return total


def census_depth_trees(ds: Dataset, d: int, rulegen: RuleGen, budget: int = DEFAULT_BUDGET,
                       region: Optional[IndexSet] = None) -> int:
    """Size of the depth-d search space (same semantics as the depth generator)."""
    b = _Budget(budget)
    memo: dict = {}

    def go(depth: int, reg: IndexSet, path: frozenset) -> int:
        if depth == 0:
            return 1
        cands = depth_candidates(reg, rulegen, path)
        if not cands:
            return 1
        key = (depth, reg, frozenset(k for k in path if _defined_inside(k, reg)))
        hit = memo.get(key)
        if hit is not None:
            return hit
        b.tick()
        total = 0
        for r in cands:
            below = path | {r.key}
            total += go(depth - 1, reg & r.pos, below) * go(depth - 1, reg & r.neg, below)
        memo[key] = total
        return total

    return go(d, ds.full if region is None else region, frozenset())


def _defined_inside(key: tuple, region: IndexSet) -> bool:
    pts = (key[2],) if key[0] == "axis" else key[2:]
    return all(region >> p & 1 for p in pts)


def unique_axis_rule_count(ds: Dataset) -> int:
    return len(gen_splits_axis(ds, dedup=True))


def depth_lb(ds: Dataset, d: int) -> int:
    """Every d-subset of distinct axis rules yields at least one depth-d tree."""
    return comb(unique_axis_rule_count(ds), d)


def quant_bnb_probe(reported: int, ds: Dataset, d: int) -> tuple:
    """Compare an externally reported depth-d search-space count with the binomial floor."""
    floor = depth_lb(ds, d)
    ok = reported >= floor
    verdict = "consistent" if ok else "IMPOSSIBLE"
    line = (f"depth={d} reported={reported} floor=C({unique_axis_rule_count(ds)},{d})={floor} "
            f"verdict={verdict}")
    return ok, line


def complexity_report(ds: Dataset, mode: str = "axis", K: Optional[int] = None,
                      d: Optional[int] = None, M: int = 1, budget: int = 10**5) -> list:
    """Rows of (quantity, formula, value) for the instance; measured censuses where affordable."""
    N, D = ds.n, ds.d
    rows = [("N", "points", N), ("D", "dimension", D)]
    if mode == "axis":
        n_rules = N * D
        rows.append(("rules", "N*D", n_rules))
        if K is not None:
            rows.append(("combinations_bound", "(N*D)^K", n_rules**K))
            rows.append(("combinations", "C(N*D,K)", comb(n_rules, K)))
            rows.append(("time_bound", "N*D + K!*N*(N*D)^K", n_rules + factorial(K) * N * n_rules**K))
            rows.append(("binary_feature_term", "K!*Catalan(K)*C(D,K)",
                         factorial(K) * catalan(K) * comb(D, K)))
            rules = gen_splits_axis(ds, dedup=False)
            rows.append(("census_size", "measured", _try(lambda: census_size_trees(rules, None, K, budget))))
    else:
        G = surface_arity(D, M)
        n_rules = comb(N, G)
        rows.append(("G", "C(D+M,D)-1", G))
        rows.append(("rules", "C(N,G)", n_rules))
        if K is not None:
            rows.append(("combinations_bound", "N^(G*K)", N ** (G * K)))
            rows.append(("combinations", "C(C(N,G),K)", comb(n_rules, K)))
            rows.append(("time_bound", "N^(G*K+1)", N ** (G * K + 1)))
    if d is not None:
        rows.append(("depth_lb", "C(|unique axis rules|,d)", depth_lb(ds, d)))
        from .rules import make_rulegen

        rows.append(("census_depth", "measured",
                     _try(lambda: census_depth_trees(ds, d, make_rulegen(ds), budget))))
    rows.append(("cover_count", "2*sum_{i<=D} C(N-1,i)", cover_count(N, D)))
    return rows


def _try(fn):
    try:
        return fn()
    except BudgetExceeded:
        return "budget-exceeded"


def format_tsv(rows: Sequence[Sequence], header: Optional[Sequence[str]] = None) -> str:
    lines = []
    if header:
        lines.append("\t".join(header))
    lines.extend("\t".join(str(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def format_table(rows: Sequence[Sequence], header: Optional[Sequence[str]] = None) -> str:
    allrows = [list(map(str, header))] if header else []
    allrows += [[str(v) for v in r] for r in rows]
    if not allrows:
        return ""
    widths = [max(len(r[i]) for r in allrows) for i in range(len(allrows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in allrows) + "\n"


def log10_or_inf(x: int) -> float:
    return math.log10(x) if x > 0 else -math.inf
