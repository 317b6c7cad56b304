"""Optimal tree solvers.

Both dynamic programs follow the same pattern: try each admissible root in
order, solve the two sides optimally and keep the first strictly better
combination.  Ties therefore resolve to the earliest root, and the outer
size search resolves ties to the lowest combination rank.

Pruning ("thinning") threads an exclusive upper budget through the
recursion: ``solve(..., ub)`` returns the optimal tree when its cost is
below ``ub`` and None otherwise.  Because the optimum is still found
whenever it beats the budget, thinned and unthinned searches return the
same tree, not just the same cost.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from .combgen import comb_rank, comb_unrank, kcombs
from .core import (SQUARED, ZERO_ONE, ContractError, Dataset, DTree, IndexSet, InfeasibleError, Leaf,
                   Node, Objective, check_objective, evaluate, index_array, leaves,
                   to_mask, tree_depth, tree_size)
from .rules import AncestryMatrix, ancestry_matrix, splits
from .trees import RuleGen, depth_candidates, gen_dtds_depth, gen_dts_rec, update

INF = math.inf
THINNING_MODES = ("off", "gub", "similarity", "kmeans")
_FAULT = {"flip": False}


def _inject_fault(on: bool = True) -> None:
    """Test hook: make the size DP send each rule's positive side right."""
    _FAULT["flip"] = on


@dataclass(frozen=True)
class SearchConfig:
    K: Optional[int] = None
    depth: Optional[int] = None
    min_leaf: int = 0
    max_depth: Optional[int] = None
    max_size: Optional[int] = None
    objective: str = "zeroone"
    thinning: str = "off"
    strict: bool = False
    workers: int = 1
    memo: bool = False

    def __post_init__(self):
        if self.K is not None and self.depth is not None:
            raise ValueError("set exactly one of K and depth")
        if self.min_leaf < 0:
            raise ValueError("min_leaf must be >= 0")
        if self.thinning == "fdom":
            raise ValueError("pairwise finite-dominance thinning is not implemented; use gub")
        if self.thinning not in THINNING_MODES:
            raise ValueError(f"thinning must be one of {THINNING_MODES}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class Bound:
    lb: float
    ub: float = INF
    provenance: str = ""
    experimental: bool = False

    def __post_init__(self):
        if math.isfinite(self.ub) and self.lb > self.ub:
            raise ValueError(f"lower bound {self.lb} exceeds upper bound {self.ub}")


@dataclass
class SolveResult:
    tree: DTree
    cost: float
    rules: tuple = ()
    rank: int = -1
    stats: dict = field(default_factory=dict)


# ------------------------------------------------------------------ selection


def min_e(candidates: Iterable[DTree], ds: Dataset, obj: Objective = ZERO_ONE) -> DTree:
    """First candidate with minimal objective."""
    best, best_cost = None, INF
    for t in candidates:
        c = evaluate(t, ds, obj)
        if best is None or c < best_cost:
            best, best_cost = t, c
    if best is None:
        raise InfeasibleError("no feasible tree")
    return best


def thin_gub(candidates: Iterable, lb: Callable[[object], float],
             incumbent: Callable[[], float], counter: Optional[dict] = None) -> Iterator:
    """Drop candidates whose lower bound already meets the running incumbent."""
    for c in candidates:
        if lb(c) >= incumbent():
            if counter is not None:
                counter["pruned"] = counter.get("pruned", 0) + 1
            continue
        yield c


# --------------------------------------------------------------------- bounds


def kmeans_1d(k: int, ys: Sequence[float]) -> float:
    """Minimal within-cluster sum of squares for k clusters of the reals ``ys``."""
    ys = np.sort(np.asarray(ys, dtype=float))
    n = ys.size
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")
    s1 = np.concatenate([[0.0], np.cumsum(ys)])
    s2 = np.concatenate([[0.0], np.cumsum(ys * ys)])

    def sse(i, j):  # ys[i:j]
        m = j - i
        return max(0.0, (s2[j] - s2[i]) - (s1[j] - s1[i]) ** 2 / m)

    prev = [sse(0, j) if j else 0.0 for j in range(n + 1)]
    for c in range(2, k + 1):
        cur = [INF] * (n + 1)
        for j in range(c, n + 1):
            cur[j] = min(prev[i] + sse(i, j) for i in range(c - 1, j))
        prev = cur
    return float(prev[n])


def kmeans_lb(K: int, ys: Sequence[float]) -> Bound:
    """A K-rule regression tree has K+1 leaves, so its SSE is at least kmeans_1d(K+1)."""
    n = len(ys)
    if n == 0 or K + 1 >= n:
        return Bound(0.0, provenance="kmeans")
    return Bound(kmeans_1d(K + 1, ys), provenance="kmeans")


def similarity_lb(ref: IndexSet, query: IndexSet, ref_opt_cost: float) -> Bound:
    """Bound from a solved neighbouring region; rests on an unproven assumption."""
    return Bound(max(0.0, ref_opt_cost - (ref & ~query).bit_count()),
                 provenance="similarity", experimental=True)


class _LowerBounds:
    """Region lower bounds; ``leaves`` is the most leaves a subtree may have."""

    def __init__(self, ds: Dataset, obj: Objective, mode: str):
        self.ds, self.obj, self.mode = ds, obj, mode
        self._cache: dict = {}
        groups: dict = {}
        for i, p in enumerate(ds.points):
            groups.setdefault(p.tobytes(), []).append(i)
        self.conflicts = []
        for members in groups.values():
            if len(members) > 1 and len(set(ds.labels[members].tolist())) > 1:
                self.conflicts.append(to_mask(members))

    def duplicates(self, region: IndexSet) -> float:
        # points with identical features always share a leaf
        total = 0
        for g in self.conflicts:
            part = g & region
            if part:
                total += self.obj.leaf_cost(part, self.ds)
        return total

    def __call__(self, region: IndexSet, leaves: int) -> float:
        if self.mode == "off" or not region:
            return 0.0
        key = (region, leaves if self.mode == "kmeans" else 0)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        val = self.duplicates(region)
        if self.mode == "kmeans":
            ys = self.ds.labels[index_array(region)]
            km = kmeans_lb(max(leaves, 1) - 1, ys).lb
            val = max(val, km - 1e-9 * (1.0 + abs(km)))
        self._cache[key] = val
        return val


def _make_bounds(ds: Dataset, obj: Objective, mode: str) -> _LowerBounds:
    if mode != "off" and obj not in (ZERO_ONE, SQUARED):
        raise ContractError("thinning bounds are defined for the built-in 0-1 and squared losses")
    if mode == "kmeans" and (ds.task != "regression" or obj is not SQUARED):
        raise ContractError("the k-means bound applies to squared loss on regression targets")
    if mode == "similarity" and ds.task != "classification":
        raise ContractError("the similarity bound applies to 0-1 loss")
    return _LowerBounds(ds, obj, mode)


class MemoCache:
    """Solved-subproblem store with hit/miss counters."""

    def __init__(self):
        self.store: dict = {}
        self.hits = 0
        self.misses = 0

    def get(self, key):
        val = self.store.get(key)
        if val is None:
            self.misses += 1
        else:
            self.hits += 1
        return val

    def put(self, key, value) -> None:
        self.store[key] = value

    @property
    def hit_rate(self) -> float:
        total = self.hits + self.misses
        return self.hits / total if total else 0.0

    def report(self) -> dict:
        return {"hits": self.hits, "misses": self.misses, "hit_rate": self.hit_rate,
                "entries": len(self.store)}


_INFEASIBLE = ("infeasible",)


# -------------------------------------------------------------- constraints


@dataclass(frozen=True)
class MinLeafSize:
    n: int

    def __call__(self, tree: DTree) -> bool:
        return all(lf.indices.bit_count() >= self.n for lf in leaves(tree))


@dataclass(frozen=True)
class MaxDepth:
    d: int

    def __call__(self, tree: DTree) -> bool:
        return tree_depth(tree) <= self.d


@dataclass(frozen=True)
class MaxSize:
    k: int

    def __call__(self, tree: DTree) -> bool:
        return tree_size(tree) <= self.k


@dataclass(frozen=True)
class AllOf:
    preds: tuple

    def __call__(self, tree: DTree) -> bool:
        return all(p(tree) for p in self.preds)


def _split_predicate(pred) -> tuple:
    """Separate the built-in constraints (handled exactly) from custom ones."""
    min_leaf, max_depth, max_size, custom = 0, None, None, []
    items = pred.preds if isinstance(pred, AllOf) else ((pred,) if pred is not None else ())
    for p in items:
        if isinstance(p, MinLeafSize):
            min_leaf = max(min_leaf, p.n)
        elif isinstance(p, MaxDepth):
            max_depth = p.d if max_depth is None else min(max_depth, p.d)
        elif isinstance(p, MaxSize):
            max_size = p.k if max_size is None else min(max_size, p.k)
        elif isinstance(p, AllOf):
            a, b, c, d = _split_predicate(p)
            min_leaf = max(min_leaf, a)
            max_depth = b if max_depth is None else (max_depth if b is None else min(max_depth, b))
            max_size = c if max_size is None else (max_size if c is None else min(max_size, c))
            custom.extend(d)
        else:
            custom.append(p)
    return min_leaf, max_depth, max_size, custom


def _subtrees(t: DTree) -> Iterator[DTree]:
    yield t
    if isinstance(t, Node):
        yield from _subtrees(t.left)
        yield from _subtrees(t.right)


def check_prefix_closed(pred: Callable[[DTree], bool], samples: Iterable[DTree], limit: int = 500) -> None:
    """Raise ContractError if ``pred`` holds on a sampled tree but fails on one of its subtrees."""
    for n, t in enumerate(samples):
        if n >= limit:
            break
        if pred(t):
            for s in _subtrees(t):
                if not pred(s):
                    raise ContractError("predicate is not prefix-closed: "
                                        "it accepts a tree but rejects one of its subtrees")


def _custom_ok(custom: list, t: DTree) -> bool:
    return all(p(t) for p in custom)


# ------------------------------------------------------------------ size DP


class _SizeSearch:
    def __init__(self, ds: Dataset, obj: Objective, A: AncestryMatrix, min_leaf: int = 0,
                 thinning: str = "off", memo: Optional[MemoCache] = None, custom: Sequence = ()):
        self.ds, self.obj, self.A = ds, obj, A
        self.min_leaf = min_leaf
        self.thin = thinning != "off"
        self.lb = _make_bounds(ds, obj, thinning)
        self.memo = memo
        self.custom = list(custom)
        self._leaf_cost: dict = {}
        self.nodes = 0

    def leaf(self, region: IndexSet, ub: float):
        if region.bit_count() < self.min_leaf:
            return None
        t = Leaf(region)
        if self.custom and not _custom_ok(self.custom, t):
            return None
        c = self._leaf_cost.get(region)
        if c is None:
            c = self.obj.leaf_cost(region, self.ds)
            self._leaf_cost[region] = c
        return (c, t) if c < ub else None

    def solve(self, region: IndexSet, rs: tuple, depth_left: Optional[int], ub: float = INF):
        """Optimal tree over exactly the rules ``rs``, or None (infeasible or not below ``ub``)."""
        self.nodes += 1
        if not rs:
            return self.leaf(region, ub)
        if depth_left is not None and depth_left <= 0:
            return None
        key = None
        if self.memo is not None:
            key = (region, rs, depth_left)
            hit = self.memo.get(key)
            if hit is not None:
                if hit is _INFEASIBLE:
                    return None
                return hit if hit[0] < ub else None
        nd = None if depth_left is None else depth_left - 1
        best = None
        bound = ub
        g = self.obj.combine
        for plus, i, minus in splits(rs, self.A):
            rule = self.A.rules[i]
            pos, neg = (rule.neg, rule.pos) if _FAULT["flip"] else (rule.pos, rule.neg)
            pr, nr = region & pos, region & neg
            if self.thin:
                lb_r = self.lb(nr, len(minus) + 1)
                if self.lb(pr, len(plus) + 1) + lb_r >= bound:
                    continue
                left = self.solve(pr, plus, nd, bound - lb_r)
                if left is None:
                    continue
                right = self.solve(nr, minus, nd, bound - left[0])
            else:
                left = self.solve(pr, plus, nd)
                if left is None:
                    continue
                right = self.solve(nr, minus, nd)
            if right is None:
                continue
            cost = g(left[0], right[0])
            if cost < bound:
                t = Node(left[1], rule, right[1])
                if self.custom and not _custom_ok(self.custom, t):
                    continue
                best = (cost, t)
                bound = cost
        if self.memo is not None:
            if best is not None:
                self.memo.put(key, best)
            elif ub == INF:
                self.memo.put(key, _INFEASIBLE)
        return best


def sodt_rec(region: IndexSet, rs: Sequence[int], A: AncestryMatrix, ds: Dataset,
             obj: Objective = ZERO_ONE, *, min_leaf: int = 0, max_depth: Optional[int] = None,
             thinning: str = "off", memo: Optional[MemoCache] = None) -> Optional[DTree]:
    """Optimal proper tree using exactly the rules ``rs``; None when no such tree exists."""
    check_objective(obj)
    res = _SizeSearch(ds, obj, A, min_leaf, thinning, memo).solve(region, tuple(rs), max_depth)
    return None if res is None else res[1]


def sodt_filt(region: IndexSet, rs: Sequence[int], A: AncestryMatrix, ds: Dataset,
              obj: Objective, pred, thinning: str = "off") -> Optional[DTree]:
    """Optimal tree over ``rs`` among those satisfying the prefix-closed ``pred``.

    Minimum leaf size, maximum depth and maximum size are carried as exact
    recursion state.  Any other predicate is applied to every candidate
    subtree as it is assembled, which is exact for predicates that decompose
    over the two children.
    """
    check_objective(obj)
    min_leaf, max_depth, max_size, custom = _split_predicate(pred)
    rs = tuple(rs)
    if max_size is not None and len(rs) > max_size:
        return None
    if custom:
        for p in custom:
            check_prefix_closed(p, gen_dts_rec(region, rs, A))
    res = _SizeSearch(ds, obj, A, min_leaf, thinning, custom=custom).solve(region, rs, max_depth)
    return None if res is None else res[1]


# -------------------------------------------------------------- size outer loop


def _size_chunk(ds, obj, rules, A, cfg, start, stop, incumbent=INF):
    """Best (cost, rank) over combinations with ranks in [start, stop)."""
    memo = MemoCache() if cfg.memo else None
    search = _SizeSearch(ds, obj, A, cfg.min_leaf, cfg.thinning, memo)
    K = cfg.K
    full = ds.full
    stats = {"combinations": 0, "pruned": 0, "feasible": 0}
    state = {"best": incumbent}
    root_lb = search.lb(full, K + 1)
    combos = enumerate(kcombs(K, len(rules), start, stop), start=start)
    if search.thin:
        combos = thin_gub(combos, lambda _c: root_lb, lambda: state["best"], stats)
    best_rank = -1
    for rank, c in combos:
        stats["combinations"] += 1
        res = search.solve(full, c, cfg.max_depth, state["best"] if search.thin else INF)
        if res is None:
            continue
        stats["feasible"] += 1
        if res[0] < state["best"]:
            state["best"], best_rank = res[0], rank
    stats["nodes"] = search.nodes
    if memo is not None:
        stats["memo_hits"], stats["memo_misses"] = memo.hits, memo.misses
    return state["best"], best_rank, stats


def _size_chunk_star(args):
    return _size_chunk(*args)


def _merge_stats(parts: Iterable[dict]) -> dict:
    out: dict = {}
    for p in parts:
        for k, v in p.items():
            out[k] = out.get(k, 0) + v
    return out


def odt_size(K: int, rules: Sequence, A: Optional[AncestryMatrix], ds: Dataset,
             obj: Objective = ZERO_ONE, cfg: Optional[SearchConfig] = None) -> SolveResult:
    """Optimal proper tree with exactly K rules drawn from ``rules``.

    Each K-combination (in revolving-door rank order) is solved by the size
    DP; the lowest-cost, then lowest-rank, combination wins.  With several
    workers the rank range is split into contiguous chunks and reduced in
    rank order, so the answer does not depend on the worker count.
    """
    cfg = SearchConfig(K=K) if cfg is None else cfg
    if cfg.K != K:
        cfg = SearchConfig(**{**cfg.__dict__, "K": K, "depth": None})
    check_objective(obj)
    rules = list(rules)
    if K < 0 or len(rules) < K:
        raise ValueError(f"need at least K={K} rules, have {len(rules)}")
    A = ancestry_matrix(rules) if A is None else A
    total = comb(len(rules), K)
    if cfg.workers <= 1 or total < 2 * cfg.workers:
        parts = [_size_chunk(ds, obj, rules, A, cfg, 0, total)]
    else:
        n_chunks = min(total, cfg.workers * 4)
        edges = [total * i // n_chunks for i in range(n_chunks + 1)]
        jobs = [(ds, obj, rules, A, cfg, a, b) for a, b in zip(edges, edges[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_size_chunk_star, jobs))
    found = [(cost, rank) for cost, rank, _ in parts if rank >= 0]
    best_rank = min(found)[1] if found else -1
    stats = _merge_stats(p[2] for p in parts)
    stats["total_combinations"] = total
    if best_rank < 0:
        raise InfeasibleError(f"no feasible tree with {K} rules under the given constraints")
    # rebuild the winner here so the tree references this process's rule objects
    combo = comb_unrank(best_rank, K, len(rules))
    search = _SizeSearch(ds, obj, A, cfg.min_leaf)
    cost, tree = search.solve(ds.full, combo, cfg.max_depth)
    return SolveResult(tree, cost, tuple(rules[i].id for i in combo), best_rank, stats)


def odt_size_nested(K: int, ds: Dataset, Ms: Sequence[int], obj: Objective = ZERO_ONE,
                    cfg: Optional[SearchConfig] = None) -> SolveResult:
    """Sequential size search fed by the nested-combination stream.

    Rules are fitted by the stream's sink as their defining combinations
    appear, so no rule list is materialized up front.  Produces the same
    answer as :func:`odt_size` on the corresponding surface rule list.
    """
    from .rules import surface_rule_table

    cfg = SearchConfig(K=K) if cfg is None else cfg
    stats: dict = {"degenerate": 0}
    table, stream = surface_rule_table(ds, Ms, K, cfg.strict, stats)
    best = None
    for idxs in stream:
        rs = [table[i] for i in idxs]
        if any(r is None for r in rs):
            continue
        A = ancestry_matrix(rs)
        search = _SizeSearch(ds, obj, A, cfg.min_leaf)
        res = search.solve(ds.full, tuple(range(K)), cfg.max_depth)
        if res is None:
            continue
        rank = comb_rank(idxs)
        if best is None or (res[0], rank) < (best.cost, best.rank):
            best = SolveResult(res[1], res[0], tuple(idxs), rank)
    if best is None:
        raise InfeasibleError(f"no feasible tree with {K} rules")
    best.stats = stats
    return best


# ----------------------------------------------------------------- depth DP


def _key_mask(key: tuple) -> IndexSet:
    return 1 << key[2] if key[0] == "axis" else to_mask(key[2:])


class _DepthSearch:
    def __init__(self, ds: Dataset, obj: Objective, rulegen: RuleGen, min_leaf: int = 0,
                 thinning: str = "off", memo: Optional[MemoCache] = None, custom: Sequence = ()):
        self.ds, self.obj, self.rulegen = ds, obj, rulegen
        self.min_leaf = min_leaf
        self.thin = thinning != "off"
        self.similarity = thinning == "similarity"
        self.lb = _make_bounds(ds, obj, thinning)
        self.memo = memo
        self.custom = list(custom)
        self.solved: dict = {}
        self.nodes = 0

    def region_lb(self, region: IndexSet, d: int) -> float:
        base = self.lb(region, 1 << min(d, 30))
        if self.similarity:
            for ref, cost in self.solved.get(d, ()):
                base = max(base, similarity_lb(ref, region, cost).lb)
        return base

    def leaf(self, region: IndexSet, ub: float):
        if region.bit_count() < self.min_leaf:
            return None
        t = Leaf(region)
        if self.custom and not _custom_ok(self.custom, t):
            return None
        c = self.obj.leaf_cost(region, self.ds)
        return (c, t) if c < ub else None

    def solve(self, d: int, region: IndexSet, path: frozenset, size_left: Optional[int],
              cap: Optional[int], ub: float = INF):
        """Optimal tree of the depth-d space below ``path``; None if infeasible or not below ``ub``."""
        self.nodes += 1
        cands = depth_candidates(region, self.rulegen, path) if d > 0 else []
        if not cands:
            return self.leaf(region, ub)
        if (size_left is not None and size_left <= 0) or (cap is not None and cap <= 0):
            return None
        key = None
        if self.memo is not None:
            blocked = frozenset(k for k in path if _key_mask(k) & ~region == 0)
            key = (region, d, blocked, size_left, cap)
            hit = self.memo.get(key)
            if hit is not None:
                if hit is _INFEASIBLE:
                    return None
                return hit if hit[0] < ub else None
        ncap = None if cap is None else cap - 1
        budgets = [None] if size_left is None else range(size_left)
        best = None
        bound = ub
        g = self.obj.combine
        for rule in cands:
            below = path | {rule.key}
            pr, nr = region & rule.pos, region & rule.neg
            if self.thin:
                lb_r = self.region_lb(nr, d - 1)
                if self.region_lb(pr, d - 1) + lb_r >= bound:
                    continue
            for s1 in budgets:
                s2 = None if s1 is None else size_left - 1 - s1
                if self.thin:
                    left = self.solve(d - 1, pr, below, s1, ncap, bound - lb_r)
                    if left is None:
                        continue
                    right = self.solve(d - 1, nr, below, s2, ncap, bound - left[0])
                else:
                    left = self.solve(d - 1, pr, below, s1, ncap)
                    if left is None:
                        continue
                    right = self.solve(d - 1, nr, below, s2, ncap)
                if right is None:
                    continue
                cost = g(left[0], right[0])
                if cost < bound:
                    t = Node(left[1], rule, right[1])
                    if self.custom and not _custom_ok(self.custom, t):
                        continue
                    best = (cost, t)
                    bound = cost
        if best is not None and self.similarity:
            bucket = self.solved.setdefault(d, [])
            if len(bucket) < 256:
                bucket.append((region, best[0]))
        if self.memo is not None:
            if best is not None:
                self.memo.put(key, best)
            elif ub == INF:
                self.memo.put(key, _INFEASIBLE)
        return best


def odt_depth(d: int, region: Optional[IndexSet], ds: Dataset, rulegen: RuleGen,
              obj: Objective = ZERO_ONE, cfg: Optional[SearchConfig] = None) -> SolveResult:
    """Optimal tree over the depth-d space; rules are regenerated for every region."""
    cfg = SearchConfig(depth=d) if cfg is None else cfg
    check_objective(obj)
    if d < 0:
        raise ValueError("depth must be >= 0")
    region = ds.full if region is None else region
    memo = MemoCache() if cfg.memo else None
    search = _DepthSearch(ds, obj, rulegen, cfg.min_leaf, cfg.thinning, memo)
    res = search.solve(d, region, frozenset(), cfg.max_size, cfg.max_depth)
    if res is None:
        raise InfeasibleError(f"no feasible depth-{d} tree under the given constraints")
    stats = {"nodes": search.nodes}
    if memo is not None:
        stats["memo_hits"], stats["memo_misses"] = memo.hits, memo.misses
    return SolveResult(res[1], res[0], stats=stats)


def odt_depth_filt(d: int, region: Optional[IndexSet], ds: Dataset, rulegen: RuleGen,
                   obj: Objective, pred, thinning: str = "off") -> Optional[DTree]:
    """Depth search restricted to trees satisfying the prefix-closed ``pred``; None if none does."""
    check_objective(obj)
    region = ds.full if region is None else region
    min_leaf, max_depth, max_size, custom = _split_predicate(pred)
    if custom:
        for p in custom:
            check_prefix_closed(p, gen_dtds_depth(d, region, rulegen))
    search = _DepthSearch(ds, obj, rulegen, min_leaf, thinning, custom=custom)
    res = search.solve(d, region, frozenset(), max_size, max_depth)
    return None if res is None else res[1]


# ------------------------------------------------------- monotonicity search


def monotonicity_counterexample(seed: int = 0, trials: int = 2000, max_n: int = 7,
                                K: int = 3) -> Optional[dict]:
    """Search for trees t, t' over the same rules with E(t) <= E(t') but
    E(update(r, t)) > E(update(r, t')): evidence that sequential insertion
    cannot keep only the best partial tree.
    """
    from .rules import gen_splits_axis

    rng = np.random.default_rng(seed)
    for _ in range(trials):
        n = int(rng.integers(4, max_n + 1))
        D = int(rng.integers(1, 3))
        pts = rng.integers(0, 6, size=(n, D)).astype(float)
        labs = rng.integers(0, 2, size=n)
        if len(set(labs.tolist())) < 2:
            continue
        ds = Dataset(pts, np.unique(labs, return_inverse=True)[1])
        rules = gen_splits_axis(ds, dedup=False)
        if len(rules) < K:
            continue
        pick = rng.choice(len(rules), size=K, replace=False)
        A = ancestry_matrix([rules[i] for i in pick])
        base, r = tuple(range(K - 1)), K - 1
        trees = list(gen_dts_rec(ds.full, base, A))
        scored = [(evaluate(t, ds), t) for t in trees]
        for ct, t in scored:
            ut = update(r, t, A)
            if ut is None:
                continue
            for ct2, t2 in scored:
                if t2 is t or ct > ct2:
                    continue
                ut2 = update(r, t2, A)
                if ut2 is None:
                    continue
                if evaluate(ut, ds) > evaluate(ut2, ds):
                    return {"points": pts.tolist(), "labels": ds.labels.tolist(),
                            "rules": [A.rules[i].to_dict() for i in range(K)],
                            "base": list(base), "added": r, "t": t, "t_prime": t2,
                            "cost_t": ct, "cost_t_prime": ct2,
                            "cost_updated_t": evaluate(ut, ds), "cost_updated_t_prime": evaluate(ut2, ds),
                            "ds": ds, "A": A}
    return None
