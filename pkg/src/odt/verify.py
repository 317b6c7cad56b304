"""Random instances and enumerative oracles used by ``odt verify`` and the tests.

The size oracle deliberately avoids the root-splitting recursion: it walks
every ordered K-selection of rules, grows a tree by sequential insertion and
keeps the cheapest success.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .combgen import kperms
from .core import ZERO_ONE, Dataset, InfeasibleError, Leaf, Objective, evaluate, routing_errors
from .rules import ancestry_matrix, gen_splits_axis, gen_splits_surface, make_rulegen
from .solvers import MinLeafSize, SearchConfig, odt_depth, odt_size
from .trees import gen_dtds_depth, update


def random_dataset(rng: np.random.Generator, n: int, D: int, n_classes: int = 2,
                   integer_grid: Optional[int] = None) -> Dataset:
    """Random points with at least two classes present; ``integer_grid`` makes ties likely."""
    if integer_grid:
        pts = rng.integers(0, integer_grid, size=(n, D)).astype(float)
    else:
        pts = rng.normal(size=(n, D)).round(6)
    while True:
        labs = rng.integers(0, n_classes, size=n)
        if len(set(labs.tolist())) >= min(2, n):
            break
    _, ids = np.unique(labs, return_inverse=True)
    return Dataset(pts, ids)


def size_trees_by_insertion(ds: Dataset, rules, K: int):
    """Every tree reachable by inserting an ordered K-selection of rules one at a time."""
    A = ancestry_matrix(rules)
    for seq in kperms(K, range(len(rules))):
        t = Leaf(ds.full)
        for r in seq:
            t = update(r, t, A)
            if t is None:
                break
        if t is not None:
            yield t


def oracle_size(ds: Dataset, rules, K: int, obj: Objective = ZERO_ONE,
                pred: Optional[Callable] = None):
    best = None
    for t in size_trees_by_insertion(ds, rules, K):
        if pred is not None and not pred(t):
            continue
        c = evaluate(t, ds, obj)
        if best is None or c < best:
            best = c
    return best


def oracle_depth(ds: Dataset, d: int, rulegen, obj: Objective = ZERO_ONE,
                 pred: Optional[Callable] = None):
    best = None
    for t in gen_dtds_depth(d, ds.full, rulegen):
        if pred is not None and not pred(t):
            continue
        c = evaluate(t, ds, obj)
        if best is None or c < best:
            best = c
    return best


@dataclass
class CheckLine:
    index: int
    kind: str
    n: int
    d: int
    param: int
    min_leaf: int
    oracle: object
    solver: object
    ok: bool
    detail: str = ""
    ds: Optional[Dataset] = field(default=None, repr=False)

    def render(self) -> str:
        status = "ok" if self.ok else "MISMATCH"
        extra = f" ({self.detail})" if self.detail else ""
        return (f"instance {self.index:3d} {self.kind:<12} N={self.n} D={self.d} "
                f"param={self.param} min_leaf={self.min_leaf} oracle={self.oracle} "
                f"solver={self.solver} {status}{extra}")


def _solve_cost(fn):
    try:
        res = fn()
    except InfeasibleError:
        return None, None
    return res.cost, res.tree


def check_instance(i: int, rng: np.random.Generator, max_n: int = 8, max_k: int = 3,
                   max_depth: int = 2) -> CheckLine:
    kind = ("size-axis", "size-linear", "depth-axis")[i % 3]
    D = 2 if kind == "size-linear" else int(rng.integers(1, 3))
    n = int(rng.integers(3, max_n + 1))
    grid = 4 if rng.random() < 0.3 else None
    ds = random_dataset(rng, n, D, int(rng.integers(2, 4)), grid)
    min_leaf = int(rng.integers(0, 3)) if rng.random() < 0.3 else 0
    pred = MinLeafSize(min_leaf) if min_leaf else None
    if kind.startswith("size"):
        rules = (gen_splits_axis(ds, dedup=False) if kind == "size-axis"
                 else list(gen_splits_surface(ds, 1)))
        K = int(rng.integers(1, min(max_k, len(rules)) + 1))
        if kind == "size-linear":
            K = min(K, 2)
        param = K
        oracle = oracle_size(ds, rules, K, pred=pred)
        cost, tree = _solve_cost(lambda: odt_size(K, rules, None, ds, cfg=SearchConfig(K=K, min_leaf=min_leaf)))
        thin, _ = _solve_cost(lambda: odt_size(K, rules, None, ds,
                                               cfg=SearchConfig(K=K, min_leaf=min_leaf, thinning="gub")))
    else:
        d = int(rng.integers(1, max_depth + 1))
        param = d
        rg = make_rulegen(ds)
        oracle = oracle_depth(ds, d, rg, pred=pred)
        cost, tree = _solve_cost(lambda: odt_depth(d, None, ds, rg, cfg=SearchConfig(depth=d, min_leaf=min_leaf)))
        thin, _ = _solve_cost(lambda: odt_depth(d, None, ds, rg,
                                                cfg=SearchConfig(depth=d, min_leaf=min_leaf, thinning="gub")))
    ok = cost == oracle and thin == oracle
    detail = ""
    if tree is not None:
        routed = routing_errors(tree, ds)
        if routed != cost:
            ok = False
            detail = f"routing={routed}"
    if thin != oracle:
        detail = (detail + " " if detail else "") + f"thinned={thin}"
    return CheckLine(i, kind, n, D, param, min_leaf, oracle, cost, ok, detail, ds)


def run_verification(seed: int = 0, instances: int = 30, max_n: int = 8, max_k: int = 3,
                     max_depth: int = 2) -> list:
    rng = np.random.default_rng(seed)
    return [check_instance(i, rng, max_n, max_k, max_depth) for i in range(instances)]


def dump_repro(line: CheckLine, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ds = line.ds
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{j + 1}" for j in range(ds.d)] + ["label"])
        for p, lab in zip(ds.points, ds.labels):
            w.writerow([repr(float(v)) for v in p] + [int(lab)])
    return path
