"""Brute-force tree generators and the proper-tree axiom checker.

Rule sets are passed as tuples of positions into an AncestryMatrix; tree
nodes hold the Rule objects themselves.  Leaf sets are intersected on the
way down instead of in a final pass.
"""

from __future__ import annotations

from typing import Callable, Iterator, Optional, Sequence

from .combgen import perms
from .core import DTree, IndexSet, Leaf, Node, root_region
from .rules import AncestryMatrix, Rule, splits

RuleGen = Callable[[IndexSet], list]


def canon(tree: DTree) -> str:
    """Pre-order serialization; equal strings iff equal trees."""
    if isinstance(tree, Leaf):
        return f"L{tree.indices:x}"
    key = ",".join(str(k) for k in tree.rule.key)
    return f"N({key})[{canon(tree.left)}|{canon(tree.right)}]"


def gen_dts_rec(region: IndexSet, rs: Sequence[int], A: AncestryMatrix) -> Iterator[DTree]:
    """Every proper tree using all of ``rs``, each produced exactly once."""
    rs = tuple(rs)
    if not rs:
        yield Leaf(region)
        return
    for plus, i, minus in splits(rs, A):
        rule = A.rules[i]
        rights = list(gen_dts_rec(region & rule.neg, minus, A))
        for u in gen_dts_rec(region & rule.pos, plus, A):
            for v in rights:
                yield Node(u, rule, v)


def update(r: int, t: DTree, A: AncestryMatrix) -> Optional[DTree]:
    """Insert rule ``r`` at the leaf its ancestry dictates, or None if some node blocks it."""
    rule = A.rules[r]
    if isinstance(t, Leaf):
        return Node(Leaf(t.indices & rule.pos), rule, Leaf(t.indices & rule.neg))
    v = A.rows[A.position(t.rule)][r]
    if v > 0:
        sub = update(r, t.left, A)
        return None if sub is None else Node(sub, t.rule, t.right)
    if v < 0:
        sub = update(r, t.right, A)
        return None if sub is None else Node(t.left, t.rule, sub)
    return None


def gen_dts_vec(region: IndexSet, rs: Sequence[int], A: AncestryMatrix) -> list:
    """Trees over ``rs`` grown by inserting one rule into the trees of the rest; duplicates removed."""
    memo: dict = {}

    def go(sub: tuple) -> list:
        if sub in memo:
            return memo[sub]
        if not sub:
            out = [Leaf(region)]
        else:
            out, seen = [], set()
            for r in sub:
                rest = tuple(x for x in sub if x != r)
                for t in go(rest):
                    nt = update(r, t, A)
                    if nt is not None:
                        c = canon(nt)
                        if c not in seen:
                            seen.add(c)
                            out.append(nt)
        memo[sub] = out
        return out

    return go(tuple(rs))


def gen_dts_kperms(rs: Sequence[int], A: AncestryMatrix, region: IndexSet) -> list:
    """One tree per valid permutation of ``rs`` (duplicates kept)."""
    out = []
    for p in perms(rs):
        t: Optional[DTree] = Leaf(region)
        for r in p:
            t = update(r, t, A)
            if t is None:
                break
        if t is not None:
            out.append(t)
    return out


def depth_candidates(region: IndexSet, rulegen: RuleGen, path: frozenset) -> list:
    """Rules usable at a node: those generated for its region, minus rules already above it."""
    return [r for r in rulegen(region) if r.key not in path]


def gen_dtds_depth(d: int, region: IndexSet, rulegen: RuleGen,
                   path: frozenset = frozenset()) -> Iterator[DTree]:
    """Complete trees of depth ``d``; a node with no usable rule becomes a leaf."""
    if d == 0:
        yield Leaf(region)
        return
    cands = depth_candidates(region, rulegen, path)
    if not cands:
        yield Leaf(region)
        return
    for rule in cands:
        below = path | {rule.key}
        rights = list(gen_dtds_depth(d - 1, region & rule.neg, rulegen, below))
        for u in gen_dtds_depth(d - 1, region & rule.pos, rulegen, below):
            for v in rights:
                yield Node(u, rule, v)


def _relation(ri: Rule, rj: Rule) -> int:
    dm = rj.defining_mask
    if dm & ~ri.pos == 0:
        return 1
    if dm & ~ri.neg == 0:
        return -1
    return 0


def check_proper(tree: DTree, A: Optional[AncestryMatrix] = None,
                 region: Optional[IndexSet] = None) -> bool:
    """True iff ``tree`` satisfies the four proper-tree axioms.

    Leaf sets must be exactly the root region cut by the sides along their
    path; every ancestor/descendant pair must sit on the side the ancestry
    relation prescribes; a rule may not occur twice.
    """
    region = root_region(tree) if region is None else region

    def rel(ri: Rule, rj: Rule) -> int:
        if A is not None:
            return A.rows[A.position(ri)][A.position(rj)]
        return _relation(ri, rj)

    seen: set = set()

    def walk(t: DTree, reg: IndexSet, ancestors: list) -> bool:
        if isinstance(t, Leaf):
            return t.indices == reg
        rule = t.rule
        if not hasattr(rule, "pos") or rule.key in seen:
            return False
        seen.add(rule.key)
        for anc, side in ancestors:
            if rel(anc, rule) != side:
                return False
        return (walk(t.left, reg & rule.pos, ancestors + [(rule, 1)])
                and walk(t.right, reg & rule.neg, ancestors + [(rule, -1)]))

    return walk(tree, region, [])
