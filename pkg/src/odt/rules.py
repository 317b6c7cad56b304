"""Splitting rules, their generators and the ancestry relation between them."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from math import comb
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from . import geometry as geo
from .combgen import kcombs, nested_combs_mixed
from .core import Dataset, IndexSet, SchemaError, bits, to_mask


@dataclass(frozen=True, eq=False)
class Rule:
    """One splitting rule.  ``pos``/``neg`` are global index sets; ``defining`` lies in ``pos``."""

    id: int
    kind: str
    defining: tuple
    pos: IndexSet
    neg: IndexSet
    dim: int = -1
    threshold: float = float("nan")
    surface: Optional[geo.Hypersurface] = None
    rank: int = -1

    @property
    def defining_mask(self) -> IndexSet:
        return to_mask(self.defining)

    @property
    def degree(self) -> int:
        return 0 if self.kind == "axis" else self.surface.degree

    @property
    def key(self) -> tuple:
        """Identity independent of where the rule sits in a particular list."""
        if self.kind == "axis":
            return ("axis", self.dim, self.defining[0])
        return ("surface", self.surface.degree) + tuple(self.defining)

    def side_of(self, x) -> int:
        if self.kind == "axis":
            return 1 if x[self.dim] >= self.threshold else -1
        return geo.side_of(self.surface, x)

    def describe(self) -> str:
        if self.kind == "axis":
            return f"x{self.dim + 1} >= {self.threshold:g}"
        terms = []
        for coef, name in zip(self.surface.normal, self.surface.basis.names()):
            if coef != 0.0:
                terms.append(f"{coef:+.4g}" + ("" if name == "1" else f"*{name}"))
        return " ".join(terms) + " >= 0"

    def to_dict(self) -> dict:
        out = {"id": self.id, "kind": self.kind, "defining": list(self.defining)}
        if self.kind == "axis":
            out.update(dim=self.dim, threshold=self.threshold)
        else:
            out.update(degree=self.surface.degree, normal=list(self.surface.normal))
        out["text"] = self.describe()
        return out

    def __repr__(self) -> str:
        return f"Rule({self.id}, {self.describe()!r})"


def rule_from_dict(d: dict, ds: Dataset) -> Rule:
    """Rebuild a rule from its exported form, recomputing sides on ``ds``."""
    defining = tuple(int(i) for i in d["defining"])
    if d["kind"] == "axis":
        dim, thr = int(d["dim"]), float(d["threshold"])
        pos = to_mask(np.flatnonzero(ds.points[:, dim] >= thr))
        return Rule(int(d["id"]), "axis", defining, pos, ds.full & ~pos, dim, thr)
    basis = geo.monomials(ds.d, int(d["degree"]))
    h = geo.Hypersurface(int(d["degree"]), tuple(float(v) for v in d["normal"]), defining, basis)
    pos, neg = geo.assign_sides(h, ds)
    return Rule(int(d["id"]), "surface", defining, pos, neg, surface=h)


# ---------------------------------------------------------------- generators


def _axis_masks(ds: Dataset) -> np.ndarray:
    """masks[p][dim] = index set of points with x_dim >= x_{p,dim}."""
    out = np.empty((ds.n, ds.d), dtype=object)
    for dim in range(ds.d):
        col = ds.points[:, dim]
        for p in range(ds.n):
            out[p, dim] = to_mask(np.flatnonzero(col >= col[p]))
    return out


def gen_splits_axis(ds: Dataset, region: Optional[IndexSet] = None, dedup: bool = True) -> list:
    """Threshold rules ``x_dim >= x_{p,dim}`` for every point p in ``region`` and every dim.

    With ``dedup`` the rules whose partitions of ``region`` coincide are merged,
    keeping the lowest (point, dim).  Without it all N*D rules are kept: two
    rules on the same threshold but with different defining points have
    different ancestry relations, so they are not interchangeable in
    size-constrained search.
    """
    region = ds.full if region is None else region
    masks = _axis_masks(ds)
    seen = set()
    out = []
    for p in bits(region):
        for dim in range(ds.d):
            pos = masks[p, dim]
            if dedup:
                part = pos & region
                if part in seen:
                    continue
                seen.add(part)
            out.append(Rule(len(out), "axis", (p,), pos, ds.full & ~pos, dim,
                            float(ds.points[p, dim]), rank=p * ds.d + dim))
    return out


def gen_splits_surface(ds: Dataset, M: int, region: Optional[IndexSet] = None,
                       strict: bool = False, stats: Optional[dict] = None) -> Iterator[Rule]:
    """One degree-M rule per G-combination of points in ``region``, in rank order.

    Rule ids are the combination ranks over the region's points (over the whole
    dataset when no region is given).  Degenerate combinations are skipped and
    counted in ``stats['degenerate']`` unless ``strict``.
    """
    if M < 1:
        raise ValueError("degree 0 rules come from gen_splits_axis")
    region = ds.full if region is None else region
    basis = geo.monomials(ds.d, M)
    G = basis.size - 1
    pts = list(bits(region))
    for rank, c in enumerate(kcombs(G, len(pts))):
        idx = tuple(pts[i] for i in c)
        try:
            h = geo.fit_hypersurface(idx, ds, basis)
        except geo.DegenerateCombinationError:
            if strict:
                raise
            if stats is not None:
                stats["degenerate"] = stats.get("degenerate", 0) + 1
            continue
        pos, neg = geo.assign_sides(h, ds)
        yield Rule(rank, "surface", idx, pos, neg, surface=h, rank=rank)


def degree_arities(D: int, Ms: Sequence[int]) -> list:
    """Points per rule for each degree, validating that surface degrees ascend strictly."""
    Ms = list(Ms)
    if any(b <= a for a, b in zip(Ms, Ms[1:])):
        raise SchemaError(f"degrees must be strictly ascending: {Ms}")
    return [geo.surface_arity(D, m) for m in Ms]


def gen_splits_mixed(ds: Dataset, Ms: Sequence[int], region: Optional[IndexSet] = None,
                     strict: bool = False, stats: Optional[dict] = None,
                     dedup_axis: bool = False) -> Iterator[Rule]:
    """Disjoint union of the per-degree rule sets; ids are block offset plus local id.

    Degree 0 forms its own block of N*D axis rules and comes first; surface
    blocks follow in ascending degree, each of size C(N, G).
    """
    degree_arities(ds.d, Ms)
    region = ds.full if region is None else region
    n = region.bit_count()
    offset = 0
    for m in Ms:
        if m == 0:
            block = gen_splits_axis(ds, region, dedup=dedup_axis)
            size = len(block) if dedup_axis else n * ds.d
        else:
            block = gen_splits_surface(ds, m, region, strict, stats)
            size = comb(n, geo.surface_arity(ds.d, m))
        for r in block:
            yield Rule(r.id + offset, r.kind, r.defining, r.pos, r.neg, r.dim, r.threshold,
                       r.surface, r.rank + offset)
        offset += size


def make_rulegen(ds: Dataset, Ms: Sequence[int] = (0,), strict: bool = False,
                 stats: Optional[dict] = None):
    """Per-region rule generator for depth-constrained search (a pure function of the region)."""
    Ms = tuple(Ms)
    cache: dict = {}

    def rulegen(region: IndexSet) -> list:
        hit = cache.get(region)
        if hit is None:
            if Ms == (0,):
                hit = gen_splits_axis(ds, region, dedup=True)
            else:
                n = region.bit_count()
                usable = tuple(m for m in Ms if geo.surface_arity(ds.d, m) <= n)
                hit = list(gen_splits_mixed(ds, usable, region, strict, stats, dedup_axis=True)) if usable else []
            if len(cache) < 200_000:
                cache[region] = hit
        return hit

    return rulegen


def surface_rule_table(ds: Dataset, Ms: Sequence[int], K: int, strict: bool = False,
                       stats: Optional[dict] = None):
    """Stream K-sets of rules the way the nested generator produces them.

    Returns ``(table, stream)``: the stream yields tuples of global inner
    indices and ``table`` maps each index to its Rule (or None when the
    combination was degenerate) and is filled by the generator's sink before
    any tuple referencing that index is emitted.
    """
    if any(m < 1 for m in Ms):
        raise ValueError("nested streaming covers surface degrees only")
    arities = degree_arities(ds.d, Ms)
    offsets, acc = {}, 0
    for g in arities:
        offsets[g] = acc
        acc += comb(ds.n, g)
    bases = {g: geo.monomials(ds.d, m) for g, m in zip(arities, Ms)}
    table: dict = {}

    def sink(idx: int, c: tuple) -> None:
        g = len(c)
        try:
            h = geo.fit_hypersurface(c, ds, bases[g])
        except geo.DegenerateCombinationError:
            if strict:
                raise
            if stats is not None:
                stats["degenerate"] = stats.get("degenerate", 0) + 1
            table[idx] = None
            return
        pos, neg = geo.assign_sides(h, ds)
        table[idx] = Rule(idx, "surface", c, pos, neg, surface=h, rank=idx)

    return table, nested_combs_mixed(K, arities, ds.n, sink)


# ---------------------------------------------------------------- ancestry


class AncestryMatrix:
    """Pairwise relation between rules: +1 if rule j's defining points all lie
    on the positive side of rule i, -1 if all on the negative side, else 0.

    Indexed by position in ``rules``.
    """

    def __init__(self, rules: Iterable[Rule]):
        self.rules = list(rules)
        k = len(self.rules)
        dm = [r.defining_mask for r in self.rules]
        rows = []
        for i, ri in enumerate(self.rules):
            row = [0] * k
            for j in range(k):
                if j == i:
                    continue
                if dm[j] & ~ri.pos == 0:
                    row[j] = 1
                elif dm[j] & ~ri.neg == 0:
                    row[j] = -1
            rows.append(row)
        self.rows = rows
        self._index = {id(r): p for p, r in enumerate(self.rules)}

    def __len__(self) -> int:
        return len(self.rules)

    def __getitem__(self, ij) -> int:
        i, j = ij
        return self.rows[i][j]

    def array(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int8).reshape(len(self), len(self))

    def position(self, rule: Rule) -> int:
        p = self._index.get(id(rule))
        if p is not None and self.rules[p] is rule:
            return p
        for p, r in enumerate(self.rules):
            if r.key == rule.key:
                return p
        raise KeyError(rule)


def ancestry_matrix(rules: Iterable[Rule]) -> AncestryMatrix:
    return AncestryMatrix(rules)


def splits(rs: Sequence[int], A: AncestryMatrix) -> list:
    """Feasible roots of a rule set with the rules forced onto each side.

    Returns ``(positive_side, root, negative_side)`` triples; a candidate root
    is dropped when some other rule in ``rs`` may descend into neither side.
    """
    out = []
    rows = A.rows
    for i in rs:
        row = rows[i]
        plus, minus = [], []
        for j in rs:
            if j == i:
                continue
            v = row[j]
            if v > 0:
                plus.append(j)
            elif v < 0:
                minus.append(j)
            else:
                break
        else:
            out.append((tuple(plus), i, tuple(minus)))
    return out


# ---------------------------------------------------------------- bitset cache

_MAGIC = b"ODTR"
_VERSION = 1


def rule_cache_path(cache_dir, ds: Dataset, degree) -> Path:
    tag = "-".join(str(m) for m in degree) if isinstance(degree, (list, tuple)) else str(degree)
    return Path(cache_dir) / f"{ds.digest[:16]}_deg{tag}.bin"


def _pack(mask: int) -> bytes:
    raw = mask.to_bytes((mask.bit_length() + 7) // 8, "little")
    return struct.pack("<I", len(raw)) + raw


def write_rule_cache(path, rules: Sequence[Rule], n: int) -> None:
    """Little-endian, length-prefixed (pos, neg) bitsets, one pair per rule."""
    chunks = [_MAGIC, struct.pack("<III", _VERSION, n, len(rules))]
    for r in rules:
        chunks.append(_pack(r.pos))
        chunks.append(_pack(r.neg))
    Path(path).write_bytes(b"".join(chunks))


def read_rule_cache(path) -> tuple:
    """Return ``(n, [(pos, neg), ...])``."""
    data = Path(path).read_bytes()
    if data[:4] != _MAGIC:
        raise ValueError(f"{path}: not a rule cache")
    version, n, count = struct.unpack_from("<III", data, 4)
    if version != _VERSION:
        raise ValueError(f"{path}: unsupported cache version {version}")
    off = 16
    out = []
    for _ in range(count):
        pair = []
        for _side in range(2):
            (ln,) = struct.unpack_from("<I", data, off)
            off += 4
            pair.append(int.from_bytes(data[off:off + ln], "little"))
            off += ln
        out.append(tuple(pair))
    if off != len(data):
        raise ValueError(f"{path}: trailing bytes in rule cache")
    return n, out
