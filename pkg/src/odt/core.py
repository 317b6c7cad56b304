"""Domain types shared by every other module.

Index sets are plain Python ints used as bitsets: bit ``i`` set means
point ``i`` belongs to the set.  Intersection, difference and cardinality
are then exact and cheap (``&``, ``& ~``, ``int.bit_count``).
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Iterable, Iterator, Sequence, Union

import numpy as np

if TYPE_CHECKING:
    from .rules import Rule

IndexSet = int


class ODTError(Exception):
    """Base class for library errors."""


class ParseError(ODTError, ValueError):
    pass


class SchemaError(ODTError, ValueError):
    pass


class StructuralError(ODTError):
    pass


class ContractError(ODTError):
    """A caller-supplied object broke a documented contract."""


class InfeasibleError(ODTError):
    pass


class BudgetExceeded(ODTError):
    pass


# ---------------------------------------------------------------- index sets


def bits(mask: IndexSet) -> Iterator[int]:
    """Yield the indices present in ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def to_mask(indices: Iterable[int]) -> IndexSet:
    mask = 0
    for i in indices:
        mask |= 1 << int(i)
    return mask


def popcount(mask: IndexSet) -> int:
    return mask.bit_count()


def index_array(mask: IndexSet) -> np.ndarray:
    return np.fromiter(bits(mask), dtype=np.intp)


# ------------------------------------------------------------------ dataset


@dataclass(frozen=True, eq=False)
class Dataset:
    points: np.ndarray
    labels: np.ndarray
    task: str = "classification"
    label_names: tuple = ()

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise SchemaError("points must be a non-empty N x D matrix")
        if not np.all(np.isfinite(pts)):
            raise SchemaError("points must be finite")
        if self.task not in ("classification", "regression"):
            raise SchemaError(f"unknown task {self.task!r}")
        if self.task == "classification":
            labs = np.asarray(self.labels, dtype=np.int64)
            if labs.size and (labs.min() < 0 or set(np.unique(labs)) != set(range(labs.max() + 1))):
                raise SchemaError("class ids must be contiguous from 0")
        else:
            labs = np.asarray(self.labels, dtype=float)
        if labs.shape != (pts.shape[0],):
            raise SchemaError("labels length must equal point count")
        pts.setflags(write=False)
        labs.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labs)
        object.__setattr__(self, "label_names", tuple(self.label_names))

    @classmethod
    def from_labels(cls, points, labels: Sequence, task: str = "classification") -> "Dataset":
        """Build a dataset, re-encoding arbitrary labels to ids in first-appearance order."""
        if task == "regression":
            return cls(points, np.asarray(labels, dtype=float), task)
        names: dict = {}
        ids = [names.setdefault(lab, len(names)) for lab in labels]
        return cls(points, np.asarray(ids, dtype=np.int64), task, tuple(names))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def full(self) -> IndexSet:
        return (1 << self.n) - 1

    @cached_property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1 if self.task == "classification" else 0

    @cached_property
    def class_masks(self) -> tuple:
        if self.task != "classification":
            return ()
        return tuple(to_mask(np.flatnonzero(self.labels == c)) for c in range(self.n_classes))

    @cached_property
    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.points).tobytes())
        h.update(np.ascontiguousarray(self.labels).tobytes())
        h.update(self.task.encode())
        return h.hexdigest()

    def label_name(self, class_id: int):
        if self.label_names:
            return self.label_names[class_id]
        return class_id


def load_dataset(path: Union[str, Path], label_column: Union[int, str, None] = None,
                 task: str = "classification") -> Dataset:
    """Read a headered CSV; the label column defaults to the last one."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [(lineno, row) for lineno, row in enumerate(csv.reader(fh), start=1)
                if row and any(cell.strip() for cell in row)]
    if len(rows) < 2:
        raise ParseError(f"{path}: no data rows")
    header = [h.strip() for h in rows[0][1]]
    width = len(header)
    if width < 2:
        raise SchemaError(f"{path}: need at least one feature column and a label column")
    if label_column is None:
        lab_idx = width - 1
    elif isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if label_column not in header:
            raise SchemaError(f"{path}: no column named {label_column!r}")
        lab_idx = header.index(label_column)
    else:
        lab_idx = int(label_column) % width
    feats, labels = [], []
    for lineno, row in rows[1:]:
        if len(row) != width:
            raise ParseError(f"{path}: line {lineno}: expected {width} fields, got {len(row)}")
        vals = []
        for j, cell in enumerate(row):
            if j == lab_idx:
                continue
            try:
                v = float(cell)
            except ValueError:
                raise SchemaError(f"{path}: line {lineno}: non-numeric feature "
                                  f"{header[j]!r}={cell.strip()!r}") from None
            if not math.isfinite(v):
                raise SchemaError(f"{path}: line {lineno}: non-finite feature {header[j]!r}")
            vals.append(v)
        feats.append(vals)
        labels.append(row[lab_idx].strip())
    if task == "regression":
        try:
            ys = [float(v) for v in labels]
        except ValueError as exc:
            raise SchemaError(f"{path}: regression targets must be numeric ({exc})") from None
        return Dataset(np.array(feats), np.array(ys), "regression")
    return Dataset.from_labels(np.array(feats), labels)


# -------------------------------------------------------------------- trees


@dataclass(frozen=True)
class Leaf:
    indices: IndexSet


@dataclass(frozen=True)
class Node:
    left: "DTree"
    rule: "Rule"
    right: "DTree"


DTree = Union[Leaf, Node]


def leaves(tree: DTree) -> Iterator[Leaf]:
    stack = [tree]
    while stack:
        t = stack.pop()
        if isinstance(t, Leaf):
            yield t
        else:
            stack.append(t.right)
            stack.append(t.left)


def tree_size(tree: DTree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + tree_size(tree.left) + tree_size(tree.right)


def tree_depth(tree: DTree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(tree_depth(tree.left), tree_depth(tree.right))


def tree_rules(tree: DTree) -> list:
    """Rules in pre-order."""
    if isinstance(tree, Leaf):
        return []
    return [tree.rule] + tree_rules(tree.left) + tree_rules(tree.right)


def root_region(tree: DTree) -> IndexSet:
    region = 0
    for lf in leaves(tree):
        region |= lf.indices
    return region


# --------------------------------------------------------------- objectives


def leaf_label(indices: IndexSet, ds: Dataset):
    """Majority class (ties to the smallest id, empty set to 0); mean target for regression."""
    if ds.task == "regression":
        if not indices:
            return 0.0
        return float(ds.labels[index_array(indices)].mean())
    best, best_count = 0, -1
    for c, cm in enumerate(ds.class_masks):
        k = (indices & cm).bit_count()
        if k > best_count:
            best, best_count = c, k
    return best


def zero_one_cost(indices: IndexSet, ds: Dataset) -> float:
    if not indices:
        return 0
    return indices.bit_count() - max((indices & cm).bit_count() for cm in ds.class_masks)


def squared_cost(indices: IndexSet, ds: Dataset) -> float:
    if not indices:
        return 0.0
    ys = ds.labels[index_array(indices)]
    return float(((ys - ys.mean()) ** 2).sum())


@dataclass(frozen=True)
class Objective:
    """Leaf cost ``f`` folded over the tree with ``g``; ``g(a, b) >= max(a, b)`` is required."""

    label: str
    leaf_cost: Callable[[IndexSet, Dataset], float]
    combine: Callable[[float, float], float]
    additive: bool = field(default=False)


def _add(a, b):
    return a + b


ZERO_ONE = Objective("zeroone", zero_one_cost, _add, additive=True)
SQUARED = Objective("l2", squared_cost, _add, additive=True)
OBJECTIVES = {"zeroone": ZERO_ONE, "l2": SQUARED}


def check_objective(obj: Objective, samples: int = 200, seed: int = 0) -> None:
    """Spot-check ``g(a, b) >= max(a, b)``; raise ContractError on a violation."""
    if obj in (ZERO_ONE, SQUARED):
        return
    rng = np.random.default_rng(seed)
    grid = [0.0, 0.5, 1.0, 2.0, 10.0]
    pairs = [(a, b) for a in grid for b in grid]
    pairs += list(zip(rng.exponential(5.0, samples), rng.exponential(5.0, samples)))
    for a, b in pairs:
        g = obj.combine(float(a), float(b))
        if g < max(a, b):
            raise ContractError(f"objective {obj.label!r}: combine({a}, {b}) = {g} < max")


def evaluate(tree: DTree, ds: Dataset, obj: Objective = ZERO_ONE):
    if isinstance(tree, Leaf):
        return obj.leaf_cost(tree.indices, ds)
    if not isinstance(tree, Node) or not hasattr(tree.rule, "pos"):
        raise StructuralError(f"unresolvable rule in node: {getattr(tree, 'rule', tree)!r}")
    return obj.combine(evaluate(tree.left, ds, obj), evaluate(tree.right, ds, obj))


def route(tree: DTree, x) -> Leaf:
    """Send one point down the tree using the rules' geometry, not their bitsets."""
    while isinstance(tree, Node):
        tree = tree.left if tree.rule.side_of(x) > 0 else tree.right
    return tree


def routing_errors(tree: DTree, ds: Dataset, region: IndexSet | None = None) -> int:
    """0-1 loss recomputed by routing each point individually."""
    region = ds.full if region is None else region
    groups: dict = {}
    for i in bits(region):
        groups.setdefault(id(route(tree, ds.points[i])), []).append(i)
    errors = 0
    for members in groups.values():
        counts = np.bincount(ds.labels[members], minlength=ds.n_classes)
        errors += len(members) - int(counts.max())
    return errors
