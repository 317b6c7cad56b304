"""JSON and Graphviz serialization of trees."""

from __future__ import annotations

import json

from .core import Dataset, DTree, Leaf, Node, bits, leaf_label, to_mask
from .rules import rule_from_dict


def tree_to_dict(tree: DTree, ds: Dataset) -> dict:
    if isinstance(tree, Leaf):
        lab = leaf_label(tree.indices, ds)
        label = lab if ds.task == "regression" else ds.label_name(lab)
        if hasattr(label, "item"):
            label = label.item()
        return {"leaf": list(bits(tree.indices)), "label": label}
    return {"rule": tree.rule.to_dict(),
            "left": tree_to_dict(tree.left, ds),
            "right": tree_to_dict(tree.right, ds)}


def tree_from_dict(d: dict, ds: Dataset) -> DTree:
    """Inverse of :func:`tree_to_dict`; rules are rebuilt from their stored geometry."""
    if "leaf" in d:
        return Leaf(to_mask(d["leaf"]))
    return Node(tree_from_dict(d["left"], ds), rule_from_dict(d["rule"], ds),
                tree_from_dict(d["right"], ds))


def tree_to_json(tree: DTree, ds: Dataset) -> str:
    return json.dumps(tree_to_dict(tree, ds), indent=2, sort_keys=True) + "\n"


def tree_to_dot(tree: DTree, ds: Dataset) -> str:
    lines = ["digraph tree {", '  node [fontname="Helvetica"];']
    counter = [0]

    def emit(t: DTree) -> str:
        name = f"n{counter[0]}"
        counter[0] += 1
        if isinstance(t, Leaf):
            lab = leaf_label(t.indices, ds)
            lab = f"{lab:.4g}" if ds.task == "regression" else ds.label_name(lab)
            lines.append(f'  {name} [shape=box, label="{lab}\\nn={t.indices.bit_count()}"];')
            return name
        text = t.rule.describe().replace('"', "'")
        lines.append(f'  {name} [shape=ellipse, label="{text}"];')
        left, right = emit(t.left), emit(t.right)
        lines.append(f'  {name} -> {left} [label="yes"];')
        lines.append(f'  {name} -> {right} [label="no"];')
        return name

    emit(tree)
    lines.append("}")
    return "\n".join(lines) + "\n"
