"""Decision-tree classifier for Pareto vs. notPareto decisions.

The classic top-down induction: categorical features split multiway, numeric
features split at the best midpoint threshold, the feature with the highest
gain ratio among positive-gain candidates wins, and an optional pessimistic
pruning pass collapses subtrees whose estimated error is no better than a
leaf. Error estimates use the normal-approximation upper confidence bound on
the binomial leaf error, parameterized by a confidence factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .errors import EmptyDataset
from .rationality import NOT_PARETO, PARETO

CLASSES = (PARETO, NOT_PARETO)
DEFAULT_FEATURE_ORDER = ("tf", "user", "iter", "cum_reward")
INVERTED_FEATURE_ORDER = tuple(reversed(DEFAULT_FEATURE_ORDER))
FEATURE_KINDS = {
    "tf": "categorical",
    "user": "categorical",
    "iter": "numeric",
    "cum_reward": "numeric",
}
DEFAULT_CF = 0.25
PRUNE_MARGIN = 0.1


@dataclass(frozen=True)
class ClassifiedRow:
    """One analyzed decision: who, where, when, how much, and the verdict."""

    tf: str
    user: str
    iter: int
    cum_reward: float
    label: str

    def __post_init__(self):
        if self.label not in CLASSES:
            raise ValueError(f"label must be one of {CLASSES}, got {self.label!r}")
        if self.iter < 4:
            raise ValueError(f"iter must be >= 4, got {self.iter}")


@dataclass(frozen=True)
class Leaf:
    label: str
    counts: dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def errors(self) -> int:
        return self.total - self.counts.get(self.label, 0)


@dataclass(frozen=True)
class CatSplit:
    feature: str
    children: dict[str, "TreeNode"]
    default: str  # child routing unseen category values
    counts: dict[str, int]


@dataclass(frozen=True)
class NumSplit:
    feature: str
    threshold: float
    low: "TreeNode"
    high: "TreeNode"
    counts: dict[str, int]


TreeNode = Leaf | CatSplit | NumSplit


def _class_counts(rows) -> dict[str, int]:
    counts = {c: 0 for c in CLASSES}
    for r in rows:
        counts[r.label] += 1
    return {c: n for c, n in counts.items() if n}


def _majority(counts: dict[str, int]) -> str:
    # ties resolve to Pareto via the CLASSES order
    return max(CLASSES, key=lambda c: (counts.get(c, 0), c == PARETO))


def _entropy(counts: dict[str, int]) -> float:
    total = sum(counts.values())
    if total == 0:
        return 0.0
    h = 0.0
    for n in counts.values():
        if n:
            p = n / total
            h -= p * math.log2(p)
    return h


def _split_entropy(parts: list[list]) -> tuple[float, float]:
    """(weighted child entropy, split info) for a partition into parts."""
    total = sum(len(p) for p in parts)
    info = 0.0
    split_info = 0.0
    for p in parts:
        if not p:
            continue
        frac = len(p) / total
        info += frac * _entropy(_class_counts(p))
        split_info -= frac * math.log2(frac)
    return info, split_info


@dataclass
class _Candidate:
    feature: str
    kind: str
    gain: float
    ratio: float
    threshold: float | None = None
    parts: dict | None = field(default=None, repr=False)


def _categorical_candidate(rows, feature, min_leaf) -> _Candidate | None:
    groups: dict[str, list] = {}
    for r in rows:
        groups.setdefault(getattr(r, feature), []).append(r)
    if len(groups) < 2:
        return None
    if sum(len(g) >= min_leaf for g in groups.values()) < 2:
        return None
    parts = [groups[v] for v in sorted(groups)]
    info, split_info = _split_entropy(parts)
    gain = _entropy(_class_counts(rows)) - info
    if gain <= 1e-12 or split_info <= 0:
        return None
    return _Candidate(
        feature=feature,
        kind="categorical",
        gain=gain,
        ratio=gain / split_info,
        parts={v: groups[v] for v in sorted(groups)},
    )


def _numeric_candidate(rows, feature, min_leaf) -> _Candidate | None:
    ordered = sorted(rows, key=lambda r: getattr(r, feature))
    n = len(ordered)
    vals = [getattr(r, feature) for r in ordered]
    base = _entropy(_class_counts(ordered))
    # prefix class counts let each cut point be scored in O(1)
    prefix = {c: np.zeros(n + 1) for c in CLASSES}
    for i, r in enumerate(ordered):
        for c in CLASSES:
            prefix[c][i + 1] = prefix[c][i] + (r.label == c)
    best_gain = -1.0
    best_i = None
    for i in range(min_leaf - 1, n - min_leaf):
        if vals[i] == vals[i + 1]:
            continue
        left = {c: int(prefix[c][i + 1]) for c in CLASSES}
        right = {c: int(prefix[c][n]) - left[c] for c in CLASSES}
        n_left = i + 1
        info = (n_left / n) * _entropy(left) + ((n - n_left) / n) * _entropy(right)
        gain = base - info
        if gain > best_gain:
            best_gain = gain
            best_i = i
    if best_i is None or best_gain <= 1e-12:
        return None
    threshold = (vals[best_i] + vals[best_i + 1]) / 2.0
    low = ordered[: best_i + 1]
    high = ordered[best_i + 1 :]
    _, split_info = _split_entropy([low, high])
    if split_info <= 0:
        return None
    return _Candidate(
        feature=feature,
        kind="numeric",
        gain=best_gain,
        ratio=best_gain / split_info,
        threshold=threshold,
        parts={"low": low, "high": high},
    )


def _grow(rows, min_leaf, feature_order, kinds) -> TreeNode:
    counts = _class_counts(rows)
    if len(counts) <= 1 or len(rows) < 2 * min_leaf:
        return Leaf(label=_majority(counts), counts=counts)
    best: _Candidate | None = None
    for feature in feature_order:
        kind = kinds[feature]
        if kind == "categorical":
            cand = _categorical_candidate(rows, feature, min_leaf)
        else:
            cand = _numeric_candidate(rows, feature, min_leaf)
        if cand is None:
            continue
        if best is None or cand.ratio > best.ratio:
            best = cand
    if best is None:
        return Leaf(label=_majority(counts), counts=counts)
    if best.kind == "categorical":
        children = {
            v: _grow(part, min_leaf, feature_order, kinds)
            for v, part in best.parts.items()
        }
        default = max(best.parts, key=lambda v: (len(best.parts[v]), v))
        return CatSplit(
            feature=best.feature, children=children, default=default, counts=counts
        )
    return NumSplit(
        feature=best.feature,
        threshold=best.threshold,
        low=_grow(best.parts["low"], min_leaf, feature_order, kinds),
        high=_grow(best.parts["high"], min_leaf, feature_order, kinds),
        counts=counts,
    )


def _added_errors(n: float, e: float, cf: float) -> float:
    """Extra errors from the one-tailed upper confidence bound on e/n."""
    if cf > 0.5:
        raise ValueError(f"confidence factor must be <= 0.5, got {cf}")
    if e < 1:
        base = n * (1.0 - cf ** (1.0 / n))
        if e == 0:
            return base
        return base + e * (_added_errors(n, 1.0, cf) - base)
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    z = float(norm.ppf(1.0 - cf))
    f = (e + 0.5) / n
    r = (f + z * z / (2 * n) + z * math.sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (
        1 + z * z / n
    )
    return r * n - e


def _estimated_errors(counts: dict[str, int], cf: float) -> float:
    n = sum(counts.values())
    if n == 0:
        return 0.0
    e = n - counts.get(_majority(counts), 0)
    return e + _added_errors(float(n), float(e), cf)


def _route(node: TreeNode, rows):
    if isinstance(node, CatSplit):
        groups = {v: [] for v in node.children}
        for r in rows:
            v = getattr(r, node.feature)
            groups.get(v, groups[node.default]).append(r)
        return groups
    groups = {"low": [], "high": []}
    for r in rows:
        key = "low" if getattr(r, node.feature) <= node.threshold else "high"
        groups[key].append(r)
    return groups


def _prune(node: TreeNode, rows, cf: float) -> tuple[TreeNode, float]:
    counts = _class_counts(rows)
    if isinstance(node, Leaf):
        return Leaf(label=_majority(counts), counts=counts), _estimated_errors(counts, cf)
    groups = _route(node, rows)
    subtree_err = 0.0
    pruned_children: dict[str, TreeNode] = {}
    if isinstance(node, CatSplit):
        for v, child in node.children.items():
            pruned, err = _prune(child, groups[v], cf)
            pruned_children[v] = pruned
            subtree_err += err
        rebuilt: TreeNode = CatSplit(
            feature=node.feature,
            children=pruned_children,
            default=node.default,
            counts=counts,
        )
    else:
        low, low_err = _prune(node.low, groups["low"], cf)
        high, high_err = _prune(node.high, groups["high"], cf)
        subtree_err = low_err + high_err
        rebuilt = NumSplit(
            feature=node.feature,
            threshold=node.threshold,
            low=low,
            high=high,
            counts=counts,
        )
    leaf_err = _estimated_errors(counts, cf)
    if leaf_err <= subtree_err + PRUNE_MARGIN:
        return Leaf(label=_majority(counts), counts=counts), leaf_err
    return rebuilt, subtree_err


def train(
    rows,
    min_leaf: int = 2,
    confidence_factor: float = DEFAULT_CF,
    feature_order=DEFAULT_FEATURE_ORDER,
    prune: bool = True,
    kinds: dict[str, str] | None = None,
) -> TreeNode:
    """Grow a tree by gain ratio, then prune unless `prune` is False."""
    rows = list(rows)
    if not rows:
        raise EmptyDataset("cannot train on zero rows")
    kinds = dict(FEATURE_KINDS if kinds is None else kinds)
    for feature in feature_order:
        if feature not in kinds:
            raise ValueError(f"unknown feature {feature!r}")
    tree = _grow(rows, min_leaf, tuple(feature_order), kinds)
    if prune:
        tree, _ = _prune(tree, rows, confidence_factor)
    return tree


def predict(tree: TreeNode, row) -> str:
    while True:
        if isinstance(tree, Leaf):
            return tree.label
        if isinstance(tree, CatSplit):
            v = getattr(row, tree.feature)
            tree = tree.children.get(v, tree.children[tree.default])
        else:
            v = getattr(row, tree.feature)
            tree = tree.low if v <= tree.threshold else tree.high


def evaluate(tree: TreeNode, rows) -> tuple[float, np.ndarray]:
    """Accuracy plus a 2x2 confusion matrix (rows actual, columns predicted)."""
    rows = list(rows)
    if not rows:
        raise EmptyDataset("cannot evaluate on zero rows")
    idx = {c: i for i, c in enumerate(CLASSES)}
    confusion = np.zeros((2, 2), dtype=int)
    for r in rows:
        confusion[idx[r.label], idx[predict(tree, r)]] += 1
    accuracy = float(np.trace(confusion)) / len(rows)
    return accuracy, confusion


def node_count(tree: TreeNode) -> int:
    if isinstance(tree, Leaf):
        return 1
    if isinstance(tree, CatSplit):
        return 1 + sum(node_count(c) for c in tree.children.values())
    return 1 + node_count(tree.low) + node_count(tree.high)


def leaf_count(tree: TreeNode) -> int:
    if isinstance(tree, Leaf):
        return 1
    if isinstance(tree, CatSplit):
        return sum(leaf_count(c) for c in tree.children.values())
    return leaf_count(tree.low) + leaf_count(tree.high)


def _leaf_text(leaf: Leaf) -> str:
    total = leaf.total
    err = leaf.errors
    body = f"{total:.1f}" if err == 0 else f"{total:.1f}/{err:.1f}"
    return f"{leaf.label} ({body})"


def to_text(tree: TreeNode) -> str:
    """Indented one-condition-per-line rendering, leaves inline after a colon."""
    if isinstance(tree, Leaf):
        return _leaf_text(tree)
    lines: list[str] = []

    def walk(node: TreeNode, depth: int):
        prefix = "|   " * depth
        if isinstance(node, CatSplit):
            branches = [(f"{node.feature} = {v}", c) for v, c in node.children.items()]
        else:
            branches = [
                (f"{node.feature} <= {node.threshold:g}", node.low),
                (f"{node.feature} > {node.threshold:g}", node.high),
            ]
        for cond, child in branches:
            if isinstance(child, Leaf):
                lines.append(f"{prefix}{cond}: {_leaf_text(child)}")
            else:
                lines.append(f"{prefix}{cond}")
                walk(child, depth + 1)

    walk(tree, 0)
    return "\n".join(lines)


def to_dict(tree: TreeNode) -> dict:
    """Machine-readable nested structure for report bundles."""
    if isinstance(tree, Leaf):
        return {"kind": "leaf", "label": tree.label, "counts": dict(tree.counts)}
    if isinstance(tree, CatSplit):
        return {
            "kind": "categorical",
            "feature": tree.feature,
            "default": tree.default,
            "children": {v: to_dict(c) for v, c in tree.children.items()},
        }
    return {
        "kind": "numeric",
        "feature": tree.feature,
        "threshold": tree.threshold,
        "low": to_dict(tree.low),
        "high": to_dict(tree.high),
    }


def stratified_split(rows, valid_fraction: float = 0.34, seed: int = 0):
    """Per-class shuffle and split into (train, validation) row lists."""
    rows = list(rows)
    if not rows:
        raise EmptyDataset("cannot split zero rows")
    rng = np.random.default_rng(seed)
    train_rows: list = []
    valid_rows: list = []
    for label in CLASSES:
        members = [r for r in rows if r.label == label]
        if not members:
            continue
        order = rng.permutation(len(members))
        n_valid = int(round(valid_fraction * len(members)))
        if len(members) > 1:
            n_valid = min(max(n_valid, 0), len(members) - 1)
        for pos, i in enumerate(order):
            (valid_rows if pos < n_valid else train_rows).append(members[i])
    return train_rows, valid_rows
