"""CART-style decision trees and a bagged random forest.

Splits minimize weighted Gini impurity over midpoints of consecutive
distinct sorted values. Ties break to the lowest feature index, then the
lowest threshold, so trees are reproducible regardless of row order.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError, ShapeError


@dataclass
class TreeNode:
    # internal: feature/threshold/left/right set; leaf: counts and prob set
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode" = None
    right: "TreeNode" = None
    n0: int = 0
    n1: int = 0
    prob: float = 0.0

    @property
    def is_leaf(self):
        return self.feature < 0


@dataclass
class ForestParams:
    n_trees: int = 200
    max_depth: int | None = None
    min_samples_leaf: int = 1
    features_per_split: int | None = None  # default ceil(sqrt(d))
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")

    def resolved_features(self, width):
        k = self.features_per_split or math.ceil(math.sqrt(width))
        if not 1 <= k <= width:
            raise DomainError(f"features_per_split {k} outside [1, {width}]")
        return k


def best_split(rows, labels, candidate_features, min_samples_leaf=1):
    """Best (feature, threshold, impurity decrease) over candidate features.

    Returns None when no split yields a positive Gini decrease.
    """
    rows = np.asarray(rows, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if rows.shape[0] < 2:
        return None
    best = None
    for f in sorted(candidate_features):
        thr, dec = kernels.best_split_gini(
            np.ascontiguousarray(rows[:, f]), y, float(min_samples_leaf)
        )
        if dec > 0 and (best is None or dec > best[2]):
            best = (int(f), float(thr), dec)
    return best


def grow_tree(rows, labels, params, rng):
    """Recursive Gini tree with a fresh random feature subset at every node."""
    rows = np.asarray(rows, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if rows.shape[0] == 0:
        raise DomainError("cannot grow a tree on zero rows")
    k = params.resolved_features(rows.shape[1])
    return _grow(rows, y, params, rng, k, depth=0)


def _leaf(y):
    n1 = int(y.sum())
    n0 = len(y) - n1
    return TreeNode(n0=n0, n1=n1, prob=n1 / len(y))


def _grow(rows, y, params, rng, k, depth):
    if (
        (params.max_depth is not None and depth >= params.max_depth)
        or len(y) < 2 * params.min_samples_leaf
        or y.min() == y.max()
    ):
        return _leaf(y)
    d = rows.shape[1]
    feats = np.sort(rng.choice(d, size=k, replace=False)) if k < d else np.arange(d)
    split = best_split(rows, y, feats, params.min_samples_leaf)
    if split is None:
        return _leaf(y)
    f, thr, _ = split
    go_left = rows[:, f] < thr
    return TreeNode(
        feature=f,
        threshold=thr,
        left=_grow(rows[go_left], y[go_left], params, rng, k, depth + 1),
        right=_grow(rows[~go_left], y[~go_left], params, rng, k, depth + 1),
    )


def tree_predict_proba(node, batch):
    """Leaf class-1 fraction for each row."""
    batch = np.asarray(batch, dtype=np.float64)
    out = np.empty(batch.shape[0])
    idx = np.arange(batch.shape[0])
    _route(node, batch, idx, out)
    return out


def _route(node, batch, idx, out):
    if node.is_leaf:
        out[idx] = node.prob
        return
    go_left = batch[idx, node.feature] < node.threshold
    _route(node.left, batch, idx[go_left], out)
    _route(node.right, batch, idx[~go_left], out)


@dataclass
class RandomForest:
    trees: list
    params: ForestParams
    width: int

    def to_dict(self):
        return {
            "format": "delaycast-forest",
            "version": 1,
            "width": self.width,
            "params": vars(self.params).copy(),
            "trees": [_node_to_dict(t) for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != "delaycast-forest":
            raise ValueError("not a forest bundle")
        return cls(
            trees=[_node_from_dict(t) for t in d["trees"]],
            params=ForestParams(**d["params"]),
            width=d["width"],
        )


def _node_to_dict(node):
    if node.is_leaf:
        return {"n0": node.n0, "n1": node.n1, "prob": node.prob}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(d):
    if "feature" in d:
        return TreeNode(
            feature=d["feature"],
            threshold=d["threshold"],
            left=_node_from_dict(d["left"]),
            right=_node_from_dict(d["right"]),
        )
    return TreeNode(n0=d["n0"], n1=d["n1"], prob=d["prob"])


def fit_forest(matrix, labels, params):
    """Bagged forest with per-tree RNG streams spawned from the seed."""
    x = np.asarray(matrix, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.shape[0] == 0:
        raise DomainError("cannot fit a forest on zero rows")
    streams = np.random.SeedSequence(params.seed).spawn(params.n_trees)
    trees = []
    n = x.shape[0]
    for ss in streams:
        rng = np.random.default_rng(ss)
        if params.bootstrap:
            idx = rng.integers(0, n, size=n)
            trees.append(grow_tree(x[idx], y[idx], params, rng))
        else:
            trees.append(grow_tree(x, y, params, rng))
    return RandomForest(trees=trees, params=params, width=x.shape[1])


def predict_forest(forest, batch, hard_vote=False):
    """(classes, probability of class 1) per row.

    Soft vote averages leaf class-1 fractions; hard vote averages the
    per-tree 0/1 decisions. Class 1 on probability >= 0.5.
    """
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != forest.width:
        raise ShapeError(
            f"batch width {batch.shape} does not match training width {forest.width}"
        )
    per_tree = np.stack([tree_predict_proba(t, batch) for t in forest.trees])
    if hard_vote:
        probs = (per_tree >= 0.5).mean(axis=0)
    else:
        probs = per_tree.mean(axis=0)
    return (probs >= 0.5).astype(np.int64), probs
