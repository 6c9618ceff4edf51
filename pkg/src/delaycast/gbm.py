"""Second-order gradient-boosted trees on the logistic loss.

Each round fits a regression tree to per-row gradient g and hessian h of
the loss at the current logits. Leaves take the closed-form weight
-G/(H+lambda); splits are accepted when the structure-score gain minus the
per-leaf penalty gamma is positive. Exact greedy enumeration, no
histogram approximation.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DivergenceError, DomainError, ShapeError
from .fcnn import sigmoid


@dataclass
class GbmParams:
    n_rounds: int = 200
    max_depth: int = 6
    learning_rate: float = 0.1
    lam: float = 1.0
    gamma: float = 0.0
    min_child_hessian: float = 1.0
    base_score: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.lam < 0 or self.gamma < 0:
            raise ValueError("lam and gamma must be >= 0")
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate must lie in (0, 1]")
        if not 0 < self.base_score < 1:
            raise ValueError("base_score must lie in (0, 1)")


@dataclass
class GbmNode:
    feature: int = -1
    threshold: float = 0.0
    left: "GbmNode" = None
    right: "GbmNode" = None
    weight: float = 0.0

    @property
    def is_leaf(self):
        return self.feature < 0


def grad_hess_logistic(pred_prob, label):
    """First and second derivative of the logistic loss w.r.t. the logit."""
    g = pred_prob - label
    h = pred_prob * (1.0 - pred_prob)
    return g, h


def leaf_weight(g_sum, h_sum, lam):
    """Minimizer of G*w + 0.5*(H+lambda)*w^2."""
    if h_sum + lam <= 0:
        raise DomainError("H + lambda must be positive")
    return -g_sum / (h_sum + lam)


def split_gain(g_left, h_left, g_right, h_right, lam, gamma):
    """Objective reduction of splitting one leaf into two, minus gamma."""
    return 0.5 * (
        g_left**2 / (h_left + lam)
        + g_right**2 / (h_right + lam)
        - (g_left + g_right) ** 2 / (h_left + h_right + lam)
    ) - gamma


def _grow(x, g, h, params, depth):
    if depth >= params.max_depth or x.shape[0] < 2:
        return GbmNode(weight=leaf_weight(g.sum(), h.sum(), params.lam))
    best = None  # (feature, threshold, raw gain)
    for f in range(x.shape[1]):
        thr, raw = kernels.best_split_grad_hess(
            np.ascontiguousarray(x[:, f]), g, h, params.lam, params.min_child_hessian
        )
        if math.isfinite(raw) and (best is None or raw > best[2]):
            best = (f, thr, raw)
    if best is None or best[2] - params.gamma <= 0:
        return GbmNode(weight=leaf_weight(g.sum(), h.sum(), params.lam))
    f, thr, _ = best
    go_left = x[:, f] < thr
    return GbmNode(
        feature=f,
        threshold=thr,
        left=_grow(x[go_left], g[go_left], h[go_left], params, depth + 1),
        right=_grow(x[~go_left], g[~go_left], h[~go_left], params, depth + 1),
    )


def _tree_output(node, batch):
    out = np.empty(batch.shape[0])
    idx = np.arange(batch.shape[0])
    _route(node, batch, idx, out)
    return out


def _route(node, batch, idx, out):
    if node.is_leaf:
        out[idx] = node.weight
        return
    go_left = batch[idx, node.feature] < node.threshold
    _route(node.left, batch, idx[go_left], out)
    _route(node.right, batch, idx[~go_left], out)


@dataclass
class GbmModel:
    initial_logit: float
    trees: list
    params: GbmParams
    width: int

    def to_dict(self):
        return {
            "format": "delaycast-gbm",
            "version": 1,
            "initial_logit": self.initial_logit,
            "width": self.width,
            "params": vars(self.params).copy(),
            "trees": [_node_to_dict(t) for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != "delaycast-gbm":
            raise ValueError("not a gbm bundle")
        return cls(
            initial_logit=d["initial_logit"],
            trees=[_node_from_dict(t) for t in d["trees"]],
            params=GbmParams(**d["params"]),
            width=d["width"],
        )


def _node_to_dict(node):
    if node.is_leaf:
        return {"weight": node.weight}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(d):
    if "feature" in d:
        return GbmNode(
            feature=d["feature"],
            threshold=d["threshold"],
            left=_node_from_dict(d["left"]),
            right=_node_from_dict(d["right"]),
        )
    return GbmNode(weight=d["weight"])


def fit_gbm(matrix, labels, params):
    """Boost n_rounds trees; logits update by learning_rate * tree output."""
    x = np.asarray(matrix, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.shape[0] == 0:
        raise DomainError("cannot fit on zero rows")
    initial = math.log(params.base_score / (1.0 - params.base_score))
    logits = np.full(x.shape[0], initial)
    trees = []
    for rnd in range(params.n_rounds):
        p = sigmoid(logits)
        g, h = grad_hess_logistic(p, y)
        tree = _grow(x, g, h, params, depth=0)
        logits = logits + params.learning_rate * _tree_output(tree, x)
        if not np.isfinite(logits).all():
            raise DivergenceError(f"non-finite logits at round {rnd}", epoch=rnd)
        trees.append(tree)
    return GbmModel(initial_logit=initial, trees=trees, params=params, width=x.shape[1])


def predict_gbm(model, batch):
    """Probability vector sigmoid(initial + lr * sum of tree outputs)."""
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != model.width:
        raise ShapeError(
            f"batch width {batch.shape} does not match training width {model.width}"
        )
    logits = np.full(batch.shape[0], model.initial_logit)
    for tree in model.trees:
        logits += model.params.learning_rate * _tree_output(tree, batch)
    return sigmoid(logits)
