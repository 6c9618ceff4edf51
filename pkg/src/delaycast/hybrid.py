"""Two-stage pipeline: train the FCNN, transform every row through its
last hidden block, and fit a tree ensemble on the transformed features.
Prediction is strictly head(extract_features(batch)); the head never sees
raw features.
"""
from dataclasses import dataclass

from . import fcnn, forest, gbm
from .errors import DomainError


@dataclass
class HybridModel:
    net: fcnn.Network
    head_kind: str  # "rdf" or "xgb"
    head: object
    transformed_width: int

    def to_dict(self):
        return {
            "format": "delaycast-hybrid",
            "version": 1,
            "head_kind": self.head_kind,
            "transformed_width": self.transformed_width,
            "net": self.net.to_dict(),
            "head": self.head.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != "delaycast-hybrid":
            raise ValueError("not a hybrid bundle")
        head_cls = forest.RandomForest if d["head_kind"] == "rdf" else gbm.GbmModel
        return cls(
            net=fcnn.Network.from_dict(d["net"]),
            head_kind=d["head_kind"],
            head=head_cls.from_dict(d["head"]),
            transformed_width=d["transformed_width"],
        )


def fit_hybrid(train_matrix, labels, net_config, head_kind="rdf", head_params=None):
    """Train extractor on raw features, then the head on transformed ones."""
    net, _ = fcnn.fit(train_matrix, labels, net_config)
    transformed = fcnn.extract_features(net, train_matrix)
    if head_kind == "rdf":
        head = forest.fit_forest(transformed, labels, head_params or forest.ForestParams())
    elif head_kind == "xgb":
        head = gbm.fit_gbm(transformed, labels, head_params or gbm.GbmParams())
    else:
        raise DomainError(f"unknown head kind: {head_kind!r}")
    return HybridModel(
        net=net,
        head_kind=head_kind,
        head=head,
        transformed_width=transformed.shape[1],
    )


def predict_hybrid(model, batch):
    """(classes, probability of class 1) per row."""
    transformed = fcnn.extract_features(model.net, batch)
    if model.head_kind == "rdf":
        return forest.predict_forest(model.head, transformed)
    probs = gbm.predict_gbm(model.head, transformed)
    return (probs >= 0.5).astype(int), probs
