"""Fully connected network: dense / batch-norm / ReLU / dropout blocks,
mini-batch momentum SGD on binary cross-entropy, and penultimate-layer
feature extraction.

Each hidden block is dense -> batch norm -> ReLU -> dropout; the head is
a single dense unit with a sigmoid. Dropout is inverted (survivors scaled
by 1/(1-rate)) so evaluation is a plain forward pass.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, ShapeError, StateError

BCE_EPS = 1e-7
BN_EPS = 1e-5
BN_MOMENTUM = 0.9


def sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def bce_loss(probabilities, labels):
    """Mean binary cross-entropy with probabilities clamped to [eps, 1-eps]."""
    p = np.asarray(probabilities, dtype=np.float64).ravel()
    y = np.asarray(labels, dtype=np.float64).ravel()
    if p.shape != y.shape:
        raise ShapeError(f"probabilities ({p.shape}) and labels ({y.shape}) differ")
    p = np.clip(p, BCE_EPS, 1.0 - BCE_EPS)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


@dataclass
class NetworkConfig:
    input_width: int
    hidden_layers: int = 5
    hidden_units: int = 250
    dropout_rate: float = 0.2
    batch_norm: bool = True
    epochs: int = 75
    batch_size: int = 256
    learning_rate: float = 0.01
    momentum: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.hidden_layers < 1:
            raise ValueError("hidden_layers must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not 0 <= self.dropout_rate < 1:
            raise ValueError("dropout_rate must lie in [0, 1)")


class Dense:
    kind = "dense"

    def __init__(self, w, b):
        self.w = w
        self.b = b
        self._x = None

    @classmethod
    def init(cls, fan_in, fan_out, rng):
        limit = np.sqrt(6.0 / fan_in)
        w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        return cls(w, np.zeros(fan_out))

    def forward(self, x, train, rng):
        self._x = x if train else None
        return x @ self.w + self.b

    def backward(self, dout):
        self.grads = {"w": self._x.T @ dout, "b": dout.sum(axis=0)}
        return dout @ self.w.T

    def params(self):
        return {"w": self.w, "b": self.b}


class BatchNorm:
    kind = "batch_norm"

    def __init__(self, width, momentum=BN_MOMENTUM, eps=BN_EPS):
        self.gamma = np.ones(width)
        self.beta = np.zeros(width)
        self.running_mean = np.zeros(width)
        self.running_var = np.ones(width)
        self.momentum = momentum
        self.eps = eps
        self._cache = None

    def forward(self, x, train, rng):
        if train:
            mu = x.mean(axis=0)
            var = x.var(axis=0)
            inv_std = 1.0 / np.sqrt(var + self.eps)
            xhat = (x - mu) * inv_std
            self.running_mean = self.momentum * self.running_mean + (1 - self.momentum) * mu
            self.running_var = self.momentum * self.running_var + (1 - self.momentum) * var
            self._cache = (xhat, inv_std)
            return self.gamma * xhat + self.beta
        xhat = (x - self.running_mean) / np.sqrt(self.running_var + self.eps)
        return self.gamma * xhat + self.beta

    def backward(self, dout):
        xhat, inv_std = self._cache
        n = dout.shape[0]
        self.grads = {"gamma": (dout * xhat).sum(axis=0), "beta": dout.sum(axis=0)}
        dxhat = dout * self.gamma
        return (inv_std / n) * (
            n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0)
        )

    def params(self):
        return {"gamma": self.gamma, "beta": self.beta}


class ReLU:
    kind = "relu"

    def forward(self, x, train, rng):
        self._mask = x > 0 if train else None
        return np.maximum(x, 0.0)

    def backward(self, dout):
        return dout * self._mask

    def params(self):
        return {}


class Dropout:
    kind = "dropout"

    def __init__(self, rate):
        self.rate = rate
        self._mask = None

    def forward(self, x, train, rng):
        if not train or self.rate == 0.0:
            return x
        self._mask = (rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * self._mask

    def backward(self, dout):
        if self._mask is None:
            return dout
        return dout * self._mask

    def params(self):
        return {}


class Network:
    """Layer stack ending in dense(1) + sigmoid."""

    def __init__(self, config, layers=None):
        self.config = config
        if layers is not None:
            self.layers = layers
        else:
            rng = np.random.default_rng(config.seed)
            self.layers = []
            width = config.input_width
            for _ in range(config.hidden_layers):
                self.layers.append(Dense.init(width, config.hidden_units, rng))
                if config.batch_norm:
                    self.layers.append(BatchNorm(config.hidden_units))
                self.layers.append(ReLU())
                if config.dropout_rate > 0:
                    self.layers.append(Dropout(config.dropout_rate))
                width = config.hidden_units
            self.layers.append(Dense.init(width, 1, rng))
        self._probs = None
        self._labels_shape = None
        self._train_cache = False

    @property
    def penultimate_width(self):
        return self.layers[-1].w.shape[0]

    def _check_width(self, batch):
        if batch.ndim != 2 or batch.shape[1] != self.config.input_width:
            raise ShapeError(
                f"batch width {batch.shape} does not match input width "
                f"{self.config.input_width}"
            )

    def forward(self, batch, mode="eval", rng=None):
        """Probabilities in (0,1) per row; train mode caches for backward."""
        batch = np.asarray(batch, dtype=np.float64)
        self._check_width(batch)
        train = mode == "train"
        if train and rng is None:
            rng = np.random.default_rng(self.config.seed)
        h = batch
        for layer in self.layers:
            h = layer.forward(h, train, rng)
        probs = sigmoid(h).ravel()
        if train:
            self._probs = probs
            self._batch_rows = batch.shape[0]
            self._train_cache = True
        else:
            self._train_cache = False
        return probs

    def backward(self, labels):
        """Gradients of bce_loss w.r.t. every trainable parameter."""
        if not self._train_cache:
            raise StateError("backward requires a preceding train-mode forward")
        y = np.asarray(labels, dtype=np.float64).ravel()
        if y.shape[0] != self._batch_rows:
            raise StateError("labels do not match the cached forward batch")
        # combined sigmoid + BCE gradient w.r.t. the final pre-activation
        d = ((self._probs - y) / y.shape[0]).reshape(-1, 1)
        for layer in reversed(self.layers):
            d = layer.backward(d)
        self._train_cache = False
        return d

    def parameters(self):
        """Flat view of every trainable array, keyed by layer index and name."""
        out = {}
        for i, layer in enumerate(self.layers):
            for name, arr in layer.params().items():
                out[f"{i}.{name}"] = arr
        return out

    def gradients(self):
        out = {}
        for i, layer in enumerate(self.layers):
            if layer.params():
                for name in layer.params():
                    out[f"{i}.{name}"] = layer.grads[name]
        return out

    def to_dict(self):
        layers = []
        for layer in self.layers:
            entry = {"kind": layer.kind}
            if layer.kind == "dense":
                entry["w"] = layer.w.tolist()
                entry["b"] = layer.b.tolist()
            elif layer.kind == "batch_norm":
                entry.update(
                    gamma=layer.gamma.tolist(),
                    beta=layer.beta.tolist(),
                    running_mean=layer.running_mean.tolist(),
                    running_var=layer.running_var.tolist(),
                    momentum=layer.momentum,
                    eps=layer.eps,
                )
            elif layer.kind == "dropout":
                entry["rate"] = layer.rate
            layers.append(entry)
        return {
            "format": "delaycast-fcnn",
            "version": 1,
            "config": vars(self.config).copy(),
            "layers": layers,
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != "delaycast-fcnn":
            raise ValueError("not a network bundle")
        config = NetworkConfig(**d["config"])
        layers = []
        for entry in d["layers"]:
            kind = entry["kind"]
            if kind == "dense":
                layers.append(Dense(np.array(entry["w"]), np.array(entry["b"])))
            elif kind == "batch_norm":
                bn = BatchNorm(len(entry["gamma"]), entry["momentum"], entry["eps"])
                bn.gamma = np.array(entry["gamma"])
                bn.beta = np.array(entry["beta"])
                bn.running_mean = np.array(entry["running_mean"])
                bn.running_var = np.array(entry["running_var"])
                layers.append(bn)
            elif kind == "relu":
                layers.append(ReLU())
            elif kind == "dropout":
                layers.append(Dropout(entry["rate"]))
            else:
                raise ValueError(f"unknown layer kind {kind!r}")
        return cls(config, layers=layers)


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    val_accuracy: list = field(default_factory=list)


def train(net, train_matrix, labels, config=None, val_matrix=None, val_labels=None):
    """Mini-batch momentum SGD; returns (net, TrainHistory).

    Deterministic for a fixed config seed: the shuffle and dropout streams
    both derive from it.
    """
    config = config or net.config
    x = np.asarray(train_matrix, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64).ravel()
    net._check_width(x)
    n = x.shape[0]

    rng = np.random.default_rng(config.seed + 1)
    velocity = {k: np.zeros_like(v) for k, v in net.parameters().items()}
    history = TrainHistory()

    for epoch in range(config.epochs):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = perm[start:start + config.batch_size]
            probs = net.forward(x[idx], mode="train", rng=rng)
            loss = bce_loss(probs, y[idx])
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite loss at epoch {epoch}", epoch=epoch)
            epoch_loss += loss * len(idx)
            net.backward(y[idx])
            params = net.parameters()
            grads = net.gradients()
            for key, p in params.items():
                v = velocity[key]
                v *= config.momentum
                v -= config.learning_rate * grads[key]
                p += v
        history.train_loss.append(epoch_loss / n)
        if val_matrix is not None:
            vp = net.forward(val_matrix, mode="eval")
            history.val_loss.append(bce_loss(vp, val_labels))
            history.val_accuracy.append(
                float(np.mean((vp >= 0.5).astype(int) == np.asarray(val_labels)))
            )
    return net, history


def fit(train_matrix, labels, config, **kwargs):
    """Build a fresh network from config and train it."""
    net = Network(config)
    return train(net, train_matrix, labels, config, **kwargs)


def extract_features(net, batch):
    """Post-activation output of the final hidden block (eval mode)."""
    batch = np.asarray(batch, dtype=np.float64)
    net._check_width(batch)
    h = batch
    for layer in net.layers[:-1]:
        h = layer.forward(h, False, None)
    return h
