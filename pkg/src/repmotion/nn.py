"""Small multilayer perceptron: ReLU hidden layers, Adam, early stopping.

Three output heads share the same body:

* ``binary``      sigmoid output, log-loss (optionally class-weighted)
* ``multiclass``  softmax output, cross-entropy
* ``regression``  identity output, squared error on a standardized target

Input standardization (and target standardization for regression) lives in
the model so inference can never drift from training.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import ModelError, ValidationError

MODEL_FORMAT = "repmotion-mlp"
MODEL_VERSION = 1
TASKS = ("binary", "multiclass", "regression")
_OUTPUT_ACTIVATION = {"binary": "sigmoid", "multiclass": "softmax", "regression": "identity"}


@dataclass(frozen=True)
class TrainConfig:
    hidden: tuple[int, ...] = (100,)
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 20
    validation_fraction: float = 0.1
    alpha: float = 1e-4  # L2 penalty
    negative_weight: float = 1.0  # binary only: loss multiplier for class 0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if any(h <= 0 for h in self.hidden):
            raise ValidationError("hidden sizes must be positive")
        for name in ("learning_rate", "batch_size", "max_epochs", "patience", "negative_weight"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if not 0 < self.beta1 < 1 or not 0 < self.beta2 < 1:
            raise ValidationError("Adam decay rates must lie in (0, 1)")
        if not 0 <= self.validation_fraction < 1:
            raise ValidationError("validation_fraction must lie in [0, 1)")

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


@dataclass(eq=False)
class MlpModel:
    task: str
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float = 0.0
    y_std: float = 1.0
    classes: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    history: list[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ModelError(f"unknown task {self.task!r}")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if b.shape != (w.shape[1],):
                raise ModelError(f"layer {i}: bias shape {b.shape} does not match weights {w.shape}")
            if i and self.weights[i - 1].shape[1] != w.shape[0]:
                raise ModelError(f"layer {i}: shapes do not chain")
        if self.x_mean.shape != (self.n_inputs,) or self.x_std.shape != (self.n_inputs,):
            raise ModelError("standardization parameters do not match the input size")
        if np.any(self.x_std <= 0):
            raise ModelError("standardization std must be > 0")

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def n_inputs(self) -> int:
        return self.weights[0].shape[0]

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    @property
    def activations(self) -> list[str]:
        return ["relu"] * (len(self.weights) - 1) + [_OUTPUT_ACTIVATION[self.task]]

    # -- forward / backward ---------------------------------------------------

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.n_inputs:
            raise ValidationError(f"expected {self.n_inputs} input features, got shape {x.shape}")
        return x

    def _forward(self, xs: np.ndarray):
        """Raw output (pre-activation) and the cached hidden activations."""
        acts = [xs]
        h = xs
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ w + b, 0.0)
            acts.append(h)
        return h @ self.weights[-1] + self.biases[-1], acts

    def standardize(self, x) -> np.ndarray:
        return (self._check(x) - self.x_mean) / self.x_std

    def predict(self, x) -> np.ndarray:
        """Probabilities (binary: p(class 1) per row; multiclass: rows summing
        to 1) or regression values in target units."""
        x = self._check(x)
        if len(x) == 0:
            return np.empty((0, self.weights[-1].shape[1]) if self.task == "multiclass" else 0)
        z, _ = self._forward(self.standardize(x))
        if self.task == "binary":
            return _sigmoid(z[:, 0])
        if self.task == "multiclass":
            return _softmax(z)
        return z[:, 0] * self.y_std + self.y_mean

    def loss(self, xs: np.ndarray, y: np.ndarray, sample_weight: np.ndarray | None = None,
             alpha: float = 0.0) -> float:
        return self._loss(xs, y, sample_weight, alpha, grads=False)[0]

    def loss_and_grads(self, xs: np.ndarray, y: np.ndarray, sample_weight: np.ndarray | None = None,
                       alpha: float = 0.0):
        """Mean task loss on already-standardized inputs, with gradients.

        ``y`` is {0, 1} for binary, class indices for multiclass and the
        standardized target for regression.
        """
        return self._loss(xs, y, sample_weight, alpha, grads=True)

    def _loss(self, xs, y, sample_weight, alpha, grads):
        n = len(xs)
        sw = np.ones(n) if sample_weight is None else sample_weight
        z, acts = self._forward(xs)
        if self.task == "binary":
            p = _sigmoid(z[:, 0])
            eps = 1e-15
            per = -(y * np.log(np.clip(p, eps, 1)) + (1 - y) * np.log(np.clip(1 - p, eps, 1)))
            dz = (sw * (p - y) / n)[:, None]
        elif self.task == "multiclass":
            p = _softmax(z)
            yi = y.astype(int)
            per = -np.log(np.clip(p[np.arange(n), yi], 1e-15, 1))
            onehot = np.zeros_like(p)
            onehot[np.arange(n), yi] = 1.0
            dz = sw[:, None] * (p - onehot) / n
        else:
            diff = z[:, 0] - y
            per = 0.5 * diff ** 2
            dz = (sw * diff / n)[:, None]
        loss = float(np.sum(sw * per) / n)
        if alpha:
            loss += 0.5 * alpha * sum(float(np.sum(w * w)) for w in self.weights) / n
        if not grads:
            return loss, None, None

        gw = [None] * len(self.weights)
        gb = [None] * len(self.weights)
        delta = dz
        for i in range(len(self.weights) - 1, -1, -1):
            gw[i] = acts[i].T @ delta + (alpha / n) * self.weights[i]
            gb[i] = delta.sum(axis=0)
            if i:
                delta = (delta @ self.weights[i].T) * (acts[i] > 0)
        return loss, gw, gb

    # -- parameters as one flat vector (used by gradient checking) -------------

    def get_flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for pair in zip(self.weights, self.biases) for a in pair])

    def set_flat(self, theta: np.ndarray) -> None:
        k = 0
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            self.weights[i] = theta[k:k + w.size].reshape(w.shape).copy()
            k += w.size
            self.biases[i] = theta[k:k + b.size].copy()
            k += b.size

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "task": self.task,
            "layer_sizes": self.layer_sizes,
            "activations": self.activations,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "x_mean": self.x_mean.tolist(),
            "x_std": self.x_std.tolist(),
            "y_mean": self.y_mean,
            "y_std": self.y_std,
            "classes": list(self.classes),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MlpModel":
        if d.get("format") != MODEL_FORMAT:
            raise ModelError(f"not a {MODEL_FORMAT} model")
        if d.get("version") != MODEL_VERSION:
            raise ModelError(f"model version {d.get('version')!r} is not supported (expected {MODEL_VERSION})")
        try:
            model = cls(
                task=d["task"],
                weights=[np.asarray(w, dtype=float) for w in d["weights"]],
                biases=[np.asarray(b, dtype=float) for b in d["biases"]],
                x_mean=np.asarray(d["x_mean"], dtype=float),
                x_std=np.asarray(d["x_std"], dtype=float),
                y_mean=float(d["y_mean"]),
                y_std=float(d["y_std"]),
                classes=list(d.get("classes", [])),
                meta=dict(d.get("meta", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelError(f"malformed model: {exc}") from None
        if model.layer_sizes != list(d["layer_sizes"]):
            raise ModelError("layer_sizes disagree with weight shapes")
        return model

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def loads(cls, s: str) -> "MlpModel":
        return cls.from_dict(json.loads(s))


def init_model(task: str, layer_sizes: Sequence[int], rng: np.random.Generator,
               x_mean=None, x_std=None, classes=()) -> MlpModel:
    """Glorot-uniform weights, zero biases, identity standardization by default."""
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    n_in = layer_sizes[0]
    return MlpModel(task, weights, biases,
                    np.zeros(n_in) if x_mean is None else np.asarray(x_mean, float),
                    np.ones(n_in) if x_std is None else np.asarray(x_std, float),
                    classes=list(classes))


def _encode_targets(task: str, y, classes=None):
    y = np.asarray(y)
    if task == "binary":
        yb = y.astype(float)
        if not np.all((yb == 0) | (yb == 1)):
            raise ValidationError("binary targets must be 0 or 1")
        if len(np.unique(yb)) < 2:
            raise ValidationError("binary training needs both classes")
        return yb, [0, 1]
    if task == "multiclass":
        labels = sorted(set(y.tolist())) if classes is None else list(classes)
        if len(set(y.tolist())) < 2:
            raise ValidationError("multiclass training needs at least two classes")
        lookup = {c: i for i, c in enumerate(labels)}
        try:
            return np.array([lookup[v] for v in y.tolist()], dtype=float), labels
        except KeyError as exc:
            raise ValidationError(f"label {exc} not among classes") from None
    yr = y.astype(float)
    if not np.all(np.isfinite(yr)):
        raise ValidationError("non-finite regression targets")
    return yr, []


def train(x, y, cfg: TrainConfig = TrainConfig(), task: str = "binary", classes=None) -> MlpModel:
    """Fit an MLP with Adam on minibatches, keeping the best-validation weights.

    A seeded ``validation_fraction`` of the rows is held out for early
    stopping (too few rows: the training loss is monitored instead).
    Standardization is fit on the training rows only.
    """
    if task not in TASKS:
        raise ValidationError(f"unknown task {task!r}")
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or len(x) < 2 or len(x) != len(y):
        raise ValidationError("need a 2-D feature matrix with >= 2 rows matching y")
    if not np.all(np.isfinite(x)):
        raise ValidationError("non-finite values in training features")
    targets, labels = _encode_targets(task, y, classes)
    rng = np.random.default_rng(cfg.seed)

    order = rng.permutation(len(x))
    n_val = int(round(cfg.validation_fraction * len(x)))
    if n_val < 2 or len(x) - n_val < 2:
        n_val = 0
    val_idx, tr_idx = order[:n_val], order[n_val:]
    xt, yt = x[tr_idx], targets[tr_idx]

    x_mean = xt.mean(axis=0)
    x_std = xt.std(axis=0)
    x_std[x_std < 1e-12] = 1.0
    n_out = len(labels) if task == "multiclass" else 1
    model = init_model(task, [x.shape[1], *cfg.hidden, n_out], rng, x_mean, x_std, labels)
    if task == "regression":
        model.y_mean = float(yt.mean())
        model.y_std = float(yt.std()) or 1.0
        targets = (targets - model.y_mean) / model.y_std
        yt = targets[tr_idx]

    def weights_for(idx):
        if task == "binary" and cfg.negative_weight != 1.0:
            return np.where(targets[idx] == 0, cfg.negative_weight, 1.0)
        return None

    xs_all = (x - x_mean) / x_std
    xs_t = xs_all[tr_idx]
    sw_t = weights_for(tr_idx)
    mon_idx = val_idx if n_val else tr_idx
    params = model.weights + model.biases
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    step = 0
    best_loss, best_params, stale = np.inf, None, 0
    history = []
    for _ in range(cfg.max_epochs):
        perm = rng.permutation(len(xs_t))
        for s in range(0, len(perm), cfg.batch_size):
            b = perm[s:s + cfg.batch_size]
            _, gw, gb = model.loss_and_grads(xs_t[b], yt[b], None if sw_t is None else sw_t[b], cfg.alpha)
            step += 1
            lr = cfg.learning_rate * np.sqrt(1 - cfg.beta2 ** step) / (1 - cfg.beta1 ** step)
            for i, g in enumerate(gw + gb):
                m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * g
                v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * g * g
                params[i] -= lr * m[i] / (np.sqrt(v[i]) + cfg.epsilon)
        loss = model.loss(xs_all[mon_idx], targets[mon_idx], weights_for(mon_idx))
        history.append(loss)
        if loss < best_loss - 1e-10:
            best_loss, stale = loss, 0
            best_params = [p.copy() for p in params]
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    nw = len(model.weights)
    model.weights = [p.copy() for p in best_params[:nw]]
    model.biases = [p.copy() for p in best_params[nw:]]
    model.history = history
    model.meta = {"train_config": _config_dict(cfg), "epochs": len(history), "best_loss": best_loss,
                  "n_train": int(len(tr_idx)), "n_validation": int(n_val)}
    return model


def _config_dict(cfg: TrainConfig) -> dict:
    d = asdict(cfg)
    d["hidden"] = list(cfg.hidden)
    return d


def gradient_check(model: MlpModel, x, y, step: float = 1e-5, alpha: float = 0.0,
                   floor: float = 1e-6) -> float:
    """Max relative error between backprop and central finite differences.

    ``x`` is taken as already standardized and ``y`` in the encoding of
    :meth:`MlpModel.loss_and_grads`. The relative error of each parameter is
    ``|a - n| / max(|a|, |n|, floor)``; the floor keeps parameters whose true
    gradient is zero from dividing round-off by round-off.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _, gw, gb = model.loss_and_grads(x, y, alpha=alpha)
    analytic = np.concatenate([a.ravel() for pair in zip(gw, gb) for a in pair])
    # perturb parameters in place through flat views of each array
    views = [a.reshape(-1) for pair in zip(model.weights, model.biases) for a in pair]
    numeric = np.empty_like(analytic)
    k = 0
    for view in views:
        for j in range(view.size):
            orig = view[j]
            view[j] = orig + step
            up = model.loss(x, y, alpha=alpha)
            view[j] = orig - step
            down = model.loss(x, y, alpha=alpha)
            view[j] = orig
            numeric[k] = (up - down) / (2 * step)
            k += 1
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


# layer sizes of the three models the pipeline trains
ARCHITECTURES = {
    "detector": ("binary", (27, 100, 1)),
    "regressor": ("regression", (12, 100, 1)),
    "recognizer": ("multiclass", (300, 100, 5)),
}


def check_architectures(seed: int = 0, n_samples: int = 16, alpha: float = 1e-4) -> dict[str, float]:
    """Gradient-check freshly initialized models of each pipeline architecture
    on random data; returns the max relative error per model."""
    rng = np.random.default_rng(seed)
    out = {}
    for name, (task, sizes) in ARCHITECTURES.items():
        model = init_model(task, sizes, rng, classes=range(sizes[-1]) if task == "multiclass" else ())
        # nonzero biases so every ReLU is away from its kink with high probability
        for b in model.biases:
            b[:] = rng.normal(0.0, 0.1, size=b.shape)
        x = rng.normal(size=(n_samples, sizes[0]))
        if task == "binary":
            y = (np.arange(n_samples) % 2).astype(float)
        elif task == "multiclass":
            y = (np.arange(n_samples) % sizes[-1]).astype(float)
        else:
            y = rng.normal(size=n_samples)
        out[name] = gradient_check(model, x, y, alpha=alpha)
    return out
