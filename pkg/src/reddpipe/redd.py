"""REDD: the disinformation classifier over reduced page embeddings.

A feed-forward network with exactly three SELU hidden layers and a sigmoid
output unit (the linear variant is a single affine layer + sigmoid), trained
by seeded mini-batch gradient descent on binary cross-entropy. Everything is
deterministic given (data, config): initialization, shuffling, and batching
all derive from the config seed.

All arithmetic runs in float64; trained weights are snapped to their
float32 representation at the end of training so the on-disk model file
(32-bit floats) reproduces predictions exactly.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import PageRecord
from .errors import DimensionError, ReddpipeError, ValidationError

# Standard published SELU constants; recorded in every model file.
SELU_LAMBDA = 1.0507009873554805
SELU_ALPHA = 1.6732632423543772

ARCHITECTURES = ("linear", "nonlinear")
OPTIMIZERS = ("sgd", "momentum")

GRADCHECK_MAX_BATCH = 8

# An epoch must improve the train loss by at least this much to reset the
# early-stopping patience counter.
EARLY_STOP_MIN_DELTA = 1e-4


def selu(x):
    """lambda*x for x > 0, lambda*alpha*(exp(x)-1) otherwise."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 0.0, SELU_LAMBDA * x, SELU_LAMBDA * SELU_ALPHA * np.expm1(x))


def _selu_grad(x):
    return np.where(x > 0.0, SELU_LAMBDA, SELU_LAMBDA * SELU_ALPHA * np.exp(x))


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; the seed drives init, shuffling, batching."""

    epochs: int = 50
    batch_size: int = 64
    learning_rate: float = 0.01
    seed: int = 0
    optimizer: str = "sgd"
    momentum: float = 0.9
    hidden_dims: tuple = (128, 64, 32)
    architecture: str = "nonlinear"
    early_stop_patience: Optional[int] = None
    early_stop_metric: str = "train_loss"

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0 or self.learning_rate <= 0:
            raise ValidationError("epochs, batch_size and learning_rate must be positive")
        if self.optimizer not in OPTIMIZERS:
            raise ValidationError(f"unknown optimizer {self.optimizer!r}")
        if self.architecture not in ARCHITECTURES:
            raise ValidationError(f"unknown architecture {self.architecture!r}")
        if self.architecture == "nonlinear" and len(self.hidden_dims) != 3:
            raise ValidationError(
                f"nonlinear architecture takes exactly three hidden layers, "
                f"got {len(self.hidden_dims)}"
            )
        if self.early_stop_patience is not None and self.early_stop_patience <= 0:
            raise ValidationError("early_stop_patience must be positive")
        if self.early_stop_metric != "train_loss":
            raise ValidationError(
                f"unsupported early-stop metric {self.early_stop_metric!r}"
            )
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))

    def to_json(self) -> dict:
        return {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
            "optimizer": self.optimizer,
            "momentum": self.momentum,
            "hidden_dims": list(self.hidden_dims),
            "architecture": self.architecture,
            "early_stop_patience": self.early_stop_patience,
            "early_stop_metric": self.early_stop_metric,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TrainConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = [k for k in obj if k not in known]
        if unknown:
            raise ValidationError(f"unknown train-config keys {unknown}")
        kwargs = dict(obj)
        if "hidden_dims" in kwargs:
            kwargs["hidden_dims"] = tuple(kwargs["hidden_dims"])
        return cls(**kwargs)


@dataclass
class ReddModel:
    """Weights and metadata of one trained classifier version."""

    architecture: str
    layer_dims: tuple
    weights: list
    biases: list
    selu_lambda: float = SELU_LAMBDA
    selu_alpha: float = SELU_ALPHA
    version: int = 1
    training_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValidationError(f"unknown architecture {self.architecture!r}")
        self.layer_dims = tuple(int(d) for d in self.layer_dims)
        if self.layer_dims[-1] != 1:
            raise ValidationError("output layer must have exactly one unit")
        n_hidden = len(self.layer_dims) - 2
        if self.architecture == "nonlinear" and n_hidden != 3:
            raise ValidationError("nonlinear model must have exactly three hidden layers")
        if self.architecture == "linear" and n_hidden != 0:
            raise ValidationError("linear model must have no hidden layers")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            expect = (self.layer_dims[i + 1], self.layer_dims[i])
            if w.shape != expect or b.shape != (self.layer_dims[i + 1],):
                raise DimensionError(
                    f"layer {i}: weight shape {w.shape} / bias shape {b.shape} "
                    f"do not match dims {self.layer_dims}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValidationError(f"layer {i}: non-finite parameters")

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]


def init_model(
    d_in: int,
    architecture: str = "nonlinear",
    hidden_dims: Sequence[int] = (128, 64, 32),
    seed=0,
) -> ReddModel:
    """Seeded Gaussian init with std 1/sqrt(fan_in); biases start at zero."""
    if architecture not in ARCHITECTURES:
        raise ValidationError(f"unknown architecture {architecture!r}")
    dims = (d_in, *hidden_dims, 1) if architecture == "nonlinear" else (d_in, 1)
    rng = np.random.Generator(np.random.PCG64(seed))
    weights = []
    biases = []
    for fan_in, fan_out in zip(dims, dims[1:]):
        weights.append(rng.normal(0.0, 1.0 / np.sqrt(fan_in), (fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return ReddModel(architecture=architecture, layer_dims=dims, weights=weights, biases=biases)


def _forward_trace(m: ReddModel, x: np.ndarray):
    """Forward pass keeping pre-activations and activations for backprop."""
    h = x
    zs = []
    activations = [x]
    for w, b in zip(m.weights[:-1], m.biases[:-1]):
        z = h @ w.T + b
        zs.append(z)
        h = selu(z)
        activations.append(h)
    logits = (h @ m.weights[-1].T + m.biases[-1]).reshape(-1)
    probs = np.clip(_sigmoid(logits), 1e-12, 1.0 - 1e-12)
    return probs, zs, activations


def _as_batch(m: ReddModel, batch) -> np.ndarray:
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.ndim != 2 or x.shape[1] != m.input_dim:
        raise DimensionError(
            f"expected batch of {m.input_dim}-dim rows, got shape {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise ValidationError("batch contains non-finite values")
    return x


def forward(m: ReddModel, batch) -> np.ndarray:
    """Predicted disinformation probabilities, one per input row."""
    x = _as_batch(m, batch)
    probs, _, _ = _forward_trace(m, x)
    return probs


def bce_loss(predictions, labels) -> float:
    """Mean binary cross-entropy with predictions clamped to [1e-7, 1 - 1e-7]."""
    p = np.asarray(predictions, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if p.shape != y.shape:
        raise ValidationError(f"lengths differ: {p.shape} vs {y.shape}")
    p = np.clip(p, 1e-7, 1.0 - 1e-7)
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log1p(-p))))


def _gradients(m: ReddModel, x: np.ndarray, y: np.ndarray):
    """Analytic gradients of mean BCE w.r.t. every weight and bias."""
    n = x.shape[0]
    probs, zs, activations = _forward_trace(m, x)
    delta = ((probs - y) / n).reshape(-1, 1)
    grads_w = [None] * len(m.weights)
    grads_b = [None] * len(m.biases)
    grads_w[-1] = delta.T @ activations[-1]
    grads_b[-1] = delta.sum(axis=0)
    upstream = delta @ m.weights[-1]
    for layer in range(len(m.weights) - 2, -1, -1):
        dz = upstream * _selu_grad(zs[layer])
        grads_w[layer] = dz.T @ activations[layer]
        grads_b[layer] = dz.sum(axis=0)
        if layer > 0:
            upstream = dz @ m.weights[layer]
    return grads_w, grads_b


def _labeled_matrix(pages: Sequence[PageRecord]):
    xs = []
    ys = []
    for rec in pages:
        if rec.embedding_reduced is None:
            raise ValidationError(f"page {rec.page_id!r} has no embedding_reduced")
        if rec.label is None:
            raise ValidationError(f"page {rec.page_id!r} has no label")
        xs.append(np.asarray(rec.embedding_reduced, dtype=np.float64))
        ys.append(float(rec.label))
    dims = {v.shape[0] for v in xs}
    if len(dims) > 1:
        raise DimensionError(f"mixed embedding dimensions {sorted(dims)}")
    return np.stack(xs), np.asarray(ys)


def train(pages: Sequence[PageRecord], cfg: TrainConfig = TrainConfig()) -> ReddModel:
    """Train a classifier on labeled pages with reduced embeddings.

    Rejects single-class data. Aborts with diagnostics if the loss goes
    non-finite. The returned model records its training metadata, including
    the initial (epoch-0) and final train loss.
    """
    if len(pages) < 2:
        raise ValidationError("training requires at least two records")
    x, y = _labeled_matrix(pages)
    if len(set(y.tolist())) < 2:
        raise ValidationError("training data contains a single class; need both labels")

    init_ss, shuffle_ss = np.random.SeedSequence(cfg.seed).spawn(2)
    model = init_model(
        x.shape[1],
        architecture=cfg.architecture,
        hidden_dims=cfg.hidden_dims,
        seed=init_ss,
    )
    shuffle_rng = np.random.Generator(np.random.PCG64(shuffle_ss))

    initial_loss = bce_loss(forward(model, x), y)
    velocity_w = [np.zeros_like(w) for w in model.weights]
    velocity_b = [np.zeros_like(b) for b in model.biases]

    best_loss = np.inf
    stale = 0
    epochs_run = 0
    for epoch in range(cfg.epochs):
        perm = shuffle_rng.permutation(x.shape[0])
        for start in range(0, x.shape[0], cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            gw, gb = _gradients(model, x[idx], y[idx])
            if cfg.optimizer == "momentum":
                for i in range(len(model.weights)):
                    velocity_w[i] = cfg.momentum * velocity_w[i] - cfg.learning_rate * gw[i]
                    velocity_b[i] = cfg.momentum * velocity_b[i] - cfg.learning_rate * gb[i]
                    model.weights[i] = model.weights[i] + velocity_w[i]
                    model.biases[i] = model.biases[i] + velocity_b[i]
            else:
                for i in range(len(model.weights)):
                    model.weights[i] = model.weights[i] - cfg.learning_rate * gw[i]
                    model.biases[i] = model.biases[i] - cfg.learning_rate * gb[i]
        epochs_run = epoch + 1
        epoch_loss = bce_loss(forward(model, x), y)
        if not np.isfinite(epoch_loss):
            raise ReddpipeError(
                f"training diverged: non-finite loss at epoch {epoch + 1} "
                f"(lr={cfg.learning_rate}, batch={cfg.batch_size}); "
                f"lower the learning rate"
            )
        if cfg.early_stop_patience is not None:
            if epoch_loss < best_loss - EARLY_STOP_MIN_DELTA:
                best_loss = epoch_loss
                stale = 0
            else:
                stale += 1
                if stale >= cfg.early_stop_patience:
                    break

    # Snap to the float32 grid so the on-disk 32-bit model is lossless.
    for i in range(len(model.weights)):
        model.weights[i] = model.weights[i].astype(np.float32).astype(np.float64)
        model.biases[i] = model.biases[i].astype(np.float32).astype(np.float64)

    final_loss = bce_loss(forward(model, x), y)
    model.training_meta = {
        "seed": cfg.seed,
        "epochs": cfg.epochs,
        "epochs_run": epochs_run,
        "learning_rate": cfg.learning_rate,
        "batch_size": cfg.batch_size,
        "optimizer": cfg.optimizer,
        "n_records": int(x.shape[0]),
        "initial_train_loss": initial_loss,
        "final_train_loss": final_loss,
    }
    return model


def gradient_check(m: ReddModel, batch, labels, step: float = 1e-4) -> float:
    """Max relative error between analytic and central finite-difference grads.

    Checks every parameter of every layer on a small batch (at most 8 rows).
    """
    x = _as_batch(m, batch)
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if x.shape[0] > GRADCHECK_MAX_BATCH:
        raise ValidationError(
            f"gradient_check batch must have at most {GRADCHECK_MAX_BATCH} rows"
        )
    if y.shape[0] != x.shape[0]:
        raise ValidationError("labels length does not match batch")

    analytic_w, analytic_b = _gradients(m, x, y)

    def loss_at() -> float:
        probs, _, _ = _forward_trace(m, x)
        return bce_loss(probs, y)

    worst = 0.0
    for params, grads in ((m.weights, analytic_w), (m.biases, analytic_b)):
        for arr, grad in zip(params, grads):
            flat = arr.reshape(-1)
            gflat = grad.reshape(-1)
            for j in range(flat.shape[0]):
                orig = flat[j]
                flat[j] = orig + step
                up = loss_at()
                flat[j] = orig - step
                down = loss_at()
                flat[j] = orig
                numeric = (up - down) / (2.0 * step)
                denom = max(abs(gflat[j]) + abs(numeric), 1e-6)
                worst = max(worst, abs(gflat[j] - numeric) / denom)
    return worst


def predict_pages(m: ReddModel, pages: Sequence[PageRecord]) -> list:
    """Score pages in input order; returns (page_id, probability) pairs."""
    if not pages:
        return []
    xs = []
    for rec in pages:
        if rec.embedding_reduced is None:
            raise ValidationError(f"page {rec.page_id!r} has no embedding_reduced")
        xs.append(np.asarray(rec.embedding_reduced, dtype=np.float64))
    probs = forward(m, np.stack(xs))
    return [(rec.page_id, float(p)) for rec, p in zip(pages, probs)]


# --- model file ---------------------------------------------------------------

def _encode(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f4").tobytes()).decode("ascii")


def _decode(payload: str, shape) -> np.ndarray:
    raw = base64.b64decode(payload)
    return np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float64)


def save_model(m: ReddModel, path) -> None:
    """Header plus parameters as little-endian 32-bit floats, layer by layer."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "architecture": m.architecture,
        "layer_dims": list(m.layer_dims),
        "selu_lambda": m.selu_lambda,
        "selu_alpha": m.selu_alpha,
        "version": m.version,
        "training_meta": m.training_meta,
        "weights": [_encode(w) for w in m.weights],
        "biases": [_encode(b) for b in m.biases],
    }
    path.write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")


def load_model(path) -> ReddModel:
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"model file not found: {path}")
    doc = json.loads(path.read_text(encoding="utf-8"))
    try:
        dims = tuple(int(d) for d in doc["layer_dims"])
        weights = [
            _decode(p, (dims[i + 1], dims[i])) for i, p in enumerate(doc["weights"])
        ]
        biases = [_decode(p, (dims[i + 1],)) for i, p in enumerate(doc["biases"])]
        return ReddModel(
            architecture=doc["architecture"],
            layer_dims=dims,
            weights=weights,
            biases=biases,
            selu_lambda=float(doc["selu_lambda"]),
            selu_alpha=float(doc["selu_alpha"]),
            version=int(doc["version"]),
            training_meta=doc.get("training_meta", {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed model file: {exc!r}") from exc
