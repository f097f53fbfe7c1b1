"""Two-layer graph convolutional network, self-contained.

Forward: softmax(A_hat * ReLU(A_hat * X * W1) * W2), no biases.  Backward is
analytic; optimization is full-batch Adam.  The model doubles as the
surrogate that feeds label-dependent scorers and as the final evaluation
classifier.

Features are row-normalized inside training/prediction; callers pass raw X
(scorers consume the raw matrix, only the GCN sees the normalized one).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .data import Dataset, one_hot, row_normalize
from .errors import EmptyMaskError, ShapeMismatchError
from .graph import Graph

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class GcnParams:
    """Weights of the two layers; shapes (D, H) and (H, C)."""

    w1: np.ndarray
    w2: np.ndarray

    def __post_init__(self):
        w1 = np.asarray(self.w1, dtype=np.float64)
        w2 = np.asarray(self.w2, dtype=np.float64)
        if w1.ndim != 2 or w2.ndim != 2 or w1.shape[1] != w2.shape[0]:
            raise ShapeMismatchError(
                f"incompatible layer shapes {w1.shape} and {w2.shape}"
            )
        if not (np.all(np.isfinite(w1)) and np.all(np.isfinite(w2))):
            raise ShapeMismatchError("weights must be finite")
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "w2", w2)


@dataclass(frozen=True)
class TrainConfig:
    hidden_dim: int = 16
    epochs: int = 200
    learning_rate: float = 0.01
    weight_decay: float = 5e-4
    dropout_rate: float = 0.5
    seed: int = 0
    patience: int = 30

    def __post_init__(self):
        if self.hidden_dim < 1 or self.epochs < 1 or self.patience < 1:
            raise ValueError("hidden_dim, epochs and patience must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)
    best_epoch: int = -1


def normalize_adjacency(g: Graph) -> sp.csr_matrix:
    """Symmetric normalization with self-loops: D~^{-1/2} (A+I) D~^{-1/2}."""
    a = g.adjacency() + sp.identity(g.num_nodes, format="csr")
    inv_sqrt = 1.0 / np.sqrt(np.asarray(a.sum(axis=1)).ravel())
    d = sp.diags(inv_sqrt)
    return (d @ a @ d).tocsr()


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def gcn_forward(
    params: GcnParams,
    x: np.ndarray,
    a_hat: sp.csr_matrix,
    dropout_rate: float = 0.0,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, dict]:
    """Row-stochastic class probabilities plus the cache backward needs.

    Dropout (inverted scaling) is applied to the hidden activations only
    when a generator is supplied and dropout_rate > 0.
    """
    if x.shape[1] != params.w1.shape[0]:
        raise ShapeMismatchError(
            f"features have {x.shape[1]} columns, w1 expects {params.w1.shape[0]}"
        )
    s1 = a_hat @ (x @ params.w1)
    hidden = np.maximum(s1, 0.0)
    if rng is not None and dropout_rate > 0.0:
        keep = 1.0 - dropout_rate
        drop_mask = (rng.random(hidden.shape) < keep) / keep
        hidden_dropped = hidden * drop_mask
    else:
        drop_mask = None
        hidden_dropped = hidden
    logits = a_hat @ (hidden_dropped @ params.w2)
    logp = _log_softmax(logits)
    probs = np.exp(logp)
    cache = {
        "x": x,
        "a_hat": a_hat,
        "s1": s1,
        "hidden_dropped": hidden_dropped,
        "drop_mask": drop_mask,
        "probs": probs,
        "logp": logp,
        "params": params,
    }
    return probs, cache


def masked_loss(
    cache: dict, labels: np.ndarray, mask: np.ndarray, weight_decay: float
) -> float:
    """Mean cross-entropy over mask plus weight_decay/2 * ||W1||^2."""
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        raise EmptyMaskError("loss mask selects no nodes")
    ce = -cache["logp"][idx, labels[idx]].mean()
    return float(ce + 0.5 * weight_decay * np.sum(cache["params"].w1 ** 2))


def gcn_backward(
    cache: dict, labels: np.ndarray, mask: np.ndarray, weight_decay: float
) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradients of masked_loss with respect to (W1, W2)."""
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        raise EmptyMaskError("loss mask selects no nodes")
    params: GcnParams = cache["params"]
    probs, a_hat, x = cache["probs"], cache["a_hat"], cache["x"]
    num_classes = params.w2.shape[1]

    d_logits = np.zeros_like(probs)
    d_logits[idx] = (probs[idx] - one_hot(labels[idx], num_classes)) / len(idx)
    # a_hat is symmetric, so propagating through "a_hat @" is another
    # multiplication by a_hat.
    back = a_hat @ d_logits
    d_w2 = cache["hidden_dropped"].T @ back
    d_hidden = back @ params.w2.T
    if cache["drop_mask"] is not None:
        d_hidden = d_hidden * cache["drop_mask"]
    d_s1 = d_hidden * (cache["s1"] > 0.0)
    d_w1 = x.T @ (a_hat @ d_s1) + weight_decay * params.w1
    return d_w1, d_w2


def glorot_init(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def accuracy(pred: np.ndarray, labels: np.ndarray, mask: np.ndarray) -> float:
    """Fraction of masked nodes whose argmax class (lowest index on ties)
    matches the label."""
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        raise EmptyMaskError("accuracy mask selects no nodes")
    return float(np.mean(np.argmax(pred[idx], axis=1) == labels[idx]))


def train_surrogate(
    d: Dataset, cfg: TrainConfig, graph: Graph | None = None
) -> tuple[GcnParams, TrainHistory]:
    """Full-batch Adam training; keeps the parameters of the best
    validation epoch and stops early after cfg.patience epochs without
    improvement.

    ``graph`` overrides the dataset's edge set (the iterative pipeline
    trains on progressively purified adjacencies).  If the validation mask
    is empty, training accuracy stands in as the selection metric.
    """
    g = graph if graph is not None else d.graph
    x = row_normalize(d.features)
    a_hat = normalize_adjacency(g)
    rng = np.random.default_rng(cfg.seed)
    w1 = glorot_init(rng, d.num_features, cfg.hidden_dim)
    w2 = glorot_init(rng, cfg.hidden_dim, d.num_classes)

    select_mask = (
        d.split.val_mask if d.split.val_mask.any() else d.split.train_mask
    )
    m1 = np.zeros_like(w1)
    v1 = np.zeros_like(w1)
    m2 = np.zeros_like(w2)
    v2 = np.zeros_like(w2)
    history = TrainHistory()
    best_acc = -1.0
    anchor = 0
    best = (w1.copy(), w2.copy())

    for epoch in range(cfg.epochs):
        params = GcnParams(w1, w2)
        _, cache = gcn_forward(params, x, a_hat, cfg.dropout_rate, rng)
        loss = masked_loss(cache, d.labels, d.split.train_mask, cfg.weight_decay)
        g1, g2 = gcn_backward(cache, d.labels, d.split.train_mask, cfg.weight_decay)

        t = epoch + 1
        corr1 = 1.0 - ADAM_BETA1**t
        corr2 = 1.0 - ADAM_BETA2**t
        for w, gw, m, v in ((w1, g1, m1, v1), (w2, g2, m2, v2)):
            m *= ADAM_BETA1
            m += (1.0 - ADAM_BETA1) * gw
            v *= ADAM_BETA2
            v += (1.0 - ADAM_BETA2) * gw**2
            w -= cfg.learning_rate * (m / corr1) / (np.sqrt(v / corr2) + ADAM_EPS)

        eval_probs, _ = gcn_forward(GcnParams(w1, w2), x, a_hat)
        val_acc = accuracy(eval_probs, d.labels, select_mask)
        history.train_loss.append(loss)
        history.val_accuracy.append(val_acc)
        # Ties refresh the retained parameters (the later epoch has seen
        # more training) but not the patience anchor, so a flat plateau
        # still stops early.
        if val_acc > best_acc:
            best_acc = val_acc
            anchor = epoch
        if val_acc == best_acc:
            best = (w1.copy(), w2.copy())
            history.best_epoch = epoch
        if epoch - anchor >= cfg.patience:
            break

    return GcnParams(*best), history


def predict(params: GcnParams, d: Dataset, graph: Graph | None = None) -> np.ndarray:
    """Dropout-free forward pass; rows sum to 1.

    ``graph`` lets the caller evaluate the model against a different
    adjacency than the dataset's (residual scoring does this).
    """
    g = graph if graph is not None else d.graph
    probs, _ = gcn_forward(params, row_normalize(d.features), normalize_adjacency(g))
    return probs


def save_model(params: GcnParams, path: str) -> None:
    """Versioned binary checkpoint; round-trips bit-exactly."""
    # Write through a handle so the file lands at exactly `path` (savez
    # appends .npz to bare string paths).
    with open(path, "wb") as f:
        np.savez(
            f,
            checkpoint_version=np.int64(CHECKPOINT_VERSION),
            w1=params.w1,
            w2=params.w2,
        )


def load_model(path: str) -> GcnParams:
    with np.load(path) as z:
        version = int(z["checkpoint_version"])
        if version != CHECKPOINT_VERSION:
            raise ShapeMismatchError(f"unsupported checkpoint version {version}")
        return GcnParams(z["w1"], z["w2"])
