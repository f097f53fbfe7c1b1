"""Poisoning attacks used to evaluate purification at desk scale.

Every attack keeps nodes, features, labels and splits fixed; only the edge
set changes.  The perturbation budget is B = floor(rate * K) edges and all
randomness flows from the attack seed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace as dc_replace

import numpy as np
import scipy.sparse as sp

from .data import Dataset, one_hot, row_normalize
from .errors import BudgetInfeasibleError, ConfigError
from .gcn import TrainConfig, gcn_forward, normalize_adjacency, train_surrogate
from .graph import Graph, build_graph

ATTACK_METHODS = ("dice", "random_insert", "grad_saliency")


@dataclass(frozen=True)
class AttackSpec:
    method: str
    rate: float
    seed: int = 0
    dice_remove_fraction: float = 0.5
    grad_recompute_every: int = 20

    def __post_init__(self):
        if self.method not in ATTACK_METHODS:
            raise ConfigError(f"unknown attack method {self.method!r}")
        if not 0.0 < self.rate < 1.0:
            raise ConfigError(f"attack rate must lie in (0, 1), got {self.rate}")
        if not 0.0 <= self.dice_remove_fraction <= 1.0:
            raise ConfigError("dice_remove_fraction must lie in [0, 1]")
        if self.grad_recompute_every < 1:
            raise ConfigError("grad_recompute_every must be >= 1")


def _budget(d: Dataset, spec: AttackSpec) -> int:
    b = int(np.floor(spec.rate * d.graph.num_edges))
    if b < 1:
        raise BudgetInfeasibleError(
            f"rate {spec.rate} on {d.graph.num_edges} edges gives a zero budget"
        )
    return b


def _pair_keys(pairs: np.ndarray, n: int) -> np.ndarray:
    return pairs[:, 0] * n + pairs[:, 1]


def _keys_to_pairs(keys: np.ndarray, n: int) -> np.ndarray:
    return np.stack([keys // n, keys % n], axis=1).astype(np.int64)


def _all_nonedge_keys(g: Graph) -> np.ndarray:
    """Keys of every canonical non-edge.  Dense enumeration; the package
    targets desk-scale graphs where N^2/2 candidate pairs fit in memory."""
    n = g.num_nodes
    chunks = [u * n + np.arange(u + 1, n, dtype=np.int64) for u in range(n - 1)]
    all_keys = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
    return np.setdiff1d(all_keys, _pair_keys(g.edge_array, n), assume_unique=True)


def _cross_label_nonedge_keys(g: Graph, labels: np.ndarray) -> np.ndarray:
    """Keys of canonical non-edges whose endpoints carry different labels."""
    n = g.num_nodes
    classes = np.unique(labels)
    parts = []
    for i, a in enumerate(classes):
        na = np.flatnonzero(labels == a)
        for b in classes[i + 1 :]:
            nb = np.flatnonzero(labels == b)
            u = np.minimum.outer(na, nb).ravel()
            v = np.maximum.outer(na, nb).ravel()
            parts.append(u * n + v)
    if not parts:
        return np.zeros(0, dtype=np.int64)
    cross = np.unique(np.concatenate(parts))
    e = g.edge_array
    edge_keys = _pair_keys(e[labels[e[:, 0]] != labels[e[:, 1]]], n)
    return np.setdiff1d(cross, edge_keys, assume_unique=True)


def attack_dice(
    d: Dataset, spec: AttackSpec
) -> tuple[Dataset, np.ndarray, np.ndarray]:
    """Delete same-label edges, connect cross-label non-edges.

    Budget splits as floor(dice_remove_fraction * B) deletions, the rest
    insertions.  Returns (attacked dataset, injected edges, removed
    edges), both canonical.
    """
    b = _budget(d, spec)
    n_remove = int(np.floor(spec.dice_remove_fraction * b))
    n_insert = b - n_remove
    g, labels, n = d.graph, d.labels, d.num_nodes
    rng = np.random.default_rng(spec.seed)

    e = g.edge_array
    same = np.flatnonzero(labels[e[:, 0]] == labels[e[:, 1]])
    if len(same) < n_remove:
        raise BudgetInfeasibleError(
            f"need {n_remove} same-label edges to delete, only {len(same)} exist"
        )
    removed_idx = (
        np.sort(rng.choice(same, size=n_remove, replace=False))
        if n_remove
        else np.zeros(0, dtype=np.int64)
    )
    removed = e[removed_idx]

    candidates = _cross_label_nonedge_keys(g, labels)
    if len(candidates) < n_insert:
        raise BudgetInfeasibleError(
            f"need {n_insert} cross-label non-edges, only {len(candidates)} exist"
        )
    injected_keys = (
        np.sort(rng.choice(candidates, size=n_insert, replace=False))
        if n_insert
        else np.zeros(0, dtype=np.int64)
    )
    injected = _keys_to_pairs(injected_keys, n)

    keep = np.ones(g.num_edges, dtype=bool)
    keep[removed_idx] = False
    new_edges = np.concatenate([e[keep], injected], axis=0)
    return d.with_graph(build_graph(n, new_edges)), injected, removed


def attack_random_insert(
    d: Dataset, spec: AttackSpec
) -> tuple[Dataset, np.ndarray]:
    """Insert B uniformly random non-edges, label-blind."""
    b = _budget(d, spec)
    g, n = d.graph, d.num_nodes
    candidates = _all_nonedge_keys(g)
    if len(candidates) < b:
        raise BudgetInfeasibleError(
            f"need {b} non-edges, only {len(candidates)} exist"
        )
    rng = np.random.default_rng(spec.seed)
    keys = np.sort(rng.choice(candidates, size=b, replace=False))
    injected = _keys_to_pairs(keys, n)
    new_edges = np.concatenate([g.edge_array, injected], axis=0)
    return d.with_graph(build_graph(n, new_edges)), injected


def adjacency_loss_gradient(params, d: Dataset, g: Graph) -> np.ndarray:
    """Gradient of the masked training loss with respect to each entry of
    the dense symmetric adjacency, propagated through the normalization
    D~^{-1/2}(A+I)D~^{-1/2} analytically.

    Returns the N x N matrix of d loss / d A_uv for the symmetric pair
    (u, v); entries on existing and non-existing pairs are both meaningful
    (insertion pushes A_uv from 0 up).
    """
    x = row_normalize(d.features)
    a_hat = normalize_adjacency(g)
    _, cache = gcn_forward(params, x, a_hat)
    mask = d.split.train_mask
    idx = np.flatnonzero(mask)
    num_classes = params.w2.shape[1]
    d_logits = np.zeros_like(cache["probs"])
    d_logits[idx] = (cache["probs"][idx] - one_hot(d.labels[idx], num_classes)) / len(
        idx
    )

    # dL/dA_hat has two paths: logits = A_hat (H W2) and S1 = A_hat (X W1).
    hw2 = cache["hidden_dropped"] @ params.w2
    d_s1 = ((a_hat @ d_logits) @ params.w2.T) * (cache["s1"] > 0.0)
    xw1 = x @ params.w1
    grad_ahat = d_logits @ hw2.T + d_s1 @ xw1.T

    # Through A_hat_ij = (A+I)_ij * r_i r_j with r_i = deg~^{-1/2}:
    # dL/dA_uv = S_uv r_u r_v - q_u/(2 deg~_u) - q_v/(2 deg~_v),
    # S = grad + grad^T, q_i = sum_j S_ij A_hat_ij.
    s = grad_ahat + grad_ahat.T
    a_tilde = g.adjacency() + sp.identity(g.num_nodes, format="csr")
    deg = np.asarray(a_tilde.sum(axis=1)).ravel()
    r = 1.0 / np.sqrt(deg)
    q = np.asarray((a_hat.multiply(s)).sum(axis=1)).ravel()
    correction = q / (2.0 * deg)
    return s * np.outer(r, r) - correction[:, None] - correction[None, :]


def attack_grad_saliency(
    d: Dataset, spec: AttackSpec, cfg: TrainConfig
) -> tuple[Dataset, np.ndarray]:
    """Greedy gradient-guided edge insertion.

    Trains one surrogate on the clean graph (seeded by the attack seed),
    then repeatedly inserts the non-edge with the largest loss-increasing
    adjacency gradient, recomputing the gradient on the perturbed graph
    every ``grad_recompute_every`` insertions.  The surrogate parameters
    stay fixed throughout.
    """
    b = _budget(d, spec)
    n = d.num_nodes
    nonedges = _all_nonedge_keys(d.graph)
    if len(nonedges) < b:
        raise BudgetInfeasibleError(f"need {b} non-edges, only {len(nonedges)} exist")

    params, _ = train_surrogate(d, dc_replace(cfg, seed=spec.seed))
    g = d.graph
    available = np.ones(len(nonedges), dtype=bool)
    chosen: list[int] = []
    while len(chosen) < b:
        grad = adjacency_loss_gradient(params, d, g)
        keys_left = nonedges[available]
        pairs = _keys_to_pairs(keys_left, n)
        sal = grad[pairs[:, 0], pairs[:, 1]]
        take = min(spec.grad_recompute_every, b - len(chosen))
        # Descending saliency, ties toward the lower canonical key.
        order = np.argsort(-sal, kind="stable")[:take]
        picked = keys_left[order]
        chosen.extend(int(k) for k in picked)
        pos = np.searchsorted(nonedges, picked)
        available[pos] = False
        g = build_graph(
            n, np.concatenate([g.edge_array, _keys_to_pairs(picked, n)], axis=0)
        )
    injected = _keys_to_pairs(np.sort(np.array(chosen, dtype=np.int64)), n)
    return d.with_graph(g), injected
