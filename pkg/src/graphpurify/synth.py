"""Deterministic synthetic datasets for tests and demonstrations.

A planted-partition graph with binary block features: nodes in class c get
ones in the c-th feature block, then a per-bit flip noise.  Same-class node
pairs connect with probability p_in, cross-class pairs with p_out.  All
randomness flows from the seed.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset, make_split
from .graph import build_graph, connected_components


def synthetic_dataset(
    num_nodes: int = 60,
    num_classes: int = 3,
    p_in: float = 0.2,
    p_out: float = 0.01,
    features_per_class: int = 8,
    noise: float = 0.05,
    train_fraction: float = 0.2,
    val_fraction_of_train: float = 0.1,
    seed: int = 0,
    ensure_connected: bool = True,
    name: str = "synthetic",
) -> Dataset:
    """Build a planted-partition dataset.

    With ensure_connected, components are linked afterwards by an edge
    between each component's lowest node and the lowest node of the next
    component (deterministic, at most components-1 extra edges).
    """
    rng = np.random.default_rng(seed)
    labels = np.arange(num_nodes, dtype=np.int64) % num_classes
    iu, iv = np.triu_indices(num_nodes, k=1)
    probs = np.where(labels[iu] == labels[iv], p_in, p_out)
    mask = rng.random(len(iu)) < probs
    edges = np.stack([iu[mask], iv[mask]], axis=1)
    g = build_graph(num_nodes, edges)

    if ensure_connected:
        comp, count = connected_components(g)
        if count > 1:
            anchors = [int(np.flatnonzero(comp == c)[0]) for c in range(count)]
            extra = np.array(
                [[anchors[i], anchors[i + 1]] for i in range(count - 1)],
                dtype=np.int64,
            )
            g = build_graph(num_nodes, np.concatenate([g.edge_array, extra], axis=0))

    dim = num_classes * features_per_class
    features = np.zeros((num_nodes, dim))
    for c in range(num_classes):
        block = slice(c * features_per_class, (c + 1) * features_per_class)
        features[labels == c, block] = 1.0
    flips = rng.random(features.shape) < noise
    features = np.abs(features - flips.astype(np.float64))

    split = make_split(num_nodes, train_fraction, val_fraction_of_train, seed=seed)
    return Dataset(
        name=name,
        graph=g,
        features=features,
        labels=labels,
        num_classes=num_classes,
        split=split,
    )
