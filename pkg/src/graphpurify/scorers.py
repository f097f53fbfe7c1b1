"""Per-edge scoring: five measurements of how trustworthy an edge is.

All scorers share one convention: one real score per canonical edge of the
input graph, and a lower score marks an edge as more likely to be deleted.
Jaccard, cosine and SVD scores live in [0, 1]; the symmetrized-KL score is
always <= 0 (0 only for identical endpoint distributions); the entropy
score is min-max normalized to [0, 1].

Scorers that depend on more than the two endpoint feature rows (SVD
reconstruction, neighborhood entropy) accept an optional
``neighborhood_graph``: scores are still produced for the edges of ``g``,
but structural context is taken from that other graph.  The iterative
pipeline uses this to score the current edge set against the previous
iteration's adjacency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import is_binary
from .errors import (
    NegativeEntryError,
    NonBinaryFeaturesError,
    RankOutOfRangeError,
    ShapeMismatchError,
    ZeroProbabilityError,
)
from .graph import Graph

_CHUNK = 2048  # edges per block in feature-space loops, keeps peak memory flat

KLD_SMOOTHING = 1e-9


@dataclass(frozen=True)
class EdgeScores:
    """Scores aligned to a graph's canonical edge list."""

    edges: np.ndarray
    scores: np.ndarray
    scorer_name: str

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=np.float64)
        if s.shape != (len(self.edges),):
            raise ShapeMismatchError(
                f"{len(self.edges)} edges but {s.shape} scores"
            )
        if s.size and not np.all(np.isfinite(s)):
            raise ShapeMismatchError("scores must be finite")
        object.__setattr__(self, "scores", s)


def _check_features(g: Graph, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != g.num_nodes:
        raise ShapeMismatchError(
            f"feature matrix shape {x.shape} does not match {g.num_nodes} nodes"
        )
    return x


def score_jaccard(g: Graph, x: np.ndarray) -> EdgeScores:
    """Jaccard overlap of binary feature rows: M11 / (M01 + M10 + M11).

    Two all-zero rows have an empty union; that degenerate value is pinned
    to 0 (most suspicious).
    """
    x = _check_features(g, x)
    if not is_binary(x):
        raise NonBinaryFeaturesError("jaccard scorer needs 0/1 features")
    e = g.edge_array
    row_sums = x.sum(axis=1)
    scores = np.zeros(len(e), dtype=np.float64)
    for lo in range(0, len(e), _CHUNK):
        idx = e[lo : lo + _CHUNK]
        m11 = np.einsum("ij,ij->i", x[idx[:, 0]], x[idx[:, 1]])
        union = row_sums[idx[:, 0]] + row_sums[idx[:, 1]] - m11
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.where(union > 0, m11 / np.where(union > 0, union, 1.0), 0.0)
        scores[lo : lo + _CHUNK] = s
    return EdgeScores(e, scores, "jaccard")


def score_cosine(g: Graph, x: np.ndarray) -> EdgeScores:
    """Cosine similarity of feature rows; zero-norm rows score 0.

    Negative similarity is clamped to 0 so the score stays in [0, 1]
    (citation features are non-negative, so this is normally inert).
    """
    x = _check_features(g, x)
    e = g.edge_array
    norms = np.sqrt(np.einsum("ij,ij->i", x, x))
    scores = np.zeros(len(e), dtype=np.float64)
    for lo in range(0, len(e), _CHUNK):
        idx = e[lo : lo + _CHUNK]
        dot = np.einsum("ij,ij->i", x[idx[:, 0]], x[idx[:, 1]])
        denom = norms[idx[:, 0]] * norms[idx[:, 1]]
        s = np.where(denom > 0, dot / np.where(denom > 0, denom, 1.0), 0.0)
        scores[lo : lo + _CHUNK] = np.clip(s, 0.0, 1.0)
    return EdgeScores(e, scores, "cosine")


# ---------------------------------------------------------------------------
# truncated SVD


def truncated_svd(g: Graph, rank: int, neighborhood_graph: Graph | None = None) -> np.ndarray:
    """Best rank-k approximation of the dense symmetric adjacency.

    Computed by seeded orthogonal iteration with oversampling: iterate
    Q <- qr(A(AQ)) so paired +/- eigenvalues don't oscillate, extract
    Ritz pairs of A with a small dense eigendecomposition, keep the k
    largest by magnitude.  Deterministic: fixed internal seed.
    """
    src = neighborhood_graph if neighborhood_graph is not None else g
    n = src.num_nodes
    if not 1 <= rank <= n:
        raise RankOutOfRangeError(f"rank must be in [1, {n}], got {rank}")
    if src.num_edges == 0:
        return np.zeros((n, n), dtype=np.float64)

    a = src.adjacency()
    p = min(n, rank + 10)
    rng = np.random.default_rng(0x5BD)
    q, _ = np.linalg.qr(rng.standard_normal((n, p)))

    theta_prev = None
    for _ in range(500):
        q, _ = np.linalg.qr(a @ (a @ q))
        aq = a @ q
        t = q.T @ aq
        t = (t + t.T) / 2.0
        evals, evecs = np.linalg.eigh(t)
        order = np.argsort(-np.abs(evals), kind="stable")[:rank]
        theta = evals[order]
        # Ritz pairs for the kept block.
        v = q @ evecs[:, order]
        resid = aq @ evecs[:, order] - v * theta
        scale = max(1.0, float(np.abs(theta).max()))
        if np.linalg.norm(resid) <= 1e-10 * scale:
            break
        if theta_prev is not None and np.max(np.abs(theta - theta_prev)) <= 1e-13 * scale:
            break
        theta_prev = theta
    return (v * theta) @ v.T


def score_svd(g: Graph, rank: int, neighborhood_graph: Graph | None = None) -> EdgeScores:
    """Read the low-rank reconstruction at each edge, clamped to [0, 1]."""
    approx = truncated_svd(g, rank, neighborhood_graph)
    e = g.edge_array
    scores = np.clip(approx[e[:, 0], e[:, 1]], 0.0, 1.0)
    return EdgeScores(e, scores.astype(np.float64), "svd")


# ---------------------------------------------------------------------------
# neighborhood entropy


def _entropy_of_rows(p: np.ndarray) -> np.ndarray:
    """Shannon entropy of each row after normalization; all-zero rows -> 0.

    Rows are clipped at 0 first: the per-edge "neighborhood minus one
    member" subtraction can leave -1e-17-size residue on entries that are
    exactly cancelled.
    """
    p = np.clip(p, 0.0, None)
    totals = p.sum(axis=1, keepdims=True)
    safe = np.where(totals > 0, totals, 1.0)
    q = p / safe
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(q > 0, q * np.log(q), 0.0)
    return -terms.sum(axis=1)


def _check_nonnegative(m: np.ndarray, what: str) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.size and m.min() < 0:
        raise NegativeEntryError(f"{what} must be non-negative for entropy scoring")
    return m


def node_entropy(g: Graph, m: np.ndarray, node: int) -> float:
    """Entropy of the aggregated distribution over a node's closed
    neighborhood.

    The aggregate is sum_{v in N(u) + u} m_v / sqrt(|N(u)|+1); the scaling
    cancels in the normalization but is kept for fidelity to the stated
    aggregation rule.
    """
    m = _check_nonnegative(m, "entropy input")
    if m.shape[0] != g.num_nodes:
        raise ShapeMismatchError("entropy input must have one row per node")
    nbrs = g.neighbors(node)
    agg = (m[nbrs].sum(axis=0) + m[node]) / np.sqrt(len(nbrs) + 1)
    return float(_entropy_of_rows(agg[None, :])[0])


def _closed_neighborhood_sums(g: Graph, m: np.ndarray) -> np.ndarray:
    """Row u = sum of m over N(u) + u, for all nodes at once."""
    return g.adjacency() @ m + m


def _edge_entropy_raw(
    g: Graph, m: np.ndarray, neighborhood_graph: Graph
) -> np.ndarray:
    """raw(e) = [NE(u) + NE(v) without e] - [NE(u) + NE(v) with e].

    Removing edge (u, v) only changes the aggregates of u and v: drop row
    m_v from u's closed-neighborhood sum and m_u from v's.  O(deg) per
    edge instead of a full recomputation.
    """
    sums = _closed_neighborhood_sums(neighborhood_graph, m)
    h_with = _entropy_of_rows(sums)
    e = g.edge_array
    raw = np.zeros(len(e), dtype=np.float64)
    for lo in range(0, len(e), _CHUNK):
        idx = e[lo : lo + _CHUNK]
        u, v = idx[:, 0], idx[:, 1]
        h_u_wo = _entropy_of_rows(sums[u] - m[v])
        h_v_wo = _entropy_of_rows(sums[v] - m[u])
        raw[lo : lo + _CHUNK] = (h_u_wo + h_v_wo) - (h_with[u] + h_with[v])
    return raw


def minmax_normalize(values: np.ndarray) -> np.ndarray:
    """Map to [0, 1]; a constant array maps to all 0.5."""
    if values.size == 0:
        return values.astype(np.float64)
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return np.full(values.shape, 0.5)
    return (values - lo) / (hi - lo)


def score_entropy(
    g: Graph,
    x: np.ndarray,
    y: np.ndarray,
    combine_weight: float,
    neighborhood_graph: Graph | None = None,
) -> EdgeScores:
    """Entropy-variation score combining a feature part and a label part.

    raw(e) is the entropy drop the edge buys its two endpoints (positive =
    the edge makes neighborhoods more coherent).  Each of the two raw
    arrays is min-max normalized over all edges, then blended as
    (1-w)*feature + w*label with w = combine_weight.
    """
    if not 0.0 <= combine_weight <= 1.0:
        raise ValueError(f"combine_weight must lie in [0, 1], got {combine_weight}")
    x = _check_nonnegative(_check_features(g, x), "feature matrix")
    y = _check_nonnegative(np.asarray(y, dtype=np.float64), "label matrix")
    if y.ndim != 2 or y.shape[0] != g.num_nodes:
        raise ShapeMismatchError("label matrix must have one row per node")
    nbr = neighborhood_graph if neighborhood_graph is not None else g
    feat = minmax_normalize(_edge_entropy_raw(g, x, nbr))
    lab = minmax_normalize(_edge_entropy_raw(g, y, nbr))
    scores = (1.0 - combine_weight) * feat + combine_weight * lab
    return EdgeScores(g.edge_array, scores, "entropy")


# ---------------------------------------------------------------------------
# symmetrized KL divergence


def _check_distributions(p: np.ndarray, what: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 2:
        raise ShapeMismatchError(f"{what} must be 2-D")
    if p.size == 0:
        return p
    if np.any(p <= 0.0):
        raise ZeroProbabilityError(
            f"{what} rows must be strictly positive (smooth before scoring)"
        )
    if np.max(np.abs(p.sum(axis=1) - 1.0)) > 1e-6:
        raise ShapeMismatchError(f"{what} rows must sum to 1")
    return p


def features_to_distributions(x: np.ndarray) -> np.ndarray:
    """Clamp negatives, add a small floor, normalize rows to sum 1."""
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, None) + KLD_SMOOTHING
    return x / x.sum(axis=1, keepdims=True)


def _sym_kl(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """KL(a||b) + KL(b||a) per paired row; inputs strictly positive."""
    return np.einsum("ij,ij->i", a - b, np.log(a) - np.log(b))


def score_kld(
    g: Graph,
    pred: np.ndarray,
    x: np.ndarray | None = None,
    feature_weight: float = 1.0,
) -> EdgeScores:
    """Negative symmetrized KL divergence between endpoint distributions.

    S(e) = -[KL(p_u||p_v) + KL(p_v||p_u)]
           - feature_weight * [KL(x~_u||x~_v) + KL(x~_v||x~_u)]

    where x~ rows are the feature rows converted to distributions.  The
    prediction rows are used exactly as given (they must already be
    smoothed); the feature term is skipped entirely at feature_weight 0.
    """
    if feature_weight < 0:
        raise ValueError(f"feature_weight must be >= 0, got {feature_weight}")
    pred = _check_distributions(pred, "prediction matrix")
    if pred.shape[0] != g.num_nodes:
        raise ShapeMismatchError("prediction matrix must have one row per node")
    e = g.edge_array
    scores = np.zeros(len(e), dtype=np.float64)
    use_features = feature_weight > 0 and x is not None
    if use_features:
        xd = features_to_distributions(_check_features(g, x))
    for lo in range(0, len(e), _CHUNK):
        idx = e[lo : lo + _CHUNK]
        s = -_sym_kl(pred[idx[:, 0]], pred[idx[:, 1]])
        if use_features:
            s = s - feature_weight * _sym_kl(xd[idx[:, 0]], xd[idx[:, 1]])
        scores[lo : lo + _CHUNK] = s
    # sym KL is >= 0 mathematically; tiny negative-zero noise would break
    # the score <= 0 contract, so clamp from above.
    return EdgeScores(e, np.minimum(scores, 0.0), "kld")
