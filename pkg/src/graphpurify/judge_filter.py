"""Judge (candidate selection from scores) and Filter (structure-preserving
veto) stages.

Judges return candidate edges ordered by ascending (score, canonical edge
index); the singleton filter consumes that order.  Filters return the
accepted deletions sorted by canonical edge index, which is the order the
rest of the package reports deletions in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeMismatchError
from .graph import Graph, _prim_forest, remove_edges
from .scorers import EdgeScores, minmax_normalize

JUDGE_KINDS = ("percentage", "threshold")
FILTER_KINDS = ("singleton", "connectivity", "none")

# Starting-point thresholds per scorer for users who give none; thresholds
# are known to be dataset-specific, so these are defaults, not advice.
DEFAULT_TAU = {"jaccard": 0.01, "cosine": 0.01, "kld": -2.3}


@dataclass(frozen=True)
class JudgeSpec:
    kind: str
    p: float | None = None
    tau: float | None = None

    def __post_init__(self):
        if self.kind not in JUDGE_KINDS:
            raise ConfigError(f"unknown judge kind {self.kind!r}")
        if self.kind == "percentage":
            if self.p is None or self.tau is not None:
                raise ConfigError("percentage judge takes p only")
            if not 0.0 < self.p <= 1.0:
                raise ConfigError(f"judge p must lie in (0, 1], got {self.p}")
        else:
            if self.tau is None or self.p is not None:
                raise ConfigError("threshold judge takes tau only")

    @staticmethod
    def parse(text: str) -> "JudgeSpec":
        """Parse the CLI form 'p:FLOAT' or 't:FLOAT'."""
        head, sep, value = text.partition(":")
        if sep != ":" or head not in ("p", "t"):
            raise ConfigError(f"judge must look like p:FLOAT or t:FLOAT, got {text!r}")
        try:
            x = float(value)
        except ValueError:
            raise ConfigError(f"bad judge value in {text!r}")
        if head == "p":
            return JudgeSpec("percentage", p=x)
        return JudgeSpec("threshold", tau=x)

    def label(self) -> str:
        if self.kind == "percentage":
            return f"p:{self.p:g}"
        return f"t:{self.tau:g}"


@dataclass(frozen=True)
class FilterSpec:
    kind: str

    def __post_init__(self):
        if self.kind not in FILTER_KINDS:
            raise ConfigError(f"unknown filter kind {self.kind!r}")

    @staticmethod
    def parse(text: str) -> "FilterSpec":
        short = {"s": "singleton", "c": "connectivity", "none": "none"}
        if text not in short:
            raise ConfigError(f"filter must be one of s, c, none; got {text!r}")
        return FilterSpec(short[text])

    def label(self) -> str:
        return {"singleton": "s", "connectivity": "c", "none": "none"}[self.kind]


def _check_alignment(g: Graph, scores: EdgeScores) -> None:
    if len(scores.scores) != g.num_edges or not np.array_equal(
        scores.edges, g.edge_array
    ):
        raise ShapeMismatchError("scores are not aligned to this graph's edges")


def _by_ascending_score(scores: np.ndarray) -> np.ndarray:
    # Stable sort over scores aligned to canonical order breaks ties toward
    # the lower canonical edge index.
    return np.argsort(scores, kind="stable")


def judge_percentage(g: Graph, scores: EdgeScores, p: float) -> np.ndarray:
    """The floor(p*K) lowest-scored edges, ascending (score, edge index)."""
    if not 0.0 < p <= 1.0:
        raise ConfigError(f"judge p must lie in (0, 1], got {p}")
    _check_alignment(g, scores)
    k = int(np.floor(p * g.num_edges))
    order = _by_ascending_score(scores.scores)[:k]
    return g.edge_array[order]


def judge_threshold(g: Graph, scores: EdgeScores, tau: float) -> np.ndarray:
    """All edges with score strictly below tau, ascending (score, index)."""
    _check_alignment(g, scores)
    order = _by_ascending_score(scores.scores)
    below = order[scores.scores[order] < tau]
    return g.edge_array[below]


def select_candidates(g: Graph, scores: EdgeScores, judge: JudgeSpec) -> np.ndarray:
    if judge.kind == "percentage":
        return judge_percentage(g, scores, judge.p)
    return judge_threshold(g, scores, judge.tau)


def filter_singleton(g: Graph, candidates: np.ndarray) -> np.ndarray:
    """Sequentially accept deletions that leave both endpoints attached.

    Candidates are processed in the order given (judges supply ascending
    score order, so the most suspicious edges get first claim on the
    degree budget).  An edge is accepted only if both endpoints currently
    have degree >= 2, counting previously accepted deletions.
    """
    cand = np.asarray(candidates, dtype=np.int64).reshape(-1, 2)
    degrees = g.degrees.copy()
    accepted = []
    for u, v in cand:
        if degrees[u] >= 2 and degrees[v] >= 2:
            accepted.append((u, v))
            degrees[u] -= 1
            degrees[v] -= 1
    if not accepted:
        return np.zeros((0, 2), dtype=np.int64)
    out = np.array(accepted, dtype=np.int64)
    return out[np.lexsort((out[:, 1], out[:, 0]))]


def filter_connectivity(
    g: Graph, candidates: np.ndarray, scores: EdgeScores
) -> np.ndarray:
    """Delete only candidates outside a minimum spanning forest.

    Unselected edges get weight 1.0; candidates get 1.0 plus their min-max
    normalized score (a constant candidate block maps to 0.5), so the
    forest prefers trusted edges and sacrifices candidates where a cycle
    allows it.  The component partition of g is preserved exactly.
    """
    _check_alignment(g, scores)
    cand = np.asarray(candidates, dtype=np.int64).reshape(-1, 2)
    if len(cand) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    cand_idx = g.edge_indices(cand)
    weights = np.ones(g.num_edges, dtype=np.float64)
    weights[cand_idx] = 1.0 + minmax_normalize(scores.scores[cand_idx])
    forest = _prim_forest(g, weights)
    deletable = np.setdiff1d(cand_idx, forest)
    return g.edge_array[deletable]


def apply_judge_filter(
    g: Graph, scores: EdgeScores, judge: JudgeSpec, filt: FilterSpec
) -> tuple[Graph, np.ndarray]:
    """Judge -> filter -> delete; returns the new graph and the deletions
    (canonical edge order).  Filter kind 'none' deletes every candidate.
    """
    candidates = select_candidates(g, scores, judge)
    if filt.kind == "singleton":
        deleted = filter_singleton(g, candidates)
    elif filt.kind == "connectivity":
        deleted = filter_connectivity(g, candidates, scores)
    else:
        if len(candidates) == 0:
            deleted = np.zeros((0, 2), dtype=np.int64)
        else:
            deleted = g.edge_array[g.edge_indices(candidates)]
    return remove_edges(g, deleted), deleted
