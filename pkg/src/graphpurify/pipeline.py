"""Purification pipeline: scorer -> judge -> filter, optionally iterated
with a retrained surrogate and residual scoring context.

State flows as (A_t, A_{t-1}).  With residual on, iteration t scores the
edges of A_t while neighborhood-dependent context (surrogate forward pass,
entropy neighborhoods, SVD reconstruction) comes from A_{t-1}; the first
iteration is identical to the non-residual path because A_{-1} = A_0.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset
from .errors import ConfigError
from .gcn import GcnParams, TrainConfig, accuracy, predict, train_surrogate
from .graph import Graph
from .judge_filter import FilterSpec, JudgeSpec, apply_judge_filter
from .scorers import (
    EdgeScores,
    score_cosine,
    score_entropy,
    score_jaccard,
    score_kld,
    score_svd,
)

SCORER_NAMES = ("jaccard", "cosine", "svd", "entropy", "kld")
# Scorers whose scores depend on predictions of a trained surrogate.
SURROGATE_SCORERS = ("entropy", "kld")

STOP_MAX_ITERATIONS = "max_iterations"
STOP_PATIENCE = "patience"
STOP_EDGE_FLOOR = "edge_floor"
STOP_NO_CANDIDATES = "no_candidates"


@dataclass(frozen=True)
class PurifyConfig:
    scorer: str
    judge: JudgeSpec
    filter: FilterSpec
    iterate: bool = False
    residual: bool = False
    max_iterations: int = 20
    min_edges_fraction: float = 0.5
    patience: int = 3
    svd_rank: int = 10
    kld_feature_weight: float = 1.0
    train: TrainConfig = TrainConfig()

    def __post_init__(self):
        if self.scorer not in SCORER_NAMES:
            raise ConfigError(f"unknown scorer {self.scorer!r}")
        if self.residual and not self.iterate:
            raise ConfigError("residual scoring requires iterate=true")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if not 0.0 <= self.min_edges_fraction < 1.0:
            raise ConfigError("min_edges_fraction must lie in [0, 1)")
        if self.patience < 1:
            raise ConfigError("patience must be >= 1")
        if self.svd_rank < 1:
            raise ConfigError("svd_rank must be >= 1")


@dataclass
class IterationRecord:
    iteration: int
    edges_deleted: np.ndarray
    edge_count_after: int
    val_accuracy: float | None
    wall_time: float


@dataclass
class PurifyReport:
    iterations: list[IterationRecord] = field(default_factory=list)
    stopping_reason: str = ""

    @property
    def total_deleted(self) -> int:
        return sum(len(r.edges_deleted) for r in self.iterations)

    def to_json_dict(self, include_wall_time: bool = False) -> dict:
        """Schema: {"stopping_reason": str, "iterations": [{"iteration",
        "edges_deleted" (canonical pairs), "edge_count_after",
        "val_accuracy" (null when no surrogate was trained)}]}.

        Wall times are excluded by default so identical runs serialize to
        identical bytes.
        """
        out = {
            "stopping_reason": self.stopping_reason,
            "iterations": [
                {
                    "iteration": r.iteration,
                    "edges_deleted": [[int(u), int(v)] for u, v in r.edges_deleted],
                    "edge_count_after": r.edge_count_after,
                    "val_accuracy": r.val_accuracy,
                    **({"wall_time": r.wall_time} if include_wall_time else {}),
                }
                for r in self.iterations
            ],
        }
        return out


@dataclass
class PurifyState:
    dataset: Dataset
    graph: Graph
    prev_graph: Graph
    initial_edges: int
    iteration: int = 0
    records: list[IterationRecord] = field(default_factory=list)
    seed: int = 0


def iteration_seed(run_seed: int, iteration: int) -> int:
    """Per-iteration surrogate seed, decorrelated from the run seed."""
    return int(np.random.SeedSequence([run_seed, iteration]).generate_state(1)[0])


def _train_for_iteration(
    state: PurifyState, cfg: PurifyConfig
) -> tuple[GcnParams, float]:
    train_cfg = replace(cfg.train, seed=iteration_seed(state.seed, state.iteration))
    params, _ = train_surrogate(state.dataset, train_cfg, graph=state.graph)
    select_mask = (
        state.dataset.split.val_mask
        if state.dataset.split.val_mask.any()
        else state.dataset.split.train_mask
    )
    probs = predict(params, state.dataset, graph=state.graph)
    return params, accuracy(probs, state.dataset.labels, select_mask)


def compute_scores(state: PurifyState, cfg: PurifyConfig) -> tuple[EdgeScores, float | None]:
    """Score the current edge set; returns (scores, surrogate val accuracy
    or None when the scorer needs no surrogate)."""
    d, g = state.dataset, state.graph
    context = state.prev_graph if cfg.residual else g
    if cfg.scorer == "jaccard":
        return score_jaccard(g, d.features), None
    if cfg.scorer == "cosine":
        return score_cosine(g, d.features), None
    if cfg.scorer == "svd":
        rank = min(cfg.svd_rank, g.num_nodes)
        return score_svd(g, rank, neighborhood_graph=context), None
    params, val_acc = _train_for_iteration(state, cfg)
    pred = predict(params, d, graph=context)
    if cfg.scorer == "kld":
        return (
            score_kld(g, pred, d.features, cfg.kld_feature_weight),
            val_acc,
        )
    scores = score_entropy(
        g, d.features, pred, combine_weight=val_acc, neighborhood_graph=context
    )
    return scores, val_acc


def stopping_check(state: PurifyState, cfg: PurifyConfig) -> str | None:
    """Reason to stop before starting another iteration, or None.

    Checked in order: edge floor, iteration cap, validation patience.
    The patience rule looks at recorded surrogate accuracies: stop when
    the last strict improvement lies >= patience records back.
    """
    max_iters = cfg.max_iterations if cfg.iterate else 1
    if state.graph.num_edges < cfg.min_edges_fraction * state.initial_edges:
        return STOP_EDGE_FLOOR
    if state.iteration >= max_iters:
        return STOP_MAX_ITERATIONS
    accs = [r.val_accuracy for r in state.records if r.val_accuracy is not None]
    if len(accs) > cfg.patience:
        best_index = int(np.argmax(accs))
        if (len(accs) - 1) - best_index >= cfg.patience:
            return STOP_PATIENCE
    return None


def iterate_step(state: PurifyState, cfg: PurifyConfig) -> PurifyState:
    """One purification round: (re)train if needed, score, judge, filter,
    delete, record."""
    started = time.perf_counter()
    scores, val_acc = compute_scores(state, cfg)
    new_graph, deleted = apply_judge_filter(state.graph, scores, cfg.judge, cfg.filter)
    record = IterationRecord(
        iteration=state.iteration,
        edges_deleted=deleted,
        edge_count_after=new_graph.num_edges,
        val_accuracy=val_acc,
        wall_time=time.perf_counter() - started,
    )
    return PurifyState(
        dataset=state.dataset,
        graph=new_graph,
        prev_graph=state.graph,
        initial_edges=state.initial_edges,
        iteration=state.iteration + 1,
        records=state.records + [record],
        seed=state.seed,
    )


def purify(d: Dataset, cfg: PurifyConfig, seed: int = 0) -> tuple[Dataset, PurifyReport]:
    """Run the full pipeline and return (purified dataset, report).

    The purified dataset keeps every node and a subset of the edges.  A
    step that deletes nothing ends the run (nothing left the judge and
    filter agree on).
    """
    state = PurifyState(
        dataset=d,
        graph=d.graph,
        prev_graph=d.graph,
        initial_edges=d.graph.num_edges,
        seed=seed,
    )
    report = PurifyReport()
    while True:
        reason = stopping_check(state, cfg)
        if reason is not None:
            report.stopping_reason = reason
            break
        state = iterate_step(state, cfg)
        if len(state.records[-1].edges_deleted) == 0:
            report.stopping_reason = STOP_NO_CANDIDATES
            break
    report.iterations = state.records
    return d.with_graph(state.graph), report
