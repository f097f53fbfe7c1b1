"""Dataset container, on-disk format, splits, and experiment result CSVs.

Directory layout (format_version 1):

    meta.json      {"name", "num_nodes", "num_features", "num_classes",
                    "format_version"}
    edges.tsv      one "u<TAB>v" line per edge, u < v, lexicographically sorted
    features.tsv   one row per node, tab-separated decimals (9 significant digits)
    labels.tsv     one integer class id per node
    split.json     {"train": [...], "val": [...], "test": [...]} node indices

Writers emit deterministic bytes so identical datasets produce identical
files; loaders fail loudly with file/line context on any inconsistency.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DimensionMismatchError,
    MissingFileError,
    ParseError,
)
from .graph import Graph, build_graph, connected_components, induced_subgraph

FORMAT_VERSION = 1

RESULT_COLUMNS = (
    "dataset",
    "attack",
    "rate",
    "scorer",
    "judge",
    "filter",
    "residual",
    "seed",
    "phase",
    "accuracy",
    "edges_deleted",
)
# Everything except the per-seed measurement identifies a config cell.
_GROUP_COLUMNS = tuple(
    c for c in RESULT_COLUMNS if c not in ("seed", "accuracy", "edges_deleted")
)


@dataclass(frozen=True)
class Split:
    """Disjoint boolean node masks for train / validation / test."""

    train_mask: np.ndarray
    val_mask: np.ndarray
    test_mask: np.ndarray

    def __post_init__(self):
        n = len(self.train_mask)
        for name in ("train_mask", "val_mask", "test_mask"):
            m = np.asarray(getattr(self, name), dtype=bool)
            if m.shape != (n,):
                raise DimensionMismatchError("split masks must share one length")
            object.__setattr__(self, name, m)
        overlap = (
            (self.train_mask & self.val_mask)
            | (self.train_mask & self.test_mask)
            | (self.val_mask & self.test_mask)
        )
        if np.any(overlap):
            raise DimensionMismatchError(
                f"split masks overlap at node {int(np.flatnonzero(overlap)[0])}"
            )

    @property
    def num_nodes(self) -> int:
        return len(self.train_mask)

    def nodes(self, part: str) -> np.ndarray:
        return np.flatnonzero(getattr(self, f"{part}_mask"))


@dataclass(frozen=True)
class Dataset:
    """Graph + node features + integer labels + split, dimension-checked."""

    name: str
    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    split: Split

    def __post_init__(self):
        n = self.graph.num_nodes
        x = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 2 or x.shape[0] != n:
            raise DimensionMismatchError(
                f"features shape {x.shape} does not match {n} nodes"
            )
        if y.shape != (n,):
            raise DimensionMismatchError(
                f"labels shape {y.shape} does not match {n} nodes"
            )
        if y.size and (y.min() < 0 or y.max() >= self.num_classes):
            raise DimensionMismatchError(
                f"labels must lie in [0, {self.num_classes})"
            )
        if self.split.num_nodes != n:
            raise DimensionMismatchError("split length does not match node count")
        if x.size and not np.all(np.isfinite(x)):
            raise DimensionMismatchError("features contain non-finite values")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    @property
    def num_nodes(self) -> int:
        return self.graph.num_nodes

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def with_graph(self, g: Graph) -> "Dataset":
        """Same nodes/features/labels/split on a different edge set."""
        if g.num_nodes != self.num_nodes:
            raise DimensionMismatchError("replacement graph must keep node count")
        return replace(self, graph=g)


def one_hot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    out = np.zeros((len(labels), num_classes), dtype=np.float64)
    out[np.arange(len(labels)), labels] = 1.0
    return out


def row_normalize(x: np.ndarray) -> np.ndarray:
    """Divide each row by its sum; all-zero rows pass through unchanged."""
    s = x.sum(axis=1, keepdims=True)
    s[s == 0.0] = 1.0
    return x / s


def is_binary(x: np.ndarray) -> bool:
    return bool(np.all((x == 0.0) | (x == 1.0)))


def make_split(
    num_nodes: int,
    train_fraction: float = 0.2,
    val_fraction_of_train: float = 0.1,
    seed: int = 0,
) -> Split:
    """Random node split: a train pool of ⌊tf·N⌋ nodes, ⌊vf·pool⌋ of which
    become validation; everything else is test.
    """
    if not (0.0 < train_fraction < 1.0 and 0.0 < val_fraction_of_train < 1.0):
        raise ValueError("split fractions must lie in (0, 1)")
    pool = int(np.floor(train_fraction * num_nodes))
    n_val = int(np.floor(val_fraction_of_train * pool))
    rng = np.random.default_rng(seed)
    perm = rng.permutation(num_nodes)
    train_mask = np.zeros(num_nodes, dtype=bool)
    val_mask = np.zeros(num_nodes, dtype=bool)
    test_mask = np.zeros(num_nodes, dtype=bool)
    train_mask[perm[: pool - n_val]] = True
    val_mask[perm[pool - n_val : pool]] = True
    test_mask[perm[pool:]] = True
    return Split(train_mask, val_mask, test_mask)


def largest_component(d: Dataset) -> tuple[Dataset, np.ndarray]:
    """Dataset induced on the largest connected component.

    Size ties break toward the component containing the lowest original
    node index.  Returns (dataset, node_index_map) where
    node_index_map[new_id] == old_id.
    """
    labels, count = connected_components(d.graph)
    sizes = np.bincount(labels, minlength=count)
    # Component ids are assigned by lowest contained node, so argmax's
    # first-maximum rule is exactly the documented tie-break.
    keep = int(np.argmax(sizes))
    nodes = np.flatnonzero(labels == keep)
    sub, node_map = induced_subgraph(d.graph, nodes)
    sub_split = Split(
        d.split.train_mask[node_map],
        d.split.val_mask[node_map],
        d.split.test_mask[node_map],
    )
    out = Dataset(
        name=d.name,
        graph=sub,
        features=d.features[node_map],
        labels=d.labels[node_map],
        num_classes=d.num_classes,
        split=sub_split,
    )
    return out, node_map


# ---------------------------------------------------------------------------
# directory I/O


def _require(path: str) -> str:
    if not os.path.isfile(path):
        raise MissingFileError(f"missing required file: {path}")
    return path


def _read_meta(path: str) -> dict:
    with open(_require(path), encoding="utf-8") as f:
        try:
            meta = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(path, e.lineno, f"invalid JSON: {e.msg}") from e
    for key in ("name", "num_nodes", "num_features", "num_classes", "format_version"):
        if key not in meta:
            raise ParseError(path, 0, f"meta.json missing key {key!r}")
    if meta["format_version"] != FORMAT_VERSION:
        raise ParseError(
            path, 0, f"unsupported format_version {meta['format_version']!r}"
        )
    for key in ("num_nodes", "num_features", "num_classes"):
        if not isinstance(meta[key], int) or meta[key] < (1 if key != "num_features" else 0):
            raise ParseError(path, 0, f"meta.json {key} must be a positive integer")
    return meta


def _read_edges(path: str, num_nodes: int) -> np.ndarray:
    edges = []
    prev_key = -1
    with open(_require(path), encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                raise ParseError(path, lineno, "blank line in edge file")
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(path, lineno, f"expected 'u<TAB>v', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(path, lineno, f"non-integer endpoint in {line!r}")
            if not (0 <= u < num_nodes and 0 <= v < num_nodes):
                raise ParseError(
                    path, lineno, f"endpoint outside [0, {num_nodes}): {line!r}"
                )
            if u >= v:
                raise ParseError(
                    path, lineno, f"edges must satisfy u < v, got ({u}, {v})"
                )
            key = u * num_nodes + v
            if key <= prev_key:
                raise ParseError(
                    path, lineno, f"edges out of order or duplicated at ({u}, {v})"
                )
            prev_key = key
            edges.append((u, v))
    return np.array(edges, dtype=np.int64).reshape(len(edges), 2)


def _read_features(path: str, num_nodes: int, num_features: int) -> np.ndarray:
    rows = np.empty((num_nodes, num_features), dtype=np.float64)
    with open(_require(path), encoding="utf-8") as f:
        lineno = 0
        for lineno, line in enumerate(f, start=1):
            if lineno > num_nodes:
                raise ParseError(path, lineno, "more feature rows than nodes")
            parts = line.rstrip("\n").split("\t") if line.rstrip("\n") else []
            if len(parts) != num_features:
                raise ParseError(
                    path, lineno,
                    f"expected {num_features} values, got {len(parts)}",
                )
            try:
                row = np.array(parts, dtype=np.float64)
            except ValueError:
                raise ParseError(path, lineno, "non-numeric feature value")
            if num_features and not np.all(np.isfinite(row)):
                raise ParseError(path, lineno, "non-finite feature value")
            rows[lineno - 1] = row
    if lineno != num_nodes:
        raise DimensionMismatchError(
            f"{path}: {lineno} feature rows for {num_nodes} nodes"
        )
    return rows


def _read_labels(path: str, num_nodes: int, num_classes: int) -> np.ndarray:
    out = np.empty(num_nodes, dtype=np.int64)
    with open(_require(path), encoding="utf-8") as f:
        lineno = 0
        for lineno, line in enumerate(f, start=1):
            if lineno > num_nodes:
                raise ParseError(path, lineno, "more label rows than nodes")
            try:
                y = int(line.strip())
            except ValueError:
                raise ParseError(path, lineno, f"non-integer label {line.strip()!r}")
            if not 0 <= y < num_classes:
                raise ParseError(
                    path, lineno, f"label {y} outside [0, {num_classes})"
                )
            out[lineno - 1] = y
    if lineno != num_nodes:
        raise DimensionMismatchError(
            f"{path}: {lineno} label rows for {num_nodes} nodes"
        )
    return out


def _read_split(path: str, num_nodes: int) -> Split:
    with open(_require(path), encoding="utf-8") as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(path, e.lineno, f"invalid JSON: {e.msg}") from e
    masks = {}
    for part in ("train", "val", "test"):
        if part not in obj:
            raise ParseError(path, 0, f"split.json missing key {part!r}")
        idx = np.asarray(obj[part], dtype=np.int64).reshape(-1)
        if idx.size and (idx.min() < 0 or idx.max() >= num_nodes):
            raise ParseError(path, 0, f"{part} index outside [0, {num_nodes})")
        if len(np.unique(idx)) != len(idx):
            raise ParseError(path, 0, f"duplicate node index in {part}")
        m = np.zeros(num_nodes, dtype=bool)
        m[idx] = True
        masks[part] = m
    try:
        return Split(masks["train"], masks["val"], masks["test"])
    except DimensionMismatchError as e:
        raise ParseError(path, 0, str(e)) from e


def load_dataset(directory: str) -> Dataset:
    """Read and validate one dataset directory."""
    if not os.path.isdir(directory):
        raise MissingFileError(f"dataset directory not found: {directory}")
    meta = _read_meta(os.path.join(directory, "meta.json"))
    n, d, c = meta["num_nodes"], meta["num_features"], meta["num_classes"]
    edges = _read_edges(os.path.join(directory, "edges.tsv"), n)
    features = _read_features(os.path.join(directory, "features.tsv"), n, d)
    labels = _read_labels(os.path.join(directory, "labels.tsv"), n, c)
    split = _read_split(os.path.join(directory, "split.json"), n)
    return Dataset(
        name=str(meta["name"]),
        graph=build_graph(n, edges),
        features=features,
        labels=labels,
        num_classes=c,
        split=split,
    )


def format_float(x: float) -> str:
    """Fixed 9-significant-digit decimal used by every writer in the package."""
    return f"{x:.9g}"


def save_dataset(d: Dataset, directory: str) -> None:
    """Write the directory format with deterministic bytes."""
    os.makedirs(directory, exist_ok=True)
    meta = {
        "name": d.name,
        "num_nodes": d.num_nodes,
        "num_features": d.num_features,
        "num_classes": d.num_classes,
        "format_version": FORMAT_VERSION,
    }
    with open(os.path.join(directory, "meta.json"), "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2)
        f.write("\n")
    with open(os.path.join(directory, "edges.tsv"), "w", encoding="utf-8") as f:
        for u, v in d.graph.edge_array:
            f.write(f"{u}\t{v}\n")
    with open(os.path.join(directory, "features.tsv"), "w", encoding="utf-8") as f:
        for row in d.features:
            f.write("\t".join(format_float(x) for x in row))
            f.write("\n")
    with open(os.path.join(directory, "labels.tsv"), "w", encoding="utf-8") as f:
        for y in d.labels:
            f.write(f"{y}\n")
    split_obj = {
        part: [int(i) for i in d.split.nodes(part)] for part in ("train", "val", "test")
    }
    with open(os.path.join(directory, "split.json"), "w", encoding="utf-8") as f:
        json.dump(split_obj, f, indent=2)
        f.write("\n")


def datasets_equal(a: Dataset, b: Dataset) -> bool:
    """Structural equality (name, edges, features, labels, split)."""
    return (
        a.name == b.name
        and a.num_nodes == b.num_nodes
        and a.num_classes == b.num_classes
        and np.array_equal(a.graph.edge_array, b.graph.edge_array)
        and np.array_equal(a.features, b.features)
        and np.array_equal(a.labels, b.labels)
        and np.array_equal(a.split.train_mask, b.split.train_mask)
        and np.array_equal(a.split.val_mask, b.split.val_mask)
        and np.array_equal(a.split.test_mask, b.split.test_mask)
    )


# ---------------------------------------------------------------------------
# experiment results


@dataclass(frozen=True)
class ResultRow:
    """One (configuration, seed) measurement."""

    dataset: str
    attack: str
    rate: float
    scorer: str
    judge: str
    filter: str
    residual: bool
    seed: int
    phase: str
    accuracy: float
    edges_deleted: int

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy {self.accuracy} outside [0, 1]")

    def key(self) -> tuple:
        """Identity of this cell for resume checks: every column except
        the measured outputs."""
        return (
            self.dataset,
            self.attack,
            format_float(self.rate),
            self.scorer,
            self.judge,
            self.filter,
            self.residual,
            self.seed,
            self.phase,
        )


def _row_to_record(r: ResultRow) -> list[str]:
    return [
        r.dataset,
        r.attack,
        format_float(r.rate),
        r.scorer,
        r.judge,
        r.filter,
        "true" if r.residual else "false",
        str(r.seed),
        r.phase,
        f"{r.accuracy:.6f}",
        str(r.edges_deleted),
    ]


def agg_path_for(path: str) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}_agg{ext or '.csv'}"


def write_results(rows: list[ResultRow], path: str) -> None:
    """Write the per-seed CSV and its aggregated companion.

    The companion groups rows over seeds and reports mean accuracy with
    the standard error of the mean (sample std / sqrt(n); 0 for n=1).
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(RESULT_COLUMNS)
        for r in rows:
            w.writerow(_row_to_record(r))

    groups: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        k = r.key()[:7] + (r.phase,)  # drop seed, keep config identity
        groups.setdefault(k, []).append(r)
    with open(agg_path_for(path), "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(
            list(_GROUP_COLUMNS)
            + ["n_seeds", "accuracy_mean", "accuracy_stderr", "edges_deleted_mean"]
        )
        for k in sorted(groups):
            rs = groups[k]
            acc = np.array([r.accuracy for r in rs])
            dele = np.array([r.edges_deleted for r in rs], dtype=np.float64)
            stderr = float(acc.std(ddof=1) / np.sqrt(len(acc))) if len(acc) > 1 else 0.0
            w.writerow(
                [
                    k[0], k[1], k[2], k[3], k[4], k[5],
                    "true" if k[6] else "false", k[7],
                    str(len(rs)),
                    f"{acc.mean():.6f}",
                    f"{stderr:.6f}",
                    format_float(float(dele.mean())),
                ]
            )


def load_results(path: str) -> list[ResultRow]:
    """Read a per-seed results CSV back (for resuming interrupted grids)."""
    rows: list[ResultRow] = []
    with open(_require(path), encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != list(RESULT_COLUMNS):
            raise ParseError(path, 1, f"unexpected results header {header!r}")
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(RESULT_COLUMNS):
                raise ParseError(path, lineno, "wrong column count")
            try:
                rows.append(
                    ResultRow(
                        dataset=rec[0],
                        attack=rec[1],
                        rate=float(rec[2]),
                        scorer=rec[3],
                        judge=rec[4],
                        filter=rec[5],
                        residual=rec[6] == "true",
                        seed=int(rec[7]),
                        phase=rec[8],
                        accuracy=float(rec[9]),
                        edges_deleted=int(rec[10]),
                    )
                )
            except ValueError as e:
                raise ParseError(path, lineno, str(e)) from e
    return rows
