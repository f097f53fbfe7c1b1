"""Command-line surface: purify, attack, eval, scores, experiment.

Conventions: exit 0 on success, 1 on runtime failure, 2 on usage or
configuration errors.  Progress goes to standard error; data goes only to
files or standard output.  Every command is deterministic given its flags
and seed, and repeated runs produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .attacks import (
    AttackSpec,
    attack_dice,
    attack_grad_saliency,
    attack_random_insert,
)
from .data import (
    Dataset,
    ResultRow,
    format_float,
    load_dataset,
    load_results,
    save_dataset,
    write_results,
)
from .errors import ConfigError, GraphPurifyError
from .gcn import TrainConfig, accuracy, predict, train_surrogate
from .judge_filter import FilterSpec, JudgeSpec
from .pipeline import PurifyConfig, PurifyReport, purify
from .scorers import EdgeScores
from . import pipeline as pipeline_mod

SIDECAR_NAME = "perturbation.json"
REPORT_NAME = "report.json"

_ATTACK_SHORT = {"dice": "dice", "random": "random_insert", "grad": "grad_saliency"}


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def worker_count() -> int:
    """Worker cap from UGP_THREADS; defaults to the logical core count."""
    raw = os.environ.get("UGP_THREADS", "").strip()
    if raw:
        try:
            k = int(raw)
        except ValueError:
            raise ConfigError(f"UGP_THREADS must be an integer, got {raw!r}")
        if k < 1:
            raise ConfigError("UGP_THREADS must be >= 1")
        return k
    return os.cpu_count() or 1


def _write_json(obj: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2)
        f.write("\n")


def _read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _train_config(args, seed: int) -> TrainConfig:
    return TrainConfig(
        hidden_dim=args.hidden_dim, epochs=args.epochs, seed=seed
    )


def _purify_config(args) -> PurifyConfig:
    return PurifyConfig(
        scorer=args.scorer,
        judge=JudgeSpec.parse(args.judge),
        filter=FilterSpec.parse(args.filter),
        iterate=args.iterate,
        residual=args.residual,
        max_iterations=args.max_iters,
        svd_rank=args.svd_rank,
        kld_feature_weight=args.kld_feature_weight,
        train=_train_config(args, seed=args.seed),
    )


def _report_json(report: PurifyReport, cfg: PurifyConfig, seed: int) -> dict:
    out = {
        "config": {
            "scorer": cfg.scorer,
            "judge": cfg.judge.label(),
            "filter": cfg.filter.label(),
            "iterate": cfg.iterate,
            "residual": cfg.residual,
            "max_iterations": cfg.max_iterations,
            "min_edges_fraction": cfg.min_edges_fraction,
            "patience": cfg.patience,
            "svd_rank": cfg.svd_rank,
            "kld_feature_weight": cfg.kld_feature_weight,
            "seed": seed,
        },
    }
    out.update(report.to_json_dict())
    return out


def cmd_purify(args) -> int:
    cfg = _purify_config(args)
    d = load_dataset(args.input)
    _log(f"purify {d.name}: scorer={cfg.scorer} judge={cfg.judge.label()} "
         f"filter={cfg.filter.label()} iterate={cfg.iterate} residual={cfg.residual}")
    purified, report = purify(d, cfg, seed=args.seed)
    save_dataset(purified, args.output)
    side = os.path.join(args.input, SIDECAR_NAME)
    if os.path.isfile(side):
        _write_json(_read_json(side), os.path.join(args.output, SIDECAR_NAME))
    _write_json(_report_json(report, cfg, args.seed), os.path.join(args.output, REPORT_NAME))
    _log(f"deleted {report.total_deleted} edges in {len(report.iterations)} "
         f"iteration(s), stop: {report.stopping_reason}")
    return 0


def cmd_attack(args) -> int:
    method = _ATTACK_SHORT[args.method]
    spec = AttackSpec(method=method, rate=args.rate, seed=args.seed)
    d = load_dataset(args.input)
    _log(f"attack {d.name}: method={method} rate={args.rate} seed={args.seed}")
    removed = np.zeros((0, 2), dtype=np.int64)
    if method == "dice":
        attacked, injected, removed = attack_dice(d, spec)
    elif method == "random_insert":
        attacked, injected = attack_random_insert(d, spec)
    else:
        attacked, injected = attack_grad_saliency(
            d, spec, _train_config(args, seed=args.seed)
        )
    save_dataset(attacked, args.output)
    sidecar = {
        "method": method,
        "rate": args.rate,
        "seed": args.seed,
        "injected": [[int(u), int(v)] for u, v in injected],
        "removed": [[int(u), int(v)] for u, v in removed],
    }
    _write_json(sidecar, os.path.join(args.output, SIDECAR_NAME))
    _log(f"perturbed: +{len(injected)} -{len(removed)} edges")
    return 0


def _provenance(directory: str) -> dict:
    """Attack and purify metadata recorded in a dataset directory."""
    out = {
        "attack": "none", "rate": 0.0, "phase": "clean",
        "scorer": "none", "judge": "none", "filter": "none",
        "residual": False, "edges_deleted": 0,
    }
    side = os.path.join(directory, SIDECAR_NAME)
    if os.path.isfile(side):
        meta = _read_json(side)
        out["attack"] = meta.get("method", "unknown")
        out["rate"] = float(meta.get("rate", 0.0))
        out["phase"] = "poisoned"
    rep = os.path.join(directory, REPORT_NAME)
    if os.path.isfile(rep):
        meta = _read_json(rep)
        cfg = meta.get("config", {})
        out["scorer"] = cfg.get("scorer", "none")
        out["judge"] = cfg.get("judge", "none")
        out["filter"] = cfg.get("filter", "none")
        out["residual"] = bool(cfg.get("residual", False))
        out["edges_deleted"] = sum(
            len(it.get("edges_deleted", [])) for it in meta.get("iterations", [])
        )
    return out


def _parse_seeds(text: str) -> list[int]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise ConfigError("seed list is empty")
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise ConfigError(f"seeds must be integers, got {text!r}")


def cmd_eval(args) -> int:
    seeds = _parse_seeds(args.seeds)
    d = load_dataset(args.input)
    prov = _provenance(args.input)
    existing = load_results(args.results) if os.path.isfile(args.results) else []
    have = {r.key() for r in existing}
    rows = list(existing)
    for seed in seeds:
        cfg = _train_config(args, seed=seed)
        params, _ = train_surrogate(d, cfg)
        acc = accuracy(predict(params, d), d.labels, d.split.test_mask)
        row = ResultRow(
            dataset=d.name, attack=prov["attack"], rate=prov["rate"],
            scorer=prov["scorer"], judge=prov["judge"], filter=prov["filter"],
            residual=prov["residual"], seed=seed, phase=prov["phase"],
            accuracy=acc, edges_deleted=prov["edges_deleted"],
        )
        if row.key() in have:
            _log(f"seed {seed}: already present, skipping")
            continue
        rows.append(row)
        _log(f"seed {seed}: test accuracy {acc:.4f}")
    write_results(rows, args.results)
    return 0


def cmd_scores(args) -> int:
    d = load_dataset(args.input)
    cfg = PurifyConfig(
        scorer=args.scorer,
        judge=JudgeSpec("percentage", p=1.0),
        filter=FilterSpec("none"),
        svd_rank=args.svd_rank,
        kld_feature_weight=args.kld_feature_weight,
        train=_train_config(args, seed=args.seed),
    )
    state = pipeline_mod.PurifyState(
        dataset=d, graph=d.graph, prev_graph=d.graph,
        initial_edges=d.graph.num_edges, seed=args.seed,
    )
    scores, _ = pipeline_mod.compute_scores(state, cfg)
    injected = set()
    side = os.path.join(args.input, SIDECAR_NAME)
    if os.path.isfile(side):
        injected = {tuple(e) for e in _read_json(side).get("injected", [])}
    with open(args.out, "w", encoding="utf-8", newline="") as f:
        f.write("u,v,score,is_injected\n")
        for (u, v), s in zip(scores.edges, scores.scores):
            flag = "true" if (int(u), int(v)) in injected else "false"
            f.write(f"{u},{v},{format_float(float(s))},{flag}\n")
    _print_quartiles(scores, injected)
    return 0


def _print_quartiles(scores: EdgeScores, injected: set) -> None:
    flags = np.array(
        [(int(u), int(v)) in injected for u, v in scores.edges], dtype=bool
    )
    print("group,count,min,q1,median,q3,max")
    for name, mask in (("original", ~flags), ("injected", flags)):
        vals = scores.scores[mask]
        if len(vals) == 0:
            print(f"{name},0,,,,,")
            continue
        q1, q2, q3 = np.percentile(vals, [25, 50, 75])
        print(
            f"{name},{len(vals)},{format_float(vals.min())},{format_float(q1)},"
            f"{format_float(q2)},{format_float(q3)},{format_float(vals.max())}"
        )


# ---------------------------------------------------------------------------
# experiment grids


def _train_from_dict(cfg: dict) -> TrainConfig:
    allowed = {
        "hidden_dim", "epochs", "learning_rate", "weight_decay",
        "dropout_rate", "patience",
    }
    bad = set(cfg) - allowed
    if bad:
        raise ConfigError(f"unknown train config keys: {sorted(bad)}")
    return TrainConfig(**cfg)


def _cell_spec(manifest: dict, dataset_dir: str, attack: dict, pur: dict, seed: int) -> dict:
    return {
        "dataset_dir": dataset_dir,
        "attack": attack,
        "purify": pur,
        "seed": seed,
        "train": manifest.get("train", {}),
        "eval_train": manifest.get("eval_train", manifest.get("train", {})),
    }


def run_cell(spec: dict) -> ResultRow:
    """Compute one grid cell: load, attack, purify, evaluate."""
    d = load_dataset(spec["dataset_dir"])
    seed = spec["seed"]
    train_cfg = _train_from_dict(spec["train"])
    eval_cfg = _train_from_dict(spec["eval_train"])

    attack = spec["attack"]
    phase, rate = "clean", 0.0
    if attack["method"] != "none":
        rate = float(attack["rate"])
        aspec = AttackSpec(method=attack["method"], rate=rate, seed=seed)
        if attack["method"] == "dice":
            d, _, _ = attack_dice(d, aspec)
        elif attack["method"] == "random_insert":
            d, _ = attack_random_insert(d, aspec)
        else:
            d, _ = attack_grad_saliency(d, aspec, replace(train_cfg, seed=seed))
        phase = "poisoned"

    pur = spec["purify"]
    edges_deleted = 0
    scorer = judge = filt = "none"
    residual = False
    if pur["scorer"] != "none":
        cfg = PurifyConfig(
            scorer=pur["scorer"],
            judge=JudgeSpec.parse(pur["judge"]),
            filter=FilterSpec.parse(pur["filter"]),
            iterate=bool(pur.get("iterate", False)),
            residual=bool(pur.get("residual", False)),
            max_iterations=int(pur.get("max_iterations", 20)),
            min_edges_fraction=float(pur.get("min_edges_fraction", 0.5)),
            patience=int(pur.get("patience", 3)),
            svd_rank=int(pur.get("svd_rank", 10)),
            kld_feature_weight=float(pur.get("kld_feature_weight", 1.0)),
            train=train_cfg,
        )
        d, report = purify(d, cfg, seed=seed)
        edges_deleted = report.total_deleted
        scorer, judge, filt = cfg.scorer, cfg.judge.label(), cfg.filter.label()
        residual = cfg.residual

    params, _ = train_surrogate(d, replace(eval_cfg, seed=seed))
    acc = accuracy(predict(params, d), d.labels, d.split.test_mask)
    return ResultRow(
        dataset=d.name, attack=attack["method"], rate=rate, scorer=scorer,
        judge=judge, filter=filt, residual=residual, seed=seed, phase=phase,
        accuracy=acc, edges_deleted=edges_deleted,
    )


def _validate_manifest(manifest: dict) -> tuple[list, list, list, list, str]:
    for key in ("datasets", "attacks", "purify", "seeds", "output_dir"):
        if key not in manifest:
            raise ConfigError(f"manifest missing key {key!r}")
    datasets = manifest["datasets"]
    attacks = manifest["attacks"]
    purs = manifest["purify"]
    seeds = manifest["seeds"]
    if not (datasets and attacks and purs and seeds):
        raise ConfigError("manifest grid lists must all be non-empty")
    for a in attacks:
        if a.get("method") not in ("none",) + tuple(_ATTACK_SHORT.values()):
            raise ConfigError(f"bad attack entry {a!r}")
        if a["method"] != "none" and "rate" not in a:
            raise ConfigError(f"attack entry needs a rate: {a!r}")
    for p in purs:
        if "scorer" not in p:
            raise ConfigError(f"purify entry needs a scorer: {p!r}")
        if p["scorer"] != "none" and ("judge" not in p or "filter" not in p):
            raise ConfigError(f"purify entry needs judge and filter: {p!r}")
    return datasets, attacks, purs, seeds, manifest["output_dir"]


def cmd_experiment(args) -> int:
    try:
        manifest = _read_json(args.manifest)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read manifest {args.manifest}: {e}")
    datasets, attacks, purs, seeds, out_dir = _validate_manifest(manifest)
    _train_from_dict(manifest.get("train", {}))  # fail fast on bad blocks
    _train_from_dict(manifest.get("eval_train", {}))

    cells = [
        _cell_spec(manifest, ds, a, p, s)
        for ds in datasets
        for a in attacks
        for p in purs
        for s in seeds
    ]
    os.makedirs(out_dir, exist_ok=True)
    results_path = os.path.join(out_dir, "results.csv")
    done: dict[tuple, ResultRow] = {}
    if os.path.isfile(results_path):
        for row in load_results(results_path):
            done[row.key()] = row

    def cell_key(spec: dict) -> tuple | None:
        # Key of the row this cell will produce; purified cells depend on
        # runtime info only through fixed config, so keys are static.
        pur, attack = spec["purify"], spec["attack"]
        rate = float(attack.get("rate", 0.0)) if attack["method"] != "none" else 0.0
        name = _dataset_name(spec["dataset_dir"])
        if name is None:
            return None
        judge = pur.get("judge", "none")
        judge = JudgeSpec.parse(judge).label() if judge != "none" else "none"
        filt = pur.get("filter", "none")
        filt = FilterSpec.parse(filt).label() if filt != "none" else "none"
        return (
            name, attack["method"], format_float(rate),
            pur["scorer"] if pur["scorer"] != "none" else "none",
            judge if pur["scorer"] != "none" else "none",
            filt if pur["scorer"] != "none" else "none",
            bool(pur.get("residual", False)), spec["seed"],
            "poisoned" if attack["method"] != "none" else "clean",
        )

    ordered: list[ResultRow | None] = [None] * len(cells)
    pending: list[tuple[int, dict]] = []
    for i, c in enumerate(cells):
        k = cell_key(c)
        if k is not None and k in done:
            ordered[i] = done[k]
        else:
            pending.append((i, c))
    _log(f"grid: {len(cells)} cells, {len(cells) - len(pending)} already done")

    workers = worker_count()
    if pending:
        specs = [c for _, c in pending]
        if workers > 1 and len(pending) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                fresh = list(pool.map(run_cell, specs))
        else:
            fresh = [run_cell(c) for c in specs]
        for (i, _), row in zip(pending, fresh):
            ordered[i] = row
    write_results(ordered, results_path)
    _log(f"wrote {len(ordered)} rows to {results_path}")
    return 0


_NAME_CACHE: dict[str, str] = {}


def _dataset_name(directory: str) -> str | None:
    if directory not in _NAME_CACHE:
        meta_path = os.path.join(directory, "meta.json")
        if not os.path.isfile(meta_path):
            return None
        _NAME_CACHE[directory] = str(_read_json(meta_path).get("name", ""))
    return _NAME_CACHE[directory]


# ---------------------------------------------------------------------------
# argument parsing


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--hidden-dim", type=int, default=16)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="graphpurify",
        description="Edge scoring, judging and filtering for graph purification.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("purify", help="score, judge, filter and delete edges")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--scorer", required=True,
                   choices=["jaccard", "cosine", "svd", "entropy", "kld"])
    p.add_argument("--judge", required=True, help="p:FLOAT or t:FLOAT")
    p.add_argument("--filter", required=True, choices=["s", "c", "none"])
    p.add_argument("--iterate", action="store_true")
    p.add_argument("--residual", action="store_true")
    p.add_argument("--max-iters", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--svd-rank", type=int, default=10)
    p.add_argument("--kld-feature-weight", type=float, default=1.0)
    _add_train_flags(p)
    p.set_defaults(func=cmd_purify)

    p = sub.add_parser("attack", help="perturb a dataset's edges")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--method", required=True, choices=sorted(_ATTACK_SHORT))
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_train_flags(p)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("eval", help="train the final classifier, append results")
    p.add_argument("--input", required=True)
    p.add_argument("--results", required=True)
    p.add_argument("--seeds", required=True, help="comma-separated integers")
    _add_train_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("scores", help="emit per-edge scores and quartiles")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scorer", required=True,
                   choices=["jaccard", "cosine", "svd", "entropy", "kld"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--svd-rank", type=int, default=10)
    p.add_argument("--kld-feature-weight", type=float, default=1.0)
    _add_train_flags(p)
    p.set_defaults(func=cmd_scores)

    p = sub.add_parser("experiment", help="run a manifest's full grid")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_experiment)

    return top


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        _log(f"configuration error: {e}")
        return 2
    except GraphPurifyError as e:
        _log(f"error: {e}")
        return 1
    except OSError as e:
        _log(f"io error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
