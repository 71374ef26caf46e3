"""Experiment runner: resolves configs, attacks datasets through a worker
pool, and writes machine-readable reports.

Attack runs are pure with respect to the classifier, so samples are farmed
out to a thread pool (size capped by the MINPERTURB_THREADS environment
variable) and re-ordered by sample id before writing; concurrency never
changes output bytes.
"""

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .attacks import AttackConfig, AttackResult, run_attack
from .data import generate_dataset, load_dataset_csv
from .diagnostics import aggregate
from .errors import ConfigError
from .models import from_dict as model_from_dict
from .models import load_model
from .oracle import oracle_for

RESULT_COLUMNS = ("sample_id", "attack", "success", "l2", "linf", "grads", "iters")


def thread_count():
    raw = os.environ.get("MINPERTURB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"MINPERTURB_THREADS must be an integer, got {raw!r}")
    return max(1, n)


def resolve_model(spec):
    if not isinstance(spec, dict):
        raise ConfigError("model spec must be an object")
    if "path" in spec:
        if not os.path.exists(spec["path"]):
            raise ConfigError(f"model file not found: {spec['path']}")
        return load_model(spec["path"])
    try:
        return model_from_dict(spec)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad model spec: {exc}") from exc


def resolve_dataset(spec):
    if not isinstance(spec, dict):
        raise ConfigError("dataset spec must be an object")
    if "path" in spec:
        if not os.path.exists(spec["path"]):
            raise ConfigError(f"dataset file not found: {spec['path']}")
        return load_dataset_csv(spec["path"])
    try:
        return generate_dataset(spec["name"], spec["size"], spec.get("seed", 0),
                                dim=spec.get("dim", 2))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad dataset spec: {exc}") from exc


def parse_attacks(specs):
    if not specs:
        raise ConfigError("no attacks configured")
    labeled = []
    seen = set()
    for spec in specs:
        label = spec.get("label")
        if not label:
            raise ConfigError("every attack needs a label")
        if label in seen:
            raise ConfigError(f"duplicate attack label {label!r}")
        seen.add(label)
        try:
            labeled.append((label, AttackConfig.from_dict(spec)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad attack config {label!r}: {exc}") from exc
    return labeled


def _failed_result(clf, x0):
    x0 = np.asarray(x0, dtype=np.float64)
    orig = clf.predict(x0)
    zero = np.zeros_like(x0)
    return AttackResult(zero, x0.copy(), False, orig, orig, 0.0, 0.0, 0, 0)


def attack_dataset(clf, dataset, cfg, threads=None):
    """Run one attack over every sample; results ordered by sample id.
    Per-sample numerical failures (degenerate gradients, boundary starts)
    yield a failed zero-perturbation result instead of aborting the run."""
    threads = threads or thread_count()

    def one(i):
        try:
            return run_attack(dataset.xs[i], clf, cfg)
        except (ArithmeticError, ValueError):
            return _failed_result(clf, dataset.xs[i])

    if threads == 1:
        return [one(i) for i in range(len(dataset))]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(len(dataset))))


def _resolved_config(config, attacks):
    echo = dict(config)
    echo["attacks"] = [{"label": label, **cfg.to_dict()} for label, cfg in attacks]
    echo.setdefault("seed", 0)
    echo.setdefault("oracle", False)
    return echo


def run_attack_experiment(config, out_dir):
    """Attack pipeline: per-sample results.csv plus report.json with
    aggregate metrics, oracle gaps for analytic models, and a config echo
    that reproduces the run."""
    t_start = time.perf_counter()
    clf = resolve_model(config.get("model", {}))
    dataset = resolve_dataset(config.get("dataset", {}))
    attacks = parse_attacks(config.get("attacks", []))
    use_oracle = bool(config.get("oracle", False))

    os.makedirs(out_dir, exist_ok=True)
    rows = []
    per_attack = {}
    oracle_cache = {}
    for label, acfg in attacks:
        results = attack_dataset(clf, dataset, acfg)
        per_attack[label] = results
        for i, res in enumerate(results):
            row = {
                "sample_id": i,
                "attack": label,
                "success": int(res.success),
                "l2": res.l2_norm,
                "linf": res.linf_norm,
                "grads": res.gradient_evaluations,
                "iters": res.outer_iterations,
            }
            if use_oracle:
                key = (i, acfg.norm_mode, acfg.target)
                if key not in oracle_cache:
                    sol = oracle_for(clf, dataset.xs[i], norm_mode=acfg.norm_mode,
                                     targeted=acfg.target)
                    oracle_cache[key] = sol
                sol = oracle_cache[key]
                attack_norm = res.linf_norm if acfg.norm_mode == "linf" else res.l2_norm
                row["oracle_norm"] = sol.norm
                row["oracle_gap"] = attack_norm - sol.norm
            rows.append(row)

    columns = list(RESULT_COLUMNS) + (["oracle_norm", "oracle_gap"] if use_oracle else [])
    results_path = os.path.join(out_dir, "results.csv")
    with open(results_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(row[c]) for c in columns])

    report = {
        "version": __version__,
        "wall_time_s": time.perf_counter() - t_start,
        "config": _resolved_config(config, attacks),
        "attacks": {label: aggregate(res).to_dict() for label, res in per_attack.items()},
        "rows": rows,
    }
    report_path = os.path.join(out_dir, "report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    return {"results_csv": results_path, "report_json": report_path,
            "per_attack": per_attack, "dataset": dataset, "model": clf}


def _format_cell(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)
