"""Command-line front end.

Subcommands: train, attack, diagnose, at-train, oracle. Exit codes: 0 on
success, 1 for configuration/usage errors, 2 for runtime numerical errors.
"""

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from .attacks import AttackConfig
from .data import generate_dataset, DATASET_NAMES
from .diagnostics import (cosine_alignment, curvature_report,
                          gamma_fooling_curve)
from .errors import ConfigError, DegenerateGradientError, OracleNotFoundError
from .models import make_mlp, save_model
from .oracle import oracle_for
from .runner import (attack_dataset, resolve_dataset, resolve_model,
                     run_attack_experiment)
from .training import TrainConfig, accuracy, adversarial_fine_tune, train


class _Parser(argparse.ArgumentParser):
    # usage problems are configuration errors: exit 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _load_config(path):
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc


def _apply_overrides(config, args):
    if getattr(args, "seed", None) is not None:
        config["seed"] = args.seed
    if getattr(args, "out_dir", None) is not None:
        config["out_dir"] = args.out_dir
    return config


def cmd_train(args):
    layers = tuple(int(s) for s in args.layers.split(","))
    data_seed = args.data_seed if args.data_seed is not None else args.seed
    dataset = generate_dataset(args.dataset, args.size, data_seed)
    model = make_mlp(layers, args.activation, args.seed)
    cfg = TrainConfig(epochs=args.epochs, learning_rate=args.lr,
                      seed=args.seed, l2_weight_decay=args.weight_decay)
    trained = train(model, dataset, cfg)
    save_model(trained, args.out)
    print(f"wrote {args.out}")
    print(f"final training accuracy: {accuracy(trained, dataset):.4f}")
    return 0


def cmd_attack(args):
    config = _apply_overrides(_load_config(args.config), args)
    out_dir = config.get("out_dir", "out")
    paths = run_attack_experiment(config, out_dir)
    print(f"wrote {paths['results_csv']}")
    print(f"wrote {paths['report_json']}")
    return 0


def _gamma_grid(spec):
    start = spec.get("start", 0.2)
    stop = spec.get("stop", 1.0)
    step = spec.get("step", 0.01)
    if step <= 0 or stop < start:
        raise ConfigError("bad gamma grid")
    count = int(round((stop - start) / step)) + 1
    return [start + k * step for k in range(count)]


def cmd_diagnose(args):
    config = _apply_overrides(_load_config(args.config), args)
    out_dir = config.get("out_dir", "out")
    os.makedirs(out_dir, exist_ok=True)
    diag = config.get("diagnostics", {})
    do_cosine = diag.get("cosine", True)
    gamma_spec = diag.get("gamma", {})
    do_gamma = gamma_spec is not False
    do_curvature = diag.get("curvature", False)

    run = run_attack_experiment(config, out_dir)
    clf, dataset = run["model"], run["dataset"]
    written = []

    if do_cosine:
        path = os.path.join(out_dir, "cosine_hist.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["attack", "sample_id", "cosine"])
            for label, results in run["per_attack"].items():
                for i, res in enumerate(results):
                    if not res.success:
                        continue
                    try:
                        c = cosine_alignment(dataset.xs[i], res.perturbation, clf)
                    except (ValueError, DegenerateGradientError):
                        continue
                    writer.writerow([label, i, repr(c)])
        written.append(path)

    if do_gamma:
        gammas = _gamma_grid(gamma_spec if isinstance(gamma_spec, dict) else {})
        path = os.path.join(out_dir, "gamma_curve.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["attack", "gamma", "fooled_fraction"])
            for label, results in run["per_attack"].items():
                pairs = [(dataset.xs[i], res.perturbation)
                         for i, res in enumerate(results) if res.success]
                if not pairs:
                    raise ConfigError(f"attack {label!r} produced no successful samples")
                for g, frac in gamma_fooling_curve(pairs, clf, gammas):
                    writer.writerow([label, repr(g), repr(frac)])
        written.append(path)

    if do_curvature:
        report = curvature_report(clf, dataset.xs)
        path = os.path.join(out_dir, "curvature.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sample_id", "grad_norm", "hessian_spectral_norm",
                             "normalized_curvature"])
            pp = report.per_point
            for i in range(len(dataset)):
                writer.writerow([i, repr(pp["grad_norm"][i]),
                                 repr(pp["hessian_spectral_norm"][i]),
                                 repr(pp["normalized_curvature"][i])])
        written.append(path)

    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_at_train(args):
    config = _apply_overrides(_load_config(args.config), args)
    out_dir = config.get("out_dir", "out")
    os.makedirs(out_dir, exist_ok=True)
    model_spec = config.get("model", {})
    if "path" not in model_spec:
        raise ConfigError("at-train needs a base model path")
    clf = resolve_model(model_spec)
    dataset = resolve_dataset(config.get("dataset", {}))
    eval_dataset = (resolve_dataset(config["eval_dataset"])
                    if "eval_dataset" in config else dataset)

    at = config.get("at", {})
    norm_cap = at.get("norm_cap", args.norm_cap)
    epochs = at.get("epochs", args.epochs)
    lr = at.get("lr", args.lr)
    if norm_cap is None or norm_cap <= 0:
        raise ConfigError("norm_cap must be a positive number")
    attack_spec = dict(at.get("attack", {"method": "sdf", "m": "inf", "n": 1,
                                         "max_outer_iters": 6}))
    attack_spec.setdefault("max_outer_iters", 6)
    acfg = AttackConfig.from_dict(attack_spec)

    eval_cfg = AttackConfig(method="sdf", m=math.inf, n=1)
    pre = attack_dataset(clf, eval_dataset, eval_cfg)
    pre_norms = [r.l2_norm for r in pre if r.success]
    pre_curv = curvature_report(clf, eval_dataset.xs)

    tuned = adversarial_fine_tune(clf, dataset, acfg, norm_cap, epochs, lr)

    post = attack_dataset(tuned, eval_dataset, eval_cfg)
    post_norms = [r.l2_norm for r in post if r.success]
    post_curv = curvature_report(tuned, eval_dataset.xs)

    model_path = os.path.join(out_dir, "model_at.json")
    save_model(tuned, model_path)
    summary = {
        "pre_median_l2": float(np.median(pre_norms)) if pre_norms else float("nan"),
        "post_median_l2": float(np.median(post_norms)) if post_norms else float("nan"),
        "pre_mean_normalized_curvature": pre_curv.normalized_curvature,
        "post_mean_normalized_curvature": post_curv.normalized_curvature,
        "norm_cap": norm_cap,
        "epochs": epochs,
        "lr": lr,
    }
    summary_path = os.path.join(out_dir, "at_summary.json")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"wrote {model_path}")
    print(f"wrote {summary_path}")
    print(f"median sdf norm: {summary['pre_median_l2']:.4f} -> {summary['post_median_l2']:.4f}")
    return 0


def cmd_oracle(args):
    config = _apply_overrides(_load_config(args.config), args)
    out_dir = config.get("out_dir", "out")
    os.makedirs(out_dir, exist_ok=True)
    clf = resolve_model(config.get("model", {}))
    dataset = resolve_dataset(config.get("dataset", {}))
    path = os.path.join(out_dir, "oracle.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "norm", "method", "certified_gap"])
        for i, x in enumerate(dataset.xs):
            try:
                sol = oracle_for(clf, x)
                writer.writerow([i, repr(sol.norm), sol.method, repr(sol.certified_gap)])
            except (OracleNotFoundError, ValueError):
                writer.writerow([i, "nan", "none", "nan"])
    print(f"wrote {path}")
    return 0


def build_parser():
    parser = _Parser(prog="minperturb",
                     description="minimum-norm adversarial attacks, oracles and diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train an MLP on a synthetic dataset")
    p_train.add_argument("--dataset", required=True, choices=DATASET_NAMES)
    p_train.add_argument("--layers", required=True, help="comma-separated layer sizes, e.g. 2,8,2")
    p_train.add_argument("--size", type=int, default=200)
    p_train.add_argument("--activation", default="tanh", choices=("tanh", "softplus", "relu"))
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--data-seed", type=int, default=None)
    p_train.add_argument("--epochs", type=int, default=500)
    p_train.add_argument("--lr", type=float, default=0.1)
    p_train.add_argument("--weight-decay", type=float, default=0.0)
    p_train.add_argument("--out", default="model.json")
    p_train.set_defaults(func=cmd_train)

    for name, func in (("attack", cmd_attack), ("diagnose", cmd_diagnose),
                       ("oracle", cmd_oracle)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out-dir", default=None)
        p.set_defaults(func=func)

    p_at = sub.add_parser("at-train", help="adversarially fine-tune a trained model")
    p_at.add_argument("--config", required=True)
    p_at.add_argument("--seed", type=int, default=None)
    p_at.add_argument("--out-dir", default=None)
    p_at.add_argument("--norm-cap", dest="norm_cap", type=float, default=None)
    p_at.add_argument("--epochs", type=int, default=10)
    p_at.add_argument("--lr", type=float, default=0.05)
    p_at.set_defaults(func=cmd_at_train)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (ArithmeticError, FloatingPointError) as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
