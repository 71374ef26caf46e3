"""Training: full-batch gradient descent and desk-scale adversarial
fine-tuning.

Full batch (no momentum, no minibatching) keeps every run bit-deterministic
for a given seed. Both entry points return a trained copy and leave the
input classifier untouched.
"""

import math
from dataclasses import dataclass

import numpy as np

from .attacks import renormalize_to_eps, run_attack
from .models import MLP


@dataclass
class TrainConfig:
    epochs: int = 500
    learning_rate: float = 0.1
    seed: int = 0
    l2_weight_decay: float = 0.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")
        if self.l2_weight_decay < 0:
            raise ValueError("l2_weight_decay must be nonnegative")


def accuracy(clf, dataset):
    return float(np.mean(clf.predict_batch(dataset.xs) == dataset.ys))


def _check_compatible(clf, dataset):
    if not isinstance(clf, MLP):
        raise ValueError("training supports mlp classifiers only")
    if dataset.dim != clf.input_dim:
        raise ValueError(
            f"dataset dimension {dataset.dim} does not match model input {clf.input_dim}")
    if clf.num_classes < 2:
        raise ValueError("training requires at least 2 output classes")
    if int(dataset.ys.max()) >= clf.num_classes:
        raise ValueError("dataset labels exceed the model's class count")


def train(clf, dataset, cfg=None):
    """Full-batch gradient descent on softmax cross-entropy. Returns the
    trained copy; the loss is not guaranteed monotone, check `accuracy`."""
    cfg = cfg or TrainConfig()
    _check_compatible(clf, dataset)
    model = clf.clone()
    for _ in range(cfg.epochs):
        _, grad = model.loss_and_param_grad(dataset.xs, dataset.ys, cfg.l2_weight_decay)
        model.flat -= cfg.learning_rate * grad
    return model


def adversarial_fine_tune(clf, dataset, attack_cfg, norm_cap, epochs, lr):
    """Each epoch: replace every training point with its norm-capped SDF
    adversarial counterpart, then take one cross-entropy descent step with
    the original labels. Pure adversarial batches, no clean mixing."""
    if norm_cap <= 0:
        raise ValueError("norm_cap must be positive")
    if attack_cfg.method != "sdf":
        raise ValueError("adversarial fine-tuning uses the sdf method")
    if attack_cfg.max_outer_iters > 6:
        raise ValueError("adversarial fine-tuning caps sdf at 6 outer iterations")
    _check_compatible(clf, dataset)
    model = clf.clone()
    for _ in range(int(epochs)):
        adv_xs = np.empty_like(dataset.xs)
        for i, x in enumerate(dataset.xs):
            try:
                res = run_attack(x, model, attack_cfg)
                r = renormalize_to_eps(res.perturbation, norm_cap)
            except (ArithmeticError, ValueError):
                r = 0.0  # degenerate point (on boundary / zero gradient): train on it as-is
            adv_xs[i] = x + r
        _, grad = model.loss_and_param_grad(adv_xs, dataset.ys, 0.0)
        model.flat -= lr * grad
    return model


def sdf_fine_tune_config(max_outer_iters=6):
    """Attack configuration used during adversarial fine-tuning."""
    from .attacks import AttackConfig
    return AttackConfig(method="sdf", m=math.inf, n=1, max_outer_iters=max_outer_iters)
