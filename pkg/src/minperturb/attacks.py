"""Geometric minimum-norm attacks: DF steps, boundary projections, and the
SDF(m, n) family (binary, multi-class, targeted and l-inf variants).

The building blocks:

  * DF step: linearize the (pairwise) margin and jump to the zero set of
    the linearization. The signed form -(F/||g||^2) g is used so the step
    keeps seeking the boundary after an overshoot; from the starting side
    it equals the absolute-value form.
  * Projection step: project the current perturbation onto the span of the
    boundary-point gradient, restoring orthogonality to the boundary.
  * SDF(m, n): alternate m DF steps with n projection steps until the label
    flips; m = inf runs DF to the boundary before each projection.

Gradient accounting: one unit per class-gradient evaluation. A C-class DF
iteration costs C, a multi-class projection costs 2 (the two class
gradients at the projection point), binary steps cost 1.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGradientError
from .models import (FOOLED_SLACK, challenger_label, challenger_margin,
                     hits_target, is_fooled)

DEFAULT_GRAD_TOLERANCE = 1e-12


def _as_point(x):
    return np.ascontiguousarray(x, dtype=np.float64)


@dataclass
class AttackConfig:
    """All knobs of one attack run. `m` may be the float inf."""

    method: str = "sdf"
    m: float = math.inf
    n: int = 1
    max_outer_iters: int = 50
    max_df_iters_per_round: int = 50
    grad_tolerance: float = DEFAULT_GRAD_TOLERANCE
    norm_mode: str = "l2"
    target: int | None = None
    line_search: bool = False
    line_search_iters: int = 25
    box: tuple | None = None  # (lo, hi) scalars or per-coordinate arrays
    epsilon_cap: float | None = None
    convergence_tol: float = 1e-4  # outer loop stops when a round improves
    #                                the best adversarial norm by less

    def __post_init__(self):
        if self.method not in ("df", "sdf"):
            raise ValueError(f"unknown method {self.method!r}")
        if not (self.m == math.inf or (float(self.m).is_integer() and self.m >= 1)):
            raise ValueError("m must be a positive integer or inf")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.grad_tolerance <= 0:
            raise ValueError("grad_tolerance must be positive")
        if self.norm_mode not in ("l2", "linf"):
            raise ValueError(f"unknown norm mode {self.norm_mode!r}")
        if self.epsilon_cap is not None and self.epsilon_cap <= 0:
            raise ValueError("epsilon_cap must be positive")
        if self.convergence_tol < 0:
            raise ValueError("convergence_tol must be nonnegative")
        if self.box is not None:
            lo, hi = self.box
            if np.any(np.asarray(lo) > np.asarray(hi)):
                raise ValueError("box lower bound exceeds upper bound")

    def to_dict(self):
        d = {
            "method": self.method,
            "m": "inf" if self.m == math.inf else int(self.m),
            "n": self.n,
            "max_outer_iters": self.max_outer_iters,
            "max_df_iters_per_round": self.max_df_iters_per_round,
            "grad_tolerance": self.grad_tolerance,
            "norm_mode": self.norm_mode,
            "target": self.target,
            "line_search": self.line_search,
            "line_search_iters": self.line_search_iters,
            "box": None if self.box is None else [np.asarray(b).tolist() for b in self.box],
            "epsilon_cap": self.epsilon_cap,
            "convergence_tol": self.convergence_tol,
        }
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d.pop("label", None)
        m = d.get("m", math.inf)
        if isinstance(m, str):
            if m.lower() not in ("inf", "infinity"):
                raise ValueError(f"bad value for m: {m!r}")
            m = math.inf
        d["m"] = m
        if d.get("box") is not None:
            lo, hi = d["box"]
            d["box"] = (np.asarray(lo, dtype=np.float64), np.asarray(hi, dtype=np.float64))
        return cls(**d)


@dataclass
class AttackResult:
    perturbation: np.ndarray
    adversarial_point: np.ndarray
    success: bool
    original_label: int
    adversarial_label: int
    l2_norm: float
    linf_norm: float
    gradient_evaluations: int
    outer_iterations: int

    def to_dict(self):
        return {
            "perturbation": self.perturbation.tolist(),
            "adversarial_point": self.adversarial_point.tolist(),
            "success": bool(self.success),
            "original_label": int(self.original_label),
            "adversarial_label": int(self.adversarial_label),
            "l2_norm": float(self.l2_norm),
            "linf_norm": float(self.linf_norm),
            "gradient_evaluations": int(self.gradient_evaluations),
            "outer_iterations": int(self.outer_iterations),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            perturbation=np.asarray(d["perturbation"], dtype=np.float64),
            adversarial_point=np.asarray(d["adversarial_point"], dtype=np.float64),
            success=bool(d["success"]),
            original_label=int(d["original_label"]),
            adversarial_label=int(d["adversarial_label"]),
            l2_norm=float(d["l2_norm"]),
            linf_norm=float(d["linf_norm"]),
            gradient_evaluations=int(d["gradient_evaluations"]),
            outer_iterations=int(d["outer_iterations"]),
        )


# ---------------------------------------------------------------------------
# Elementary operations.

def clip_to_box(x, lo, hi):
    """Coordinate-wise clamp to [lo, hi]."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    if np.any(lo > hi):
        raise ValueError("box lower bound exceeds upper bound")
    return np.clip(np.asarray(x, dtype=np.float64), lo, hi)


def renormalize_to_eps(r, eps):
    """Scale r down so its l2 norm does not exceed eps (identity otherwise)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    r = _as_point(r)
    norm = float(np.linalg.norm(r))
    if norm <= eps:
        return r
    return r * (eps / norm)


def df_step_binary(x, clf, grad_tolerance=DEFAULT_GRAD_TOLERANCE):
    """One linearized boundary step x - (F/||g||^2) g; one gradient evaluation."""
    x = _as_point(x)
    g = clf.grad(x, 0)
    gn2 = float(g @ g)
    if gn2 <= grad_tolerance * grad_tolerance:
        raise DegenerateGradientError("gradient norm below tolerance in DF step")
    f = float(clf.logits(x)[0])
    return x - (f / gn2) * g


def df_multiclass_step(x, clf, orig_label, grad_tolerance=DEFAULT_GRAD_TOLERANCE):
    """One multi-class DF step from x toward the nearest linearized pairwise
    boundary; returns (new point, chosen class). Costs C gradient
    evaluations (one per class logit; fused evaluation counts the same).
    Ties in the class argmin break to the lowest index."""
    x = _as_point(x)
    z = clf.logits(x)
    grads = clf.grad_all(x)
    best = None
    for k in range(clf.num_classes):
        if k == orig_label:
            continue
        w_k = grads[k] - grads[orig_label]
        wn = float(np.linalg.norm(w_k))
        if wn <= grad_tolerance:
            continue
        ratio = abs(float(z[k] - z[orig_label])) / wn
        if best is None or ratio < best[0]:
            best = (ratio, k, w_k, wn)
    if best is None:
        raise DegenerateGradientError("all pairwise gradients below tolerance")
    _, k, w_k, wn = best
    f_k = float(z[k] - z[orig_label])
    # signed form: boundary-seeking from either side of the pairwise boundary
    return x - (f_k / (wn * wn)) * w_k, k


def projection_step_binary(x0, x, clf, grad_tolerance=DEFAULT_GRAD_TOLERANCE):
    """Project the perturbation x - x0 onto the span of the gradient at x;
    one gradient evaluation."""
    x0 = _as_point(x0)
    x = _as_point(x)
    g = clf.grad(x, 0)
    gn2 = float(g @ g)
    if gn2 <= grad_tolerance * grad_tolerance:
        raise DegenerateGradientError("gradient norm below tolerance in projection")
    return x0 + (float((x - x0) @ g) / gn2) * g


def projection_step_multiclass(x0, x_tilde, clf, orig_label,
                               grad_tolerance=DEFAULT_GRAD_TOLERANCE):
    """Project onto the span of the pairwise boundary normal at x_tilde,
    using the adversarial label of x_tilde; two gradient evaluations."""
    x0 = _as_point(x0)
    x_tilde = _as_point(x_tilde)
    if not is_fooled(clf, x_tilde, orig_label):
        raise ValueError("x_tilde still carries the original label")
    adv = challenger_label(clf, x_tilde, orig_label)
    w = clf.grad(x_tilde, adv) - clf.grad(x_tilde, orig_label)
    wn2 = float(w @ w)
    if wn2 <= grad_tolerance * grad_tolerance:
        raise DegenerateGradientError("pairwise gradient below tolerance in projection")
    return x0 + (float((x_tilde - x0) @ w) / wn2) * w


def line_search_to_boundary(x0, r, clf, iters=25):
    """Bisection on gamma in [0, 1] for the smallest scale of r that still
    fools; returns (gamma, x0 + gamma * r). The returned point is always on
    the fooling side of the bracket."""
    x0 = _as_point(x0)
    r = _as_point(r)
    orig = clf.predict(x0)
    if is_fooled(clf, x0, orig):
        raise ValueError("x0 must lie strictly inside its class region")
    if not is_fooled(clf, x0 + r, orig):
        raise ValueError("x0 + r is not adversarial")
    lo, hi = 0.0, 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if is_fooled(clf, x0 + mid * r, orig):
            hi = mid
        else:
            lo = mid
    return hi, x0 + hi * r


# ---------------------------------------------------------------------------
# Attack engines. Each returns (final point, gradient count, iterations,
# original label). Box clipping is applied after every iterate update so all
# intermediate gradients are taken at feasible points.
#
# SDF engines keep the smallest-norm adversarial iterate seen: on curved
# boundaries the projected point routinely lands inside the original
# region, so the literal final iterate may not be adversarial even though
# every round produced one.

class _BestTracker:
    """Smallest-norm adversarial iterate seen so far."""

    def __init__(self, clf, x0, orig, ord_=2, target=None):
        self.clf = clf
        self.x0 = x0
        self.orig = orig
        self.ord = ord_
        self.target = target
        self.best = None
        self.best_norm = math.inf

    def offer(self, x):
        if self.target is not None:
            ok = hits_target(self.clf, x, self.target)
        else:
            ok = is_fooled(self.clf, x, self.orig)
        if not ok:
            return
        r = x - self.x0
        norm = float(np.abs(r).max()) if self.ord == math.inf else float(np.linalg.norm(r))
        if norm < self.best_norm:
            self.best_norm = norm
            self.best = x.copy()

    def resolve(self, x_final):
        """Final iterate if adversarial, else the best adversarial one seen."""
        if self.target is not None:
            ok = hits_target(self.clf, x_final, self.target)
        else:
            ok = is_fooled(self.clf, x_final, self.orig)
        if ok or self.best is None:
            return x_final
        return self.best


def _clipper(box):
    if box is None:
        return lambda x: x
    lo, hi = box
    return lambda x: clip_to_box(x, lo, hi)


def _segment_to_boundary(clf, a, b, predicate, iters=60):
    """Bisect the segment [a, b] (predicate false at a, true at b) down to
    the crossing; forward passes only, so this costs no gradient
    evaluations. Returns the predicate-true end of the final bracket."""
    tlo, thi = 0.0, 1.0
    for _ in range(iters):
        tm = 0.5 * (tlo + thi)
        if predicate(a + tm * (b - a)):
            thi = tm
        else:
            tlo = tm
    return a + thi * (b - a)


def _on_boundary(clf, x, orig):
    """Challenger margin within the slack band: the point already sits on
    the decision boundary to working precision, so no crossing refinement
    is needed (exact landings on affine models end up here)."""
    z = clf.logits(x)
    if clf.num_classes == 1:
        f = float(z[0])
        m = f if orig == 0 else -f
        return abs(m) <= FOOLED_SLACK * (1.0 + abs(f))
    m = float(np.delete(z, orig).max() - z[orig])
    return abs(m) <= FOOLED_SLACK * (1.0 + abs(float(z[orig])))


def _pair_crossed(clf, x, target, orig):
    z = clf.logits(x)
    m = float(z[target] - z[orig])
    return m >= -FOOLED_SLACK * (1.0 + abs(float(z[orig])))


def _pair_on_boundary(clf, x, target, orig):
    z = clf.logits(x)
    m = float(z[target] - z[orig])
    return abs(m) <= FOOLED_SLACK * (1.0 + abs(float(z[orig])))


def _binary_setup(clf, x0):
    f0 = float(clf.logits(x0)[0])
    if f0 == 0.0:
        raise ValueError("x0 lies on the decision boundary")
    return 1 if f0 > 0 else 0


def _multiclass_setup(clf, x0):
    z = clf.logits(x0)
    order = np.argsort(z)
    if z[order[-1]] == z[order[-2]]:
        raise ValueError("argmax tie at x0: the point is on the decision boundary")
    return int(np.argmax(z))


def _df_binary_engine(clf, x0, max_iters, tol, box):
    clip = _clipper(box)
    orig = _binary_setup(clf, x0)
    x = x0.copy()
    grads = iters = 0
    while iters < max_iters and not is_fooled(clf, x, orig):
        x = clip(df_step_binary(x, clf, tol))
        grads += 1
        iters += 1
    return x, grads, iters, orig


def _df_multiclass_engine(clf, x0, max_iters, tol, box):
    clip = _clipper(box)
    orig = _multiclass_setup(clf, x0)
    x = x0.copy()
    grads = iters = 0
    while iters < max_iters and not is_fooled(clf, x, orig):
        x, _ = df_multiclass_step(x, clf, orig, tol)
        x = clip(x)
        grads += clf.num_classes
        iters += 1
    return x, grads, iters, orig


def _sdf_binary_engine(clf, x0, cfg):
    clip = _clipper(cfg.box)
    orig = _binary_setup(clf, x0)
    tol = cfg.grad_tolerance
    best = _BestTracker(clf, x0, orig)
    prev_best = math.inf
    x = x0.copy()
    grads = outer = 0
    while outer < cfg.max_outer_iters and not is_fooled(clf, x, orig):
        x_start = x
        if cfg.m == math.inf:
            k = 0
            x_prev = x
            while k < cfg.max_df_iters_per_round and not is_fooled(clf, x, orig):
                x_prev = x
                x = clip(df_step_binary(x, clf, tol))
                grads += 1
                k += 1
            # refine the crossing onto the boundary (forward passes only) so
            # the projection is anchored at a boundary point
            if is_fooled(clf, x, orig) and not _on_boundary(clf, x, orig) \
                    and not is_fooled(clf, x_prev, orig):
                x = _segment_to_boundary(
                    clf, x_prev, x,
                    lambda p: challenger_margin(clf, p, orig) >= 0.0)
            best.offer(x)
        else:
            for _ in range(int(cfg.m)):
                x = clip(df_step_binary(x, clf, tol))
                grads += 1
                best.offer(x)
        for _ in range(cfg.n):
            x = clip(projection_step_binary(x0, x, clf, tol))
            grads += 1
            best.offer(x)
        outer += 1
        if np.array_equal(x, x_start):
            break  # exact fixed point of the round: nothing will change
        if prev_best < math.inf and best.best_norm < math.inf and \
                prev_best - best.best_norm < cfg.convergence_tol * best.best_norm:
            break  # the round no longer improves the adversarial norm
        prev_best = best.best_norm
    return best.resolve(x), grads, outer, orig


def _sdf_multiclass_engine(clf, x0, cfg):
    clip = _clipper(cfg.box)
    orig = _multiclass_setup(clf, x0)
    tol = cfg.grad_tolerance
    best = _BestTracker(clf, x0, orig)
    prev_best = math.inf
    x = x0.copy()
    grads = outer = 0
    while outer < cfg.max_outer_iters and not is_fooled(clf, x, orig):
        x_start = x
        if cfg.m == math.inf:
            k = 0
            x_prev = x
            while k < cfg.max_df_iters_per_round and not is_fooled(clf, x, orig):
                x_prev = x
                x, _ = df_multiclass_step(x, clf, orig, tol)
                x = clip(x)
                grads += clf.num_classes
                k += 1
            if is_fooled(clf, x, orig) and not _on_boundary(clf, x, orig) \
                    and not is_fooled(clf, x_prev, orig):
                x = _segment_to_boundary(
                    clf, x_prev, x,
                    lambda p: challenger_margin(clf, p, orig) >= 0.0)
            best.offer(x)
        else:
            for _ in range(int(cfg.m)):
                x, _ = df_multiclass_step(x, clf, orig, tol)
                x = clip(x)
                grads += clf.num_classes
                best.offer(x)
        # the label of the DF output picks the boundary to project onto; the
        # pair stays fixed across the n repetitions while the gradients are
        # re-evaluated at the current point
        adv = challenger_label(clf, x, orig)
        for _ in range(cfg.n):
            w = clf.grad(x, adv) - clf.grad(x, orig)
            grads += 2
            wn2 = float(w @ w)
            if wn2 <= tol * tol:
                raise DegenerateGradientError("pairwise gradient below tolerance")
            x = clip(x0 + (float((x - x0) @ w) / wn2) * w)
            best.offer(x)
        outer += 1
        if np.array_equal(x, x_start):
            break
        if prev_best < math.inf and best.best_norm < math.inf and \
                prev_best - best.best_norm < cfg.convergence_tol * best.best_norm:
            break
        prev_best = best.best_norm
    return best.resolve(x), grads, outer, orig


def _targeted_step(clf, x, target, orig, tol):
    z = clf.logits(x)
    w = clf.grad(x, target) - clf.grad(x, orig)
    wn2 = float(w @ w)
    if wn2 <= tol * tol:
        raise DegenerateGradientError("pairwise gradient below tolerance")
    f = float(z[target] - z[orig])
    return x - (f / wn2) * w


def _sdf_targeted_engine(clf, x0, target, cfg):
    clip = _clipper(cfg.box)
    orig = _multiclass_setup(clf, x0)
    target = int(target)
    if target == orig:
        raise ValueError("target equals the original label")
    if not 0 <= target < clf.num_classes:
        raise ValueError("target out of range")
    tol = cfg.grad_tolerance
    best = _BestTracker(clf, x0, orig, target=target)
    prev_best = math.inf
    x = x0.copy()
    grads = outer = 0
    while outer < cfg.max_outer_iters and not hits_target(clf, x, target):
        x_start = x
        # inner DF linearizes only the (target, orig) pair and stops once
        # that pairwise boundary is crossed
        if cfg.m == math.inf:
            k = 0
            x_prev = x
            while k < cfg.max_df_iters_per_round and not _pair_crossed(clf, x, target, orig):
                x_prev = x
                x = clip(_targeted_step(clf, x, target, orig, tol))
                grads += 2
                k += 1
            if _pair_crossed(clf, x, target, orig) and not _pair_on_boundary(clf, x, target, orig) \
                    and not _pair_crossed(clf, x_prev, target, orig):
                x = _segment_to_boundary(
                    clf, x_prev, x,
                    lambda p: float(clf.logits(p)[target] - clf.logits(p)[orig]) >= 0.0)
            best.offer(x)
        else:
            for _ in range(int(cfg.m)):
                x = clip(_targeted_step(clf, x, target, orig, tol))
                grads += 2
                best.offer(x)
        for _ in range(cfg.n):
            w = clf.grad(x, target) - clf.grad(x, orig)
            grads += 2
            wn2 = float(w @ w)
            if wn2 <= tol * tol:
                raise DegenerateGradientError("pairwise gradient below tolerance")
            x = clip(x0 + (float((x - x0) @ w) / wn2) * w)
            best.offer(x)
        outer += 1
        if np.array_equal(x, x_start):
            break
        if prev_best < math.inf and best.best_norm < math.inf and \
                prev_best - best.best_norm < cfg.convergence_tol * best.best_norm:
            break
        prev_best = best.best_norm
    return best.resolve(x), grads, outer, orig


# --- l-inf flavor: dual-norm linearization and projection ------------------

def _df_step_binary_linf(x, clf, tol):
    g = clf.grad(x, 0)
    l1 = float(np.abs(g).sum())
    if l1 <= tol:
        raise DegenerateGradientError("gradient norm below tolerance in DF step")
    f = float(clf.logits(x)[0])
    return x - (f / l1) * np.sign(g)


def _df_step_multiclass_linf(x, clf, orig, tol):
    z = clf.logits(x)
    grads = clf.grad_all(x)
    best = None
    for k in range(clf.num_classes):
        if k == orig:
            continue
        w_k = grads[k] - grads[orig]
        l1 = float(np.abs(w_k).sum())
        if l1 <= tol:
            continue
        ratio = abs(float(z[k] - z[orig])) / l1
        if best is None or ratio < best[0]:
            best = (ratio, k, w_k, l1)
    if best is None:
        raise DegenerateGradientError("all pairwise gradients below tolerance")
    _, k, w_k, l1 = best
    f_k = float(z[k] - z[orig])
    return x - (f_k / l1) * np.sign(w_k), k


def _sdf_linf_engine(clf, x0, cfg):
    clip = _clipper(cfg.box)
    tol = cfg.grad_tolerance
    binary = clf.num_classes == 1
    orig = _binary_setup(clf, x0) if binary else _multiclass_setup(clf, x0)
    best = _BestTracker(clf, x0, orig, ord_=math.inf)
    prev_best = math.inf
    x = x0.copy()
    grads = outer = 0
    while outer < cfg.max_outer_iters and not is_fooled(clf, x, orig):
        x_start = x

        def df_step(xc):
            nonlocal grads
            if binary:
                xn = _df_step_binary_linf(xc, clf, tol)
                grads += 1
            else:
                xn, _ = _df_step_multiclass_linf(xc, clf, orig, tol)
                grads += clf.num_classes
            return clip(xn)

        if cfg.m == math.inf:
            k = 0
            x_prev = x
            while k < cfg.max_df_iters_per_round and not is_fooled(clf, x, orig):
                x_prev = x
                x = df_step(x)
                k += 1
            if is_fooled(clf, x, orig) and not _on_boundary(clf, x, orig) \
                    and not is_fooled(clf, x_prev, orig):
                x = _segment_to_boundary(
                    clf, x_prev, x,
                    lambda p: challenger_margin(clf, p, orig) >= 0.0)
            best.offer(x)
        else:
            for _ in range(int(cfg.m)):
                x = df_step(x)
                best.offer(x)

        adv = challenger_label(clf, x, orig)
        for _ in range(cfg.n):
            if binary:
                w = clf.grad(x, 0)
                grads += 1
            else:
                w = clf.grad(x, adv) - clf.grad(x, orig)
                grads += 2
            l1 = float(np.abs(w).sum())
            if l1 <= tol:
                raise DegenerateGradientError("pairwise gradient below tolerance")
            x = clip(x0 + (float((x - x0) @ w) / l1) * np.sign(w))
            best.offer(x)
        outer += 1
        if np.array_equal(x, x_start):
            break
        if prev_best < math.inf and best.best_norm < math.inf and \
                prev_best - best.best_norm < cfg.convergence_tol * best.best_norm:
            break
        prev_best = best.best_norm
    return best.resolve(x), grads, outer, orig


def _df_linf_engine(clf, x0, max_iters, tol, box):
    clip = _clipper(box)
    binary = clf.num_classes == 1
    orig = _binary_setup(clf, x0) if binary else _multiclass_setup(clf, x0)
    x = x0.copy()
    grads = iters = 0
    while iters < max_iters and not is_fooled(clf, x, orig):
        if binary:
            x = clip(_df_step_binary_linf(x, clf, tol))
            grads += 1
        else:
            x, _ = _df_step_multiclass_linf(x, clf, orig, tol)
            x = clip(x)
            grads += clf.num_classes
        iters += 1
    return x, grads, iters, orig


# ---------------------------------------------------------------------------
# Result assembly.

def _finish(clf, x0, x_final, grads, iters, orig, cfg=None, target=None):
    line_search = cfg.line_search if cfg is not None else False
    ls_iters = cfg.line_search_iters if cfg is not None else 25
    eps_cap = cfg.epsilon_cap if cfg is not None else None

    fooled_now = hits_target(clf, x_final, target) if target is not None \
        else is_fooled(clf, x_final, orig)
    if line_search and fooled_now and target is None \
            and not is_fooled(clf, x0, orig) \
            and is_fooled(clf, x0 + (x_final - x0), orig):
        _, x_final = line_search_to_boundary(x0, x_final - x0, clf, ls_iters)

    r = x_final - x0
    if eps_cap is not None:
        r = renormalize_to_eps(r, eps_cap)
    x_adv = x0 + r  # the reported point is exactly x0 + perturbation

    if target is not None:
        success = hits_target(clf, x_adv, target)
        adv_label = target if success else (
            challenger_label(clf, x_adv, orig) if is_fooled(clf, x_adv, orig) else orig)
    else:
        success = is_fooled(clf, x_adv, orig)
        adv_label = challenger_label(clf, x_adv, orig) if success else orig

    return AttackResult(
        perturbation=r,
        adversarial_point=x_adv,
        success=bool(success),
        original_label=int(orig),
        adversarial_label=int(adv_label),
        l2_norm=float(np.linalg.norm(r)),
        linf_norm=float(np.abs(r).max()) if r.size else 0.0,
        gradient_evaluations=int(grads),
        outer_iterations=int(iters),
    )


# ---------------------------------------------------------------------------
# Public attack operations.

def df_binary(x0, clf, max_iters=50):
    """Iterate DF steps until the sign of F flips (or max_iters)."""
    x0 = _as_point(x0)
    out = _df_binary_engine(clf, x0, max_iters, DEFAULT_GRAD_TOLERANCE, None)
    return _finish(clf, x0, *out)


def df_multiclass(x0, clf, max_iters=50):
    """Standard multi-class DF loop (no overshoot factor)."""
    x0 = _as_point(x0)
    out = _df_multiclass_engine(clf, x0, max_iters, DEFAULT_GRAD_TOLERANCE, None)
    return _finish(clf, x0, *out)


def sdf_binary(x0, clf, cfg=None):
    """SDF(m, n) for binary classifiers."""
    cfg = cfg or AttackConfig()
    x0 = _as_point(x0)
    out = _sdf_binary_engine(clf, x0, cfg)
    return _finish(clf, x0, *out, cfg=cfg)


def sdf_multiclass(x0, clf, cfg=None):
    """SDF(m, n) for multi-class classifiers; m = inf, n = 1 runs full DF to
    an adversarial point before each single projection."""
    cfg = cfg or AttackConfig()
    x0 = _as_point(x0)
    out = _sdf_multiclass_engine(clf, x0, cfg)
    return _finish(clf, x0, *out, cfg=cfg)


def sdf_targeted(x0, target, clf, cfg=None):
    """Targeted SDF: linearize only the (target, original) pair; success
    requires the target class to win at the final point."""
    cfg = cfg or AttackConfig()
    x0 = _as_point(x0)
    out = _sdf_targeted_engine(clf, x0, target, cfg)
    return _finish(clf, x0, *out, cfg=cfg, target=int(target))


def sdf_linf(x0, clf, cfg=None):
    """SDF with l-inf geometry: dual-norm (l1) linearization steps and the
    sign-pattern projection; reports linf_norm as the primary metric."""
    cfg = cfg or AttackConfig()
    x0 = _as_point(x0)
    out = _sdf_linf_engine(clf, x0, cfg)
    return _finish(clf, x0, *out, cfg=cfg)


def run_attack(x0, clf, cfg):
    """Dispatch one configured attack against one sample."""
    x0 = _as_point(x0)
    if cfg.target is not None:
        if cfg.method != "sdf" or cfg.norm_mode != "l2":
            raise ValueError("targeted mode requires method=sdf with l2 norm")
        return sdf_targeted(x0, cfg.target, clf, cfg)
    if cfg.method == "df":
        if cfg.norm_mode == "linf":
            out = _df_linf_engine(clf, x0, cfg.max_outer_iters, cfg.grad_tolerance, cfg.box)
        elif clf.num_classes == 1:
            out = _df_binary_engine(clf, x0, cfg.max_outer_iters, cfg.grad_tolerance, cfg.box)
        else:
            out = _df_multiclass_engine(clf, x0, cfg.max_outer_iters, cfg.grad_tolerance, cfg.box)
        return _finish(clf, x0, *out, cfg=cfg)
    if cfg.norm_mode == "linf":
        return sdf_linf(x0, clf, cfg)
    if clf.num_classes == 1:
        return sdf_binary(x0, clf, cfg)
    return sdf_multiclass(x0, clf, cfg)
