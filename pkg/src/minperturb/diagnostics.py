"""Optimality and geometry metrics: cosine alignment with the boundary
normal, gamma-scaling fooling curves, aggregate attack statistics, and
input-curvature measures (gradient norm, Hessian spectral norm, normalized
curvature)."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .attacks import line_search_to_boundary
from .errors import DegenerateGradientError
from .models import challenger_label, is_fooled


@dataclass
class DiagnosticsReport:
    fooling_rate: float
    median_l2: float
    mean_l2: float
    median_linf: float
    mean_grads: float
    cosine_values: list = field(default_factory=list)
    gamma_curve: list = field(default_factory=list)  # (gamma, fooled fraction)

    def to_dict(self):
        return {
            "fooling_rate": self.fooling_rate,
            "median_l2": self.median_l2,
            "mean_l2": self.mean_l2,
            "median_linf": self.median_linf,
            "mean_grads": self.mean_grads,
            "cosine_values": [float(c) for c in self.cosine_values],
            "gamma_curve": [[float(g), float(f)] for g, f in self.gamma_curve],
        }


@dataclass
class CurvatureReport:
    grad_norm: float
    hessian_spectral_norm: float
    normalized_curvature: float
    per_point: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "grad_norm": self.grad_norm,
            "hessian_spectral_norm": self.hessian_spectral_norm,
            "normalized_curvature": self.normalized_curvature,
            "per_point": {k: [float(v) for v in vs] for k, vs in self.per_point.items()},
        }


def aggregate(results):
    """Aggregate attack results. Norm statistics cover successful results
    only (failed attacks carry no meaningful norm); mean_grads covers all."""
    if not results:
        raise ValueError("empty result list")
    succ = [r for r in results if r.success]
    nan = float("nan")
    return DiagnosticsReport(
        fooling_rate=len(succ) / len(results),
        median_l2=float(np.median([r.l2_norm for r in succ])) if succ else nan,
        mean_l2=float(np.mean([r.l2_norm for r in succ])) if succ else nan,
        median_linf=float(np.median([r.linf_norm for r in succ])) if succ else nan,
        mean_grads=float(np.mean([r.gradient_evaluations for r in results])),
    )


def _boundary_normal(clf, x_b, orig):
    """Gradient of the challenger margin at the boundary point, oriented
    from the original region toward the adversarial one."""
    if clf.num_classes == 1:
        g = clf.grad(x_b, 0)
        return g if orig == 0 else -g
    adv = challenger_label(clf, x_b, orig)
    return clf.grad(x_b, adv) - clf.grad(x_b, orig)


def cosine_alignment(x0, r, clf, line_search_iters=25, grad_tolerance=1e-12):
    """Cosine between r and the boundary normal at the just-fooling point of
    the segment x0 + gamma r; +1 means r points straight across the
    boundary (the optimality signature)."""
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    r = np.ascontiguousarray(r, dtype=np.float64)
    orig = clf.predict(x0)
    _, x_b = line_search_to_boundary(x0, r, clf, line_search_iters)
    normal = _boundary_normal(clf, x_b, orig)
    nn = float(np.linalg.norm(normal))
    rn = float(np.linalg.norm(r))
    if nn <= grad_tolerance or rn == 0.0:
        raise DegenerateGradientError("vanishing normal at the boundary point")
    return float(np.clip((r @ normal) / (rn * nn), -1.0, 1.0))


def gamma_fooling_curve(samples, clf, gammas):
    """For each gamma, the fraction of (x0, r) pairs with x0 + gamma r
    fooled. Every r must fool at gamma = 1."""
    samples = list(samples)
    if not samples:
        raise ValueError("empty sample list")
    prepared = []
    for x0, r in samples:
        x0 = np.ascontiguousarray(x0, dtype=np.float64)
        r = np.ascontiguousarray(r, dtype=np.float64)
        orig = clf.predict(x0)
        if not is_fooled(clf, x0 + r, orig):
            raise ValueError("sample perturbation is not adversarial at gamma=1")
        prepared.append((x0, r, orig))
    curve = []
    for g in gammas:
        fooled = sum(is_fooled(clf, x0 + g * r, orig) for x0, r, orig in prepared)
        curve.append((float(g), fooled / len(prepared)))
    return curve


# ---------------------------------------------------------------------------
# Curvature measures. All derivatives are taken of the margin function
# f_top(x) - f_second(x) with the two classes frozen at the evaluation point
# (binary classifiers use the signed score directly).

def _margin_classes(clf, x):
    if clf.num_classes == 1:
        return None
    z = clf.logits(x)
    order = np.argsort(z)
    return int(order[-1]), int(order[-2])


def _margin_grad(clf, x, classes):
    if classes is None:
        return clf.grad(x, 0)
    k1, k2 = classes
    return clf.grad(x, k1) - clf.grad(x, k2)


def margin_grad_norm(clf, x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    return float(np.linalg.norm(_margin_grad(clf, x, _margin_classes(clf, x))))


def hessian_vector_product(clf, x, v, h=1e-4):
    """Central finite difference of the margin gradient along v:
    (grad(x + h v) - grad(x - h v)) / (2 h); two gradient evaluations.
    Non-unit v is normalized (with a warning) before differencing."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.ascontiguousarray(x, dtype=np.float64)
    v = np.ascontiguousarray(v, dtype=np.float64)
    vn = float(np.linalg.norm(v))
    if abs(vn - 1.0) > 1e-9:
        warnings.warn("direction vector normalized to unit length")
        v = v / vn
    classes = _margin_classes(clf, x)
    gp = _margin_grad(clf, x + h * v, classes)
    gm = _margin_grad(clf, x - h * v, classes)
    return (gp - gm) / (2.0 * h)


def hessian_spectral_norm(clf, x, iters=50, h=1e-4, seed=0):
    """Dominant absolute eigenvalue of the margin Hessian by power iteration
    on the finite-difference Hessian-vector operator."""
    if iters < 1:
        raise ValueError("iters must be >= 1")
    x = np.ascontiguousarray(x, dtype=np.float64)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=x.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(int(iters)):
        u = hessian_vector_product(clf, x, v, h)
        un = float(np.linalg.norm(u))
        if un < 1e-300:
            return 0.0  # numerically zero Hessian (affine models)
        lam = abs(float(v @ u))
        v = u / un
    return lam


def normalized_curvature(clf, x, eps=1e-8, iters=50, h=1e-4, seed=0):
    """Hessian spectral norm over (gradient norm + eps) of the margin."""
    hn = hessian_spectral_norm(clf, x, iters=iters, h=h, seed=seed)
    return hn / (margin_grad_norm(clf, x) + eps)


def curvature_report(clf, points, iters=50, h=1e-4, seed=0, eps=1e-8):
    """Mean curvature statistics over a set of points, per-point values
    retained for serialization."""
    gnorms, hnorms, curvs = [], [], []
    for x in points:
        gn = margin_grad_norm(clf, x)
        hn = hessian_spectral_norm(clf, x, iters=iters, h=h, seed=seed)
        gnorms.append(gn)
        hnorms.append(hn)
        curvs.append(hn / (gn + eps))
    return CurvatureReport(
        grad_norm=float(np.mean(gnorms)),
        hessian_spectral_norm=float(np.mean(hnorms)),
        normalized_curvature=float(np.mean(curvs)),
        per_point={"grad_norm": gnorms, "hessian_spectral_norm": hnorms,
                   "normalized_curvature": curvs},
    )
