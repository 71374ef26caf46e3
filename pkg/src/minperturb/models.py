"""Differentiable classifier zoo: analytic models and small trainable MLPs.

Every classifier maps R^d to C per-class scores and exposes exact input
gradients. C == 1 denotes a binary classifier represented by one signed
score F: the predicted label is 1 where F > 0 and 0 otherwise, and the
decision boundary is the zero level set of F.

Label / fooling conventions used throughout the library:
  * argmax ties resolve to the lowest class index (`predict`);
  * a point lying exactly on the decision boundary counts as fooled
    (`is_fooled`), because a minimal perturbation lands on the boundary by
    construction. A relative slack of 1e-12 on the score margin absorbs
    floating-point hair when an iterate lands on the boundary to roundoff.
"""

import json
import warnings

import numpy as np

from . import _kernels

ACTIVATIONS = ("tanh", "softplus", "relu")
_ACT_IDS = {"tanh": 0, "softplus": 1, "relu": 2}

# Relative slack for the boundary-inclusive fooling test.
FOOLED_SLACK = 1e-12


def _as_point(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D point, got shape {x.shape}")
    return x


class Classifier:
    """Base class: differentiable map from R^d to C class scores."""

    kind = "abstract"

    def __init__(self, input_dim, num_classes):
        self.input_dim = int(input_dim)
        self.num_classes = int(num_classes)

    def logits(self, x):
        raise NotImplementedError

    def grad(self, x, k=0):
        raise NotImplementedError

    def logits_batch(self, xs):
        xs = np.ascontiguousarray(xs, dtype=np.float64)
        return np.stack([self.logits(x) for x in xs])

    def grad_all(self, x):
        return np.stack([self.grad(x, k) for k in range(self.num_classes)])

    def predict(self, x):
        """Predicted label; argmax ties broken by lowest class index."""
        if self.num_classes == 1:
            return 1 if self.logits(x)[0] > 0.0 else 0
        return int(np.argmax(self.logits(x)))

    def predict_batch(self, xs):
        z = self.logits_batch(xs)
        if self.num_classes == 1:
            return (z[:, 0] > 0.0).astype(np.int64)
        return np.argmax(z, axis=1).astype(np.int64)

    def clone(self):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


class AffineBinary(Classifier):
    """F(x) = w.x + b with constant gradient w."""

    kind = "affine-binary"

    def __init__(self, w, b):
        w = _as_point(w)
        if not np.any(w != 0.0):
            raise ValueError("weight vector must be nonzero")
        super().__init__(len(w), 1)
        self.w = w
        self.b = float(b)

    def logits(self, x):
        return np.array([float(self.w @ _as_point(x)) + self.b])

    def logits_batch(self, xs):
        xs = np.ascontiguousarray(xs, dtype=np.float64)
        return (xs @ self.w + self.b)[:, None]

    def grad(self, x, k=0):
        return self.w.copy()

    def clone(self):
        return AffineBinary(self.w, self.b)

    def to_dict(self):
        return {"kind": self.kind, "w": self.w.tolist(), "b": self.b}


class AffineMulticlass(Classifier):
    """f(x) = Wx + b; grad of class k is row k of W."""

    kind = "affine-multiclass"

    def __init__(self, weight, bias):
        weight = np.ascontiguousarray(weight, dtype=np.float64)
        bias = np.ascontiguousarray(bias, dtype=np.float64)
        if weight.ndim != 2 or weight.shape[0] < 2:
            raise ValueError("need a CxD weight matrix with C >= 2")
        if bias.shape != (weight.shape[0],):
            raise ValueError("bias length must match the number of classes")
        for i in range(weight.shape[0]):
            for j in range(i + 1, weight.shape[0]):
                if np.array_equal(weight[i], weight[j]) and bias[i] == bias[j]:
                    warnings.warn(f"classes {i} and {j} are identical (degenerate ties)")
        super().__init__(weight.shape[1], weight.shape[0])
        self.weight = weight
        self.bias = bias

    def logits(self, x):
        return self.weight @ _as_point(x) + self.bias

    def logits_batch(self, xs):
        xs = np.ascontiguousarray(xs, dtype=np.float64)
        return xs @ self.weight.T + self.bias

    def grad(self, x, k=0):
        return self.weight[k].copy()

    def grad_all(self, x):
        return self.weight.copy()

    def clone(self):
        return AffineMulticlass(self.weight, self.bias)

    def to_dict(self):
        return {"kind": self.kind, "W": self.weight.tolist(), "b": self.bias.tolist()}


class QuadricBinary(Classifier):
    """F(x) = x^T Q x - c, a smooth curved decision boundary (Hessian 2Q)."""

    kind = "quadric-binary"

    def __init__(self, quad, c):
        quad = np.ascontiguousarray(quad, dtype=np.float64)
        if quad.ndim != 2 or quad.shape[0] != quad.shape[1]:
            raise ValueError("Q must be a square matrix")
        if not np.array_equal(quad, quad.T):
            raise ValueError("Q must be symmetric")
        if not c > 0:
            raise ValueError("c must be positive")
        super().__init__(quad.shape[0], 1)
        self.quad = quad
        self.c = float(c)

    def logits(self, x):
        x = _as_point(x)
        return np.array([float(x @ self.quad @ x) - self.c])

    def logits_batch(self, xs):
        xs = np.ascontiguousarray(xs, dtype=np.float64)
        return (np.einsum("ni,ij,nj->n", xs, self.quad, xs) - self.c)[:, None]

    def grad(self, x, k=0):
        return 2.0 * (self.quad @ _as_point(x))

    def clone(self):
        return QuadricBinary(self.quad, self.c)

    def to_dict(self):
        return {"kind": self.kind, "Q": self.quad.tolist(), "c": self.c}


class MLP(Classifier):
    """Fully connected network; gradients by reverse accumulation of adjoints.

    Parameters live in one flat float64 vector (see _kernels_numpy for the
    layout) so the jitted kernels can consume them directly. Initialization
    is deterministic in `seed` (Glorot-style normal weights, zero biases).
    """

    kind = "mlp"

    def __init__(self, layer_sizes, activation="tanh", seed=0, flat=None):
        layer_sizes = tuple(int(s) for s in layer_sizes)
        if len(layer_sizes) < 3:
            raise ValueError("need at least one hidden layer (d, hidden..., C)")
        if any(s <= 0 for s in layer_sizes):
            raise ValueError("layer sizes must be positive")
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        super().__init__(layer_sizes[0], layer_sizes[-1])
        self.layer_sizes = layer_sizes
        self.activation = activation
        self.seed = int(seed)
        self._act_id = _ACT_IDS[activation]
        self._sizes = np.asarray(layer_sizes, dtype=np.int64)
        if flat is not None:
            flat = np.ascontiguousarray(flat, dtype=np.float64)
            if flat.shape != (self.n_params,):
                raise ValueError("flat parameter vector has the wrong length")
            self.flat = flat.copy()
        else:
            self.flat = self._init_flat(self.seed)

    @property
    def n_params(self):
        return sum(o * i + o for i, o in zip(self.layer_sizes[:-1], self.layer_sizes[1:]))

    def _init_flat(self, seed):
        rng = np.random.default_rng(seed)
        chunks = []
        for n_in, n_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            scale = np.sqrt(2.0 / (n_in + n_out))
            chunks.append(rng.normal(0.0, scale, size=n_out * n_in))
            chunks.append(np.zeros(n_out))
        return np.concatenate(chunks)

    def weights(self):
        """List of (W_i, b_i) views into the flat parameter vector."""
        out = []
        off = 0
        for n_in, n_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            w = self.flat[off:off + n_out * n_in].reshape(n_out, n_in)
            off += n_out * n_in
            b = self.flat[off:off + n_out]
            off += n_out
            out.append((w, b))
        return out

    def logits(self, x):
        return _kernels.forward_logits(self.flat, self._sizes, _as_point(x), self._act_id)

    def logits_batch(self, xs):
        xs = np.ascontiguousarray(xs, dtype=np.float64)
        return _kernels.batch_logits(self.flat, self._sizes, xs, self._act_id)

    def grad(self, x, k=0):
        return _kernels.input_gradient(self.flat, self._sizes, _as_point(x), int(k), self._act_id)

    def grad_all(self, x):
        return _kernels.all_input_gradients(self.flat, self._sizes, _as_point(x), self._act_id)

    def loss_and_param_grad(self, xs, ys, l2=0.0):
        xs = np.ascontiguousarray(xs, dtype=np.float64)
        ys = np.ascontiguousarray(ys, dtype=np.int64)
        return _kernels.ce_loss_and_grad(self.flat, self._sizes, xs, ys, self._act_id, float(l2))

    def clone(self):
        return MLP(self.layer_sizes, self.activation, self.seed, flat=self.flat)

    def to_dict(self):
        return {
            "kind": self.kind,
            "layer_sizes": list(self.layer_sizes),
            "activation": self.activation,
            "weights": [a.tolist() for pair in self.weights() for a in pair],
            "seed": self.seed,
        }


def make_affine_binary(w, b):
    return AffineBinary(w, b)


def make_affine_multiclass(weight, bias):
    return AffineMulticlass(weight, bias)


def make_quadric_binary(quad, c):
    return QuadricBinary(quad, c)


def make_mlp(layer_sizes, activation="tanh", seed=0):
    return MLP(layer_sizes, activation, seed)


def from_dict(d):
    kind = d.get("kind")
    if kind == "affine-binary":
        return AffineBinary(d["w"], d["b"])
    if kind == "affine-multiclass":
        return AffineMulticlass(d["W"], d["b"])
    if kind == "quadric-binary":
        return QuadricBinary(d["Q"], d["c"])
    if kind == "mlp":
        arrays = [np.asarray(a, dtype=np.float64).ravel() for a in d["weights"]]
        flat = np.concatenate(arrays)
        return MLP(d["layer_sizes"], d["activation"], d.get("seed", 0), flat=flat)
    raise ValueError(f"unknown classifier kind {kind!r}")


def save_model(clf, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(clf.to_dict(), fh, indent=2)
        fh.write("\n")


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# Fooling predicate shared by attacks, oracles and diagnostics.

def _slack(score):
    return FOOLED_SLACK * (1.0 + abs(score))


def challenger_margin(clf, x, orig_label):
    """max_{k != orig} f_k(x) - f_orig(x); negative strictly inside the
    original region, >= 0 on/over the decision boundary.

    Binary classifiers use the signed score: the margin is +F for original
    label 0 and -F for original label 1.
    """
    z = clf.logits(x)
    if clf.num_classes == 1:
        return float(z[0]) if orig_label == 0 else -float(z[0])
    others = np.delete(z, orig_label)
    return float(others.max() - z[orig_label])


def is_fooled(clf, x, orig_label):
    """True when x is outside, or on, the original class region's boundary."""
    z = clf.logits(x)
    if clf.num_classes == 1:
        f = float(z[0])
        m = f if orig_label == 0 else -f
        return m >= -_slack(f)
    m = float(np.delete(z, orig_label).max() - z[orig_label])
    return m >= -_slack(float(z[orig_label]))


def challenger_label(clf, x, orig_label):
    """Best class other than orig_label at x (lowest index on ties)."""
    if clf.num_classes == 1:
        return 1 - int(orig_label)
    z = clf.logits(x)
    k = int(np.argmax(np.delete(z, orig_label)))
    return k if k < orig_label else k + 1


def hits_target(clf, x, target):
    """True when the target class is (weakly) the argmax at x."""
    z = clf.logits(x)
    m = float(z[target] - np.delete(z, target).max())
    return m >= -_slack(float(z[target]))
