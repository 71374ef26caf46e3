"""Pure-numpy fallback kernels for fully connected networks.

Same flat-parameter layout as the jitted kernels: weights and biases of all
layers concatenated into one float64 vector, shapes described by `sizes`
(layer widths, length L+1). Layer i stores W_i with shape
(sizes[i+1], sizes[i]) row-major, then b_i with shape (sizes[i+1],).
Hidden layers apply the activation; the last layer is linear.

Activation ids: 0 = tanh, 1 = softplus, 2 = relu (right derivative at 0).
"""

import numpy as np


def _act(z, act_id):
    if act_id == 0:
        return np.tanh(z)
    if act_id == 1:
        return np.logaddexp(0.0, z)
    return np.maximum(z, 0.0)


def _dact(z, act_id):
    if act_id == 0:
        t = np.tanh(z)
        return 1.0 - t * t
    if act_id == 1:
        # sigmoid, stable for large |z|
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    # relu: slope 1 where pre-activation >= 0 (right derivative at the kink)
    return np.where(z >= 0.0, 1.0, 0.0)


def _unpack(flat, sizes):
    layers = []
    off = 0
    for i in range(len(sizes) - 1):
        n_in, n_out = int(sizes[i]), int(sizes[i + 1])
        w = flat[off:off + n_out * n_in].reshape(n_out, n_in)
        off += n_out * n_in
        b = flat[off:off + n_out]
        off += n_out
        layers.append((w, b))
    return layers


def forward_logits(flat, sizes, x, act_id):
    layers = _unpack(flat, sizes)
    a = x
    for i, (w, b) in enumerate(layers):
        z = w @ a + b
        a = _act(z, act_id) if i < len(layers) - 1 else z
    return a


def _forward_cache(layers, x, act_id):
    acts = [x]
    pres = []
    a = x
    for i, (w, b) in enumerate(layers):
        z = w @ a + b
        pres.append(z)
        a = _act(z, act_id) if i < len(layers) - 1 else z
        acts.append(a)
    return pres, acts


def input_gradient(flat, sizes, x, k, act_id):
    layers = _unpack(flat, sizes)
    pres, _ = _forward_cache(layers, x, act_id)
    nl = len(layers)
    v = np.zeros(int(sizes[-1]))
    v[k] = 1.0
    for i in range(nl - 1, 0, -1):
        u = layers[i][0].T @ v
        v = _dact(pres[i - 1], act_id) * u
    return layers[0][0].T @ v


def all_input_gradients(flat, sizes, x, act_id):
    layers = _unpack(flat, sizes)
    pres, _ = _forward_cache(layers, x, act_id)
    nl = len(layers)
    n_out = int(sizes[-1])
    # one reverse sweep per output, shared forward cache
    v = np.eye(n_out)
    for i in range(nl - 1, 0, -1):
        u = v @ layers[i][0]
        v = u * _dact(pres[i - 1], act_id)[None, :]
    return v @ layers[0][0]


def batch_logits(flat, sizes, xs, act_id):
    layers = _unpack(flat, sizes)
    a = xs
    for i, (w, b) in enumerate(layers):
        z = a @ w.T + b
        a = _act(z, act_id) if i < len(layers) - 1 else z
    return a


def ce_loss_and_grad(flat, sizes, xs, ys, act_id, l2):
    """Mean softmax cross-entropy plus (l2/2)*sum W^2 over weight matrices."""
    layers = _unpack(flat, sizes)
    n = xs.shape[0]
    acts = [xs]
    pres = []
    a = xs
    for i, (w, b) in enumerate(layers):
        z = a @ w.T + b
        pres.append(z)
        a = _act(z, act_id) if i < len(layers) - 1 else z
        acts.append(a)

    logits = acts[-1]
    shifted = logits - logits.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(shifted).sum(axis=1))
    loss = float(np.mean(logsumexp - shifted[np.arange(n), ys]))

    probs = np.exp(shifted)
    probs /= probs.sum(axis=1, keepdims=True)
    delta = probs
    delta[np.arange(n), ys] -= 1.0
    delta /= n

    grad = np.zeros_like(flat)
    offsets = []
    off = 0
    for i in range(len(layers)):
        n_in, n_out = int(sizes[i]), int(sizes[i + 1])
        offsets.append(off)
        off += n_out * n_in + n_out

    for i in range(len(layers) - 1, -1, -1):
        w, _ = layers[i]
        n_in, n_out = w.shape[1], w.shape[0]
        gw = delta.T @ acts[i]
        gb = delta.sum(axis=0)
        if l2 > 0.0:
            gw = gw + l2 * w
        o = offsets[i]
        grad[o:o + n_out * n_in] = gw.ravel()
        grad[o + n_out * n_in:o + n_out * n_in + n_out] = gb
        if i > 0:
            delta = (delta @ w) * _dact(pres[i - 1], act_id)

    if l2 > 0.0:
        for w, _ in layers:
            loss += 0.5 * l2 * float(np.sum(w * w))
    return loss, grad
