"""Jitted kernels for fully connected networks (hot path of attacks/training).

Flat-parameter layout identical to the numpy fallback, see _kernels_numpy.
All loops are written out by hand: the desk-scale matrices here are tiny
(widths of 2..32), where explicit loops under numba beat BLAS dispatch by a
wide margin.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _act_scalar(z, act_id):
    if act_id == 0:
        return np.tanh(z)
    if act_id == 1:
        if z > 0.0:
            return z + np.log1p(np.exp(-z))
        return np.log1p(np.exp(z))
    return z if z > 0.0 else 0.0


@njit(cache=True)
def _dact_scalar(z, act_id):
    if act_id == 0:
        t = np.tanh(z)
        return 1.0 - t * t
    if act_id == 1:
        if z >= 0.0:
            return 1.0 / (1.0 + np.exp(-z))
        ez = np.exp(z)
        return ez / (1.0 + ez)
    return 1.0 if z >= 0.0 else 0.0


@njit(cache=True)
def _layer_count(sizes):
    return sizes.shape[0] - 1


@njit(cache=True)
def _max_width(sizes):
    m = 0
    for i in range(sizes.shape[0]):
        if sizes[i] > m:
            m = sizes[i]
    return m


@njit(cache=True)
def forward_logits(flat, sizes, x, act_id):
    nl = _layer_count(sizes)
    width = _max_width(sizes)
    buf_in = np.empty(width)
    buf_out = np.empty(width)
    for j in range(sizes[0]):
        buf_in[j] = x[j]
    off = 0
    for i in range(nl):
        n_in = sizes[i]
        n_out = sizes[i + 1]
        for r in range(n_out):
            s = flat[off + n_out * n_in + r]  # bias
            row = off + r * n_in
            for c in range(n_in):
                s += flat[row + c] * buf_in[c]
            buf_out[r] = _act_scalar(s, act_id) if i < nl - 1 else s
        off += n_out * n_in + n_out
        for r in range(n_out):
            buf_in[r] = buf_out[r]
    out = np.empty(sizes[nl])
    for r in range(sizes[nl]):
        out[r] = buf_in[r]
    return out


@njit(cache=True)
def _forward_cache(flat, sizes, x, act_id, pres, acts):
    # pres/acts are (n_layers, max_width) scratch; row i of pres holds z_{i+1},
    # row i of acts holds the post-activation input of layer i (acts[0] = x).
    nl = _layer_count(sizes)
    for j in range(sizes[0]):
        acts[0, j] = x[j]
    off = 0
    for i in range(nl):
        n_in = sizes[i]
        n_out = sizes[i + 1]
        for r in range(n_out):
            s = flat[off + n_out * n_in + r]
            row = off + r * n_in
            for c in range(n_in):
                s += flat[row + c] * acts[i, c]
            pres[i, r] = s
            if i < nl - 1:
                acts[i + 1, r] = _act_scalar(s, act_id)
            else:
                acts[i + 1, r] = s
        off += n_out * n_in + n_out


@njit(cache=True)
def _layer_offset(sizes, layer):
    off = 0
    for i in range(layer):
        off += sizes[i + 1] * sizes[i] + sizes[i + 1]
    return off


@njit(cache=True)
def _backward_from_output(flat, sizes, pres, k, act_id):
    nl = _layer_count(sizes)
    width = _max_width(sizes)
    v = np.zeros(width)
    u = np.zeros(width)
    v[k] = 1.0
    for i in range(nl - 1, 0, -1):
        n_in = sizes[i]
        n_out = sizes[i + 1]
        off = _layer_offset(sizes, i)
        for c in range(n_in):
            s = 0.0
            for r in range(n_out):
                s += flat[off + r * n_in + c] * v[r]
            u[c] = s
        for c in range(n_in):
            v[c] = u[c] * _dact_scalar(pres[i - 1, c], act_id)
    d = sizes[0]
    n_out0 = sizes[1]
    g = np.empty(d)
    for c in range(d):
        s = 0.0
        for r in range(n_out0):
            s += flat[r * d + c] * v[r]
        g[c] = s
    return g


@njit(cache=True)
def input_gradient(flat, sizes, x, k, act_id):
    nl = _layer_count(sizes)
    width = _max_width(sizes)
    pres = np.empty((nl, width))
    acts = np.empty((nl + 1, width))
    _forward_cache(flat, sizes, x, act_id, pres, acts)
    return _backward_from_output(flat, sizes, pres, k, act_id)


@njit(cache=True)
def all_input_gradients(flat, sizes, x, act_id):
    nl = _layer_count(sizes)
    width = _max_width(sizes)
    pres = np.empty((nl, width))
    acts = np.empty((nl + 1, width))
    _forward_cache(flat, sizes, x, act_id, pres, acts)
    n_out = sizes[nl]
    out = np.empty((n_out, sizes[0]))
    for k in range(n_out):
        out[k, :] = _backward_from_output(flat, sizes, pres, k, act_id)
    return out


@njit(cache=True)
def batch_logits(flat, sizes, xs, act_id):
    n = xs.shape[0]
    n_out = sizes[sizes.shape[0] - 1]
    out = np.empty((n, n_out))
    for s in range(n):
        out[s, :] = forward_logits(flat, sizes, xs[s], act_id)
    return out


@njit(cache=True)
def ce_loss_and_grad(flat, sizes, xs, ys, act_id, l2):
    """Mean softmax cross-entropy plus (l2/2)*sum W^2 over weight matrices."""
    nl = _layer_count(sizes)
    width = _max_width(sizes)
    n = xs.shape[0]
    n_cls = sizes[nl]

    pres = np.empty((n, nl, width))
    acts = np.empty((n, nl + 1, width))
    loss = 0.0
    probs = np.empty((n, n_cls))
    for s in range(n):
        _forward_cache(flat, sizes, xs[s], act_id, pres[s], acts[s])
        zmax = acts[s, nl, 0]
        for k in range(1, n_cls):
            if acts[s, nl, k] > zmax:
                zmax = acts[s, nl, k]
        sexp = 0.0
        for k in range(n_cls):
            probs[s, k] = np.exp(acts[s, nl, k] - zmax)
            sexp += probs[s, k]
        for k in range(n_cls):
            probs[s, k] /= sexp
        loss += np.log(sexp) - (acts[s, nl, ys[s]] - zmax)
    loss /= n

    grad = np.zeros(flat.shape[0])
    delta = np.empty((n, width))
    delta_next = np.empty((n, width))
    for s in range(n):
        for k in range(n_cls):
            delta[s, k] = probs[s, k] / n
        delta[s, ys[s]] -= 1.0 / n

    for i in range(nl - 1, -1, -1):
        n_in = sizes[i]
        n_out = sizes[i + 1]
        off = _layer_offset(sizes, i)
        # sample-major accumulation keeps the inner loops on contiguous rows
        for s in range(n):
            for r in range(n_out):
                d = delta[s, r]
                grad[off + n_out * n_in + r] += d
                row = off + r * n_in
                for c in range(n_in):
                    grad[row + c] += d * acts[s, i, c]
        if l2 > 0.0:
            for j in range(n_out * n_in):
                grad[off + j] += l2 * flat[off + j]
        if i > 0:
            for s in range(n):
                for c in range(n_in):
                    delta_next[s, c] = 0.0
                for r in range(n_out):
                    d = delta[s, r]
                    row = off + r * n_in
                    for c in range(n_in):
                        delta_next[s, c] += d * flat[row + c]
                for c in range(n_in):
                    delta_next[s, c] *= _dact_scalar(pres[s, i - 1, c], act_id)
            tmp = delta
            delta = delta_next
            delta_next = tmp

    if l2 > 0.0:
        for i in range(nl):
            n_in = sizes[i]
            n_out = sizes[i + 1]
            off = _layer_offset(sizes, i)
            sq = 0.0
            for j in range(n_out * n_in):
                sq += flat[off + j] * flat[off + j]
            loss += 0.5 * l2 * sq
    return loss, grad
