"""Differentiable building blocks on plain numpy arrays.

Every forward returns (output, cache); the matching backward consumes the
upstream gradient and the cache and returns gradients for its inputs and
parameters. Arrays are channel-last: sequences are (batch, time, channels).
"""

import numpy as np


def _sigmoid(x, out=None):
    """Logistic function via the tanh identity.

    numpy's tanh carries SIMD loops that scipy's expit lacks, and the
    identity sigma(x) = (1 + tanh(x/2)) / 2 is exact in real arithmetic.
    """
    out = np.multiply(x, 0.5, out=out)
    np.tanh(out, out=out)
    out += 1.0
    out *= 0.5
    return out


def conv1d_forward(x, w, b, kernel):
    """Same-padded 1-D convolution along the time axis.

    x: (B, T, C_in); w: (kernel * C_in, C_out) with taps ordered
    tap-major; b: (C_out,). Returns y (B, T, C_out).
    """
    bsz, t, c_in = x.shape
    if w.shape[0] != kernel * c_in:
        raise ValueError(f"weight rows {w.shape[0]} != kernel*C_in {kernel * c_in}")
    pad_l = (kernel - 1) // 2
    pad_r = kernel - 1 - pad_l
    xp = np.pad(x, ((0, 0), (pad_l, pad_r), (0, 0)))
    # Tap-major im2col via slab copies; a reshape of the transposed
    # sliding_window_view gathers element-by-element and is far slower.
    cols = np.empty((bsz, t, kernel * c_in), dtype=x.dtype)
    for j in range(kernel):
        cols[:, :, j * c_in:(j + 1) * c_in] = xp[:, j:j + t]
    y = cols.reshape(-1, kernel * c_in) @ w
    y = y.reshape(bsz, t, -1)
    y += b
    return y, (cols, w, x.shape, kernel, pad_l)


def conv1d_backward(dy, cache):
    cols, w, x_shape, kernel, pad_l = cache
    bsz, t, c_in = x_shape
    dw = cols.reshape(-1, cols.shape[-1]).T @ dy.reshape(-1, dy.shape[-1])
    db = dy.sum(axis=(0, 1))
    dcols = (dy @ w.T).reshape(bsz, t, kernel, c_in)
    dxp = np.zeros((bsz, t + kernel - 1, c_in), dtype=dy.dtype)
    for j in range(kernel):
        dxp[:, j:j + t] += dcols[:, :, j]
    dx = dxp[:, pad_l:pad_l + t]
    return dx, dw, db


def relu_forward(x):
    return np.maximum(x, 0.0), (x > 0)


def relu_backward(dy, cache):
    return dy * cache


def batchnorm_forward(x, gamma, beta, running_mean, running_var,
                      train, momentum=0.1, eps=1e-5):
    """Per-channel normalization over batch and time.

    Returns (y, cache, running_mean, running_var); running stats are the
    updated copies in train mode, passthrough in eval mode.
    """
    if train:
        mean = x.mean(axis=(0, 1))
        var = x.var(axis=(0, 1))
        running_mean = (1 - momentum) * running_mean + momentum * mean
        running_var = (1 - momentum) * running_var + momentum * var
    else:
        mean, var = running_mean, running_var
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x - mean) * inv_std
    y = gamma * xhat + beta
    cache = (xhat, gamma, inv_std, train)
    return y, cache, running_mean, running_var


def batchnorm_backward(dy, cache):
    xhat, gamma, inv_std, train = cache
    if not train:
        raise ValueError("batch-norm backward is only defined for train mode")
    n = dy.shape[0] * dy.shape[1]
    dgamma = (dy * xhat).sum(axis=(0, 1))
    dbeta = dy.sum(axis=(0, 1))
    dxhat = dy * gamma
    dx = (inv_std / n) * (
        n * dxhat
        - dxhat.sum(axis=(0, 1))
        - xhat * (dxhat * xhat).sum(axis=(0, 1))
    )
    return dx, dgamma, dbeta


def dropout_forward(x, p, rng, train):
    """Inverted dropout: eval activations need no rescaling."""
    if not train or p == 0.0:
        return x, None
    draw_dtype = np.float32 if x.dtype == np.float32 else np.float64
    mask = (rng.random(x.shape, dtype=draw_dtype) >= p).astype(x.dtype) / (1.0 - p)
    return x * mask, mask


def dropout_backward(dy, mask):
    if mask is None:
        return dy
    return dy * mask


def maxpool_forward(x, kernel=2, stride=2):
    """Max pooling over time; a trailing odd sample is dropped."""
    if kernel != 2 or stride != 2:
        raise ValueError("only kernel 2 / stride 2 pooling is implemented")
    t_out = x.shape[1] // 2
    a = x[:, 0:2 * t_out:2]
    b = x[:, 1:2 * t_out:2]
    take_a = a >= b
    y = np.where(take_a, a, b)
    return y, (take_a, x.shape)


def maxpool_backward(dy, cache):
    take_a, x_shape = cache
    dx = np.zeros(x_shape, dtype=dy.dtype)
    t_out = dy.shape[1]
    dx[:, 0:2 * t_out:2] = dy * take_a
    dx[:, 1:2 * t_out:2] = dy * ~take_a
    return dx


def lstm_forward(x, w, u, b):
    """One LSTM layer over a full sequence, zero initial state.

    x: (B, T, D); w: (D, 4H); u: (H, 4H); b: (4H,). Gate order i, f, g, o.
    Input projections for the whole sequence are batched into one matmul;
    only the recurrent term runs per step. Returns h_seq (B, T, H).

    State histories are kept time-major internally so each step works on
    contiguous (B, ·) blocks.
    """
    bsz, t, _ = x.shape
    hid = u.shape[0]
    zin = (x @ w + b).transpose(1, 0, 2).copy()
    dt = zin.dtype
    gates = np.empty((t, bsz, 4 * hid), dtype=dt)
    c_s = np.empty((t, bsz, hid), dtype=dt)
    tc_s = np.empty_like(c_s)
    h_s = np.empty_like(c_s)
    h = np.zeros((bsz, hid), dtype=dt)
    c = np.zeros((bsz, hid), dtype=dt)
    z = np.empty((bsz, 4 * hid), dtype=dt)
    for k in range(t):
        np.dot(h, u, out=z)
        z += zin[k]
        gk = gates[k]
        _sigmoid(z[:, :2 * hid], out=gk[:, :2 * hid])
        np.tanh(z[:, 2 * hid:3 * hid], out=gk[:, 2 * hid:3 * hid])
        _sigmoid(z[:, 3 * hid:], out=gk[:, 3 * hid:])
        ck = c_s[k]
        np.multiply(gk[:, hid:2 * hid], c, out=ck)
        ck += gk[:, :hid] * gk[:, 2 * hid:3 * hid]
        np.tanh(ck, out=tc_s[k])
        h = np.multiply(gk[:, 3 * hid:], tc_s[k], out=h_s[k])
        c = ck
    cache = (x, w, u, gates, c_s, tc_s, h_s)
    return np.ascontiguousarray(h_s.transpose(1, 0, 2)), cache


def lstm_backward(dh_seq, cache):
    """Backpropagation through time for one layer.

    dh_seq: (B, T, H) gradient on every hidden output. Returns
    (dx, dw, du, db). Only the recurrent gradient chain runs per step;
    gate derivative factors and all weight gradients are batched.
    """
    x, w, u, gates, c_s, tc_s, h_s = cache
    bsz, t, hid = dh_seq.shape
    dh_tm = np.ascontiguousarray(dh_seq.transpose(1, 0, 2))
    dzin = np.empty_like(gates)
    u_t = np.ascontiguousarray(u.T)
    dt = dh_tm.dtype
    dh = np.zeros((bsz, hid), dtype=dt)
    dc = np.empty_like(dh)
    dc_next = np.zeros_like(dh)
    tmp = np.empty_like(dh)
    fac = np.empty((bsz, 4 * hid), dtype=dt)
    zeros = np.zeros_like(dh)
    for k in range(t - 1, -1, -1):
        gk = gates[k]
        tck = tc_s[k]
        dh += dh_tm[k]
        # dc = dc_next + dh * o * (1 - tanh(c)^2), buffers reused throughout
        np.multiply(tck, tck, out=tmp)
        np.subtract(1.0, tmp, out=tmp)
        tmp *= gk[:, 3 * hid:]
        tmp *= dh
        np.add(dc_next, tmp, out=dc)
        # sigmoid blocks differentiate to s*(1-s); the tanh block to 1-g^2
        np.subtract(1.0, gk, out=fac)
        fac *= gk
        gb = gk[:, 2 * hid:3 * hid]
        fb = fac[:, 2 * hid:3 * hid]
        np.multiply(gb, gb, out=fb)
        np.subtract(1.0, fb, out=fb)
        c_prev = c_s[k - 1] if k > 0 else zeros
        dzk = dzin[k]
        np.multiply(dc, gk[:, 2 * hid:3 * hid], out=dzk[:, :hid])
        np.multiply(dc, c_prev, out=dzk[:, hid:2 * hid])
        np.multiply(dc, gk[:, :hid], out=dzk[:, 2 * hid:3 * hid])
        np.multiply(dh, tck, out=dzk[:, 3 * hid:])
        dzk *= fac
        np.multiply(dc, gk[:, hid:2 * hid], out=dc_next)
        np.dot(dzk, u_t, out=dh)
    flat = dzin.reshape(-1, 4 * hid)
    dw = np.ascontiguousarray(x.transpose(1, 0, 2)).reshape(-1, x.shape[-1]).T @ flat
    db = flat.sum(axis=0)
    du = h_s[:-1].reshape(-1, hid).T @ dzin[1:].reshape(-1, 4 * hid)
    dx = np.ascontiguousarray((dzin @ w.T).transpose(1, 0, 2))
    return dx, dw, du, db


def linear_forward(x, w, b):
    return x @ w + b, (x, w)


def linear_backward(dy, cache):
    x, w = cache
    dw = x.T @ dy
    db = dy.sum(axis=0)
    dx = dy @ w.T
    return dx, dw, db


def log_softmax(x):
    m = x.max(axis=1, keepdims=True)
    shifted = x - m
    lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    return shifted - lse


def log_softmax_backward(dlp, log_probs):
    p = np.exp(log_probs)
    return dlp - p * dlp.sum(axis=1, keepdims=True)
