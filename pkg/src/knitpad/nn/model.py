"""Gesture classifier assembly: CNN-LSTM and the LSTM-only baseline.

The cnn_lstm variant is conv -> relu -> batch-norm -> dropout -> conv ->
relu -> max-pool -> 3-layer LSTM -> linear head -> log-softmax; lstm_only
feeds the raw sequence straight into the same LSTM stack and head.
"""

from dataclasses import dataclass, field

import numpy as np

from . import layers

VARIANTS = ("cnn_lstm", "lstm_only")


@dataclass(frozen=True)
class ModelSpec:
    variant: str = "cnn_lstm"
    in_channels: int = 4
    seq_len: int = 250
    n_classes: int = 12
    conv1_out: int = 32
    conv1_kernel: int = 7
    conv2_out: int = 64
    conv2_kernel: int = 5
    pool_kernel: int = 2
    pool_stride: int = 2
    lstm_layers: int = 3
    lstm_hidden: int = 100
    dropout_p: float = 0.6

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if not (0.0 <= self.dropout_p < 1.0):
            raise ValueError("dropout_p must be in [0, 1)")
        for name in ("in_channels", "seq_len", "n_classes", "conv1_out",
                     "conv1_kernel", "conv2_out", "conv2_kernel",
                     "lstm_layers", "lstm_hidden"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    def lstm_input_size(self) -> int:
        return self.conv2_out if self.variant == "cnn_lstm" else self.in_channels


@dataclass
class ModelParams:
    """Learnable tensors plus batch-norm running statistics."""

    spec: ModelSpec
    tensors: dict
    running: dict = field(default_factory=dict)
    version: int = 1

    def dtype(self):
        return next(iter(self.tensors.values())).dtype

    def astype(self, dtype) -> "ModelParams":
        return ModelParams(
            spec=self.spec,
            tensors={k: v.astype(dtype) for k, v in self.tensors.items()},
            running={k: v.astype(dtype) for k, v in self.running.items()},
            version=self.version,
        )


def xavier_init(shape, seed) -> np.ndarray:
    """Glorot-uniform tensor: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).

    seed may be an integer or a numpy Generator.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if len(shape) != 2:
        raise ValueError("xavier_init expects a 2-D shape")
    bound = np.sqrt(6.0 / (shape[0] + shape[1]))
    return rng.uniform(-bound, bound, size=shape)


def build_params(spec: ModelSpec, seed: int, dtype=np.float32) -> ModelParams:
    """Fresh Xavier-initialized parameters (forget-gate bias starts at 1)."""
    root = np.random.SeedSequence(seed)
    tensors = {}
    running = {}

    def nxt():
        return np.random.default_rng(root.spawn(1)[0])

    if spec.variant == "cnn_lstm":
        tensors["conv1_w"] = xavier_init(
            (spec.conv1_kernel * spec.in_channels, spec.conv1_out), nxt())
        tensors["conv1_b"] = np.zeros(spec.conv1_out)
        tensors["bn1_gamma"] = np.ones(spec.conv1_out)
        tensors["bn1_beta"] = np.zeros(spec.conv1_out)
        running["bn1_mean"] = np.zeros(spec.conv1_out)
        running["bn1_var"] = np.ones(spec.conv1_out)
        tensors["conv2_w"] = xavier_init(
            (spec.conv2_kernel * spec.conv1_out, spec.conv2_out), nxt())
        tensors["conv2_b"] = np.zeros(spec.conv2_out)

    d_in = spec.lstm_input_size()
    hid = spec.lstm_hidden
    for layer in range(spec.lstm_layers):
        size = d_in if layer == 0 else hid
        tensors[f"lstm{layer}_w"] = xavier_init((size, 4 * hid), nxt())
        tensors[f"lstm{layer}_u"] = xavier_init((hid, 4 * hid), nxt())
        bias = np.zeros(4 * hid)
        bias[hid:2 * hid] = 1.0  # forget gate open at start
        tensors[f"lstm{layer}_b"] = bias

    tensors["head_w"] = xavier_init((hid, spec.n_classes), nxt())
    tensors["head_b"] = np.zeros(spec.n_classes)

    tensors = {k: v.astype(dtype) for k, v in tensors.items()}
    running = {k: v.astype(dtype) for k, v in running.items()}
    return ModelParams(spec=spec, tensors=tensors, running=running)


def forward(params: ModelParams, batch, mode: str = "eval", rng=None,
            return_cache: bool = False):
    """Log-probabilities (B, n_classes) for a (B, T, C) batch.

    Train mode applies dropout (needs rng) and batch statistics, updating
    the stored running stats; eval mode is deterministic.
    """
    spec = params.spec
    x = np.asarray(batch)
    if x.ndim != 3 or x.shape[1] != spec.seq_len or x.shape[2] != spec.in_channels:
        raise ValueError(
            f"expected batch (B, {spec.seq_len}, {spec.in_channels}), got {x.shape}"
        )
    if mode not in ("train", "eval"):
        raise ValueError("mode must be 'train' or 'eval'")
    train = mode == "train"
    if train and rng is None and spec.dropout_p > 0 and spec.variant == "cnn_lstm":
        raise ValueError("train mode with dropout needs an rng")
    x = x.astype(params.dtype(), copy=False)
    t = params.tensors
    cache = {}

    if spec.variant == "cnn_lstm":
        x, cache["conv1"] = layers.conv1d_forward(
            x, t["conv1_w"], t["conv1_b"], spec.conv1_kernel)
        x, cache["relu1"] = layers.relu_forward(x)
        x, cache["bn1"], rm, rv = layers.batchnorm_forward(
            x, t["bn1_gamma"], t["bn1_beta"],
            params.running["bn1_mean"], params.running["bn1_var"], train)
        if train:
            params.running["bn1_mean"] = rm
            params.running["bn1_var"] = rv
        x, cache["drop"] = layers.dropout_forward(x, spec.dropout_p, rng, train)
        x, cache["conv2"] = layers.conv1d_forward(
            x, t["conv2_w"], t["conv2_b"], spec.conv2_kernel)
        x, cache["relu2"] = layers.relu_forward(x)
        x, cache["pool"] = layers.maxpool_forward(
            x, spec.pool_kernel, spec.pool_stride)

    for layer in range(spec.lstm_layers):
        x, cache[f"lstm{layer}"] = layers.lstm_forward(
            x, t[f"lstm{layer}_w"], t[f"lstm{layer}_u"], t[f"lstm{layer}_b"])

    last_h = x[:, -1]
    logits, cache["head"] = layers.linear_forward(last_h, t["head_w"], t["head_b"])
    log_probs = layers.log_softmax(logits)
    cache["log_probs"] = log_probs
    cache["seq_shape"] = x.shape
    if return_cache:
        return log_probs, cache
    return log_probs


def loss_nll(log_probs, labels) -> float:
    """Mean negative log likelihood of the true classes."""
    labels = np.asarray(labels)
    n_classes = log_probs.shape[1]
    if labels.ndim != 1 or labels.shape[0] != log_probs.shape[0]:
        raise ValueError("labels must be one integer per row")
    if labels.min() < 0 or labels.max() >= n_classes:
        raise ValueError(f"labels must lie in 0..{n_classes - 1}")
    return float(-log_probs[np.arange(len(labels)), labels].mean())


def nll_backward(log_probs, labels):
    """Gradient of loss_nll with respect to log_probs."""
    dlp = np.zeros_like(log_probs)
    dlp[np.arange(len(labels)), labels] = -1.0 / len(labels)
    return dlp


def backward(params: ModelParams, batch, labels, rng=None):
    """Forward in train mode, then full backpropagation.

    Returns (grads dict keyed like params.tensors, loss, log_probs).
    """
    spec = params.spec
    log_probs, cache = forward(params, batch, mode="train", rng=rng,
                               return_cache=True)
    loss = loss_nll(log_probs, labels)
    grads = {}

    dlp = nll_backward(log_probs, labels)
    dlogits = layers.log_softmax_backward(dlp, log_probs)
    dlast_h, grads["head_w"], grads["head_b"] = layers.linear_backward(
        dlogits, cache["head"])

    dx = np.zeros(cache["seq_shape"], dtype=dlast_h.dtype)
    dx[:, -1] = dlast_h
    for layer in range(spec.lstm_layers - 1, -1, -1):
        dx, dw, du, db = layers.lstm_backward(dx, cache[f"lstm{layer}"])
        grads[f"lstm{layer}_w"] = dw
        grads[f"lstm{layer}_u"] = du
        grads[f"lstm{layer}_b"] = db

    if spec.variant == "cnn_lstm":
        dx = layers.maxpool_backward(dx, cache["pool"])
        dx = layers.relu_backward(dx, cache["relu2"])
        dx, grads["conv2_w"], grads["conv2_b"] = layers.conv1d_backward(
            dx, cache["conv2"])
        dx = layers.dropout_backward(dx, cache["drop"])
        dx, grads["bn1_gamma"], grads["bn1_beta"] = layers.batchnorm_backward(
            dx, cache["bn1"])
        dx = layers.relu_backward(dx, cache["relu1"])
        dx, grads["conv1_w"], grads["conv1_b"] = layers.conv1d_backward(
            dx, cache["conv1"])

    return grads, loss, log_probs
