"""Mini-batch training loop with a per-epoch validation trace."""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, ModelSpec, backward, build_params, forward, loss_nll
from .optim import AdamState, adam_step


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.001
    dropout: float = 0.6
    batch_size: int = 128
    epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if not (0.0 <= self.dropout < 1.0):
            raise ValueError("dropout must be in [0, 1)")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be >= 1")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_accuracy: float


def predict(params: ModelParams, x, batch_size: int = 256) -> np.ndarray:
    """Predicted class index per sample, evaluated in chunks."""
    x = np.asarray(x)
    out = np.empty(len(x), dtype=np.int64)
    for start in range(0, len(x), batch_size):
        lp = forward(params, x[start:start + batch_size], mode="eval")
        out[start:start + batch_size] = lp.argmax(axis=1)
    return out


def evaluate_accuracy(params: ModelParams, x, y, batch_size: int = 256) -> float:
    y = np.asarray(y)
    if len(y) == 0:
        raise ValueError("cannot score an empty set")
    return float((predict(params, x, batch_size) == y).mean())


def _val_metrics(params, x, y, batch_size=256):
    """(mean nll, accuracy) over a held-out set from one chunked forward."""
    total = 0.0
    hits = 0
    for start in range(0, len(x), batch_size):
        xb = x[start:start + batch_size]
        yb = y[start:start + batch_size]
        lp = forward(params, xb, mode="eval")
        total += loss_nll(lp, yb) * len(xb)
        hits += int((lp.argmax(axis=1) == yb).sum())
    return total / len(x), hits / len(x)


def train(train_x, train_y, spec: ModelSpec, config: TrainConfig,
          val_x, val_y, verbose: bool = False):
    """Train a fresh model; returns (params, list of EpochRecord)."""
    train_x = np.asarray(train_x, dtype=np.float32)
    train_y = np.asarray(train_y)
    val_x = np.asarray(val_x, dtype=np.float32)
    val_y = np.asarray(val_y)
    if len(train_x) != len(train_y):
        raise ValueError("train_x and train_y disagree on length")
    if len(train_x) == 0:
        raise ValueError("empty training set")

    spec = dataclasses.replace(spec, dropout_p=config.dropout)
    params = build_params(spec, seed=config.seed, dtype=np.float32)
    state = AdamState(lr=config.lr)
    rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(1)[0])

    trace = []
    n = len(train_x)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            grads, loss, _ = backward(params, train_x[idx], train_y[idx], rng=rng)
            adam_step(params.tensors, grads, state)
            epoch_loss += loss * len(idx)
        val_loss, val_acc = _val_metrics(params, val_x, val_y)
        record = EpochRecord(
            epoch=epoch,
            train_loss=epoch_loss / n,
            val_loss=val_loss,
            val_accuracy=val_acc,
        )
        trace.append(record)
        if verbose:
            print(f"epoch {epoch:3d}  train_loss {record.train_loss:.4f}  "
                  f"val_loss {record.val_loss:.4f}  val_acc {record.val_accuracy:.3f}")
    return params, trace
