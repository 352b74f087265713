"""From-scratch sequence classifier: layers, model, optimizer, training."""

from .layers import (
    batchnorm_backward,
    batchnorm_forward,
    conv1d_backward,
    conv1d_forward,
    dropout_backward,
    dropout_forward,
    linear_backward,
    linear_forward,
    log_softmax,
    log_softmax_backward,
    lstm_backward,
    lstm_forward,
    maxpool_backward,
    maxpool_forward,
    relu_backward,
    relu_forward,
)
from .model import (
    ModelParams,
    ModelSpec,
    backward,
    build_params,
    forward,
    loss_nll,
    nll_backward,
    xavier_init,
)
from .optim import AdamState, adam_step
from .serialize import load_model, save_model
from .train import TrainConfig, evaluate_accuracy, predict, train
