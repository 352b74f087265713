"""Latency benchmark: bootstrap-inclusive first trial vs steady state."""

import time
from dataclasses import dataclass

import numpy as np

from . import nn
from .mesh import MeshConfig
from .pipeline import FilterSpec, GainSeries
from .service import GestureClassifier, no_touch_gains


@dataclass(frozen=True)
class BenchReport:
    first_trial: float
    steady_mean: float
    steady_p95: float
    n_trials: int

    def __post_init__(self):
        if self.n_trials < 30:
            raise ValueError("a benchmark needs at least 30 trials")
        if min(self.first_trial, self.steady_mean, self.steady_p95) < 0:
            raise ValueError("negative timing")
        if self.steady_mean > self.first_trial:
            raise ValueError("steady mean exceeds the bootstrap trial")

    def to_json(self) -> dict:
        return {
            "first_trial": self.first_trial,
            "steady_mean": self.steady_mean,
            "steady_p95": self.steady_p95,
            "n_trials": self.n_trials,
        }


def synthetic_input(spec: nn.ModelSpec, config: MeshConfig, seed: int = 0) -> GainSeries:
    """No-touch gains plus small seeded wiggle, sized for the model."""
    rng = np.random.default_rng(seed)
    base = np.array(no_touch_gains(config))
    frames = np.tile(base, (spec.seq_len, 1))
    frames *= 1.0 + 0.02 * rng.standard_normal(frames.shape)
    return GainSeries(frames=np.clip(np.abs(frames), 1e-9, 1.0))


def bench_latency(model_path, trials: int = 100,
                  mesh_config: MeshConfig = MeshConfig(),
                  filter_spec: FilterSpec = FilterSpec(),
                  seed: int = 0) -> BenchReport:
    """Time `trials` classifications of one fixed input.

    The first trial includes model deserialization and classifier
    bootstrap; steady statistics cover the remaining trials.
    """
    if trials < 30:
        raise ValueError("trials must be >= 30")
    t0 = time.perf_counter()
    params = nn.load_model(model_path)
    classifier = GestureClassifier(params, mesh_config, filter_spec)
    sample = synthetic_input(params.spec, mesh_config, seed)
    classifier.classify_series(sample)
    first = time.perf_counter() - t0

    steady = np.empty(trials - 1)
    for k in range(trials - 1):
        t1 = time.perf_counter()
        classifier.classify_series(sample)
        steady[k] = time.perf_counter() - t1
    return BenchReport(
        first_trial=first,
        steady_mean=float(steady.mean()),
        steady_p95=float(np.percentile(steady, 95)),
        n_trials=trials,
    )
