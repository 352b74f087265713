"""
From finger path to classifier features
=======================================

Follows a single 'O' gesture through every pipeline stage: trajectory
sampling, mesh simulation, baseline subtraction, wavelet filtering.
Saves a before/after plot to signal_chain.png.
"""

import numpy as np

from knitpad.gestures import (
    GestureClass, LabeledSample, default_profiles, path_for_class, sample_trajectory,
)
from knitpad.mesh import MeshConfig, TouchPoint, simulate_trajectory
from knitpad.pipeline import FilterSpec, preprocess, subtract_baseline, wavelet_filter

config = MeshConfig()
profile = default_profiles(1, base_seed=7)[0]

# Stage 1: a subject draws the glyph. The profile adds rotation, scale,
# offset and tremor so no two trials are alike.
path = path_for_class(GestureClass("O"))
trajectory = sample_trajectory(path, profile, duration=1.0, frame_rate=250.0)
touched = [t for t, p in trajectory if p.active]
print(f"trajectory: {len(trajectory)} frames, touch from "
      f"{touched[0]:.3f}s to {touched[-1]:.3f}s")

# Stage 2: the mesh converts the moving touch into four gain channels.
series = simulate_trajectory(config, trajectory, frame_rate=250.0)
baseline = simulate_trajectory(config, [(0.0, TouchPoint.absent())], frame_rate=250.0)
print("raw gain range:", float(series.frames.min()), "to", float(series.frames.max()))

# Stage 3: subtract the idle response, then keep only the coarse wavelet
# bands. High-frequency tremor and sensor noise live in the fine bands.
flat = subtract_baseline(series, baseline)
spec = FilterSpec()
smooth = wavelet_filter(flat, spec)
noise_before = float(np.std(np.diff(flat.frames, axis=0)))
noise_after = float(np.std(np.diff(smooth.frames, axis=0)))
print(f"frame-to-frame std: {noise_before:.2e} before filtering, "
      f"{noise_after:.2e} after")

# preprocess() bundles both stages for training code.
sample = LabeledSample(series=series, baseline=baseline,
                       gesture=GestureClass("O"), subject=1)
features = preprocess(sample, spec)
print("feature block:", features.shape)

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(2, 1, figsize=(8, 5), sharex=True)
    t = np.arange(series.frames.shape[0]) / 250.0
    for ch, label in enumerate("ABCD"):
        axes[0].plot(t, flat.frames[:, ch], lw=0.7, label=label)
        axes[1].plot(t, smooth.frames[:, ch], lw=0.9, label=label)
    axes[0].set_title("baseline-subtracted gains")
    axes[1].set_title("after wavelet filtering")
    axes[1].set_xlabel("time [s]")
    axes[0].legend(ncol=4, fontsize=8)
    fig.tight_layout()
    fig.savefig("signal_chain.png", dpi=110)
    print("wrote signal_chain.png")
except ImportError:
    print("matplotlib not installed, skipping plot")
