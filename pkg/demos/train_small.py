"""
Training a gesture classifier on a small synthetic set
======================================================

Full loop at reduced scale: synthesize captures for three subjects,
preprocess, train the compact model, and classify trials it never saw.
Validation here holds out whole trials rather than a whole subject; at
this size a subject-independent split needs the real protocol in
knitpad.evaluate. Takes a few seconds.
"""

import numpy as np

from knitpad import nn
from knitpad.evaluate import dataset_arrays
from knitpad.gestures import CLASS_LABELS, default_profiles, synth_dataset
from knitpad.mesh import MeshConfig
from knitpad.pipeline import FilterSpec

config = MeshConfig()
profiles = default_profiles(3, base_seed=42)

# Short captures keep the demo quick: 0.64 s at 100 Hz is 64 frames.
samples = synth_dataset(config, profiles, trials_per_class=6,
                        duration=0.64, frame_rate=100.0)
print(f"{len(samples)} captures from {len(profiles)} subjects")

spec = FilterSpec(kept_levels=2, decomposition_depth=3)
x, y, subj = dataset_arrays(samples, spec)

# Hold out every sixth trial; the synthesis order cycles trials within
# class within subject, so the split is stratified.
val = np.arange(len(x)) % 6 == 5
tr = ~val
model_spec = nn.ModelSpec(variant="cnn_lstm", seq_len=x.shape[1],
                          conv1_out=16, conv2_out=24,
                          lstm_layers=1, lstm_hidden=32)
cfg = nn.TrainConfig(epochs=40, lr=0.003, batch_size=32, dropout=0.1, seed=3)
params, trace = nn.train(x[tr], y[tr], model_spec, cfg, x[val], y[val])

for rec in trace[::5]:
    print(f"epoch {rec.epoch:3d}  train loss {rec.train_loss:.3f}  "
          f"val acc {rec.val_accuracy:.2f}")
print(f"final accuracy on held-out trials: {trace[-1].val_accuracy:.2f}")

# Classify a few captures the model never saw.
log_probs = nn.forward(params, x[val][:6])
for lp, truth in zip(log_probs, y[val][:6]):
    pred = CLASS_LABELS[int(np.argmax(lp))]
    true = CLASS_LABELS[int(truth)]
    mark = "" if pred == true else "   <- miss"
    print(f"probe: predicted {pred!r}, true {true!r}{mark}")
