"""
Laundering drift and the conductivity matrix
============================================
"""

# The fabric's six pairwise corner resistances drift after each wash/dry
# cycle. This walks the analysis: measure, build the Kirchhoff matrix,
# report percent change per pair and cumulatively.

import numpy as np

from knitpad.mesh import MeshConfig
from knitpad.resistance import (
    PAIR_KEYS,
    PairwiseResistance,
    WashDryRecord,
    conductivity_matrix,
    pairwise_from_mesh,
    percent_delta_r,
)

# Baseline: the simulated fabric, fresh off the machine.
config = MeshConfig(sheet_resistance=4200.0)
baseline = pairwise_from_mesh(config)
print("baseline pairwise resistances [ohm]:")
for k in PAIR_KEYS:
    print(f"  {k}: {baseline[k]:.1f}")

m = conductivity_matrix(baseline).matrix
print("\nconductivity matrix rows sum to", np.abs(m.sum(axis=1)).max())

# Three laundering cycles, each drifting the pairs a little differently.
# The diagonal pairs (AD, BC) run through more fabric and drift more.
rng = np.random.default_rng(5)
cycles = []
r = {k: baseline[k] for k in PAIR_KEYS}
for _ in range(3):
    r = {
        k: r[k] * (1.0 + rng.normal(0.06 if k in ("AD", "BC") else 0.03, 0.02))
        for k in PAIR_KEYS
    }
    cycles.append(PairwiseResistance(values=dict(r)))

record = WashDryRecord(baseline=baseline, after_cycle=tuple(cycles))
print("\ncycle  " + "  ".join(f"{k:>7}" for k in PAIR_KEYS) + "  cumulative")
for n in range(1, record.n_cycles + 1):
    per_pair, cum = percent_delta_r(record, n)
    row = "  ".join(f"{100 * per_pair[k]:+6.2f}%" for k in PAIR_KEYS)
    print(f"  d{n}   {row}     {100 * cum:+.2f}%")
