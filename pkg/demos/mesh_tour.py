"""
A tour of the knitted mesh simulator
====================================

Solves the resistive mesh at a few touch positions and prints what the
four corner readout channels see.
"""

import numpy as np

from knitpad.mesh import MeshConfig, TouchPoint, solve_corner_gains

config = MeshConfig()
print(f"mesh: {config.rows}x{config.cols}, drive {config.drive_frequency:.0f} Hz")

# Idle response: no finger anywhere.
idle = np.array(solve_corner_gains(config, TouchPoint.absent()).gains)
print("idle gains:", np.round(idle, 4))

# Sweep a touch along the diagonal and watch the channels trade places.
print("\n  u     v     A       B       C       D")
for s in np.linspace(0.1, 0.9, 5):
    g = solve_corner_gains(config, TouchPoint(s, s, 60e-12)).gains
    print(f"{s:5.2f} {s:5.2f}  " + "  ".join(f"{v:.4f}" for v in g))

# The channel closest to the touch dips the most. Corners are labeled
# A, B, C, D in reading order: A top-left, B top-right, C bottom-left,
# D bottom-right.
g = np.array(solve_corner_gains(config, TouchPoint(0.08, 0.08, 60e-12)).gains)
drop = idle - g
print("\ntouch near corner A at (0.08, 0.08):")
for label, d in zip("ABCD", drop):
    print(f"  channel {label}: gain drop {d:+.5f}")
print("largest drop on channel", "ABCD"[int(np.argmax(drop))])
