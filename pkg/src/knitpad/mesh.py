"""Resistive-mesh circuit model of the knitted touchpad.

The conductive fabric is discretized as a uniform rows x cols resistor grid
(edge resistance derived from the sheet resistance). Each corner node
carries a parasitic capacitance to ground and connects through a
current-limiting resistor to a shared sinusoidal drive source. A finger
touch appears as a capacitance to ground, spread over the four grid nodes
nearest the touch location with bilinear weights. Corner gains are the
voltage magnitudes at the fabric-side corner nodes relative to the drive
amplitude, computed from steady-state AC nodal analysis at the drive
frequency.
"""

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .pipeline import GainSeries


class MeshSolveError(RuntimeError):
    """Raised when the nodal system cannot be solved."""


class CornerId(enum.Enum):
    A = "A"  # top-left
    B = "B"  # top-right
    C = "C"  # bottom-left
    D = "D"  # bottom-right


CORNERS = (CornerId.A, CornerId.B, CornerId.C, CornerId.D)


def _check_finite(name, value):
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class MeshConfig:
    """Electrical model of the fabric and its measurement circuit.

    Per-corner tuples are ordered A, B, C, D.
    """

    rows: int = 32
    cols: int = 32
    sheet_resistance: float = 4000.0
    corner_resistors: tuple = (4000.0, 4000.0, 4000.0, 4000.0)
    parasitic_caps: tuple = (60e-12, 60e-12, 60e-12, 60e-12)
    drive_frequency: float = 2e6
    drive_amplitude: float = 1.0
    worn_cap_offset: float = 0.0

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise ValueError("mesh needs at least 2x2 nodes")
        if len(self.corner_resistors) != 4 or len(self.parasitic_caps) != 4:
            raise ValueError("corner_resistors and parasitic_caps need 4 entries (A,B,C,D)")
        _check_finite("sheet_resistance", self.sheet_resistance)
        if self.sheet_resistance <= 0:
            raise ValueError("sheet_resistance must be > 0")
        for name, vals, low_ok in (
            ("corner_resistors", self.corner_resistors, False),
            ("parasitic_caps", self.parasitic_caps, True),
        ):
            for v in vals:
                _check_finite(name, v)
                if v < 0 or (v == 0 and not low_ok):
                    raise ValueError(f"{name} entries must be {'>= 0' if low_ok else '> 0'}")
        _check_finite("drive_frequency", self.drive_frequency)
        if self.drive_frequency <= 0:
            raise ValueError("drive_frequency must be > 0")
        _check_finite("drive_amplitude", self.drive_amplitude)
        if self.drive_amplitude <= 0:
            raise ValueError("drive_amplitude must be > 0")
        _check_finite("worn_cap_offset", self.worn_cap_offset)
        if self.worn_cap_offset < 0:
            raise ValueError("worn_cap_offset must be >= 0")

    @property
    def n_nodes(self) -> int:
        return self.rows * self.cols

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.drive_frequency

    def node(self, r: int, c: int) -> int:
        return r * self.cols + c

    def corner_nodes(self) -> dict:
        return {
            CornerId.A: self.node(0, 0),
            CornerId.B: self.node(0, self.cols - 1),
            CornerId.C: self.node(self.rows - 1, 0),
            CornerId.D: self.node(self.rows - 1, self.cols - 1),
        }

    def edge_resistances(self) -> tuple[float, float]:
        """(horizontal, vertical) edge resistance from the per-square value.

        Square cells give the sheet resistance on every edge; non-square
        grids scale each direction by the cell aspect ratio.
        """
        du = 1.0 / (self.cols - 1)
        dv = 1.0 / (self.rows - 1)
        return self.sheet_resistance * du / dv, self.sheet_resistance * dv / du


@dataclass(frozen=True)
class TouchPoint:
    """A capacitive touch at normalized pad coordinates."""

    u: float
    v: float
    c_t: float
    present: bool = True

    def __post_init__(self):
        for name, val in (("u", self.u), ("v", self.v), ("c_t", self.c_t)):
            _check_finite(name, val)
        if not (0.0 <= self.u <= 1.0 and 0.0 <= self.v <= 1.0):
            raise ValueError(f"touch position ({self.u}, {self.v}) outside [0,1]^2")
        if self.c_t < 0:
            raise ValueError("touch capacitance must be >= 0")

    @property
    def active(self) -> bool:
        return self.present and self.c_t > 0

    @staticmethod
    def absent() -> "TouchPoint":
        return TouchPoint(0.0, 0.0, 0.0, present=False)


@dataclass(frozen=True)
class GainFrame:
    """Per-corner gain magnitudes (A, B, C, D order) at one time instant."""

    gains: tuple
    timestamp: float

    def __post_init__(self):
        if len(self.gains) != 4:
            raise ValueError("a gain frame has exactly 4 channels")
        for g in self.gains:
            if not (math.isfinite(g) and 0.0 < g <= 1.0 + 1e-9):
                raise ValueError(f"gain {g!r} outside the passive-network range (0, 1]")


def touch_node_weights(config: MeshConfig, touch: TouchPoint) -> tuple[np.ndarray, np.ndarray]:
    """Bilinear spread of the touch over its four nearest grid nodes.

    Returns (node_indices[4], weights[4]); weights sum to 1.
    """
    x = touch.u * (config.cols - 1)
    y = touch.v * (config.rows - 1)
    c0 = min(int(math.floor(x)), config.cols - 2)
    r0 = min(int(math.floor(y)), config.rows - 2)
    fx = x - c0
    fy = y - r0
    nodes = np.array([
        config.node(r0, c0),
        config.node(r0, c0 + 1),
        config.node(r0 + 1, c0),
        config.node(r0 + 1, c0 + 1),
    ])
    weights = np.array([
        (1 - fx) * (1 - fy),
        fx * (1 - fy),
        (1 - fx) * fy,
        fx * fy,
    ])
    return nodes, weights


def assemble_admittance(config: MeshConfig, touch: TouchPoint):
    """Complex nodal system (Y, b) for AC steady state at the drive frequency.

    Y is sparse (n_nodes x n_nodes); b carries the drive injected through the
    corner resistors, so V = solve(Y, b) gives the fabric node voltages.
    """
    n = config.n_nodes
    rows, cols = config.rows, config.cols
    r_h, r_v = config.edge_resistances()
    g_h, g_v = 1.0 / r_h, 1.0 / r_v

    # grid edges as COO stamps
    ii, jj, vv = [], [], []
    node = np.arange(n).reshape(rows, cols)
    for a, b, g in (
        (node[:, :-1].ravel(), node[:, 1:].ravel(), g_h),
        (node[:-1, :].ravel(), node[1:, :].ravel(), g_v),
    ):
        ii.extend(np.concatenate([a, b, a, b]))
        jj.extend(np.concatenate([a, b, b, a]))
        vv.extend(np.concatenate([np.full(len(a), g), np.full(len(a), g),
                                  np.full(len(a), -g), np.full(len(a), -g)]))

    y = sp.coo_matrix((vv, (ii, jj)), shape=(n, n), dtype=complex).tolil()
    b = np.zeros(n, dtype=complex)

    jw = 1j * config.omega
    corner_nodes = config.corner_nodes()
    for k, corner in enumerate(CORNERS):
        idx = corner_nodes[corner]
        g_src = 1.0 / config.corner_resistors[k]
        y[idx, idx] += g_src + jw * (config.parasitic_caps[k] + config.worn_cap_offset)
        b[idx] = config.drive_amplitude * g_src

    if touch.active:
        nodes, weights = touch_node_weights(config, touch)
        for nd, w in zip(nodes, weights):
            if w > 0:
                y[nd, nd] += jw * touch.c_t * w

    return y.tocsc(), b


def _solve(y, b) -> np.ndarray:
    try:
        v = spla.spsolve(y, b)
    except Exception as exc:  # umfpack/superlu raise various types
        raise MeshSolveError(f"nodal system solve failed: {exc}") from exc
    if not np.all(np.isfinite(v.view(float))):
        raise MeshSolveError("nodal system is singular (zero-conductance mesh?)")
    return v


def solve_corner_gains(config: MeshConfig, touch: TouchPoint, timestamp: float = 0.0) -> GainFrame:
    """Gains |V_corner| / drive amplitude for one touch state."""
    y, b = assemble_admittance(config, touch)
    v = _solve(y, b)
    corner_nodes = config.corner_nodes()
    gains = tuple(
        float(np.abs(v[corner_nodes[c]])) / config.drive_amplitude for c in CORNERS
    )
    return GainFrame(gains=gains, timestamp=timestamp)


class TrajectorySolver:
    """Fast repeated corner-gain solves for a fixed mesh configuration.

    Factorizes the no-touch system once; each touch is a rank-4 diagonal
    update handled with the Woodbury identity, so a frame costs a 4x4 solve.
    Matches solve_corner_gains to solver precision.
    """

    def __init__(self, config: MeshConfig):
        self.config = config
        y0, b = assemble_admittance(config, TouchPoint.absent())
        try:
            self._inv = np.linalg.inv(y0.toarray())
        except np.linalg.LinAlgError as exc:
            raise MeshSolveError(f"no-touch system is singular: {exc}") from exc
        self._z0 = self._inv @ b
        cn = config.corner_nodes()
        self._corner_idx = np.array([cn[c] for c in CORNERS])
        self._z0_corners = self._z0[self._corner_idx]

    def corner_voltages(self, touch: TouchPoint) -> np.ndarray:
        if not touch.active:
            return self._z0_corners
        nodes, weights = touch_node_weights(self.config, touch)
        s = 1j * self.config.omega * touch.c_t * weights
        a = self._inv[np.ix_(nodes, nodes)]
        m = np.eye(4, dtype=complex) + a * s[None, :]
        t = np.linalg.solve(m, self._z0[nodes])
        return self._z0_corners - self._inv[np.ix_(self._corner_idx, nodes)] @ (s * t)

    def gains(self, touch: TouchPoint, timestamp: float = 0.0) -> GainFrame:
        v = self.corner_voltages(touch)
        return GainFrame(
            gains=tuple(float(x) for x in np.abs(v) / self.config.drive_amplitude),
            timestamp=timestamp,
        )


@lru_cache(maxsize=8)
def trajectory_solver(config: MeshConfig) -> TrajectorySolver:
    return TrajectorySolver(config)


def _touch_at(trajectory, times, t):
    """Touch state at time t: linear interpolation between present
    neighbors, nearest sample otherwise."""
    if t <= times[0]:
        return trajectory[0][1]
    if t >= times[-1]:
        return trajectory[-1][1]
    hi = int(np.searchsorted(times, t))
    lo = hi - 1
    t0, p0 = trajectory[lo]
    t1, p1 = trajectory[hi]
    if p0.present and p1.present and t1 > t0:
        f = (t - t0) / (t1 - t0)
        return TouchPoint(
            u=p0.u + f * (p1.u - p0.u),
            v=p0.v + f * (p1.v - p0.v),
            c_t=p0.c_t + f * (p1.c_t - p0.c_t),
            present=True,
        )
    return p0 if (t - t0) <= (t1 - t) else p1


def simulate_trajectory(
    config: MeshConfig,
    trajectory,
    frame_rate: float = 250.0,
    duration: float = 1.0,
) -> GainSeries:
    """Corner-gain time series for a touch trajectory.

    trajectory: sequence of (time, TouchPoint), times ascending. The touch
    state is sampled at frame midpoints; defaults give the 250x4 capture
    (250 frames/s over 1 s).
    """
    if frame_rate <= 0 or duration <= 0:
        raise ValueError("frame_rate and duration must be > 0")
    trajectory = list(trajectory)
    if not trajectory:
        raise ValueError("trajectory is empty")
    times = np.array([t for t, _ in trajectory])
    if np.any(np.diff(times) < 0):
        raise ValueError("trajectory timestamps must be ascending")

    solver = trajectory_solver(config)
    n_frames = int(round(frame_rate * duration))
    frames = np.empty((n_frames, 4))
    for k in range(n_frames):
        tm = (k + 0.5) / frame_rate
        touch = _touch_at(trajectory, times, tm)
        frames[k] = np.abs(solver.corner_voltages(touch)) / config.drive_amplitude
    return GainSeries(frames=frames, frame_rate=frame_rate)


def effective_resistance(config: MeshConfig, i: CornerId, j: CornerId) -> float:
    """DC two-terminal resistance of the fabric grid alone.

    Corner resistors and all capacitances are excluded: this is the
    quantity a multimeter across two connection points would read.
    """
    if i == j:
        raise ValueError("corner pair must be distinct")
    n = config.n_nodes
    rows, cols = config.rows, config.cols
    r_h, r_v = config.edge_resistances()
    g_h, g_v = 1.0 / r_h, 1.0 / r_v

    node = np.arange(n).reshape(rows, cols)
    ii, jj, vv = [], [], []
    for a, b, g in (
        (node[:, :-1].ravel(), node[:, 1:].ravel(), g_h),
        (node[:-1, :].ravel(), node[1:, :].ravel(), g_v),
    ):
        ii.extend(np.concatenate([a, b, a, b]))
        jj.extend(np.concatenate([a, b, b, a]))
        vv.extend(np.concatenate([np.full(len(a), g), np.full(len(a), g),
                                  np.full(len(a), -g), np.full(len(a), -g)]))
    lap = sp.coo_matrix((vv, (ii, jj)), shape=(n, n)).tocsc()

    cn = config.corner_nodes()
    src, snk = cn[i], cn[j]
    keep = np.ones(n, dtype=bool)
    keep[snk] = False
    reduced = lap[keep][:, keep]
    rhs = np.zeros(n)
    rhs[src] = 1.0  # 1 A in at i, out at grounded j
    rhs = rhs[keep]
    try:
        v = spla.spsolve(reduced.tocsc(), rhs)
    except Exception as exc:
        raise MeshSolveError(f"effective-resistance solve failed: {exc}") from exc
    if not np.all(np.isfinite(v)):
        raise MeshSolveError("mesh is disconnected")
    src_reduced = src - (1 if src > snk else 0)
    return float(v[src_reduced])
