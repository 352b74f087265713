"""Parametric gesture trajectories and labeled dataset synthesis.

Twelve single-stroke glyphs are digitized as line/arc segment chains on
the unit square (u right, v down, corner A at the origin). A trajectory
is the glyph resampled in time with three phases (touch onset, gesture
action, touch offset) and subject-dependent distortions; datasets are
built by driving the mesh simulator over those trajectories.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .mesh import MeshConfig, TouchPoint, simulate_trajectory
from .pipeline import GainSeries

CLASS_LABELS = ("3", "5", "I", "J", "L", "M", "O", "S", "V", "W", "Z", "?")


@dataclass(frozen=True)
class GestureClass:
    label: str

    def __post_init__(self):
        if self.label not in CLASS_LABELS:
            raise ValueError(f"unknown gesture label {self.label!r}")

    @property
    def index(self) -> int:
        return CLASS_LABELS.index(self.label)


def all_classes() -> tuple:
    return tuple(GestureClass(lbl) for lbl in CLASS_LABELS)


@dataclass(frozen=True)
class Line:
    p0: tuple
    p1: tuple

    @property
    def start(self):
        return self.p0

    @property
    def end(self):
        return self.p1

    @property
    def length(self) -> float:
        return math.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1])

    def point(self, f: float):
        return (
            self.p0[0] + f * (self.p1[0] - self.p0[0]),
            self.p0[1] + f * (self.p1[1] - self.p0[1]),
        )


@dataclass(frozen=True)
class Arc:
    """Circular arc from theta0 to theta1 (radians, v-down coordinates)."""

    center: tuple
    radius: float
    theta0: float
    theta1: float

    def _at(self, theta: float):
        return (
            self.center[0] + self.radius * math.cos(theta),
            self.center[1] + self.radius * math.sin(theta),
        )

    @property
    def start(self):
        return self._at(self.theta0)

    @property
    def end(self):
        return self._at(self.theta1)

    @property
    def length(self) -> float:
        return abs(self.theta1 - self.theta0) * self.radius

    def point(self, f: float):
        return self._at(self.theta0 + f * (self.theta1 - self.theta0))


@dataclass(frozen=True)
class GesturePath:
    gesture: GestureClass
    segments: tuple

    def __post_init__(self):
        if not self.segments:
            raise ValueError("path needs at least one segment")
        for a, b in zip(self.segments, self.segments[1:]):
            gap = math.hypot(a.end[0] - b.start[0], a.end[1] - b.start[1])
            if gap > 1e-9:
                raise ValueError(f"stroke break of {gap:.2e} between segments")
        for seg in self.segments:
            for f in np.linspace(0.0, 1.0, 33):
                x, y = seg.point(float(f))
                if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                    raise ValueError("path leaves the unit square")

    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments)

    def point(self, s: float):
        """Position at arclength fraction s in [0, 1]."""
        s = min(max(s, 0.0), 1.0)
        target = s * self.length
        for seg in self.segments:
            if target <= seg.length or seg is self.segments[-1]:
                return seg.point(target / seg.length if seg.length > 0 else 0.0)
            target -= seg.length
        raise AssertionError("unreachable")

    def sample(self, n: int) -> np.ndarray:
        return np.array([self.point(s) for s in np.linspace(0.0, 1.0, n)])


def _glyph_segments(label: str) -> tuple:
    if label == "I":
        return (Line((0.5, 0.15), (0.5, 0.85)),)
    if label == "L":
        return (
            Line((0.35, 0.15), (0.35, 0.80)),
            Line((0.35, 0.80), (0.78, 0.80)),
        )
    if label == "V":
        return (
            Line((0.20, 0.15), (0.50, 0.85)),
            Line((0.50, 0.85), (0.80, 0.15)),
        )
    if label == "W":
        return (
            Line((0.15, 0.15), (0.33, 0.85)),
            Line((0.33, 0.85), (0.50, 0.32)),
            Line((0.50, 0.32), (0.67, 0.85)),
            Line((0.67, 0.85), (0.85, 0.15)),
        )
    if label == "M":
        return (
            Line((0.15, 0.85), (0.15, 0.15)),
            Line((0.15, 0.15), (0.50, 0.68)),
            Line((0.50, 0.68), (0.85, 0.15)),
            Line((0.85, 0.15), (0.85, 0.85)),
        )
    if label == "Z":
        return (
            Line((0.20, 0.20), (0.80, 0.20)),
            Line((0.80, 0.20), (0.20, 0.80)),
            Line((0.20, 0.80), (0.80, 0.80)),
        )
    if label == "O":
        return (Arc((0.5, 0.5), 0.31, -math.pi / 2, 1.5 * math.pi),)
    if label == "J":
        hook = Arc((0.46, 0.60), 0.16, 0.0, math.pi)
        return (Line((0.62, 0.15), hook.start), hook)
    if label == "S":
        top = Arc((0.5, 0.33), 0.17, -0.49, -1.5 * math.pi)
        bottom = Arc((0.5, 0.67), 0.17, -math.pi / 2, math.pi - 0.49)
        return (top, bottom)
    if label == "3":
        top = Arc((0.46, 0.330), 0.17, -2.30, 1.88)
        # lower bulge center chosen so the arcs join exactly
        v_bot = top.end[1] + 0.17 * math.sin(1.88)
        bottom = Arc((0.46, v_bot), 0.17, -1.88, 2.30)
        return (top, bottom)
    if label == "5":
        belly = Arc((0.47, 0.60), 0.175, -1.918, 2.50)
        return (
            Line((0.66, 0.17), (0.40, 0.17)),
            Line((0.40, 0.17), belly.start),
            belly,
        )
    if label == "?":
        hook = Arc((0.5, 0.33), 0.17, -2.82, 1.22)
        return (hook, Line(hook.end, (0.52, 0.80)))
    raise ValueError(f"unknown gesture label {label!r}")


def path_for_class(gesture) -> GesturePath:
    """Canonical stroke for a gesture class (label string accepted)."""
    if isinstance(gesture, str):
        gesture = GestureClass(gesture)
    return GesturePath(gesture=gesture, segments=_glyph_segments(gesture.label))


@dataclass(frozen=True)
class SubjectProfile:
    """How one simulated subject distorts the canonical strokes.

    Jitter fields are per-trial randomization magnitudes; the bias fields
    are fixed subject-level tendencies so held-out subjects differ
    systematically, not just in noise level.
    """

    seed: int
    scale_jitter: float = 0.08
    offset_jitter: float = 0.05
    speed_profile: float = 1.0
    rotation_jitter: float = 0.06
    c_t_mean: float = 60e-12
    c_t_wobble: float = 0.2
    tremor_noise: float = 0.01
    gain_noise: float = 0.005
    rotation_bias: float = 0.0
    scale_bias: float = 1.0
    offset_bias: tuple = (0.0, 0.0)

    def __post_init__(self):
        for name in ("scale_jitter", "offset_jitter", "rotation_jitter",
                     "c_t_wobble", "tremor_noise", "gain_noise"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.c_t_mean <= 0:
            raise ValueError("c_t_mean must be > 0")
        if self.speed_profile <= 0:
            raise ValueError("speed_profile must be > 0")
        if self.scale_bias <= 0:
            raise ValueError("scale_bias must be > 0")


def _smooth_noise(rng, n: int, std: float) -> np.ndarray:
    """Band-limited positional tremor with the requested std."""
    if std == 0.0 or n == 0:
        return np.zeros(n)
    raw = rng.normal(0.0, 1.0, size=n + 48)
    win = np.hanning(25)
    win /= win.sum()
    sm = np.convolve(raw, win, mode="same")[24:24 + n]
    sd = sm.std()
    if sd == 0.0:
        return np.zeros(n)
    return sm * (std / sd)


def sample_trajectory(path: GesturePath, profile: SubjectProfile,
                      duration: float = 1.0, frame_rate: float = 250.0):
    """Timestamped touch sequence for one trial.

    Deterministic for a fixed profile (all randomness comes from
    profile.seed). Returns a list of (time, TouchPoint) covering
    [0, duration] at the frame rate, with absent touches outside the
    gesture phase.
    """
    if duration <= 0 or frame_rate <= 0:
        raise ValueError("duration and frame_rate must be > 0")
    rng = np.random.default_rng(profile.seed)

    n = int(round(duration * frame_rate))
    if n < 5:
        raise ValueError("capture too short for onset/gesture/offset phases")
    # phase boundaries snapped to the frame grid so the stroke starts and
    # ends exactly on emitted samples
    k_on = int(round(rng.uniform(0.10, 0.20) * n))
    k_hold = int(round(rng.uniform(0.50, 0.70) * n))
    k_on = max(k_on, 1)
    k_off = min(k_on + k_hold, n - 1)
    t_on = k_on / frame_rate
    t_off = k_off / frame_rate

    rot = profile.rotation_bias + rng.normal(0.0, profile.rotation_jitter)
    scale = profile.scale_bias * (1.0 + float(np.clip(rng.normal(0.0, profile.scale_jitter), -0.3, 0.3)))
    offset = np.asarray(profile.offset_bias) + rng.normal(0.0, profile.offset_jitter, size=2)
    pressure = float(np.clip(1.0 + rng.normal(0.0, profile.c_t_wobble / 2), 0.5, 1.5))
    wobble_freq = rng.uniform(0.6, 1.6)
    wobble_phase = rng.uniform(0.0, 2.0 * math.pi)

    times = np.arange(n + 1) / frame_rate
    n_gesture = k_off - k_on + 1
    tremor_u = _smooth_noise(rng, n_gesture, profile.tremor_noise)
    tremor_v = _smooth_noise(rng, n_gesture, profile.tremor_noise)

    cos_r, sin_r = math.cos(rot), math.sin(rot)
    out = []
    g_idx = 0
    for k, t in enumerate(times):
        t = float(t)
        if not (k_on <= k <= k_off):
            out.append((t, TouchPoint.absent()))
            continue
        s = ((k - k_on) / (k_off - k_on)) ** profile.speed_profile
        x, y = path.point(s)
        dx, dy = x - 0.5, y - 0.5
        x = 0.5 + scale * (cos_r * dx - sin_r * dy) + offset[0]
        y = 0.5 + scale * (sin_r * dx + cos_r * dy) + offset[1]
        x += tremor_u[g_idx]
        y += tremor_v[g_idx]
        g_idx += 1
        x = float(np.clip(x, 0.0, 1.0))
        y = float(np.clip(y, 0.0, 1.0))

        # raised-cosine attack/release so the touch lands and lifts
        # smoothly; half-frame shift keeps the boundary frames present
        edge = 1.0
        ramp = 0.04 * duration
        half = 0.5 / frame_rate
        if t - t_on < ramp:
            edge = 0.5 * (1 - math.cos(math.pi * min((t - t_on + half) / (ramp + half), 1.0)))
        elif t_off - t < ramp:
            edge = 0.5 * (1 - math.cos(math.pi * min((t_off - t + half) / (ramp + half), 1.0)))
        wob = 1.0 + profile.c_t_wobble * math.sin(
            2 * math.pi * wobble_freq * (t - t_on) + wobble_phase
        )
        c_t = max(profile.c_t_mean * pressure * wob * edge, 0.0)
        if c_t <= 0.0:
            out.append((t, TouchPoint.absent()))
        else:
            out.append((t, TouchPoint(u=x, v=y, c_t=c_t)))
    return out


@dataclass(frozen=True)
class LabeledSample:
    """One synthetic capture: gains, its sitting's baseline, and metadata."""

    series: GainSeries
    baseline: GainSeries
    gesture: GestureClass
    subject: int
    condition: str = "benchtop"

    def __post_init__(self):
        if self.series.frames.shape[1] != self.baseline.frames.shape[1]:
            raise ValueError("series and baseline channel counts differ")
        if self.condition not in ("benchtop", "worn"):
            raise ValueError("condition must be 'benchtop' or 'worn'")


def _noisy(series: GainSeries, rng, std: float) -> GainSeries:
    if std == 0.0:
        return series
    factor = 1.0 + rng.normal(0.0, std, size=series.frames.shape)
    return GainSeries(frames=series.frames * factor, frame_rate=series.frame_rate)


def synth_dataset(config: MeshConfig, subjects, trials_per_class=20,
                  duration: float = 1.0, frame_rate: float = 250.0):
    """Simulated labeled dataset across subjects, classes, and trials.

    trials_per_class is an int, or one int per subject for uneven
    protocols. Fully deterministic for fixed inputs; each trial draws its
    own child seed from the subject seed.
    """
    subjects = list(subjects)
    if len({p.seed for p in subjects}) != len(subjects):
        raise ValueError("subject seeds must be distinct (they identify subjects)")
    if isinstance(trials_per_class, int):
        trials = [trials_per_class] * len(subjects)
    else:
        trials = [int(t) for t in trials_per_class]
        if len(trials) != len(subjects):
            raise ValueError("need one trials_per_class entry per subject")
    if any(t < 1 for t in trials):
        raise ValueError("trials_per_class must be >= 1")

    condition = "worn" if config.worn_cap_offset > 0 else "benchtop"
    classes = all_classes()
    paths = {g.label: path_for_class(g) for g in classes}
    samples = []
    for profile, n_trials in zip(subjects, trials):
        root = np.random.SeedSequence(profile.seed)
        base_ss, trial_root = root.spawn(2)
        base_rng = np.random.default_rng(base_ss)
        baseline = _noisy(
            simulate_trajectory(config, [(0.0, TouchPoint.absent())],
                                frame_rate=frame_rate, duration=duration),
            base_rng, profile.gain_noise,
        )
        trial_seqs = trial_root.spawn(len(classes) * n_trials)
        k = 0
        for gesture in classes:
            for _ in range(n_trials):
                traj_ss, noise_ss = trial_seqs[k].spawn(2)
                k += 1
                trial_profile = replace(
                    profile, seed=int(traj_ss.generate_state(1)[0])
                )
                traj = sample_trajectory(
                    paths[gesture.label], trial_profile, duration, frame_rate
                )
                series = simulate_trajectory(
                    config, traj, frame_rate=frame_rate, duration=duration
                )
                series = _noisy(series, np.random.default_rng(noise_ss),
                                profile.gain_noise)
                samples.append(LabeledSample(
                    series=series, baseline=baseline, gesture=gesture,
                    subject=profile.seed, condition=condition,
                ))
    return samples


def default_profiles(n_subjects: int, base_seed: int = 0) -> tuple:
    """Plausible population of subjects with distinct tendencies."""
    if n_subjects < 1:
        raise ValueError("n_subjects must be >= 1")
    meta = np.random.default_rng(base_seed)
    profiles = []
    for i in range(n_subjects):
        profiles.append(SubjectProfile(
            seed=int(base_seed * 1000 + 101 + i),
            scale_jitter=float(meta.uniform(0.04, 0.08)),
            offset_jitter=float(meta.uniform(0.025, 0.05)),
            speed_profile=float(meta.uniform(0.85, 1.20)),
            rotation_jitter=float(meta.uniform(0.03, 0.07)),
            c_t_mean=float(meta.uniform(52e-12, 68e-12)),
            c_t_wobble=float(meta.uniform(0.12, 0.20)),
            tremor_noise=float(meta.uniform(0.005, 0.011)),
            gain_noise=float(meta.uniform(0.002, 0.005)),
            rotation_bias=float(meta.normal(0.0, 0.05)),
            scale_bias=float(np.clip(1.0 + meta.normal(0.0, 0.045), 0.7, 1.3)),
            offset_bias=tuple(meta.normal(0.0, 0.025, size=2)),
        ))
    return tuple(profiles)
