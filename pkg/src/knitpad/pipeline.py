"""Signal path from raw capture windows to model-ready gain series.

Three stages: Bode gain extraction from raw excitation/response windows,
per-channel baseline subtraction, and sym4 wavelet band filtering. The
trained models consume the result as a (frames, 4) float matrix.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import wavelet

CHANNELS = ("A", "B", "C", "D")


class PipelineError(RuntimeError):
    """Numeric failure inside the signal path (not an input-shape problem)."""


@dataclass(frozen=True)
class RawWindow:
    """One frame of raw drive and corner-response samples.

    input_samples: (n,) drive waveform in volts.
    output_samples: (4, n) corner responses, channel order A,B,C,D.
    """

    input_samples: np.ndarray
    output_samples: np.ndarray
    sample_rate: float
    drive_frequency: float

    def __post_init__(self):
        inp = np.asarray(self.input_samples, dtype=float)
        out = np.asarray(self.output_samples, dtype=float)
        if inp.ndim != 1 or out.ndim != 2 or out.shape[0] != 4:
            raise ValueError("expected input (n,) and outputs (4, n)")
        if out.shape[1] != inp.shape[0]:
            raise ValueError("input and output windows differ in length")
        if not (np.all(np.isfinite(inp)) and np.all(np.isfinite(out))):
            raise ValueError("raw samples must be finite")
        if self.sample_rate <= 2.0 * self.drive_frequency:
            raise ValueError("sample_rate must exceed twice the drive frequency")
        if self.drive_frequency <= 0:
            raise ValueError("drive_frequency must be > 0")
        object.__setattr__(self, "input_samples", inp)
        object.__setattr__(self, "output_samples", out)


@dataclass(frozen=True, eq=False)
class GainSeries:
    """Time series of per-corner gains, channel order A,B,C,D."""

    frames: np.ndarray
    frame_rate: float = 250.0

    def __eq__(self, other):
        if not isinstance(other, GainSeries):
            return NotImplemented
        return (self.frame_rate == other.frame_rate
                and np.array_equal(self.frames, other.frames))

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=float)
        if frames.ndim != 2 or frames.shape[1] != 4:
            raise ValueError(f"frames must be (n, 4), got {frames.shape}")
        if frames.shape[0] < 1:
            raise ValueError("series needs at least one frame")
        if not np.all(np.isfinite(frames)):
            raise ValueError("gain entries must be finite")
        if self.frame_rate <= 0:
            raise ValueError("frame_rate must be > 0")
        frames = frames.copy()
        frames.flags.writeable = False
        object.__setattr__(self, "frames", frames)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    def channel(self, name: str) -> np.ndarray:
        return self.frames[:, CHANNELS.index(name)]


@dataclass(frozen=True)
class FilterSpec:
    """Wavelet band-filter settings.

    kept_levels counts the coarsest detail bands retained alongside the
    (always kept) approximation band; kept_levels equal to the
    decomposition depth keeps every band.
    """

    wavelet: str = "sym4"
    kept_levels: int = 4
    decomposition_depth: int = 5

    def __post_init__(self):
        if self.wavelet != "sym4":
            raise ValueError(f"unsupported wavelet {self.wavelet!r}")
        if self.decomposition_depth < 1:
            raise ValueError("decomposition_depth must be >= 1")
        if not (0 <= self.kept_levels <= self.decomposition_depth):
            raise ValueError("kept_levels must be in [0, decomposition_depth]")


def window_gain(window: RawWindow) -> np.ndarray:
    """Bode gains |Out(f_drive)| / |In(f_drive)| for the four channels.

    Magnitudes are taken at the DFT bin nearest the drive frequency, so the
    result is blind to phase shifts between drive and response.
    """
    n = window.input_samples.shape[0]
    bin_idx = int(round(window.drive_frequency * n / window.sample_rate))
    bin_idx = min(bin_idx, n // 2)
    in_mag = abs(np.fft.rfft(window.input_samples)[bin_idx])
    out_mag = np.abs(np.fft.rfft(window.output_samples, axis=1)[:, bin_idx])
    if in_mag <= 0.0 or not math.isfinite(in_mag):
        raise PipelineError("drive spectrum is empty at the excitation bin")
    return out_mag / in_mag


def subtract_baseline(series: GainSeries, baseline: GainSeries) -> GainSeries:
    """Remove the steady no-touch level, per channel.

    The baseline recording is reduced to its per-channel mean before
    subtraction, so baseline length need not match the series.
    """
    level = baseline.frames.mean(axis=0)
    return GainSeries(frames=series.frames - level[None, :], frame_rate=series.frame_rate)


def wavelet_filter(series: GainSeries, spec: FilterSpec = FilterSpec()) -> GainSeries:
    """Band-limit each channel with the sym4 transform.

    Decomposes to spec.decomposition_depth, zeroes every detail band finer
    than the spec.kept_levels coarsest, reconstructs. Output length equals
    input length.
    """
    n = series.n_frames
    max_d = wavelet.max_depth(n)
    if spec.decomposition_depth > max_d:
        raise ValueError(
            f"depth {spec.decomposition_depth} infeasible for {n} frames (max {max_d})"
        )
    out = np.empty_like(series.frames)
    for ch in range(4):
        coeffs, lengths = wavelet.wavedec(series.frames[:, ch], spec.decomposition_depth)
        # coeffs = [cA_d, cD_d, ..., cD_1]; keep approximation + coarsest details
        for k in range(1 + spec.kept_levels, len(coeffs)):
            coeffs[k] = np.zeros_like(coeffs[k])
        out[:, ch] = wavelet.waverec(coeffs, lengths)
    return GainSeries(frames=out, frame_rate=series.frame_rate)


def preprocess(sample, spec: FilterSpec = FilterSpec()) -> np.ndarray:
    """Baseline-subtract then wavelet-filter one labeled sample.

    Returns the (n_frames, 4) float matrix the classifiers train on.
    """
    flat = subtract_baseline(sample.series, sample.baseline)
    return wavelet_filter(flat, spec).frames.copy()
