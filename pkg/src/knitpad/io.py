"""File formats: sample CSV, dataset manifests, mesh config, wash/dry CSV.

The sample CSV contract is bit-exact: header `t,gain_A,gain_B,gain_C,gain_D`,
one row per frame, shortest round-tripping decimal floats, UTF-8, LF line
endings. Timestamps are frame start times k / frame_rate.
"""

import configparser
import csv
import os

import numpy as np

from .gestures import GestureClass, LabeledSample
from .mesh import MeshConfig
from .pipeline import GainSeries
from .resistance import PAIR_KEYS, PairwiseResistance, WashDryRecord

SAMPLE_HEADER = ["t", "gain_A", "gain_B", "gain_C", "gain_D"]
WASHDRY_HEADER = ["cycle"] + [f"R_{k}" for k in PAIR_KEYS]


def write_sample_csv(series: GainSeries, path: str) -> None:
    rows = [",".join(SAMPLE_HEADER)]
    for k in range(series.n_frames):
        t = k / series.frame_rate
        vals = [repr(float(v)) for v in series.frames[k]]
        rows.append(",".join([repr(float(t))] + vals))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")


def read_sample_stream(fh, origin: str = "sample") -> GainSeries:
    """Parse the sample CSV format from any text stream."""
    reader = csv.reader(fh)
    header = next(reader, None)
    if header != SAMPLE_HEADER:
        raise ValueError(f"{origin}: expected header {','.join(SAMPLE_HEADER)}")
    times, rows = [], []
    for line in reader:
        if not line:
            continue
        if len(line) != 5:
            raise ValueError(f"{origin}: row with {len(line)} fields")
        times.append(float(line[0]))
        rows.append([float(x) for x in line[1:]])
    if not rows:
        raise ValueError(f"{origin}: no data rows")
    if len(times) > 1:
        dt = np.diff(times)
        if np.any(dt <= 0):
            raise ValueError(f"{origin}: non-increasing timestamps")
        frame_rate = 1.0 / float(np.mean(dt))
    else:
        frame_rate = 250.0
    return GainSeries(frames=np.array(rows), frame_rate=frame_rate)


def read_sample_csv(path: str) -> GainSeries:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return read_sample_stream(fh, origin=str(path))


def write_mesh_config(config: MeshConfig, path: str) -> None:
    cp = configparser.ConfigParser()
    cp["mesh"] = {
        "rows": str(config.rows),
        "cols": str(config.cols),
        "sheet_resistance": repr(config.sheet_resistance),
        "corner_resistors": ",".join(repr(float(v)) for v in config.corner_resistors),
        "parasitic_caps": ",".join(repr(float(v)) for v in config.parasitic_caps),
        "drive_frequency": repr(config.drive_frequency),
        "drive_amplitude": repr(config.drive_amplitude),
        "worn_cap_offset": repr(config.worn_cap_offset),
    }
    with open(path, "w", encoding="utf-8") as fh:
        cp.write(fh)


def read_mesh_config(path: str) -> MeshConfig:
    cp = configparser.ConfigParser()
    if not cp.read(path, encoding="utf-8"):
        raise ValueError(f"cannot read mesh config {path}")
    if "mesh" not in cp:
        raise ValueError(f"{path}: missing [mesh] section")
    sec = cp["mesh"]
    try:
        return MeshConfig(
            rows=sec.getint("rows", 32),
            cols=sec.getint("cols", 32),
            sheet_resistance=sec.getfloat("sheet_resistance", 4000.0),
            corner_resistors=tuple(
                float(v) for v in sec.get("corner_resistors", "4000,4000,4000,4000").split(",")
            ),
            parasitic_caps=tuple(
                float(v) for v in sec.get("parasitic_caps", "6e-11,6e-11,6e-11,6e-11").split(",")
            ),
            drive_frequency=sec.getfloat("drive_frequency", 2e6),
            drive_amplitude=sec.getfloat("drive_amplitude", 1.0),
            worn_cap_offset=sec.getfloat("worn_cap_offset", 0.0),
        )
    except (ValueError, TypeError) as exc:
        raise ValueError(f"{path}: bad mesh config: {exc}") from exc


def write_washdry_csv(record: WashDryRecord, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(WASHDRY_HEADER) + "\n")
        def row(label, pairs):
            return ",".join([label] + [repr(pairs[k]) for k in PAIR_KEYS])
        fh.write(row("0", record.baseline) + "\n")
        for n, pairs in enumerate(record.after_cycle, start=1):
            fh.write(row(str(n), pairs) + "\n")


def read_washdry_csv(path: str) -> WashDryRecord:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != WASHDRY_HEADER:
            raise ValueError(f"{path}: expected header {','.join(WASHDRY_HEADER)}")
        rows = {}
        for line in reader:
            if not line:
                continue
            if len(line) != 7:
                raise ValueError(f"{path}: row with {len(line)} fields")
            rows[int(line[0])] = PairwiseResistance(
                values=dict(zip(PAIR_KEYS, (float(v) for v in line[1:])))
            )
    if 0 not in rows:
        raise ValueError(f"{path}: missing baseline row (cycle 0)")
    cycles = sorted(k for k in rows if k > 0)
    if cycles != list(range(1, len(cycles) + 1)):
        raise ValueError(f"{path}: cycle numbers must be 1..N, got {cycles}")
    return WashDryRecord(
        baseline=rows[0], after_cycle=tuple(rows[n] for n in cycles)
    )


MANIFEST_HEADER = ["path", "baseline", "subject", "class", "condition", "seed"]


def write_dataset(samples, out_dir: str, config: MeshConfig = None) -> str:
    """Write samples as CSV files plus a manifest; returns the manifest path.

    Baselines are deduplicated per (subject, condition) sitting.
    """
    if not samples:
        raise ValueError("no samples to write")
    os.makedirs(out_dir, exist_ok=True)
    os.makedirs(os.path.join(out_dir, "samples"), exist_ok=True)
    os.makedirs(os.path.join(out_dir, "baselines"), exist_ok=True)
    if config is not None:
        write_mesh_config(config, os.path.join(out_dir, "mesh.ini"))

    manifest_path = os.path.join(out_dir, "manifest.csv")
    baseline_paths = {}
    counters = {}
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(MANIFEST_HEADER) + "\n")
        for s in samples:
            bkey = (s.subject, s.condition)
            if bkey not in baseline_paths:
                rel = f"baselines/s{s.subject}_{s.condition}.csv"
                write_sample_csv(s.baseline, os.path.join(out_dir, rel))
                baseline_paths[bkey] = rel
            ckey = (s.subject, s.gesture.index, s.condition)
            trial = counters.get(ckey, 0)
            counters[ckey] = trial + 1
            rel = f"samples/s{s.subject}_c{s.gesture.index:02d}_{s.condition}_t{trial:03d}.csv"
            write_sample_csv(s.series, os.path.join(out_dir, rel))
            fh.write(",".join([
                rel, baseline_paths[bkey], str(s.subject), s.gesture.label,
                s.condition, str(s.subject),
            ]) + "\n")
    return manifest_path


def read_dataset(dataset_dir: str):
    """Load a dataset directory written by write_dataset."""
    manifest_path = os.path.join(dataset_dir, "manifest.csv")
    if not os.path.exists(manifest_path):
        raise ValueError(f"no manifest.csv under {dataset_dir}")
    samples = []
    baselines = {}
    with open(manifest_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != MANIFEST_HEADER:
            raise ValueError(f"{manifest_path}: unexpected manifest header")
        for line in reader:
            if not line:
                continue
            rel, brel, subject, label, condition, _seed = line
            if brel not in baselines:
                baselines[brel] = read_sample_csv(os.path.join(dataset_dir, brel))
            samples.append(LabeledSample(
                series=read_sample_csv(os.path.join(dataset_dir, rel)),
                baseline=baselines[brel],
                gesture=GestureClass(label),
                subject=int(subject),
                condition=condition,
            ))
    if not samples:
        raise ValueError(f"{manifest_path}: empty dataset")
    return samples
