"""knitpad command line: dataset synthesis, training, evaluation,
classification, wash/dry analysis, benchmarking, and the service."""

import argparse
import csv
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io as kio
from . import nn
from .bench import bench_latency
from .evaluate import (
    dataset_arrays,
    evaluate_holdout,
    evaluate_worn,
    format_fold_table,
    format_metrics_table,
    oversample_balance,
    run_loso_cv,
    write_confusion_csv,
)
from .gestures import CLASS_LABELS, default_profiles, path_for_class, sample_trajectory, synth_dataset
from .mesh import MeshConfig, simulate_trajectory
from .pipeline import FilterSpec, GainSeries
from .service import (
    ClassifyError,
    GestureClassifier,
    PointerSample,
    build_app,
    no_touch_gains,
    trajectory_gain_series,
)


def _mesh_from_args(args) -> MeshConfig:
    config = kio.read_mesh_config(args.mesh) if getattr(args, "mesh", None) else MeshConfig()
    offset = getattr(args, "worn_offset", None)
    if offset:
        config = dataclasses.replace(config, worn_cap_offset=offset)
    return config


def _filter_from_args(args) -> FilterSpec:
    return FilterSpec(kept_levels=args.kept_levels,
                      decomposition_depth=args.depth)


def _add_filter_flags(p):
    p.add_argument("--kept-levels", type=int, default=4,
                   help="coarsest detail bands kept by the wavelet filter")
    p.add_argument("--depth", type=int, default=5,
                   help="wavelet decomposition depth")


def _add_train_flags(p):
    p.add_argument("--variant", choices=("cnn_lstm", "lstm_only"),
                   default="cnn_lstm")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--dropout", type=float, default=0.6)
    p.add_argument("--seed", type=int, default=0)
    _add_filter_flags(p)


def _read_trajectory_csv(path) -> list:
    """Pointer events from CSV: header t,u,v plus optional down, c_t."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:3] != ["t", "u", "v"]:
            raise ValueError(f"{path}: expected header t,u,v[,down][,c_t]")
        extras = header[3:]
        if any(col not in ("down", "c_t") for col in extras):
            raise ValueError(f"{path}: unknown trajectory columns {extras}")
        events = []
        for line in reader:
            if not line:
                continue
            if len(line) != len(header):
                raise ValueError(f"{path}: row with {len(line)} fields")
            fields = dict(zip(header, line))
            events.append(PointerSample(
                t=float(fields["t"]),
                u=float(fields["u"]),
                v=float(fields["v"]),
                down=fields.get("down", "1").strip() not in ("0", "false", "False"),
                c_t=float(fields["c_t"]) if fields.get("c_t") else None,
            ))
    if not events:
        raise ValueError(f"{path}: no events")
    return events


def _model_spec_for(args, seq_len: int) -> nn.ModelSpec:
    return nn.ModelSpec(variant=args.variant, seq_len=seq_len,
                        dropout_p=args.dropout)


def _train_config(args) -> nn.TrainConfig:
    return nn.TrainConfig(lr=args.lr, dropout=args.dropout,
                          batch_size=args.batch_size, epochs=args.epochs,
                          seed=args.seed)


# ---------------------------------------------------------------- subcommands


def cmd_gen_dataset(args) -> int:
    config = _mesh_from_args(args)
    profiles = default_profiles(args.subjects, base_seed=args.seed)
    samples = synth_dataset(config, profiles, trials_per_class=args.trials,
                            duration=args.duration, frame_rate=args.frame_rate)
    manifest = kio.write_dataset(samples, args.out, config=config)
    subjects = sorted({s.subject for s in samples})
    condition = samples[0].condition
    print(f"wrote {len(samples)} samples ({condition}) for subjects "
          f"{subjects} to {args.out}")
    print(f"manifest: {manifest}")
    return 0


def cmd_train(args) -> int:
    samples = kio.read_dataset(args.data)
    subjects = sorted({s.subject for s in samples})
    val_subject = args.val_subject if args.val_subject is not None else subjects[-1]
    if val_subject not in subjects:
        raise ValueError(f"validation subject {val_subject} not in dataset {subjects}")
    train_samples = [s for s in samples if s.subject != val_subject]
    val_samples = [s for s in samples if s.subject == val_subject]
    if not train_samples:
        raise ValueError("no training samples left after the validation split")
    train_samples = oversample_balance(train_samples, seed=args.seed)
    filter_spec = _filter_from_args(args)
    train_x, train_y, _ = dataset_arrays(train_samples, filter_spec)
    val_x, val_y, _ = dataset_arrays(val_samples, filter_spec)
    spec = _model_spec_for(args, seq_len=train_x.shape[1])
    params, trace = nn.train(train_x, train_y, spec, _train_config(args),
                             val_x, val_y, verbose=args.verbose)
    nn.save_model(params, args.out)
    print(f"trained {spec.variant} on subjects "
          f"{[s for s in subjects if s != val_subject]} "
          f"(validation subject {val_subject})")
    print(f"final validation accuracy: {trace[-1].val_accuracy:.4f}")
    print(f"model written to {args.out}")
    return 0


def cmd_cv(args) -> int:
    samples = kio.read_dataset(args.data)
    filter_spec = _filter_from_args(args)
    probe_x, _, _ = dataset_arrays(samples[:1], filter_spec)
    spec = _model_spec_for(args, seq_len=probe_x.shape[1])
    result = run_loso_cv(samples, spec, _train_config(args),
                         filter_spec=filter_spec, verbose=args.verbose)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    folds_meta = []
    for fold in result.folds:
        model_path = out / f"fold{fold.plan.fold_index}.bin"
        nn.save_model(fold.params, model_path)
        folds_meta.append({
            "fold_index": fold.plan.fold_index,
            "validation_subject": fold.plan.validation_subject,
            "train_subjects": list(fold.plan.train_subjects),
            "accuracy": fold.accuracy,
        })
    (out / "folds.json").write_text(json.dumps({
        "variant": spec.variant,
        "mean_accuracy": result.mean_accuracy,
        "folds": folds_meta,
    }, indent=2) + "\n", encoding="utf-8")
    table = format_fold_table(result)
    (out / "report.txt").write_text(table + "\n", encoding="utf-8")
    n_train = len(oversample_balance(
        [s for s in samples if s.subject != result.folds[0].plan.validation_subject],
        seed=args.seed))
    print(table)
    print(f"fold 0 training size after oversampling: {n_train} "
          f"(~{n_train / len(CLASS_LABELS):.0f} per class)")
    print(f"models and report written to {out}")
    return 0


def _load_fold_models(models_dir):
    out = Path(models_dir)
    paths = sorted(out.glob("fold*.bin"))
    if not paths:
        raise ValueError(f"no fold*.bin models under {models_dir}")
    models = [nn.load_model(p) for p in paths]
    train_subjects = set()
    meta_path = out / "folds.json"
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        for fold in meta.get("folds", []):
            train_subjects.update(fold.get("train_subjects", []))
            train_subjects.add(fold.get("validation_subject"))
        train_subjects.discard(None)
    return models, train_subjects


def cmd_eval(args) -> int:
    models, train_subjects = _load_fold_models(args.models_dir)
    samples = kio.read_dataset(args.data)
    filter_spec = _filter_from_args(args)
    if args.worn:
        result = evaluate_worn(models, samples, filter_spec=filter_spec)
        name = "worn"
    else:
        result = evaluate_holdout(models, samples, filter_spec=filter_spec,
                                  train_subjects=train_subjects)
        name = "holdout"
    print(format_metrics_table({name: result.metrics}))
    print(f"mean model x subject accuracy: {result.mean_accuracy:.4f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_confusion_csv(result.confusion, out / f"confusion_{name}.csv")
        (out / f"metrics_{name}.json").write_text(json.dumps({
            "accuracy": result.metrics.accuracy,
            "macro_precision": result.metrics.macro_precision,
            "macro_recall": result.metrics.macro_recall,
            "macro_f1": result.metrics.macro_f1,
            "mean_model_subject_accuracy": result.mean_accuracy,
        }, indent=2) + "\n", encoding="utf-8")
        print(f"confusion matrix and metrics written to {out}")
    return 0


def cmd_classify(args) -> int:
    params = nn.load_model(args.model)
    classifier = GestureClassifier(params, _mesh_from_args(args),
                                   _filter_from_args(args))
    if args.sample:
        series = kio.read_sample_csv(args.sample)
        baseline = kio.read_sample_csv(args.baseline) if args.baseline else None
        result = classifier.classify_series(series, baseline=baseline)
    else:
        events = _read_trajectory_csv(args.trajectory)
        result, _ = classifier.classify_trajectory(events)
    print(f"predicted: {result.predicted.label}")
    print("log_probs:")
    for label, lp in zip(CLASS_LABELS, result.log_probs):
        print(f"  {label}: {lp:+.4f}")
    print(f"latency: preprocess {result.preprocess_seconds * 1e3:.2f} ms, "
          f"inference {result.inference_seconds * 1e3:.2f} ms, "
          f"total {result.total_seconds * 1e3:.2f} ms")
    if args.json:
        Path(args.json).write_text(json.dumps(result.to_json(), indent=2) + "\n",
                                   encoding="utf-8")
    return 0


def cmd_bench(args) -> int:
    report = bench_latency(args.model, trials=args.trials,
                           mesh_config=_mesh_from_args(args),
                           filter_spec=_filter_from_args(args), seed=args.seed)
    print(f"trials: {report.n_trials}")
    print(f"first trial (bootstrap): {report.first_trial * 1e3:.2f} ms")
    print(f"steady mean: {report.steady_mean * 1e3:.2f} ms")
    print(f"steady p95: {report.steady_p95 * 1e3:.2f} ms")
    if args.json:
        Path(args.json).write_text(json.dumps(report.to_json(), indent=2) + "\n",
                                   encoding="utf-8")
    return 0


def cmd_washdry(args) -> int:
    from .resistance import PAIR_KEYS, percent_delta_r
    record = kio.read_washdry_csv(args.record)
    cycles = [args.cycle] if args.cycle else list(range(1, record.n_cycles + 1))
    payload = {}
    for cycle in cycles:
        per_pair, cumulative = percent_delta_r(record, cycle)
        print(f"cycle {cycle}:")
        for key in PAIR_KEYS:
            print(f"  {key}: {per_pair[key] * 100:+.2f}%")
        print(f"  cumulative (mean of pairs): {cumulative * 100:+.2f}%")
        payload[str(cycle)] = {"per_pair": per_pair, "cumulative": cumulative}
    if args.json:
        Path(args.json).write_text(json.dumps(payload, indent=2) + "\n",
                                   encoding="utf-8")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    host, port = args.host, args.port
    bind = os.environ.get("KNITPAD_BIND")
    if bind:
        host, _, port_text = bind.rpartition(":")
        if not host or not port_text.isdigit():
            raise ValueError(f"KNITPAD_BIND must be host:port, got {bind!r}")
        port = int(port_text)
    app = build_app(model_path=args.model, mesh_config=_mesh_from_args(args),
                    filter_spec=_filter_from_args(args))
    print(f"serving on {host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def cmd_simulate(args) -> int:
    config = _mesh_from_args(args)
    n_frames = int(round(args.duration * args.frame_rate))
    if args.trajectory:
        events = _read_trajectory_csv(args.trajectory)
        series = trajectory_gain_series(config, events, n_frames=n_frames)
    elif args.jitter_seed is not None:
        profile = default_profiles(1, base_seed=args.jitter_seed)[0]
        trajectory = sample_trajectory(path_for_class(args.gesture), profile,
                                       duration=args.duration,
                                       frame_rate=args.frame_rate)
        series = simulate_trajectory(config, trajectory,
                                     frame_rate=args.frame_rate,
                                     duration=args.duration)
    else:
        path = path_for_class(args.gesture)
        events = []
        for k in range(args.points):
            s = k / (args.points - 1)
            u, v = path.point(s)
            events.append(PointerSample(t=s, u=float(u), v=float(v)))
        series = trajectory_gain_series(config, events, n_frames=n_frames)
    kio.write_sample_csv(series, args.out)
    print(f"wrote {series.n_frames} frames to {args.out}")
    if args.baseline_out:
        base = np.tile(np.array(no_touch_gains(config)), (series.n_frames, 1))
        kio.write_sample_csv(GainSeries(frames=base, frame_rate=series.frame_rate),
                             args.baseline_out)
        print(f"wrote no-touch baseline to {args.baseline_out}")
    return 0


# --------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="knitpad",
        description="software twin of a knitted capacitive gesture touchpad")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-dataset", help="synthesize a labeled gesture dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--subjects", type=int, default=5)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--frame-rate", type=float, default=250.0)
    p.add_argument("--worn-offset", type=float, default=0.0,
                   help="extra corner capacitance in farads; >0 marks the set worn")
    p.add_argument("--mesh", help="mesh config INI to use instead of defaults")
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("train", help="train one model with a held-out subject")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--val-subject", type=int)
    p.add_argument("--verbose", action="store_true")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("cv", help="leave-one-subject-out cross-validation")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="output directory for fold models")
    p.add_argument("--verbose", action="store_true")
    _add_train_flags(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("eval", help="evaluate fold models on held-out subjects")
    p.add_argument("--models-dir", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", help="directory for confusion matrix + metrics")
    p.add_argument("--worn", action="store_true",
                   help="expect a worn-condition dataset")
    _add_filter_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("classify", help="classify one capture or trajectory")
    p.add_argument("--model", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--sample", help="gain CSV capture")
    group.add_argument("--trajectory", help="trajectory CSV (t,u,v[,down][,c_t])")
    p.add_argument("--baseline", help="baseline CSV (gain samples only)")
    p.add_argument("--json", help="also write the response as JSON")
    p.add_argument("--mesh")
    p.add_argument("--worn-offset", type=float, default=0.0)
    _add_filter_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("bench", help="latency benchmark")
    p.add_argument("--model", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json")
    p.add_argument("--mesh")
    _add_filter_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("washdry", help="percent resistance change per cycle")
    p.add_argument("--record", required=True, help="wash/dry resistance CSV")
    p.add_argument("--cycle", type=int)
    p.add_argument("--json")
    p.set_defaults(func=cmd_washdry)

    p = sub.add_parser("serve", help="run the classification service")
    p.add_argument("--model", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--mesh")
    _add_filter_flags(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("simulate", help="synthesize a gain capture")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--gesture", choices=list(CLASS_LABELS))
    group.add_argument("--trajectory", help="trajectory CSV to replay")
    p.add_argument("--out", required=True)
    p.add_argument("--baseline-out")
    p.add_argument("--jitter-seed", type=int,
                   help="apply subject-style jitter with this seed")
    p.add_argument("--points", type=int, default=120,
                   help="pointer samples along the canonical path")
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--frame-rate", type=float, default=250.0)
    p.add_argument("--worn-offset", type=float, default=0.0)
    p.add_argument("--mesh")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError, ClassifyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
