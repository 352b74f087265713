"""Evaluation protocol: oversampling, LOSO cross-validation, held-out
subject evaluation, metrics, and the worn-condition study.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import nn
from .gestures import CLASS_LABELS
from .pipeline import FilterSpec, preprocess

N_CLASSES = len(CLASS_LABELS)


class EvaluationError(RuntimeError):
    """Raised when a dataset violates the evaluation protocol."""


@dataclass(frozen=True)
class FoldPlan:
    train_subjects: tuple
    validation_subject: int
    fold_index: int

    def __post_init__(self):
        if self.validation_subject in self.train_subjects:
            raise ValueError("validation subject appears in the training list")
        if not (0 <= self.fold_index <= 4):
            raise ValueError("fold_index must be in 0..4")


@dataclass(frozen=True)
class ConfusionMatrix:
    """12x12 counts; rows are true classes, columns are predictions."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.shape != (N_CLASSES, N_CLASSES):
            raise ValueError(f"confusion matrix must be {N_CLASSES}x{N_CLASSES}")
        if not np.issubdtype(counts.dtype, np.integer):
            raise ValueError("counts must be integers")
        if (counts < 0).any():
            raise ValueError("counts must be non-negative")
        counts = counts.copy()
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float

    def __post_init__(self):
        for name in ("accuracy", "macro_precision", "macro_recall", "macro_f1"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must be a fraction in [0, 1]")


@dataclass
class FoldResult:
    plan: FoldPlan
    params: nn.ModelParams
    accuracy: float
    trace: list


@dataclass
class LosoResult:
    folds: list
    mean_accuracy: float

    @property
    def models(self):
        return [f.params for f in self.folds]

    def train_subjects(self) -> set:
        out = set()
        for f in self.folds:
            out.update(f.plan.train_subjects)
            out.add(f.plan.validation_subject)
        return out


@dataclass
class HoldoutResult:
    metrics: Metrics
    confusion: ConfusionMatrix
    per_pair: dict  # (fold_index, subject) -> accuracy
    mean_accuracy: float


def confusion_from_predictions(true_labels, predicted) -> ConfusionMatrix:
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(counts, (np.asarray(true_labels), np.asarray(predicted)), 1)
    return ConfusionMatrix(counts)


def compute_metrics(confusion: ConfusionMatrix) -> Metrics:
    """Macro-averaged precision/recall/F1 plus plain accuracy.

    Classes with a zero denominator score 0 for that term.
    """
    counts = confusion.counts.astype(np.float64)
    total = counts.sum()
    if total == 0:
        raise EvaluationError("confusion matrix is empty")
    tp = np.diag(counts)
    predicted = counts.sum(axis=0)
    actual = counts.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(actual > 0, tp / actual, 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2.0 * precision * recall / denom, 0.0)
    return Metrics(
        accuracy=float(tp.sum() / total),
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
    )


def _by_subject(samples) -> dict:
    groups = {}
    for sample in samples:
        groups.setdefault(sample.subject, []).append(sample)
    return groups


def oversample_balance(samples, seed: int = 0) -> list:
    """Duplicate minority-class samples within each subject until every
    class matches that subject's max class count. Original samples keep
    their order; duplicates are appended.
    """
    if not samples:
        raise EvaluationError("cannot balance an empty dataset")
    rng = np.random.default_rng(seed)
    out = list(samples)
    for subject in sorted(_by_subject(samples)):
        per_class = {}
        for sample in samples:
            if sample.subject == subject:
                per_class.setdefault(sample.gesture.index, []).append(sample)
        missing = sorted(set(range(N_CLASSES)) - set(per_class))
        if missing:
            labels = ", ".join(CLASS_LABELS[i] for i in missing)
            raise EvaluationError(
                f"subject {subject} has no samples for class(es) {labels}")
        target = max(len(v) for v in per_class.values())
        for cls in sorted(per_class):
            pool = per_class[cls]
            deficit = target - len(pool)
            if deficit > 0:
                picks = rng.integers(0, len(pool), size=deficit)
                out.extend(pool[i] for i in picks)
    return out


def dataset_arrays(samples, filter_spec: FilterSpec = FilterSpec()):
    """Preprocess a sample list into (features, labels, subjects) arrays."""
    x = np.stack([preprocess(s, filter_spec) for s in samples]).astype(np.float32)
    y = np.array([s.gesture.index for s in samples], dtype=np.int64)
    subjects = np.array([s.subject for s in samples], dtype=np.int64)
    return x, y, subjects


def make_fold_plans(subjects) -> list:
    ordered = sorted(set(subjects))
    if len(ordered) != 5:
        raise EvaluationError(f"LOSO protocol needs exactly 5 subjects, got {len(ordered)}")
    return [
        FoldPlan(
            train_subjects=tuple(s for s in ordered if s != val),
            validation_subject=val,
            fold_index=i,
        )
        for i, val in enumerate(ordered)
    ]


def run_loso_cv(samples, spec: nn.ModelSpec, config: nn.TrainConfig,
                filter_spec: FilterSpec = FilterSpec(),
                verbose: bool = False) -> LosoResult:
    """Leave-one-subject-out cross-validation over exactly 5 subjects.

    Each fold trains on 4 subjects (oversampled within subject) and
    validates on the fifth. The fold accuracy is the mean validation
    accuracy over the last 50 epochs (or all of them when fewer).
    """
    plans = make_fold_plans(s.subject for s in samples)
    fold_seeds = np.random.SeedSequence(config.seed).spawn(len(plans))
    folds = []
    for plan, seed_seq in zip(plans, fold_seeds):
        fold_seed = int(seed_seq.generate_state(1)[0])
        train_samples = [s for s in samples if s.subject != plan.validation_subject]
        val_samples = [s for s in samples if s.subject == plan.validation_subject]
        train_samples = oversample_balance(train_samples, seed=fold_seed)
        train_x, train_y, train_subjects = dataset_arrays(train_samples, filter_spec)
        assert plan.validation_subject not in train_subjects
        val_x, val_y, _ = dataset_arrays(val_samples, filter_spec)
        fold_config = dataclasses.replace(config, seed=fold_seed)
        params, trace = nn.train(train_x, train_y, spec, fold_config,
                                 val_x, val_y, verbose=verbose)
        tail = trace[-min(50, len(trace)):]
        accuracy = float(np.mean([r.val_accuracy for r in tail]))
        if verbose:
            print(f"fold {plan.fold_index} (validate subject "
                  f"{plan.validation_subject}): accuracy {accuracy:.3f}")
        folds.append(FoldResult(plan=plan, params=params,
                                accuracy=accuracy, trace=trace))
    mean = float(np.mean([f.accuracy for f in folds]))
    return LosoResult(folds=folds, mean_accuracy=mean)


def _pooled_evaluation(models, samples, filter_spec) -> HoldoutResult:
    x, y, subjects = dataset_arrays(samples, filter_spec)
    per_pair = {}
    pooled = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for fold_index, params in enumerate(models):
        predicted = nn.predict(params, x)
        np.add.at(pooled, (y, predicted), 1)
        for subject in sorted(set(subjects.tolist())):
            mask = subjects == subject
            per_pair[(fold_index, subject)] = float(
                (predicted[mask] == y[mask]).mean())
    confusion = ConfusionMatrix(pooled)
    metrics = compute_metrics(confusion)
    mean_accuracy = float(np.mean(list(per_pair.values())))
    return HoldoutResult(metrics=metrics, confusion=confusion,
                         per_pair=per_pair, mean_accuracy=mean_accuracy)


def evaluate_holdout(models, samples, filter_spec: FilterSpec = FilterSpec(),
                     train_subjects=()) -> HoldoutResult:
    """Score held-out subjects against every fold model.

    Accuracy is the mean over the model x subject grid; the confusion
    matrix pools all of those evaluations.
    """
    if not samples:
        raise EvaluationError("empty evaluation set")
    eval_subjects = {s.subject for s in samples}
    overlap = eval_subjects & set(train_subjects)
    if overlap:
        raise EvaluationError(
            f"evaluation subjects {sorted(overlap)} overlap the training subjects")
    return _pooled_evaluation(models, samples, filter_spec)


def evaluate_worn(models, samples,
                  filter_spec: FilterSpec = FilterSpec()) -> HoldoutResult:
    """Worn-condition evaluation: same path as the holdout, no retraining."""
    if not samples:
        raise EvaluationError("empty worn dataset")
    bad = {s.condition for s in samples} - {"worn"}
    if bad:
        raise EvaluationError(
            f"worn evaluation requires worn-condition samples, found {sorted(bad)}")
    return _pooled_evaluation(models, samples, filter_spec)


# ------------------------------------------------------------------ reports


def write_confusion_csv(confusion: ConfusionMatrix, path) -> None:
    """Heatmap-ready CSV: header row of predicted labels, one row per
    true class."""
    lines = ["true\\predicted," + ",".join(CLASS_LABELS)]
    for label, row in zip(CLASS_LABELS, confusion.counts):
        lines.append(label + "," + ",".join(str(int(v)) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def format_fold_table(result: LosoResult) -> str:
    lines = ["fold  validation_subject  accuracy"]
    for f in result.folds:
        lines.append(f"{f.plan.fold_index:>4d}  {f.plan.validation_subject:>18d}"
                     f"  {f.accuracy:8.4f}")
    lines.append(f"mean{'':>24}  {result.mean_accuracy:8.4f}")
    return "\n".join(lines)


def format_metrics_table(rows: dict) -> str:
    """rows: name -> Metrics, printed one model per line."""
    header = (f"{'model':<24}{'accuracy':>10}{'precision':>11}"
              f"{'recall':>9}{'f1':>9}")
    lines = [header]
    for name, m in rows.items():
        lines.append(f"{name:<24}{m.accuracy:>10.4f}{m.macro_precision:>11.4f}"
                     f"{m.macro_recall:>9.4f}{m.macro_f1:>9.4f}")
    return "\n".join(lines)
