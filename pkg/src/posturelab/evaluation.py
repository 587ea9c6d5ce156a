"""Experimental methodology: seeded stratified splits, confusion matrices in
the row-normalized convention (rows are true classes, columns predicted),
per-class and overall accuracy, and the classifier-by-featureset grid.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .classifiers import (
    ClassifierSpec,
    MulticlassModel,
    predict_batch,
    train_classifier,
)
from .dataset import LabeledDataset
from .errors import ClassTooSmall, EmptyInput, LengthMismatch
from .features import FeatureConfig, extract_matrix
from .skeleton import LABEL_NAMES, NUM_CLASSES, PostureLabel

STRATIFY_MODES = ("label", "label_participant")

REPORT_VERSION = 1

# Classifier rows of the default evaluation grid.
GRID_CLASSIFIERS = ("lda", "knn1", "svm_linear", "svm_quadratic", "svm_cubic")
GRID_FEATURE_SETS = ("angles", "distances", "combined")


def round_half_up(value: float, decimals: int = 1) -> float:
    """Decimal rounding with ties away from zero (table convention)."""
    factor = 10.0**decimals
    return math.floor(abs(value) * factor + 0.5) / factor * (1 if value >= 0 else -1)


@dataclass(frozen=True)
class SplitSpec:
    """Seeded stratified train/test split policy.

    Resubstitution (train = test = everything) exists solely for oracle tests
    and is labeled as such in reports.
    """

    train_fraction: float = 0.8
    seed: int = 0
    stratify_by: str = "label"
    resubstitution: bool = False

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise ValueError("train_fraction must be in (0, 1)")
        if self.stratify_by not in STRATIFY_MODES:
            raise ValueError(f"stratify_by must be one of {STRATIFY_MODES}")

    def to_dict(self) -> dict:
        return {
            "train_fraction": float(self.train_fraction),
            "seed": int(self.seed),
            "stratify_by": self.stratify_by,
            "resubstitution": bool(self.resubstitution),
        }


def stratified_split(
    ds: LabeledDataset, spec: SplitSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint (train, test) index arrays covering the dataset.

    Per-stratum train counts start at floor(fraction * n_k); the leftover up
    to the dataset-level target round(fraction * N) goes to the strata with
    the largest fractional remainders (ties to the first stratum in key
    order), so the global split hits the requested fraction exactly whenever
    it is an integer. Within each stratum the assignment is a seeded shuffle,
    deterministic given (dataset order, spec).
    """
    labels = ds.label_indices()
    n = labels.shape[0]
    strata: dict = {}
    for i, obs in enumerate(ds.observations):
        if spec.stratify_by == "label":
            key = (int(labels[i]),)
        else:
            key = (int(labels[i]), obs.participant_id)
        strata.setdefault(key, []).append(i)

    class_sizes = np.bincount(labels, minlength=NUM_CLASSES)
    for k in np.flatnonzero(class_sizes):
        if class_sizes[k] < 2:
            raise ClassTooSmall(
                f"class {PostureLabel(int(k)).name} has {int(class_sizes[k])} "
                "observation(s); need at least 2 to split"
            )

    keys = sorted(strata.keys())
    base = {}
    remainder = {}
    for key in keys:
        exact = spec.train_fraction * len(strata[key])
        base[key] = int(math.floor(exact))
        remainder[key] = exact - base[key]
    target_total = int(math.floor(spec.train_fraction * n + 0.5))
    extras = target_total - sum(base.values())
    for key in sorted(keys, key=lambda k: (-remainder[k], k))[:extras]:
        base[key] += 1

    rng = np.random.default_rng(spec.seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for key in keys:
        members = np.array(strata[key], dtype=np.int64)
        rng.shuffle(members)
        take = base[key]
        train_idx.extend(members[:take].tolist())
        test_idx.extend(members[take:].tolist())
    return np.array(sorted(train_idx)), np.array(sorted(test_idx))


@dataclass(frozen=True)
class ConfusionMatrix:
    """5x5 counts; rows are true classes, columns predicted classes."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.ascontiguousarray(self.counts, dtype=np.int64)
        if counts.shape != (NUM_CLASSES, NUM_CLASSES):
            raise ValueError("counts must be 5x5")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def overall_accuracy(self) -> float:
        return float(np.trace(self.counts) / self.total)

    def per_class_accuracy(self) -> np.ndarray:
        """Diagonal over row sums; NaN for classes absent from the test set."""
        row_sums = self.counts.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(
                row_sums > 0, np.diag(self.counts) / row_sums, np.nan
            )

    def row_percentages(self) -> np.ndarray:
        """Row-normalized percentages, one decimal, half-up; zero rows stay 0."""
        row_sums = self.counts.sum(axis=1, keepdims=True)
        raw = 100.0 * self.counts / np.where(row_sums > 0, row_sums, 1)
        out = np.empty_like(raw)
        for i in range(NUM_CLASSES):
            for j in range(NUM_CLASSES):
                out[i, j] = round_half_up(raw[i, j], 1)
        return out


def confusion_matrix(truth, pred) -> ConfusionMatrix:
    truth = np.asarray([int(t) for t in truth], dtype=np.int64)
    pred = np.asarray([int(p) for p in pred], dtype=np.int64)
    if truth.shape[0] != pred.shape[0]:
        raise LengthMismatch(
            f"{truth.shape[0]} truth labels vs {pred.shape[0]} predictions"
        )
    if truth.shape[0] == 0:
        raise EmptyInput("cannot build a confusion matrix from no labels")
    counts = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    np.add.at(counts, (truth, pred), 1)
    return ConfusionMatrix(counts)


@dataclass(frozen=True)
class EvaluationReport:
    """One evaluated (classifier, feature set, split) cell."""

    classifier: ClassifierSpec
    features: FeatureConfig
    split: SplitSpec
    confusion: ConfusionMatrix
    n_train: int
    n_test: int
    dataset_fingerprint: str
    feature_fingerprint: str
    timings_ms: dict
    model: MulticlassModel = field(repr=False, compare=False, default=None)

    @property
    def accuracy(self) -> float:
        return self.confusion.overall_accuracy

    def classifier_dict(self) -> dict:
        c = self.classifier
        return {
            "name": c.name,
            "c": float(c.c),
            "tol": float(c.tol),
            "kernel_scale": None if c.kernel_scale is None else float(c.kernel_scale),
            "max_passes": int(c.max_passes),
            "seed": int(c.seed),
        }

    def features_dict(self) -> dict:
        return {
            "set": self.features.name,
            "use_distances": self.features.use_distances,
            "use_angles": self.features.use_angles,
            "angle_mode": self.features.angle_mode.value,
            "fingerprint": self.feature_fingerprint,
        }

    def split_dict(self) -> dict:
        d = self.split.to_dict()
        d["n_train"] = int(self.n_train)
        d["n_test"] = int(self.n_test)
        return d

    def to_dict(self, include_timings: bool = True) -> dict:
        per_class = [
            None if math.isnan(v) else float(v)
            for v in self.confusion.per_class_accuracy()
        ]
        doc = {
            "version": REPORT_VERSION,
            "classifier": self.classifier_dict(),
            "features": self.features_dict(),
            "split": self.split_dict(),
            "dataset_fingerprint": self.dataset_fingerprint,
            "counts": self.confusion.counts.tolist(),
            "accuracy": self.accuracy,
            "per_class": per_class,
        }
        if include_timings:
            doc["timings_ms"] = {k: float(v) for k, v in self.timings_ms.items()}
        return doc


def evaluate(
    ds: LabeledDataset,
    cfg: FeatureConfig,
    classifier: ClassifierSpec,
    split: SplitSpec,
) -> EvaluationReport:
    """Extract features, fit on the train partition only, score the test one.

    No test observation influences any fitted parameter: the standardizer
    inside the model is fitted on the training rows alone.
    """
    t0 = time.perf_counter()
    X, fingerprint = extract_matrix(ds.skeletons(), cfg)
    y = ds.label_indices()
    t_extract = time.perf_counter()

    if split.resubstitution:
        train_idx = test_idx = np.arange(len(ds))
    else:
        train_idx, test_idx = stratified_split(ds, split)
    model = train_classifier(X[train_idx], y[train_idx], classifier, fingerprint)
    t_train = time.perf_counter()

    pred = predict_batch(model, X[test_idx])
    confusion = confusion_matrix(y[test_idx], pred)
    t_predict = time.perf_counter()

    return EvaluationReport(
        classifier=classifier,
        features=cfg,
        split=split,
        confusion=confusion,
        n_train=int(train_idx.shape[0]),
        n_test=int(test_idx.shape[0]),
        dataset_fingerprint=ds.fingerprint,
        feature_fingerprint=fingerprint,
        timings_ms={
            "extract": (t_extract - t0) * 1e3,
            "train": (t_train - t_extract) * 1e3,
            "predict": (t_predict - t_train) * 1e3,
            "total": (t_predict - t0) * 1e3,
        },
        model=model,
    )


# ---------------------------------------------------------------------------
# Rendering


def _format_pct(value: float) -> str:
    return f"{round_half_up(value, 1):.1f}%"


def render_text(report: EvaluationReport) -> str:
    pct = report.confusion.row_percentages()
    per_class = report.confusion.per_class_accuracy()
    width = max(len(name) for name in LABEL_NAMES) + 2
    lines = []
    c = report.classifier
    scale = "auto" if c.kernel_scale is None else f"{c.kernel_scale:g}"
    lines.append(
        f"classifier: {c.name} (c={c.c:g}, tol={c.tol:g}, "
        f"kernel_scale={scale}, seed={c.seed})"
    )
    f = report.features
    lines.append(f"features: {f.name} (angle_mode={f.angle_mode.value}, "
                 f"length={f.length}, fingerprint={report.feature_fingerprint})")
    s = report.split
    mode = "resubstitution" if s.resubstitution else f"stratified by {s.stratify_by}"
    lines.append(
        f"split: {mode}, fraction={s.train_fraction:g}, seed={s.seed}, "
        f"train={report.n_train}, test={report.n_test}"
    )
    lines.append(f"dataset: {report.dataset_fingerprint}")
    lines.append(f"overall accuracy: {_format_pct(100.0 * report.accuracy)}")
    lines.append("")
    lines.append("rows: true class, columns: predicted class")
    header = " " * width + "".join(f"{name:>{width}}" for name in LABEL_NAMES)
    lines.append(header)
    for i, name in enumerate(LABEL_NAMES):
        cells = "".join(f"{_format_pct(pct[i, j]):>{width}}" for j in range(NUM_CLASSES))
        acc = "" if math.isnan(per_class[i]) else f"  [{_format_pct(100.0 * per_class[i])}]"
        lines.append(f"{name:<{width}}{cells}{acc}")
    return "\n".join(lines) + "\n"


def render_json(report: EvaluationReport, include_timings: bool = True) -> str:
    return json.dumps(report.to_dict(include_timings), sort_keys=True) + "\n"


def render_csv(report: EvaluationReport, include_timings: bool = True) -> str:
    """Lossless CSV: fixed seven fields per record (RFC 4180)."""
    doc = report.to_dict(include_timings)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["section", "name"] + list(LABEL_NAMES))

    def meta(name, value):
        writer.writerow(["meta", name, _csv_scalar(value), "", "", "", ""])

    meta("version", doc["version"])
    for key in ("classifier", "features", "split"):
        for sub, value in doc[key].items():
            meta(f"{key}.{sub}", value)
    meta("dataset_fingerprint", doc["dataset_fingerprint"])
    meta("accuracy", doc["accuracy"])
    if include_timings:
        for sub, value in doc["timings_ms"].items():
            meta(f"timings_ms.{sub}", value)
    for i, name in enumerate(LABEL_NAMES):
        writer.writerow(["counts", name] + [str(v) for v in doc["counts"][i]])
    writer.writerow(
        ["per_class", "accuracy"]
        + [_csv_scalar(v) for v in doc["per_class"]]
    )
    return buf.getvalue()


def _csv_scalar(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_csv_report(text: str) -> dict:
    """Recover counts, accuracy, per-class rates, and metadata from render_csv."""
    rows = list(csv.reader(io.StringIO(text)))
    counts = [[0] * NUM_CLASSES for _ in range(NUM_CLASSES)]
    meta: dict = {}
    per_class: list = [None] * NUM_CLASSES
    label_index = {name: i for i, name in enumerate(LABEL_NAMES)}
    for row in rows[1:]:
        section, name, values = row[0], row[1], row[2:]
        if section == "counts":
            counts[label_index[name]] = [int(v) for v in values]
        elif section == "per_class":
            per_class = [float(v) if v else None for v in values]
        elif section == "meta":
            meta[name] = values[0]
    return {
        "counts": counts,
        "per_class": per_class,
        "accuracy": float(meta["accuracy"]),
        "meta": meta,
    }


def render_report(report: EvaluationReport, fmt: str = "text", include_timings: bool = True) -> str:
    if fmt == "text":
        return render_text(report)
    if fmt == "json":
        return render_json(report, include_timings)
    if fmt == "csv":
        return render_csv(report, include_timings)
    raise ValueError(f"unknown report format {fmt!r}")


# ---------------------------------------------------------------------------
# Grid


def evaluate_grid(
    ds: LabeledDataset,
    base_classifier: ClassifierSpec,
    split: SplitSpec,
    classifiers=GRID_CLASSIFIERS,
    feature_sets=GRID_FEATURE_SETS,
    angle_mode: str = "adjacent",
) -> list[EvaluationReport]:
    """Evaluate every (classifier, feature set) cell.

    Cells are mutually independent; this runs them sequentially so that the
    whole grid is one deterministic pass.
    """
    reports = []
    for name in classifiers:
        spec = replace(base_classifier, name=name)
        for features in feature_sets:
            cfg = FeatureConfig.from_name(features, angle_mode)
            reports.append(evaluate(ds, cfg, spec, split))
    return reports


def render_grid(reports: list[EvaluationReport]) -> str:
    """Accuracy grid, classifiers down the rows and feature sets across."""
    feature_names = []
    classifier_names = []
    cells = {}
    for r in reports:
        fname = r.features.name
        cname = r.classifier.name
        if fname not in feature_names:
            feature_names.append(fname)
        if cname not in classifier_names:
            classifier_names.append(cname)
        cells[(cname, fname)] = r.accuracy
    width = 12
    lines = [
        f"{'classifier':<16}" + "".join(f"{name:>{width}}" for name in feature_names)
    ]
    for cname in classifier_names:
        row = "".join(
            f"{_format_pct(100.0 * cells[(cname, fname)]):>{width}}"
            if (cname, fname) in cells
            else f"{'-':>{width}}"
            for fname in feature_names
        )
        lines.append(f"{cname:<16}{row}")
    return "\n".join(lines) + "\n"
