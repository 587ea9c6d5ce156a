"""The classifier menu behind a single train/predict contract.

Four model kinds: one-vs-one SVM (trained by SMO), linear and quadratic
Gaussian discriminants, and exact 1-nearest-neighbor. Every kind standardizes
features with statistics fitted on its own training set, so kernel scales and
distances are comparable across feature families.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Sequence

import numpy as np

from .errors import (
    DegenerateCovariance,
    DimensionMismatch,
    EmptyTrainingSet,
    FingerprintMismatch,
    SingleClass,
)
from .features import FeatureVector
from .kernels import KernelSpec, linear_kernel, polynomial_kernel
from .skeleton import NUM_CLASSES, PostureLabel
from .svm import BinarySvmModel, decision_function, smo_train

COVARIANCE_RIDGE = 1e-6  # lambda in Sigma + lambda * (trace/d) * I
ZERO_STD_FLOOR = 1e-12  # features with stddev below this are stored with std 1

# Auto kernel scale: 4 * sqrt(n_features). For standardized features the
# polynomial kernel argument x.y/scale^2 then stays well above -1, keeping
# (1 + x.y/scale^2)^degree monotone in the dot product.
AUTO_SCALE_FACTOR = 4.0

CLASSIFIER_NAMES = (
    "lda",
    "qda",
    "knn1",
    "svm_linear",
    "svm_quadratic",
    "svm_cubic",
)


@dataclass(frozen=True)
class Standardizer:
    """Per-feature training mean and population stddev (zero-variance -> 1)."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        for name in ("mean", "std"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.mean.shape != self.std.shape or self.mean.ndim != 1:
            raise DimensionMismatch("mean and std must be 1-D and equal length")

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.dim:
            raise DimensionMismatch(
                f"expected {self.dim} features, got {X.shape[-1]}"
            )
        return (X - self.mean) / self.std


def fit_standardizer(X: np.ndarray) -> Standardizer:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch("training matrix must be (n, d)")
    if X.shape[0] == 0:
        raise EmptyTrainingSet("cannot standardize an empty training set")
    mean = X.mean(axis=0)
    std = X.std(axis=0)  # population stddev
    std = np.where(std < ZERO_STD_FLOOR, 1.0, std)
    return Standardizer(mean, std)


def vote_from_decisions(
    pairs: Sequence[tuple[int, int]],
    decisions: Sequence[float],
    n_classes: int = NUM_CLASSES,
) -> tuple[int, np.ndarray, np.ndarray]:
    """Aggregate pairwise duels into a winner.

    Each duel (a, b) carries a signed decision value: positive favors a,
    negative favors b, exact zero goes to the lower index a. The winner has
    the most votes; ties break on the largest sum of signed decision values
    in the class's favor, then on the lowest class index.

    Returns (winner index, votes per class, margin sum per class).
    """
    votes = np.zeros(n_classes, dtype=np.int64)
    margins = np.zeros(n_classes)
    for (a, b), d in zip(pairs, decisions):
        d = float(d)
        if d >= 0.0:
            votes[a] += 1
        else:
            votes[b] += 1
        margins[a] += d
        margins[b] -= d
    tied = np.flatnonzero(votes == votes.max())
    if tied.size > 1:
        tied = tied[margins[tied] == margins[tied].max()]
    return int(tied[0]), votes, margins


@dataclass(frozen=True)
class MulticlassModel:
    """Shared fields of every fitted five-class model."""

    standardizer: Standardizer
    fingerprint: str
    seed: int

    kind: ClassVar[str] = ""

    @property
    def dim(self) -> int:
        return self.standardizer.dim


@dataclass(frozen=True)
class OvoSvmModel(MulticlassModel):
    pairs: tuple[tuple[int, int], ...] = ()
    machines: tuple[BinarySvmModel, ...] = ()

    kind: ClassVar[str] = "ovo_svm"

    @property
    def converged(self) -> bool:
        return all(m.converged for m in self.machines)


@dataclass(frozen=True)
class LdaModel(MulticlassModel):
    classes: tuple[int, ...] = ()
    means: np.ndarray = None
    precision: np.ndarray = None  # pooled inverse covariance
    log_priors: np.ndarray = None

    kind: ClassVar[str] = "lda"


@dataclass(frozen=True)
class QdaModel(MulticlassModel):
    classes: tuple[int, ...] = ()
    means: np.ndarray = None
    precisions: np.ndarray = None  # per-class inverse covariances
    log_dets: np.ndarray = None  # of the regularized covariances
    log_priors: np.ndarray = None

    kind: ClassVar[str] = "qda"


@dataclass(frozen=True)
class Knn1Model(MulticlassModel):
    points: np.ndarray = None  # standardized training set
    labels: np.ndarray = None

    kind: ClassVar[str] = "knn1"


def _as_standardized(model: MulticlassModel, x) -> np.ndarray:
    """Validate a prediction input and standardize it."""
    if isinstance(x, FeatureVector):
        if x.fingerprint != model.fingerprint:
            raise FingerprintMismatch(
                f"feature fingerprint {x.fingerprint!r} does not match "
                f"model fingerprint {model.fingerprint!r}"
            )
        x = x.values
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch("expected a single feature vector")
    return model.standardizer.transform(x)


def _class_counts(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    classes, counts = np.unique(y, return_counts=True)
    return classes.astype(np.int64), counts


# ---------------------------------------------------------------------------
# One-vs-one SVM


def ovo_train(
    X: np.ndarray,
    y: np.ndarray,
    kernel: KernelSpec,
    c: float = 1.0,
    tol: float = 1e-3,
    seed: int = 0,
    max_passes: int = 10,
    fingerprint: str = "",
) -> OvoSvmModel:
    """One binary SVM per unordered pair of classes present in y.

    The positive label of the (a, b) machine is class a (the lower index), so
    positive decision values vote for a. Each machine trains on a seed derived
    from (seed, a, b), which makes the ten subproblems order-independent.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    classes, _ = _class_counts(y)
    if classes.size < 2:
        raise SingleClass("one-vs-one training needs at least two classes")
    standardizer = fit_standardizer(X)
    Xs = standardizer.transform(X)

    pairs = []
    machines = []
    for ia in range(classes.size):
        for ib in range(ia + 1, classes.size):
            a, b = int(classes[ia]), int(classes[ib])
            mask = (y == a) | (y == b)
            y_bin = np.where(y[mask] == a, 1.0, -1.0)
            pair_seed = int(
                np.random.SeedSequence((seed, a, b)).generate_state(1, np.uint64)[0]
            )
            machines.append(
                smo_train(
                    Xs[mask],
                    y_bin,
                    kernel,
                    c=c,
                    tol=tol,
                    max_passes=max_passes,
                    seed=pair_seed,
                )
            )
            pairs.append((a, b))
    return OvoSvmModel(
        standardizer=standardizer,
        fingerprint=fingerprint,
        seed=seed,
        pairs=tuple(pairs),
        machines=tuple(machines),
    )


def ovo_decision_values(model: OvoSvmModel, Xs: np.ndarray) -> np.ndarray:
    """(n_machines, n_samples) signed decisions for standardized rows."""
    return np.vstack([decision_function(m, Xs) for m in model.machines])


def ovo_predict(model: OvoSvmModel, x) -> tuple[PostureLabel, dict[PostureLabel, int]]:
    """Majority vote over the pairwise machines for one feature vector."""
    xs = _as_standardized(model, x)
    decisions = [float(decision_function(m, xs[None, :])[0]) for m in model.machines]
    winner, votes, _ = vote_from_decisions(model.pairs, decisions)
    table = {label: int(votes[label]) for label in PostureLabel}
    return PostureLabel(winner), table


# ---------------------------------------------------------------------------
# Gaussian discriminants


def _regularized(cov: np.ndarray) -> np.ndarray:
    d = cov.shape[0]
    ridge = COVARIANCE_RIDGE * (np.trace(cov) / d)
    return cov + ridge * np.eye(d)


def _chol_logdet(cov: np.ndarray, what: str) -> float:
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise DegenerateCovariance(
            f"{what} covariance is singular even after regularization"
        ) from None
    return float(2.0 * np.sum(np.log(np.diag(chol))))


def lda_train(
    X: np.ndarray, y: np.ndarray, fingerprint: str = "", seed: int = 0
) -> LdaModel:
    """Gaussian discriminant with one pooled covariance across classes."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    classes, counts = _class_counts(y)
    if classes.size < 2:
        raise SingleClass("discriminant training needs at least two classes")
    if counts.min() < 2:
        small = int(classes[counts.argmin()])
        raise SingleClass(f"class {small} has fewer than 2 samples")
    standardizer = fit_standardizer(X)
    Xs = standardizer.transform(X)

    n, d = Xs.shape
    means = np.vstack([Xs[y == k].mean(axis=0) for k in classes])
    pooled = np.zeros((d, d))
    for mean_k, k in zip(means, classes):
        centered = Xs[y == k] - mean_k
        pooled += centered.T @ centered
    pooled /= n - classes.size
    pooled = _regularized(pooled)
    _chol_logdet(pooled, "pooled")
    precision = np.linalg.inv(pooled)
    log_priors = np.log(counts / n)
    return LdaModel(
        standardizer=standardizer,
        fingerprint=fingerprint,
        seed=seed,
        classes=tuple(int(k) for k in classes),
        means=means,
        precision=precision,
        log_priors=log_priors,
    )


def qda_train(
    X: np.ndarray, y: np.ndarray, fingerprint: str = "", seed: int = 0
) -> QdaModel:
    """Gaussian discriminant with one covariance per class."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    classes, counts = _class_counts(y)
    if classes.size < 2:
        raise SingleClass("discriminant training needs at least two classes")
    if counts.min() < 2:
        small = int(classes[counts.argmin()])
        raise SingleClass(f"class {small} has fewer than 2 samples")
    standardizer = fit_standardizer(X)
    Xs = standardizer.transform(X)

    n, d = Xs.shape
    means = []
    precisions = []
    log_dets = []
    for k in classes:
        rows = Xs[y == k]
        mean_k = rows.mean(axis=0)
        centered = rows - mean_k
        cov = _regularized(centered.T @ centered / (rows.shape[0] - 1))
        log_dets.append(_chol_logdet(cov, f"class {int(k)}"))
        precisions.append(np.linalg.inv(cov))
        means.append(mean_k)
    log_priors = np.log(counts / n)
    return QdaModel(
        standardizer=standardizer,
        fingerprint=fingerprint,
        seed=seed,
        classes=tuple(int(k) for k in classes),
        means=np.vstack(means),
        precisions=np.stack(precisions),
        log_dets=np.array(log_dets),
        log_priors=log_priors,
    )


def _lda_scores(model: LdaModel, Xs: np.ndarray) -> np.ndarray:
    coef = model.precision @ model.means.T  # (d, K)
    intercept = -0.5 * np.einsum("kd,dk->k", model.means, coef) + model.log_priors
    return Xs @ coef + intercept


def _qda_scores(model: QdaModel, Xs: np.ndarray) -> np.ndarray:
    scores = np.empty((Xs.shape[0], len(model.classes)))
    for idx in range(len(model.classes)):
        centered = Xs - model.means[idx]
        maha = np.einsum("nd,de,ne->n", centered, model.precisions[idx], centered)
        scores[:, idx] = (
            -0.5 * model.log_dets[idx] - 0.5 * maha + model.log_priors[idx]
        )
    return scores


def discriminant_predict(model: LdaModel | QdaModel, x) -> PostureLabel:
    """argmax of the class discriminant scores; ties to the lowest class index."""
    xs = _as_standardized(model, x)[None, :]
    scores = _lda_scores(model, xs) if isinstance(model, LdaModel) else _qda_scores(model, xs)
    return PostureLabel(model.classes[int(np.argmax(scores[0]))])


# ---------------------------------------------------------------------------
# Nearest neighbor


def knn1_train(
    X: np.ndarray, y: np.ndarray, fingerprint: str = "", seed: int = 0
) -> Knn1Model:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise EmptyTrainingSet("1-NN needs at least one training point")
    standardizer = fit_standardizer(X)
    return Knn1Model(
        standardizer=standardizer,
        fingerprint=fingerprint,
        seed=seed,
        points=standardizer.transform(X),
        labels=y.copy(),
    )


def knn1_predict(model: Knn1Model, x) -> PostureLabel:
    """Label of the Euclidean-nearest standardized training point.

    Exact distance ties resolve to the lowest training-record index
    (np.argmin returns the first minimum).
    """
    xs = _as_standardized(model, x)
    d2 = ((model.points - xs) ** 2).sum(axis=1)
    return PostureLabel(int(model.labels[int(np.argmin(d2))]))


# ---------------------------------------------------------------------------
# Uniform train/predict contract


@dataclass(frozen=True)
class ClassifierSpec:
    """CLI-facing classifier choice plus hyperparameters.

    kernel_scale None means auto: 4 * sqrt(n_features), resolved at training
    time and recorded in the fitted model.
    """

    name: str = "svm_quadratic"
    c: float = 1.0
    tol: float = 1e-3
    kernel_scale: float | None = None
    max_passes: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.name not in CLASSIFIER_NAMES:
            raise ValueError(
                f"unknown classifier {self.name!r}; choose from {CLASSIFIER_NAMES}"
            )

    def resolve_scale(self, n_features: int) -> float:
        if self.kernel_scale is not None:
            return float(self.kernel_scale)
        return AUTO_SCALE_FACTOR * math.sqrt(n_features)

    def kernel(self, n_features: int) -> KernelSpec | None:
        if self.name == "svm_linear":
            return linear_kernel()
        if self.name == "svm_quadratic":
            return polynomial_kernel(2, self.resolve_scale(n_features))
        if self.name == "svm_cubic":
            return polynomial_kernel(3, self.resolve_scale(n_features))
        return None


def train_classifier(
    X: np.ndarray, y: np.ndarray, spec: ClassifierSpec, fingerprint: str = ""
) -> MulticlassModel:
    X = np.asarray(X, dtype=np.float64)
    kernel = spec.kernel(X.shape[1])
    if kernel is not None:
        return ovo_train(
            X,
            y,
            kernel,
            c=spec.c,
            tol=spec.tol,
            seed=spec.seed,
            max_passes=spec.max_passes,
            fingerprint=fingerprint,
        )
    if spec.name == "lda":
        return lda_train(X, y, fingerprint=fingerprint, seed=spec.seed)
    if spec.name == "qda":
        return qda_train(X, y, fingerprint=fingerprint, seed=spec.seed)
    return knn1_train(X, y, fingerprint=fingerprint, seed=spec.seed)


def predict_label(model: MulticlassModel, x) -> PostureLabel:
    if isinstance(model, OvoSvmModel):
        return ovo_predict(model, x)[0]
    if isinstance(model, (LdaModel, QdaModel)):
        return discriminant_predict(model, x)
    if isinstance(model, Knn1Model):
        return knn1_predict(model, x)
    raise TypeError(f"not a multiclass model: {type(model)!r}")


def predict_batch(model: MulticlassModel, X: np.ndarray) -> np.ndarray:
    """Predicted class indices for an (n, d) matrix of raw feature rows."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch("expected an (n, d) matrix")
    Xs = model.standardizer.transform(X)
    if isinstance(model, OvoSvmModel):
        decisions = ovo_decision_values(model, Xs)
        out = np.empty(X.shape[0], dtype=np.int64)
        for i in range(X.shape[0]):
            out[i] = vote_from_decisions(model.pairs, decisions[:, i])[0]
        return out
    if isinstance(model, LdaModel):
        scores = _lda_scores(model, Xs)
        return np.asarray(model.classes)[np.argmax(scores, axis=1)]
    if isinstance(model, QdaModel):
        scores = _qda_scores(model, Xs)
        return np.asarray(model.classes)[np.argmax(scores, axis=1)]
    if isinstance(model, Knn1Model):
        out = np.empty(X.shape[0], dtype=np.int64)
        for i in range(X.shape[0]):
            d2 = ((model.points - Xs[i]) ** 2).sum(axis=1)
            out[i] = model.labels[int(np.argmin(d2))]
        return out
    raise TypeError(f"not a multiclass model: {type(model)!r}")
