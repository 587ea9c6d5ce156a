"""Dataset and model files, plus the seeded synthetic dataset generator.

Dataset file: UTF-8, one JSON record per line, header line first. The header
carries the format version and a checksum of the canonical joint order; the
records carry exact joint and label spellings from the skeleton module.

Model file: a single versioned JSON document with every fitted parameter at
full round-trip precision, so a loaded model predicts identically.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifiers import (
    Knn1Model,
    LdaModel,
    MulticlassModel,
    OvoSvmModel,
    QdaModel,
    Standardizer,
)
from .errors import (
    CorruptModel,
    DataError,
    ParseError,
    UnknownLabel,
    VersionMismatch,
)
from .features import FeatureConfig
from .kernels import KernelSpec
from .poses import POSE_TEMPLATES, rotation_about_y
from .skeleton import (
    JOINT_NAMES,
    JointId,
    Observation,
    PostureLabel,
    Skeleton,
    label_from_name,
    validate_skeleton,
)
from .svm import BinarySvmModel

DATASET_FORMAT = "posturelab-dataset"
MODEL_FORMAT = "posturelab-model"
FILE_VERSION = 1

_JOINT_CHECKSUM = hashlib.sha256(",".join(JOINT_NAMES).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class LabeledDataset:
    """An ordered sequence of observations plus a content fingerprint.

    Record order is part of the identity: split determinism depends on it.
    """

    observations: tuple[Observation, ...]
    fingerprint: str

    def __len__(self) -> int:
        return len(self.observations)

    def skeletons(self) -> list[Skeleton]:
        return [o.skeleton for o in self.observations]

    def label_indices(self) -> np.ndarray:
        out = np.empty(len(self.observations), dtype=np.int64)
        for i, obs in enumerate(self.observations):
            if obs.label is None:
                raise DataError(f"record {i} has no label")
            out[i] = int(obs.label)
        return out


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def record_line(obs: Observation) -> str:
    """Canonical one-line serialization of an observation."""
    joints = {
        name: [float(v) for v in obs.skeleton.positions[int(j)]]
        for name, j in zip(JOINT_NAMES, JointId)
    }
    rec = {
        "participant": obs.participant_id,
        "label": obs.label.name if obs.label is not None else None,
        "orientation_deg": float(obs.orientation_deg),
        "distance_m": float(obs.distance_m),
        "joints": joints,
    }
    return _dumps(rec)


def _fingerprint_lines(lines: list[str]) -> str:
    h = hashlib.sha256()
    for line in lines:
        h.update(line.encode())
        h.update(b"\n")
    return h.hexdigest()[:16]


def dataset_from_observations(observations) -> LabeledDataset:
    obs = tuple(observations)
    return LabeledDataset(obs, _fingerprint_lines([record_line(o) for o in obs]))


def save_dataset(ds: LabeledDataset, path, generator: dict | None = None) -> None:
    header = {
        "format": DATASET_FORMAT,
        "version": FILE_VERSION,
        "joint_checksum": _JOINT_CHECKSUM,
        "generator": generator,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dumps(header) + "\n")
        for obs in ds.observations:
            fh.write(record_line(obs) + "\n")


def load_dataset(path) -> LabeledDataset:
    """Parse and validate a dataset file; every error carries its line number."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise ParseError(1, "empty dataset file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise ParseError(1, f"bad header: {e.msg}") from None
    if not isinstance(header, dict) or header.get("format") != DATASET_FORMAT:
        raise ParseError(1, "not a posturelab dataset file")
    if header.get("version") != FILE_VERSION:
        raise VersionMismatch(header.get("version"), FILE_VERSION)
    if header.get("joint_checksum") != _JOINT_CHECKSUM:
        raise ParseError(1, "joint-order checksum mismatch")

    observations = []
    record_lines = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(lineno, f"bad record: {e.msg}") from None
        if not isinstance(rec, dict) or "joints" not in rec:
            raise ParseError(lineno, "record must be an object with a 'joints' map")
        label = None
        if rec.get("label") is not None:
            name = rec["label"]
            if not isinstance(name, str):
                raise UnknownLabel(str(name), lineno)
            label = label_from_name(name, lineno)
        skeleton = validate_skeleton(rec["joints"], line=lineno)
        observations.append(
            Observation(
                skeleton=skeleton,
                label=label,
                participant_id=str(rec.get("participant", "")),
                orientation_deg=float(rec.get("orientation_deg", 0.0)),
                distance_m=float(rec.get("distance_m", 0.0)),
            )
        )
        record_lines.append(line)
    return LabeledDataset(tuple(observations), _fingerprint_lines(record_lines))


# ---------------------------------------------------------------------------
# Synthetic generation


@dataclass(frozen=True)
class SynthSpec:
    """Parameter space of the synthetic acquisition protocol.

    Per class: per_class records, each with an orientation and camera distance
    drawn from the given sets, a participant body scale drawn uniformly from
    scale_range, and i.i.d. Gaussian joint noise. Fully determined by seed.
    """

    seed: int = 0
    per_class: int = 208
    orientations_deg: tuple[float, ...] = (0.0, 90.0, 180.0, 270.0)
    distances_m: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0)
    noise_std_m: float = 0.02
    scale_range: tuple[float, float] = (0.85, 1.15)
    participants: int = 13

    def __post_init__(self):
        if self.per_class <= 0:
            raise ValueError("per_class must be positive")
        if self.noise_std_m < 0:
            raise ValueError("noise stddev must be >= 0")
        if min(self.scale_range) <= 0:
            raise ValueError("scales must be positive")
        object.__setattr__(
            self, "orientations_deg", tuple(sorted(float(v) for v in self.orientations_deg))
        )
        object.__setattr__(
            self, "distances_m", tuple(sorted(float(v) for v in self.distances_m))
        )

    def to_dict(self) -> dict:
        return {
            "seed": int(self.seed),
            "per_class": int(self.per_class),
            "orientations_deg": list(self.orientations_deg),
            "distances_m": list(self.distances_m),
            "noise_std_m": float(self.noise_std_m),
            "scale_range": list(self.scale_range),
            "participants": int(self.participants),
        }


def _synth_record(spec: SynthSpec, label: PostureLabel, counter: int) -> Observation:
    # Counter-based per-record seeding: parallel and sequential generation agree.
    rng = np.random.default_rng(np.random.SeedSequence((spec.seed, counter)))
    orientation = float(rng.choice(spec.orientations_deg))
    distance = float(rng.choice(spec.distances_m))
    scale = float(rng.uniform(*spec.scale_range))
    participant = int(rng.integers(spec.participants))

    pos = POSE_TEMPLATES[label] * scale
    pos = pos @ rotation_about_y(math.radians(orientation)).T
    pos = pos + np.array([0.0, 0.0, distance])
    if spec.noise_std_m > 0:
        pos = pos + rng.normal(0.0, spec.noise_std_m, pos.shape)
    return Observation(
        skeleton=Skeleton(pos),
        label=label,
        participant_id=f"p{participant:02d}",
        orientation_deg=orientation,
        distance_m=distance,
    )


def synth_generate(spec: SynthSpec) -> LabeledDataset:
    """Seeded synthetic dataset mirroring the acquisition protocol's shape."""
    observations = []
    counter = 0
    for label in PostureLabel:
        for _ in range(spec.per_class):
            observations.append(_synth_record(spec, label, counter))
            counter += 1
    return dataset_from_observations(observations)


# ---------------------------------------------------------------------------
# Model files


@dataclass(frozen=True)
class ModelFile:
    """A trained model plus everything needed to apply it to new skeletons."""

    model: MulticlassModel
    feature_config: FeatureConfig
    dataset_fingerprint: str = ""


def _machine_to_dict(m: BinarySvmModel) -> dict:
    return {
        "support_vectors": m.support_vectors.tolist(),
        "dual_coef": m.dual_coef.tolist(),
        "bias": float(m.bias),
        "kernel": m.kernel.to_dict(),
        "c": float(m.c),
        "converged": bool(m.converged),
        "n_passes": int(m.n_passes),
        "kkt_violations": int(m.kkt_violations),
    }


def _machine_from_dict(d: dict) -> BinarySvmModel:
    return BinarySvmModel(
        support_vectors=np.asarray(d["support_vectors"], dtype=np.float64).reshape(
            len(d["dual_coef"]), -1
        )
        if d["dual_coef"]
        else np.empty((0, 0)),
        dual_coef=np.asarray(d["dual_coef"], dtype=np.float64),
        bias=float(d["bias"]),
        kernel=KernelSpec.from_dict(d["kernel"]),
        c=float(d["c"]),
        converged=bool(d["converged"]),
        n_passes=int(d["n_passes"]),
        kkt_violations=int(d["kkt_violations"]),
    )


def _params_to_dict(model: MulticlassModel) -> dict:
    if isinstance(model, OvoSvmModel):
        return {
            "pairs": [list(p) for p in model.pairs],
            "machines": [_machine_to_dict(m) for m in model.machines],
        }
    if isinstance(model, LdaModel):
        return {
            "classes": list(model.classes),
            "means": model.means.tolist(),
            "precision": model.precision.tolist(),
            "log_priors": model.log_priors.tolist(),
        }
    if isinstance(model, QdaModel):
        return {
            "classes": list(model.classes),
            "means": model.means.tolist(),
            "precisions": model.precisions.tolist(),
            "log_dets": model.log_dets.tolist(),
            "log_priors": model.log_priors.tolist(),
        }
    if isinstance(model, Knn1Model):
        return {
            "points": model.points.tolist(),
            "labels": model.labels.tolist(),
        }
    raise TypeError(f"not a multiclass model: {type(model)!r}")


def _model_from_parts(kind: str, base: dict, params: dict) -> MulticlassModel:
    if kind == OvoSvmModel.kind:
        return OvoSvmModel(
            **base,
            pairs=tuple((int(a), int(b)) for a, b in params["pairs"]),
            machines=tuple(_machine_from_dict(m) for m in params["machines"]),
        )
    if kind == LdaModel.kind:
        return LdaModel(
            **base,
            classes=tuple(int(k) for k in params["classes"]),
            means=np.asarray(params["means"], dtype=np.float64),
            precision=np.asarray(params["precision"], dtype=np.float64),
            log_priors=np.asarray(params["log_priors"], dtype=np.float64),
        )
    if kind == QdaModel.kind:
        return QdaModel(
            **base,
            classes=tuple(int(k) for k in params["classes"]),
            means=np.asarray(params["means"], dtype=np.float64),
            precisions=np.asarray(params["precisions"], dtype=np.float64),
            log_dets=np.asarray(params["log_dets"], dtype=np.float64),
            log_priors=np.asarray(params["log_priors"], dtype=np.float64),
        )
    if kind == Knn1Model.kind:
        return Knn1Model(
            **base,
            points=np.asarray(params["points"], dtype=np.float64),
            labels=np.asarray(params["labels"], dtype=np.int64),
        )
    raise CorruptModel(f"unknown model kind {kind!r}")


def model_file_to_dict(mf: ModelFile) -> dict:
    cfg = mf.feature_config
    return {
        "format": MODEL_FORMAT,
        "version": FILE_VERSION,
        "kind": type(mf.model).kind,
        "feature_config": {
            "use_distances": cfg.use_distances,
            "use_angles": cfg.use_angles,
            "angle_mode": cfg.angle_mode.value,
        },
        "feature_fingerprint": mf.model.fingerprint,
        "seed": int(mf.model.seed),
        "dataset_fingerprint": mf.dataset_fingerprint,
        "standardizer": {
            "mean": mf.model.standardizer.mean.tolist(),
            "std": mf.model.standardizer.std.tolist(),
        },
        "params": _params_to_dict(mf.model),
    }


def model_file_from_dict(doc: dict) -> ModelFile:
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise CorruptModel("not a posturelab model file")
    if doc.get("version") != FILE_VERSION:
        raise VersionMismatch(doc.get("version"), FILE_VERSION)
    try:
        cfg = FeatureConfig(
            use_distances=bool(doc["feature_config"]["use_distances"]),
            use_angles=bool(doc["feature_config"]["use_angles"]),
            angle_mode=doc["feature_config"]["angle_mode"],
        )
        standardizer = Standardizer(
            np.asarray(doc["standardizer"]["mean"], dtype=np.float64),
            np.asarray(doc["standardizer"]["std"], dtype=np.float64),
        )
        base = {
            "standardizer": standardizer,
            "fingerprint": str(doc["feature_fingerprint"]),
            "seed": int(doc["seed"]),
        }
        model = _model_from_parts(str(doc["kind"]), base, doc["params"])
        return ModelFile(model, cfg, str(doc.get("dataset_fingerprint", "")))
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptModel(f"malformed model file: {e}") from None


def save_model(mf: ModelFile, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dumps(model_file_to_dict(mf)) + "\n")


def load_model(path) -> ModelFile:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise CorruptModel(f"unreadable model file: {e.msg}") from None
    return model_file_from_dict(doc)
