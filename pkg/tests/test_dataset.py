import json

import numpy as np
import pytest

from posturelab.classifiers import ClassifierSpec, predict_batch, train_classifier
from posturelab.dataset import (
    ModelFile,
    SynthSpec,
    load_dataset,
    load_model,
    record_line,
    save_dataset,
    save_model,
    synth_generate,
)
from posturelab.errors import (
    CorruptModel,
    MissingJoint,
    NonFiniteCoordinate,
    ParseError,
    UnknownLabel,
    VersionMismatch,
)
from posturelab.features import FeatureConfig, extract, extract_matrix


def write_dataset(tmp_path, name="ds.jsonl", **spec_kwargs):
    spec = SynthSpec(**spec_kwargs)
    ds = synth_generate(spec)
    path = tmp_path / name
    save_dataset(ds, path, generator=spec.to_dict())
    return ds, path


class TestDatasetFile:
    def test_round_trip_preserves_records_and_order(self, tmp_path):
        ds, path = write_dataset(tmp_path, seed=3, per_class=4)
        loaded = load_dataset(path)
        assert len(loaded) == len(ds)
        assert loaded.fingerprint == ds.fingerprint
        for a, b in zip(ds.observations, loaded.observations):
            assert a.label == b.label
            assert a.participant_id == b.participant_id
            assert np.array_equal(a.skeleton.positions, b.skeleton.positions)

    def test_unknown_label_carries_line_number(self, tmp_path):
        ds, path = write_dataset(tmp_path, seed=3, per_class=2)
        lines = path.read_text().splitlines()
        rec = json.loads(lines[1])
        rec["label"] = "Jumping"
        lines[1] = json.dumps(rec)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(UnknownLabel) as exc:
            load_dataset(path)
        assert exc.value.line == 2

    def test_missing_joint_carries_line_number(self, tmp_path):
        ds, path = write_dataset(tmp_path, seed=3, per_class=2)
        lines = path.read_text().splitlines()
        rec = json.loads(lines[3])
        del rec["joints"]["ThumbLeft"]
        lines[3] = json.dumps(rec)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(MissingJoint) as exc:
            load_dataset(path)
        assert exc.value.name == "ThumbLeft"
        assert exc.value.line == 4

    def test_non_finite_coordinate_carries_line(self, tmp_path):
        ds, path = write_dataset(tmp_path, seed=3, per_class=2)
        lines = path.read_text().splitlines()
        rec = json.loads(lines[2])
        rec["joints"]["Head"][2] = None
        lines[2] = json.dumps(rec)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(NonFiniteCoordinate) as exc:
            load_dataset(path)
        assert exc.value.line == 3

    def test_bad_json_is_a_parse_error(self, tmp_path):
        ds, path = write_dataset(tmp_path, seed=3, per_class=2)
        text = path.read_text().splitlines()
        text[5] = "{not json"
        path.write_text("\n".join(text) + "\n")
        with pytest.raises(ParseError) as exc:
            load_dataset(path)
        assert exc.value.line == 6

    def test_wrong_header_version(self, tmp_path):
        ds, path = write_dataset(tmp_path, seed=3, per_class=2)
        lines = path.read_text().splitlines()
        header = json.loads(lines[0])
        header["version"] = 0
        lines[0] = json.dumps(header)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(VersionMismatch):
            load_dataset(path)

    def test_missing_label_allowed_for_prediction_inputs(self, tmp_path):
        ds, path = write_dataset(tmp_path, seed=3, per_class=2)
        lines = path.read_text().splitlines()
        rec = json.loads(lines[1])
        rec["label"] = None
        lines[1] = json.dumps(rec)
        path.write_text("\n".join(lines) + "\n")
        loaded = load_dataset(path)
        assert loaded.observations[0].label is None

    def test_fingerprint_tracks_record_bytes(self, tmp_path):
        ds, path = write_dataset(tmp_path, seed=3, per_class=2)
        lines = path.read_text().splitlines()
        rec = json.loads(lines[1])
        rec["joints"]["Head"][0] += 1e-9
        lines[1] = json.dumps(rec, sort_keys=True, separators=(",", ":"))
        path.write_text("\n".join(lines) + "\n")
        assert load_dataset(path).fingerprint != ds.fingerprint


class TestSynthGenerate:
    def test_paper_sized_protocol(self):
        ds = synth_generate(SynthSpec(seed=0, per_class=208))
        assert len(ds) == 1040
        labels = ds.label_indices()
        for k in range(5):
            assert (labels == k).sum() == 208

    def test_same_seed_is_byte_identical(self, tmp_path):
        a = synth_generate(SynthSpec(seed=11, per_class=6))
        b = synth_generate(SynthSpec(seed=11, per_class=6))
        assert a.fingerprint == b.fingerprint
        assert [record_line(o) for o in a.observations] == [
            record_line(o) for o in b.observations
        ]
        c = synth_generate(SynthSpec(seed=12, per_class=6))
        assert c.fingerprint != a.fingerprint

    def test_noise_free_features_constant_within_class(self):
        spec = SynthSpec(seed=5, per_class=24, noise_std_m=0.0)
        ds = synth_generate(spec)
        X, _ = extract_matrix(ds.skeletons(), FeatureConfig())
        y = ds.label_indices()
        for k in range(5):
            rows = X[y == k]
            spread = np.abs(rows - rows[0]).max()
            assert spread < 1e-9, f"class {k} features vary by {spread}"

    def test_noise_free_single_pose_is_exactly_constant(self):
        spec = SynthSpec(
            seed=5, per_class=10, noise_std_m=0.0,
            orientations_deg=(0.0,), distances_m=(2.0,), scale_range=(1.0, 1.0),
        )
        ds = synth_generate(spec)
        X, _ = extract_matrix(ds.skeletons(), FeatureConfig())
        y = ds.label_indices()
        for k in range(5):
            rows = X[y == k]
            assert np.array_equal(rows, np.tile(rows[0], (len(rows), 1)))

    def test_metadata_draws_come_from_spec_sets(self):
        spec = SynthSpec(seed=9, per_class=30)
        ds = synth_generate(spec)
        for obs in ds.observations:
            assert obs.orientation_deg in spec.orientations_deg
            assert obs.distance_m in spec.distances_m
            assert obs.participant_id.startswith("p")

    def test_invalid_specs_rejected(self):
        with pytest.raises(ValueError):
            SynthSpec(per_class=0)
        with pytest.raises(ValueError):
            SynthSpec(noise_std_m=-0.1)
        with pytest.raises(ValueError):
            SynthSpec(scale_range=(0.0, 1.0))


class TestModelFile:
    def fitted_model(self, name="svm_quadratic", seed=7):
        ds = synth_generate(SynthSpec(seed=seed, per_class=8))
        cfg = FeatureConfig()
        X, fp = extract_matrix(ds.skeletons(), cfg)
        model = train_classifier(X, ds.label_indices(), ClassifierSpec(name, seed=seed), fp)
        return ds, cfg, X, model

    @pytest.mark.parametrize("name", ["lda", "qda", "knn1", "svm_quadratic"])
    def test_round_trip_predictions_identical(self, tmp_path, name, rng):
        ds, cfg, X, model = self.fitted_model(name)
        path = tmp_path / "model.json"
        save_model(ModelFile(model, cfg, ds.fingerprint), path)
        loaded = load_model(path)
        assert loaded.feature_config == cfg
        assert loaded.dataset_fingerprint == ds.fingerprint
        queries = X + rng.normal(scale=0.05, size=X.shape)
        assert np.array_equal(
            predict_batch(model, queries), predict_batch(loaded.model, queries)
        )

    def test_round_trip_is_byte_stable(self, tmp_path):
        ds, cfg, X, model = self.fitted_model("lda")
        p1, p2 = tmp_path / "m1.json", tmp_path / "m2.json"
        save_model(ModelFile(model, cfg, ds.fingerprint), p1)
        save_model(ModelFile(load_model(p1).model, cfg, ds.fingerprint), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_version_mismatch(self, tmp_path):
        ds, cfg, X, model = self.fitted_model("knn1")
        path = tmp_path / "model.json"
        save_model(ModelFile(model, cfg, ""), path)
        doc = json.loads(path.read_text())
        doc["version"] = 0
        path.write_text(json.dumps(doc))
        with pytest.raises(VersionMismatch):
            load_model(path)

    def test_truncated_file_is_corrupt(self, tmp_path):
        ds, cfg, X, model = self.fitted_model("knn1")
        path = tmp_path / "model.json"
        save_model(ModelFile(model, cfg, ""), path)
        path.write_text(path.read_text()[: 300])
        with pytest.raises(CorruptModel):
            load_model(path)

    def test_missing_params_is_corrupt(self, tmp_path):
        ds, cfg, X, model = self.fitted_model("knn1")
        path = tmp_path / "model.json"
        save_model(ModelFile(model, cfg, ""), path)
        doc = json.loads(path.read_text())
        del doc["params"]["points"]
        path.write_text(json.dumps(doc))
        with pytest.raises(CorruptModel):
            load_model(path)

    def test_predictions_use_feature_config_from_file(self, tmp_path):
        # a saved model carries everything needed to featurize new skeletons
        ds, cfg, X, model = self.fitted_model("svm_quadratic")
        path = tmp_path / "model.json"
        save_model(ModelFile(model, cfg, ds.fingerprint), path)
        loaded = load_model(path)
        skel = ds.observations[0].skeleton
        fv = extract(skel, loaded.feature_config)
        assert fv.fingerprint == loaded.model.fingerprint
