import json

import numpy as np
import pytest

from posturelab.cli import run
from posturelab.dataset import SynthSpec, save_dataset, synth_generate


@pytest.fixture
def dataset_path(tmp_path):
    path = tmp_path / "ds.jsonl"
    assert run(["synth", "--seed", "7", "--per-class", "20", "--out", str(path)]) == 0
    return path


class TestSynthCommand:
    def test_writes_expected_record_count(self, tmp_path):
        out = tmp_path / "ds.jsonl"
        code = run(["synth", "--seed", "42", "--per-class", "4", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 1 + 20  # header + records
        header = json.loads(lines[0])
        assert header["generator"]["seed"] == 42

    def test_full_protocol_size(self, tmp_path):
        out = tmp_path / "full.jsonl"
        code = run(["synth", "--seed", "42", "--per-class", "208", "--out", str(out)])
        assert code == 0
        assert len(out.read_text().splitlines()) == 1 + 1040

    def test_same_seed_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        run(["synth", "--seed", "5", "--per-class", "3", "--out", str(a)])
        run(["synth", "--seed", "5", "--per-class", "3", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_seed_env_var_default(self, tmp_path, monkeypatch):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        monkeypatch.setenv("POSTURELAB_SEED", "31")
        run(["synth", "--per-class", "3", "--out", str(a)])
        monkeypatch.delenv("POSTURELAB_SEED")
        run(["synth", "--seed", "31", "--per-class", "3", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestUsageErrors:
    def test_unknown_flag_is_usage_error(self, capsys):
        assert run(["synth", "--bogus", "1", "--out", "x"]) == 1
        assert "usage error" in capsys.readouterr().err

    def test_unknown_command_is_usage_error(self):
        assert run(["transmogrify"]) == 1

    def test_missing_required_flag(self):
        assert run(["synth"]) == 1

    def test_help_exits_zero_and_lists_commands(self, capsys):
        assert run(["--help"]) == 0
        out = capsys.readouterr().out
        for cmd in ("synth", "featurize", "train", "predict", "evaluate", "grid"):
            assert cmd in out

    def test_subcommand_help_lists_flags(self, capsys):
        assert run(["evaluate", "--help"]) == 0
        out = capsys.readouterr().out
        for flag in ("--data", "--classifier", "--features", "--seed",
                     "--train-fraction", "--stratify", "--format", "--out"):
            assert flag in out


class TestDataErrors:
    def test_missing_dataset_is_exit_2(self, capsys):
        assert run(["train", "--data", "nope.jsonl", "--model-out", "m.json"]) == 2
        assert "data error" in capsys.readouterr().err

    def test_corrupt_dataset_is_exit_2(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("not a header\n")
        assert run(["featurize", "--data", str(bad), "--out", "-"]) == 2

    def test_degenerate_skeleton_is_exit_3(self, tmp_path):
        # all joints coincident: the distance normalizer cannot be formed
        ds = synth_generate(SynthSpec(seed=1, per_class=2))
        path = tmp_path / "degenerate.jsonl"
        save_dataset(ds, path)
        lines = path.read_text().splitlines()
        rec = json.loads(lines[1])
        for name in rec["joints"]:
            rec["joints"][name] = [0.0, 0.0, 0.0]
        lines[1] = json.dumps(rec)
        path.write_text("\n".join(lines) + "\n")
        assert run(["featurize", "--data", str(path), "--out", "-"]) == 3


class TestPipeline:
    def test_train_then_predict(self, tmp_path, dataset_path, capsys):
        model_path = tmp_path / "model.json"
        code = run([
            "train", "--data", str(dataset_path), "--model-out", str(model_path),
            "--classifier", "svm_quadratic", "--seed", "3",
        ])
        assert code == 0
        preds_path = tmp_path / "preds.jsonl"
        code = run([
            "predict", "--model", str(model_path), "--data", str(dataset_path),
            "--out", str(preds_path),
        ])
        assert code == 0
        preds = [json.loads(line) for line in preds_path.read_text().splitlines()]
        assert len(preds) == 100
        truth = [json.loads(l)["label"] for l in dataset_path.read_text().splitlines()[1:]]
        acc = np.mean([p["label"] == t for p, t in zip(preds, truth)])
        assert acc > 0.95  # resubstitution on clean synthetic data

    def test_featurize_emits_vectors(self, dataset_path, capsys):
        assert run(["featurize", "--data", str(dataset_path), "--features",
                    "distances", "--out", "-"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 100
        first = json.loads(lines[0])
        assert len(first["values"]) == 300
        assert first["label"] == "Standing"

    def test_evaluate_text_report(self, dataset_path, capsys):
        code = run([
            "evaluate", "--data", str(dataset_path), "--classifier", "knn1",
            "--features", "combined", "--seed", "9", "--out", "-",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "overall accuracy" in out
        assert "Standing" in out

    def test_evaluate_reports_byte_identical_modulo_timings(self, tmp_path, dataset_path):
        outs = []
        for name in ("r1.json", "r2.json"):
            path = tmp_path / name
            assert run([
                "evaluate", "--data", str(dataset_path), "--classifier",
                "svm_linear", "--format", "json", "--seed", "4",
                "--out", str(path),
            ]) == 0
            doc = json.loads(path.read_text())
            doc.pop("timings_ms")
            outs.append(json.dumps(doc, sort_keys=True))
        assert outs[0] == outs[1]

    def test_grid_text_table(self, dataset_path, capsys):
        code = run([
            "grid", "--data", str(dataset_path), "--seed", "2",
            "--classifiers", "lda,knn1", "--out", "-",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "classifier" in out
        assert "lda" in out and "knn1" in out
        assert "combined" in out

    def test_grid_json_format(self, dataset_path, capsys):
        code = run([
            "grid", "--data", str(dataset_path), "--seed", "2",
            "--classifiers", "lda,knn1", "--format", "json", "--out", "-",
        ])
        assert code == 0
        docs = json.loads(capsys.readouterr().out)
        assert len(docs) == 6  # 2 classifiers x 3 feature sets
        assert {d["classifier"]["name"] for d in docs} == {"lda", "knn1"}
        assert {d["features"]["set"] for d in docs} == {"angles", "distances", "combined"}

    def test_config_file_supplies_defaults(self, tmp_path, dataset_path, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"classifier": "knn1", "features": "distances"}))
        code = run([
            "--config", str(config), "evaluate", "--data", str(dataset_path),
            "--seed", "2", "--format", "json", "--out", "-",
        ])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["classifier"]["name"] == "knn1"
        assert doc["features"]["set"] == "distances"

    def test_flags_override_config(self, tmp_path, dataset_path, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"classifier": "knn1"}))
        code = run([
            "--config", str(config), "evaluate", "--data", str(dataset_path),
            "--classifier", "lda", "--seed", "2", "--format", "json", "--out", "-",
        ])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["classifier"]["name"] == "lda"
