"""Command-line entry point: synth, featurize, train, predict, evaluate, grid.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Diagnostics go to stderr; results go to files or stdout. A config file
(--config, JSON) may supply defaults; explicit flags take precedence, and the
POSTURELAB_SEED environment variable supplies the default seed.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .classifiers import (
    CLASSIFIER_NAMES,
    ClassifierSpec,
    OvoSvmModel,
    predict_batch,
    train_classifier,
)
from .dataset import (
    LabeledDataset,
    ModelFile,
    SynthSpec,
    load_dataset,
    load_model,
    save_dataset,
    save_model,
    synth_generate,
)
from .errors import DataError, NonConvergence, NumericError
from .evaluation import (
    GRID_CLASSIFIERS,
    SplitSpec,
    evaluate,
    evaluate_grid,
    render_grid,
    render_report,
)
from .features import FeatureConfig, extract_matrix
from .skeleton import PostureLabel

SEED_ENV_VAR = "POSTURELAB_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="posturelab", description=__doc__)
    parser.add_argument("--config", help="JSON file with default flag values")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_seed(p):
        p.add_argument("--seed", type=int, default=None,
                       help=f"master seed (default: ${SEED_ENV_VAR} or 0)")

    def add_features(p):
        p.add_argument("--features", choices=("distances", "angles", "combined"),
                       default=None, help="feature set (default combined)")
        p.add_argument("--angle-mode", choices=("adjacent", "all_triples"),
                       default=None, help="angle enumeration (default adjacent)")

    def add_classifier(p):
        p.add_argument("--classifier", choices=CLASSIFIER_NAMES, default=None,
                       help="classifier (default svm_quadratic)")
        p.add_argument("--c", type=float, default=None, help="SVM box constraint")
        p.add_argument("--tol", type=float, default=None, help="SMO KKT tolerance")
        p.add_argument("--kernel-scale", type=float, default=None,
                       help="polynomial kernel scale (default: 4*sqrt(n_features))")
        p.add_argument("--max-passes", type=int, default=None,
                       help="SMO clean-pass budget")

    def add_split(p):
        p.add_argument("--train-fraction", type=float, default=None,
                       help="train fraction (default 0.8)")
        p.add_argument("--stratify", choices=("label", "label_participant"),
                       default=None, help="stratification mode (default label)")
        p.add_argument("--resubstitution", action="store_true",
                       help="train and test on the full dataset (oracle mode)")

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    add_seed(p)
    p.add_argument("--per-class", type=int, default=None, help="records per class")
    p.add_argument("--noise", type=float, default=None, help="joint noise stddev (m)")
    p.add_argument("--scale-min", type=float, default=None)
    p.add_argument("--scale-max", type=float, default=None)
    p.add_argument("--orientations", default=None,
                   help="comma-separated degrees, e.g. 0,90,180,270")
    p.add_argument("--distances", default=None,
                   help="comma-separated meters, e.g. 1,2,3,4")
    p.add_argument("--participants", type=int, default=None)
    p.add_argument("--out", required=True, help="output dataset path")

    p = sub.add_parser("featurize", help="extract feature vectors to JSON lines")
    add_features(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="-", help="output path or - for stdout")

    p = sub.add_parser("train", help="fit a classifier on a full dataset")
    add_seed(p)
    add_features(p)
    add_classifier(p)
    p.add_argument("--data", required=True)
    p.add_argument("--model-out", required=True)
    p.add_argument("--allow-nonconverged", action="store_true",
                   help="save the model even if SMO left KKT violations")

    p = sub.add_parser("predict", help="predict labels with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="-")

    p = sub.add_parser("evaluate", help="split, fit, score, and report")
    add_seed(p)
    add_features(p)
    add_classifier(p)
    add_split(p)
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=("text", "csv", "json"), default=None)
    p.add_argument("--out", default="-")

    p = sub.add_parser("grid", help="classifier-by-featureset accuracy grid")
    add_seed(p)
    add_classifier(p)
    add_split(p)
    p.add_argument("--angle-mode", choices=("adjacent", "all_triples"), default=None)
    p.add_argument("--classifiers", default=None,
                   help=f"comma-separated subset of {','.join(CLASSIFIER_NAMES)}")
    p.add_argument("--format", choices=("text", "json"), default=None)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="-")
    return parser


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        config = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise DataError(f"config file {path}: {e.msg}") from None
    if not isinstance(config, dict):
        raise DataError(f"config file {path}: expected a JSON object")
    return config


class _Resolver:
    """Flag value if given, else config-file value, else the builtin default."""

    def __init__(self, args: argparse.Namespace, config: dict):
        self.args = args
        self.config = config

    def get(self, key: str, default):
        value = getattr(self.args, key.replace("-", "_"), None)
        if value is not None:
            return value
        if key in self.config:
            return self.config[key]
        return default

    def seed(self) -> int:
        env = os.environ.get(SEED_ENV_VAR)
        return int(self.get("seed", int(env) if env else 0))


def _write_out(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _parse_number_list(raw) -> tuple[float, ...]:
    if isinstance(raw, (list, tuple)):
        return tuple(float(v) for v in raw)
    try:
        return tuple(float(v) for v in str(raw).split(",") if v.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {raw!r}") from None


def _feature_config(r: _Resolver) -> FeatureConfig:
    return FeatureConfig.from_name(
        r.get("features", "combined"), r.get("angle-mode", "adjacent")
    )


def _classifier_spec(r: _Resolver) -> ClassifierSpec:
    scale = r.get("kernel-scale", None)
    return ClassifierSpec(
        name=r.get("classifier", "svm_quadratic"),
        c=float(r.get("c", 1.0)),
        tol=float(r.get("tol", 1e-3)),
        kernel_scale=None if scale is None else float(scale),
        max_passes=int(r.get("max-passes", 10)),
        seed=r.seed(),
    )


def _split_spec(r: _Resolver) -> SplitSpec:
    return SplitSpec(
        train_fraction=float(r.get("train-fraction", 0.8)),
        seed=r.seed(),
        stratify_by=r.get("stratify", "label"),
        resubstitution=bool(getattr(r.args, "resubstitution", False)),
    )


def _load_data(path: str) -> LabeledDataset:
    if not Path(path).exists():
        raise DataError(f"dataset file not found: {path}")
    return load_dataset(path)


def _cmd_synth(r: _Resolver) -> int:
    spec = SynthSpec(
        seed=r.seed(),
        per_class=int(r.get("per-class", 208)),
        orientations_deg=_parse_number_list(r.get("orientations", "0,90,180,270")),
        distances_m=_parse_number_list(r.get("distances", "1,2,3,4")),
        noise_std_m=float(r.get("noise", 0.02)),
        scale_range=(float(r.get("scale-min", 0.85)), float(r.get("scale-max", 1.15))),
        participants=int(r.get("participants", 13)),
    )
    ds = synth_generate(spec)
    save_dataset(ds, r.args.out, generator=spec.to_dict())
    print(
        f"wrote {len(ds)} records ({spec.per_class} per class) to {r.args.out} "
        f"[fingerprint {ds.fingerprint}]",
        file=sys.stderr,
    )
    return 0


def _cmd_featurize(r: _Resolver) -> int:
    ds = _load_data(r.args.data)
    cfg = _feature_config(r)
    X, fingerprint = extract_matrix(ds.skeletons(), cfg)
    lines = []
    for i, obs in enumerate(ds.observations):
        lines.append(json.dumps({
            "index": i,
            "label": obs.label.name if obs.label is not None else None,
            "fingerprint": fingerprint,
            "values": [float(v) for v in X[i]],
        }, sort_keys=True))
    _write_out(r.args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_train(r: _Resolver) -> int:
    ds = _load_data(r.args.data)
    cfg = _feature_config(r)
    spec = _classifier_spec(r)
    X, fingerprint = extract_matrix(ds.skeletons(), cfg)
    model = train_classifier(X, ds.label_indices(), spec, fingerprint)
    if isinstance(model, OvoSvmModel) and not model.converged:
        bad = sum(1 for m in model.machines if not m.converged)
        if not r.args.allow_nonconverged:
            raise NonConvergence(
                f"{bad} of {len(model.machines)} binary SVMs left KKT violations; "
                "re-run with --allow-nonconverged to save anyway"
            )
        print(f"warning: {bad} binary SVMs not converged", file=sys.stderr)
    save_model(ModelFile(model, cfg, ds.fingerprint), r.args.model_out)
    print(f"wrote {spec.name} model to {r.args.model_out}", file=sys.stderr)
    return 0


def _cmd_predict(r: _Resolver) -> int:
    if not Path(r.args.model).exists():
        raise DataError(f"model file not found: {r.args.model}")
    mf = load_model(r.args.model)
    ds = _load_data(r.args.data)
    X, fingerprint = extract_matrix(ds.skeletons(), mf.feature_config)
    if fingerprint != mf.model.fingerprint:
        raise DataError(
            f"feature fingerprint {fingerprint} does not match model "
            f"fingerprint {mf.model.fingerprint}"
        )
    pred = predict_batch(mf.model, X)
    lines = [
        json.dumps(
            {"index": i, "label": PostureLabel(int(p)).name}, sort_keys=True
        )
        for i, p in enumerate(pred)
    ]
    _write_out(r.args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_evaluate(r: _Resolver) -> int:
    ds = _load_data(r.args.data)
    report = evaluate(ds, _feature_config(r), _classifier_spec(r), _split_spec(r))
    _write_out(r.args.out, render_report(report, r.get("format", "text")))
    return 0


def _cmd_grid(r: _Resolver) -> int:
    ds = _load_data(r.args.data)
    names = r.get("classifiers", None)
    classifiers = (
        tuple(n.strip() for n in names.split(",") if n.strip())
        if names
        else GRID_CLASSIFIERS
    )
    for name in classifiers:
        if name not in CLASSIFIER_NAMES:
            raise UsageError(f"unknown classifier {name!r}")
    reports = evaluate_grid(
        ds,
        _classifier_spec(r),
        _split_spec(r),
        classifiers=classifiers,
        angle_mode=r.get("angle-mode", "adjacent"),
    )
    if r.get("format", "text") == "json":
        docs = [rep.to_dict() for rep in reports]
        _write_out(r.args.out, json.dumps(docs, sort_keys=True) + "\n")
    else:
        _write_out(r.args.out, render_grid(reports))
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "featurize": _cmd_featurize,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "grid": _cmd_grid,
}


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        config = _load_config(args.config)
        return _COMMANDS[args.command](_Resolver(args, config))
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:  # argparse --help
        return 0 if (e.code or 0) == 0 else 1
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
