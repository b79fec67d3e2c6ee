"""Command-line pipeline: synth / train / score / eval / rerank.

Every subcommand is deterministic given its flags (all randomness flows
through explicit seeds) and drops a run manifest next to its outputs, so
a rerun can be audited byte-for-byte.  Exit codes: 0 success, 1 data or
model error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from typing import Sequence

import numpy as np

from . import __version__
from .confidence_model import TrainConfig, load_model, predict_record, save_model, train
from .dataset_io import (
    SplitSpec,
    SynthConfig,
    build_extended,
    group_by_query,
    grouped_split,
    label_records,
    labels_only,
    read_records,
    serialize_record,
    synth_generate,
    write_records,
)
from .errors import InvalidConfig, PoseconfError
from .evaluation import (
    ablation,
    accuracy_at,
    pr_curve_from_scores,
    select_best,
    select_max_inliers,
)
from .features import parse_feature_set
from .plots import line_plot_svg, write_svg
from .pose_metrics import ErrorThreshold


def _write_manifest(
    path: str,
    subcommand: str,
    args: argparse.Namespace,
    inputs: Sequence[str],
    outputs: Sequence[str],
    started: float,
) -> None:
    config = {k: v for k, v in vars(args).items() if k not in ("handler", "subcommand")}
    manifest = {
        "subcommand": subcommand,
        "tool_version": __version__,
        "config": config,
        "inputs": list(inputs),
        "outputs": list(outputs),
        "seed": getattr(args, "seed", None),
        "duration_s": round(time.perf_counter() - started, 6),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_threshold_list(text: str) -> list[ErrorThreshold]:
    """Parse '1.5,10;1.0,10' into thresholds (meters, degrees per entry)."""
    thresholds = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise InvalidConfig(
                f"threshold entry {chunk!r} is not 'meters,degrees'"
            )
        try:
            thresholds.append(ErrorThreshold(float(parts[0]), float(parts[1])))
        except ValueError:
            raise InvalidConfig(f"threshold entry {chunk!r} is not numeric") from None
    if not thresholds:
        raise InvalidConfig("no thresholds given")
    return thresholds


def _parse_float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidConfig(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise InvalidConfig("no values given")
    return values


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config = SynthConfig(
        queries=args.queries,
        candidates_per_query=args.candidates,
        width=args.width,
        height=args.height,
        adversarial_fraction=args.adversarial_fraction,
        junk_fraction=args.junk_fraction,
        include_pv=args.include_pv,
    )
    records = synth_generate(config, args.seed)
    write_records(records, args.out)
    _write_manifest(args.out + ".manifest.json", "synth", args, [], [args.out], started)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    threshold = ErrorThreshold(args.threshold_m, args.threshold_deg)
    feature_set = parse_feature_set(args.features)
    config = TrainConfig(
        learning_rate=args.learning_rate,
        max_epochs=args.epochs,
        tol=args.tol,
        l2=args.l2,
        seed=args.seed,
    )
    records = build_extended(read_records(args.data))
    label_records(records, threshold)  # validate ground truth up front
    train_records, test_records = grouped_split(
        records, SplitSpec(args.split, args.seed)
    )
    labels = labels_only(label_records(train_records, threshold))
    result = train(train_records, labels, feature_set, config)

    outputs = [args.out]
    save_model(result.model, args.out)
    if args.test_out:
        write_records(test_records, args.test_out)
        outputs.append(args.test_out)
    if args.train_out:
        write_records(train_records, args.train_out)
        outputs.append(args.train_out)
    _write_manifest(args.out + ".manifest.json", "train", args, [args.data], outputs, started)
    print(
        f"trained {len(feature_set)}-feature model on {len(train_records)} records "
        f"({len(test_records)} held out); final loss {result.final_loss:.6f} "
        f"after {result.epochs_run} epochs"
    )
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    model = load_model(args.model)
    records = read_records(args.data)
    extras = [{"confidence": predict_record(model, r)} for r in records]
    write_records(records, args.out, extras)
    _write_manifest(
        args.out + ".manifest.json", "score", args, [args.data, args.model], [args.out], started
    )
    print(f"scored {len(records)} records to {args.out}")
    return 0


def _leave_one_out_subsets(feature_set: tuple[str, ...]) -> list[tuple[str, ...]]:
    subsets: list[tuple[str, ...]] = [feature_set]
    if len(feature_set) > 1:
        for name in feature_set:
            subsets.append(tuple(f for f in feature_set if f != name))
    return subsets


def cmd_eval(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    model = load_model(args.model)
    thresholds = _parse_threshold_list(args.thresholds)
    records = read_records(args.data)
    os.makedirs(args.out_dir, exist_ok=True)
    n_queries = len(group_by_query(records))

    if args.best_only:
        selected = []
        for group in group_by_query(records).values():
            scores = [predict_record(model, c) for c in group]
            selected.append(group[select_best(group, scores)])
        records = selected

    scores = np.asarray([predict_record(model, r) for r in records])
    counts = np.asarray([float(r.inlier_count) for r in records])

    rows = []
    labels_by_threshold = []
    for threshold in thresholds:
        labels = labels_only(label_records(records, threshold))
        labels_by_threshold.append(labels)
        n_pos = int(labels.sum())
        if n_pos == 0 or n_pos == len(labels):
            rows.append((threshold, len(labels), n_pos, None, None))
        else:
            rows.append(
                (
                    threshold,
                    len(labels),
                    n_pos,
                    pr_curve_from_scores(scores, labels).auc,
                    pr_curve_from_scores(counts, labels).auc,
                )
            )

    outputs = []
    primary = rows[0]
    model_curve = inliers_curve = None
    if primary[3] is None:
        print(
            "warning: labeling at the primary threshold is single-class; "
            "PR curves skipped",
            file=sys.stderr,
        )
    else:
        labels = labels_by_threshold[0]
        model_curve = pr_curve_from_scores(scores, labels)
        inliers_curve = pr_curve_from_scores(counts, labels)
        curves_csv = os.path.join(args.out_dir, "pr_curves.csv")
        with open(curves_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["curve", "recall", "precision"])
            for name, curve in (("model", model_curve), ("inliers", inliers_curve)):
                for recall, precision in curve.points:
                    writer.writerow([name, repr(recall), repr(precision)])
        curves_svg = os.path.join(args.out_dir, "pr_curves.svg")
        write_svg(
            line_plot_svg(
                [("model", model_curve.points), ("inliers", inliers_curve.points)],
                "Precision-recall", "recall", "precision",
            ),
            curves_svg,
        )
        outputs += [curves_csv, curves_svg]

    thresholds_csv = os.path.join(args.out_dir, "thresholds.csv")
    with open(thresholds_csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["threshold_m", "threshold_deg", "n_records", "n_positive",
             "model_auc", "inliers_auc", "degenerate"]
        )
        for threshold, n, n_pos, model_auc, inliers_auc in rows:
            writer.writerow(
                [
                    repr(threshold.max_translation_m),
                    repr(threshold.max_rotation_deg),
                    n,
                    n_pos,
                    "" if model_auc is None else repr(model_auc),
                    "" if inliers_auc is None else repr(inliers_auc),
                    int(model_auc is None),
                ]
            )
    outputs.append(thresholds_csv)

    ablation_rows = None
    if args.ablate:
        if not args.train_data:
            raise InvalidConfig("--ablate requires --train-data")
        train_records = build_extended(read_records(args.train_data))
        train_labels = labels_only(label_records(train_records, thresholds[0]))
        eval_labels = labels_by_threshold[0]
        subsets = _leave_one_out_subsets(model.feature_set)
        ablation_rows = ablation(
            train_records,
            train_labels,
            records,
            eval_labels,
            subsets,
            params=model.coverage_params(),
        )
        ablation_csv = os.path.join(args.out_dir, "ablation.csv")
        with open(ablation_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["features", "auc"])
            for subset, value in ablation_rows:
                writer.writerow(["+".join(subset), repr(value)])
        outputs.append(ablation_csv)

    report = {
        "n_records": len(records),
        "n_queries": n_queries,
        "best_only": bool(args.best_only),
        "primary_threshold": {
            "translation_m": thresholds[0].max_translation_m,
            "rotation_deg": thresholds[0].max_rotation_deg,
        },
        "model_auc": primary[3],
        "inliers_auc": primary[4],
        "degenerate": primary[3] is None,
        "thresholds": [
            {
                "translation_m": t.max_translation_m,
                "rotation_deg": t.max_rotation_deg,
                "n_records": n,
                "n_positive": n_pos,
                "model_auc": model_auc,
                "inliers_auc": inliers_auc,
                "degenerate": model_auc is None,
            }
            for t, n, n_pos, model_auc, inliers_auc in rows
        ],
        "ablation": None
        if ablation_rows is None
        else [{"features": list(s), "auc": v} for s, v in ablation_rows],
    }
    report_path = os.path.join(args.out_dir, "report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs.append(report_path)

    _write_manifest(
        os.path.join(args.out_dir, "manifest.json"),
        "eval",
        args,
        [args.data, args.model] + ([args.train_data] if args.train_data else []),
        outputs,
        started,
    )
    if primary[3] is not None:
        print(
            f"model AUC {primary[3]:.4f} vs inliers AUC {primary[4]:.4f} "
            f"on {len(records)} records"
        )
    return 0


def cmd_rerank(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    model = load_model(args.model)
    records = read_records(args.data)
    thresholds_m = _parse_float_list(args.thresholds_m)
    os.makedirs(args.out_dir, exist_ok=True)

    model_selected = []
    model_confidence = []
    baseline_selected = []
    for group in group_by_query(records).values():
        scores = [predict_record(model, c) for c in group]
        chosen = select_best(group, scores)
        model_selected.append(group[chosen])
        model_confidence.append(scores[chosen])
        baseline_selected.append(group[select_max_inliers(group)])

    selections_path = os.path.join(args.out_dir, "selections.jsonl")
    with open(selections_path, "w", encoding="utf-8") as fh:
        for record, confidence in zip(model_selected, model_confidence):
            obj = serialize_record(record, {"confidence": confidence})
            fh.write(json.dumps(obj, separators=(",", ":")) + "\n")

    accuracy_rows = []
    for meters in thresholds_m:
        threshold = ErrorThreshold(meters, args.threshold_deg)
        accuracy_rows.append(
            (
                meters,
                accuracy_at(model_selected, threshold),
                accuracy_at(baseline_selected, threshold),
            )
        )
    accuracy_csv = os.path.join(args.out_dir, "accuracy.csv")
    with open(accuracy_csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold_m", "model_accuracy", "max_inliers_accuracy"])
        for meters, ours, baseline in accuracy_rows:
            writer.writerow([repr(meters), repr(ours), repr(baseline)])
    accuracy_svg = os.path.join(args.out_dir, "accuracy.svg")
    write_svg(
        line_plot_svg(
            [
                ("model", [(m, a) for m, a, _ in accuracy_rows]),
                ("max-inliers", [(m, b) for m, _, b in accuracy_rows]),
            ],
            "Selection accuracy vs threshold",
            "translation threshold (m)",
            "accuracy",
        ),
        accuracy_svg,
    )

    _write_manifest(
        os.path.join(args.out_dir, "manifest.json"),
        "rerank",
        args,
        [args.data, args.model],
        [selections_path, accuracy_csv, accuracy_svg],
        started,
    )
    print(f"reranked {len(model_selected)} queries")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poseconf",
        description="Confidence scoring and ranking evaluation for estimated camera poses.",
    )
    parser.add_argument("--version", action="version", version=f"poseconf {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("synth", help="generate a synthetic benchmark record file")
    p.add_argument("--queries", type=int, default=200)
    p.add_argument("--candidates", type=int, default=10, help="candidates per query")
    p.add_argument("--width", type=int, default=320)
    p.add_argument("--height", type=int, default=240)
    p.add_argument(
        "--adversarial-fraction",
        type=float,
        default=0.35,
        help="fraction of incorrect poses given many inliers in a tiny area",
    )
    p.add_argument(
        "--junk-fraction",
        type=float,
        default=0.0,
        help="fraction of records left below the correspondence minimum",
    )
    p.add_argument("--include-pv", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("train", help="fit a confidence model on labeled records")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--test-out", default=None, help="write the held-out split here")
    p.add_argument("--train-out", default=None, help="write the training split here")
    p.add_argument("--threshold-m", type=float, default=1.0)
    p.add_argument("--threshold-deg", type=float, default=10.0)
    p.add_argument("--split", type=float, default=0.75, help="train fraction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--features",
        default="inliers,qcov,dbcov",
        help="comma list: inliers, qcov, dbcov, pv",
    )
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=5000)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--l2", type=float, default=0.0)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("score", help="append model confidence to each record")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_score)

    p = sub.add_parser("eval", help="PR curves, AUC tables, and ablation")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument(
        "--thresholds",
        default="1.0,10",
        help="semicolon list of 'meters,degrees'; first entry drives the PR curves",
    )
    p.add_argument("--ablate", action="store_true", help="leave-one-out feature table")
    p.add_argument("--train-data", default=None, help="training records for --ablate")
    p.add_argument(
        "--best-only",
        action="store_true",
        help="evaluate only the model-selected best candidate per query",
    )
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("rerank", help="pick the best candidate per query")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument(
        "--thresholds-m",
        default="0.25,0.5,0.75,1.0,1.25,1.5,1.75,2.0",
        help="comma list of translation thresholds for the accuracy table",
    )
    p.add_argument("--threshold-deg", type=float, default=10.0)
    p.set_defaults(handler=cmd_rerank)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the usage message
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.handler(args)
    except InvalidConfig as exc:
        print(f"error: InvalidConfig: {exc}", file=sys.stderr)
        return 2
    except PoseconfError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
