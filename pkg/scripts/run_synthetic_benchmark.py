#!/usr/bin/env python3
"""Drive the full pipeline on a seeded synthetic benchmark.

Generates records, trains the confidence model on a grouped split,
evaluates PR-AUC with the leave-one-out ablation table, and reranks the
held-out queries.  Every artifact lands under --out-dir; rerun with the
same seed and the data files come back byte-identical.
"""

import argparse
import json
import os
import sys

from poseconf.cli import main as cli_main


def run(argv):
    print("$ poseconf " + " ".join(argv))
    code = cli_main(argv)
    if code != 0:
        sys.exit(code)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="benchmark_out")
    parser.add_argument("--queries", type=int, default=200)
    parser.add_argument("--candidates", type=int, default=10)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    root = args.out_dir
    os.makedirs(root, exist_ok=True)
    data = os.path.join(root, "bench.jsonl")
    model = os.path.join(root, "model.json")
    test_split = os.path.join(root, "test.jsonl")

    run(["synth", "--queries", str(args.queries), "--candidates",
         str(args.candidates), "--seed", str(args.seed), "--out", data])
    run(["train", "--data", data, "--out", model, "--seed", str(args.seed),
         "--test-out", test_split,
         "--train-out", os.path.join(root, "train.jsonl")])
    run(["eval", "--data", test_split, "--model", model,
         "--out-dir", os.path.join(root, "eval"),
         "--ablate", "--train-data", os.path.join(root, "train.jsonl")])
    run(["rerank", "--data", test_split, "--model", model,
         "--out-dir", os.path.join(root, "rerank")])

    with open(os.path.join(root, "eval", "report.json")) as fh:
        report = json.load(fh)
    print()
    print(f"held-out records : {report['n_records']}")
    print(f"model PR-AUC     : {report['model_auc']:.4f}")
    print(f"inliers PR-AUC   : {report['inliers_auc']:.4f}")
    print("ablation:")
    for row in report["ablation"]:
        print(f"  {'+'.join(row['features']):<55s} {row['auc']:.4f}")
    print(f"artifacts in {root}/")


if __name__ == "__main__":
    main()
