#!/usr/bin/env python3
# Copyright 2026 The zc-evolve Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Generates the planted-formula dataset under data/synthetic/.

Three pseudo-problems, five features x1..x5, 1000 rows each. The target is a
strictly increasing transform of x1 * (x2 + sqrt(x3)) plus noise that is
bounded by half the smallest gap between consecutive sorted targets, so the
noise never changes the ranking. x4 and x5 are distractors.
"""

import argparse
import json
import pathlib

import numpy as np

FEATURES = ["x1", "x2", "x3", "x4", "x5"]

# (problem id, feature ranges, monotone transform)
PROBLEMS = [
    ("synth-a", (0.5, 5.0), np.log),
    ("synth-b", (0.1, 10.0), lambda f: 10.0 * np.sqrt(f)),
    ("synth-c", (1.0, 3.0), lambda f: -1.0 / f),
]


def planted(x):
    return x[:, 0] * (x[:, 1] + np.sqrt(x[:, 2]))


def make_problem(rng, rows, lo_hi, transform):
    lo, hi = lo_hi
    x = rng.uniform(lo, hi, size=(rows, len(FEATURES)))
    clean = transform(planted(x))
    order = np.argsort(clean)
    gaps = np.diff(clean[order])
    bound = 0.49 * gaps.min()
    noise = rng.uniform(-bound, bound, size=rows)
    return x, clean + noise


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/synthetic")
    ap.add_argument("--rows", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=20240531)
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    manifest = {"feature_names": FEATURES, "problems": []}
    for pid, lo_hi, transform in PROBLEMS:
        x, y = make_problem(rng, args.rows, lo_hi, transform)
        path = out / f"{pid}.csv"
        with path.open("w", encoding="utf-8") as fh:
            fh.write("arch_id," + ",".join(FEATURES) + ",target\n")
            for i in range(args.rows):
                cells = [repr(float(v)) for v in x[i]] + [repr(float(y[i]))]
                fh.write(f"{pid}-{i:04d}," + ",".join(cells) + "\n")
        manifest["problems"].append(
            {"id": pid, "csv": path.name, "target_column": "target"})

    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


if __name__ == "__main__":
    main()
