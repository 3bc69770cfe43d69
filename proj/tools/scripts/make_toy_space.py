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
"""Generates the enumerable toy search space under data/toy_space/.

Encodings are vectors over arity [4, 4, 4, 4, 4, 4] (4096 architectures). Each
of the 16 proxy features is a positive, smooth function of the encoding: an
exponentiated sum of a shared latent quality term and a feature-specific
additive term, plus small Gaussian noise. FLOPs and Params are scaled to
realistic magnitudes so log(flops) is positive. The `accuracy` column is a
noisy function of the latent quality and is not used by the search.
"""

import argparse
import itertools
import json
import pathlib

import numpy as np

FEATURES = [
    "flops", "params", "jacov", "nwot", "synflow", "snip", "epe_nas", "fisher",
    "grad_norm", "grasp", "l2_norm", "zen", "plain", "zico", "meco", "swap",
]
SCALE = {"flops": 1e7, "params": 1e6, "nwot": 500.0, "synflow": 1e4}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/toy_space")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    arity = [4] * 6
    rng = np.random.default_rng(args.seed)
    latent = rng.normal(0.0, 1.0, size=(len(arity), 4))
    own = rng.normal(0.0, 1.0, size=(len(FEATURES), len(arity), 4))
    coupling = rng.uniform(0.3, 1.0, size=len(FEATURES))

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv = out / "space.csv"
    with csv.open("w", encoding="utf-8") as fh:
        fh.write("arch_id," + ",".join(FEATURES) + ",accuracy\n")
        for enc in itertools.product(*(range(a) for a in arity)):
            q = sum(latent[p, v] for p, v in enumerate(enc))
            cells = []
            for j, name in enumerate(FEATURES):
                mine = sum(own[j, p, v] for p, v in enumerate(enc))
                z = 0.25 * (coupling[j] * q + 0.5 * mine) + rng.normal(0, 0.02)
                cells.append(repr(float(SCALE.get(name, 1.0) * np.exp(z))))
            acc = 70.0 + 3.0 * q + rng.normal(0.0, 0.5)
            fh.write("-".join(map(str, enc)) + "," + ",".join(cells) +
                     f",{float(acc)!r}\n")

    manifest = {"arity": arity, "csv": csv.name, "target_column": "accuracy"}
    (out / "space.json").write_text(json.dumps(manifest, indent=2) + "\n")


if __name__ == "__main__":
    main()
