#!/usr/bin/env python3
# Copyright 2026 The fedtrees Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Breiman's waveform generator (UCI "Waveform Database Generator, version 1").

Three triangular base waves over 21 positions; each class is a random convex
combination of two of them plus unit Gaussian noise. 5000 rows, 3 balanced
classes, values rounded to two decimals like the UCI file.
"""
import argparse
import csv
import os

import numpy as np


def base_waves():
    i = np.arange(1, 22)
    h1 = np.maximum(6 - np.abs(i - 11), 0)
    h2 = np.maximum(6 - np.abs(i - 15), 0)
    h3 = np.maximum(6 - np.abs(i - 7), 0)
    return h1, h2, h3


def generate(n, seed):
    rng = np.random.default_rng(seed)
    h1, h2, h3 = base_waves()
    pairs = [(h1, h2), (h1, h3), (h2, h3)]
    labels = rng.integers(0, 3, size=n)
    u = rng.uniform(0.0, 1.0, size=n)
    noise = rng.standard_normal((n, 21))
    x = np.empty((n, 21))
    for k in range(n):
        a, b = pairs[labels[k]]
        x[k] = u[k] * a + (1 - u[k]) * b + noise[k]
    return np.round(x, 2), labels


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=20190101)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data", "waveform.csv"))
    args = ap.parse_args()
    x, y = generate(args.rows, args.seed)
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(21)] + ["class"])
        for row, label in zip(x, y):
            w.writerow([f"{v:.2f}" for v in row] + [str(label)])
    print(f"wrote {args.out}: {args.rows} rows")


if __name__ == "__main__":
    main()
