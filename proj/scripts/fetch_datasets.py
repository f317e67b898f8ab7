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
"""Rebuild the CSV files under data/.

Spambase and Letter-recognition are taken from the KEEL copies shipped in the
`keel_ds` wheel (fetched with pip). Waveform is regenerated with
make_waveform.py. Credit-card ("default of credit card clients") has to be
downloaded from the UCI repository; pass --credit-card to try.
"""
import argparse
import csv
import glob
import io
import os
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")

LETTER_NAMES = ["x-box", "y-box", "width", "high", "onpix", "x-bar", "y-bar", "x2bar",
                "y2bar", "xybar", "x2ybr", "xy2br", "x-ege", "xegvy", "y-ege", "yegvx"]
CREDIT_URL = ("https://archive.ics.uci.edu/ml/machine-learning-databases/00350/"
              "default%20of%20credit%20card%20clients.xls")


def keel_rows(wheel, name):
    z = zipfile.ZipFile(wheel)
    text = z.read(f"keel_ds/data/balanced/raw/{name}.dat").decode()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        yield [c.strip() for c in line.split(",")]


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        n = 0
        for r in rows:
            w.writerow(r)
            n += 1
    print(f"wrote {path}: {n} rows")


def fetch_keel():
    tmp = tempfile.mkdtemp()
    subprocess.check_call([sys.executable, "-m", "pip", "download", "--no-deps",
                           "--timeout", "120", "-d", tmp, "keel_ds==0.2.5"])
    wheel = glob.glob(os.path.join(tmp, "keel_ds-*.whl"))[0]
    write_csv(os.path.join(DATA, "spambase.csv"),
              [f"x{i + 1}" for i in range(57)] + ["class"], keel_rows(wheel, "spambase"))
    write_csv(os.path.join(DATA, "letter.csv"), LETTER_NAMES + ["lettr"],
              keel_rows(wheel, "letter"))


def fetch_credit_card():
    import pandas as pd  # needs xlrd for the UCI .xls
    raw = urllib.request.urlopen(CREDIT_URL, timeout=60).read()
    df = pd.read_excel(io.BytesIO(raw), header=1)
    df = df.drop(columns=["ID"]).rename(columns={"default payment next month": "default"})
    df.to_csv(os.path.join(DATA, "credit_card.csv"), index=False)
    print(f"wrote credit_card.csv: {len(df)} rows")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--credit-card", action="store_true")
    args = ap.parse_args()
    os.makedirs(DATA, exist_ok=True)
    fetch_keel()
    subprocess.check_call([sys.executable, os.path.join(HERE, "make_waveform.py")])
    if args.credit_card:
        fetch_credit_card()


if __name__ == "__main__":
    main()
