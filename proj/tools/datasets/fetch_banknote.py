#!/usr/bin/env python3
"""Fetch the UCI banknote authentication dataset (1372 instances,
4 continuous features, 2 classes) and write CSV + schema.

Needs network access to archive.ics.uci.edu.
"""

import argparse
import os
import urllib.request

URL = (
    "https://archive.ics.uci.edu/ml/machine-learning-databases/00267/"
    "data_banknote_authentication.txt"
)

COLUMNS = ["variance", "skewness", "curtosis", "entropy"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="data")
    ap.add_argument("--url", default=URL)
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    raw = urllib.request.urlopen(args.url, timeout=60).read().decode("utf-8")
    rows = [line.strip() for line in raw.splitlines() if line.strip()]
    assert len(rows) == 1372, f"expected 1372 rows, got {len(rows)}"

    csv_path = os.path.join(args.out_dir, "banknote.csv")
    with open(csv_path, "w") as f:
        f.write(",".join(COLUMNS + ["class"]) + "\n")
        for line in rows:
            *feats, y = line.split(",")
            label = "genuine" if y == "0" else "forged"
            f.write(",".join(feats + [label]) + "\n")

    schema_path = os.path.join(args.out_dir, "banknote.schema")
    with open(schema_path, "w") as f:
        for n in COLUMNS:
            f.write(f"{n},continuous\n")
        f.write("class,label\n")

    print(f"wrote {csv_path} ({len(rows)} rows)")


if __name__ == "__main__":
    main()
