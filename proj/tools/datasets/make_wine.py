#!/usr/bin/env python3
"""Export the UCI wine dataset (178 instances, 13 continuous features,
3 classes) from scikit-learn's bundled copy."""

import argparse
import os

from sklearn.datasets import load_wine


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="data")
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    wine = load_wine()
    names = [n.replace(" ", "_").replace("/", "_") for n in wine.feature_names]

    csv_path = os.path.join(args.out_dir, "wine.csv")
    with open(csv_path, "w") as f:
        f.write(",".join(names + ["class"]) + "\n")
        for row, y in zip(wine.data, wine.target):
            vals = [repr(float(v)) for v in row]
            f.write(",".join(vals + [str(wine.target_names[y])]) + "\n")

    schema_path = os.path.join(args.out_dir, "wine.schema")
    with open(schema_path, "w") as f:
        for n in names:
            f.write(f"{n},continuous\n")
        f.write("class,label\n")

    print(f"wrote {csv_path} ({len(wine.data)} rows)")


if __name__ == "__main__":
    main()
