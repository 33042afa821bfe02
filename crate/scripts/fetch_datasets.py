#!/usr/bin/env python3
"""Fetch the UCI Adult and MAGIC Gamma Telescope tables into ./data as clean CSV.

Both tables are shipped inside wheels on PyPI, so only a package index is
needed: Adult comes from `responsibly` and MAGIC from `keel-ds`.

    python3 scripts/fetch_datasets.py [--out data]
"""
import argparse
import glob
import os
import subprocess
import sys
import tempfile
import zipfile

ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education_num", "marital_status",
    "occupation", "relationship", "race", "sex", "capital_gain", "capital_loss",
    "hours_per_week", "native_country", "income",
]
MAGIC_COLUMNS = [
    "fLength", "fWidth", "fSize", "fConc", "fConc1", "fAsym", "fM3Long",
    "fM3Trans", "fAlpha", "fDist", "class",
]


def wheel(pkg, version, tmp):
    subprocess.check_call(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", tmp, f"{pkg}=={version}"]
    )
    name = pkg.replace("-", "_")
    return zipfile.ZipFile(glob.glob(os.path.join(tmp, f"{name}-{version}-*.whl"))[0])


def adult_rows(text):
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("|"):
            continue
        fields = [f.strip() for f in line.split(",")]
        fields[-1] = fields[-1].rstrip(".")
        yield fields


def write_csv(path, header, rows):
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(row) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        z = wheel("responsibly", "0.1.2", tmp)
        for src, dst in [("adult.data", "adult_train.csv"), ("adult.test", "adult_test.csv")]:
            text = z.read(f"responsibly/dataset/adult/{src}").decode()
            write_csv(os.path.join(args.out, dst), ADULT_COLUMNS, adult_rows(text))
        z = wheel("keel-ds", "0.2.5", tmp)
        text = z.read("keel_ds/data/balanced/raw/magic.dat").decode()
        rows = [l.strip().split(",") for l in text.splitlines() if l.strip() and not l.startswith("@")]
        write_csv(os.path.join(args.out, "magic.csv"), MAGIC_COLUMNS, rows)
    print("wrote", sorted(os.listdir(args.out)))


if __name__ == "__main__":
    main()
