#!/usr/bin/env python3
"""Materialize the public benchmark datasets as plain CSV files under data/.

Sources, in order of preference:
  heart_disease  UCI Cleveland heart disease (303 x 13). Copied from the data
                 file bundled in the Orange3 wheel, or downloaded from UCI.
  breast_cancer  UCI Wisconsin diagnostic breast cancer (569 x 30). Copied
                 from the copy bundled with scikit-learn.
  adult          UCI adult income (32561 x 14). Copied from the data file
                 bundled in the `responsibly` wheel, or downloaded from UCI.

Wheels are fetched with `pip download --no-deps` into a temporary directory;
nothing is installed. Existing files are left alone unless --force is given.
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

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education_num",
    "marital_status", "occupation", "relationship", "race", "sex",
    "capital_gain", "capital_loss", "hours_per_week", "native_country",
    "income",
]

HEART_COLUMNS = [
    "age", "sex", "chest_pain", "rest_sbp", "cholesterol", "fasting_bs",
    "rest_ecg", "max_hr", "exercise_angina", "st_depression", "st_slope",
    "major_vessels", "thal", "disease",
]


WHEEL_DIRS = []


def pip_wheel_member(package, member_suffix, workdir):
    wheels = []
    for d in WHEEL_DIRS:
        wheels += glob.glob(os.path.join(d, f"{package}-*.whl"))
    if not wheels:
        for attempt in range(3):
            result = subprocess.run(
                [sys.executable, "-m", "pip", "download", "--no-deps", "--quiet",
                 "--only-binary=:all:", "-d", workdir, package])
            if result.returncode == 0:
                break
        wheels = glob.glob(os.path.join(workdir, "*.whl"))
    for wheel in wheels:
        with zipfile.ZipFile(wheel) as z:
            for name in z.namelist():
                if name.endswith(member_suffix):
                    return z.read(name).decode("utf-8")
    raise FileNotFoundError(f"{member_suffix} not found in {package} wheel")


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def heart_from_orange(text):
    lines = text.splitlines()
    # Orange .tab: names, types, flags, then data.
    rows = []
    for line in lines[3:]:
        if not line.strip():
            continue
        cells = [c.strip() for c in line.split("\t")]
        rows.append(["" if c in ("?", "") else c for c in cells])
    return rows


def heart_from_uci(text):
    rows = []
    for line in text.splitlines():
        if not line.strip():
            continue
        cells = [c.strip() for c in line.split(",")]
        cells = ["" if c == "?" else c for c in cells]
        cells[-1] = "0" if cells[-1] == "0" else "1"
        rows.append(cells)
    return rows


def fetch_heart(out, workdir):
    try:
        text = pip_wheel_member("orange3", "datasets/heart_disease.tab", workdir)
        rows = heart_from_orange(text)
    except Exception as exc:  # noqa: BLE001
        print(f"orange3 wheel unavailable ({exc}); trying UCI", file=sys.stderr)
        with urllib.request.urlopen(f"{UCI}/heart-disease/processed.cleveland.data") as r:
            rows = heart_from_uci(r.read().decode("utf-8"))
    write_csv(out, HEART_COLUMNS, rows)


def fetch_breast(out):
    from sklearn.datasets import load_breast_cancer

    data = load_breast_cancer()
    names = [n.replace(" ", "_") for n in data.feature_names]
    rows = []
    for x, t in zip(data.data, data.target):
        # sklearn encodes malignant as 0, benign as 1.
        rows.append([repr(float(v)) for v in x] + ["benign" if t == 1 else "malignant"])
    write_csv(out, names + ["diagnosis"], rows)


def fetch_adult(out, workdir):
    try:
        text = pip_wheel_member("responsibly", "dataset/adult/adult.data", workdir)
    except Exception as exc:  # noqa: BLE001
        print(f"responsibly wheel unavailable ({exc}); trying UCI", file=sys.stderr)
        with urllib.request.urlopen(f"{UCI}/adult/adult.data") as r:
            text = r.read().decode("utf-8")
    rows = []
    for rec in csv.reader(io.StringIO(text)):
        if not rec:
            continue
        cells = [c.strip() for c in rec]
        rows.append(["" if c == "?" else c for c in cells])
    write_csv(out, ADULT_COLUMNS, rows)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    ap.add_argument("--force", action="store_true")
    ap.add_argument("--wheel-dir", action="append", default=[],
                    help="directory holding previously downloaded wheels")
    ap.add_argument("--only", choices=["heart_disease", "breast_cancer", "adult"], action="append")
    args = ap.parse_args()

    WHEEL_DIRS.extend(args.wheel_dir)
    os.makedirs(args.out_dir, exist_ok=True)
    wanted = args.only or ["heart_disease", "breast_cancer", "adult"]
    with tempfile.TemporaryDirectory() as tmp:
        for name in wanted:
            out = os.path.join(args.out_dir, f"{name}.csv")
            if os.path.exists(out) and not args.force:
                print(f"exists: {out}")
                continue
            workdir = os.path.join(tmp, name)
            os.makedirs(workdir)
            if name == "heart_disease":
                fetch_heart(out, workdir)
            elif name == "breast_cancer":
                fetch_breast(out)
            else:
                fetch_adult(out, workdir)


if __name__ == "__main__":
    main()
