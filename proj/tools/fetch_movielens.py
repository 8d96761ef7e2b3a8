#!/usr/bin/env python3
"""Fetch the MovieLens 100K ratings as userId,movieId,rating,timestamp CSV.

Tries the GroupLens archive first. When that host is unreachable, falls back to
the copy of ml-100k bundled in the RecBole wheel on PyPI (pip download).
"""

import argparse
import csv
import io
import subprocess
import sys
import tempfile
import urllib.request
import zipfile
from pathlib import Path

GROUPLENS_URL = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
WHEEL_SPEC = "recbole==1.2.1"
WHEEL_MEMBER = "recbole/dataset_example/ml-100k/ml-100k.inter"


def rows_from_grouplens(timeout):
    with urllib.request.urlopen(GROUPLENS_URL, timeout=timeout) as resp:
        archive = zipfile.ZipFile(io.BytesIO(resp.read()))
    text = archive.read("ml-100k/u.data").decode("utf-8")
    for line in text.splitlines():
        if line.strip():
            user, item, rating, ts = line.split("\t")
            yield user, item, rating, ts


def rows_from_wheel():
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "--quiet",
             "--dest", tmp, WHEEL_SPEC],
            check=True,
        )
        wheel = next(Path(tmp).glob("recbole-*.whl"))
        text = zipfile.ZipFile(wheel).read(WHEEL_MEMBER).decode("utf-8")
    lines = text.splitlines()
    for line in lines[1:]:
        if line.strip():
            user, item, rating, ts = line.split("\t")
            yield user, item, rating, str(int(float(ts)))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--timeout", type=float, default=20.0)
    args = parser.parse_args()

    if args.out.exists():
        print(f"{args.out} already present")
        return 0
    try:
        rows = list(rows_from_grouplens(args.timeout))
        source = "grouplens"
    except Exception as err:  # unreachable host, proxy refusal, bad archive
        print(f"grouplens download failed ({err}); trying the PyPI copy", file=sys.stderr)
        rows = list(rows_from_wheel())
        source = "pypi:" + WHEEL_SPEC

    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["userId", "movieId", "rating", "timestamp"])
        writer.writerows(rows)
    print(f"wrote {len(rows)} ratings from {source} to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
