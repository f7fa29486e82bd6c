"""Download public benchmark datasets and convert them to the CSV layout the
package reads (feature columns, then the label column, no header).

Usage:
    python3 docs/fetch_datasets.py [--out data]

fourclass (862 points, 2 features, labels -1/+1) comes from the LIBSVM binary
dataset collection:
    https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/fourclass

The acceptance suite looks for data/fourclass.csv, or the path in
$GB_FOURCLASS.
"""

import argparse
import csv
import urllib.request
from pathlib import Path

SOURCES = {
    "fourclass": "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/fourclass",
}


def sparse_to_rows(text):
    """Parse sparse ``label index:value ...`` lines into dense rows."""
    parsed, width = [], 0
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        feats = {}
        for item in parts[1:]:
            idx, val = item.split(":")
            feats[int(idx)] = val
            width = max(width, int(idx))
        parsed.append((parts[0], feats))
    return [[f.get(j, "0") for j in range(1, width + 1)] + [label] for label, f in parsed]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="data")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, url in SOURCES.items():
        with urllib.request.urlopen(url, timeout=60) as resp:
            text = resp.read().decode("utf-8")
        rows = sparse_to_rows(text)
        with open(out / f"{name}.csv", "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
        print(f"{name}: {len(rows)} rows -> {out / (name + '.csv')}")


if __name__ == "__main__":
    main()
