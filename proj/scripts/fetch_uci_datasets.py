#!/usr/bin/env python3
"""Downloads the UCI benchmark datasets used by the acceptance suite and
converts them to the canonical CSV layout this project reads: numeric
features, label in the last column, no header.

Needs network access to archive.ics.uci.edu. Run from anywhere:

    python3 scripts/fetch_uci_datasets.py [--data-dir data] [--only name ...]

Constant feature columns are dropped where noted so the shapes match the
usual benchmark descriptions. Every file is shape-checked after conversion.
"""

import argparse
import io
import os
import sys
import urllib.request
import zipfile

BASE = "https://archive.ics.uci.edu/ml/machine-learning-databases"


def fetch(url: str) -> bytes:
    print(f"  fetching {url}")
    with urllib.request.urlopen(url, timeout=120) as r:
        return r.read()


def drop_constant_columns(rows):
    cols = len(rows[0]) - 1  # never drop the label column
    keep = [j for j in range(cols) if len({r[j] for r in rows}) > 1]
    return [[r[j] for j in keep] + [r[-1]] for r in rows]


def write_csv(rows, path):
    with open(path, "w", encoding="ascii") as f:
        for r in rows:
            f.write(",".join(r) + "\n")


def check_shape(rows, n, d, c, name):
    classes = {r[-1] for r in rows}
    if len(rows) != n or len(rows[0]) - 1 != d or len(classes) != c:
        raise SystemExit(
            f"{name}: got n={len(rows)}, d={len(rows[0]) - 1}, C={len(classes)}; "
            f"expected n={n}, d={d}, C={c}")


def pendigits(out):
    # Training portion of the pen-based handwritten digits data.
    raw = fetch(f"{BASE}/pendigits/pendigits.tra").decode("ascii")
    rows = [[c.strip() for c in line.split(",")] for line in raw.splitlines() if line.strip()]
    check_shape(rows, 7494, 16, 10, "pendigits")
    write_csv(rows, out)


def statlog_image(out):
    # Statlog image segmentation: 19 attributes, one of them constant.
    raw = fetch(f"{BASE}/statlog/segment/segment.dat").decode("ascii")
    rows = [line.split() for line in raw.splitlines() if line.strip()]
    rows = drop_constant_columns(rows)
    check_shape(rows, 2310, 18, 7, "statlog_image")
    write_csv(rows, out)


def yeast(out):
    # Sequence name column dropped; class is the last field.
    raw = fetch(f"{BASE}/yeast/yeast.data").decode("ascii")
    rows = [line.split()[1:] for line in raw.splitlines() if line.strip()]
    check_shape(rows, 1484, 8, 10, "yeast")
    write_csv(rows, out)


def letter(out):
    # Letter recognition: label is the first field; move it last.
    raw = fetch(f"{BASE}/letter-recognition/letter-recognition.data").decode("ascii")
    rows = []
    for line in raw.splitlines():
        if not line.strip():
            continue
        cells = [c.strip() for c in line.split(",")]
        rows.append(cells[1:] + [cells[0]])
    check_shape(rows, 20000, 16, 26, "letter")
    write_csv(rows, out)


def optical(out):
    # Optical digits training portion; two attribute columns are constant.
    raw = fetch(f"{BASE}/optdigits/optdigits.tra").decode("ascii")
    rows = [[c.strip() for c in line.split(",")] for line in raw.splitlines() if line.strip()]
    rows = drop_constant_columns(rows)
    check_shape(rows, 3823, 62, 10, "optical")
    write_csv(rows, out)


def wine_quality_white(out):
    raw = fetch(f"{BASE}/wine-quality/winequality-white.csv").decode("ascii")
    lines = [line for line in raw.splitlines() if line.strip()]
    rows = [line.split(";") for line in lines[1:]]  # drop header
    check_shape(rows, 4898, 11, 7, "w_qua_white")
    write_csv(rows, out)


def chess_krvk(out):
    # King-rook vs king: file letters a..h mapped to 1..8.
    raw = fetch(f"{BASE}/chess/king-rook-vs-king/krkopt.data").decode("ascii")
    letters = {ch: str(i + 1) for i, ch in enumerate("abcdefgh")}
    rows = []
    for line in raw.splitlines():
        if not line.strip():
            continue
        cells = [c.strip() for c in line.split(",")]
        rows.append([letters.get(c, c) for c in cells[:-1]] + [cells[-1]])
    check_shape(rows, 28056, 6, 18, "chess_krvk")
    write_csv(rows, out)


def plants(kind, expected_prefix, out):
    # One hundred plant species leaves: margin and shape views. The archive
    # holds one CSV per view with the species name first.
    blob = fetch(f"{BASE}/00241/100%20leaves%20plant%20species.zip")
    with zipfile.ZipFile(io.BytesIO(blob)) as z:
        name = next(n for n in z.namelist() if kind in n.lower() and n.endswith(".txt"))
        raw = z.read(name).decode("ascii")
    rows = []
    for line in raw.splitlines():
        if not line.strip():
            continue
        cells = [c.strip() for c in line.split(",")]
        rows.append(cells[1:] + [cells[0]])
    check_shape(rows, 1600, 64, 100, expected_prefix)
    write_csv(rows, out)


CONVERTERS = {
    "pendigits": pendigits,
    "statlog_image": statlog_image,
    "yeast": yeast,
    "letter": letter,
    "optical": optical,
    "w_qua_white": wine_quality_white,
    "chess_krvk": chess_krvk,
    "plant_margin": lambda out: plants("margin", "plant_margin", out),
    "plant_shape": lambda out: plants("shape", "plant_shape", out),
}


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--data-dir", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    ap.add_argument("--only", nargs="*", choices=sorted(CONVERTERS), default=None)
    args = ap.parse_args()

    os.makedirs(args.data_dir, exist_ok=True)
    names = args.only or sorted(CONVERTERS)
    failures = []
    for name in names:
        out = os.path.join(args.data_dir, f"{name}.csv")
        if os.path.exists(out):
            print(f"{name}: already present, skipping")
            continue
        print(f"{name}:")
        try:
            CONVERTERS[name](out)
            print(f"  wrote {out}")
        except Exception as e:  # keep going; report at the end
            failures.append((name, str(e)))
            print(f"  FAILED: {e}", file=sys.stderr)
    if failures:
        print("\nfailed datasets:", ", ".join(n for n, _ in failures), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
