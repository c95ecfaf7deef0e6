#!/usr/bin/env python3
"""Fetch the six UCI benchmark tables and write them as plain numeric CSVs.

Each output file has a header row and only numeric columns, so the
`dpkmeans` binary can consume it with the default column selection.
A manifest with row/column counts and SHA-256 checksums is written next
to the CSVs; `--verify` re-checks existing files against it.

    python3 scripts/prepare_data.py                   # download everything
    python3 scripts/prepare_data.py --only blood      # one table
    python3 scripts/prepare_data.py --raw-dir ~/uci   # use files fetched by hand
    python3 scripts/prepare_data.py --verify

Only the standard library is needed, except for the credit-card table,
which ships as .xls and needs pandas with xlrd.
"""

import argparse
import csv
import hashlib
import io
import json
import sys
import urllib.request
from pathlib import Path

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"
ROOT = Path(__file__).resolve().parent.parent


def is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return text.strip().lower() not in ("nan", "inf", "-inf", "infinity", "-infinity")


def numeric_rows(rows, width):
    """Keeps rows whose first `width` fields are all numeric; returns (kept, dropped)."""
    kept, dropped = [], 0
    for row in rows:
        fields = [f.strip() for f in row[:width]]
        if len(fields) == width and all(is_number(f) for f in fields):
            kept.append(fields)
        else:
            dropped += 1
    return kept, dropped


def read_csv_text(raw):
    return list(csv.reader(io.StringIO(raw.decode("utf-8-sig"))))


def blood(raw):
    rows = read_csv_text(raw)[1:]
    header = ["recency", "frequency", "monetary", "time", "donated"]
    return header, *numeric_rows([r for r in rows if r], 5)


ADULT_COLUMNS = {
    0: "age",
    2: "fnlwgt",
    4: "education_num",
    10: "capital_gain",
    11: "capital_loss",
    12: "hours_per_week",
}


def adult(raw):
    rows = [r for r in read_csv_text(raw) if r and len(r) >= 15]
    picked = [[r[i] for i in ADULT_COLUMNS] for r in rows]
    return list(ADULT_COLUMNS.values()), *numeric_rows(picked, len(ADULT_COLUMNS))


def tripadvisor(raw):
    rows = read_csv_text(raw)[1:]
    header = [f"category_{i}" for i in range(1, 11)]
    return header, *numeric_rows([r[1:] for r in rows if r], 10)


def electrical(raw):
    rows = read_csv_text(raw)
    names = rows[0][:13]
    return names, *numeric_rows([r[:13] for r in rows[1:] if r], 13)


def review_ratings(raw):
    rows = read_csv_text(raw)[1:]
    header = [f"category_{i}" for i in range(1, 25)]
    return header, *numeric_rows([r[1:] for r in rows if r], 24)


def credit_card(raw):
    try:
        import pandas as pd
    except ImportError:
        sys.exit("credit_card needs pandas (and xlrd) to read the .xls source")
    frame = pd.read_excel(io.BytesIO(raw), header=1)
    frame = frame.drop(columns=[frame.columns[0]])
    header = [f"x{i}" for i in range(1, 24)] + ["y"]
    rows = frame.astype(str).values.tolist()
    return header, *numeric_rows(rows, 24)


DATASETS = {
    "blood": {
        "url": f"{UCI}/blood-transfusion/transfusion.data",
        "convert": blood,
        "shape": (748, 5),
        "notes": "all five attributes including the donation flag",
    },
    "adult": {
        "url": f"{UCI}/adult/adult.data",
        "convert": adult,
        "shape": (32561, 6),
        "notes": "assumed subset: the six numeric census attributes "
        "(age, fnlwgt, education-num, capital-gain, capital-loss, hours-per-week); "
        "training file only, no row filtering",
    },
    "tripadvisor": {
        "url": f"{UCI}/00484/tripadvisor_review.csv",
        "convert": tripadvisor,
        "shape": (980, 10),
        "notes": "user id column removed",
    },
    "electrical": {
        "url": f"{UCI}/00471/Data_for_UCI_named.csv",
        "convert": electrical,
        "shape": (10000, 13),
        "notes": "twelve features plus the numeric stab target; categorical stabf removed",
    },
    "review_ratings": {
        "url": f"{UCI}/00485/google_review_ratings.csv",
        "convert": review_ratings,
        "shape": (5454, 24),
        "notes": "user column removed; rows with missing or malformed ratings dropped",
    },
    "credit_card": {
        "url": f"{UCI}/00350/default%20of%20credit%20card%20clients.xls",
        "convert": credit_card,
        "shape": (30000, 24),
        "notes": "ID removed; X1..X23 plus the default flag Y",
    },
}


def fetch(name, spec, raw_dir):
    filename = spec["url"].rsplit("/", 1)[1].replace("%20", " ")
    if raw_dir is not None:
        path = raw_dir / filename
        if not path.exists():
            sys.exit(f"{name}: {path} not found")
        return path.read_bytes()
    print(f"{name}: downloading {spec['url']}", file=sys.stderr)
    with urllib.request.urlopen(spec["url"], timeout=60) as resp:
        return resp.read()


def write_table(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    data = buf.getvalue().encode("utf-8")
    path.write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def prepare(names, raw_dir, out_dir):
    manifest_path = out_dir / "MANIFEST.json"
    manifest = json.loads(manifest_path.read_text()) if manifest_path.exists() else {}
    ok = True
    for name in names:
        spec = DATASETS[name]
        raw = fetch(name, spec, raw_dir)
        header, rows, dropped = spec["convert"](raw)
        shape = (len(rows), len(header))
        digest = write_table(out_dir / f"{name}.csv", header, rows)
        status = "ok" if shape == spec["shape"] else f"expected {spec['shape'][0]}x{spec['shape'][1]}"
        ok &= status == "ok"
        print(f"{name}: {shape[0]}x{shape[1]} ({dropped} rows dropped) {status}", file=sys.stderr)
        manifest[name] = {
            "file": f"{name}.csv",
            "source": spec["url"],
            "source_sha256": hashlib.sha256(raw).hexdigest(),
            "rows": shape[0],
            "columns": header,
            "dropped_rows": dropped,
            "sha256": digest,
            "notes": spec["notes"],
        }
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return ok


def verify(out_dir):
    manifest_path = out_dir / "MANIFEST.json"
    if not manifest_path.exists():
        print(f"no manifest at {manifest_path}", file=sys.stderr)
        return False
    ok = True
    for name, entry in sorted(json.loads(manifest_path.read_text()).items()):
        path = out_dir / entry["file"]
        if not path.exists():
            print(f"{name}: missing {path}", file=sys.stderr)
            ok = False
            continue
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        match = digest == entry["sha256"]
        ok &= match
        print(f"{name}: {'ok' if match else 'checksum mismatch'}", file=sys.stderr)
    return ok


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--only", action="append", choices=sorted(DATASETS), help="repeatable")
    parser.add_argument("--raw-dir", type=Path, help="read source files from here instead of downloading")
    parser.add_argument("--out-dir", type=Path, default=ROOT / "data")
    parser.add_argument("--verify", action="store_true", help="check CSVs against the manifest")
    args = parser.parse_args()

    args.out_dir.mkdir(parents=True, exist_ok=True)
    if args.verify:
        return 0 if verify(args.out_dir) else 1
    names = args.only or list(DATASETS)
    return 0 if prepare(names, args.raw_dir, args.out_dir) else 1


if __name__ == "__main__":
    sys.exit(main())
