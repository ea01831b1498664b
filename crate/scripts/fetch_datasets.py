#!/usr/bin/env python3
"""Fetch the UCI datasets used by the benchmark harness and write them as CSV.

Each dataset is tried from the UCI archive first. When the archive is not
reachable, a few well-known PyPI packages that vendor the original UCI files
are used as a mirror (downloaded with `pip download`, never installed).

Usage: python3 scripts/fetch_datasets.py [--out data]

Requires `openpyxl` for the Excel-distributed datasets.
"""

import argparse
import io
import subprocess
import sys
import tempfile
import urllib.request
import zipfile
from pathlib import Path

CONCRETE_COLUMNS = [
    "cement", "Blast furnace slag", "fly ash", "water", "superplasticizer",
    "coarse aggregate", "fine aggregate", "age", "strength",
]
ENERGY_COLUMNS = [
    "Relative Compactness", "surface area", "wall area", "roof area",
    "overall height", "orientation", "glazing area", "glazing area distribution",
]
YEAST_COLUMNS = ["MCG", "GVH", "ALM", "MIT", "ERL", "POX", "VAC", "NUC", "location site"]

UCI = {
    "concrete": "https://archive.ics.uci.edu/static/public/165/concrete+compressive+strength.zip",
    "energy": "https://archive.ics.uci.edu/static/public/242/energy+efficiency.zip",
    "yeast": "https://archive.ics.uci.edu/static/public/110/yeast.zip",
}
MIRROR_PACKAGE = "common_datasets==0.3.10"


def http_get(url):
    try:
        with urllib.request.urlopen(url, timeout=20) as r:
            return r.read()
    except Exception as e:  # noqa: BLE001
        print(f"  {url}: {e}", file=sys.stderr)
        return None


def zip_member(blob, suffix):
    with zipfile.ZipFile(io.BytesIO(blob)) as z:
        for n in z.namelist():
            if n.lower().endswith(suffix):
                return z.read(n)
    return None


_mirror = None


def mirror_wheel():
    global _mirror
    if _mirror is None:
        tmp = tempfile.mkdtemp()
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", tmp, MIRROR_PACKAGE],
            check=True,
        )
        _mirror = zipfile.ZipFile(next(Path(tmp).glob("*.whl")))
    return _mirror


def xlsx_rows(blob):
    import openpyxl

    wb = openpyxl.load_workbook(io.BytesIO(blob), read_only=True, data_only=True)
    ws = wb.worksheets[0]
    rows = []
    for i, row in enumerate(ws.iter_rows(values_only=True)):
        if i == 0:
            continue
        if row is None or all(v is None for v in row):
            continue
        rows.append([v for v in row if v is not None])
    return rows


def fmt(v):
    f = float(v)
    return repr(int(f)) if f.is_integer() else repr(f)


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(r) + "\n")
    print(f"wrote {path} ({len(rows)} rows)")


def concrete(out):
    blob = http_get(UCI["concrete"])
    xlsx = zip_member(blob, ".xls") if blob else None
    if xlsx is None or not xlsx.startswith(b"PK"):
        xlsx = mirror_wheel().read("common_datasets/data/regression/concrete/Concrete_Data.xlsx")
    rows = [[fmt(v) for v in r[:9]] for r in xlsx_rows(xlsx)]
    write_csv(out / "concrete.csv", CONCRETE_COLUMNS, rows)


def energy(out):
    blob = http_get(UCI["energy"])
    xlsx = zip_member(blob, ".xlsx") if blob else None
    if xlsx is None:
        print("energy: UCI archive unreachable and no mirror known; skipped", file=sys.stderr)
        return
    rows = [r[:10] for r in xlsx_rows(xlsx)]
    write_csv(out / "energy_hl.csv", ENERGY_COLUMNS + ["heating load"],
              [[fmt(v) for v in r[:8]] + [fmt(r[8])] for r in rows])
    write_csv(out / "energy_cl.csv", ENERGY_COLUMNS + ["cooling load"],
              [[fmt(v) for v in r[:8]] + [fmt(r[9])] for r in rows])


def yeast(out):
    blob = http_get(UCI["yeast"])
    text = zip_member(blob, "yeast.data") if blob else None
    if text is None:
        text = mirror_wheel().read("common_datasets/data/classification/yeast/yeast.data.txt")
    rows = []
    for line in text.decode().splitlines():
        parts = line.split()
        if len(parts) == 10:
            rows.append(parts[1:])
    write_csv(out / "yeast.csv", YEAST_COLUMNS, rows)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    concrete(out)
    energy(out)
    yeast(out)


if __name__ == "__main__":
    main()
