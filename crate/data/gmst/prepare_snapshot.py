"""Regenerate the bundled GMST attribution snapshot from packaged sources.

Inputs (unpacked from the package archives named in README.md):
  GISTEMP   vega-datasets 3.2.1 (npm)        data/global-temp.csv
  RCMIP ERF fair 1.6.4 (PyPI)                 fair/SSPs/data/rcmip-radiative-forcing-annual-means-5-1-0-ssp-only.csv
  volcanic  fair 1.6.4 (PyPI)                 fair/ancil/cmip6_volcanic.csv
  Nino3.4   pyleoclim 1.1.0 (PyPI)            pyleoclim/data/oni.csv

Usage: python3 prepare_snapshot.py SRC_DIR
"""
import csv
import sys
from pathlib import Path

FIRST, LAST = 1900, 2015
YEARS = range(FIRST, LAST + 1)
# CMIP6 volcanic ERF = -18 * optical depth + quiescent offset, then the
# 1850-2014 mean was removed (see the header of cmip6_volcanic.csv).
VOLC_ERF_PER_OD = -18.0
VOLC_QUIESCENT_ERF = 0.107048144


def write(path, rows, fmt):
    with open(path, "w", newline="") as fh:
        fh.write("year,value\n")
        for year, value in rows:
            fh.write(f"{year},{fmt(value)}\n")


def main(src):
    src = Path(src)
    out = Path(__file__).resolve().parent

    gistemp = {}
    with open(src / "package/data/global-temp.csv") as fh:
        for row in csv.DictReader(fh):
            gistemp[int(row["year"])] = row["temp"]
    write(out / "gmst.csv", [(y, gistemp[y]) for y in YEARS], str)

    rows = list(csv.reader(open(src / "fair/SSPs/data/rcmip-radiative-forcing-annual-means-5-1-0-ssp-only.csv")))
    header = rows[0]
    cols = [header.index(str(y)) for y in YEARS]

    def rcmip(variable):
        for r in rows:
            if r[1] == "ssp245" and r[2] == "World" and r[3] == "Effective Radiative Forcing|" + variable:
                return [float(r[c]) for c in cols]
        raise KeyError(variable)

    parts = ["CO2", "CH4", "N2O", "Other|Other WMGHGs"]
    ghg = [sum(v) for v in zip(*(rcmip("Anthropogenic|" + p) for p in parts))]
    aer = rcmip("Anthropogenic|Aerosols")
    write(out / "ghg.csv", zip(YEARS, ghg), lambda v: f"{v:.6f}")
    write(out / "aer.csv", zip(YEARS, aer), lambda v: f"{v:.6f}")

    volc = {}
    for line in open(src / "fair/ancil/cmip6_volcanic.csv"):
        parts = line.strip().split(",")
        try:
            volc[int(parts[0])] = float(parts[1])
        except (ValueError, IndexError):
            continue
    saod = [(y, max(0.0, (volc[y] - VOLC_QUIESCENT_ERF) / VOLC_ERF_PER_OD)) for y in YEARS]
    write(out / "vsaod.csv", saod, lambda v: f"{v:.6f}".replace("-0.000000", "0.000000"))

    monthly = {}
    with open(src / "pyleoclim/data/oni.csv") as fh:
        for row in csv.DictReader(fh):
            monthly.setdefault(int(row["YEAR"]), []).append(float(row["NINO34_ANOM"]))
    nino = [(y, sum(monthly[y]) / len(monthly[y])) for y in YEARS]
    assert all(len(monthly[y]) == 12 for y in YEARS)
    write(out / "nino34.csv", nino, lambda v: f"{v:.6f}")


if __name__ == "__main__":
    main(sys.argv[1])
