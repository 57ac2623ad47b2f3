#!/usr/bin/env python3
"""Convert benchmark .mat files (X, Y arrays) into CSVs with a `label` column.

usage: mat_to_csv.py input.mat [more.mat ...] [-o OUT_DIR]
"""
import argparse
import pathlib

import numpy as np
from scipy.io import loadmat


def convert(src: pathlib.Path, out_dir: pathlib.Path) -> pathlib.Path:
    mat = loadmat(src)
    x = np.asarray(mat["X"], dtype=float)
    y = np.asarray(mat["Y"]).ravel()
    if x.shape[0] != y.shape[0]:
        raise SystemExit(f"{src}: {x.shape[0]} rows but {y.shape[0]} labels")
    dst = out_dir / (src.stem + ".csv")
    header = ",".join([f"f{i}" for i in range(x.shape[1])] + ["label"])
    with dst.open("w") as fh:
        fh.write(header + "\n")
        for row, label in zip(x, y):
            fh.write(",".join(repr(float(v)) for v in row) + f",{label}\n")
    return dst


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("inputs", nargs="+", type=pathlib.Path)
    ap.add_argument("-o", "--out-dir", type=pathlib.Path, default=pathlib.Path("data"))
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for src in args.inputs:
        print(convert(src, args.out_dir))


if __name__ == "__main__":
    main()
