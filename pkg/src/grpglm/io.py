"""Dataset CSV serialization.

Layout: a header row, a response column named "y", and the remaining
columns as covariates in group order. Values are written with 17
significant digits so write-then-read is exact.
"""

from __future__ import annotations

import csv

import numpy as np

from .families import Dataset


def read_dataset_csv(path: str) -> Dataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if "y" not in header:
            raise ValueError(f"{path}: header must contain a column named 'y'")
        y_col = header.index("y")
        x_cols = [j for j in range(len(header)) if j != y_col]
        if not x_cols:
            raise ValueError(f"{path}: no covariate columns")
        rows_x, rows_y = [], []
        for i, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: row {i} has {len(row)} fields, expected {len(header)}"
                )
            try:
                rows_y.append(float(row[y_col]))
                rows_x.append([float(row[j]) for j in x_cols])
            except ValueError as exc:
                raise ValueError(f"{path}: row {i}: {exc}") from None
    if not rows_x:
        raise ValueError(f"{path}: no data rows")
    return Dataset(X=np.asarray(rows_x), y=np.asarray(rows_y))


def write_dataset_csv(path: str, data: Dataset) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["y"] + [f"x{j}" for j in range(data.p)])
        for yi, xi in zip(data.y, data.X):
            writer.writerow([format(yi, ".17g")] + [format(v, ".17g") for v in xi])
