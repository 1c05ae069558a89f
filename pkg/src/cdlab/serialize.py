"""JSON and CSV wire formats.

Matrices travel as {"rows": N, "cols": N, "re": [...], "im": [...]} with
row-major flat lists; field exports are plain CSV so they can be plotted
without custom tooling.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import SchemaError


def matrix_to_json(mat: np.ndarray) -> dict:
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2:
        raise SchemaError("only 2-d matrices serialize")
    return {
        "rows": int(mat.shape[0]),
        "cols": int(mat.shape[1]),
        "re": [float(v) for v in mat.real.ravel()],
        "im": [float(v) for v in mat.imag.ravel()],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad matrix object: {exc}") from exc
    if re.size != rows * cols or im.size != rows * cols:
        raise SchemaError(
            f"matrix data length {re.size}/{im.size} does not match {rows}x{cols}")
    return (re + 1j * im).reshape(rows, cols)


def load_matrix(path: str | Path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return matrix_from_json(json.load(fh))


def save_matrix(path: str | Path, mat: np.ndarray):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(matrix_to_json(mat), fh)


def write_ratio_csv(path: str | Path, samples):
    """diagonal_ratio rows -> CSV with columns radius, k0, k1, ratio."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["radius", "k0", "k1", "ratio"])
        for s in samples:
            writer.writerow([repr(s.radius), repr(s.k0), repr(s.k1), repr(s.ratio)])


def _field_columns(rank: int, keys) -> list[str]:
    cols = ["re_w", "im_w"]
    for key in keys:
        label = "K" if key == (0, 0) else f"K_w{key[0]}wb{key[1]}"
        for p in range(rank):
            for q in range(rank):
                cols.append(f"{label}_{p}{q}_re")
                cols.append(f"{label}_{p}{q}_im")
    return cols


def write_curvature_csv(path: str | Path, field) -> None:
    """CurvatureField -> CSV: re(w), im(w), then row-major re/im per matrix."""
    keys = [(0, 0)] + sorted(field.derivatives.keys())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_field_columns(field.rank, keys))
        for idx, w in enumerate(field.grid.points):
            row = [repr(float(w.real)), repr(float(w.imag))]
            for mat in field.tuple_at(idx, keys):
                for value in np.asarray(mat).ravel():
                    row.append(repr(float(value.real)))
                    row.append(repr(float(value.imag)))
            writer.writerow(row)


def curvature_field_to_json(field) -> dict:
    keys = [(0, 0)] + sorted(field.derivatives.keys())
    points = []
    for idx, w in enumerate(field.grid.points):
        entry = {"re_w": float(w.real), "im_w": float(w.imag)}
        for key, mat in zip(keys, field.tuple_at(idx, keys)):
            label = "K" if key == (0, 0) else f"K_w{key[0]}wb{key[1]}"
            mat = np.asarray(mat)
            entry[label] = {
                "re": [float(v) for v in mat.real.ravel()],
                "im": [float(v) for v in mat.imag.ravel()],
            }
        points.append(entry)
    return {"rank": field.rank, "method": field.method, "points": points}
