"""Dataset ingestion: logistic-regression CSVs, the German credit file, SV series."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from .errors import IngestionError


@dataclass
class BLRData:
    """Design matrix (ones column first, covariates standardised) and 0/1 labels."""

    X: np.ndarray
    y: np.ndarray
    columns: List[str]

    @property
    def D(self) -> int:
        return self.X.shape[1]

    @property
    def K(self) -> int:
        return self.X.shape[0]


def _read_csv(path) -> Tuple[List[str], List[List[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from None
    if len(rows) < 2:
        raise IngestionError(f"{path}: need a header and at least one data row")
    return [h.strip() for h in rows[0]], rows[1:]


def _column(rows, j: int, name: str) -> np.ndarray:
    try:
        return np.array([float(r[j]) for r in rows])
    except (ValueError, IndexError):
        raise IngestionError(f"column {name!r} has a missing or non-numeric entry", column=name) from None


def standardise(X: np.ndarray, names: Sequence[str]) -> np.ndarray:
    """Centre every column and scale it to unit sample standard deviation.

    Raises:
        IngestionError: naming the first constant column.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] < 2:
        raise IngestionError("standardisation needs at least two rows")
    mean = X.mean(axis=0)
    Z = X - mean
    sd = Z.std(axis=0, ddof=1)
    for j, s in enumerate(sd):
        if not s > 0:
            raise IngestionError(f"covariate {names[j]!r} is constant", column=names[j])
    Z = Z / sd
    # second pass removes the rounding left by the first
    Z -= Z.mean(axis=0)
    return Z / Z.std(axis=0, ddof=1)


def blr_from_arrays(covariates: np.ndarray, labels: np.ndarray, names: Sequence[str],
                    label_name: str = "label") -> BLRData:
    """Standardise ``covariates`` and prepend an intercept; map two-valued labels
    to 0/1 (the smaller value becomes 0)."""
    labels = np.asarray(labels, dtype=float).ravel()
    levels = np.unique(labels)
    if levels.size != 2:
        raise IngestionError(f"label column {label_name!r} must take exactly two values, found {levels.size}",
                             column=label_name)
    y = (labels == levels[1]).astype(float)
    Z = standardise(covariates, names)
    X = np.column_stack([np.ones(Z.shape[0]), Z])
    return BLRData(X, y, ["intercept"] + list(names))


def ingest_blr_dataset(path, label_column: str = "") -> BLRData:
    """Read a CSV with a header row of numeric covariates and a binary label.

    ``label_column`` defaults to the last column.

    Raises:
        IngestionError: for unreadable files, non-numeric cells, a label with
            other than two distinct values, or a constant covariate; the
            message names the offending column.
    """
    header, rows = _read_csv(path)
    label = label_column or header[-1]
    if label not in header:
        raise IngestionError(f"no label column {label!r} in {path}", column=label)
    jl = header.index(label)
    names = [h for j, h in enumerate(header) if j != jl]
    cols = [_column(rows, j, h) for j, h in enumerate(header) if j != jl]
    if not cols:
        raise IngestionError("dataset has no covariates")
    return blr_from_arrays(np.column_stack(cols), _column(rows, jl, label), names, label)


# --- German credit ----------------------------------------------------------

_GERMAN_NUMERIC = {1, 4, 7, 10, 12, 15, 17}  # zero-based attribute positions
_GERMAN_PURPOSE = 3
_PURPOSE_DUMMIES = ("A40", "A41", "A42", "A43", "A49")


def german_numeric(path) -> Tuple[np.ndarray, np.ndarray, List[str]]:
    """Encode the 20-attribute space-separated German credit file numerically.

    Ordinal and categorical attributes are replaced by their level index
    (``A34`` -> 4), numeric attributes are kept, and the purpose attribute is
    expanded into five indicator columns. Returns ``(covariates, labels,
    names)`` with 24 covariates; labels are 1 (good) or 2 (bad).
    """
    try:
        lines = [ln.split() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from None
    rows, labels = [], []
    for i, parts in enumerate(lines, start=1):
        if len(parts) != 21:
            raise IngestionError(f"{path}: line {i} has {len(parts)} fields, expected 21")
        vals = []
        for j, tok in enumerate(parts[:20]):
            if j == _GERMAN_PURPOSE:
                continue
            vals.append(float(tok) if j in _GERMAN_NUMERIC else float(tok[len(f"A{j + 1}"):]))
        vals.extend(1.0 if parts[_GERMAN_PURPOSE] == code else 0.0 for code in _PURPOSE_DUMMIES)
        rows.append(vals)
        labels.append(float(parts[20]))
    names = [f"a{j + 1}" for j in range(20) if j != _GERMAN_PURPOSE] + [f"purpose_{c}" for c in _PURPOSE_DUMMIES]
    return np.array(rows), np.array(labels), names


def load_german(path) -> BLRData:
    """German credit data ready for logistic regression (``D = 25``, ``K = 1000``)."""
    Xc, labels, names = german_numeric(path)
    return blr_from_arrays(Xc, labels, names, "credit")


def write_blr_csv(path, covariates: np.ndarray, labels: np.ndarray, names: Sequence[str],
                  label_name: str = "label") -> None:
    """Write raw covariates and labels as a header-first CSV."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(names) + [label_name])
        for row, lab in zip(covariates, labels):
            w.writerow([f"{v:.17g}" for v in row] + [f"{lab:.17g}"])


# --- stochastic volatility series ------------------------------------------


def write_sv_csv(path, y: np.ndarray) -> None:
    """Write returns as a two-column ``t,y`` CSV with ``t`` starting at 1."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "y"])
        for t, v in enumerate(np.asarray(y, dtype=float), start=1):
            w.writerow([t, f"{v:.17g}"])


def read_sv_csv(path) -> np.ndarray:
    """Read the ``y`` column of a ``t,y`` CSV, ordered by ``t``."""
    header, rows = _read_csv(path)
    if header[:2] != ["t", "y"]:
        raise IngestionError(f"{path}: expected header 't,y', got {','.join(header)}")
    t = _column(rows, 0, "t")
    y = _column(rows, 1, "y")
    return y[np.argsort(t, kind="stable")]
