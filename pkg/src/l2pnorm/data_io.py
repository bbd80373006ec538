"""Labelled CSV datasets, standardisation and design-matrix assembly."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .errors import (
    DataError,
    InconsistentWidthError,
    MissingLabelError,
    ParseError,
    TooFewSamplesError,
)
from .regression import augment_bias


@dataclass(frozen=True)
class Standardization:
    mean: NDArray[np.float64]
    std: NDArray[np.float64]
    constant: NDArray[np.bool_]
    ddof: int = 1

    def apply(self, features: NDArray[np.float64]) -> NDArray[np.float64]:
        safe = np.where(self.constant, 1.0, self.std)
        out = (features - self.mean) / safe
        out[:, self.constant] = 0.0
        return out

    def to_text(self) -> str:
        """Key-value export, one ``key = value`` per line."""
        lines = [f"ddof = {self.ddof}", f"n_features = {len(self.mean)}"]
        for j, (mu, sd, flag) in enumerate(zip(self.mean, self.std, self.constant)):
            lines.append(f"mean.{j} = {float(mu)!r}")
            lines.append(f"std.{j} = {float(sd)!r}")
            lines.append(f"constant.{j} = {int(flag)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Standardization":
        kv = {}
        for line in text.splitlines():
            if line.strip():
                key, _, value = line.partition("=")
                kv[key.strip()] = value.strip()
        d = int(kv["n_features"])
        return cls(
            mean=np.array([float(kv[f"mean.{j}"]) for j in range(d)]),
            std=np.array([float(kv[f"std.{j}"]) for j in range(d)]),
            constant=np.array([kv[f"constant.{j}"] == "1" for j in range(d)]),
            ddof=int(kv["ddof"]),
        )


@dataclass(frozen=True)
class Dataset:
    """``features`` is n samples x d features; ``labels`` are class ids in
    ``[0, class_count)`` and ``class_names[i]`` is the original label text."""

    features: NDArray[np.float64]
    labels: NDArray[np.int64]
    class_names: tuple[str, ...]
    feature_names: tuple[str, ...] | None = None
    label_name: str = "label"
    standardization: Standardization | None = None

    def __post_init__(self):
        n = self.features.shape[0]
        if self.features.ndim != 2 or len(self.labels) != n:
            raise DataError("features and labels disagree on the number of samples")
        c = len(self.class_names)
        if np.any(self.labels < 0) or np.any(self.labels >= c):
            raise DataError("labels must lie in [0, class_count)")
        if len(np.unique(self.labels)) != c:
            raise DataError("every class must have at least one sample")

    @property
    def class_count(self) -> int:
        return len(self.class_names)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


def _label_order(values):
    try:
        return sorted(set(values), key=float)
    except ValueError:
        return sorted(set(values))


def load_csv(
    path: str | os.PathLike,
    label_column: str | int = -1,
    delimiter: str = ",",
    has_header: bool = True,
) -> Dataset:
    """Read a labelled dataset.

    ``label_column`` is a header name or a (possibly negative) column
    index.  Every other column must parse as a float.  Class ids are
    assigned in sorted label order (numeric when every label is numeric).
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    rows = [r for r in rows if r]
    header = None
    if has_header:
        if not rows:
            raise DataError(f"{path}: empty file")
        header, rows = rows[0], rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(header) if header is not None else len(rows[0])
    first_line = 2 if has_header else 1
    for i, r in enumerate(rows):
        if len(r) != width:
            raise InconsistentWidthError(first_line + i, width, len(r), path)

    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if header is None or label_column not in header:
            raise MissingLabelError(f"{path}: no label column named {label_column!r}")
        li = header.index(label_column)
    else:
        li = int(label_column)
        if not -width <= li < width:
            raise MissingLabelError(f"{path}: label column index {li} out of range")
        li %= width

    feat_cols = [j for j in range(width) if j != li]
    if not feat_cols:
        raise DataError(f"{path}: no feature columns")
    feats = np.empty((len(rows), len(feat_cols)))
    raw_labels = []
    for i, r in enumerate(rows):
        label = r[li].strip()
        if not label:
            raise MissingLabelError(f"{path}: empty label on line {first_line + i}")
        raw_labels.append(label)
        for jj, j in enumerate(feat_cols):
            cell = r[j].strip()
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(first_line + i, j + 1, cell, path) from None
            if not np.isfinite(value):
                raise ParseError(first_line + i, j + 1, cell, path)
            feats[i, jj] = value

    names = _label_order(raw_labels)
    lookup = {name: k for k, name in enumerate(names)}
    return Dataset(
        features=feats,
        labels=np.array([lookup[v] for v in raw_labels], dtype=np.int64),
        class_names=tuple(names),
        feature_names=tuple(header[j] for j in feat_cols) if header else None,
        label_name=header[li] if header else "label",
    )


def write_csv(ds: Dataset, path: str | os.PathLike, delimiter: str = ",") -> None:
    """Write ``ds`` with a header and the label as the last column."""
    names = ds.feature_names or tuple(f"f{j}" for j in range(ds.n_features))
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow([*names, ds.label_name])
    for row, lab in zip(ds.features, ds.labels):
        w.writerow([*(repr(float(v)) for v in row), ds.class_names[lab]])
    atomic_write_text(path, buf.getvalue())


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def standardize(ds: Dataset, ddof: int = 1) -> Dataset:
    """Centre each feature and divide by its standard deviation.

    Zero-variance features become all zeros and are flagged in the
    returned :class:`Standardization`, which can be reapplied to
    held-out data.
    """
    if ds.n_samples < 2:
        raise TooFewSamplesError("standardisation needs at least 2 samples")
    mean = ds.features.mean(axis=0)
    std = ds.features.std(axis=0, ddof=ddof)
    constant = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    params = Standardization(mean=mean, std=std, constant=constant, ddof=ddof)
    return replace(ds, features=params.apply(ds.features), standardization=params)


def encode_targets(ds: Dataset) -> NDArray[np.float64]:
    """One-hot ``n x c`` target matrix."""
    B = np.zeros((ds.n_samples, ds.class_count))
    B[np.arange(ds.n_samples), ds.labels] = 1.0
    return B


def to_design_matrices(ds: Dataset, include_bias: bool = False):
    """Return ``(A, B)`` with ``A`` = features transposed (d x n), plus a
    constant-one row when ``include_bias``."""
    A = np.ascontiguousarray(ds.features.T)
    if include_bias:
        A = augment_bias(A)
    return A, encode_targets(ds)
