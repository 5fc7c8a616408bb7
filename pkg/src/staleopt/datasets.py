"""Dataset ingestion and synthesis for classification objectives.

Supported on-disk formats:

* CSV, comma-separated, one example per row, integer label in a designated
  column, optional header row.
* IDX image/label pairs (big-endian magic + dimensions + ubyte payload);
  pixel features are scaled to [0, 1].
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .errors import InvalidArgument, InvalidLabel, MalformedInput


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (rows = examples) with integer class labels."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if f.ndim != 2:
            raise InvalidArgument(f"features must be 2-D, got shape {f.shape}")
        if y.shape != (f.shape[0],):
            raise InvalidArgument("labels must be one integer per feature row")
        if not np.all(np.isfinite(f)):
            raise InvalidArgument("features contain non-finite values")
        if f.shape[0] == 0:
            raise InvalidArgument("dataset has no examples")
        if np.any(y < 0):
            raise InvalidLabel(f"negative label {int(y.min())}")
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "labels", y)

    @property
    def example_count(self) -> int:
        return self.features.shape[0]

    @property
    def feature_count(self) -> int:
        return self.features.shape[1]

    @property
    def class_count(self) -> int:
        return int(self.labels.max()) + 1

    def validate_classes(self, classes: int) -> "Dataset":
        if int(self.labels.max()) >= classes:
            raise InvalidLabel(
                f"label {int(self.labels.max())} out of range for {classes} classes"
            )
        return self

    def subset(self, idx) -> "Dataset":
        return Dataset(self.features[idx], self.labels[idx])


def load_csv(path, label_column: int = 0, header: bool = False) -> Dataset:
    """Parse a CSV file of numeric features with one integer label column."""
    rows = []
    labels = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        width = None
        for line_no, row in enumerate(reader, start=1):
            if header and line_no == 1:
                continue
            if not row:
                continue
            if width is None:
                width = len(row)
                if not (0 <= label_column < width):
                    raise MalformedInput(
                        f"label column {label_column} out of range for {width} columns"
                    )
            elif len(row) != width:
                raise MalformedInput(
                    f"inconsistent column count at line {line_no}: "
                    f"got {len(row)}, expected {width}"
                )
            parsed = []
            for col, cell in enumerate(row):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise MalformedInput(
                        f"malformed value {cell.strip()!r} at row {line_no}, column {col}"
                    ) from None
            label = parsed.pop(label_column)
            if label != int(label):
                raise InvalidLabel(f"non-integer label {label} at row {line_no}")
            if label < 0:
                raise InvalidLabel(f"negative label {int(label)} at row {line_no}")
            labels.append(int(label))
            rows.append(parsed)
    if not rows:
        raise MalformedInput(f"no data rows in {path}")
    return Dataset(np.array(rows, dtype=np.float64), np.array(labels, dtype=np.int64))


_IDX_IMAGE_MAGIC = 0x00000803
_IDX_LABEL_MAGIC = 0x00000801


def load_idx(images_path, labels_path) -> Dataset:
    """Parse an IDX image/label file pair; pixels scaled into [0, 1]."""
    with open(images_path, "rb") as fh:
        head = fh.read(16)
        if len(head) < 16:
            raise MalformedInput(f"{images_path}: truncated IDX header at offset {len(head)}")
        magic, n, rows, cols = struct.unpack(">IIII", head)
        if magic != _IDX_IMAGE_MAGIC:
            raise MalformedInput(f"{images_path}: bad image magic 0x{magic:08x} at offset 0")
        payload = fh.read(n * rows * cols)
        if len(payload) != n * rows * cols:
            raise MalformedInput(
                f"{images_path}: expected {n * rows * cols} pixels, got {len(payload)}"
            )
    images = np.frombuffer(payload, dtype=np.uint8).reshape(n, rows * cols)

    with open(labels_path, "rb") as fh:
        head = fh.read(8)
        if len(head) < 8:
            raise MalformedInput(f"{labels_path}: truncated IDX header at offset {len(head)}")
        magic, n_labels = struct.unpack(">II", head)
        if magic != _IDX_LABEL_MAGIC:
            raise MalformedInput(f"{labels_path}: bad label magic 0x{magic:08x} at offset 0")
        raw = fh.read(n_labels)
        if len(raw) != n_labels:
            raise MalformedInput(f"{labels_path}: expected {n_labels} labels, got {len(raw)}")
    if n_labels != n:
        raise MalformedInput(f"image count {n} does not match label count {n_labels}")
    labels = np.frombuffer(raw, dtype=np.uint8).astype(np.int64)
    return Dataset(images.astype(np.float64) / 255.0, labels)


def load_dataset(path, format: str = "csv", **options) -> Dataset:
    """Tagged-format loader: ``csv`` or ``idx`` (images + labels paths)."""
    if format == "csv":
        return load_csv(path, label_column=options.get("label_column", 0),
                        header=options.get("header", False))
    if format == "idx":
        labels_path = options.get("labels")
        if labels_path is None:
            raise InvalidArgument("idx format needs a labels= path")
        return load_idx(path, labels_path)
    raise InvalidArgument(f"unknown dataset format {format!r}")


def synth_classification(d: int, n: int, classes: int, separation: float,
                         seed: int) -> Dataset:
    """Gaussian class clusters with centers at pairwise distance >= separation.

    Deterministic given the seed: the centers are drawn once, then rescaled
    so the closest pair is exactly ``separation`` apart, and each example is
    its class center plus a standard normal draw.
    """
    if d < 1 or n < 1 or classes < 1:
        raise InvalidArgument("need d >= 1, n >= 1, classes >= 1")
    gen = rngmod.generator(seed, "synth", d, n, classes)
    centers = gen.normal(size=(classes, d))
    if classes > 1:
        dists = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=-1)
        min_dist = float(dists[np.triu_indices(classes, k=1)].min())
        if min_dist <= 0:
            # identical draws are measure-zero; nudge apart deterministically
            centers += separation * np.eye(classes, d)
            dists = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=-1)
            min_dist = float(dists[np.triu_indices(classes, k=1)].min())
        centers *= separation / min_dist
    labels = np.arange(n, dtype=np.int64) % classes
    features = centers[labels] + gen.normal(size=(n, d))
    perm = gen.permutation(n)
    return Dataset(features[perm], labels[perm])


def save_csv(dataset: Dataset, path, label_column: int = 0) -> None:
    """Write a dataset back out in the CSV layout load_csv understands."""
    if label_column != 0:
        raise InvalidArgument("save_csv only writes the label in column 0")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for y, x in zip(dataset.labels, dataset.features):
            writer.writerow([int(y)] + [repr(float(v)) for v in x])
