"""Embedding dataset storage: REPA binary files, CSV import, synthetic data.

A dataset is a flat table of pooled embedding vectors, each carrying a
4-class label (normal / crackle / wheeze / both) and a train/test split tag.
Values are stored as 32-bit floats on disk; training code promotes to 64-bit.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"REPA"
VERSION = 1
HEADER = struct.Struct("<4sIII")  # magic, version, dim, count

LABEL_NAMES = ("normal", "crackle", "wheeze", "both")
LABEL_CODES = {name: code for code, name in enumerate(LABEL_NAMES)}
NUM_CLASSES = 4

TRAIN = 0
TEST = 1
SPLIT_NAMES = ("train", "test")

# Test-set class proportions of the ICBHI benchmark (normal, crackle,
# wheeze, both), used as the default synthetic class balance.
ICBHI_RATIOS = (0.5729, 0.2355, 0.1397, 0.0519)


class DataError(Exception):
    """Base class for anything wrong with input data."""


class FormatError(DataError):
    """File is not a REPA file of a supported version."""


class CorruptionError(DataError):
    """File header and payload disagree (truncated or trailing bytes)."""


class ValidationError(DataError):
    """Decoded content violates dataset invariants."""


@dataclass(frozen=True)
class Dataset:
    """Immutable table of embeddings with labels and split tags.

    features: (n, dim) float32, labels: (n,) uint8 in 0..3,
    splits: (n,) uint8 with 0=train, 1=test. Row order is significant and
    preserved exactly by serialization.
    """

    dim: int
    features: np.ndarray
    labels: np.ndarray
    splits: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"dim must be >= 1, got {self.dim}")
        n = len(self.labels)
        if self.features.shape != (n, self.dim):
            raise ValidationError(
                f"features shape {self.features.shape} != ({n}, {self.dim})")
        if self.splits.shape != (n,):
            raise ValidationError("splits length mismatch")
        if self.features.dtype != np.float32:
            object.__setattr__(self, "features",
                               self.features.astype(np.float32))
        bad = np.flatnonzero(~np.isfinite(self.features).all(axis=1))
        if bad.size:
            raise ValidationError(f"non-finite value in record {bad[0]}")
        if self.labels.size and (self.labels.max() > 3):
            raise ValidationError("label code out of range 0..3")
        if self.splits.size and (self.splits.max() > 1):
            raise ValidationError("split code out of range 0..1")
        self.features.setflags(write=False)
        self.labels.setflags(write=False)
        self.splits.setflags(write=False)

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.dim == other.dim
                and np.array_equal(self.features, other.features)
                and np.array_equal(self.labels, other.labels)
                and np.array_equal(self.splits, other.splits))

    def subset(self, mask: np.ndarray) -> "Dataset":
        return Dataset(self.dim, self.features[mask].copy(),
                       self.labels[mask].copy(), self.splits[mask].copy())

    def train(self) -> "Dataset":
        return self.subset(self.splits == TRAIN)

    def test(self) -> "Dataset":
        return self.subset(self.splits == TEST)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=NUM_CLASSES)


def _record_dtype(dim: int) -> np.dtype:
    return np.dtype([("label", "u1"), ("split", "u1"),
                     ("values", "<f4", (dim,))])


def load_store(path) -> Dataset:
    """Read a REPA file, validating header, length, and values."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    if len(raw) < HEADER.size:
        raise FormatError(f"{path}: too short for a REPA header")
    magic, version, dim, count = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if dim < 1:
        raise FormatError(f"{path}: header dim {dim} < 1")

    rec = _record_dtype(dim)
    payload = raw[HEADER.size:]
    if len(payload) != count * rec.itemsize:
        raise CorruptionError(
            f"{path}: expected {count} records ({count * rec.itemsize} bytes),"
            f" got {len(payload)} bytes")
    records = np.frombuffer(payload, dtype=rec)

    values = records["values"].reshape(count, dim).copy()
    labels = records["label"].copy()
    splits = records["split"].copy()
    bad = np.flatnonzero(~np.isfinite(values).all(axis=1))
    if bad.size:
        raise ValidationError(f"{path}: non-finite value in record {bad[0]}")
    if labels.size and labels.max() > 3:
        idx = int(np.argmax(labels > 3))
        raise ValidationError(f"{path}: bad label code in record {idx}")
    if splits.size and splits.max() > 1:
        idx = int(np.argmax(splits > 1))
        raise ValidationError(f"{path}: bad split code in record {idx}")
    return Dataset(dim, values, labels, splits)


def write_store(dataset: Dataset, path) -> None:
    """Write a Dataset as a REPA file; round-trips bit-exactly."""
    rec = _record_dtype(dataset.dim)
    records = np.empty(len(dataset), dtype=rec)
    records["label"] = dataset.labels
    records["split"] = dataset.splits
    records["values"] = dataset.features
    try:
        with open(path, "wb") as fh:
            fh.write(HEADER.pack(MAGIC, VERSION, dataset.dim, len(dataset)))
            fh.write(records.tobytes())
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def _parse_label(token: str, line: int) -> int:
    token = token.strip().lower()
    if token in LABEL_CODES:
        return LABEL_CODES[token]
    if token in {"0", "1", "2", "3"}:
        return int(token)
    raise ValidationError(f"line {line}: unknown label {token!r}")


def _parse_split(token: str, line: int) -> int:
    token = token.strip().lower()
    if token in {"train", "0"}:
        return TRAIN
    if token in {"test", "1"}:
        return TEST
    raise ValidationError(f"line {line}: unknown split {token!r}")


def import_csv(path, dim: int) -> Dataset:
    """Parse `label,split,v0,...,v{dim-1}` rows into a Dataset."""
    if dim < 1:
        raise ValidationError(f"dim must be >= 1, got {dim}")
    labels, splits, rows = [], [], []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) != dim + 2:
                raise ValidationError(
                    f"line {lineno}: expected {dim + 2} columns, got {len(row)}")
            labels.append(_parse_label(row[0], lineno))
            splits.append(_parse_split(row[1], lineno))
            try:
                rows.append([float(v) for v in row[2:]])
            except ValueError as exc:
                raise ValidationError(f"line {lineno}: {exc}") from exc
    features = np.asarray(rows, dtype=np.float32).reshape(len(rows), dim)
    return Dataset(dim, features,
                   np.asarray(labels, dtype=np.uint8),
                   np.asarray(splits, dtype=np.uint8))


def icbhi_counts(total: int, ratios=ICBHI_RATIOS) -> tuple[int, ...]:
    """Split `total` into per-class counts by largest-remainder rounding.

    Each count is within 1 of total * ratio and the counts sum to total.
    """
    exact = [total * r for r in ratios]
    counts = [int(np.floor(e)) for e in exact]
    remainders = [e - c for e, c in zip(exact, counts)]
    for idx in sorted(range(len(counts)), key=lambda i: -remainders[i]):
        if sum(counts) == total:
            break
        counts[idx] += 1
    return tuple(counts)


def synth_dataset(dim: int, counts, separation: float, seed: int,
                  train_frac: float = 0.6) -> Dataset:
    """Gaussian-blob dataset with one blob per class.

    Class c is drawn from N(mu_c, I) with ||mu_c|| = separation; for
    dim >= 4 the class means lie along orthogonal coordinate axes, so
    separation directly controls separability. Each class is split
    train/test in dataset order at train_frac (ICBHI-style 60/40 default).
    Deterministic for a fixed (dim, counts, separation, seed).
    """
    if dim < 1:
        raise ValidationError(f"dim must be >= 1, got {dim}")
    if separation < 0:
        raise ValidationError("separation must be >= 0")
    counts = tuple(int(c) for c in counts)
    if len(counts) != NUM_CLASSES or any(c < 0 for c in counts):
        raise ValidationError("counts must be 4 non-negative integers")

    rng = np.random.default_rng(np.random.SeedSequence((seed & (2**63 - 1), 0)))
    feats, labels, splits = [], [], []
    for cls, n in enumerate(counts):
        mean = np.zeros(dim)
        mean[cls % dim] = separation
        block = rng.standard_normal((n, dim)) + mean
        n_train = int(round(train_frac * n))
        feats.append(block.astype(np.float32))
        labels.append(np.full(n, cls, dtype=np.uint8))
        splits.append(np.concatenate([
            np.full(n_train, TRAIN, dtype=np.uint8),
            np.full(n - n_train, TEST, dtype=np.uint8),
        ]))
    return Dataset(dim,
                   np.concatenate(feats) if feats else np.zeros((0, dim), np.float32),
                   np.concatenate(labels),
                   np.concatenate(splits))
