"""Dataset containers, benchmark file readers and synthetic data.

Features are held as float32 in [0, 1]; labels as int64. Readers accept the
published on-disk layouts:

- IDX (MNIST, Fashion-MNIST): big-endian header, optionally gzip-compressed.
- CIFAR-10 binary batches: 3073-byte records, label byte then 3072 pixels.
- Raw stacks (MedMNIST exports): row-major u8 images with a u8 label file.
- Canonical dump: this project's own versioned little-endian format.
"""

from __future__ import annotations

import gzip
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Dict, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DataError, DataFormatError, DimensionError, UsageError
from .seeding import substream
from .stats import Instance

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
CIFAR_RECORD = 3073
CIFAR_DIM = 3072

CANONICAL_MAGIC = b"CLDS"
CANONICAL_VERSION = 1
_CANONICAL_COUNTS = struct.Struct("<IIIH")


@dataclass(eq=False)
class LabeledArray:
    """One half of a dataset: (n, D) features and (n,) labels."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float32)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {self.features.shape}")
        if self.features.shape[0] != self.labels.shape[0]:
            raise DataError(
                f"{self.features.shape[0]} feature rows but {self.labels.shape[0]} labels"
            )

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    def take(self, index) -> "LabeledArray":
        return LabeledArray(self.features[index], self.labels[index])

    def instances(self) -> Iterator[Instance]:
        for row, label in zip(self.features, self.labels):
            yield Instance(row.astype(np.float64), int(label))

    @classmethod
    def empty(cls, dim: int) -> "LabeledArray":
        return cls(np.zeros((0, dim), dtype=np.float32), np.zeros(0, dtype=np.int64))


@dataclass(eq=False)
class Dataset:
    name: str
    train: LabeledArray
    test: LabeledArray
    n_classes: int

    def __post_init__(self) -> None:
        if self.train.dim != self.test.dim:
            raise DataError(f"train D={self.train.dim} but test D={self.test.dim}")
        for half, part in (("train", self.train), ("test", self.test)):
            if len(part) and (part.labels.min() < 0 or part.labels.max() >= self.n_classes):
                raise DataError(f"{half} labels outside [0, {self.n_classes})")

    @property
    def dim(self) -> int:
        return self.train.dim

    def describe(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "n_train": len(self.train),
            "n_test": len(self.test),
            "dim": self.dim,
            "n_classes": self.n_classes,
        }


def _open(path: PathLike) -> BinaryIO:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    if path.suffix == ".gz":
        return gzip.open(path, "rb")  # type: ignore[return-value]
    return open(path, "rb")


def _read_exact(stream: BinaryIO, size: int, what: str, path: PathLike) -> bytes:
    data = stream.read(size)
    if len(data) != size:
        raise DataFormatError(f"{path}: truncated {what}: expected {size} bytes, found {len(data)}")
    return data


def read_idx_header(path: PathLike) -> Tuple[int, Tuple[int, ...]]:
    """(magic, dims) of an IDX file without reading the payload."""
    with _open(path) as f:
        (magic,) = struct.unpack(">I", _read_exact(f, 4, "header", path))
        ndim = magic & 0xFF
        if magic >> 8 != 0x08 or ndim == 0:
            raise DataFormatError(f"{path}: bad IDX magic 0x{magic:08x}")
        dims = struct.unpack(f">{ndim}I", _read_exact(f, 4 * ndim, "header", path))
    return magic, tuple(dims)


def _read_idx(path: PathLike, expected_magic: int) -> np.ndarray:
    with _open(path) as f:
        (magic,) = struct.unpack(">I", _read_exact(f, 4, "header", path))
        if magic != expected_magic:
            raise DataFormatError(
                f"{path}: bad IDX magic 0x{magic:08x} (expected 0x{expected_magic:08x})"
            )
        ndim = magic & 0xFF
        dims = struct.unpack(f">{ndim}I", _read_exact(f, 4 * ndim, "header", path))
        size = int(np.prod(dims, dtype=np.int64))
        payload = f.read()
    if len(payload) < size:
        raise DataFormatError(
            f"{path}: truncated payload: expected {size} bytes, found {len(payload)}"
        )
    return np.frombuffer(payload[:size], dtype=np.uint8).reshape(dims)


def load_idx(images_path: PathLike, labels_path: PathLike) -> LabeledArray:
    """One dataset half from an IDX image file and its label file.

    Raises:
        DataFormatError: Bad magic or truncated payload.
        DataError: Image and label counts differ.
    """
    images = _read_idx(images_path, IDX_IMAGES_MAGIC)
    labels = _read_idx(labels_path, IDX_LABELS_MAGIC)
    if images.shape[0] != labels.shape[0]:
        raise DataError(f"{images.shape[0]} images but {labels.shape[0]} labels")
    flat = images.reshape(images.shape[0], int(np.prod(images.shape[1:])))
    features = flat.astype(np.float32) / np.float32(255.0)
    logger.debug("Loaded %d IDX items from %s", images.shape[0], images_path)
    return LabeledArray(features, labels)


def _find(directory: Path, stem: str) -> Path:
    for candidate in (directory / stem, directory / f"{stem}.gz"):
        if candidate.is_file():
            return candidate
    raise DataError(f"missing {stem}[.gz] in {directory}")


def idx_paths(directory: PathLike) -> Dict[str, Path]:
    """Standard MNIST-layout file names inside `directory`."""
    directory = Path(directory)
    return {
        "train_images": _find(directory, "train-images-idx3-ubyte"),
        "train_labels": _find(directory, "train-labels-idx1-ubyte"),
        "test_images": _find(directory, "t10k-images-idx3-ubyte"),
        "test_labels": _find(directory, "t10k-labels-idx1-ubyte"),
    }


def load_idx_dataset(directory: PathLike, name: str, n_classes: int = 10) -> Dataset:
    paths = idx_paths(directory)
    return Dataset(
        name=name,
        train=load_idx(paths["train_images"], paths["train_labels"]),
        test=load_idx(paths["test_images"], paths["test_labels"]),
        n_classes=n_classes,
    )


def _read_cifar(path: PathLike) -> LabeledArray:
    with _open(path) as f:
        data = f.read()
    if len(data) % CIFAR_RECORD:
        raise DataFormatError(
            f"{path}: {len(data)} bytes is not a whole number of {CIFAR_RECORD}-byte records"
        )
    records = np.frombuffer(data, dtype=np.uint8).reshape(-1, CIFAR_RECORD)
    features = records[:, 1:].astype(np.float32) / np.float32(255.0)
    return LabeledArray(features, records[:, 0])


def _concat(parts: Sequence[LabeledArray], dim: int) -> LabeledArray:
    if not parts:
        return LabeledArray.empty(dim)
    return LabeledArray(
        np.concatenate([p.features for p in parts]), np.concatenate([p.labels for p in parts])
    )


def load_cifar10_binary(
    train_paths: Sequence[PathLike], test_paths: Sequence[PathLike], name: str = "cifar10"
) -> Dataset:
    """CIFAR-10 from binary batches; channels are flattened, not converted to grey.

    Raises:
        DataFormatError: A file length is not a multiple of 3073 bytes.
    """
    train = _concat([_read_cifar(p) for p in train_paths], CIFAR_DIM)
    test = _concat([_read_cifar(p) for p in test_paths], CIFAR_DIM)
    return Dataset(name=name, train=train, test=test, n_classes=10)


def cifar10_paths(directory: PathLike) -> Tuple[list, list]:
    directory = Path(directory)
    train = [_find(directory, f"data_batch_{i}.bin") for i in range(1, 6)]
    return train, [_find(directory, "test_batch.bin")]


def load_raw_stack(images_path: PathLike, labels_path: PathLike, dim: int) -> LabeledArray:
    """Row-major u8 image stack plus one u8 label per image.

    Raises:
        DataFormatError: Image bytes are not a multiple of `dim`.
        DataError: Image and label counts differ.
    """
    if dim < 1:
        raise UsageError("dim must be >= 1")
    with _open(images_path) as f:
        pixels = f.read()
    with _open(labels_path) as f:
        labels = np.frombuffer(f.read(), dtype=np.uint8)
    if len(pixels) % dim:
        raise DataFormatError(f"{images_path}: {len(pixels)} bytes is not a multiple of D={dim}")
    images = np.frombuffer(pixels, dtype=np.uint8).reshape(-1, dim)
    if images.shape[0] != labels.shape[0]:
        raise DataError(f"{images.shape[0]} images but {labels.shape[0]} labels")
    return LabeledArray(images.astype(np.float32) / np.float32(255.0), labels)


def load_raw_stack_dataset(directory: PathLike, name: str, dim: int, n_classes: int) -> Dataset:
    """``train_images.u8``/``train_labels.u8``/``test_images.u8``/``test_labels.u8``."""
    directory = Path(directory)
    return Dataset(
        name=name,
        train=load_raw_stack(
            _find(directory, "train_images.u8"), _find(directory, "train_labels.u8"), dim
        ),
        test=load_raw_stack(
            _find(directory, "test_images.u8"), _find(directory, "test_labels.u8"), dim
        ),
        n_classes=n_classes,
    )


def synth_clusters(
    n_classes: int,
    dim: int,
    per_class: int,
    spread: float,
    seed: int = 0,
    test_per_class: Optional[int] = None,
) -> Dataset:
    """Gaussian clusters with uniform means in [0, 1]^D, clipped to [0, 1]."""
    if n_classes < 1 or dim < 1 or per_class < 1:
        raise UsageError("n_classes, dim and per_class must be >= 1")
    if spread < 0:
        raise UsageError("spread must be >= 0")
    test_per_class = max(1, per_class // 4) if test_per_class is None else test_per_class
    rng = substream(seed, "synth")
    means = rng.uniform(0.0, 1.0, size=(n_classes, dim))

    def draw(count: int) -> LabeledArray:
        labels = np.repeat(np.arange(n_classes), count)
        noise = rng.standard_normal((labels.shape[0], dim)) * spread
        features = np.clip(means[labels] + noise, 0.0, 1.0)
        order = rng.permutation(labels.shape[0])
        return LabeledArray(features[order], labels[order])

    train = draw(per_class)
    test = draw(test_per_class)
    return Dataset(name=f"synth-k{n_classes}-d{dim}", train=train, test=test, n_classes=n_classes)


def _stratified(part: LabeledArray, fraction: float, rng: np.random.Generator) -> LabeledArray:
    keep = []
    for label in np.unique(part.labels):
        members = np.flatnonzero(part.labels == label)
        count = max(1, int(round(fraction * members.shape[0])))
        keep.append(rng.choice(members, size=count, replace=False))
    if not keep:
        return part
    return part.take(np.sort(np.concatenate(keep)))


def subsample(dataset: Dataset, fraction: float, seed: int = 0) -> Dataset:
    """Keep `fraction` of every class in both halves (at least one each)."""
    if not 0 < fraction <= 1:
        raise UsageError("fraction must be in (0, 1]")
    if fraction == 1:
        return dataset
    rng = substream(seed, "subsample")
    return Dataset(
        name=dataset.name,
        train=_stratified(dataset.train, fraction, rng),
        test=_stratified(dataset.test, fraction, rng),
        n_classes=dataset.n_classes,
    )


def save_canonical(dataset: Dataset, path: PathLike) -> Path:
    """Write the canonical dump: header, then train and test (features, labels)."""
    path = Path(path)
    name = dataset.name.encode("utf-8")
    if dataset.n_classes > 0xFFFF:
        raise DataError("canonical format stores at most 65535 classes")
    with open(path, "wb") as f:
        f.write(CANONICAL_MAGIC)
        f.write(struct.pack("<HH", CANONICAL_VERSION, len(name)))
        f.write(name)
        f.write(
            _CANONICAL_COUNTS.pack(len(dataset.train), len(dataset.test), dataset.dim, dataset.n_classes)
        )
        for part in (dataset.train, dataset.test):
            f.write(part.features.astype("<f4").tobytes())
            f.write(part.labels.astype("<u2").tobytes())
    return path


def read_canonical_header(path: PathLike) -> Dict[str, object]:
    """Header fields of a canonical dump without reading the payload."""
    with _open(path) as f:
        return _read_canonical_header(f, path)


def _read_canonical_header(f: BinaryIO, path: PathLike) -> Dict[str, object]:
    magic = _read_exact(f, 4, "header", path)
    if magic != CANONICAL_MAGIC:
        raise DataFormatError(f"{path}: not a canonical dataset (magic {magic!r})")
    version, name_len = struct.unpack("<HH", _read_exact(f, 4, "header", path))
    if version != CANONICAL_VERSION:
        raise DataFormatError(
            f"{path}: canonical dataset version {version} is not supported "
            f"(this build reads version {CANONICAL_VERSION})"
        )
    name = _read_exact(f, name_len, "header", path).decode("utf-8")
    n_train, n_test, dim, n_classes = _CANONICAL_COUNTS.unpack(
        _read_exact(f, _CANONICAL_COUNTS.size, "header", path)
    )
    return {
        "name": name,
        "version": version,
        "n_train": n_train,
        "n_test": n_test,
        "dim": dim,
        "n_classes": n_classes,
    }


def load_canonical(path: PathLike) -> Dataset:
    with _open(path) as f:
        header = _read_canonical_header(f, path)
        dim = int(header["dim"])  # type: ignore[arg-type]
        parts = []
        for part, count in (("train", header["n_train"]), ("test", header["n_test"])):
            n = int(count)  # type: ignore[arg-type]
            features = np.frombuffer(_read_exact(f, 4 * n * dim, "features", path), dtype="<f4")
            labels = np.frombuffer(_read_exact(f, 2 * n, "labels", path), dtype="<u2")
            if not np.isfinite(features).all():
                raise DataError(f"{path}: {part} features contain non-finite values")
            if features.size and (features.min() < 0.0 or features.max() > 1.0):
                raise DataError(f"{path}: {part} features outside [0, 1]")
            parts.append(LabeledArray(features.reshape(n, dim), labels))
    return Dataset(
        name=str(header["name"]), train=parts[0], test=parts[1], n_classes=int(header["n_classes"])  # type: ignore[arg-type]
    )


def load_instances(path: PathLike, dim: Optional[int] = None) -> LabeledArray:
    """Instances for prediction: every row of a canonical dump, train half first.

    Raises:
        DimensionError: If `dim` is given and differs from the file's D.
    """
    dataset = load_canonical(path)
    if dim is not None and dataset.dim != dim:
        raise DimensionError(dim, dataset.dim)
    return _concat([dataset.train, dataset.test], dataset.dim)
