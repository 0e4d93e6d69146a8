import struct

import numpy as np
import pytest

from core.datasets import (
    CIFAR_RECORD,
    Dataset,
    LabeledArray,
    load_canonical,
    load_cifar10_binary,
    load_idx,
    load_idx_dataset,
    load_instances,
    load_raw_stack,
    read_canonical_header,
    read_idx_header,
    save_canonical,
    subsample,
    synth_clusters,
)
from core.errors import DataError, DataFormatError, DimensionError, UsageError


class TestIdx:
    def test_pixels_are_scaled_and_flattened(self, tmp_path, idx_writer):
        images = np.arange(2 * 2 * 3, dtype=np.uint8).reshape(2, 2, 3) * 20
        idx_writer(tmp_path / "images", images)
        idx_writer(tmp_path / "labels", np.array([4, 9], dtype=np.uint8))
        part = load_idx(tmp_path / "images", tmp_path / "labels")
        assert part.features.shape == (2, 6)
        assert part.features.dtype == np.float32
        np.testing.assert_allclose(part.features[1], images[1].ravel() / 255.0, rtol=1e-6)
        assert part.labels.tolist() == [4, 9]

    def test_zero_images(self, tmp_path, idx_writer):
        idx_writer(tmp_path / "images", np.zeros((0, 28, 28), dtype=np.uint8))
        idx_writer(tmp_path / "labels", np.zeros(0, dtype=np.uint8))
        part = load_idx(tmp_path / "images", tmp_path / "labels")
        assert len(part) == 0
        assert part.features.shape == (0, 784)

    def test_truncated_payload(self, tmp_path, idx_writer):
        path = tmp_path / "images"
        with open(path, "wb") as f:
            f.write(struct.pack(">IIII", 0x00000803, 2, 28, 28))
            f.write(bytes(1000))
        idx_writer(tmp_path / "labels", np.zeros(2, dtype=np.uint8))
        with pytest.raises(DataFormatError, match="expected 1568 bytes, found 1000"):
            load_idx(path, tmp_path / "labels")

    def test_gzip_files(self, tmp_path, idx_writer):
        idx_writer(tmp_path / "images", np.full((3, 2, 2), 255, dtype=np.uint8), gz=True)
        idx_writer(tmp_path / "labels", np.array([0, 1, 2], dtype=np.uint8), gz=True)
        part = load_idx(tmp_path / "images.gz", tmp_path / "labels.gz")
        assert np.all(part.features == 1.0)

    def test_count_mismatch(self, tmp_path, idx_writer):
        idx_writer(tmp_path / "images", np.zeros((3, 2, 2), dtype=np.uint8))
        idx_writer(tmp_path / "labels", np.zeros(2, dtype=np.uint8))
        with pytest.raises(DataError, match="3 images but 2 labels"):
            load_idx(tmp_path / "images", tmp_path / "labels")

    def test_labels_file_passed_as_images(self, tmp_path, idx_writer):
        idx_writer(tmp_path / "labels", np.zeros(2, dtype=np.uint8))
        with pytest.raises(DataFormatError, match="magic"):
            load_idx(tmp_path / "labels", tmp_path / "labels")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="no such file"):
            load_idx(tmp_path / "nope", tmp_path / "nope")

    def test_header(self, tmp_path, idx_writer):
        idx_writer(tmp_path / "images", np.zeros((5, 3, 4), dtype=np.uint8))
        assert read_idx_header(tmp_path / "images") == (0x00000803, (5, 3, 4))

    def test_directory_layout(self, tiny_mnist):
        dataset = load_idx_dataset(tiny_mnist / "mnist", "mnist", n_classes=3)
        assert dataset.dim == 16
        assert (len(dataset.train), len(dataset.test)) == (36, 12)


class TestCifar:
    def test_label_is_the_first_byte(self, tmp_path):
        record = bytes([7]) + bytes(range(256)) * 12
        path = tmp_path / "batch.bin"
        path.write_bytes(record)
        dataset = load_cifar10_binary([path], [path])
        assert dataset.train.labels.tolist() == [7]
        assert dataset.dim == 3072
        assert dataset.train.features[0, 255] == pytest.approx(1.0)

    def test_partial_record(self, tmp_path):
        path = tmp_path / "batch.bin"
        path.write_bytes(bytes(CIFAR_RECORD + 10))
        with pytest.raises(DataFormatError, match="3073-byte records"):
            load_cifar10_binary([path], [path])


class TestRawStack:
    def test_reads_rows(self, tmp_path):
        (tmp_path / "images.u8").write_bytes(bytes([0, 255, 51, 102]))
        (tmp_path / "labels.u8").write_bytes(bytes([1, 0]))
        part = load_raw_stack(tmp_path / "images.u8", tmp_path / "labels.u8", dim=2)
        np.testing.assert_allclose(part.features, [[0.0, 1.0], [0.2, 0.4]], rtol=1e-6)
        assert part.labels.tolist() == [1, 0]

    def test_bytes_not_a_multiple_of_dim(self, tmp_path):
        (tmp_path / "images.u8").write_bytes(bytes(5))
        (tmp_path / "labels.u8").write_bytes(bytes(2))
        with pytest.raises(DataFormatError):
            load_raw_stack(tmp_path / "images.u8", tmp_path / "labels.u8", dim=2)


class TestCanonical:
    def test_round_trip(self, tmp_path, small_synth):
        path = save_canonical(small_synth, tmp_path / "data.clds")
        restored = load_canonical(path)
        assert restored.describe() == small_synth.describe()
        np.testing.assert_array_equal(restored.train.features, small_synth.train.features)
        np.testing.assert_array_equal(restored.test.labels, small_synth.test.labels)

    def test_header(self, tmp_path, small_synth):
        header = read_canonical_header(save_canonical(small_synth, tmp_path / "data.clds"))
        assert header == {
            "name": "synth-k3-d16",
            "version": 1,
            "n_train": 120,
            "n_test": 30,
            "dim": 16,
            "n_classes": 3,
        }

    def test_unsupported_version(self, tmp_path, small_synth):
        path = save_canonical(small_synth, tmp_path / "data.clds")
        raw = bytearray(path.read_bytes())
        raw[4:6] = struct.pack("<H", 2)
        path.write_bytes(bytes(raw))
        with pytest.raises(DataFormatError, match="version 2"):
            load_canonical(path)

    def test_truncated(self, tmp_path, small_synth):
        path = save_canonical(small_synth, tmp_path / "data.clds")
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(DataFormatError, match="truncated"):
            load_canonical(path)

    @pytest.mark.parametrize(
        "value, message",
        [(np.nan, "non-finite"), (np.inf, "non-finite"), (1.5, r"outside \[0, 1\]"), (-0.1, r"outside \[0, 1\]")],
    )
    def test_feature_values_are_checked(self, tmp_path, value, message):
        features = np.full((2, 3), 0.5)
        features[1, 2] = value
        bad = Dataset("bad", LabeledArray(np.full((1, 3), 0.5), [0]), LabeledArray(features, [0, 1]), n_classes=2)
        path = save_canonical(bad, tmp_path / "bad.clds")
        with pytest.raises(DataError, match=f"test features.*{message}"):
            load_canonical(path)

    def test_instances_are_train_then_test(self, tmp_path, small_synth):
        path = save_canonical(small_synth, tmp_path / "data.clds")
        part = load_instances(path, dim=16)
        assert len(part) == 150
        np.testing.assert_array_equal(part.labels[:120], small_synth.train.labels)

    def test_instances_dimension_mismatch(self, tmp_path, small_synth):
        path = save_canonical(small_synth, tmp_path / "data.clds")
        with pytest.raises(DimensionError):
            load_instances(path, dim=784)


class TestSynth:
    def test_zero_spread_sits_on_the_means(self):
        dataset = synth_clusters(n_classes=4, dim=3, per_class=5, spread=0.0, seed=1)
        for label in range(4):
            rows = dataset.train.features[dataset.train.labels == label]
            assert np.all(rows == rows[0])

    def test_deterministic(self):
        a = synth_clusters(3, 8, 10, 0.1, seed=5)
        b = synth_clusters(3, 8, 10, 0.1, seed=5)
        np.testing.assert_array_equal(a.train.features, b.train.features)
        np.testing.assert_array_equal(a.test.labels, b.test.labels)

    def test_shape_and_name(self, small_synth):
        assert small_synth.name == "synth-k3-d16"
        assert np.bincount(small_synth.train.labels).tolist() == [40, 40, 40]
        assert small_synth.train.features.min() >= 0.0
        assert small_synth.train.features.max() <= 1.0

    def test_invalid_arguments(self):
        with pytest.raises(UsageError):
            synth_clusters(0, 2, 2, 0.1)
        with pytest.raises(UsageError):
            synth_clusters(2, 2, 2, -0.1)


class TestSubsample:
    def test_keeps_every_class(self, small_synth):
        small = subsample(small_synth, 0.1, seed=0)
        assert np.bincount(small.train.labels).tolist() == [4, 4, 4]
        assert np.bincount(small.test.labels).tolist() == [1, 1, 1]

    def test_full_fraction_is_identity(self, small_synth):
        assert subsample(small_synth, 1.0) is small_synth

    def test_fraction_range(self, small_synth):
        with pytest.raises(UsageError):
            subsample(small_synth, 0.0)


class TestContainers:
    def test_row_mismatch(self):
        with pytest.raises(DataError):
            LabeledArray(np.zeros((3, 2)), np.zeros(2))

    def test_label_out_of_range(self):
        part = LabeledArray(np.zeros((2, 2)), np.array([0, 5]))
        with pytest.raises(DataError, match="train labels"):
            Dataset("x", part, LabeledArray.empty(2), n_classes=3)
