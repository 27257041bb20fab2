import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from simon.embedding import (
    DegenerateEmbeddingError,
    EmbeddingFormatError,
    aggregate_views,
    read_emb,
    toy_view_encoder,
    write_emb,
)
from simon.foveation import FoveatedView


class TestToyEncoder:
    def test_constant_is_zero(self):
        np.testing.assert_array_equal(toy_view_encoder(np.full((9, 7, 3), 0.3), 16), np.zeros(16))

    def test_two_by_two(self):
        img = np.array([[0.0, 1.0], [0.0, 1.0]])
        np.testing.assert_array_equal(toy_view_encoder(img, 4), [-0.5, 0.5, -0.5, 0.5])

    def test_deterministic(self, rng):
        img = rng.random((20, 20, 3))
        np.testing.assert_array_equal(toy_view_encoder(img, 16), toy_view_encoder(img.copy(), 16))

    def test_accepts_view(self, rng):
        img = rng.random((8, 8, 3))
        np.testing.assert_array_equal(toy_view_encoder(FoveatedView(img, (1, 1)), 4), toy_view_encoder(img, 4))

    def test_area_average_uneven(self):
        # 3 columns into 2 cells: left cell = col0 + half col1, over 1.5 columns
        img = np.array([[0.0, 1.0, 1.0]])
        out = toy_view_encoder(np.repeat(img, 2, axis=0), 4)
        left, right = 0.5 / 1.5, 1.0
        mean = (left + right) / 2
        np.testing.assert_allclose(out, [left - mean, right - mean] * 2, atol=1e-15)

    def test_grayscale_is_channel_mean(self, rng):
        img = rng.random((6, 6, 3))
        np.testing.assert_allclose(toy_view_encoder(img, 9), toy_view_encoder(img.mean(axis=2), 9), atol=1e-15)

    @pytest.mark.parametrize("dim", [0, 2, 15, -4])
    def test_bad_dim(self, dim):
        with pytest.raises(ValueError):
            toy_view_encoder(np.zeros((4, 4)), dim)


class TestAggregate:
    def test_single_row(self):
        np.testing.assert_allclose(aggregate_views([[3.0, 4.0]]), [0.6, 0.8])

    def test_identical_unit_rows(self):
        np.testing.assert_array_equal(aggregate_views([[0.0, 1.0], [0.0, 1.0]]), [0.0, 1.0])

    def test_orthogonal(self):
        z = aggregate_views([[1.0, 0.0], [0.0, 1.0]])
        np.testing.assert_array_equal(z, [0.5, 0.5])
        assert np.linalg.norm(z) == pytest.approx(np.sqrt(2) / 2)

    def test_zero_row_named(self):
        with pytest.raises(DegenerateEmbeddingError, match="row 1"):
            aggregate_views([[1.0, 0.0], [0.0, 0.0]])

    def test_constant_views_degenerate(self):
        rows = [toy_view_encoder(np.full((8, 8), 0.5), 4)]
        with pytest.raises(DegenerateEmbeddingError):
            aggregate_views(rows)


rows_strategy = st.integers(1, 6).flatmap(
    lambda k: st.integers(1, 8).flatmap(
        lambda d: arrays(np.float64, (k, d), elements=st.floats(-10, 10, allow_nan=False)).filter(
            lambda a: np.all(np.linalg.norm(a, axis=1) > 1e-3)
        )
    )
)


@settings(max_examples=200, deadline=None)
@given(rows_strategy)
def test_norm_at_most_one(rows):
    assert np.linalg.norm(aggregate_views(rows)) <= 1.0 + 1e-12


@settings(max_examples=200, deadline=None)
@given(rows_strategy, st.randoms(use_true_random=False))
def test_permutation_invariant(rows, rnd):
    perm = list(range(rows.shape[0]))
    rnd.shuffle(perm)
    np.testing.assert_allclose(aggregate_views(rows[perm]), aggregate_views(rows), atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(rows_strategy, st.floats(1e-3, 1e3))
def test_row_scale_invariant(rows, lam):
    scaled = rows.copy()
    scaled[0] *= lam
    np.testing.assert_allclose(aggregate_views(scaled), aggregate_views(rows), atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, (1, 5), elements=st.floats(-10, 10)).filter(lambda a: np.linalg.norm(a) > 1e-3),
       st.integers(1, 5))
def test_equal_rows_give_unit_norm(row, k):
    assert np.linalg.norm(aggregate_views(np.repeat(row, k, axis=0))) == pytest.approx(1.0, abs=1e-12)


class TestEmbFile:
    def test_layout(self, tmp_path):
        p = tmp_path / "a.emb"
        write_emb(p, [[1.0, -2.0, 0.5]])
        raw = p.read_bytes()
        assert raw[:4] == b"EMB1"
        assert struct.unpack("<II", raw[4:12]) == (1, 3)
        assert struct.unpack("<3f", raw[12:]) == (1.0, -2.0, 0.5)
        assert len(raw) == 24

    def test_roundtrip_float32(self, tmp_path, rng):
        data = rng.normal(size=(7, 5))
        p = tmp_path / "x.emb"
        write_emb(p, data, labels=[f"id{i}" for i in range(7)])
        back, labels = read_emb(p)
        np.testing.assert_array_equal(back, data.astype(np.float32).astype(np.float64))
        assert labels == [f"id{i}" for i in range(7)]
        assert (tmp_path / "x.emb.labels").read_text() == "".join(f"id{i}\n" for i in range(7))

    def test_no_labels_removes_stale_sidecar(self, tmp_path):
        p = tmp_path / "x.emb"
        write_emb(p, [[1.0]], labels=["a"])
        write_emb(p, [[2.0]])
        assert read_emb(p)[1] is None

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.emb"
        p.write_bytes(b"EMB2" + struct.pack("<II", 0, 0))
        with pytest.raises(EmbeddingFormatError):
            read_emb(p)

    def test_truncated(self, tmp_path):
        p = tmp_path / "t.emb"
        p.write_bytes(b"EMB1" + struct.pack("<II", 2, 2) + b"\0" * 12)
        with pytest.raises(EmbeddingFormatError):
            read_emb(p)

    def test_label_count_mismatch(self, tmp_path):
        with pytest.raises(ValueError):
            write_emb(tmp_path / "m.emb", [[1.0], [2.0]], labels=["only"])

    def test_non_finite_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_emb(tmp_path / "n.emb", [[np.nan]])
