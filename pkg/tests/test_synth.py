import filecmp

import numpy as np
import pytest

from simon.imaging import load_image, masked_centroid, threshold_mask
from simon.sas import SamplingConfig, sas_sample
from simon.synth import (
    Blob,
    SynthError,
    SynthSpec,
    analytic_centroid,
    generate_corpus,
    oracle_sas,
    quantize16,
    saliency_map,
    synth_pairs,
)


def test_centered_blob_centroid():
    items = generate_corpus(SynthSpec(count=1, width=33, height=33, blobs=[[Blob(16, 16, 4, 1.0)]]))
    assert items[0].analytic_centroid == (16.0, 16.0)
    c = masked_centroid(items[0].saliency, threshold_mask(items[0].matte))
    assert c == pytest.approx((16.0, 16.0), abs=1e-12)
    assert items[0].oracle_centers[0] == (16, 16)


def test_two_equal_blobs_midpoint():
    blobs = [Blob(12, 20, 3, 0.8), Blob(40, 30, 3, 0.8)]
    assert analytic_centroid(blobs) == pytest.approx((26.0, 25.0), abs=1e-12)
    s = saliency_map(blobs, 53, 51)
    assert masked_centroid(s, np.ones_like(s, dtype=bool)) == pytest.approx((26.0, 25.0), abs=1e-9)


def test_out_of_frame():
    with pytest.raises(SynthError):
        generate_corpus(SynthSpec(count=1, width=20, height=20, blobs=[[Blob(2, 10, 4, 1.0)]]))


def test_random_blobs_in_frame():
    for it in generate_corpus(SynthSpec(count=30, width=48, height=40, rng_seed=7)):
        for b in it.blobs:
            assert b.radius <= b.cx <= 47 - b.radius and b.radius <= b.cy <= 39 - b.radius


def test_byte_identical(tmp_path):
    spec = SynthSpec(count=4, width=32, height=32, rng_seed=11)
    generate_corpus(spec, tmp_path / "a")
    generate_corpus(spec, tmp_path / "b")
    cmp = filecmp.dircmp(tmp_path / "a", tmp_path / "b")
    assert not cmp.diff_files and not cmp.left_only and not cmp.right_only
    for sub in ("images", "masks", "saliency"):
        sc = filecmp.dircmp(tmp_path / "a" / sub, tmp_path / "b" / sub)
        assert not sc.diff_files and len(sc.same_files) == 4


def test_ground_truth_csv(tmp_path):
    items = generate_corpus(SynthSpec(count=2, width=24, height=24, k=2, rng_seed=1), tmp_path)
    lines = (tmp_path / "ground_truth.csv").read_text().splitlines()
    assert lines[0] == "image_id,analytic_cx,analytic_cy,k,x,y"
    assert len(lines) == 1 + 2 * 2
    assert lines[1].startswith("img000,") and lines[1].split(",")[3:] == ["1", *map(str, items[0].oracle_centers[0])]


def test_maps_survive_disk(tmp_path):
    items = generate_corpus(SynthSpec(count=2, width=20, height=20, rng_seed=3), tmp_path)
    back = load_image(tmp_path / "saliency" / "img001.png")
    np.testing.assert_array_equal(back, items[1].saliency)


def test_quantize():
    assert quantize16(np.array([0.0, 1.0, 2.0, -1.0])).tolist() == [0.0, 1.0, 1.0, 0.0]


@pytest.mark.parametrize("gamma", [0.0, 0.5, 1.0, 2.0])
def test_oracle_matches_sas(gamma):
    spec = SynthSpec(count=8, width=40, height=36, k=4, gamma=gamma, rng_seed=int(gamma * 10))
    for it in generate_corpus(spec):
        got = sas_sample(it.saliency, it.matte, SamplingConfig(k=4, gamma=gamma)).centers
        assert got == it.oracle_centers


def test_oracle_row_major_ties():
    s = np.ones((3, 3))
    m = np.ones((3, 3))
    assert oracle_sas(s.tolist(), m.tolist(), 3) == [(1, 1), (0, 0), (2, 0)]


def test_oracle_region_too_small():
    m = np.zeros((4, 4))
    m[0, 0] = 1
    with pytest.raises(SynthError):
        oracle_sas(np.ones((4, 4)).tolist(), m.tolist(), 2)


class TestPairs:
    def test_shapes_and_norm(self):
        z, b, rot = synth_pairs(30, dim=5, rng_seed=0)
        assert z.shape == b.shape == (30, 5)
        np.testing.assert_allclose(np.linalg.norm(z, axis=1), 1.0)
        np.testing.assert_allclose(rot @ rot.T, np.eye(5), atol=1e-12)

    def test_noise_free(self):
        z, b, rot = synth_pairs(10, dim=4, noise=0.0, rng_seed=2)
        np.testing.assert_allclose(b, z @ rot.T, atol=1e-15)

    def test_source(self, rng):
        src = rng.normal(size=(6, 3))
        z, b, rot = synth_pairs(0, noise=0.0, source=src, rng_seed=1)
        np.testing.assert_array_equal(z, src)
        assert rot.shape == (3, 3)

    def test_deterministic(self):
        a = synth_pairs(20, rng_seed=4)
        b = synth_pairs(20, rng_seed=4)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)
