import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from swarmseg.imaging import (
    MalformedHeaderError,
    TruncatedDataError,
    UnsupportedFormatError,
    UnsupportedMaxvalError,
    binarize,
    foreground_fraction,
    histogram,
    load_image,
    normalize,
    save_image,
)
from swarmseg.phantom import PhantomSpec, synth_sample
from swarmseg.pso import exhaustive_threshold_search

gray_images = arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12)))


def write_bytes(tmp_path, name, data):
    path = tmp_path / name
    path.write_bytes(data)
    return path


class TestLoad:
    def test_p5_two_pixels(self, tmp_path):
        path = write_bytes(tmp_path, "a.pgm", b"P5\n2 1\n255\n" + bytes([7, 250]))
        img = load_image(path)
        assert img.shape == (1, 2)
        assert img.dtype == np.uint8
        assert img.tolist() == [[7, 250]]

    def test_header_comments(self, tmp_path):
        data = b"P5\n# made by hand\n2 # width\n1\n# depth next\n255\n" + bytes([1, 2])
        assert load_image(write_bytes(tmp_path, "c.pgm", data)).tolist() == [[1, 2]]

    def test_truncated_payload(self, tmp_path):
        path = write_bytes(tmp_path, "t.pgm", b"P5\n2 2\n255\n" + bytes([1, 2, 3]))
        with pytest.raises(TruncatedDataError, match="unexpected end of data"):
            load_image(path)

    def test_p6_rejected(self, tmp_path):
        path = write_bytes(tmp_path, "c.ppm", b"P6\n1 1\n255\n" + bytes([1, 2, 3]))
        with pytest.raises(UnsupportedFormatError, match="unsupported format"):
            load_image(path)

    @pytest.mark.parametrize("data", [b"P2\n1 1\n255\n7\n", b"GIF89a..."])
    def test_other_magic_rejected(self, tmp_path, data):
        with pytest.raises(UnsupportedFormatError):
            load_image(write_bytes(tmp_path, "x.pgm", data))

    def test_maxval_must_be_255(self, tmp_path):
        path = write_bytes(tmp_path, "m.pgm", b"P5\n1 1\n65535\n" + bytes([0, 1]))
        with pytest.raises(UnsupportedMaxvalError):
            load_image(path)

    @pytest.mark.parametrize("data", [b"P5\n2\n", b"P5\nx 1\n255\n\x00\x00", b"P5\n0 1\n255\n"])
    def test_malformed_header(self, tmp_path, data):
        with pytest.raises(MalformedHeaderError):
            load_image(write_bytes(tmp_path, "h.pgm", data))

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_image(tmp_path / "nope.pgm")

    def test_gray_png(self, tmp_path):
        arr = np.array([[0, 10, 200], [255, 3, 4]], dtype=np.uint8)
        Image.fromarray(arr, mode="L").save(tmp_path / "g.png")
        np.testing.assert_array_equal(load_image(tmp_path / "g.png"), arr)

    def test_color_png_rejected(self, tmp_path):
        Image.new("RGB", (2, 2)).save(tmp_path / "c.png")
        with pytest.raises(UnsupportedFormatError):
            load_image(tmp_path / "c.png")


class TestSave:
    def test_round_trip_example(self, tmp_path):
        img = np.array([[7, 250]], dtype=np.uint8)
        save_image(img, tmp_path / "r.pgm")
        np.testing.assert_array_equal(load_image(tmp_path / "r.pgm"), img)

    def test_all_white_mask_payload(self, tmp_path):
        save_image(np.full((2, 3), 255, dtype=np.uint8), tmp_path / "w.pgm")
        assert (tmp_path / "w.pgm").read_bytes() == b"P5\n3 2\n255\n" + b"\xff" * 6

    def test_rgb_payload(self, tmp_path):
        save_image(np.array([[[1, 2, 3]]], dtype=np.uint8), tmp_path / "c.ppm")
        assert (tmp_path / "c.ppm").read_bytes() == b"P6\n1 1\n255\n\x01\x02\x03"

    def test_rgb_round_trip_via_pillow(self, tmp_path, rng):
        rgb = rng.integers(0, 256, size=(5, 7, 3), dtype=np.uint8)
        save_image(rgb, tmp_path / "c.ppm")
        with Image.open(tmp_path / "c.ppm") as im:
            np.testing.assert_array_equal(np.array(im), rgb)

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(OSError):
            save_image(np.zeros((1, 1), np.uint8), tmp_path / "missing" / "x.pgm")

    @settings(max_examples=50, deadline=None)
    @given(gray_images)
    def test_round_trip_property(self, tmp_path_factory, img):
        path = tmp_path_factory.mktemp("rt") / "p.pgm"
        save_image(img, path)
        np.testing.assert_array_equal(load_image(path), img)


class TestBinarize:
    def test_example(self):
        out = binarize(np.array([[100, 160, 200]], dtype=np.uint8), 160)
        assert out.tolist() == [[0, 255, 255]]

    def test_zero_threshold_all_white(self, rng):
        img = rng.integers(0, 256, size=(6, 6), dtype=np.uint8)
        assert np.all(binarize(img, 0) == 255)

    def test_phantom_segmentation_at_166(self):
        spec = PhantomSpec(background_std=0, deposit_std=0)
        img, truth = synth_sample(spec)
        np.testing.assert_array_equal(binarize(img, 166), truth.deposit)

    @given(gray_images, st.integers(0, 256), st.integers(0, 256))
    def test_monotone_in_threshold(self, img, t1, t2):
        t1, t2 = min(t1, t2), max(t1, t2)
        hi = binarize(img, t2) == 255
        lo = binarize(img, t1) == 255
        assert not np.any(hi & ~lo)

    @given(gray_images, st.integers(0, 256))
    def test_idempotent_on_binary(self, img, t):
        b = binarize(img, t)
        np.testing.assert_array_equal(binarize(b, 128), b)


class TestHistogram:
    def test_example(self):
        counts = histogram(np.array([[7, 7]], dtype=np.uint8))
        assert counts[7] == 2 and counts.sum() == 2 and len(counts) == 256

    @given(gray_images)
    def test_conservation(self, img):
        assert histogram(img).sum() == img.size

    def test_bimodal_modes(self):
        spec = PhantomSpec(background_std=6, deposit_std=6)
        img, _ = synth_sample(spec)
        counts = histogram(img)
        split = int(spec.midpoint)
        assert abs(int(np.argmax(counts[:split])) - spec.background_mean) <= 2
        assert abs(split + int(np.argmax(counts[split:])) - spec.deposit_mean) <= 2


class TestForegroundFraction:
    def test_all_zero(self):
        assert foreground_fraction(np.zeros((3, 3), np.uint8)) == 0.0

    def test_half(self):
        assert foreground_fraction(np.array([[0, 255], [255, 0]], np.uint8)) == 0.5

    def test_phantom_area_at_oracle_threshold(self, default_phantom):
        img, truth = default_phantom
        scores = exhaustive_threshold_search(img, 50, 200)
        t = min(scores, key=scores.get)
        designed = foreground_fraction(truth.deposit)
        assert abs(foreground_fraction(binarize(img, t)) - designed) <= 0.02


class TestNormalize:
    def test_example(self):
        np.testing.assert_array_equal(normalize([[2.0, 4.0, 6.0]]), [[0.0, 0.5, 1.0]])

    def test_constant(self):
        np.testing.assert_array_equal(normalize(np.full((2, 2), 3.5)), np.zeros((2, 2)))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            normalize([[np.nan, 1.0]])

    @given(arrays(np.float64, (4, 5), elements=st.floats(-1e6, 1e6)))
    def test_range_endpoints_and_idempotence(self, values):
        out = normalize(values)
        assert out.min() >= 0 and out.max() <= 1
        if values.max() > values.min():
            assert out.min() == 0.0 and out.max() == 1.0
        np.testing.assert_array_equal(normalize(out), out)
