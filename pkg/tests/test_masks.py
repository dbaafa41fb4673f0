import numpy as np
import pytest
from PIL import Image

from cfaudit import (
    BinaryMask,
    compose_inpaint_mask,
    coverage,
    decode_mask,
    dilate_3x3,
    encode_mask,
)
from cfaudit.errors import MaskError


def dilate_oracle(bits):
    """Naive max filter: scan the 3x3 window around every pixel."""
    h, w = bits.shape
    out = np.zeros_like(bits)
    for y in range(h):
        for x in range(w):
            hit = False
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < h and 0 <= nx < w and bits[ny, nx]:
                        hit = True
            out[y, x] = hit
    return out


def test_dilate_matches_max_filter_oracle():
    rng = np.random.default_rng(21)
    for trial in range(100):
        density = rng.uniform(0.02, 0.9)
        bits = rng.random((32, 32)) < density
        got = dilate_3x3(BinaryMask(bits)).bits
        assert np.array_equal(got, dilate_oracle(bits)), f"trial {trial}"


def test_dilate_single_pixel_center():
    bits = np.zeros((7, 7), dtype=bool)
    bits[3, 3] = True
    out = dilate_3x3(BinaryMask(bits)).bits
    want = np.zeros((7, 7), dtype=bool)
    want[2:5, 2:5] = True
    assert np.array_equal(out, want)


def test_dilate_corner_pixel_clips_at_border():
    bits = np.zeros((5, 5), dtype=bool)
    bits[0, 0] = True
    out = dilate_3x3(BinaryMask(bits)).bits
    want = np.zeros((5, 5), dtype=bool)
    want[0:2, 0:2] = True
    assert np.array_equal(out, want)


def test_dilate_iterations():
    rng = np.random.default_rng(22)
    bits = rng.random((16, 16)) < 0.1
    zero = dilate_3x3(BinaryMask(bits), iterations=0).bits
    assert np.array_equal(zero, bits)
    twice = dilate_3x3(BinaryMask(bits), iterations=2).bits
    assert np.array_equal(twice, dilate_oracle(dilate_oracle(bits)))
    with pytest.raises(MaskError, match="iterations"):
        dilate_3x3(BinaryMask(bits), iterations=-1)


def test_dilate_monotone():
    rng = np.random.default_rng(23)
    bits = rng.random((12, 12)) < 0.3
    out = dilate_3x3(BinaryMask(bits)).bits
    assert np.array_equal(out & bits, bits)


def test_compose_intersect_and_union():
    rng = np.random.default_rng(24)
    for _ in range(20):
        person = BinaryMask(rng.random((9, 11)) < 0.5)
        skin = BinaryMask(rng.random((9, 11)) < 0.5)
        both = compose_inpaint_mask(person, skin).bits
        assert np.array_equal(both, person.bits & skin.bits)
        assert np.array_equal(both & person.bits, both)
        assert np.array_equal(both & skin.bits, both)
        either = compose_inpaint_mask(person, skin, combine="union").bits
        assert np.array_equal(either, person.bits | skin.bits)


def test_compose_dimension_mismatch():
    person = BinaryMask(np.ones((4, 4), dtype=bool))
    skin = BinaryMask(np.ones((4, 5), dtype=bool))
    with pytest.raises(MaskError, match="dimensions differ"):
        compose_inpaint_mask(person, skin)


def test_compose_unknown_mode():
    mask = BinaryMask(np.ones((2, 2), dtype=bool))
    with pytest.raises(MaskError, match="combine"):
        compose_inpaint_mask(mask, mask, combine="xor")


def test_mask_must_be_2d_nonempty():
    with pytest.raises(MaskError):
        BinaryMask(np.ones(4, dtype=bool))
    with pytest.raises(MaskError):
        BinaryMask(np.ones((0, 3), dtype=bool))


def test_decode_threshold_127(tmp_path):
    pixels = np.array([[0, 126, 127], [128, 200, 255]], dtype=np.uint8)
    path = tmp_path / "g.png"
    Image.fromarray(pixels, mode="L").save(path)
    mask = decode_mask(path)
    assert np.array_equal(
        mask.bits, [[False, False, False], [True, True, True]]
    )


def test_encode_decode_round_trip(tmp_path):
    rng = np.random.default_rng(25)
    bits = rng.random((15, 10)) < 0.4
    path = tmp_path / "m.png"
    encode_mask(BinaryMask(bits), path)
    pixels = np.asarray(Image.open(path))
    assert set(np.unique(pixels)) <= {0, 255}
    assert np.array_equal(decode_mask(path).bits, bits)


def test_decode_rejects_multichannel(tmp_path):
    path = tmp_path / "rgb.png"
    Image.new("RGB", (4, 4), (255, 0, 0)).save(path)
    with pytest.raises(MaskError, match="mode 'RGB'"):
        decode_mask(path)


def test_decode_missing_file(tmp_path):
    with pytest.raises(MaskError, match="cannot read"):
        decode_mask(tmp_path / "absent.png")


def test_coverage():
    bits = np.zeros((4, 5), dtype=bool)
    assert coverage(BinaryMask(bits)) == 0.0
    bits[0, 0] = True
    assert coverage(BinaryMask(bits)) == pytest.approx(1 / 20)
    assert coverage(BinaryMask(np.ones((3, 3), dtype=bool))) == 1.0
