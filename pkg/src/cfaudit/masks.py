"""Binary mask algebra for building inpainting masks.

The inpainting mask for an image is the pixelwise intersection of a person
mask and a skin mask, dilated once with a square 3x3 structuring element to
absorb small segmentation inaccuracies. Out-of-bounds neighbors count as
background (zero padding).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import MaskError

COMBINE_MODES = ("intersect", "union")


@dataclass
class BinaryMask:
    """Row-major boolean raster; True marks foreground."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2 or bits.shape[0] < 1 or bits.shape[1] < 1:
            raise MaskError(f"mask must be a non-empty 2-d raster, got shape {bits.shape}")
        self.bits = bits

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]


def decode_mask(path: str | Path) -> BinaryMask:
    """Read an 8-bit single-channel PNG; pixels above 127 become foreground."""
    try:
        with Image.open(path) as img:
            if img.mode != "L":
                raise MaskError(
                    f"{path}: expected an 8-bit single-channel image, got mode {img.mode!r}"
                )
            pixels = np.asarray(img, dtype=np.uint8)
    except (OSError, UnidentifiedImageError) as exc:
        raise MaskError(f"cannot read mask {path}: {exc}") from exc
    return BinaryMask(pixels > 127)


def encode_mask(mask: BinaryMask, path: str | Path) -> None:
    """Write as 8-bit grayscale PNG, foreground 255, background 0."""
    pixels = np.where(mask.bits, 255, 0).astype(np.uint8)
    Image.fromarray(pixels, mode="L").save(path, format="PNG")


def compose_inpaint_mask(
    person: BinaryMask, skin: BinaryMask, combine: str = "intersect"
) -> BinaryMask:
    """Combine person and skin masks, pixelwise AND by default.

    ``combine="union"`` is available for reproduction experiments; the
    intersection is what keeps edits confined to skin regions of detected
    people.
    """
    if combine not in COMBINE_MODES:
        raise MaskError(f"combine must be one of {COMBINE_MODES}, got {combine!r}")
    if person.bits.shape != skin.bits.shape:
        raise MaskError(
            f"mask dimensions differ: person {person.width}x{person.height}, "
            f"skin {skin.width}x{skin.height}"
        )
    if combine == "intersect":
        return BinaryMask(person.bits & skin.bits)
    return BinaryMask(person.bits | skin.bits)


def dilate_3x3(mask: BinaryMask, iterations: int = 1) -> BinaryMask:
    """Dilate with a full 3x3 structuring element.

    A pixel is foreground iff itself or any of its 8 neighbors is
    foreground in the input.
    """
    if iterations < 0:
        raise MaskError(f"iterations must be >= 0, got {iterations}")
    bits = mask.bits
    for _ in range(iterations):
        padded = np.pad(bits, 1, mode="constant", constant_values=False)
        out = np.zeros_like(bits)
        for dy in (0, 1, 2):
            for dx in (0, 1, 2):
                out |= padded[dy:dy + bits.shape[0], dx:dx + bits.shape[1]]
        bits = out
    return BinaryMask(bits)


def coverage(mask: BinaryMask) -> float:
    """Foreground fraction of the raster, in [0, 1]."""
    return float(np.count_nonzero(mask.bits)) / mask.bits.size
