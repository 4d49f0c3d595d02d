"""Raster I/O and the small per-pixel operations shared by every stage.

Rasters are plain numpy arrays:

* gray image  -- ``uint8`` array of shape ``(height, width)``
* binary mask -- ``uint8`` array of shape ``(height, width)`` holding only 0 or 255
* float map   -- ``float64`` array of shape ``(height, width)``, all finite
* rgb image   -- ``uint8`` array of shape ``(height, width, 3)``
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

__all__ = [
    "ImageFormatError",
    "MalformedHeaderError",
    "UnsupportedFormatError",
    "UnsupportedMaxvalError",
    "TruncatedDataError",
    "as_gray",
    "as_mask",
    "as_float_map",
    "load_image",
    "save_image",
    "binarize",
    "histogram",
    "foreground_fraction",
    "normalize",
]


class ImageFormatError(ValueError):
    """Base class for undecodable image files."""


class MalformedHeaderError(ImageFormatError):
    pass


class UnsupportedFormatError(ImageFormatError):
    pass


class UnsupportedMaxvalError(ImageFormatError):
    pass


class TruncatedDataError(ImageFormatError):
    pass


def as_gray(image) -> np.ndarray:
    arr = np.asarray(image)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D raster, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("gray intensities must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def as_mask(mask) -> np.ndarray:
    arr = as_gray(mask)
    if not np.all((arr == 0) | (arr == 255)):
        raise ValueError("binary mask values must be 0 or 255")
    return arr


def as_float_map(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D map, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("float map contains NaN or Inf")
    return arr


# --- netpbm ---------------------------------------------------------------

def _read_header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens after the magic.

    Returns the tokens and the offset of the single whitespace byte that
    terminates the last one.
    """
    tokens: list[bytes] = []
    pos = 2
    n = len(data)
    while len(tokens) < count:
        if pos >= n:
            raise MalformedHeaderError("header ends before all fields were read")
        ch = data[pos:pos + 1]
        if ch == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise MalformedHeaderError("unterminated comment in header")
            pos = end + 1
        elif ch.isspace():
            pos += 1
        else:
            start = pos
            while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
                pos += 1
            tokens.append(data[start:pos])
    if pos >= n or not data[pos:pos + 1].isspace():
        raise MalformedHeaderError("missing whitespace after maxval")
    return tokens, pos


def _decode_netpbm(data: bytes) -> np.ndarray:
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise UnsupportedFormatError(f"unsupported format: magic {magic!r}")
    if magic == b"P6":
        # Color input is outside the grayscale contract.
        raise UnsupportedFormatError("unsupported format: P6 color image")
    tokens, pos = _read_header_tokens(data, 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise MalformedHeaderError(f"non-integer header fields {tokens!r}") from None
    if width < 1 or height < 1:
        raise MalformedHeaderError(f"invalid dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedMaxvalError(f"maxval must be 255, got {maxval}")
    payload = data[pos + 1:]
    expected = width * height
    if len(payload) < expected:
        raise TruncatedDataError("unexpected end of data")
    return np.frombuffer(payload, dtype=np.uint8, count=expected).reshape(height, width).copy()


def _decode_png(path: Path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        if im.mode != "L":
            raise UnsupportedFormatError(f"unsupported format: PNG mode {im.mode!r} is not 8-bit grayscale")
        return np.array(im, dtype=np.uint8)


def load_image(path) -> np.ndarray:
    """Load an 8-bit grayscale image from a binary PGM (P5) or PNG file.

    Intensities are returned exactly as stored. Raises ``FileNotFoundError``
    for a missing file and an :class:`ImageFormatError` subclass for anything
    that is not 8-bit grayscale.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return _decode_png(path)
    if len(data) < 2:
        raise MalformedHeaderError("file too short for a netpbm header")
    return _decode_netpbm(data)


def save_image(image, path) -> None:
    """Write a gray image or mask as P5, or an RGB image as P6."""
    arr = np.asarray(image)
    if arr.ndim == 2:
        arr = as_gray(arr)
        magic = b"P5"
    elif arr.ndim == 3 and arr.shape[2] == 3:
        if arr.dtype != np.uint8:
            raise ValueError("rgb image must be uint8")
        magic = b"P6"
    else:
        raise ValueError(f"cannot save raster of shape {arr.shape}")
    height, width = arr.shape[:2]
    header = b"%s\n%d %d\n255\n" % (magic, width, height)
    with open(os.fspath(path), "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(arr).tobytes())


# --- pixel operations -----------------------------------------------------

def binarize(image, t) -> np.ndarray:
    """Foreground (255) wherever the pixel is >= ``t``."""
    arr = as_gray(image)
    return np.where(arr >= t, np.uint8(255), np.uint8(0))


def histogram(image) -> np.ndarray:
    return np.bincount(as_gray(image).ravel(), minlength=256).astype(np.int64)


def foreground_fraction(mask) -> float:
    arr = np.asarray(mask)
    return float(np.count_nonzero(arr == 255)) / arr.size


def normalize(values) -> np.ndarray:
    """Min-max rescale to [0, 1]; a constant map becomes all zeros."""
    arr = as_float_map(values)
    lo = arr.min()
    hi = arr.max()
    if hi <= lo:
        return np.zeros_like(arr)
    return (arr - lo) / (hi - lo)
