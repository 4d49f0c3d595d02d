"""Attention maps and interface-quality metrics.

Two complementary views of a micrograph:

* a per-pixel attention map that multiplies normalised gradient strength by
  an exponential decay with distance from the segmented interface, lifted
  onto a constant floor for bulk material;
* a parameter-free patch self-attention: each patch is described by three
  scaled statistics, attention is the row softmax of the scaled Gram
  matrix, and the saliency of a patch is the mean attention it receives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .edges import gradient_magnitude, sobel_gradients
from .geometry import find_holes
from .imaging import as_float_map, as_gray, as_mask, foreground_fraction, normalize

__all__ = [
    "AttentionParams",
    "InterfaceMetrics",
    "attention_map",
    "patch_grid",
    "patch_features",
    "self_attention",
    "saliency_map",
    "interface_metrics",
]


@dataclass(frozen=True)
class AttentionParams:
    floor: float = 0.25
    decay: float = 15.0
    patch_size: int = 8
    scale: float | None = None   # None -> 1/sqrt(feature dimension)

    def __post_init__(self):
        if not 0 <= self.floor < 1:
            raise ValueError("floor must lie in [0, 1)")
        if not self.decay > 0:
            raise ValueError("decay must be positive")
        if self.patch_size < 2:
            raise ValueError("patch_size must be >= 2")
        if self.scale is not None and not self.scale > 0:
            raise ValueError("scale must be positive")


@dataclass(frozen=True)
class InterfaceMetrics:
    transition_sharpness: float
    defect_density: float
    edge_density: float
    white_fraction: float
    threshold: float


def attention_map(grad_norm, dist, params: AttentionParams | None = None) -> np.ndarray:
    """``floor + (1 - floor) * grad_norm * exp(-dist / decay)``, in [floor, 1]."""
    params = params or AttentionParams()
    g = as_float_map(grad_norm)
    d = as_float_map(dist)
    if g.shape != d.shape:
        raise ValueError(f"dimension mismatch: gradient {g.shape} vs distance {d.shape}")
    return params.floor + (1.0 - params.floor) * g * np.exp(-d / params.decay)


def patch_grid(height: int, width: int, patch_size: int) -> tuple[int, int]:
    """Number of patch rows and columns; ragged bottom/right patches count."""
    return -(-height // patch_size), -(-width // patch_size)


def patch_features(image, grad_norm, patch_size: int = 8) -> np.ndarray:
    """Per-patch ``[mean/255, std/128, mean grad_norm]``, patches row-major.

    Standard deviation is the population value over the patch's pixels.
    """
    if patch_size < 2:
        raise ValueError("patch_size must be >= 2")
    img = as_gray(image).astype(np.float64)
    g = as_float_map(grad_norm)
    if g.shape != img.shape:
        raise ValueError(f"dimension mismatch: image {img.shape} vs gradient {g.shape}")
    h, w = img.shape
    rows, cols = patch_grid(h, w, patch_size)
    feats = np.empty((rows * cols, 3), dtype=np.float64)
    for i in range(rows):
        for j in range(cols):
            sl = (slice(i * patch_size, (i + 1) * patch_size), slice(j * patch_size, (j + 1) * patch_size))
            block = img[sl]
            feats[i * cols + j] = (block.mean() / 255.0, block.std() / 128.0, g[sl].mean())
    return feats


def self_attention(features, scale: float | None = None) -> np.ndarray:
    """Row-softmax of ``F @ F.T * scale`` with identity query/key projections."""
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2 or f.shape[0] < 1:
        raise ValueError(f"features must be an (n, d) matrix with n >= 1, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError("non-finite patch features")
    if scale is None:
        scale = 1.0 / math.sqrt(f.shape[1])
    logits = (f @ f.T) * scale
    logits -= logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    return e / e.sum(axis=1, keepdims=True)


def saliency_map(attn, grid: tuple[int, int], shape: tuple[int, int], patch_size: int) -> np.ndarray:
    """Incoming attention per patch, normalised and painted back at pixel size.

    ``grid`` is ``(patch_rows, patch_cols)``; ``shape`` is the output
    ``(height, width)``.
    """
    s = np.asarray(attn, dtype=np.float64)
    rows, cols = grid
    n = rows * cols
    if s.shape != (n, n):
        raise ValueError(f"attention matrix {s.shape} does not match a {rows}x{cols} patch grid")
    h, w = shape
    if patch_grid(h, w, patch_size) != (rows, cols):
        raise ValueError(f"output shape {shape} does not tile into a {rows}x{cols} grid of {patch_size}px patches")
    per_patch = normalize(s.mean(axis=0).reshape(rows, cols))
    full = np.repeat(np.repeat(per_patch, patch_size, axis=0), patch_size, axis=1)
    return full[:h, :w].copy()


def interface_metrics(image, deposit, edges, dist, threshold: float, band_width: float = 10.0,
                      grad=None, min_hole_area: int = 1) -> InterfaceMetrics:
    """Bond-quality summary of one segmented sample.

    ``grad`` is the gradient magnitude used for transition sharpness; when
    omitted it is the plain Sobel magnitude of ``image``. ``dist`` must be the
    distance transform of ``edges``.
    """
    img = as_gray(image)
    mask = as_mask(deposit)
    edge_mask = as_mask(edges)
    d = as_float_map(dist)
    if grad is None:
        grad = gradient_magnitude(sobel_gradients(img.astype(np.float64)))
    grad = as_float_map(grad)
    if not (img.shape == mask.shape == edge_mask.shape == d.shape == grad.shape):
        raise ValueError("interface_metrics inputs must share one shape")

    band = d <= band_width
    global_mean = grad.mean()
    sharpness = float(grad[band].mean() / global_mean) if global_mean > 0 and band.any() else 0.0

    # Voids count as part of the deposit footprint, keeping the ratio in [0, 1].
    hole_px = int(np.count_nonzero(find_holes(mask, min_area=min_hole_area) == 255))
    footprint = int(np.count_nonzero(mask == 255)) + hole_px
    defect_density = hole_px / footprint if footprint else 0.0

    return InterfaceMetrics(
        transition_sharpness=sharpness,
        defect_density=float(defect_density),
        edge_density=float(np.count_nonzero(edge_mask == 255)) / edge_mask.size,
        white_fraction=foreground_fraction(mask),
        threshold=float(threshold),
    )
