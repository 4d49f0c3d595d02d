"""False-colour rendering: colormaps, attention overlays, multi-channel composites."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .imaging import as_float_map, as_gray, normalize

__all__ = [
    "Colormap",
    "DEFAULT_COLORMAP",
    "round_half_away",
    "to_byte",
    "apply_colormap",
    "overlay",
    "proximity_map",
    "multichannel_composite",
]

log = logging.getLogger(__name__)


def round_half_away(x) -> np.ndarray:
    """Round half away from zero (``np.round`` rounds half to even)."""
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def to_byte(x) -> np.ndarray:
    return np.clip(round_half_away(x), 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class Colormap:
    """Piecewise-linear colormap through ``(position, (r, g, b))`` anchors."""

    anchors: tuple[tuple[float, tuple[int, int, int]], ...]

    def __post_init__(self):
        anchors = tuple((float(p), tuple(int(c) for c in rgb)) for p, rgb in self.anchors)
        if len(anchors) < 2:
            raise ValueError("a colormap needs at least two anchors")
        positions = [p for p, _ in anchors]
        if positions[0] != 0.0 or positions[-1] != 1.0:
            raise ValueError("colormap positions must start at 0 and end at 1")
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise ValueError("colormap positions must be strictly increasing")
        for _, rgb in anchors:
            if len(rgb) != 3 or any(not 0 <= c <= 255 for c in rgb):
                raise ValueError(f"invalid anchor colour {rgb!r}")
        object.__setattr__(self, "anchors", anchors)

    @classmethod
    def parse(cls, text: str) -> "Colormap":
        """Parse ``"0:20,20,120; 0.35:0,180,200; ..."``."""
        anchors = []
        for item in text.split(";"):
            item = item.strip()
            if not item:
                continue
            pos, _, rgb = item.partition(":")
            anchors.append((float(pos), tuple(int(c) for c in rgb.split(","))))
        return cls(tuple(anchors))

    def format(self) -> str:
        return "; ".join(f"{p:g}:{r},{g},{b}" for p, (r, g, b) in self.anchors)

    def positions(self) -> np.ndarray:
        return np.array([p for p, _ in self.anchors])

    def colors(self) -> np.ndarray:
        return np.array([rgb for _, rgb in self.anchors], dtype=np.float64)


# dark blue -> cyan -> green-yellow -> yellow
DEFAULT_COLORMAP = Colormap((
    (0.00, (20, 20, 120)),
    (0.35, (0, 180, 200)),
    (0.70, (150, 220, 80)),
    (1.00, (255, 235, 40)),
))


def apply_colormap(values, cmap: Colormap = DEFAULT_COLORMAP) -> np.ndarray:
    """Map values in [0, 1] to RGB bytes. Out-of-range values are clamped
    and counted in a logged warning."""
    v = as_float_map(values)
    outside = int(np.count_nonzero((v < 0) | (v > 1)))
    if outside:
        log.warning("apply_colormap: clamped %d value(s) outside [0, 1]", outside)
        v = np.clip(v, 0.0, 1.0)
    pos = cmap.positions()
    cols = cmap.colors()
    seg = np.clip(np.searchsorted(pos, v, side="right") - 1, 0, len(pos) - 2)
    p0 = pos[seg]
    frac = (v - p0) / (pos[seg + 1] - p0)
    c0 = cols[seg]
    c1 = cols[seg + 1]
    rgb = c0 + frac[..., None] * (c1 - c0)
    return to_byte(rgb)


def overlay(base, attn, cmap: Colormap = DEFAULT_COLORMAP, alpha: float = 0.5) -> np.ndarray:
    """Blend a colormapped attention map over a gray image."""
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    gray = as_gray(base).astype(np.float64)
    a = as_float_map(attn)
    if gray.shape != a.shape:
        raise ValueError(f"dimension mismatch: base {gray.shape} vs attention {a.shape}")
    colored = apply_colormap(a, cmap).astype(np.float64)
    return to_byte((1.0 - alpha) * gray[..., None] + alpha * colored)


def proximity_map(dist, decay: float) -> np.ndarray:
    """Interface proximity ``normalize(exp(-dist / decay))`` for the green plane."""
    return normalize(np.exp(-as_float_map(dist) / decay))


def multichannel_composite(boundary, spatial, density) -> np.ndarray:
    """R = boundary strength, G = interface proximity, B = raw intensity."""
    b = as_float_map(boundary)
    s = as_float_map(spatial)
    d = as_gray(density)
    if not (b.shape == s.shape == d.shape):
        raise ValueError(f"dimension mismatch: {b.shape}, {s.shape}, {d.shape}")
    out = np.empty(d.shape + (3,), dtype=np.uint8)
    out[..., 0] = to_byte(255.0 * np.clip(b, 0.0, 1.0))
    out[..., 1] = to_byte(255.0 * np.clip(s, 0.0, 1.0))
    out[..., 2] = d
    return out
