"""Synthetic layered-deposition micrographs with exact ground truth.

A bright deposit occupies the top of the frame and fills a U-shaped
depression cut into a darker substrate. Elliptical voids inside the deposit
take the substrate intensity. Pixel noise is Gaussian, drawn from a seeded
splitmix64 stream (Box-Muller, one deviate per pixel in row-major order).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .render import to_byte
from .rng import SplitMix64

__all__ = ["Void", "PhantomSpec", "PhantomTruth", "synth_sample", "step_phantom", "build_series"]


@dataclass(frozen=True)
class Void:
    """Axis-aligned ellipse centred at column ``cx``, row ``cy``."""

    cx: float
    cy: float
    rx: float
    ry: float


@dataclass(frozen=True)
class PhantomSpec:
    width: int = 256
    height: int = 256
    background_mean: float = 120.0
    background_std: float = 20.0
    deposit_mean: float = 212.0
    deposit_std: float = 20.0
    interface_row: float = 100.0
    u_depth: float = 60.0
    u_width: float = 140.0
    voids: tuple[Void, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.width < 3 or self.height < 3:
            raise ValueError("phantom must be at least 3x3")
        for name in ("background_mean", "deposit_mean"):
            if not 0 <= getattr(self, name) <= 255:
                raise ValueError(f"{name} must lie in [0, 255]")
        if not self.deposit_mean > self.background_mean:
            raise ValueError("deposit_mean must exceed background_mean")
        if self.background_std < 0 or self.deposit_std < 0:
            raise ValueError("noise std must be non-negative")
        if self.u_depth < 0 or self.u_width < 0:
            raise ValueError("U depth and width must be non-negative")
        object.__setattr__(self, "voids", tuple(
            v if isinstance(v, Void) else Void(*v) for v in self.voids))

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.background_mean + self.deposit_mean)


@dataclass
class PhantomTruth:
    deposit: np.ndarray            # 255 where deposit material is present (voids excluded)
    voids: np.ndarray              # 255 inside voids
    void_masks: list[np.ndarray] = field(default_factory=list)
    interface: np.ndarray = None   # per-column row of the deposit/substrate boundary


def interface_curve(spec: PhantomSpec) -> np.ndarray:
    """Row of the deposit/substrate boundary at each column centre."""
    x = np.arange(spec.width, dtype=np.float64)
    cx = (spec.width - 1) / 2.0
    half = spec.u_width / 2.0
    curve = np.full(spec.width, float(spec.interface_row))
    if half > 0 and spec.u_depth > 0:
        u = (x - cx) / half
        inside = np.abs(u) < 1
        curve[inside] += spec.u_depth * np.sqrt(1.0 - u[inside] ** 2)
    return curve


def _ellipse(shape: tuple[int, int], v: Void) -> np.ndarray:
    r, c = np.indices(shape, dtype=np.float64)
    return ((c - v.cx) / v.rx) ** 2 + ((r - v.cy) / v.ry) ** 2 <= 1.0


def synth_sample(spec: PhantomSpec) -> tuple[np.ndarray, PhantomTruth]:
    """Render ``spec``; returns the gray image and its ground truth."""
    h, w = spec.height, spec.width
    curve = interface_curve(spec)
    rows = np.arange(h, dtype=np.float64)[:, None]
    region = rows < curve[None, :]

    void_masks = []
    voids = np.zeros((h, w), dtype=bool)
    for v in spec.voids:
        if not (v.rx > 0 and v.ry > 0):
            raise ValueError(f"void radii must be positive: {v}")
        m = _ellipse((h, w), v)
        if not m.any():
            raise ValueError(f"void covers no pixel: {v}")
        # A void needs a deposit rim on all sides to be enclosed.
        grown = np.pad(m, 1)
        grown = (grown[:-2, :-2] | grown[:-2, 1:-1] | grown[:-2, 2:] | grown[1:-1, :-2] | grown[1:-1, 1:-1]
                 | grown[1:-1, 2:] | grown[2:, :-2] | grown[2:, 1:-1] | grown[2:, 2:])
        if grown[0].any() or grown[-1].any() or grown[:, 0].any() or grown[:, -1].any() or np.any(grown & ~region):
            raise ValueError(f"void must lie strictly inside the deposit region: {v}")
        void_masks.append(np.where(m, np.uint8(255), np.uint8(0)))
        voids |= m

    deposit = region & ~voids
    mean = np.where(deposit, spec.deposit_mean, spec.background_mean)
    std = np.where(deposit, spec.deposit_std, spec.background_std)
    noise = SplitMix64(spec.seed).normals(h * w).reshape(h, w)
    image = to_byte(np.clip(mean + std * noise, 0.0, 255.0))

    truth = PhantomTruth(
        deposit=np.where(deposit, np.uint8(255), np.uint8(0)),
        voids=np.where(voids, np.uint8(255), np.uint8(0)),
        void_masks=void_masks,
        interface=curve,
    )
    return image, truth


def step_phantom(size: int = 64, orientation: int = 0, low: int = 0, high: int = 255) -> tuple[np.ndarray, np.ndarray]:
    """Noise-free straight step edge through the image centre.

    ``orientation`` in degrees (multiple of 45) is the direction of the
    step normal, pointing from the dark to the bright side. Returns the image
    and the signed distance of every pixel centre from the step line
    (bright where positive).
    """
    if orientation % 45:
        raise ValueError("orientation must be a multiple of 45 degrees")
    theta = np.radians(orientation)
    r, c = np.indices((size, size), dtype=np.float64)
    centre = (size - 1) / 2.0
    # Column axis points right, row axis points down; normal (cos, -sin) in (col, row).
    s = np.round((c - centre) * np.cos(theta) - (r - centre) * np.sin(theta), 9)
    bright = s > 0
    image = np.where(bright, np.uint8(high), np.uint8(low))
    return image, s


def build_series(base: PhantomSpec | None = None, count: int = 5) -> list[PhantomSpec]:
    """Five-sample series emulating a batch of builds with varying interfaces.

    U depth, width and noise seed vary per sample; one sample in the middle
    of the series carries three voids.
    """
    base = base or PhantomSpec()
    specs = []
    for i in range(count):
        depth = base.u_depth * (0.7 + 0.15 * i)
        width = base.u_width * (0.85 + 0.075 * i)
        voids: tuple[Void, ...] = ()
        if i == count // 2:
            y = base.interface_row * 0.5
            voids = (Void(base.width * 0.25, y, 6, 4), Void(base.width * 0.5, y, 4, 4), Void(base.width * 0.75, y, 5, 3))
        specs.append(replace(base, u_depth=depth, u_width=width, voids=voids, seed=base.seed + i))
    return specs
