"""Exact Euclidean distance transform, component labelling and void detection."""

from __future__ import annotations

import numpy as np

from .imaging import as_mask

__all__ = [
    "NoFeaturesError",
    "squared_distance_transform",
    "distance_transform",
    "connected_components",
    "find_holes",
    "interface_band",
]


class NoFeaturesError(ValueError):
    pass


def _row_pass(features: np.ndarray) -> list[list[int | None]]:
    """Squared horizontal distance to the nearest feature in the same row.

    ``None`` marks rows without any feature.
    """
    h, w = features.shape
    cols = np.arange(w)
    out: list[list[int | None]] = []
    for r in range(h):
        idx = np.flatnonzero(features[r])
        if idx.size == 0:
            out.append([None] * w)
            continue
        # Nearest feature column via the midpoints between consecutive features.
        pos = np.searchsorted(idx, cols)
        left = idx[np.clip(pos - 1, 0, idx.size - 1)]
        right = idx[np.clip(pos, 0, idx.size - 1)]
        d = np.minimum(np.abs(cols - left), np.abs(cols - right))
        out.append([int(v) * int(v) for v in d])
    return out


def _lower_envelope(f: list[int | None], n: int) -> list[int]:
    """1-D squared distance transform of sampled function ``f`` (lower
    envelope of parabolas ``(q - p)^2 + f[p]``), in exact integer arithmetic.

    Breakpoints are rationals ``num / den`` compared by cross-multiplication,
    so no rounding ever decides which parabola wins.
    """
    sites = [p for p in range(n) if f[p] is not None]
    v: list[int] = []
    z_num: list[int] = []   # left boundary of parabola k is z_num[k] / z_den[k]
    z_den: list[int] = []
    for q in sites:
        fq = f[q] + q * q
        while v:
            p = v[-1]
            num = fq - (f[p] + p * p)
            den = 2 * (q - p)
            # Intersection s = num/den; pop p if s <= its left boundary.
            if z_den[-1] == 0 or num * z_den[-1] > z_num[-1] * den:
                break
            v.pop()
            z_num.pop()
            z_den.pop()
        if not v:
            v.append(q)
            z_num.append(-1)
            z_den.append(0)   # -infinity sentinel
        else:
            p = v[-1]
            v.append(q)
            z_num.append(fq - (f[p] + p * p))
            z_den.append(2 * (q - p))
    out = [0] * n
    k = 0
    for q in range(n):
        # Advance while the next parabola's left boundary is <= q.
        while k + 1 < len(v) and z_num[k + 1] <= q * z_den[k + 1]:
            k += 1
        p = v[k]
        out[q] = (q - p) * (q - p) + f[p]
    return out


def squared_distance_transform(features) -> np.ndarray:
    """Exact squared Euclidean distance (int64) to the nearest 255 pixel."""
    mask = as_mask(features) == 255
    if not mask.any():
        raise NoFeaturesError("no features")
    h, w = mask.shape
    rows = _row_pass(mask)
    out = np.empty((h, w), dtype=np.int64)
    for c in range(w):
        out[:, c] = _lower_envelope([rows[r][c] for r in range(h)], h)
    return out


def distance_transform(features) -> np.ndarray:
    """Euclidean distance in pixels from each pixel to the nearest feature."""
    return np.sqrt(squared_distance_transform(features).astype(np.float64))


class _DisjointSet:
    def __init__(self):
        self.parent: list[int] = []

    def make(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra < rb:
            self.parent[rb] = ra
        elif rb < ra:
            self.parent[ra] = rb


def _runs(row: np.ndarray) -> list[tuple[int, int]]:
    """Half-open [start, stop) column ranges of True values in a row."""
    padded = np.concatenate(([False], row, [False]))
    change = np.flatnonzero(padded[1:] != padded[:-1])
    return list(zip(change[::2].tolist(), change[1::2].tolist()))


def connected_components(mask, connectivity: int = 8) -> tuple[np.ndarray, int]:
    """Label the 255 pixels of ``mask``.

    Two-pass union-find over row runs: the first pass gives every run a
    provisional label and merges labels of touching runs in the previous
    row; the second pass resolves equivalences and renumbers components
    1..K in row-major order of first appearance. Returns ``(labels, K)``.
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    fg = as_mask(mask) == 255
    h, w = fg.shape
    reach = 1 if connectivity == 8 else 0
    ds = _DisjointSet()
    row_runs: list[list[tuple[int, int, int]]] = []
    prev: list[tuple[int, int, int]] = []
    for r in range(h):
        cur = []
        j = 0
        for start, stop in _runs(fg[r]):
            label = ds.make()
            # Runs in the previous row overlapping [start - reach, stop + reach).
            while j < len(prev) and prev[j][1] + reach <= start:
                j += 1
            k = j
            while k < len(prev) and prev[k][0] < stop + reach:
                ds.union(label, prev[k][2])
                k += 1
            cur.append((start, stop, label))
        row_runs.append(cur)
        prev = cur

    labels = np.zeros((h, w), dtype=np.int64)
    renumber: dict[int, int] = {}
    for r, runs in enumerate(row_runs):
        for start, stop, label in runs:
            root = ds.find(label)
            if root not in renumber:
                renumber[root] = len(renumber) + 1
            labels[r, start:stop] = renumber[root]
    return labels, len(renumber)


def find_holes(deposit, min_area: int = 1) -> np.ndarray:
    """Background regions fully enclosed by the deposit.

    Background (0) pixels are grouped 4-connected, the dual of the
    8-connected foreground, so a diagonal gap in a deposit wall does not
    open a void to the outside. Components touching the image border are
    never holes. Components smaller than ``min_area`` pixels are dropped.
    """
    arr = as_mask(deposit)
    background = np.where(arr == 0, np.uint8(255), np.uint8(0))
    labels, k = connected_components(background, connectivity=4)
    if k == 0:
        return np.zeros_like(arr)
    border = np.unique(np.concatenate((labels[0], labels[-1], labels[:, 0], labels[:, -1])))
    sizes = np.bincount(labels.ravel(), minlength=k + 1)
    keep = sizes >= min_area
    keep[0] = False
    keep[border] = False
    return np.where(keep[labels], np.uint8(255), np.uint8(0))


def interface_band(edges, width: float, dist: np.ndarray | None = None) -> np.ndarray:
    """Pixels within ``width`` (Euclidean) of an edge pixel.

    A precomputed ``distance_transform(edges)`` may be passed as ``dist``.
    """
    if not width > 0:
        raise ValueError(f"band width must be positive, got {width}")
    if dist is None:
        dist = distance_transform(edges)
    return np.where(dist <= width, np.uint8(255), np.uint8(0))
