"""End-to-end analysis of a batch of micrographs."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .attention import (
    InterfaceMetrics,
    attention_map,
    interface_metrics,
    patch_features,
    patch_grid,
    saliency_map,
    self_attention,
)
from .config import AnalysisConfig
from .edges import canny, edge_sum, gaussian_blur, gradient_magnitude, sobel_gradients
from .geometry import connected_components, distance_transform, find_holes
from .imaging import binarize, foreground_fraction, load_image, normalize, save_image
from .phantom import synth_sample
from .pso import PsoResult, optimize_threshold
from .render import apply_colormap, multichannel_composite, overlay, proximity_map
from .report import DEGENERATE_WARNING, AnalysisReport, SampleRecord

__all__ = ["Sample", "Products", "collect_samples", "analyze_at_threshold", "render_products",
           "analyze_sample", "run_analysis"]

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".pgm", ".png")
OUTPUT_NAMES = {
    "mask": "{}_segmented.pgm",
    "overlay": "{}_overlay.ppm",
    "composite": "{}_composite.ppm",
    "saliency": "{}_saliency.ppm",
}


@dataclass
class Sample:
    sample_id: str
    source: str
    image: np.ndarray | None = None   # preloaded (phantoms); files load lazily


@dataclass
class Products:
    """Everything derived from one image at one threshold."""

    threshold: int
    mask: np.ndarray
    edges: np.ndarray
    grad: np.ndarray
    grad_norm: np.ndarray
    dist: np.ndarray
    attention: np.ndarray
    saliency: np.ndarray
    holes: np.ndarray
    hole_count: int
    metrics: InterfaceMetrics


def collect_samples(config: AnalysisConfig) -> list[Sample]:
    """Expand inputs (files, or directories scanned for .pgm/.png) and
    configured phantoms, in sorted order."""
    paths: set[str] = set()
    for item in config.inputs:
        p = Path(item)
        if p.is_dir():
            paths.update(str(c) for c in p.iterdir() if c.is_file() and c.suffix.lower() in IMAGE_SUFFIXES)
        else:
            paths.add(str(p))
    samples = []
    seen: dict[str, int] = {}
    for path in sorted(paths):
        stem = Path(path).stem
        seen[stem] = seen.get(stem, 0) + 1
        sample_id = stem if seen[stem] == 1 else f"{stem}_{seen[stem]}"
        samples.append(Sample(sample_id, path))
    if config.phantom_count:
        for i in range(config.phantom_count):
            spec = replace(config.phantom, seed=config.phantom.seed + i)
            image, _ = synth_sample(spec)
            samples.append(Sample(f"phantom_{i:03d}", f"phantom:{i}", image))
    return samples


def analyze_at_threshold(image: np.ndarray, threshold: int, config: AnalysisConfig) -> Products:
    """Segment ``image`` at ``threshold`` and derive every map and metric."""
    mask = binarize(image, threshold)
    edges = canny(mask, config.canny)
    if edge_sum(edges) == 0:
        raise ValueError(f"segmentation at threshold {threshold} has no interface edges")
    grad = gradient_magnitude(sobel_gradients(gaussian_blur(image, config.canny.sigma)))
    grad_norm = normalize(grad)
    dist = distance_transform(edges)
    attn = attention_map(grad_norm, dist, config.attention)

    p = config.attention.patch_size
    h, w = image.shape
    weights = self_attention(patch_features(image, grad_norm, p), config.attention.scale)
    saliency = saliency_map(weights, patch_grid(h, w, p), (h, w), p)

    holes = find_holes(mask, min_area=config.min_hole_area)
    _, hole_count = connected_components(holes, connectivity=4)
    metrics = interface_metrics(image, mask, edges, dist, threshold, config.band_width,
                                grad=grad, min_hole_area=config.min_hole_area)
    return Products(threshold, mask, edges, grad, grad_norm, dist, attn, saliency, holes, hole_count, metrics)


def render_products(image: np.ndarray, products: Products, config: AnalysisConfig,
                    out_dir: Path, sample_id: str) -> dict[str, str]:
    """Write the requested images; returns ``{kind: file name}``."""
    written = {}
    for kind in config.emit:
        if kind == "mask":
            raster = products.mask
        elif kind == "overlay":
            raster = overlay(image, products.attention, config.colormap, config.overlay_alpha)
        elif kind == "composite":
            spatial = proximity_map(products.dist, config.attention.decay)
            raster = multichannel_composite(products.grad_norm, spatial, image)
        else:
            raster = apply_colormap(products.saliency, config.colormap)
        name = OUTPUT_NAMES[kind].format(sample_id)
        save_image(raster, out_dir / name)
        written[kind] = name
    return written


def _record_from(sample: Sample, image: np.ndarray, result: PsoResult | None, products: Products,
                 config: AnalysisConfig, outputs: dict[str, str]) -> SampleRecord:
    white = foreground_fraction(products.mask)
    warnings = []
    if not config.penalty_low < white < config.penalty_high:
        warnings.append(DEGENERATE_WARNING)
    return SampleRecord(
        sample_id=sample.sample_id,
        source=sample.source,
        threshold=products.threshold,
        best_fitness=result.best_fitness if result else None,
        iterations_used=len(result.history) if result else None,
        evaluations=result.evaluations if result else None,
        white_fraction=white,
        edge_count=edge_sum(products.edges),
        hole_count=products.hole_count,
        warnings=warnings,
        metrics=products.metrics,
        outputs=outputs,
    )


def analyze_sample(sample: Sample, config: AnalysisConfig, out_dir: Path) -> SampleRecord:
    """Full pipeline for one sample; failures become an ``error`` record."""
    try:
        image = sample.image if sample.image is not None else load_image(sample.source)
        result = optimize_threshold(image, config.pso, config.fitness)
        products = analyze_at_threshold(image, int(result.best_threshold), config)
        outputs = render_products(image, products, config, out_dir, sample.sample_id)
        return _record_from(sample, image, result, products, config, outputs)
    except Exception as exc:  # per-sample isolation: the batch carries on
        log.warning("sample %s failed: %s", sample.sample_id, exc)
        return SampleRecord(sample.sample_id, sample.source, error=f"{type(exc).__name__}: {exc}")


def render_sample(sample: Sample, threshold: int, config: AnalysisConfig, out_dir: Path) -> SampleRecord:
    """Re-render visualizations at a given threshold without optimizing."""
    image = sample.image if sample.image is not None else load_image(sample.source)
    products = analyze_at_threshold(image, threshold, config)
    outputs = render_products(image, products, config, out_dir, sample.sample_id)
    return _record_from(sample, image, None, products, config, outputs)


def run_analysis(config: AnalysisConfig) -> AnalysisReport:
    """Analyse every sample; records keep sorted input order whatever the
    worker count."""
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    samples = collect_samples(config)
    if config.jobs > 1 and len(samples) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            records = list(pool.map(lambda s: analyze_sample(s, config, out_dir), samples))
    else:
        records = [analyze_sample(s, config, out_dir) for s in samples]
    return AnalysisReport(
        seed=config.pso.seed,
        config_digest=config.digest(),
        tool_version=__version__,
        samples=records,
    )
