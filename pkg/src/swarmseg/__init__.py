"""Swarm-optimised threshold segmentation and attention-weighted rendering
of layered-deposition micrographs."""

__version__ = "0.1.0"
