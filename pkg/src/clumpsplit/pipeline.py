"""Whole-image cell separation: threshold, label, split, relabel."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .geometry import Clump
from .splitter import SplitConfig, SplitRecord, split_clump
from .thresholding import apply_threshold, sdd_threshold


@dataclass(frozen=True)
class PipelineConfig:
    split: SplitConfig = field(default_factory=SplitConfig)
    threshold: int | None = None  # fixed grey threshold; None = SDD selection
    hist_bandwidth: int = 16
    hist_half_window: int = 5
    invert: bool = False  # dark cells on a bright background

    def __post_init__(self):
        if self.threshold is not None and not 0 <= self.threshold <= 255:
            raise ValueError("threshold must be in [0, 255]")
        if self.hist_bandwidth < 1:
            raise ValueError("hist_bandwidth must be >= 1")
        if self.hist_half_window < 2:
            raise ValueError("hist_half_window must be >= 2")

    def to_dict(self) -> dict:
        return {
            "split": self.split.to_dict(),
            "threshold": self.threshold,
            "hist_bandwidth": self.hist_bandwidth,
            "hist_half_window": self.hist_half_window,
            "invert": self.invert,
        }


@dataclass(eq=False)
class SegmentationResult:
    cells: list[Clump]
    label_map: np.ndarray  # uint16
    traces: list[SplitRecord]
    cut_pixels: np.ndarray
    n_clumps: int
    threshold: int | None
    config: dict

    @property
    def centroids(self) -> np.ndarray:
        return np.array([c.centroid for c in self.cells], dtype=float).reshape(-1, 2)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "threshold": self.threshold,
            "clumps": self.n_clumps,
            "cells": len(self.cells),
            "cuts": sum(r.cut for r in self.traces),
            "trace": [r.to_dict() for r in self.traces],
        }


def to_mask(image, config: PipelineConfig = PipelineConfig()) -> tuple[np.ndarray, int | None]:
    """Foreground mask of ``image`` and the threshold used (None for bool input)."""
    img = np.asarray(image)
    if img.dtype == bool:
        return (~img if config.invert else img), None
    if config.invert:
        img = 255 - img.astype(np.int64)
    t = config.threshold
    if t is None:
        t = sdd_threshold(img, config.hist_bandwidth, config.hist_half_window)
    return apply_threshold(img, t), int(t)


def run(image, config: PipelineConfig | SplitConfig = PipelineConfig(), workers: int = 1):
    """Segment ``image`` into separated cells.

    Parameters
    ----------
    image : array_like
        Boolean mask, or 8-bit grey image thresholded first.
    config : PipelineConfig or SplitConfig
    workers : int
        Threads used across top-level clumps. The output does not depend
        on it.

    Returns
    -------
    SegmentationResult
        Cells labelled ``1..K`` in order of centroid ``(y, x)``.

    Raises
    ------
    UnimodalHistogram
        Grey input without a usable histogram valley.
    """
    if isinstance(config, SplitConfig):
        config = PipelineConfig(split=config)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    mask, t = to_mask(image, config)
    clumps = geo.label_components(mask)

    def one(clump):
        return split_clump(clump, config=config.split)

    if workers == 1 or len(clumps) < 2:
        results = [one(c) for c in clumps]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, clumps))

    cells = [c for r in results for c in r.cells]
    traces = [rec for r in results for rec in r.trace]
    cuts = [r.cut_pixels for r in results if len(r.cut_pixels)]
    cut_pixels = np.concatenate(cuts) if cuts else np.empty((0, 2), dtype=np.int64)
    cells = relabel(cells)
    return SegmentationResult(
        cells,
        label_map(cells, mask.shape),
        traces,
        cut_pixels,
        len(clumps),
        t,
        config.to_dict(),
    )


def relabel(cells) -> list[Clump]:
    """Cells renumbered ``1..K`` by centroid ``(y, x)``, then first pixel."""

    def key(c):
        x, y = c.centroid
        first = c.pixels[np.lexsort((c.pixels[:, 0], c.pixels[:, 1]))[0]]
        return (y, x, int(first[1]), int(first[0]))

    return [Clump(i, c.pixels) for i, c in enumerate(sorted(cells, key=key), start=1)]


def label_map(cells, shape) -> np.ndarray:
    if len(cells) > np.iinfo(np.uint16).max:
        raise ValueError("more cells than a 16-bit label map can hold")
    out = np.zeros(shape, dtype=np.uint16)
    for c in cells:
        out[c.pixels[:, 1], c.pixels[:, 0]] = c.label
    return out
