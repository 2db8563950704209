"""Prediction/ground-truth matching and the visual accuracy (VAC) score.

A prediction ``p`` is linked to a truth cell ``t`` when their IoU is at
least 0.5 or when the centroid of ``p`` falls inside ``t``. From the
resulting bipartite graph:

* truth with one partner that has no other partner -> segment
* truth with k >= 2 partners -> k - 1 splits
* prediction with k >= 2 partners -> k - 1 merges
* unlinked prediction -> add, unlinked truth -> missing
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .geometry import Clump

CellRecord = Clump


class EmptyEvaluation(ValueError):
    pass


@dataclass(frozen=True)
class VacReport:
    n_segment: int = 0
    n_split: int = 0
    n_merge: int = 0
    n_add: int = 0
    n_missing: int = 0

    @property
    def total(self) -> int:
        return self.n_segment + self.n_split + self.n_merge + self.n_add + self.n_missing

    @property
    def vac(self) -> float:
        return vac(self)

    def __add__(self, other: "VacReport") -> "VacReport":
        return VacReport(*(a + b for a, b in zip(self.counts, other.counts)))

    @property
    def counts(self) -> tuple[int, int, int, int, int]:
        return (self.n_segment, self.n_split, self.n_merge, self.n_add, self.n_missing)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["vac"] = self.vac
        return d


def vac(counts) -> float:
    """``segment / (segment + split + merge + add + missing)``.

    ``counts`` is a :class:`VacReport` or a 5-sequence in that order.
    """
    if isinstance(counts, VacReport):
        counts = counts.counts
    seg, split, merge, add, missing = (int(c) for c in counts)
    if min(seg, split, merge, add, missing) < 0:
        raise ValueError("counts must be non-negative")
    den = seg + split + merge + add + missing
    if den == 0:
        raise EmptyEvaluation("empty evaluation")
    return seg / den


def cells_to_labels(cells, shape) -> np.ndarray:
    """Label image with cell ``i`` of the list drawn as ``i + 1``."""
    out = np.zeros(shape, dtype=np.int64)
    for i, c in enumerate(cells, start=1):
        out[c.pixels[:, 1], c.pixels[:, 0]] = i
    return out


def link_table(pred, truth, iou_threshold: float = 0.5) -> set[tuple[int, int]]:
    """Set of linked ``(prediction label, truth label)`` pairs."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch: prediction {pred.shape} vs truth {truth.shape}")
    p_ids = np.unique(pred[pred > 0])
    t_ids = np.unique(truth[truth > 0])
    links: set[tuple[int, int]] = set()
    if len(p_ids) == 0:
        return links
    p_area = dict(zip(*np.unique(pred[pred > 0], return_counts=True)))
    t_area = dict(zip(*np.unique(truth[truth > 0], return_counts=True)))
    both = (pred > 0) & (truth > 0)
    pairs, inter = np.unique(
        np.column_stack([pred[both], truth[both]]), axis=0, return_counts=True
    )
    for (p, t), n in zip(pairs, inter):
        if n / (p_area[p] + t_area[t] - n) >= iou_threshold:
            links.add((int(p), int(t)))

    ys, xs = np.nonzero(pred)
    labs = pred[ys, xs]
    order = np.argsort(labs, kind="stable")
    labs, xs, ys = labs[order], xs[order], ys[order]
    bounds = np.r_[0, np.cumsum(np.bincount(np.searchsorted(p_ids, labs)))]
    h, w = truth.shape
    for k, p in enumerate(p_ids):
        sl = slice(bounds[k], bounds[k + 1])
        cx = int(np.floor(xs[sl].mean() + 0.5))
        cy = int(np.floor(ys[sl].mean() + 0.5))
        t = truth[min(max(cy, 0), h - 1), min(max(cx, 0), w - 1)]
        if t > 0:
            links.add((int(p), int(t)))
    return links


def count_links(pred_ids, truth_ids, links) -> VacReport:
    p_deg = {p: 0 for p in pred_ids}
    t_deg = {t: 0 for t in truth_ids}
    for p, t in links:
        p_deg[p] += 1
        t_deg[t] += 1
    seg = split = missing = 0
    for t, k in t_deg.items():
        if k == 0:
            missing += 1
        elif k >= 2:
            split += k - 1
    for p, t in links:
        if p_deg[p] == 1 and t_deg[t] == 1:
            seg += 1
    merge = sum(k - 1 for k in p_deg.values() if k >= 2)
    add = sum(1 for k in p_deg.values() if k == 0)
    return VacReport(seg, split, merge, add, missing)


def match(predicted, truth) -> VacReport:
    """Count segment/split/merge/add/missing for a prediction against truth labels.

    ``predicted`` is a label image of the same shape as ``truth`` or a list
    of :class:`CellRecord` (numbered by list position, so daughters that
    share a parent label stay distinct).
    """
    truth = np.asarray(truth)
    if not isinstance(predicted, np.ndarray):
        predicted = cells_to_labels(predicted, truth.shape)
    links = link_table(predicted, truth)
    pred_ids = [int(v) for v in np.unique(predicted[predicted > 0])]
    truth_ids = [int(v) for v in np.unique(truth[truth > 0])]
    return count_links(pred_ids, truth_ids, links)
