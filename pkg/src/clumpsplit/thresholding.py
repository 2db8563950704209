"""Global grey-level threshold from the SDD of the image histogram.

The 256-bin histogram is normalised, smoothed with the same DFT low-pass
used on clump boundaries, and its slope difference distribution is taken.
Convex turns of the SDD that sit between the two tallest histogram peaks
mark the corners of the valley floor; the lowest smoothed bin between the
outermost of them is the threshold.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sdd import detect_extrema, lowpass_dft, sdd

NBINS = 256


class UnimodalHistogram(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GrayHistogram:
    bins: np.ndarray  # raw counts, length 256
    smoothed: np.ndarray  # unit-mass histogram after low-pass
    bandwidth: int


def histogram(image, bandwidth: int = 16) -> GrayHistogram:
    img = _as_gray(image)
    bins = np.bincount(img.ravel(), minlength=NBINS)
    return GrayHistogram(bins, lowpass_dft(bins / bins.sum(), bandwidth), bandwidth)


def _as_gray(image) -> np.ndarray:
    img = np.asarray(image)
    if img.ndim != 2 or img.size == 0:
        raise ValueError("expected a non-empty 2D grey-level image")
    if img.dtype == bool:
        return img.astype(np.uint8) * 255
    if img.min() < 0 or img.max() > 255 or not np.all(img == np.round(img)):
        raise ValueError("expected 8-bit intensities in [0, 255]")
    return img.astype(np.uint8)


def _peaks(y: np.ndarray, lo: int, hi: int) -> np.ndarray:
    # local maxima inside the occupied intensity range; the ringing that the
    # low-pass leaves outside that range is not a mode
    left = np.r_[-np.inf, y[:-1]]
    right = np.r_[y[1:], -np.inf]
    idx = np.nonzero((y > left) & (y >= right))[0]
    return idx[(idx >= lo) & (idx <= hi)]


def sdd_threshold(image, bandwidth: int = 16, half_window: int = 5) -> int:
    """Threshold between the two dominant histogram modes.

    Parameters
    ----------
    image : array_like
        2D array of 8-bit intensities.
    bandwidth : int
        DFT bins kept on each side of DC, ``W_h``.
    half_window : int
        SDD half window ``N``.

    Returns
    -------
    int
        Intensity ``t``; foreground is ``image > t``.

    Raises
    ------
    UnimodalHistogram
        If fewer than two peaks, or no convex turn between them, are found.
    """
    img = _as_gray(image)
    hist = histogram(img, bandwidth)
    y = hist.smoothed
    peaks = _peaks(y, int(img.min()), int(img.max()))
    if len(peaks) < 2:
        raise UnimodalHistogram("unimodal histogram")
    p1, p2 = sorted(peaks[np.argsort(-y[peaks], kind="stable")[:2]])
    s = sdd(y, half_window)
    valleys = [
        e.index
        for e in detect_extrema(s)
        if e.polarity == "max" and p1 < e.index < p2
    ]
    if not valleys:
        raise UnimodalHistogram("unimodal histogram")
    lo, hi = min(valleys), max(valleys)
    return int(lo + np.argmin(y[lo : hi + 1]))


def apply_threshold(image, t: int) -> np.ndarray:
    """Foreground mask ``image > t``."""
    if not 0 <= t <= 255:
        raise ValueError("threshold must be in [0, 255]")
    return np.asarray(image) > t
