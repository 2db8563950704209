"""Slope difference distribution on cyclic 1D signals.

The same kernel runs on clump radial signatures and on grey-level
histograms. All indexing is cyclic, so the start point of a traced contour
has no influence on the result.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Contour


@dataclass(frozen=True)
class Extremum:
    index: int
    polarity: str  # "max" or "min"
    magnitude: float


@dataclass(frozen=True, eq=False)
class SddProfile:
    values: np.ndarray
    half_window: int
    extrema: tuple[Extremum, ...]

    @property
    def indices(self) -> list[int]:
        return [e.index for e in self.extrema]


@dataclass(frozen=True, eq=False)
class RadialBoundary:
    contour: Contour
    raw: np.ndarray
    smoothed: np.ndarray
    bandwidth: int


def radial_signature(contour: Contour | np.ndarray, center) -> np.ndarray:
    """Distance from each contour point to ``center``, in contour order."""
    pts = contour.points if isinstance(contour, Contour) else np.asarray(contour)
    pts = pts.reshape(-1, 2).astype(float)
    return np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1])


def lowpass_dft(signal, bandwidth: int) -> np.ndarray:
    """Keep DFT bins ``0..W`` and ``L-W..L-1``, zero the rest, transform back.

    The kept band is conjugate-symmetric, so the inverse is real up to
    rounding; ``W >= L // 2`` returns the input unchanged.
    """
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1 or len(x) < 1:
        raise ValueError("signal must be a non-empty 1D sequence")
    if bandwidth < 0:
        raise ValueError("bandwidth must be >= 0")
    n = len(x)
    if bandwidth >= n // 2:
        return x.copy()
    spectrum = np.fft.fft(x)
    spectrum[bandwidth + 1 : n - bandwidth] = 0.0
    return np.fft.ifft(spectrum).real


def _check_window(n: int, half_window: int):
    if half_window < 2:
        raise ValueError("half_window must be >= 2")
    if n < 2 * half_window + 1:
        raise ValueError(f"signal of length {n} is too short for half_window {half_window}")


def _ls_slope(xs, ys) -> float:
    # normal equations for y = a*x + b, solved in closed form
    n = len(xs)
    sx, sy = xs.sum(), ys.sum()
    sxx, sxy = (xs * xs).sum(), (xs * ys).sum()
    return float((n * sxy - sx * sy) / (n * sxx - sx * sx))


def fit_slopes(signal, j: int, half_window: int) -> tuple[float, float]:
    """Least-squares slopes of the ``N`` samples ending at ``j`` and starting at ``j``."""
    y = np.asarray(signal, dtype=float)
    n = len(y)
    _check_window(n, half_window)
    left = np.arange(j - half_window + 1, j + 1)
    right = np.arange(j, j + half_window)
    return (
        _ls_slope(left.astype(float), y[left % n]),
        _ls_slope(right.astype(float), y[right % n]),
    )


def window_slopes(signal, half_window: int) -> np.ndarray:
    """Slope of the ``N``-sample least-squares line starting at every index (cyclic)."""
    y = np.asarray(signal, dtype=float)
    _check_window(len(y), half_window)
    offsets = np.arange(half_window) - (half_window - 1) / 2.0
    weights = offsets / (offsets * offsets).sum()
    out = np.zeros_like(y)
    for m, wgt in enumerate(weights):
        out += wgt * np.roll(y, -m)
    return out


def sdd(signal, half_window: int) -> np.ndarray:
    """``s_j = right slope - left slope`` at every index of a cyclic signal."""
    starting = window_slopes(signal, half_window)
    # the left window of j is the window starting at j - N + 1
    return starting - np.roll(starting, half_window - 1)


def detect_extrema(values, prominence_floor: float = 0.05) -> list[Extremum]:
    """Cyclic local maxima and minima with ``|s| >= floor * max|s|``.

    Runs of equal values are treated as one plateau and reported at their
    centre (lower middle for even lengths).
    """
    v = np.asarray(values, dtype=float)
    n = len(v)
    if n == 0:
        return []
    peak = np.abs(v).max()
    if peak == 0 or np.all(v == v[0]):
        return []
    floor = prominence_floor * peak

    # rotate so index 0 opens a run
    change = np.nonzero(v != np.roll(v, 1))[0]
    shift = int(change[0])
    r = np.roll(v, -shift)
    starts = np.nonzero(r != np.roll(r, 1))[0]
    lengths = np.diff(np.r_[starts, n])
    run_vals = r[starts]
    before = np.roll(run_vals, 1)
    after = np.roll(run_vals, -1)

    found = []
    for s, k, val, b, a in zip(starts, lengths, run_vals, before, after):
        if abs(val) < floor:
            continue
        if val > b and val > a:
            pol = "max"
        elif val < b and val < a:
            pol = "min"
        else:
            continue
        idx = (int(s) + (int(k) - 1) // 2 + shift) % n
        found.append(Extremum(idx, pol, float(abs(val))))
    found.sort(key=lambda e: e.index)
    return found


def back_project(indices, contour: Contour) -> np.ndarray:
    """Contour points at the given 1D indices."""
    idx = np.asarray(list(indices), dtype=np.int64)
    n = len(contour)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise IndexError(f"extremum index out of range for contour of length {n}")
    return contour.points[idx].copy() if idx.size else np.empty((0, 2), dtype=np.int64)


def radial_boundary(contour: Contour, center, bandwidth: int) -> RadialBoundary:
    raw = radial_signature(contour, center)
    return RadialBoundary(contour, raw, lowpass_dft(raw, bandwidth), bandwidth)


def sdd_profile(signal, half_window: int, prominence_floor: float = 0.05) -> SddProfile:
    values = sdd(signal, half_window)
    return SddProfile(values, half_window, tuple(detect_extrema(values, prominence_floor)))
