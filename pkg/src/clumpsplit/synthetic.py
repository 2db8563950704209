"""Seeded overlapping-ellipse scenes with hard ground-truth labels."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class PackingError(RuntimeError):
    pass


@dataclass(frozen=True)
class Ellipse:
    cx: float
    cy: float
    a: float
    b: float
    theta: float

    def radius_towards(self, angle: float) -> float:
        """Centre-to-boundary distance along direction ``angle``."""
        phi = angle - self.theta
        return self.a * self.b / math.hypot(self.b * math.cos(phi), self.a * math.sin(phi))

    def contains(self, xx, yy) -> np.ndarray:
        dx, dy = xx - self.cx, yy - self.cy
        c, s = math.cos(self.theta), math.sin(self.theta)
        u = (dx * c + dy * s) / self.a
        v = (-dx * s + dy * c) / self.b
        return u * u + v * v <= 1.0

    @property
    def area(self) -> float:
        return math.pi * self.a * self.b


@dataclass(frozen=True, eq=False)
class SyntheticScene:
    shape: tuple[int, int]
    ellipses: tuple[Ellipse, ...]
    labels: np.ndarray  # uint16, 0 = background, i = ellipses[i - 1]
    image: np.ndarray  # uint8
    semi_axes: tuple[float, float]
    overlap: tuple[float, float]
    seed: int | None

    @property
    def foreground(self) -> np.ndarray:
        return self.labels > 0


def neck_distance_range(e1: Ellipse, e2: Ellipse, overlap) -> tuple[float, float]:
    """Allowed centre distance ``overlap * (r1 + r2 - min(r1, r2))`` along the centre line."""
    ang = math.atan2(e2.cy - e1.cy, e2.cx - e1.cx)
    r = max(e1.radius_towards(ang), e2.radius_towards(ang))
    return overlap[0] * r, overlap[1] * r


def rasterize(ellipses, shape) -> np.ndarray:
    """Label map; pixels inside several ellipses go to the nearest centre."""
    h, w = shape
    labels = np.zeros(shape, dtype=np.uint16)
    best = np.full(shape, np.inf)
    for i, e in enumerate(ellipses, start=1):
        r = max(e.a, e.b) + 1
        x0, x1 = max(0, int(e.cx - r)), min(w, int(e.cx + r) + 2)
        y0, y1 = max(0, int(e.cy - r)), min(h, int(e.cy + r) + 2)
        if x0 >= x1 or y0 >= y1:
            continue
        yy, xx = np.mgrid[y0:y1, x0:x1]
        inside = e.contains(xx.astype(float), yy.astype(float))
        d2 = (xx - e.cx) ** 2 + (yy - e.cy) ** 2
        sub_best = best[y0:y1, x0:x1]
        take = inside & (d2 < sub_best)
        sub_best[take] = d2[take]
        labels[y0:y1, x0:x1][take] = i
    return labels


def render(labels, foreground=200, background=30, noise=0.0, rng=None) -> np.ndarray:
    img = np.where(labels > 0, float(foreground), float(background))
    if noise > 0:
        rng = np.random.default_rng() if rng is None else rng
        img = img + rng.normal(0.0, noise, size=img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def _fits(e: Ellipse, shape, margin):
    r = max(e.a, e.b)
    h, w = shape
    return margin + r <= e.cx <= w - 1 - margin - r and margin + r <= e.cy <= h - 1 - margin - r


def _compatible(new: Ellipse, placed, parent: int, overlap, shape) -> bool:
    for k, other in enumerate(placed):
        d = math.hypot(new.cx - other.cx, new.cy - other.cy)
        lo, hi = neck_distance_range(other, new, overlap)
        if k == parent:
            continue
        if lo <= d <= hi:
            continue
        # anything else must stay clear of the new ellipse, with a 2 px gap
        ang = math.atan2(new.cy - other.cy, new.cx - other.cx)
        if d < lo:
            return False
        if d < other.radius_towards(ang) + new.radius_towards(ang) + 2:
            if _raster_touch(new, other, shape):
                return False
    return True


def _raster_touch(e1: Ellipse, e2: Ellipse, shape, gap=2) -> bool:
    grow1 = Ellipse(e1.cx, e1.cy, e1.a + gap, e1.b + gap, e1.theta)
    r = max(e1.a, e1.b) + gap + 1
    h, w = shape
    x0, x1 = max(0, int(e1.cx - r)), min(w, int(e1.cx + r) + 2)
    y0, y1 = max(0, int(e1.cy - r)), min(h, int(e1.cy + r) + 2)
    yy, xx = np.mgrid[y0:y1, x0:x1].astype(float)
    return bool(np.any(grow1.contains(xx, yy) & e2.contains(xx, yy)))


def generate_scene(
    count: int,
    shape=(512, 512),
    semi_axes=(15.0, 40.0),
    overlap=(0.8, 1.2),
    seed: int | None = None,
    noise: float = 0.0,
    foreground: int = 200,
    background: int = 30,
    max_tries: int = 200,
) -> SyntheticScene:
    """One connected cluster of ``count`` overlapping ellipses.

    Each ellipse after the first is attached to a random earlier one at a
    centre distance drawn from ``overlap * max(r1, r2)``, where ``r`` is the
    ellipse's radius along the centre line. Ellipses that are not attached
    either respect the same range or stay at least 2 px apart.

    Raises
    ------
    PackingError
        When no valid placement is found within ``max_tries`` attempts.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    lo_ax, hi_ax = semi_axes
    if not 0 < lo_ax <= hi_ax:
        raise ValueError("semi_axes must satisfy 0 < min <= max")
    if not 0 < overlap[0] <= overlap[1]:
        raise ValueError("overlap must satisfy 0 < min <= max")
    shape = (int(shape[0]), int(shape[1]))
    rng = np.random.default_rng(seed)
    margin = 2

    def random_axes():
        a, b = rng.uniform(lo_ax, hi_ax, size=2)
        return float(a), float(b), float(rng.uniform(0, math.pi))

    for _ in range(max_tries):
        a, b, t = random_axes()
        r = max(a, b)
        h, w = shape
        if w - 1 - 2 * (margin + r) < 0 or h - 1 - 2 * (margin + r) < 0:
            raise PackingError("ellipses do not fit in the image")
        # keep the seed ellipse near the middle so clusters have room to grow
        cx = float(rng.uniform(0.35, 0.65) * (w - 1))
        cy = float(rng.uniform(0.35, 0.65) * (h - 1))
        placed = [Ellipse(cx, cy, a, b, t)]
        for _ in range(max_tries):
            if len(placed) == count:
                break
            parent = int(rng.integers(len(placed)))
            p = placed[parent]
            a, b, t = random_axes()
            ang = float(rng.uniform(0, 2 * math.pi))
            probe = Ellipse(p.cx, p.cy, a, b, t)
            r = max(p.radius_towards(ang), probe.radius_towards(ang))
            d = float(rng.uniform(*overlap)) * r
            new = Ellipse(p.cx + d * math.cos(ang), p.cy + d * math.sin(ang), a, b, t)
            if _fits(new, shape, margin) and _compatible(new, placed, parent, overlap, shape):
                placed.append(new)
        if len(placed) == count:
            labels = rasterize(placed, shape)
            image = render(labels, foreground, background, noise, rng)
            return SyntheticScene(
                shape, tuple(placed), labels, image, (lo_ax, hi_ax), tuple(overlap), seed
            )
    raise PackingError(f"could not place {count} ellipses after {max_tries} attempts")


def two_class_image(
    shape=(256, 256),
    means=(80.0, 170.0),
    sigma: float = 10.0,
    fraction: float = 0.5,
    seed: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Grey image with Gaussian background and foreground intensities.

    The foreground is a union of random discs grown until it covers at least
    ``fraction`` of the image. Returns ``(image, truth)`` where ``truth`` is
    the boolean foreground mask.
    """
    if not 0 < fraction < 1:
        raise ValueError("fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    h, w = shape
    yy, xx = np.mgrid[:h, :w]
    truth = np.zeros(shape, dtype=bool)
    r_max = max(2.0, min(h, w) / 6)
    while truth.mean() < fraction:
        r = rng.uniform(r_max / 3, r_max)
        cx, cy = rng.uniform(0, w), rng.uniform(0, h)
        truth |= (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
    img = np.where(truth, means[1], means[0]) + rng.normal(0.0, sigma, size=shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8), truth
