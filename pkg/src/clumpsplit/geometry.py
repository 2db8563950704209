"""Binary-mask primitives.

Masks are 2D boolean numpy arrays indexed ``mask[y, x]``. Every coordinate
that leaves this module is an ``(x, y)`` pair, so pixel lists are ``(M, 2)``
integer arrays with x in column 0.

Foreground components use 8-connectivity; background and concave regions
use 4-connectivity.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

EIGHT = np.ones((3, 3), dtype=bool)
FOUR = ndimage.generate_binary_structure(2, 1)

# Moore neighbourhood, clockwise on screen (y grows downward), starting west.
_RING = ((-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1))
_RING_INDEX = {d: i for i, d in enumerate(_RING)}


class EmptyClumpError(ValueError):
    pass


class CutIneffective(RuntimeError):
    pass


def as_mask(mask) -> np.ndarray:
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2 or mask.shape[0] < 1 or mask.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2D mask, got shape {mask.shape}")
    return mask


def _frozen(arr):
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


def centroid(pixels) -> tuple[float, float]:
    """Component-wise mean of ``(x, y)`` pixel coordinates."""
    pts = np.asarray(pixels, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise EmptyClumpError("empty clump")
    return float(pts[:, 0].mean()), float(pts[:, 1].mean())


@dataclass(frozen=True, eq=False)
class Clump:
    """One 8-connected foreground component."""

    label: int
    pixels: np.ndarray
    centroid: tuple[float, float] = field(init=False)

    def __post_init__(self):
        pts = np.asarray(self.pixels, dtype=np.int64).reshape(-1, 2)
        if len(pts) == 0:
            raise EmptyClumpError("empty clump")
        object.__setattr__(self, "pixels", _frozen(pts))
        object.__setattr__(self, "centroid", centroid(pts))

    @property
    def area(self) -> int:
        return len(self.pixels)

    def bbox(self, pad: int = 1) -> tuple[int, int, int, int]:
        """``(x0, y0, width, height)`` of the padded bounding box."""
        x0, y0 = self.pixels.min(axis=0) - pad
        x1, y1 = self.pixels.max(axis=0) + pad
        return int(x0), int(y0), int(x1 - x0 + 1), int(y1 - y0 + 1)

    def local_mask(self, pad: int = 1) -> tuple[np.ndarray, tuple[int, int]]:
        """Clump rasterized into its own padded crop, plus the crop origin."""
        x0, y0, w, h = self.bbox(pad)
        m = np.zeros((h, w), dtype=bool)
        m[self.pixels[:, 1] - y0, self.pixels[:, 0] - x0] = True
        return m, (x0, y0)

    def to_mask(self, shape) -> np.ndarray:
        m = np.zeros(shape, dtype=bool)
        m[self.pixels[:, 1], self.pixels[:, 0]] = True
        return m


@dataclass(frozen=True, eq=False)
class Contour:
    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "points", _frozen(np.asarray(self.points, dtype=np.int64).reshape(-1, 2))
        )

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True, eq=False)
class ConcavePart:
    pixels: np.ndarray
    depth: float = 0.0  # farthest distance of a part pixel from the clump
    normal: tuple[float, float] = (0.0, 0.0)  # inward unit normal of the spanning hull edge

    @property
    def area(self) -> int:
        return len(self.pixels)


@dataclass(frozen=True, eq=False)
class ConcaveSet:
    parts: tuple[ConcavePart, ...]

    @property
    def count(self) -> int:
        return len(self.parts)


def _pixels_of(mask: np.ndarray, origin=(0, 0)) -> np.ndarray:
    ys, xs = np.nonzero(mask)
    return np.column_stack([xs + origin[0], ys + origin[1]])


def components(mask, origin=(0, 0), structure=EIGHT) -> list[np.ndarray]:
    """Pixel arrays of the connected components of ``mask`` in raster discovery order."""
    lab, n = ndimage.label(mask, structure=structure)
    if n == 0:
        return []
    ys, xs = np.nonzero(lab)
    ids = lab[ys, xs]
    # nonzero is row-major, so a stable sort keeps each component in raster order
    order = np.argsort(ids, kind="stable")
    splits = np.cumsum(np.bincount(ids, minlength=n + 1)[1:])[:-1]
    pts = np.column_stack([xs[order] + origin[0], ys[order] + origin[1]])
    return np.split(pts, splits)


def label_components(mask) -> list[Clump]:
    """Maximal 8-connected foreground components, labelled 1..K in raster order."""
    mask = as_mask(mask)
    return [Clump(i + 1, pts) for i, pts in enumerate(components(mask))]


def _signed_area(points: np.ndarray) -> float:
    x = points[:, 0].astype(float)
    y = points[:, 1].astype(float)
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def trace_contour(clump: Clump, mask=None) -> Contour:
    """Exterior contour by Moore-neighbour tracing.

    Only the clump's own pixels are considered, so neighbouring clumps in
    ``mask`` never leak into the trace. Points are returned with positive
    shoelace area in ``(x, y)`` coordinates (counterclockwise in a y-up frame).
    Tracing stops when the start pixel is about to be left along its first
    move again (the transition form of Jacob's stopping criterion).
    """
    local, (x0, y0) = clump.local_mask(pad=1)
    ys, xs = np.nonzero(local)
    start = (int(xs[0]), int(ys[0]))  # topmost, then leftmost: west neighbour is background
    h, w = local.shape

    def fg(x, y):
        return 0 <= x < w and 0 <= y < h and local[y, x]

    points = [start]
    if not any(fg(start[0] + dx, start[1] + dy) for dx, dy in _RING):
        return Contour(np.array([[start[0] + x0, start[1] + y0]]))

    p = start
    back = (start[0] - 1, start[1])
    first_move = None
    limit = 8 * clump.area + 16
    for _ in range(limit):
        k = _RING_INDEX[(back[0] - p[0], back[1] - p[1])]
        prev = back
        for step in range(1, 9):
            dx, dy = _RING[(k + step) % 8]
            c = (p[0] + dx, p[1] + dy)
            if fg(*c):
                break
            prev = c
        # stop once the start pixel is left the same way it was left the first time
        if p == start:
            if first_move is None:
                first_move = c
            elif c == first_move:
                break
        if p != start or len(points) > 1:
            points.append(p)
        p, back = c, prev
    else:  # pragma: no cover - the trace state space is finite
        raise RuntimeError("contour trace did not close")

    pts = np.array(points, dtype=np.int64)
    if len(pts) > 2 and _signed_area(pts) < 0:
        pts = np.concatenate([pts[:1], pts[:0:-1]])
    pts[:, 0] += x0
    pts[:, 1] += y0
    return Contour(pts)


def monotone_chain(points) -> np.ndarray:
    """Convex hull vertices (counterclockwise in x/y) by Andrew's monotone chain.

    Collinear points are dropped. Fewer than three distinct points are
    returned as they are (sorted).
    """
    pts = sorted(set(map(tuple, np.asarray(points).reshape(-1, 2).tolist())))
    if len(pts) <= 2:
        return np.array(pts, dtype=float).reshape(-1, 2)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=float)


def _row_extremes(pixels: np.ndarray) -> np.ndarray:
    # hull of a pixel set equals the hull of each row's leftmost and rightmost pixel
    order = np.lexsort((pixels[:, 0], pixels[:, 1]))
    p = pixels[order]
    first = np.r_[True, p[1:, 1] != p[:-1, 1]]
    last = np.r_[p[1:, 1] != p[:-1, 1], True]
    return np.concatenate([p[first], p[last]])


def rasterize_hull(hull: np.ndarray, shape, origin=(0, 0)) -> np.ndarray:
    """Pixels whose centres lie in the closed hull polygon (or on a degenerate segment)."""
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w]
    xx = (xx + origin[0]).astype(float)
    yy = (yy + origin[1]).astype(float)
    eps = 1e-9
    if len(hull) == 1:
        return (xx == hull[0, 0]) & (yy == hull[0, 1])
    if len(hull) == 2:
        (ax, ay), (bx, by) = hull
        dx, dy = bx - ax, by - ay
        cross = dx * (yy - ay) - dy * (xx - ax)
        t = ((xx - ax) * dx + (yy - ay) * dy) / (dx * dx + dy * dy)
        return (np.abs(cross) <= eps) & (t >= -eps) & (t <= 1 + eps)
    inside = np.ones((h, w), dtype=bool)
    for (ax, ay), (bx, by) in zip(hull, np.roll(hull, -1, axis=0)):
        inside &= (bx - ax) * (yy - ay) - (by - ay) * (xx - ax) >= -eps
    return inside


def _local_hull(clump: Clump, pad: int = 1):
    x0, y0, w, h = clump.bbox(pad)
    hull = monotone_chain(_row_extremes(clump.pixels))
    return rasterize_hull(hull, (h, w), (x0, y0)), (x0, y0), hull


def convex_hull_mask(clump: Clump, shape) -> np.ndarray:
    """Filled raster of the convex hull of the clump's pixel centres."""
    local, (x0, y0), _ = _local_hull(clump, pad=0)
    out = np.zeros(shape, dtype=bool)
    h, w = local.shape
    # clip in case the clump sits on the image edge (pad=0 keeps it inside anyway)
    out[y0 : y0 + h, x0 : x0 + w] = local
    return out


def concave_parts(
    clump: Clump, hull, min_area: int = 1, min_depth: float = 0.0, connectivity: int = 4
) -> ConcaveSet:
    """Connected components of ``hull`` minus the clump, largest first.

    Components smaller than ``min_area`` pixels, or no deeper than
    ``min_depth`` pixels from the clump, are discarded as raster noise.
    Equal areas keep raster discovery order.
    """
    hull = as_mask(hull)
    x0, y0, w, h = clump.bbox(pad=1)
    # work in the padded crop; the hull is clipped to it
    local_hull = np.zeros((h, w), dtype=bool)
    sx0, sy0 = max(x0, 0), max(y0, 0)
    sx1, sy1 = min(x0 + w, hull.shape[1]), min(y0 + h, hull.shape[0])
    local_hull[sy0 - y0 : sy1 - y0, sx0 - x0 : sx1 - x0] = hull[sy0:sy1, sx0:sx1]
    local, _ = clump.local_mask(pad=1)
    poly = monotone_chain(_row_extremes(clump.pixels))
    return _parts(local, local_hull, (x0, y0), min_area, min_depth, connectivity, poly)


def local_concave_parts(
    clump: Clump, min_area: int = 1, min_depth: float = 0.0, connectivity: int = 4
) -> ConcaveSet:
    """Same as :func:`concave_parts`, with the hull computed in the clump's own crop."""
    hull, origin, poly = _local_hull(clump, pad=1)
    local, _ = clump.local_mask(pad=1)
    return _parts(local, hull, origin, min_area, min_depth, connectivity, poly)


def lid_normal(pixels: np.ndarray, poly: np.ndarray) -> tuple[float, float]:
    """Inward normal of the hull edge lying closest to most of ``pixels``.

    A concave part is bounded on the outside by one hull edge (its lid); the
    edge is picked by counting part pixels within one pixel of each edge.
    """
    if len(poly) < 3:
        return (0.0, 0.0)
    a = poly
    b = np.roll(poly, -1, axis=0)
    d = b - a
    length2 = (d * d).sum(axis=1)
    rel = pixels[:, None, :].astype(float) - a[None, :, :]
    t = np.clip((rel * d[None]).sum(axis=2) / length2[None], 0.0, 1.0)
    closest = a[None] + t[..., None] * d[None]
    dist = np.hypot(*(pixels[:, None, :] - closest).transpose(2, 0, 1))
    edge = int(np.argmax((dist <= 1.0).sum(axis=0)))
    dx, dy = d[edge] / np.sqrt(length2[edge])
    # hull vertices run with positive shoelace area, so the interior is on the left
    return (float(-dy), float(dx))


def _parts(local, hull, origin, min_area, min_depth, connectivity, poly):
    structure = {4: FOUR, 8: EIGHT}[connectivity]
    diff = hull & ~local
    lab, n = ndimage.label(diff, structure=structure)
    if n == 0:
        return ConcaveSet(())
    dist = ndimage.distance_transform_edt(~local)
    idx = np.arange(1, n + 1)
    areas = ndimage.sum_labels(np.ones_like(lab), lab, idx)
    depths = ndimage.maximum(dist, lab, idx)
    pixels = components(diff, origin, structure=structure)
    kept = [
        ConcavePart(p, float(d), lid_normal(p, poly))
        for p, a, d in zip(pixels, areas, depths)
        if a >= min_area and d > min_depth
    ]
    kept.sort(key=lambda p: -p.area)  # stable: ties stay in raster order
    return ConcaveSet(tuple(kept))


def bresenham(p1, p2) -> np.ndarray:
    """Integer points of the segment ``p1 -> p2`` (inclusive)."""
    x0, y0 = int(p1[0]), int(p1[1])
    x1, y1 = int(p2[0]), int(p2[1])
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    out = []
    while True:
        out.append((x0, y0))
        if x0 == x1 and y0 == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy
    return np.array(out, dtype=np.int64)


def line_pixels(p1, p2, thickness: int = 1) -> np.ndarray:
    """Bresenham segment, optionally doubled along its minor axis."""
    pts = bresenham(p1, p2)
    if thickness == 1:
        return pts
    if thickness != 2:
        raise ValueError("thickness must be 1 or 2")
    if abs(p2[0] - p1[0]) >= abs(p2[1] - p1[1]):
        shifted = pts + (0, 1)
    else:
        shifted = pts + (1, 0)
    return np.unique(np.concatenate([pts, shifted]), axis=0)


def _erase(mask, pts):
    out = mask.copy()
    h, w = out.shape
    ok = (pts[:, 0] >= 0) & (pts[:, 0] < w) & (pts[:, 1] >= 0) & (pts[:, 1] < h)
    pts = pts[ok]
    out[pts[:, 1], pts[:, 0]] = False
    return out


def cut_line(mask, p1, p2) -> np.ndarray:
    """Erase the segment ``p1 -> p2`` so that the clump containing ``p1`` falls apart.

    A one-pixel Bresenham line is tried first; diagonal lines leak under
    8-connectivity, so a two-pixel line is the single retry.

    Raises
    ------
    CutIneffective
        If the clump under ``p1`` is still one component after the retry.
    """
    mask = as_mask(mask)
    h, w = mask.shape
    for p in (p1, p2):
        if not (0 <= p[0] < w and 0 <= p[1] < h):
            raise ValueError(f"point {tuple(p)} outside mask of shape {mask.shape}")
    lab, _ = ndimage.label(mask, structure=EIGHT)
    region = lab == lab[p1[1], p1[0]] if mask[p1[1], p1[0]] else np.zeros_like(mask)
    for thickness in (1, 2):
        out = _erase(mask, line_pixels(p1, p2, thickness))
        _, n = ndimage.label(out & region, structure=EIGHT)
        if n >= 2:
            return out
    raise CutIneffective("cut ineffective")
