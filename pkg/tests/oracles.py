"""Slow, independent reference implementations used only by the tests.

Nothing here imports the package's own algorithms; each oracle takes the
obvious brute-force route so that agreement means something.
"""
from __future__ import annotations

import math
from collections import deque

import numpy as np
from scipy.spatial import ConvexHull, QhullError

N8 = [(dx, dy) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dx, dy) != (0, 0)]
N4 = [(1, 0), (-1, 0), (0, 1), (0, -1)]


def flood_components(mask, nbrs=N8):
    """Connected components by BFS, as sets of (x, y), in raster discovery order."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    seen = np.zeros_like(mask)
    out = []
    for y in range(h):
        for x in range(w):
            if not mask[y, x] or seen[y, x]:
                continue
            comp = set()
            q = deque([(x, y)])
            seen[y, x] = True
            while q:
                cx, cy = q.popleft()
                comp.add((cx, cy))
                for dx, dy in nbrs:
                    nx, ny = cx + dx, cy + dy
                    if 0 <= nx < w and 0 <= ny < h and mask[ny, nx] and not seen[ny, nx]:
                        seen[ny, nx] = True
                        q.append((nx, ny))
            out.append(comp)
    return out


def boundary_pixels(pixels) -> set:
    """Pixels of the set with a 4-neighbour outside the set."""
    s = {tuple(map(int, p)) for p in pixels}
    return {(x, y) for x, y in s if any((x + dx, y + dy) not in s for dx, dy in N4)}


def exterior_boundary(pixels) -> set:
    """Boundary pixels whose outside 4-neighbour is reachable from infinity."""
    s = {tuple(map(int, p)) for p in pixels}
    xs = [p[0] for p in s]
    ys = [p[1] for p in s]
    x0, x1, y0, y1 = min(xs) - 1, max(xs) + 1, min(ys) - 1, max(ys) + 1
    outside = set()
    q = deque([(x0, y0)])
    outside.add((x0, y0))
    while q:
        x, y = q.popleft()
        for dx, dy in N4:
            n = (x + dx, y + dy)
            if x0 <= n[0] <= x1 and y0 <= n[1] <= y1 and n not in s and n not in outside:
                outside.add(n)
                q.append(n)
    return {(x, y) for x, y in s if any((x + dx, y + dy) in outside for dx, dy in N4)}


def hull_mask(pixels, shape, eps=1e-9) -> np.ndarray:
    """Pixel centres inside the convex hull of ``pixels`` (Qhull half-planes)."""
    pts = np.asarray(pixels, dtype=float).reshape(-1, 2)
    h, w = shape
    yy, xx = np.mgrid[:h, :w]
    grid = np.column_stack([xx.ravel(), yy.ravel()]).astype(float)
    try:
        hull = ConvexHull(pts)
    except (QhullError, ValueError):
        # collinear or tiny: the hull is the segment between the extreme points
        out = np.zeros(shape, dtype=bool)
        order = np.lexsort((pts[:, 1], pts[:, 0]))
        a, b = pts[order[0]], pts[order[-1]]
        d = b - a
        for g in grid:
            r = g - a
            cross = d[0] * r[1] - d[1] * r[0]
            if d @ d == 0:
                out[int(g[1]), int(g[0])] = bool(np.all(r == 0))
                continue
            t = (r @ d) / (d @ d)
            if abs(cross) <= eps and -eps <= t <= 1 + eps:
                out[int(g[1]), int(g[0])] = True
        return out
    inside = np.all(grid @ hull.equations[:, :2].T + hull.equations[:, 2] <= eps, axis=1)
    return inside.reshape(shape)


def ls_slope(xs, ys) -> float:
    A = np.column_stack([np.asarray(xs, float), np.ones(len(xs))])
    coef, *_ = np.linalg.lstsq(A, np.asarray(ys, float), rcond=None)
    return float(coef[0])


def slopes_bruteforce(signal, j, n):
    y = np.asarray(signal, float)
    L = len(y)
    left = [j - n + 1 + k for k in range(n)]
    right = [j + k for k in range(n)]
    return (
        ls_slope(left, [y[i % L] for i in left]),
        ls_slope(right, [y[i % L] for i in right]),
    )


def sdd_bruteforce(signal, n):
    L = len(signal)
    return np.array([b - a for a, b in (slopes_bruteforce(signal, j, n) for j in range(L))])


def dft_lowpass(signal, w):
    """Explicit O(L^2) DFT, band mask, inverse DFT."""
    x = np.asarray(signal, float)
    L = len(x)
    k = np.arange(L)
    F = np.exp(-2j * np.pi * np.outer(k, k) / L)
    X = F @ x
    keep = (k <= w) | (k >= L - w)
    return (np.conj(F) @ (X * keep) / L).real


def cyclic_extrema(values, floor_frac):
    """Exhaustive scan: for each index walk out both ways across equal values."""
    v = [float(t) for t in values]
    L = len(v)
    if L == 0:
        return []
    peak = max(abs(t) for t in v)
    if peak == 0 or all(t == v[0] for t in v):
        return []
    found = {}
    for i in range(L):
        lo = i
        while v[(lo - 1) % L] == v[i]:
            lo -= 1
        hi = i
        while v[(hi + 1) % L] == v[i]:
            hi += 1
        before, after = v[(lo - 1) % L], v[(hi + 1) % L]
        if abs(v[i]) < floor_frac * peak:
            continue
        if v[i] > before and v[i] > after:
            pol = "max"
        elif v[i] < before and v[i] < after:
            pol = "min"
        else:
            continue
        centre = (lo + (hi - lo) // 2) % L
        found[centre] = pol
    return sorted(found.items())


def match_bruteforce(pred, truth):
    """Segment/split/merge/add/missing via an explicit overlap table."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    p_ids = sorted(int(v) for v in set(pred.ravel()) - {0})
    t_ids = sorted(int(v) for v in set(truth.ravel()) - {0})
    links = set()
    for p in p_ids:
        pm = pred == p
        ys, xs = np.nonzero(pm)
        cx = math.floor(xs.mean() + 0.5)
        cy = math.floor(ys.mean() + 0.5)
        for t in t_ids:
            tm = truth == t
            inter = int(np.sum(pm & tm))
            union = int(np.sum(pm | tm))
            if inter / union >= 0.5 or truth[cy, cx] == t:
                links.add((p, t))
    pdeg = {p: sum(1 for a, _ in links if a == p) for p in p_ids}
    tdeg = {t: sum(1 for _, b in links if b == t) for t in t_ids}
    seg = sum(1 for p, t in links if pdeg[p] == 1 and tdeg[t] == 1)
    split = sum(k - 1 for k in tdeg.values() if k >= 2)
    merge = sum(k - 1 for k in pdeg.values() if k >= 2)
    add = sum(1 for k in pdeg.values() if k == 0)
    missing = sum(1 for k in tdeg.values() if k == 0)
    return seg, split, merge, add, missing


def two_circle_radius(theta, r, d):
    """Distance from the midpoint to the outer boundary of two circles along ``theta``.

    Circles of radius ``r`` centred at ``(-d/2, 0)`` and ``(d/2, 0)``.
    """
    ux, uy = math.cos(theta), math.sin(theta)
    best = 0.0
    for cx in (-d / 2, d / 2):
        b = ux * cx
        disc = b * b - (cx * cx - r * r)
        if disc >= 0:
            best = max(best, b + math.sqrt(disc))
    return best


def disc(shape, cx, cy, r):
    h, w = shape
    yy, xx = np.mgrid[:h, :w]
    return (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
