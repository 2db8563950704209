"""Recursive clump separation along bottleneck pairs.

A clump whose convex hull leaves fewer than two concave parts is one cell.
Otherwise bottleneck candidates come from the SDD of its smoothed radial
signature. Candidates away from the two largest concave parts are dropped
and the closest pair across those parts becomes the cut. Daughters re-enter
the same procedure from scratch.

When the closest pair is unusable (the segment leaves the clump, points away
from the concavities, or shaves off a sliver) the next closest pair is
tried, then the next pair of concave parts in order of size.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from . import geometry as geo
from .geometry import Clump, ConcavePart, CutIneffective
from .sdd import back_project, radial_boundary, sdd_profile

logger = logging.getLogger(__name__)

SINGLE = "single-cell"
NO_PAIR = "no-valid-pair"
CUT_FAILED = "cut-ineffective"
MAX_DEPTH = "max-depth"
REASONS = (SINGLE, NO_PAIR, CUT_FAILED, MAX_DEPTH)


@dataclass(frozen=True)
class SplitConfig:
    """Parameters of :func:`split_clump`.

    Attributes
    ----------
    bandwidth : int
        DFT bins kept on each side of DC when smoothing the radial signature.
    half_window : int
        Samples per side in the SDD slope fits.
    prominence_floor : float
        Extrema weaker than this fraction of ``max|s|`` are ignored.
    min_concave_area, min_concave_fraction
        A concave part needs at least ``max(min_concave_area,
        ceil(min_concave_fraction * clump area))`` pixels.
    min_concave_depth : float
        A concave part must reach deeper than this many pixels from the
        clump. The default drops one-pixel staircase slivers left along
        digitised edges and cut lines.
    concave_connectivity : {4, 8}
        Connectivity of concave parts.
    min_piece_fraction : float
        Cut pieces smaller than this fraction of the clump are treated as
        debris and added to the cut pixels; a cut must leave two real pieces.
    min_alignment : float
        Cosine between the cut direction and each concavity's inward normal
        must reach this value; -1 disables the check.
    max_depth : int
        Recursion backstop.
    """

    bandwidth: int = 50
    half_window: int = 5
    prominence_floor: float = 0.05
    min_concave_area: int = 3
    min_concave_fraction: float = 0.0
    min_concave_depth: float = 1.0
    concave_connectivity: int = 4
    min_piece_fraction: float = 0.02
    min_alignment: float = 0.7
    max_depth: int = 32

    def __post_init__(self):
        if self.bandwidth < 1:
            raise ValueError("bandwidth must be >= 1")
        if self.half_window < 2:
            raise ValueError("half_window must be >= 2")
        if not 0 < self.prominence_floor <= 1:
            raise ValueError("prominence_floor must be in (0, 1]")
        if self.min_concave_area < 1:
            raise ValueError("min_concave_area must be >= 1")
        if not 0 <= self.min_concave_fraction < 1:
            raise ValueError("min_concave_fraction must be in [0, 1)")
        if self.min_concave_depth < 0:
            raise ValueError("min_concave_depth must be >= 0")
        if self.concave_connectivity not in (4, 8):
            raise ValueError("concave_connectivity must be 4 or 8")
        if not 0 <= self.min_piece_fraction < 0.5:
            raise ValueError("min_piece_fraction must be in [0, 0.5)")
        if not -1 <= self.min_alignment <= 1:
            raise ValueError("min_alignment must be in [-1, 1]")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")

    def min_area_for(self, clump_area: int) -> int:
        return max(self.min_concave_area, int(np.ceil(self.min_concave_fraction * clump_area)))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class Classification:
    overlapped: bool
    q: int
    parts: tuple[ConcavePart, ...] = ()  # the two largest, when overlapped


@dataclass(eq=False)
class SplitRecord:
    path: tuple[int, ...]
    area: int
    q: int
    candidates: np.ndarray = field(default_factory=lambda: np.empty((0, 2), dtype=np.int64))
    validated: dict = field(default_factory=dict)
    pair: tuple | None = None
    cut: bool = False
    reason: str | None = None

    def to_dict(self) -> dict:
        return {
            "path": ".".join(map(str, self.path)),
            "area": self.area,
            "q": self.q,
            "candidates": self.candidates.tolist(),
            "validated": {str(k): v.tolist() for k, v in self.validated.items()},
            "pair": None if self.pair is None else [list(map(int, p)) for p in self.pair],
            "cut": self.cut,
            "reason": self.reason,
        }


@dataclass(eq=False)
class SplitResult:
    cells: list[Clump]
    cut_pixels: np.ndarray
    trace: list[SplitRecord]

    @property
    def cuts(self) -> int:
        return sum(r.cut for r in self.trace)


def classify(clump: Clump, config: SplitConfig = SplitConfig()) -> Classification:
    concave = _concave(clump, config)
    if concave.count < 2:
        return Classification(False, concave.count)
    return Classification(True, concave.count, concave.parts[:2])


def _concave(clump, config):
    return geo.local_concave_parts(
        clump,
        config.min_area_for(clump.area),
        config.min_concave_depth,
        config.concave_connectivity,
    )


def validate_bottlenecks(candidates, parts) -> dict[int, np.ndarray]:
    """Group candidates by the concave part they touch (within one pixel).

    Contour points sit on the clump, next to the subtracted region rather
    than inside it, hence the one-pixel (8-neighbourhood) tolerance. A
    candidate touching both parts goes to the first.
    """
    cand = np.asarray(candidates, dtype=np.int64).reshape(-1, 2)
    groups = {i: [] for i in range(len(parts))}
    if len(cand) == 0:
        return {i: np.empty((0, 2), dtype=np.int64) for i in groups}
    keyed = [
        {(int(x), int(y)) for x, y in part.pixels} for part in parts
    ]
    for pt in cand:
        x, y = int(pt[0]), int(pt[1])
        near = [(x + dx, y + dy) for dy in (-1, 0, 1) for dx in (-1, 0, 1)]
        for i, pix in enumerate(keyed):
            if any(q in pix for q in near):
                groups[i].append((x, y))
                break
    return {i: np.array(g, dtype=np.int64).reshape(-1, 2) for i, g in groups.items()}


def choose_pair(groups: dict[int, np.ndarray]):
    """Closest cross-part pair between groups 0 and 1, or None.

    Ties go to the lowest ``(index in group 0, index in group 1)``.
    """
    a = np.asarray(groups.get(0, ()), dtype=float).reshape(-1, 2)
    b = np.asarray(groups.get(1, ()), dtype=float).reshape(-1, 2)
    if len(a) == 0 or len(b) == 0:
        return None
    d = np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])
    i, j = np.unravel_index(np.argmin(d), d.shape)
    return tuple(int(v) for v in a[i]), tuple(int(v) for v in b[j])


def bottleneck_candidates(clump: Clump, config: SplitConfig):
    """Contour, SDD profile and back-projected candidate points of a clump.

    Returns ``None`` when the contour is too short for the slope windows.
    """
    contour = geo.trace_contour(clump)
    if len(contour) < 2 * config.half_window + 1:
        return None
    boundary = radial_boundary(contour, clump.centroid, config.bandwidth)
    profile = sdd_profile(boundary.smoothed, config.half_window, config.prominence_floor)
    return boundary, profile, back_project(profile.indices, contour)


def segment_inside(local: np.ndarray, p1, p2, slack: int = 2) -> bool:
    """True if the segment's pixels are foreground, ignoring ``slack`` pixels at each end."""
    line = geo.bresenham(p1, p2)
    inner = line[slack : len(line) - slack] if len(line) > 2 * slack else line[:0]
    return bool(np.all(local[inner[:, 1], inner[:, 0]]))


def _cut(local, origin, p1, p2, debris: int):
    x0, y0 = origin
    a = (p1[0] - x0, p1[1] - y0)
    b = (p2[0] - x0, p2[1] - y0)
    out = geo.cut_line(local, a, b)
    pieces = geo.components(out, origin)
    kept = [p for p in pieces if len(p) >= debris]
    if len(kept) < 2:
        raise CutIneffective("cut ineffective")
    lost = [p for p in pieces if len(p) < debris]
    removed = np.concatenate([geo._pixels_of(local & ~out, origin)] + lost)
    return kept, removed


def split_clump(
    clump: Clump, mask=None, config: SplitConfig = SplitConfig(), depth: int = 0
) -> SplitResult:
    """Split one clump recursively into cells.

    Every failure mode returns the clump unsplit and records why; nothing is
    raised for degenerate input. ``mask`` is accepted for signature symmetry
    with the other clump operations and is not consulted: each clump is
    processed in isolation.
    """
    cells: list[Clump] = []
    cut_pixels: list[np.ndarray] = []
    trace: list[SplitRecord] = []
    _split(clump, config, depth, (clump.label,), cells, cut_pixels, trace)
    removed = np.concatenate(cut_pixels) if cut_pixels else np.empty((0, 2), dtype=np.int64)
    return SplitResult(cells, removed, trace)


def _split(clump, config, depth, path, cells, cut_pixels, trace):
    concave = _concave(clump, config)
    rec = SplitRecord(path, clump.area, concave.count)
    trace.append(rec)
    if concave.count < 2:
        rec.reason = SINGLE
        cells.append(clump)
        return
    if depth >= config.max_depth:
        rec.reason = MAX_DEPTH
        cells.append(clump)
        return
    found = bottleneck_candidates(clump, config)
    if found is None:
        rec.reason = SINGLE
        cells.append(clump)
        return
    rec.candidates = found[2]
    cut = _first_cut(clump, concave.parts, rec.candidates, config)
    if cut is None:
        rec.validated = validate_bottlenecks(rec.candidates, concave.parts[:2])
        rec.pair = choose_pair(rec.validated)
        rec.reason = NO_PAIR if rec.pair is None else CUT_FAILED
        cells.append(clump)
        return
    rec.validated, rec.pair, daughters, removed = cut
    rec.cut = True
    cut_pixels.append(removed)
    logger.debug("clump %s: cut %s -> %d parts", path, rec.pair, len(daughters))
    for i, pts in enumerate(daughters, start=1):
        _split(Clump(clump.label, pts), config, depth + 1, path + (i,), cells, cut_pixels, trace)


def _first_cut(clump, parts, candidates, config):
    local, origin = clump.local_mask(pad=1)
    debris = max(config.min_area_for(clump.area), int(config.min_piece_fraction * clump.area))
    for i, j in _part_pairs(len(parts)):
        validated = validate_bottlenecks(candidates, (parts[i], parts[j]))
        for pair in _pairs_by_distance(validated):
            if not _aligned(pair, parts[i].normal, parts[j].normal, config.min_alignment):
                continue
            a = (pair[0][0] - origin[0], pair[0][1] - origin[1])
            b = (pair[1][0] - origin[0], pair[1][1] - origin[1])
            if not segment_inside(local, a, b):
                continue
            try:
                daughters, removed = _cut(local, origin, *pair, debris)
            except CutIneffective:
                continue
            return validated, pair, daughters, removed
    return None


def _aligned(pair, n1, n2, min_cos):
    if min_cos <= -1:
        return True
    v = np.subtract(pair[1], pair[0]).astype(float)
    norm = np.hypot(*v)
    if norm == 0:
        return False
    v /= norm
    return float(v @ n1) >= min_cos and float(-v @ n2) >= min_cos


def _part_pairs(n):
    # (0, 1) first, then pairs in order of increasing index sum
    return sorted(((i, j) for i in range(n) for j in range(i + 1, n)), key=lambda p: (sum(p), p))


def _pairs_by_distance(groups):
    a = np.asarray(groups.get(0, ()), dtype=float).reshape(-1, 2)
    b = np.asarray(groups.get(1, ()), dtype=float).reshape(-1, 2)
    if len(a) == 0 or len(b) == 0:
        return []
    d = np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])
    order = np.argsort(d, axis=None, kind="stable")
    ii, jj = np.unravel_index(order, d.shape)
    return [
        (tuple(int(v) for v in a[i]), tuple(int(v) for v in b[j])) for i, j in zip(ii, jj)
    ]
