"""Image, label-map and table I/O."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .geometry import Clump


def read_image(path) -> np.ndarray:
    """2D array from a PNG/PGM/TIFF file; colour images are converted to grey.

    Raises ``OSError`` on unreadable or truncated files.
    """
    with Image.open(path) as im:
        if im.mode in ("RGB", "RGBA", "P", "LA", "CMYK", "YCbCr"):
            im = im.convert("L")
        arr = np.array(im)
    if arr.ndim != 2:
        raise OSError(f"{path}: expected a single-channel image")
    return arr


def read_gray8(path) -> np.ndarray:
    arr = read_image(path)
    if arr.dtype == bool:
        return arr.astype(np.uint8) * 255
    if arr.dtype != np.uint8:
        raise OSError(f"{path}: expected 8-bit grey levels, got {arr.dtype}")
    return arr


def write_gray8(path, image) -> Path:
    path = Path(path)
    Image.fromarray(np.asarray(image, dtype=np.uint8)).save(path)
    return path


def write_labels(path, labels, fmt: str = "png") -> Path:
    """Write a label map as a 16-bit PNG or as a CSV grid."""
    path = Path(path)
    labels = np.asarray(labels)
    if labels.size and labels.max() > np.iinfo(np.uint16).max:
        raise ValueError("label values exceed 16 bits")
    if fmt == "png":
        Image.fromarray(labels.astype(np.uint16)).save(path)
    elif fmt == "csv":
        np.savetxt(path, labels, fmt="%d", delimiter=",")
    else:
        raise ValueError(f"unknown label format {fmt!r}")
    return path


def read_labels(path) -> np.ndarray:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        try:
            arr = np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=2)
        except ValueError as exc:
            raise OSError(f"{path}: {exc}") from exc
    else:
        arr = read_image(path)
    if arr.dtype == bool:
        arr = arr.astype(np.int64)
    if not np.issubdtype(arr.dtype, np.integer) or (arr.size and arr.min() < 0):
        raise OSError(f"{path}: not a label map")
    return arr.astype(np.int64)


def write_cells_csv(path, cells) -> Path:
    """One row per cell: ``label,x,y,area`` with the centroid in pixels."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "x", "y", "area"])
        for c in cells:
            w.writerow([c.label, f"{c.centroid[0]:.4f}", f"{c.centroid[1]:.4f}", c.area])
    return path


def read_cells_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [
            {"label": int(r["label"]), "x": float(r["x"]), "y": float(r["y"]), "area": int(r["area"])}
            for r in csv.DictReader(fh)
        ]


CUT_COLOR = (255, 0, 0)
POINT_COLOR = (0, 255, 0)
POINT_RADIUS = 5


def overlay(background, cells: list[Clump], traces, seed: int = 0) -> Image.Image:
    """RGB picture of the result.

    Cells get muted random colours over the grey input, cut segments are
    red 1-px lines, and the chosen bottleneck points are 5-px circles.
    """
    bg = np.asarray(background)
    if bg.dtype == bool:
        bg = bg.astype(np.uint8) * 255
    grey = np.repeat(bg.astype(np.uint8)[..., None], 3, axis=2).astype(float)
    rng = np.random.default_rng(seed)
    for c in cells:
        tint = rng.uniform(60, 255, size=3)
        grey[c.pixels[:, 1], c.pixels[:, 0]] = 0.5 * grey[c.pixels[:, 1], c.pixels[:, 0]] + 0.5 * tint
    im = Image.fromarray(np.clip(grey, 0, 255).astype(np.uint8))
    draw = ImageDraw.Draw(im)
    for rec in traces:
        if not rec.cut:
            continue
        (x1, y1), (x2, y2) = rec.pair
        draw.line([(x1, y1), (x2, y2)], fill=CUT_COLOR, width=1)
        for x, y in rec.pair:
            r = POINT_RADIUS
            draw.ellipse([x - r, y - r, x + r, y + r], outline=POINT_COLOR)
    return im
