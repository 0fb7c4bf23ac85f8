"""Orbits of a boundary point under the amalgam, as Heisenberg coordinates.

The orbit of infinity accumulates on the limit set.  Infinity itself has no
Heisenberg coordinates and is counted separately.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .amalgam import AmalgamRep, enumerate_rho
from .chc import herm, lifts_to_horo

BOUNDARY_TOL = 1e-9
DEDUP = 1e-8
CSV_HEADER = ("x", "y", "v", "wordlen")
CANVAS = 1024


class BoundaryError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OrbitCloud:
    points: np.ndarray  # (n, 3): x, y, v
    wordlen: np.ndarray  # (n,) shortest word producing the point
    infinity_count: int = 0  # words sending the base to infinity

    def __len__(self):
        return len(self.points)


def boundary_residual(L):
    """| |w1|^2 - 2 Re w2 | relative to the size of the finite lift."""
    L = np.asarray(L, dtype=complex)
    w1 = L[..., 0] / L[..., 2]
    w2 = L[..., 1] / L[..., 2]
    return np.abs(np.abs(w1) ** 2 - 2 * w2.real) / np.maximum(1.0, np.abs(w2))


def orbit_boundary(rep: AmalgamRep, L: int, base=None) -> OrbitCloud:
    """Images of ``base`` (a boundary lift; default infinity) under all words of length <= L.

    Points are rounded to ``DEDUP`` and deduplicated, keeping the shortest word.
    """
    b = np.array([0, 1, 0], dtype=complex) if base is None else np.asarray(base, dtype=complex)
    if abs(herm(b, b)) > BOUNDARY_TOL * max(1.0, float(np.vdot(b, b).real)):
        raise BoundaryError("base point is not on the boundary")
    words, mats = enumerate_rho(rep, L)
    img = mats @ b
    lens = np.array([len(w) for w in words])
    scale = np.abs(img).max(axis=1)
    at_inf = np.abs(img[:, 2]) <= 1e-12 * scale
    fin = ~at_inf
    img, lens = img[fin], lens[fin]
    bad = boundary_residual(img) > BOUNDARY_TOL
    if np.any(bad):
        raise BoundaryError(f"{int(bad.sum())} orbit points fail the boundary equation")
    z, _, v = lifts_to_horo(img)
    pts = np.stack([z.real, z.imag, v], axis=1)
    keys = np.round(pts / DEDUP).astype(np.int64)
    # words are in order of length, so the first occurrence is the shortest
    _, first = np.unique(keys, axis=0, return_index=True)
    first = np.sort(first)
    return OrbitCloud(pts[first], lens[first], int(at_inf.sum()))


def export_csv(cloud: OrbitCloud, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(CSV_HEADER)
        for (x, y, v), n in zip(cloud.points, cloud.wordlen):
            wr.writerow([repr(float(x)), repr(float(y)), repr(float(v)), int(n)])


def read_csv(path) -> OrbitCloud:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path}: expected header {','.join(CSV_HEADER)}")
    data = rows[1:]
    pts = np.array([[float(r[0]), float(r[1]), float(r[2])] for r in data]).reshape(-1, 3)
    lens = np.array([int(r[3]) for r in data], dtype=int)
    return OrbitCloud(pts, lens)


def render(cloud: OrbitCloud, size: int = CANVAS) -> np.ndarray:
    """RGB raster of the (x, y) projection coloured by v, bounds fitted to the cloud."""
    img = np.full((size, size, 3), 255, dtype=np.uint8)
    if not len(cloud):
        return img
    x, y, v = cloud.points.T
    lo, hi = np.array([x.min(), y.min()]), np.array([x.max(), y.max()])
    span = np.maximum(hi - lo, 1e-12).max()
    mid = (lo + hi) / 2
    px = np.clip(((x - mid[0]) / span + 0.5) * (size - 1), 0, size - 1).round().astype(int)
    py = np.clip((0.5 - (y - mid[1]) / span) * (size - 1), 0, size - 1).round().astype(int)
    vs = (v - v.min()) / max(v.max() - v.min(), 1e-12)
    colour = np.stack([255 * vs, 64 * np.ones_like(vs), 255 * (1 - vs)], axis=1).astype(np.uint8)
    # draw far-v points first so the order is fixed by the data alone
    order = np.lexsort((px, py, vs))
    img[py[order], px[order]] = colour[order]
    return img


def export_png(cloud: OrbitCloud, path, size: int = CANVAS):
    from PIL import Image

    Image.fromarray(render(cloud, size), "RGB").save(path, format="PNG", optimize=False)


def export(cloud: OrbitCloud, path, fmt: str = "csv"):
    if fmt == "csv":
        export_csv(cloud, path)
    elif fmt == "png":
        export_png(cloud, path)
    else:
        raise ValueError(f"unknown format {fmt!r}")
