"""Cusped Fuchsian surface groups with one cusp at infinity.

A group is given by SL(2,R) generators ``a1, b1, ..., ag, bg`` whose
boundary relator ``[a1,b1]...[ag,bg]`` is normalized to ``+-[[1, s], [0, 1]]``
(``s = translation``; ``|s|`` is the cusp length).  Ford domains are built
from isometric circles of short words.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import words as W

log = logging.getLogger(__name__)


class ConstructionError(RuntimeError):
    pass


def sl2_inv(m):
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def mobius(m, zeta):
    return (m[0, 0] * zeta + m[0, 1]) / (m[1, 0] * zeta + m[1, 1])


@dataclass(frozen=True, eq=False)
class FuchsianGroup:
    genus: int
    generators: tuple  # 2x2 float arrays a1, b1, ..., ag, bg
    translation: float  # relator acts as zeta -> zeta + translation

    @property
    def cusp_length(self):
        return abs(self.translation)

    @property
    def relator(self):
        return W.surface_relator(self.genus)

    @property
    def letters(self):
        return tuple(range(1, 2 * self.genus + 1))

    def matrices(self):
        """letter -> matrix, including inverse letters."""
        out = {}
        for k, g in enumerate(self.generators):
            out[k + 1] = g
            out[-(k + 1)] = sl2_inv(g)
        return out

    def evaluate(self, word):
        mats = self.matrices()
        out = np.eye(2)
        for x in word:
            out = out @ mats[x]
        return out

    def relator_matrix(self):
        return self.evaluate(self.relator)

    def conjugate(self, C):
        """Group C G C^-1 for C in GL(2,R) with |det C| = 1."""
        Ci = np.linalg.inv(C)
        gens = tuple(C @ g @ Ci for g in self.generators)
        R = C @ self.relator_matrix() @ Ci
        return FuchsianGroup(self.genus, gens, float(R[0, 1] / R[0, 0]))

    def mirrored(self):
        """Conjugate by zeta -> -conj(zeta); the relator translation flips sign."""
        return self.conjugate(np.diag([1.0, -1.0]))


def normalize_cusp(genus, gens, translation) -> FuchsianGroup:
    """Conjugate so the boundary relator fixes infinity and translates by
    ``translation``."""
    G = FuchsianGroup(genus, tuple(np.asarray(g, dtype=float) for g in gens), np.nan)
    R = G.relator_matrix()
    if abs(abs(np.trace(R)) - 2) > 1e-9:
        raise ConstructionError(f"boundary relator is not parabolic (trace {np.trace(R)})")
    if abs(R[1, 0]) > 1e-12:
        p = (R[0, 0] - R[1, 1]) / (2 * R[1, 0])
        G = G.conjugate(np.array([[0.0, -1.0], [1.0, -p]]))
    else:
        G = G.conjugate(np.eye(2))
    s = G.translation
    if np.sign(s) != np.sign(translation):
        G = G.mirrored()
        s = G.translation
    k = np.sqrt(abs(translation) / abs(s))
    G = G.conjugate(np.diag([k, 1 / k]))
    # snap the relator's translation to the requested value
    return FuchsianGroup(genus, G.generators, float(translation))


def punctured_torus(r: float) -> FuchsianGroup:
    """The modular punctured torus <A, B>, A = [[1,1],[1,2]], B = [[1,-1],[-1,2]]."""
    if r <= 0:
        raise ValueError("cusp length must be positive")
    A = np.array([[1.0, 1.0], [1.0, 2.0]])
    B = np.array([[1.0, -1.0], [-1.0, 2.0]])
    return normalize_cusp(1, (A, B), r)


def _three_point(z1, z2, z3):
    """Matrix sending z1, z2, z3 to 0, inf, 1."""
    return np.array([[z3 - z2, -z1 * (z3 - z2)], [z3 - z1, -z2 * (z3 - z1)]], dtype=complex)


def _disk_pairing(vj, vj1, mj, vk, vk1, mk):
    """Mobius map of the disk with vj -> vk1, vj1 -> vk, mj -> mk."""
    A = _three_point(vj, vj1, mj)
    B = _three_point(vk1, vk, mk)
    return np.linalg.inv(B) @ A


_CAYLEY = np.array([[1, -1j], [1, 1j]])  # upper half-plane -> disk


def _to_sl2r(g):
    m = np.linalg.inv(_CAYLEY) @ g @ _CAYLEY
    m = m / np.sqrt(np.linalg.det(m))
    # fix the overall phase so the matrix is real
    k = np.argmax(np.abs(m))
    m = m * (abs(m.flat[k]) / m.flat[k])
    if np.max(np.abs(m.imag)) > 1e-9:
        raise ConstructionError("side pairing is not in SL(2,R)")
    return m.real


def _foot(q1, q2, p):
    """Foot of the perpendicular from ideal point p to the geodesic q1 q2 (disk)."""
    M = _three_point(q1, q2, p)
    Mi = np.linalg.inv(M)
    return (Mi[0, 0] * 1j + Mi[0, 1]) / (Mi[1, 0] * 1j + Mi[1, 1])


def ideal_polygon_group(g: int, r: float) -> FuchsianGroup:
    """Side pairings of the regular ideal 4g-gon, pattern a b a^-1 b^-1 ...

    Sides are paired with zero shear relative to the fan triangulation from
    the first vertex, so the single ideal vertex cycle has parabolic holonomy.
    """
    if g < 1:
        raise ValueError("genus must be >= 1")
    n = 4 * g
    verts = np.exp(2j * np.pi * (np.arange(n) + 0.5) / n)
    # side j joins verts[j], verts[j+1]; in the fan from verts[0] its
    # triangle's third vertex is verts[0], except for the two sides at verts[0]
    feet = []
    for j in range(n):
        q1, q2 = verts[j], verts[(j + 1) % n]
        if j == 0:
            opp = verts[2]
        elif j == n - 1:
            opp = verts[n - 2]
        else:
            opp = verts[0]
        feet.append(_foot(q1, q2, opp))

    def pairing(j, k):
        return _disk_pairing(verts[j], verts[(j + 1) % n], feet[j],
                             verts[k], verts[(k + 1) % n], feet[k])

    gens = []
    for i in range(g):
        gens.append(_to_sl2r(pairing(4 * i + 2, 4 * i)))
        gens.append(_to_sl2r(pairing(4 * i + 1, 4 * i + 3)))
    R = FuchsianGroup(g, tuple(gens), np.nan).relator_matrix()
    if abs(abs(np.trace(R)) - 2) > 1e-9:
        raise ConstructionError(f"vertex cycle is not parabolic (relator trace {np.trace(R)})")
    return normalize_cusp(g, gens, r)


# --------------------------------------------------------------------------
# Ford domains


@dataclass(frozen=True)
class Side:
    """Arc of the isometric circle of ``matrix`` between ``xl`` and ``xr``."""

    center: float
    radius: float
    word: tuple
    matrix: np.ndarray
    xl: float
    xr: float
    pairing_word: tuple = ()
    pairing_matrix: np.ndarray | None = None
    partner: int = -1

    def height(self, x):
        return np.sqrt(np.maximum(self.radius ** 2 - (x - self.center) ** 2, 0.0))

    def endpoints(self):
        return (complex(self.xl, self.height(self.xl)), complex(self.xr, self.height(self.xr)))


@dataclass(frozen=True, eq=False)
class FundamentalData:
    """Ford domain {x0 <= Re < x0 + r} minus the isometric disks of ``sides``."""

    sides: tuple
    unbounded_x0: float
    r: float
    circles: np.ndarray = field(repr=False)  # (k, 2) centers, radii incl. translates

    @property
    def max_height(self):
        return max(s.radius for s in self.sides)

    def envelope(self, x):
        x = np.asarray(x, dtype=float)
        c, R = self.circles[:, 0], self.circles[:, 1]
        h2 = R ** 2 - (x[..., None] - c) ** 2
        return np.sqrt(np.maximum(h2.max(axis=-1), 0.0))

    def outside_disks(self, zeta, tol=0.0):
        """Outside every bounded-side disk (the bounded half-planes)."""
        zeta = np.asarray(zeta, dtype=complex)
        c, R = self.circles[:, 0], self.circles[:, 1]
        d = np.abs(zeta[..., None] - c) - R
        return np.all(d > tol, axis=-1)

    def outside_sides(self, zeta):
        """Outside the disks of the sides over one period only."""
        zeta = np.asarray(zeta, dtype=complex)
        x, y2 = zeta.real, zeta.imag ** 2
        ok = np.ones(zeta.shape, dtype=bool)
        for s in self.sides:
            ok &= (x - s.center) ** 2 + y2 > s.radius ** 2
        return ok

    def contains(self, zeta, tol=0.0):
        zeta = np.asarray(zeta, dtype=complex)
        x = zeta.real
        in_strip = (x >= self.unbounded_x0 - tol) & (x < self.unbounded_x0 + self.r + tol)
        return in_strip & self.outside_disks(zeta, tol) & (zeta.imag > 0)


def _circle_intersection_x(c1, r1, c2, r2):
    # (x-c1)^2 - r1^2 = (x-c2)^2 - r2^2
    return (r1 ** 2 - r2 ** 2 + c2 ** 2 - c1 ** 2) / (2 * (c2 - c1))


def _drop_covered(base, r):
    """Remove circles whose disk lies inside another disk (or a translate)."""
    base = sorted(base, key=lambda b: -b[1])
    kept_c, kept_r, out = [], [], []
    for b in base:
        c, R = b[0], b[1]
        if kept_c:
            kc, kr = np.array(kept_c), np.array(kept_r)
            dc = np.abs((c - kc + r / 2) % r - r / 2)
            if np.any(dc + R <= kr + 1e-12):
                continue
        kept_c.append(c)
        kept_r.append(R)
        out.append(b)
    return out


def fundamental_data(G: FuchsianGroup, L_ford: int = 6, grid: int = 200_001) -> FundamentalData:
    r = G.cusp_length
    T = G.translation
    rel = G.relator
    words, mats = W.evaluate_tree(G.letters, L_ford, G.matrices(), 2)
    cand = {}
    for w, M in zip(words, mats):
        c, d = M[1, 0], M[1, 1]
        if abs(c) < 1e-9:
            continue
        center, radius = -d / c, 1 / abs(c)
        # shift the center into [0, r) by right multiplication with T^m
        m = int(np.floor(center / r)) * (1 if T > 0 else -1)
        Tm = np.array([[1.0, m * T], [0.0, 1.0]])
        M2 = M @ Tm
        center2 = -M2[1, 1] / M2[1, 0]
        key = (round(center2 % r, 9) % round(r, 9), round(radius, 9))
        if key not in cand or len(cand[key][0]) > len(w) + 4 * abs(m):
            cand[key] = (W.multiply(w, W.power(rel, m)), M2)
    if not cand:
        raise ConstructionError("no isometric circles found; increase L_ford")
    base = []
    for w, M in cand.values():
        base.append((-M[1, 1] / M[1, 0], 1 / abs(M[1, 0]), w, M))
    base = _drop_covered(base, r)
    rmax = max(b[1] for b in base)
    shifts = range(-int(np.ceil(rmax / r)) - 2, int(np.ceil(rmax / r)) + 3)
    circles = []
    for center, radius, w, M in base:
        for k in shifts:
            # circle of M T^{-k'} is centered at center + k r
            kk = k if T > 0 else -k
            Mk = M @ np.array([[1.0, -kk * T], [0.0, 1.0]])
            circles.append((center + k * r, radius, W.multiply(w, W.power(rel, -kk)), Mk))
    cs = np.array([c[0] for c in circles])
    rs = np.array([c[1] for c in circles])

    # top circle along a grid spanning two periods
    xs = np.linspace(-r, r, grid)
    top = np.empty(grid, dtype=int)
    hmax = np.empty(grid)
    step = max(1, 4_000_000 // len(circles))
    for i0 in range(0, grid, step):
        sl = slice(i0, i0 + step)
        h2 = rs ** 2 - (xs[sl, None] - cs) ** 2
        top[sl] = np.argmax(h2, axis=1)
        hmax[sl] = h2[np.arange(h2.shape[0]), top[sl]]
    if np.any(hmax <= 0):
        raise ConstructionError(
            f"isometric circles of words up to length {L_ford} do not close "
            "the domain; increase L_ford")
    runs = [top[0]]
    for k in top[1:]:
        if k != runs[-1]:
            runs.append(k)
    verts = []
    for i, j in zip(runs[:-1], runs[1:]):
        x = _circle_intersection_x(cs[i], rs[i], cs[j], rs[j])
        h2 = rs[i] ** 2 - (x - cs[i]) ** 2
        others = rs ** 2 - (x - cs) ** 2
        if np.max(others) > h2 + 1e-9 * max(1.0, h2):
            raise ConstructionError("envelope resolution too coarse; increase grid")
        verts.append((x, i, j))
    # strip starts at the vertex nearest to -r/2
    v0 = min(range(len(verts)), key=lambda k: abs(verts[k][0] + r / 2))
    x0 = verts[v0][0]
    sides = []
    k = v0
    while True:
        xl, _, ci = verts[k]
        xr = verts[k + 1][0]
        sides.append((ci, xl, xr))
        k += 1
        if xr >= x0 + r - 1e-9:
            break
    if abs(sides[-1][2] - (x0 + r)) > 1e-7:
        raise ConstructionError("Ford domain vertices are not periodic")

    side_objs = []
    for ci, xl, xr in sides:
        center, radius, w, M = circles[ci]
        side_objs.append(Side(center, radius, w, M, xl, xr))

    # side pairings: some T^k M maps the arc onto another arc, reversed
    paired = []
    for i, s in enumerate(side_objs):
        P, Q = s.endpoints()
        gP, gQ = mobius(s.matrix, P), mobius(s.matrix, Q)
        found = None
        for j, t in enumerate(side_objs):
            tP, tQ = t.endpoints()
            k = np.round((tQ.real - gP.real) / T)
            if abs(gP + k * T - tQ) < 1e-8 and abs(gQ + k * T - tP) < 1e-8:
                Tk = np.array([[1.0, k * T], [0.0, 1.0]])
                found = (j, W.multiply(W.power(rel, int(k)), s.word), Tk @ s.matrix)
                break
        if found is None:
            raise ConstructionError(f"side {i} has no partner; increase L_ford")
        j, pw, pm = found
        paired.append(Side(s.center, s.radius, s.word, s.matrix, s.xl, s.xr, pw, pm, j))

    circ = np.array([(s.center + k * r, s.radius) for s in paired for k in (-1, 0, 1)])
    return FundamentalData(tuple(paired), float(x0), float(r), circ)


# --------------------------------------------------------------------------
# horoballs


@dataclass(frozen=True)
class HoroballTriple:
    """Horoballs {eta > h} at infinity: B (h_B) contains b (h_b) contains beta (h_beta)."""

    h_B: float
    h_b: float
    h_beta: float

    def __post_init__(self):
        if not (0 < self.h_B < self.h_b < self.h_beta):
            raise ValueError("horoball heights must satisfy 0 < h_B < h_b < h_beta")


def horoball_triple(G: FuchsianGroup, F: FundamentalData) -> HoroballTriple:
    h_B = 2 * F.max_height
    return HoroballTriple(h_B, 2 * h_B, 4 * h_B)
