"""Amalgamation of two cusped Fuchsian groups along a shared horizontal
translation, and the sets used to show the result is discrete.

Factor ``m`` stabilizes ``Sigma_{v_m}`` with ``v1 = 0`` and ``v2 = t``.
Factor 1's boundary relator maps to ``d = H_r`` and factor 2's to
``d^-1``, so the genus ``g1 + g2`` surface relator maps to the identity.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import words as W
from .chc import Isometry, lifts_to_horo
from .fuchsian import (FuchsianGroup, FundamentalData, HoroballTriple, fundamental_data,
                       horoball_triple, ideal_polygon_group, punctured_torus)
from .heisenberg import h_translation, quotient_w
from .totally_real import (FIBER_W_HALFWIDTH, TotallyRealPlane, chart_inverse, embed_matrix,
                           fiber_lifts, project_lifts)

log = logging.getLogger(__name__)

T_MAX = 2.0 ** 16


class SeparationError(RuntimeError):
    pass


class ConstructionBug(RuntimeError):
    pass


# --------------------------------------------------------------------------
# vectorized embedding


def sym2_stack(m):
    """sym2 for a stack of 2x2 matrices, shape (..., 2, 2) -> (..., 3, 3)."""
    a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    out = np.empty(m.shape[:-2] + (3, 3), dtype=complex)
    out[..., 0, 0] = a * d + b * c
    out[..., 0, 1] = 2 * a * c
    out[..., 0, 2] = b * d
    out[..., 1, 0] = a * b
    out[..., 1, 1] = a * a
    out[..., 1, 2] = b * b / 2
    out[..., 2, 0] = 2 * c * d
    out[..., 2, 1] = 2 * c * c
    out[..., 2, 2] = d * d
    return out


def embed_stack(m, v):
    T = sym2_stack(np.asarray(m, dtype=float))
    if v == 0:
        return T
    from .heisenberg import v_matrix
    return v_matrix(v) @ T @ v_matrix(-v)


# --------------------------------------------------------------------------
# the representation


@dataclass(frozen=True)
class SurfacePresentation:
    g1: int
    g2: int

    @property
    def genus(self):
        return self.g1 + self.g2

    @property
    def names(self):
        return tuple(W.gen_name(x) for x in range(1, 2 * self.genus + 1))

    @property
    def relator(self):
        return W.surface_relator(self.genus)

    @property
    def gamma(self):
        return W.surface_relator(self.g1)

    def parse(self, text: str):
        """Parse a word; ``gamma`` and ``d`` are accepted as aliases."""
        word = W.parse_word(text, {"gamma": self.gamma, "d": self.gamma})
        for x in word:
            if abs(x) > 2 * self.genus:
                raise KeyError(f"unknown generator {W.gen_name(abs(x))!r} for genus {self.genus}")
        return word


@dataclass(frozen=True)
class Syllable:
    factor: int
    word: tuple
    d_exponent: int | None = None  # set when the syllable lies in <d>


@dataclass(frozen=True)
class NormalForm:
    syllables: tuple

    @property
    def is_trivial(self):
        return not self.syllables

    def word(self):
        return tuple(x for s in self.syllables for x in s.word)

    def __len__(self):
        return len(self.syllables)


@dataclass(frozen=True, eq=False)
class Section:
    """Smooth section of the quotient by <H_r>, written as x = X(y, w, u).

    Below ``w_lo`` it is the preimage of factor 1's unbounded side
    ``{Re = x0_1}`` under the projection to ``Sigma_{v1}``; above ``w_hi``
    it is factor 2's; in between the two are blended with a quintic
    smoothstep in ``w``.
    """

    x0: tuple
    v: tuple
    w_lo: float
    w_hi: float
    r: float
    curve_u: tuple  # u-levels where the annulus curve meets each factor
    curve_y: float

    @staticmethod
    def side_x(x0, v, y, w, u):
        theta = np.arctan2(-(w - v), u + 2 * y * y)
        return x0 - y * np.tan(theta / 2)

    def blend(self, w):
        s = np.clip((np.asarray(w, dtype=float) - self.w_lo) / (self.w_hi - self.w_lo), 0, 1)
        return s * s * s * (10 - 15 * s + 6 * s * s)

    def x_of(self, y, w, u):
        s = self.blend(w)
        X1 = self.side_x(self.x0[0], self.v[0], y, w, u)
        X2 = self.side_x(self.x0[1], self.v[1], y, w, u)
        return (1 - s) * X1 + s * X2

    def point(self, y, w, u, shift=0.0):
        """Horospherical (z, u, v) of the section point over (y, w, u), moved by H_shift."""
        x = self.x_of(y, w, u) + shift
        return x + 1j * np.asarray(y), np.asarray(u, dtype=float), w - 2 * x * y

    # the curve f in the section and its <H_r>-orbit (the annulus E)

    def curve(self, s):
        """Quotient coordinates (y, w, u) of the curve at parameter s in [0, 1]."""
        s = np.asarray(s, dtype=float)
        bump = np.sin(np.pi * s) ** 2
        ramp = s * s * s * (10 - 15 * s + 6 * s * s)
        u1, u2 = self.curve_u
        u = (u1 + (u2 - u1) * ramp) * (1 + 0.5 * bump)
        w = self.v[0] + (self.v[1] - self.v[0]) * s
        return self.curve_y * bump, w, u

    def annulus_point(self, s, theta):
        """Point H_theta(f(s)) of the annulus; theta in [0, r] spans one period."""
        y, w, u = self.curve(s)
        return self.point(y, w, u, shift=theta)


@dataclass(frozen=True, eq=False)
class AmalgamRep:
    G1: FuchsianGroup
    G2: FuchsianGroup
    F1: FundamentalData
    F2: FundamentalData
    balls: tuple  # HoroballTriple per factor
    v1: float
    v2: float
    r: float
    section: Section | None = None
    margin: float = float("nan")
    images: dict = field(default_factory=dict, repr=False)

    # ------------------------------------------------------------------
    @property
    def t(self):
        return self.v2 - self.v1

    @property
    def presentation(self):
        return SurfacePresentation(self.g1, self.g2)

    @property
    def g1(self):
        return self.G1.genus

    @property
    def g2(self):
        return self.G2.genus

    @property
    def genus(self):
        return self.g1 + self.g2

    @property
    def w_mid(self):
        return (self.v1 + self.v2) / 2

    @property
    def letters(self):
        return tuple(range(1, 2 * self.genus + 1))

    def factor_letters(self, m):
        n1 = 2 * self.g1
        return tuple(range(1, n1 + 1)) if m == 1 else tuple(range(n1 + 1, 2 * self.genus + 1))

    @property
    def gamma(self):
        """Separating element: product of the first g1 commutators."""
        return W.surface_relator(self.g1)

    @property
    def relator(self):
        return W.surface_relator(self.genus)

    def boundary_word(self, m):
        return W.surface_relator(self.g1) if m == 1 else W.surface_relator(self.g2, self.g1 + 1)

    def d_sign(self, m):
        """rho(boundary_word(m)) = d^d_sign(m)."""
        return 1 if m == 1 else -1

    def factor_of(self, letter):
        return 1 if abs(letter) <= 2 * self.g1 else 2

    def group(self, m):
        return self.G1 if m == 1 else self.G2

    def plane(self, m):
        return TotallyRealPlane(self.v1 if m == 1 else self.v2)

    def fdata(self, m):
        return self.F1 if m == 1 else self.F2

    def local(self, letter):
        """Letter of the factor group."""
        return letter if abs(letter) <= 2 * self.g1 else int(np.sign(letter)) * (abs(letter) - 2 * self.g1)

    def factor_matrix(self, m, word):
        mats = self.group(m).matrices()
        out = np.eye(2)
        for x in word:
            out = out @ mats[self.local(x)]
        return out

    @property
    def d(self):
        return h_translation(self.r)

    # ------------------------------------------------------------------
    def rho_matrix(self, word):
        """Matrix of rho(word), computed syllable by syllable."""
        out = np.eye(3, dtype=complex)
        for m, syl in _split(self, W.reduce_word(word)):
            out = out @ embed_matrix(self.factor_matrix(m, syl), self.plane(m))
        return out

    def rho(self, word) -> Isometry:
        if isinstance(word, str):
            word = self.presentation.parse(word)
        for x in word:
            if not isinstance(x, (int, np.integer)) or x == 0 or abs(x) > 2 * self.genus:
                raise KeyError(f"unknown generator {x!r}")
        return Isometry(self.rho_matrix(word), det_one=True)

    def region_offset(self, L):
        """Signed w - w_mid for lifts (positive in X1)."""
        z, u, v = lifts_to_horo(L)
        return quotient_w(z.real, z.imag, v) - self.w_mid


def _split(rep, word):
    out = []
    for x in word:
        m = rep.factor_of(x)
        if out and out[-1][0] == m:
            out[-1][1].append(x)
        else:
            out.append((m, [x]))
    return [(m, tuple(w)) for m, w in out]


def factor_group(g: int, r: float) -> FuchsianGroup:
    return punctured_torus(r) if g == 1 else ideal_polygon_group(g, r)


# --------------------------------------------------------------------------
# construction


def _fiber_samples(n, rng):
    """Common parameters for sampling closed fibers over a strip."""
    xi01 = rng.uniform(0, 1, n)
    eta01 = np.sqrt(rng.uniform(0, 1, n))
    rho = np.where(rng.uniform(size=n) < 0.5, 1.0, np.sqrt(rng.uniform(0, 1, n)))
    theta = rng.uniform(0, 2 * np.pi, n)
    return xi01, eta01, rho, theta


def sample_beta_complement(F: FundamentalData, h_beta: float, plane: TotallyRealPlane,
                           n: int, rng, params=None):
    """Lifts of points of the closed preimage of Sigma minus the horoball of
    height ``h_beta``, over the strip of ``F``."""
    xi01, eta01, rho, theta = params if params is not None else _fiber_samples(n, rng)
    zeta = F.unbounded_x0 + F.r * xi01 + 1j * np.maximum(h_beta * eta01, 1e-6)
    return fiber_lifts(zeta, rho, theta, plane)


def separation_margin(G1_data, G2_data, v1, t, n=10_000, seed=0):
    """Signed w-gap between the two beta-complement preimages and w_mid.

    ``Gm_data`` is ``(FundamentalData, HoroballTriple)``.
    """
    rng = np.random.default_rng(seed)
    params = _fiber_samples(n, rng)
    w_mid = v1 + t / 2
    gaps = []
    for m, (F, balls) in enumerate((G1_data, G2_data), start=1):
        v = v1 if m == 1 else v1 + t
        L = sample_beta_complement(F, balls.h_beta, TotallyRealPlane(v), n, rng, params)
        z, u, vv = lifts_to_horo(L)
        w = quotient_w(z.real, z.imag, vv)
        gaps.append(np.min(w_mid - w) if m == 1 else np.min(w - w_mid))
    return float(min(gaps))


def build(g1: int = 1, g2: int = 1, r: float = 6.0, t="auto", margin: float = 0.5,
          blend_fraction: float = 0.5, seed: int = 0, L_ford: int = 6,
          n_margin: int = 10_000) -> AmalgamRep:
    if g1 < 1 or g2 < 1:
        raise ValueError("both genera must be >= 1")
    if r <= 0:
        raise ValueError("r must be positive")
    if not 0 < blend_fraction < 1:
        raise ValueError("blend_fraction must be in (0, 1)")
    G1 = factor_group(g1, r)
    G2 = factor_group(g2, r).mirrored()
    F1, F2 = fundamental_data(G1, L_ford), fundamental_data(G2, L_ford)
    B1, B2 = horoball_triple(G1, F1), horoball_triple(G2, F2)
    v1 = 0.0
    if t == "auto":
        t = 1.0
        while True:
            got = separation_margin((F1, B1), (F2, B2), v1, t, n_margin, seed)
            if got >= margin:
                break
            t *= 2
            if t > T_MAX:
                raise SeparationError(f"no t <= {T_MAX} reaches margin {margin}")
    else:
        t = float(t)
        got = separation_margin((F1, B1), (F2, B2), v1, t, n_margin, seed)
    log.info("t = %g, separation margin %.4g", t, got)
    rep = AmalgamRep(G1, G2, F1, F2, (B1, B2), v1, v1 + t, float(r), margin=got)
    rep = with_section(rep, blend_fraction)
    images = {}
    for x in rep.letters:
        images[W.gen_name(x)] = rep.rho((x,))
    object.__setattr__(rep, "images", images)
    _check(rep)
    return rep


def with_section(rep: AmalgamRep, blend_fraction: float = 0.5) -> AmalgamRep:
    return AmalgamRep(rep.G1, rep.G2, rep.F1, rep.F2, rep.balls, rep.v1, rep.v2, rep.r,
                      build_section(rep, blend_fraction), rep.margin, rep.images)


def _check(rep):
    if not rep.rho(rep.gamma).equals(rep.d, 1e-10):
        raise ConstructionBug("rho(gamma) != d")
    if not rep.rho(rep.relator).equals(Isometry.identity(), 1e-9):
        raise ConstructionBug("surface relator is not mapped to the identity")


def fiber_halfwidth(balls: HoroballTriple) -> float:
    """w-halfwidth of the preimage of Sigma minus beta (over any strip)."""
    return balls.h_beta ** 2 * FIBER_W_HALFWIDTH


def build_section(rep: AmalgamRep, blend_fraction: float = 0.5) -> Section:
    lo = rep.v1 + fiber_halfwidth(rep.balls[0])
    hi = rep.v2 - fiber_halfwidth(rep.balls[1])
    if hi <= lo:
        raise SeparationError("planes too close for a blend band")
    mid, half = (lo + hi) / 2, (hi - lo) * blend_fraction / 2
    u_levels = tuple(b.h_B * b.h_b for b in rep.balls)
    return Section((rep.F1.unbounded_x0, rep.F2.unbounded_x0), (rep.v1, rep.v2),
                   mid - half, mid + half, rep.r, u_levels, 0.5 * np.sqrt(min(u_levels)))


# --------------------------------------------------------------------------
# normal forms in the amalgam


def normal_form(rep: AmalgamRep, word) -> NormalForm:
    """Alternating normal form: no syllable in <d> unless it is the only one."""
    stack = []  # [factor, word]

    def d_exp(m, w):
        k = W.power_of(w, rep.boundary_word(m))
        return None if k is None else k * rep.d_sign(m)

    def spell(k, m):
        return W.power(rep.boundary_word(m), k * rep.d_sign(m))

    for m, syl in _split(rep, W.reduce_word(word)):
        if stack and stack[-1][0] == m:
            stack[-1][1] = W.multiply(stack[-1][1], syl)
        else:
            if len(stack) == 1 and d_exp(*stack[0]) is not None:
                k = d_exp(*stack.pop())
                syl = W.multiply(spell(k, m), syl)
            stack.append([m, W.reduce_word(syl)])
        # settle the top of the stack
        while stack:
            m_top, w_top = stack[-1]
            if not w_top:
                stack.pop()
                if len(stack) >= 2 and stack[-1][0] == stack[-2][0]:
                    top = stack.pop()
                    stack[-1][1] = W.multiply(stack[-1][1], top[1])
                continue
            k = d_exp(m_top, w_top)
            if k is not None and len(stack) >= 2:
                stack.pop()
                below = stack[-1]
                below[1] = W.multiply(below[1], spell(k, below[0]))
                continue
            break
    out = []
    for m, w in stack:
        out.append(Syllable(m, tuple(w), d_exp(m, w)))
    return NormalForm(tuple(out))


# --------------------------------------------------------------------------
# word enumeration with matrices


def enumerate_rho(rep: AmalgamRep, max_len: int, letters=None):
    """All freely reduced words over ``letters`` (default: all generators) up
    to ``max_len`` with their rho-matrices (not det-normalized).

    Matrices are accumulated syllable by syllable, so a long syllable in
    factor 2 is embedded once rather than letter by letter.
    Returns ``(words, mats)`` with ``mats`` of shape (n, 3, 3).
    """
    letters = rep.letters if letters is None else tuple(letters)
    alphabet = [s * x for x in letters for s in (1, -1)]
    fmats = {x: rep.group(rep.factor_of(x)).matrices()[rep.local(x)] for x in alphabet}
    planes = {1: rep.v1, 2: rep.v2}

    words = [()]
    mats = [np.eye(3, dtype=complex)[None]]
    lw = [()]
    cur = np.eye(3, dtype=complex)[None]  # full matrix of each node
    pre = cur.copy()  # product of all but the last syllable
    syl = np.eye(2)[None]
    fac = np.array([0])
    last = np.array([0])
    for _ in range(max_len):
        new_w, new_pre, new_syl, new_fac, new_last, new_M = [], [], [], [], [], []
        for x in alphabet:
            idx = np.nonzero(last != -x)[0]
            if not len(idx):
                continue
            m = rep.factor_of(x)
            sw = fac[idx] != m
            p = np.where(sw[:, None, None], cur[idx], pre[idx])
            s = np.where(sw[:, None, None], fmats[x], syl[idx] @ fmats[x])
            new_w.extend(lw[i] + (x,) for i in idx)
            new_pre.append(p)
            new_syl.append(s)
            new_fac.append(np.full(len(idx), m))
            new_last.append(np.full(len(idx), x))
            new_M.append(p @ embed_stack(s, planes[m]))
        lw = new_w
        pre = np.concatenate(new_pre)
        syl = np.concatenate(new_syl)
        fac = np.concatenate(new_fac)
        last = np.concatenate(new_last)
        cur = np.concatenate(new_M)
        words.extend(new_w)
        mats.append(cur)
    return words, np.concatenate(mats)


def region(rep: AmalgamRep, p, tol: float = 0.0) -> str:
    """'X1' if w > w_mid (the side of factor 2's data), else 'X2'.

    ``tol`` > 0 turns points within ``tol`` of the level set into 'tie'.
    """
    from .chc import HoroCoord, lift
    L = lift(p).lift if isinstance(p, HoroCoord) else np.asarray(getattr(p, "lift", p))
    off = float(rep.region_offset(L))
    if abs(off) < tol:
        return "tie"
    return "X1" if off > 0 else "X2"


def region_labels(rep: AmalgamRep, L):
    """Boolean array: True where the lift is in X1."""
    return rep.region_offset(L) > 0


# --------------------------------------------------------------------------
# fundamental sets


@dataclass(frozen=True, eq=False)
class FundamentalRegion:
    """Phi_m (factor m) or Phi = Phi_1 n Phi_2 (factors (1, 2))."""

    rep: AmalgamRep
    factors: tuple

    @property
    def name(self):
        return "Phi" if len(self.factors) == 2 else f"Phi{self.factors[0]}"

    def between_sections(self, L):
        z, u, v = lifts_to_horo(L)
        x, y = z.real, z.imag
        w = quotient_w(x, y, v)
        X = self.rep.section.x_of(y, w, u)
        return (x >= X) & (x < X + self.rep.r)

    def section_shift(self, L):
        """Integer n with d^-n(p) between S and d(S)."""
        z, u, v = lifts_to_horo(L)
        x, y = z.real, z.imag
        w = quotient_w(x, y, v)
        X = self.rep.section.x_of(y, w, u)
        return np.floor((x - X) / self.rep.r).astype(int)

    def bounded_ok(self, L, factors=None):
        ok = np.ones(np.shape(L)[:-1], dtype=bool)
        for m in (factors or self.factors):
            P = project_lifts(self.rep.plane(m), L)
            ok &= self.rep.fdata(m).outside_sides(chart_inverse(P))
        return ok

    def contains(self, L):
        L = np.asarray(L, dtype=complex)
        return self.between_sections(L) & self.bounded_ok(L)


def fundamental_region(rep: AmalgamRep, m: int) -> FundamentalRegion:
    if rep.section is None:
        raise ValueError("section not built")
    return FundamentalRegion(rep, (m,))


def phi(rep: AmalgamRep) -> FundamentalRegion:
    if rep.section is None:
        raise ValueError("section not built")
    return FundamentalRegion(rep, (1, 2))


def in_psi(rep: AmalgamRep, m: int, L):
    """Membership in the preimage of factor m's Ford domain."""
    P = project_lifts(rep.plane(m), L)
    return rep.fdata(m).contains(chart_inverse(P))


def apply_d_power(L, n, r):
    """Apply d^n (n an int array) to lifts."""
    z, u, v = lifts_to_horo(L)
    x, y = z.real + n * r, z.imag
    from .chc import horo_lifts
    return horo_lifts(x + 1j * y, u, v - 2 * n * r * y)
