"""Sampled checks of the ping-pong hypotheses for the amalgam, fundamental sets,
faithfulness on bounded words and the census of parabolic elements.

Every check is evidence at sample resolution, never a proof.  All randomness
comes from ``numpy.random.default_rng(seed)``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import words as W
from .amalgam import (AmalgamRep, FundamentalRegion, apply_d_power, enumerate_rho,
                      fiber_halfwidth, fundamental_region, normal_form, phi)
from .chc import CUBE_ROOTS, IsometryKind, classify, horo_lifts, lifts_to_horo
from .heisenberg import h_translation
from .totally_real import chart_inverse, embed_matrix, project_lifts

log = logging.getLogger(__name__)

U_RANGE = (-3.0, 3.0)  # log10 bounds for u
CHUNK = 2_000_000  # points x words per vectorized batch


@dataclass
class VerificationReport:
    check_name: str
    seed: int
    samples_tested: int
    violations: int
    min_margin: float
    witness: dict | None = None
    undecided: int = 0
    max_undecided_fraction: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def undecided_fraction(self):
        n = self.details.get("coverage_samples", self.samples_tested)
        return self.undecided / n if n else 0.0

    @property
    def passed(self):
        return self.violations == 0 and self.undecided_fraction <= self.max_undecided_fraction

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        d["undecided_fraction"] = self.undecided_fraction
        return _jsonable(d)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _point_dict(L):
    z, u, v = lifts_to_horo(np.asarray(L))
    return {"x": float(z.real), "y": float(z.imag), "u": float(u), "v": float(v)}


def merge_reports(name, reports, seed):
    """Associative merge: counts add, margins take the minimum."""
    worst = min(reports, key=lambda r: r.min_margin)
    return VerificationReport(
        name, seed, sum(r.samples_tested for r in reports), sum(r.violations for r in reports),
        worst.min_margin, worst.witness, sum(r.undecided for r in reports),
        max(r.max_undecided_fraction for r in reports),
        {r.check_name: r.to_dict() for r in reports})


# --------------------------------------------------------------------------
# sampling


def _y_bound(rep):
    return 2 * max(b.h_beta for b in rep.balls)


def _w_pad(rep):
    return 2 * max(fiber_halfwidth(b) for b in rep.balls)


def sample_box(rep, n, rng, w_range, x_range=None):
    """Lifts sampled uniformly in (x, y, w) with log-uniform u."""
    x_lo, x_hi = x_range or (0.0, rep.r)
    Y = _y_bound(rep)
    x = rng.uniform(x_lo, x_hi, n)
    y = rng.uniform(-Y, Y, n)
    u = 10.0 ** rng.uniform(*U_RANGE, n)
    w = rng.uniform(*w_range, n)
    return horo_lifts(x + 1j * y, u, w - 2 * x * y)


def region_w_range(rep, m):
    """w-interval of the sampling box for X_m."""
    span = rep.t / 2 + _w_pad(rep)
    return (rep.w_mid, rep.w_mid + span) if m == 1 else (rep.w_mid - span, rep.w_mid)


def sample_region(rep, m, n, rng):
    L = sample_box(rep, n, rng, region_w_range(rep, m))
    # the open/closed distinction on the level set is immaterial: drop exact ties
    keep = rep.region_offset(L) != 0
    return L[keep]


def sample_near_planes(rep, n, rng, factors=(1, 2), spread=2.0):
    """Lifts with |y| and |w - v_m| at most ``spread``, u log-uniform."""
    v = np.array([rep.v1 if m == 1 else rep.v2 for m in factors])[rng.integers(len(factors), size=n)]
    x = rng.uniform(0, rep.r, n)
    y = rng.uniform(-spread, spread, n)
    u = 10.0 ** rng.uniform(*U_RANGE, n)
    w = v + rng.uniform(-spread, spread, n)
    return horo_lifts(x + 1j * y, u, w - 2 * x * y)


def ambient_w_range(rep):
    pad = _w_pad(rep)
    return rep.v1 - pad, rep.v2 + pad


def sample_fundamental(rep, region: FundamentalRegion, n, rng, w_range=None, max_rounds=200):
    """Points of ``region``: x is drawn between the section and its d-translate."""
    w_range = w_range or ambient_w_range(rep)
    Y = _y_bound(rep)
    out, have = [], 0
    for _ in range(max_rounds):
        k = 2 * (n - have) + 16
        y = rng.uniform(-Y, Y, k)
        u = 10.0 ** rng.uniform(*U_RANGE, k)
        w = rng.uniform(*w_range, k)
        x = rep.section.x_of(y, w, u) + rep.r * rng.uniform(0, 1, k)
        L = horo_lifts(x + 1j * y, u, w - 2 * x * y)
        L = L[region.contains(L)]
        out.append(L)
        have += len(L)
        if have >= n:
            break
    return np.concatenate(out)[:n]


def _apply(mats, L):
    """(W, 3, 3) x (N, 3) -> (W, N, 3)."""
    return np.einsum("wij,nj->wni", mats, L)


def _chunks(n_words, n_points):
    step = max(1, CHUNK // max(1, n_points))
    for s in range(0, n_words, step):
        yield s, min(n_words, s + step)


def _d_exponent(rep, m, word):
    k = W.power_of(word, rep.boundary_word(m))
    return None if k is None else k * rep.d_sign(m)


# --------------------------------------------------------------------------
# precisely invariant sets and the interactive pair


def check_precisely_invariant(rep: AmalgamRep, m: int, L: int = 4, N: int = 10_000,
                              seed: int = 0) -> VerificationReport:
    """X_m is <d>-invariant and every other factor-m word of length <= L
    sends it into X_{3-m}."""
    rng = np.random.default_rng(seed)
    P = sample_region(rep, m, N, rng)
    words, mats = enumerate_rho(rep, L, rep.factor_letters(m))
    words, mats = words[1:], mats[1:]
    in_d = np.array([_d_exponent(rep, m, w) is not None for w in words])
    side = 1.0 if m == 1 else -1.0  # sign of w - w_mid on X_m
    violations, best, witness = 0, np.inf, None
    for a, b in _chunks(len(words), len(P)):
        off = side * rep.region_offset(_apply(mats[a:b], P))  # > 0: still in X_m
        stay = in_d[a:b, None]
        margin = np.where(stay, off, -off)
        violations += int(np.sum(margin <= 0))
        moved = np.where(stay, np.inf, margin)
        i = np.unravel_index(np.argmin(moved), moved.shape)
        if moved[i] < best:
            best = float(moved[i])
            witness = {"point": _point_dict(P[i[1]]), "word": W.format_word(words[a + i[0]])}
    return VerificationReport(f"precisely_invariant_X{m}", seed, len(P), violations, best, witness,
                              details={"words": len(words), "d_powers": int(in_d.sum()), "L": L})


def _witness_search(rep, m, L, n, rng):
    """A point of Phi n X_{3-m} none of whose factor-m images (words <= L) is in X_m."""
    other = 3 - m
    P = sample_fundamental(rep, phi(rep), n, rng, region_w_range(rep, other))
    if not len(P):
        return None, -np.inf
    words, mats = enumerate_rho(rep, L, rep.factor_letters(m))
    side = 1.0 if other == 1 else -1.0
    worst = np.full(len(P), np.inf)
    for a, b in _chunks(len(words), len(P)):
        off = side * rep.region_offset(_apply(mats[a:b], P))
        worst = np.minimum(worst, off.min(axis=0))
    i = int(np.argmax(worst))
    return (P[i] if worst[i] > 0 else None), float(worst[i])


def check_interactive_pair(rep: AmalgamRep, L: int = 4, N: int = 10_000,
                           seed: int = 0) -> VerificationReport:
    rng = np.random.default_rng(seed)
    subs = [check_precisely_invariant(rep, m, L, N, seed + m) for m in (1, 2)]
    # disjointness of the two predicates on ambient samples
    A = sample_box(rep, N, rng, ambient_w_range(rep))
    off = rep.region_offset(A)
    in1, in2 = off > 0, ~(off > 0)
    both = int(np.sum(in1 & in2))
    neither = int(np.sum(~in1 & ~in2))
    witnesses, missing = {}, 0
    for m in (1, 2):
        p, margin = _witness_search(rep, m, L, 200, rng)
        if p is None:
            missing += 1
            witnesses[f"X{3 - m}"] = None
        else:
            witnesses[f"X{3 - m}"] = {"point": _point_dict(p), "margin": margin}
    violations = sum(s.violations for s in subs) + both + neither + missing
    margin = min(s.min_margin for s in subs)
    worst = min(subs, key=lambda s: s.min_margin)
    return VerificationReport("interactive_pair", seed, sum(s.samples_tested for s in subs) + N,
                              violations, margin, worst.witness,
                              details={"overlap": both, "uncovered": neither,
                                       "witnesses": witnesses,
                                       "precisely_invariant": [s.to_dict() for s in subs]})


# --------------------------------------------------------------------------
# fundamental sets


def _region_and_letters(rep, which):
    if which in (1, 2):
        return fundamental_region(rep, which), rep.factor_letters(which)
    if which == "full":
        return phi(rep), rep.letters
    raise ValueError(f"unknown group {which!r}")


def _nontrivial_after_shift(rep, which, word, n):
    """Is d^n * word nontrivial?"""
    if which in (1, 2):
        k = _d_exponent(rep, which, word)
        return k is None or k + n != 0
    shift = W.power(rep.boundary_word(1), n * rep.d_sign(1))
    return not normal_form(rep, W.multiply(shift, word)).is_trivial


def _reduce_step(rep, m, q):
    """One Ford-reduction step in factor m; returns (new lift, letters used) or None."""
    F = rep.fdata(m)
    plane = rep.plane(m)
    zeta = complex(chart_inverse(project_lifts(plane, q)))
    n = int(np.floor((zeta.real - F.unbounded_x0) / rep.r))
    q = apply_d_power(q, np.asarray(-n), rep.r)
    zeta -= n * rep.r
    best = None
    for s in F.sides:
        if abs(zeta - s.center) < s.radius:
            M = s.matrix
            img = (M[0, 0] * zeta + M[0, 1]) / (M[1, 0] * zeta + M[1, 1])
            if best is None or img.imag > best[0]:
                best = (img.imag, s)
    if best is None:
        return None
    s = best[1]
    return embed_matrix(s.matrix, plane) @ q, len(s.word)


def _cover(rep, region, which, q, L):
    """Bounded Ford reduction with d-shifts; (reached region, letters used)."""
    factors = (which,) if which in (1, 2) else (1, 2)
    used = 0
    while True:
        q = apply_d_power(q, -region.section_shift(q), rep.r)
        bad = [m for m in factors if not region.bounded_ok(q, (m,))]
        if not bad:
            return bool(region.contains(q)), used
        if used >= L:
            return False, used
        step = _reduce_step(rep, bad[0], q)
        if step is None:
            return False, used
        q, k = step
        q = q / np.abs(q).max()
        used += k


def check_fundamental_set(rep: AmalgamRep, which=1, L: int = 6, N: int = 1000,
                          seed: int = 0, max_undecided: float = 0.05) -> VerificationReport:
    """``which`` is 1 or 2 (Phi_m for Gamma_m) or 'full' (Phi for Gamma)."""
    rng = np.random.default_rng(seed)
    region, letters = _region_and_letters(rep, which)
    name = f"fundamental_set_{region.name}"
    # no two sampled points related by a nontrivial element
    P = sample_fundamental(rep, region, N, rng)
    words, mats = enumerate_rho(rep, L, letters)
    words, mats = words[1:], mats[1:]
    violations, witness = 0, None
    for a, b in _chunks(len(words), len(P)):
        img = _apply(mats[a:b], P)
        n = region.section_shift(img)
        img = apply_d_power(img, -n, rep.r)
        hit = region.contains(img)
        for wi, pi in zip(*np.nonzero(hit)):
            if _nontrivial_after_shift(rep, which, words[a + wi], -int(n[wi, pi])):
                violations += 1
                if witness is None:
                    witness = {"point": _point_dict(P[pi]), "word": W.format_word(words[a + wi]),
                               "d_power": -int(n[wi, pi])}
    # coverage: half ambient, half close to the planes where reduction is needed
    Q = np.concatenate([sample_box(rep, N - N // 2, rng, ambient_w_range(rep)),
                        sample_near_planes(rep, N // 2, rng, region.factors)])
    undecided, steps = 0, []
    for q in Q:
        ok, used = _cover(rep, region, which, q, L)
        if not ok:
            undecided += 1
        steps.append(used)
    # membership is boolean here, so there is no geometric margin to report
    return VerificationReport(name, seed, len(P) + len(Q), violations, float("nan"), witness, undecided,
                              max_undecided,
                              details={"words": len(words), "L": L, "equivalence_samples": len(P),
                                       "coverage_samples": len(Q),
                                       "mean_reduction_letters": float(np.mean(steps))})


# --------------------------------------------------------------------------
# faithfulness and parabolics


def scalar_distance(M):
    """min over cube roots w of max |M - w I| for det-1 matrices (stacked)."""
    eye = np.eye(3)
    return np.min([np.abs(M - w * eye).max(axis=(-2, -1)) for w in CUBE_ROOTS], axis=0)


def nonidentity_words(rep: AmalgamRep, L: int = 8, cap: int = 20_000, seed: int = 0,
                      tol: float = 1e-6) -> VerificationReport:
    """Nontrivial words of length <= L must have non-scalar images.

    Words are exhaustive up to the longest length that fits in ``cap``; the
    remaining budget is drawn at random from the longer lengths.
    """
    rng = np.random.default_rng(seed)
    rank = 2 * rep.genus
    full = 0
    while full < L and W.count_reduced(rank, full + 1) <= cap:
        full += 1
    words, mats = enumerate_rho(rep, full)
    dist = list(scalar_distance(mats))
    words = list(words)
    extra = cap - len(words)
    if full < L and extra > 0:
        lengths = rng.integers(full + 1, L + 1, extra)
        for n in lengths:
            w = W.random_reduced(rng, rep.letters, int(n))
            words.append(w)
            dist.append(float(scalar_distance(rep.rho_matrix(w))))
    violations, tested, best, witness, excluded = 0, 0, np.inf, None, 0
    for w, dd in zip(words, dist):
        if normal_form(rep, w).is_trivial:
            excluded += 1
            continue
        tested += 1
        if dd < best:
            best, witness = float(dd), {"word": W.format_word(w)}
        if dd < tol:
            violations += 1
    return VerificationReport("nonidentity_words", seed, tested, violations, best, witness,
                              details={"L": L, "exhaustive_length": full, "trivial_excluded": excluded})


@dataclass(frozen=True)
class CensusEntry:
    word: str
    conjugator: str | None
    d_power: int | None

    @property
    def resolved(self):
        return self.conjugator is not None and self.d_power not in (None, 0)


def _boundary_xyv(L):
    z, u, v = lifts_to_horo(L)
    return np.stack([z.real, z.imag, v], axis=-1)


def _fixed_point(M, tr):
    lam = tr / 3
    _, _, vh = np.linalg.svd(M - lam * np.eye(3))
    return vh[-1].conj()


def parabolic_census(rep: AmalgamRep, L: int = 6, seed: int = 0, match_tol: float = 1e-6):
    """Classify words of length <= L; every parabolic one must be a conjugate
    of a nonzero power of d by a word whose image of infinity is its fixed point."""
    words, mats = enumerate_rho(rep, L)
    tr = np.trace(mats, axis1=1, axis2=2)
    near = np.min([np.abs(tr - 3 * w) for w in CUBE_ROOTS], axis=0)
    norm = np.maximum(1.0, np.abs(mats).max(axis=(1, 2)))
    cand = np.nonzero(near <= 1e-6 * norm)[0]

    # orbit of infinity under the same words
    inf_img = mats[:, :, 1]
    finite = np.abs(inf_img[:, 2]) > 1e-12 * np.abs(inf_img).max(axis=1)
    fin_idx = np.nonzero(finite)[0]
    coords = _boundary_xyv(inf_img[fin_idx])
    tree = cKDTree(coords)
    stab = [i for i in range(len(words)) if not finite[i]]

    entries, unresolved, classified = [], 0, 0
    for i in cand:
        w = words[i]
        if normal_form(rep, w).is_trivial:
            continue
        g = rep.rho(w)
        classified += 1
        if classify(g).kind is not IsometryKind.PARABOLIC:
            continue
        xi = _fixed_point(g.matrix, np.trace(g.matrix))
        if abs(xi[2]) <= 1e-12 * np.abs(xi).max():
            hits = stab
        else:
            # a Jordan-block eigenvector is only good to ~sqrt(eps |M|); the
            # radius widens accordingly and the conjugation test below decides
            radius = match_tol * max(1.0, np.sqrt(np.abs(g.matrix).max()))
            hits = [fin_idx[j] for j in tree.query_ball_point(_boundary_xyv(xi), radius)]
        found = None
        for h in sorted(hits, key=lambda j: (len(words[j]), words[j])):
            conj = W.multiply(W.inverse(words[h]), w, words[h])
            K = rep.rho(conj)
            s = K.matrix[0, 2] / K.matrix[2, 2]
            k = int(round(s.real / rep.r))
            if k and K.equals(h_translation(k * rep.r), 1e-8):
                found = (words[h], k)
                break
        if found is None:
            unresolved += 1
            entries.append(CensusEntry(W.format_word(w), None, None))
        else:
            entries.append(CensusEntry(W.format_word(w), W.format_word(found[0]), found[1]))
    report = VerificationReport("parabolic_census", seed, len(words), unresolved, float("nan"),
                                next(({"word": e.word} for e in entries if not e.resolved), None),
                                details={"L": L, "parabolic": len(entries),
                                         "candidates": classified})
    return entries, report

