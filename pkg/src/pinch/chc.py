"""Hermitian linear algebra on C^3 and the Siegel domain model of the
complex hyperbolic plane.

Points are handled in three interchangeable forms:

* ``HoroCoord`` -- horospherical coordinates ``(z, u, v)`` with ``u >= 0``;
* ``SiegelPoint`` -- affine Siegel coordinates ``(w1, w2)``;
* ``ProjPoint`` -- a homogeneous lift in C^3.

The Hermitian form is

    <a, b> = a1 conj(b1) - a2 conj(b3) - a3 conj(b2)

so that the lift ``(w1, w2, 1)`` is negative exactly on the Siegel domain
``|w1|^2 < w2 + conj(w2)``.  The point at infinity has lift ``(0, 1, 0)``.

Most functions also accept stacked arrays (lifts of shape ``(..., 3)``)
so that orbit computations can be vectorized.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

J = np.array([[1, 0, 0], [0, 0, -1], [0, -1, 0]], dtype=complex)

CUBE_ROOTS = np.exp(2j * np.pi * np.arange(3) / 3)

INTERIOR_TOL = 1e-10


class InfinityError(ValueError):
    """Raised when the point at infinity is asked for affine coordinates."""


class DomainError(ValueError):
    """Raised when an operation needs an interior point and gets another."""


# --------------------------------------------------------------------------
# the form


def herm(a, b):
    """Hermitian form of signature (2,1); vectorized over the last axis."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return (a[..., 0] * np.conj(b[..., 0])
            - a[..., 1] * np.conj(b[..., 2])
            - a[..., 2] * np.conj(b[..., 1]))


# --------------------------------------------------------------------------
# point types


@dataclass(frozen=True)
class HoroCoord:
    z: complex
    u: float
    v: float

    @property
    def x(self):
        return np.real(self.z)

    @property
    def y(self):
        return np.imag(self.z)


@dataclass(frozen=True)
class SiegelPoint:
    w1: complex
    w2: complex

    def is_interior(self, tol=INTERIOR_TOL):
        return abs(self.w1) ** 2 < 2 * np.real(self.w2) - tol

    def is_boundary(self, tol=INTERIOR_TOL):
        return abs(abs(self.w1) ** 2 - 2 * np.real(self.w2)) <= tol


class _Infinity:
    """The distinguished boundary point."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"


INFINITY = _Infinity()


@dataclass(frozen=True, eq=False)
class ProjPoint:
    """Projective class of a nonzero vector of C^3."""

    lift: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.lift, dtype=complex).reshape(3)
        if not np.any(vec):
            raise ValueError("zero vector is not a projective point")
        object.__setattr__(self, "lift", vec)

    def norm2(self):
        return float(np.real(herm(self.lift, self.lift)))

    def normalized_norm2(self):
        """Self-pairing of the unit-Euclidean-norm representative."""
        return self.norm2() / float(np.vdot(self.lift, self.lift).real)

    def is_interior(self, tol=INTERIOR_TOL):
        return self.normalized_norm2() < -tol

    def is_boundary(self, tol=INTERIOR_TOL):
        return abs(self.normalized_norm2()) <= tol

    def is_infinity(self, tol=1e-12):
        v = self.lift / np.linalg.norm(self.lift)
        return abs(v[2]) <= tol and abs(v[0]) <= tol

    def same_point(self, other, tol=1e-10):
        a = self.lift / np.linalg.norm(self.lift)
        b = other.lift / np.linalg.norm(other.lift)
        return abs(abs(np.vdot(a, b)) - 1.0) <= tol

    def __eq__(self, other):
        return isinstance(other, ProjPoint) and self.same_point(other)

    __hash__ = None


# --------------------------------------------------------------------------
# coordinate changes


def horo_to_siegel(p: HoroCoord) -> SiegelPoint:
    if p is INFINITY:
        raise InfinityError("infinity has no Siegel coordinates")
    z = complex(p.z)
    w2 = (p.u + abs(z) ** 2 - 1j * p.v) / 2
    return SiegelPoint(z, w2)


def siegel_to_horo(q: SiegelPoint) -> HoroCoord:
    if q is INFINITY:
        raise InfinityError("infinity has no horospherical coordinates")
    s = 2 * np.conj(q.w2) - abs(q.w1) ** 2
    return HoroCoord(complex(q.w1), float(s.real), float(s.imag))


def lift(p) -> ProjPoint:
    """Homogeneous lift of a HoroCoord, SiegelPoint or INFINITY."""
    if p is INFINITY:
        return ProjPoint(np.array([0, 1, 0], dtype=complex))
    if isinstance(p, HoroCoord):
        p = horo_to_siegel(p)
    return ProjPoint(np.array([p.w1, p.w2, 1.0], dtype=complex))


def to_siegel(p: ProjPoint) -> SiegelPoint:
    v = p.lift
    if abs(v[2]) <= 1e-14 * np.linalg.norm(v):
        raise InfinityError("point at infinity")
    return SiegelPoint(complex(v[0] / v[2]), complex(v[1] / v[2]))


def to_horo(p: ProjPoint) -> HoroCoord:
    return siegel_to_horo(to_siegel(p))


# array versions; lifts have shape (..., 3)


def horo_lifts(z, u, v):
    z = np.asarray(z, dtype=complex)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    z, u, v = np.broadcast_arrays(z, u, v)
    out = np.empty(z.shape + (3,), dtype=complex)
    out[..., 0] = z
    out[..., 1] = (u + np.abs(z) ** 2 - 1j * v) / 2
    out[..., 2] = 1.0
    return out


def lifts_to_horo(L):
    """Return ``(z, u, v)`` arrays from stacked finite lifts."""
    L = np.asarray(L, dtype=complex)
    w1 = L[..., 0] / L[..., 2]
    w2 = L[..., 1] / L[..., 2]
    s = 2 * np.conj(w2) - np.abs(w1) ** 2
    return w1, s.real, s.imag


# --------------------------------------------------------------------------
# distance


def cosh2_half_dist(a, b):
    ab = herm(a, b)
    return np.real(ab * np.conj(ab) / (herm(a, a) * herm(b, b)))


def dist(p, q) -> float:
    """Bergman distance; totally real planes have curvature -1/4 and
    complex geodesics curvature -1 in this normalization."""
    a = p.lift if isinstance(p, ProjPoint) else np.asarray(p, dtype=complex)
    b = q.lift if isinstance(q, ProjPoint) else np.asarray(q, dtype=complex)
    na = np.real(herm(a, a)) / np.real(np.sum(a * np.conj(a), axis=-1))
    nb = np.real(herm(b, b)) / np.real(np.sum(b * np.conj(b), axis=-1))
    if np.any(na >= -INTERIOR_TOL) or np.any(nb >= -INTERIOR_TOL):
        raise DomainError("distance needs interior points")
    c = np.maximum(cosh2_half_dist(a, b), 1.0)
    d = 2 * np.arccosh(np.sqrt(c))
    return float(d) if np.ndim(d) == 0 else d


# --------------------------------------------------------------------------
# isometries


class IsometryKind(enum.Enum):
    IDENTITY = "Identity"
    ELLIPTIC = "Elliptic"
    PARABOLIC = "Parabolic"
    LOXODROMIC = "Loxodromic"


@dataclass(frozen=True)
class Classification:
    kind: IsometryKind
    trace: complex
    discriminant: float


def normalize_det(M):
    """Scale a (stack of) matrices into SU(2,1) by a cube root of det."""
    M = np.asarray(M, dtype=complex)
    det = np.linalg.det(M)
    return M / (det ** (1 / 3))[..., None, None]


def unitarity_residual(M) -> float:
    """max |M* J M - J|."""
    M = np.asarray(M, dtype=complex)
    return float(np.max(np.abs(M.conj().T @ J @ M - J)))


def scaled_unitarity_residual(M) -> float:
    """Residual of M* J M = J relative to the size of M*M.

    The absolute residual of a floating point matrix with entries of size s
    cannot be smaller than about eps * s^2, so this is the quantity that can
    be held to a fixed tolerance across the whole construction.
    """
    M = np.asarray(M, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(M))) ** 2)
    return unitarity_residual(M) / scale


def discriminant(trace):
    """Goldman's f(tr) = |t|^4 - 8 Re(t^3) + 18 |t|^2 - 27."""
    t = np.asarray(trace, dtype=complex)
    a2 = np.abs(t) ** 2
    return a2 ** 2 - 8 * np.real(t ** 3) + 18 * a2 - 27


def distance_to_scalar(M) -> float:
    """min over cube roots w of max|M - w I| for det-normalized M."""
    M = normalize_det(M)
    eye = np.eye(3)
    return float(min(np.max(np.abs(M - w * eye)) for w in CUBE_ROOTS))


def _classify_matrix(M, tol, det_one=False):
    if not det_one:
        M = normalize_det(M)
    tr = complex(np.trace(M))
    f = float(discriminant(tr))
    if f > tol:
        return Classification(IsometryKind.LOXODROMIC, tr, f)
    scale = max(1.0, float(np.linalg.norm(M, 2)))
    if min(np.abs(M - w * np.eye(3)).max() for w in CUBE_ROOTS) <= 1e-8 * scale:
        return Classification(IsometryKind.IDENTITY, tr, f)
    if f < -tol:
        return Classification(IsometryKind.ELLIPTIC, tr, f)
    # repeated eigenvalue: decide by geometric multiplicity
    ev = np.linalg.eigvals(M)
    gaps = [(abs(ev[i] - ev[j]), i, j) for i in range(3) for j in range(i + 1, 3)]
    gap, i, j = min(gaps)
    if gap > 1e-3 * scale:
        kind = IsometryKind.LOXODROMIC if f > 0 else IsometryKind.ELLIPTIC
        return Classification(kind, tr, f)
    k = 3 - i - j
    if abs(ev[k] - ev[i]) <= 1e-3 * scale:
        lam, alg = ev.mean(), 3
    else:
        lam, alg = (ev[i] + ev[j]) / 2, 2
    sv = np.linalg.svd(M - lam * np.eye(3), compute_uv=False)
    geo = int(np.sum(sv <= 1e-6 * scale))
    if geo < alg:
        return Classification(IsometryKind.PARABOLIC, tr, f)
    return Classification(IsometryKind.ELLIPTIC, tr, f)


@dataclass(frozen=True, eq=False)
class Isometry:
    """Element of PU(2,1), stored as a det-1 matrix preserving J."""

    matrix: np.ndarray
    _kind: dict = field(default_factory=dict, repr=False, compare=False)
    det_one: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex).reshape(3, 3)
        # a numerical det of a matrix with large entries is useless, so
        # products of det-1 factors are passed through untouched
        object.__setattr__(self, "matrix", M if self.det_one else normalize_det(M))

    @classmethod
    def identity(cls):
        return cls(np.eye(3, dtype=complex))

    def __matmul__(self, other):
        if isinstance(other, Isometry):
            return Isometry(self.matrix @ other.matrix, det_one=self.det_one and other.det_one)
        if isinstance(other, ProjPoint):
            return apply(self, other)
        return NotImplemented

    def inverse(self):
        # M^-1 = J M* J for M preserving J
        return Isometry(J @ self.matrix.conj().T @ J, det_one=self.det_one)

    def residual(self):
        return unitarity_residual(self.matrix)

    def equals(self, other, tol=1e-10):
        """Equality in PU(2,1), i.e. modulo the scalar cube roots of unity."""
        # compared entrywise: A B^-1 loses all precision once entries are large
        A, B = self.matrix, other.matrix
        scale = max(1.0, np.abs(B).max())
        return min(np.abs(A - w * B).max() for w in CUBE_ROOTS) <= tol * scale

    def classify(self, tol=1e-9):
        if tol not in self._kind:
            self._kind[tol] = _classify_matrix(self.matrix, tol, self.det_one)
        return self._kind[tol]

    @property
    def kind(self):
        return self.classify().kind


def apply(g: Isometry, p: ProjPoint) -> ProjPoint:
    return ProjPoint(g.matrix @ p.lift)


def classify(g: Isometry, tol: float = 1e-9) -> Classification:
    return g.classify(tol)


def apply_many(M, L):
    """Apply a matrix (3,3) or a stack (W,3,3) to lifts of shape (N,3).

    Returns shape (N,3) or (W,N,3).
    """
    M = np.asarray(M)
    if M.ndim == 2:
        return L @ M.T
    return np.einsum("wij,nj->wni", M, L)


def random_isometry(rng, scale=1.0) -> Isometry:
    """A random element of SU(2,1) near the identity (exp of a J-skew matrix)."""
    from scipy.linalg import expm

    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    # X is in su(2,1) iff X* J + J X = 0, i.e. JX is skew-Hermitian
    S = J @ A
    S = (S - S.conj().T) / 2
    X = J @ S
    X -= np.trace(X) / 3 * np.eye(3)
    return Isometry(expm(scale * X))
