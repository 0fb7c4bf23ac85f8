"""Totally real planes Sigma_v = {(x, 0, u, v)} and projections onto them.

``Sigma_0`` is the set of real points of the Siegel domain, so the
reflection through it is plain complex conjugation of the lift; every
other ``Sigma_v`` is its image under the vertical translation ``V_v``.
The orthogonal projection onto a plane is the midpoint of the geodesic
from ``p`` to its reflection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chc import Isometry, ProjPoint, herm, horo_lifts
from .heisenberg import v_matrix

# lift of the base point (z=0, u=1, v=0) and an orthonormal frame of its
# orthogonal complement; all three are real vectors
_O = np.array([0, 0.5, 1], dtype=complex)
_EA = np.array([1, 0, 0], dtype=complex)
_EB = np.array([0, -0.5, 1], dtype=complex)

DEFAULT_T = 40.0


class DegenerateProjection(ArithmeticError):
    pass


@dataclass(frozen=True)
class TotallyRealPlane:
    v_offset: float = 0.0

    def contains(self, z, v, tol=1e-10):
        return np.abs(np.imag(z)) <= tol and np.abs(v - self.v_offset) <= tol


@dataclass(frozen=True, eq=False)
class AntiholInvolution:
    """p -> matrix @ conj(p)."""

    matrix: np.ndarray

    def __call__(self, L):
        if isinstance(L, ProjPoint):
            return ProjPoint(self.matrix @ np.conj(L.lift))
        return np.conj(L) @ self.matrix.T


def involution(plane: TotallyRealPlane) -> AntiholInvolution:
    # V_v conj V_{-v} conj = V_v V_v since conj(V_{-v}) = V_v
    return AntiholInvolution(v_matrix(2 * plane.v_offset))


def _midpoints(L, iota):
    """Midpoint of each lift and its reflection; L has shape (..., 3).

    The reflection preserves the self-pairing, so only a phase is needed to
    put the two lifts in position for the sum to be the midpoint.
    """
    R = iota(L)
    a = herm(L, R)
    mag = np.abs(a)
    if np.any(mag == 0):
        raise DegenerateProjection("cannot phase-align a lift with its reflection")
    c = -a / mag
    return L + c[..., None] * R


def project_lifts(plane: TotallyRealPlane, L):
    return _midpoints(np.asarray(L, dtype=complex), involution(plane))


def project(plane: TotallyRealPlane, p: ProjPoint) -> ProjPoint:
    if not p.is_interior():
        raise ValueError("project needs an interior point")
    return ProjPoint(project_lifts(plane, p.lift))


def project_boundary(plane: TotallyRealPlane, xi: ProjPoint, T: float = DEFAULT_T,
                     base: ProjPoint | None = None, tol: float = 1e-12) -> ProjPoint:
    """Boundary extension of the projection.

    Approximated by projecting the point at parameter ``T`` on the ray from
    ``base`` towards ``xi``; points of the boundary circle of the plane are
    returned unchanged.
    """
    iota = involution(plane)
    v = xi.lift / np.linalg.norm(xi.lift)
    if abs(herm(v, iota(v))) <= tol:
        return ProjPoint(v)
    o = (base.lift if base is not None else embed_lifts(_O, plane))
    o = o / np.sqrt(-herm(o, o).real)
    phase = herm(v, o)
    v = v * (-np.conj(phase) / abs(phase))  # <v, o> real negative
    # o cosh(s) + xi-direction: rescaled by e^{-s} to stay bounded
    p = v + np.exp(-T) * o
    return ProjPoint(_midpoints(p, iota))


def embed_lifts(L, plane: TotallyRealPlane):
    """Translate lifts from Sigma_0 to ``plane``."""
    return np.asarray(L, dtype=complex) @ v_matrix(plane.v_offset).T


# --------------------------------------------------------------------------
# SL(2,R) -> SU(2,1)


def sym2(m):
    """Real 3x3 matrix of X -> m X m^T on X = [[2 w2, w1], [w1, w3]]."""
    m = np.asarray(m, dtype=float)
    out = np.empty((3, 3))
    basis = np.eye(3)
    for k in range(3):
        w1, w2, w3 = basis[k]
        X = np.array([[2 * w2, w1], [w1, w3]])
        Y = m @ X @ m.T
        out[:, k] = [Y[0, 1], Y[0, 0] / 2, Y[1, 1]]
    return out


def embed_matrix(m, plane: TotallyRealPlane | float = 0.0):
    v = plane.v_offset if isinstance(plane, TotallyRealPlane) else float(plane)
    M = sym2(m).astype(complex)
    if v == 0:
        return M
    return v_matrix(v) @ M @ v_matrix(-v)


def embed_so21(m, plane: TotallyRealPlane = TotallyRealPlane()) -> Isometry:
    """Isometry stabilizing ``plane`` that acts on it as the Mobius map ``m``
    under the chart ``xi + i eta -> (z=xi, u=eta^2, v=v_offset)``."""
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2) or abs(np.linalg.det(m) - 1) > 1e-12:
        raise ValueError("embed_so21 needs a 2x2 real matrix of determinant 1")
    # det sym2(m) = det(m)^3 = 1; a numerical det would only add noise
    return Isometry(embed_matrix(m, plane), det_one=True)


def chart(zeta, plane: TotallyRealPlane = TotallyRealPlane()):
    """Lift(s) of the point(s) of ``plane`` corresponding to upper half-plane ``zeta``."""
    zeta = np.asarray(zeta, dtype=complex)
    return horo_lifts(zeta.real, zeta.imag ** 2, plane.v_offset)


def chart_inverse(L):
    """Upper half-plane coordinate of lifts lying on some Sigma_v."""
    L = np.asarray(L, dtype=complex)
    w1 = L[..., 0] / L[..., 2]
    w2 = L[..., 1] / L[..., 2]
    u = 2 * w2.real - np.abs(w1) ** 2
    return w1.real + 1j * np.sqrt(np.maximum(u, 0.0))


# --------------------------------------------------------------------------
# fibers of the projection


def fiber_lifts(zeta, rho, theta, plane: TotallyRealPlane = TotallyRealPlane()):
    """Points of the (closed) fiber over ``zeta``, Klein-disk parametrized.

    ``rho`` in [0, 1] (1 is the boundary circle of the fiber), ``theta`` an
    angle.  Arrays broadcast.
    """
    zeta, rho, theta = np.broadcast_arrays(np.asarray(zeta, dtype=complex),
                                           np.asarray(rho, dtype=float),
                                           np.asarray(theta, dtype=float))
    # fiber over the base point i is the image of Sigma_0 under the unitary
    # map fixing o and multiplying its orthogonal complement by i
    base = (_O + 1j * (rho * np.cos(theta))[..., None] * _EA
            + 1j * (rho * np.sin(theta))[..., None] * _EB)
    xi, eta = zeta.real, zeta.imag
    s = np.sqrt(eta)
    # upper triangular g with g(i) = xi + i eta, applied as sym2(g)
    out = np.empty_like(base)
    # sym2 of [[s, xi/s], [0, 1/s]] in closed form
    a, b, d = s, xi / s, 1 / s
    w1, w2, w3 = base[..., 0], base[..., 1], base[..., 2]
    out[..., 0] = a * d * w1 + b * d * w3
    out[..., 1] = a * a * w2 + a * b * w1 + b * b * w3 / 2
    out[..., 2] = d * d * w3
    return embed_lifts(out, plane)


FIBER_W_HALFWIDTH = 9 / (4 * np.sqrt(3))
"""max |w - v| over the closed fiber above the point i of Sigma_v."""
