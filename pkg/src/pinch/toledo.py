"""Kahler form of the Siegel domain, surface integration and the Toledo
invariant of the amalgam.

The form is ``lam * (i/2) d d-bar log(-<s, s>)`` for the holomorphic lift
``s(w1, w2) = (w1, w2, 1)``; its complex Hessian is taken by central finite
differences of the potential.  On tangent vectors ``X, Y`` in Siegel
coordinates this gives ``omega(X, Y) = -lam * Im(X^T H conj(Y))``.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .amalgam import AmalgamRep
from .chc import Isometry, lifts_to_horo

log = logging.getLogger(__name__)

FD_STEP = 1e-3
LAMBDA_CANDIDATES = (1.0, -1.0, 2.0, -2.0, 4.0, -4.0)


class CalibrationError(RuntimeError):
    pass


class MeshError(ValueError):
    pass


def potential(w1, w2):
    """log(-<s, s>) = log(2 Re w2 - |w1|^2), i.e. log u."""
    return np.log(2 * np.real(w2) - np.abs(w1) ** 2)


def _real_hessian(base, h):
    eye = np.eye(4) * h

    def f(x):
        return potential(x[..., 0] + 1j * x[..., 1], x[..., 2] + 1j * x[..., 3])

    f0 = f(base)
    D = np.empty(base.shape[:-1] + (4, 4))
    for i in range(4):
        D[..., i, i] = (f(base + eye[i]) - 2 * f0 + f(base - eye[i])) / h ** 2
        for j in range(i + 1, 4):
            D[..., i, j] = D[..., j, i] = (
                f(base + eye[i] + eye[j]) - f(base + eye[i] - eye[j])
                - f(base - eye[i] + eye[j]) + f(base - eye[i] - eye[j])) / (4 * h * h)
    return D


def complex_hessian(w1, w2, h=FD_STEP, extrapolate=True):
    """H[..., j, k] = d_j dbar_k of the potential, shape (..., 2, 2).

    Central differences with step ``h``; with ``extrapolate`` the h and 2h
    stencils are combined to cancel the O(h^2) term.
    """
    w1, w2 = np.broadcast_arrays(np.asarray(w1, dtype=complex), np.asarray(w2, dtype=complex))
    base = np.stack([w1.real, w1.imag, w2.real, w2.imag], axis=-1)  # (a1, b1, a2, b2)
    D = _real_hessian(base, h)
    if extrapolate:
        D = (4 * D - _real_hessian(base, 2 * h)) / 3
    H = np.empty(base.shape[:-1] + (2, 2), dtype=complex)
    for j in range(2):
        for k in range(2):
            aj, bj, ak, bk = 2 * j, 2 * j + 1, 2 * k, 2 * k + 1
            H[..., j, k] = (D[..., aj, ak] + D[..., bj, bk]
                            + 1j * (D[..., aj, bk] - D[..., bj, ak])) / 4
    return H


@dataclass(frozen=True)
class KahlerForm:
    lam: float
    h: float = FD_STEP
    extrapolate: bool = True

    def __call__(self, w, X, Y):
        """omega at Siegel points ``w`` (..., 2) on tangents ``X, Y`` (..., 2)."""
        H = complex_hessian(w[..., 0], w[..., 1], self.h, self.extrapolate)
        val = np.einsum("...j,...jk,...k->...", X, H, np.conj(Y))
        return -self.lam * val.imag


# --------------------------------------------------------------------------
# meshes


def _siegel(z, u, v):
    z = np.asarray(z, dtype=complex)
    return np.stack([z, (u + np.abs(z) ** 2 - 1j * v) / 2], axis=-1)


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """A parametrized surface (s, theta) -> horospherical (z, u, v) on a
    rectangle, triangulated by splitting each cell along a diagonal."""

    fn: Callable
    s_range: tuple
    theta_range: tuple
    n_s: int
    n_theta: int
    transform: np.ndarray | None = field(default=None, repr=False)

    def siegel(self, s, theta):
        z, u, v = self.fn(s, theta)
        W = _siegel(z, u, v)
        if self.transform is None:
            return W
        L = np.concatenate([W, np.ones(W.shape[:-1] + (1,), dtype=complex)], axis=-1)
        L = L @ self.transform.T
        return L[..., :2] / L[..., 2:3]

    def refined(self, k=2):
        return SurfaceMesh(self.fn, self.s_range, self.theta_range, self.n_s * k,
                           self.n_theta * k, self.transform)

    def flipped(self):
        """Same surface with the opposite orientation."""
        def fn(t, s):
            return self.fn(s, t)
        return SurfaceMesh(fn, self.theta_range, self.s_range, self.n_theta, self.n_s,
                           self.transform)

    def moved(self, g: Isometry):
        M = g.matrix if self.transform is None else g.matrix @ self.transform
        return SurfaceMesh(self.fn, self.s_range, self.theta_range, self.n_s, self.n_theta, M)

    def centroids(self):
        """Triangle centroids (s, theta) and the common parameter area."""
        s0, s1 = self.s_range
        t0, t1 = self.theta_range
        ds, dt = (s1 - s0) / self.n_s, (t1 - t0) / self.n_theta
        S, T = np.meshgrid(s0 + ds * np.arange(self.n_s), t0 + dt * np.arange(self.n_theta),
                           indexing="ij")
        cs = np.stack([S + ds / 3, S + 2 * ds / 3], axis=-1)
        ct = np.stack([T + dt / 3, T + 2 * dt / 3], axis=-1)
        return cs, ct, ds * dt / 2


def _tangents(mesh, s, t):
    hs = 1e-5 * (mesh.s_range[1] - mesh.s_range[0])
    ht = 1e-5 * (mesh.theta_range[1] - mesh.theta_range[0])
    P = mesh.siegel(s, t)
    Xs = (mesh.siegel(s + hs, t) - mesh.siegel(s - hs, t)) / (2 * hs)
    Xt = (mesh.siegel(s, t + ht) - mesh.siegel(s, t - ht)) / (2 * ht)
    return P, Xs, Xt


def integrand(form: KahlerForm, mesh: SurfaceMesh):
    """omega(dF/ds, dF/dtheta) at the triangle centroids, shape (n_s, n_theta, 2)."""
    cs, ct, _ = mesh.centroids()
    P, Xs, Xt = _tangents(mesh, cs, ct)
    # R^4 Gram determinant of the tangent pair
    a = np.sum(np.abs(Xs) ** 2, axis=-1)
    b = np.sum(np.abs(Xt) ** 2, axis=-1)
    c = np.sum((Xs * np.conj(Xt)).real, axis=-1)
    gram = a * b - c * c
    if np.any(gram <= 1e-24 * np.maximum(a * b, 1e-300)):
        raise MeshError("degenerate triangle in mesh")
    return form(P, Xs, Xt)


def _pairwise_sum(x):
    x = np.ravel(x)
    while len(x) > 1:
        if len(x) % 2:
            x = np.append(x, 0.0)
        x = x[0::2] + x[1::2]
    return float(x[0]) if len(x) else 0.0


def kahler_area(form: KahlerForm, mesh: SurfaceMesh) -> float:
    """Centroid-rule integral of the form over the mesh (fixed summation order)."""
    _, _, w = mesh.centroids()
    return _pairwise_sum(integrand(form, mesh)) * w


@dataclass(frozen=True)
class AreaEstimate:
    value: float
    error: float
    coarse: float
    fine: float


def kahler_area_richardson(form: KahlerForm, mesh: SurfaceMesh) -> AreaEstimate:
    """Second-order Richardson extrapolation across a resolution doubling.

    The error bar adds the finite-difference sensitivity of the Hessian
    (step h vs 2h) to the extrapolation correction.
    """
    A = kahler_area(form, mesh)
    B = kahler_area(form, mesh.refined(2))
    R = B + (B - A) / 3
    A2 = kahler_area(KahlerForm(form.lam, 2 * form.h, form.extrapolate), mesh)
    fd = abs(A2 - A) / 3
    return AreaEstimate(R, abs(B - A) / 3 + fd, A, B)


# --------------------------------------------------------------------------
# calibration


def geodesic_disk(R=1.0, n_rho=64, n_theta=64):
    """Disk of radius R about (0, 1/2) in the complex geodesic {w1 = 0}."""
    def fn(rho, theta):
        zeta = np.tanh(rho / 2) * np.exp(1j * theta)
        w2 = 0.5 * (1 + zeta) / (1 - zeta)
        z = np.zeros_like(w2)
        return z, 2 * w2.real, -2 * w2.imag
    return SurfaceMesh(fn, (0.0, R), (0.0, 2 * np.pi), n_rho, n_theta)


def totally_real_disk(R=1.0, n_rho=64, n_theta=64, v=0.0):
    """Disk of radius R in the totally real plane Sigma_v, charted by the upper half-plane."""
    def fn(rho, theta):
        zeta = np.tanh(rho / 2) * np.exp(1j * theta)
        xi = 1j * (1 + zeta) / (1 - zeta)  # unit disk -> upper half-plane, 0 -> i
        return xi.real + 0j, xi.imag ** 2, np.full_like(xi.real, v)
    return SurfaceMesh(fn, (0.0, R), (0.0, 2 * np.pi), n_rho, n_theta)


def disk_area(R):
    return 2 * np.pi * (np.cosh(R) - 1)


def calibrate(R=1.0, n=64, rtol=1e-3) -> KahlerForm:
    """Pick the constant so a complex geodesic disk has its hyperbolic area."""
    target = disk_area(R)
    mesh = geodesic_disk(R, n, n)
    for lam in LAMBDA_CANDIDATES:
        form = KahlerForm(lam)
        est = kahler_area_richardson(form, mesh).value
        if est > 0 and abs(est - target) <= rtol * target:
            log.info("calibrated lambda = %g (area %.6f vs %.6f)", lam, est, target)
            return form
    raise CalibrationError("no candidate constant reproduces the disk area")


# --------------------------------------------------------------------------
# Toledo invariant


def annulus_mesh(rep: AmalgamRep, n_s=64, n_theta=8, theta_range=None) -> SurfaceMesh:
    """The annulus: the d-orbit of the section's curve over one period."""
    if rep.section is None:
        raise ValueError("section not built")
    sec = rep.section
    return SurfaceMesh(sec.annulus_point, (0.0, 1.0), theta_range or (0.0, rep.r), n_s, n_theta)


@dataclass
class ToledoResult:
    tau: float
    error: float
    area: float
    abs_mass: float
    per_piece: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {"tau": self.tau, "error": self.error, "area": self.area,
                "abs_mass": self.abs_mass, "per_piece": list(self.per_piece),
                "diagnostics": self.diagnostics}


def toledo_invariant(rep: AmalgamRep, resolution=(64, 8), form: KahlerForm | None = None
                     ) -> ToledoResult:
    """tau = (1/2 pi) * integral of the form over the annulus.

    The two totally real pieces of the surface carry no area and are not meshed.
    """
    form = form or calibrate()
    mesh = annulus_mesh(rep, *resolution)
    est = kahler_area_richardson(form, mesh)
    # the annulus is H_a-invariant, so the half-period translate has the same
    # integral; their difference measures floating-point noise
    half = rep.r / 2
    shifted = annulus_mesh(rep, *resolution, theta_range=(half, rep.r + half))
    noise = abs(kahler_area(form, shifted) - est.coarse)
    _, _, w = mesh.refined(2).centroids()
    mass = float(np.sum(np.abs(integrand(form, mesh.refined(2)))) * w)
    err = est.error + noise
    return ToledoResult(est.value / (2 * np.pi), err / (2 * np.pi), est.value, mass,
                        diagnostics={"coarse": est.coarse, "fine": est.fine,
                                     "richardson_error": est.error, "noise": noise,
                                     "resolution": list(resolution), "lambda": form.lam})


@dataclass
class SubdivisionResult:
    pieces: list
    total: float
    abs_mass: float

    @property
    def spread(self):
        """Largest pairwise difference relative to the per-piece absolute mass."""
        p = np.asarray(self.pieces)
        scale = max(self.abs_mass / len(p), 1e-300)
        return float((p.max() - p.min()) / scale)


def subdivision_test(rep: AmalgamRep, n: int = 7, resolution=(64, 8),
                     form: KahlerForm | None = None) -> SubdivisionResult:
    """Integrals over the pieces between consecutive translates by H_{r/n}."""
    if n < 2:
        raise ValueError("n must be >= 2")
    form = form or calibrate()
    step = rep.r / n
    pieces, mass = [], 0.0
    n_t = max(1, resolution[1] // n) if resolution[1] >= n else resolution[1]
    for i in range(n):
        mesh = annulus_mesh(rep, resolution[0], n_t, (i * step, (i + 1) * step))
        vals = integrand(form, mesh)
        _, _, w = mesh.centroids()
        pieces.append(_pairwise_sum(vals) * w)
        mass += float(np.sum(np.abs(vals)) * w)
    return SubdivisionResult(pieces, float(sum(pieces)), mass)


def export_pieces_csv(path, result: SubdivisionResult, error: float = float("nan")):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["piece", "integral", "error"])
        for i, p in enumerate(result.pieces):
            wr.writerow([i, repr(float(p)), repr(float(error))])


def horo_mesh_points(mesh: SurfaceMesh):
    """Horospherical coordinates of the mesh centroids (for inspection)."""
    cs, ct, _ = mesh.centroids()
    W = mesh.siegel(cs, ct)
    L = np.concatenate([W, np.ones(W.shape[:-1] + (1,), dtype=complex)], axis=-1)
    return lifts_to_horo(L)
