"""The Heisenberg group at infinity and the quotient by horizontal translations.

The quotient of ``Y = H^2_C u dH^2_C - {inf}`` by ``<H_r>`` is charted by
``(y, w, u)`` with ``w = v + 2xy``; the plane ``P = {x = 0}`` is a global
section of that quotient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chc import HoroCoord, Isometry


@dataclass(frozen=True)
class HeisElem:
    z: complex = 0j
    v: float = 0.0

    def __mul__(self, other):
        return heis_mul(self, other)

    def inverse(self):
        return HeisElem(-self.z, -self.v)


def heis_mul(a: HeisElem, b: HeisElem) -> HeisElem:
    return HeisElem(a.z + b.z, a.v + b.v + 2 * np.imag(a.z * np.conj(b.z)))


def heis_matrix(z, v):
    """Matrix of the Heisenberg translation (z, v) acting on (w1, w2, 1).

    The action in horospherical coordinates is the left group law on each
    horosphere: (z', u, v') = (z, v) * (z', v') with u untouched.
    """
    z = complex(z)
    return np.array([[1, 0, z],
                     [np.conj(z), 1, (abs(z) ** 2 - 1j * v) / 2],
                     [0, 0, 1]], dtype=complex)


def heis_translation(h: HeisElem) -> Isometry:
    return Isometry(heis_matrix(h.z, h.v))


def h_translation(r: float) -> Isometry:
    """H_r(x, y, u, v) = (x + r, y, u, v - 2ry)."""
    return Isometry(heis_matrix(r, 0.0))


def v_translation(t: float) -> Isometry:
    """V_t(x, y, u, v) = (x, y, u, v + t)."""
    return Isometry(heis_matrix(0.0, t))


def h_matrix(r):
    return heis_matrix(r, 0.0)


def v_matrix(t):
    return heis_matrix(0.0, t)


# --------------------------------------------------------------------------
# quotient by <H_r>


@dataclass(frozen=True)
class QuotientCoord:
    y: float
    w: float
    u: float


def quotient_w(x, y, v):
    """The <H_r>-invariant coordinate w = v + 2xy (vectorized)."""
    return v + 2 * x * y


def quotient_map(p: HoroCoord) -> QuotientCoord:
    if p.u < 0:
        raise ValueError("point is not in Y (u < 0)")
    x, y = float(np.real(p.z)), float(np.imag(p.z))
    return QuotientCoord(y, float(quotient_w(x, y, p.v)), float(p.u))


def section_P(q: QuotientCoord) -> HoroCoord:
    return HoroCoord(complex(0.0, q.y), q.u, q.w)


def lift_quotient(q: QuotientCoord, x: float) -> HoroCoord:
    """The point of the H_r-orbit over ``q`` with first coordinate ``x``."""
    return HoroCoord(complex(x, q.y), q.u, q.w - 2 * x * q.y)
