import numpy as np
import pytest
from scipy.linalg import expm
from hypothesis import given, settings
from hypothesis import strategies as st

from pinch.chc import (INFINITY, HoroCoord, Isometry, ProjPoint, dist, herm, horo_lifts, lift,
                       to_horo, unitarity_residual)
from pinch.heisenberg import h_translation
from pinch.totally_real import (TotallyRealPlane, chart, chart_inverse, embed_matrix, embed_so21,
                                fiber_lifts, involution, project, project_boundary,
                                project_lifts)


def random_sl2(rng, scale=1.0):
    """exp of a random traceless matrix: entries stay O(e^scale)."""
    a, b, c = rng.normal(size=3) * scale
    return expm(np.array([[a, b], [c, -a]]))


def random_interior(rng, n):
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    return horo_lifts(z, 10 ** rng.uniform(-1, 1, n), rng.normal(size=n))


def test_involution_through_sigma0_is_conjugation():
    p = ProjPoint(np.array([1j, 1, 0]))
    assert np.allclose(involution(TotallyRealPlane())(p).lift, [-1j, 1, 0])


def test_projection_worked_value():
    q = to_horo(project(TotallyRealPlane(), lift(HoroCoord(1j, 1, 0))))
    assert np.isclose(q.z, 0) and np.isclose(q.u, 2) and np.isclose(q.v, 0)


def test_projection_oracle_fixed_and_equidistant(rng):
    plane = TotallyRealPlane(1.5)
    iota = involution(plane)
    for p in random_interior(rng, 20):
        P = ProjPoint(project_lifts(plane, p))
        assert iota(P) == P
        assert np.isclose(dist(P, ProjPoint(p)), dist(P, iota(ProjPoint(p))), atol=1e-8)


@pytest.mark.parametrize("v", [0.0, -3.0, 7.25])
def test_projection_is_idempotent(rng, v):
    plane = TotallyRealPlane(v)
    L = random_interior(rng, 500)
    P = project_lifts(plane, L)
    PP = project_lifts(plane, P)
    a = P / P[:, 2:3]
    b = PP / PP[:, 2:3]
    assert np.abs(a - b).max() / max(1, np.abs(a).max()) <= 1e-10


def test_points_of_the_plane_are_fixed(rng):
    plane = TotallyRealPlane(2.0)
    L = chart(rng.normal(size=50) + 1j * rng.uniform(0.1, 3, 50), plane)
    P = project_lifts(plane, L)
    assert np.allclose(P / P[:, 2:3], L, atol=1e-10)


def test_projection_does_not_increase_distance(rng):
    plane = TotallyRealPlane(0.5)
    A, B = random_interior(rng, 2000), random_interior(rng, 2000)
    before = dist(A, B)
    after = dist(project_lifts(plane, A), project_lifts(plane, B))
    assert np.all(after <= before + 1e-9)


def test_projection_is_equivariant(rng):
    plane = TotallyRealPlane(-2.0)
    L = random_interior(rng, 200)
    for _ in range(10):
        M = embed_matrix(random_sl2(rng), plane)
        lhs = project_lifts(plane, L @ M.T)
        rhs = project_lifts(plane, L) @ M.T
        assert np.abs(lhs / lhs[:, 2:3] - rhs / rhs[:, 2:3]).max() < 1e-9


def test_boundary_extension_fixes_the_plane_boundary():
    plane = TotallyRealPlane(3.0)
    assert project_boundary(plane, lift(INFINITY)).is_infinity()
    xi = lift(HoroCoord(1.25 + 0j, 0, 3.0))
    assert project_boundary(plane, xi) == xi


def test_boundary_extension_is_stable_in_the_cutoff(rng):
    plane = TotallyRealPlane()
    for z, v in zip(rng.normal(size=20) + 1j * rng.normal(size=20), rng.normal(size=20)):
        xi = lift(HoroCoord(complex(z), 0, float(v)))
        a = project_boundary(plane, xi, T=30).lift
        b = project_boundary(plane, xi, T=40).lift
        a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
        assert abs(abs(np.vdot(a, b)) - 1) < 1e-6


def test_parabolic_calibration():
    for r in (1.0, 6.0, -2.5):
        assert embed_so21(np.array([[1, r], [0, 1]])).equals(h_translation(r), 1e-12)


def test_embedding_rejects_non_unimodular():
    with pytest.raises(ValueError):
        embed_so21(np.diag([2.0, 2.0]))


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.floats(-10, 10))
def test_embedding_is_a_homomorphism(seed, v):
    rng = np.random.default_rng(seed)
    a, b = random_sl2(rng), random_sl2(rng)
    plane = TotallyRealPlane(v)
    lhs = Isometry(embed_matrix(a @ b, plane), det_one=True)
    rhs = Isometry(embed_matrix(a, plane) @ embed_matrix(b, plane), det_one=True)
    assert lhs.equals(rhs, 1e-10)
    assert unitarity_residual(embed_matrix(a, plane)) < 1e-9 * max(1, np.abs(a).max() ** 4)


def test_embedding_stabilizes_plane_and_acts_as_mobius(rng):
    plane = TotallyRealPlane(4.0)
    for _ in range(10):
        m = random_sl2(rng)
        zeta = complex(rng.normal(), rng.uniform(0.2, 2))
        img = embed_matrix(m, plane) @ chart(zeta, plane)
        mob = (m[0, 0] * zeta + m[0, 1]) / (m[1, 0] * zeta + m[1, 1])
        q = to_horo(ProjPoint(img))
        assert abs(q.z.imag) < 1e-9 and np.isclose(q.v, 4.0, atol=1e-9)
        assert np.isclose(chart_inverse(img), mob, atol=1e-9)


def test_chart_doubles_hyperbolic_distance(rng):
    for _ in range(50):
        z1 = complex(rng.normal(), rng.uniform(0.1, 3))
        z2 = complex(rng.normal(), rng.uniform(0.1, 3))
        d_uhp = np.arccosh(1 + abs(z1 - z2) ** 2 / (2 * z1.imag * z2.imag))
        assert np.isclose(dist(chart(z1), chart(z2)), 2 * d_uhp, atol=1e-8)
    assert np.isclose(dist(chart(1j), chart(np.e * 1j)), 2.0)


def test_hyperbolic_generators_stay_loxodromic():
    A = np.array([[1.0, 1.0], [1.0, 2.0]])
    B = np.array([[1.0, -1.0], [-1.0, 2.0]])
    for m in (A, B):
        assert abs(np.trace(m)) > 2
        assert embed_so21(m).kind.value == "Loxodromic"


def test_fibers_project_to_their_base_point(rng):
    plane = TotallyRealPlane(1.0)
    zeta = complex(0.3, 1.7)
    F = fiber_lifts(zeta, rng.uniform(0, 0.99, 100), rng.uniform(0, 2 * np.pi, 100), plane)
    assert np.all(herm(F, F).real < 0)
    P = project_lifts(plane, F)
    assert np.allclose(chart_inverse(P), zeta, atol=1e-9)
