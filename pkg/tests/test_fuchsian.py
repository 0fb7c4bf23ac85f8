import numpy as np
import pytest
import sympy as sp

from pinch import words as W
from pinch.fuchsian import (ConstructionError, HoroballTriple, fundamental_data,
                            horoball_triple, ideal_polygon_group, mobius, punctured_torus)


@pytest.fixture(scope="module")
def torus():
    G = punctured_torus(6.0)
    return G, fundamental_data(G)


def test_commutator_oracle():
    A = sp.Matrix([[1, 1], [1, 2]])
    B = sp.Matrix([[1, -1], [-1, 2]])
    C = A * B * A.inv() * B.inv()
    assert C == sp.Matrix([[-1, 0], [-6, -1]])
    assert C.trace() == -2


def test_boundary_relator_is_translation(torus):
    G, _ = torus
    R = G.relator_matrix()
    assert np.allclose(np.sign(R[0, 0]) * R, [[1, 6], [0, 1]], atol=1e-10)
    assert G.translation == 6.0
    assert sorted(np.trace(g) for g in G.generators) == pytest.approx([3, 3])


def test_mirrored_group_translates_backwards(torus):
    G, _ = torus
    M = G.mirrored()
    R = M.relator_matrix()
    assert np.allclose(np.sign(R[0, 0]) * R, [[1, -6], [0, 1]], atol=1e-10)


def test_rejects_nonpositive_cusp_length():
    with pytest.raises(ValueError):
        punctured_torus(0.0)


def test_ideal_polygon_genus_one_matches_torus():
    H = ideal_polygon_group(1, 6.0)
    assert sorted(abs(np.trace(g)) for g in H.generators) == pytest.approx([3, 3], abs=1e-9)
    assert abs(abs(np.trace(H.relator_matrix())) - 2) < 1e-9


def test_ideal_polygon_genus_two_is_free_on_samples(rng):
    H = ideal_polygon_group(2, 6.0)
    assert len(H.generators) == 4
    R = H.relator_matrix()
    assert np.allclose(np.sign(R[0, 0]) * R, [[1, 6], [0, 1]], atol=1e-10)
    for _ in range(1000):
        w = W.random_reduced(rng, H.letters, int(rng.integers(1, 9)))
        M = H.evaluate(w)
        assert min(np.abs(M - np.eye(2)).max(), np.abs(M + np.eye(2)).max()) > 1e-6


def test_ford_domain_shape(torus):
    G, F = torus
    assert F.r == 6.0
    assert F.unbounded_x0 == pytest.approx(-3.5)
    assert np.isfinite(F.max_height)
    xs = sorted((s.xl, s.xr) for s in F.sides)
    # the side arcs tile the strip between the unbounded sides
    assert xs[0][0] == pytest.approx(F.unbounded_x0)
    assert xs[-1][1] == pytest.approx(F.unbounded_x0 + F.r)
    assert all(a[1] == pytest.approx(b[0]) for a, b in zip(xs, xs[1:]))


def test_side_pairings_map_sides_onto_partners(torus):
    G, F = torus
    for s in F.sides:
        partner = F.sides[s.partner]
        for x in np.linspace(s.xl, s.xr, 7)[1:-1]:
            z = mobius(s.pairing_matrix, complex(x, s.height(x)))
            # onto the partner arc, up to the cusp translation
            k = np.round((z.real - partner.center) / F.r)
            x2 = z.real - k * F.r
            assert abs(abs(complex(x2, z.imag) - partner.center) - partner.radius) < 1e-8


def test_interior_points_have_no_equivalents(torus, rng):
    G, F = torus
    z = rng.uniform(F.unbounded_x0, F.unbounded_x0 + F.r, 4000) + 1j * np.exp(rng.uniform(-1, 2, 4000))
    pts = z[F.contains(z, 1e-6)][:200]
    assert len(pts) == 200
    _, mats = W.evaluate_tree(G.letters, 6, G.matrices(), 2)
    for M in mats[1:]:
        img = (M[0, 0] * pts + M[0, 1]) / (M[1, 0] * pts + M[1, 1])
        inside = F.contains(img, -1e-6)
        # a deep interior image would make two points of the domain equivalent
        assert not np.any(inside)


def test_horoball_heights(torus):
    G, F = torus
    B = horoball_triple(G, F)
    assert B.h_B < B.h_b < B.h_beta
    assert (B.h_B, B.h_b, B.h_beta) == (2.0, 4.0, 8.0)
    assert all(s.radius < B.h_B for s in F.sides)
    with pytest.raises(ValueError):
        HoroballTriple(2.0, 1.0, 3.0)


@pytest.mark.parametrize("genus, depth", [(2, 2), (3, 2)])
def test_shallow_ford_depth_is_reported(genus, depth):
    with pytest.raises(ConstructionError, match="L_ford"):
        fundamental_data(ideal_polygon_group(genus, 6.0), depth)


def test_genus_two_domain_closes():
    H = ideal_polygon_group(2, 6.0)
    F = fundamental_data(H)
    assert F.r == pytest.approx(6.0)
    assert all(0 <= s.partner < len(F.sides) for s in F.sides)
