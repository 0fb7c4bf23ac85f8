import json

import numpy as np
import pytest

from pinch import maskit as K
from pinch.amalgam import apply_d_power, enumerate_rho, phi
from pinch.chc import lifts_to_horo
from pinch.heisenberg import quotient_w


@pytest.fixture(scope="module")
def census(rep):
    return K.parabolic_census(rep, 6)


def test_region_samples_lie_in_their_region(rep, rng):
    for m in (1, 2):
        P = K.sample_region(rep, m, 1000, rng)
        off = rep.region_offset(P)
        assert np.all(off > 0) if m == 1 else np.all(off < 0)


def test_square_of_d_keeps_regions(rep, rng):
    for m in (1, 2):
        P = K.sample_region(rep, m, 500, rng)
        Q = apply_d_power(P, np.full(len(P), 2), rep.r)
        assert np.array_equal(rep.region_offset(P) > 0, rep.region_offset(Q) > 0)


def test_first_generator_swaps_regions(rep, rng):
    P = K.sample_region(rep, 1, 1000, rng)
    img = P @ rep.images["a1"].matrix.T
    assert np.all(rep.region_offset(img) < 0)


@pytest.mark.parametrize("m", [1, 2])
def test_precisely_invariant_small(rep, m):
    r = K.check_precisely_invariant(rep, m, L=4, N=500, seed=1)
    assert r.violations == 0 and r.min_margin > 0 and r.passed
    # up to length 4 only the boundary word and its inverse lie in <d>
    assert r.details["d_powers"] == 2


@pytest.mark.parametrize("L, N", [(2, 300), (4, 600)])
def test_interactive_pair_is_stable_across_scales(rep, L, N):
    r = K.check_interactive_pair(rep, L, N, seed=3)
    assert r.passed and r.violations == 0 and r.min_margin > 0
    assert r.details["overlap"] == 0 and r.details["uncovered"] == 0
    assert all(w is not None for w in r.details["witnesses"].values())


def test_interactive_pair_witnesses_are_in_phi(rep):
    r = K.check_interactive_pair(rep, 3, 300, seed=0)
    for key, wit in r.details["witnesses"].items():
        p = wit["point"]
        w = quotient_w(p["x"], p["y"], p["v"])
        assert (w > rep.w_mid) == (key == "X1")


@pytest.mark.parametrize("which, L, N", [(1, 4, 200), (2, 4, 200), ("full", 3, 60),
                                         (1, 5, 400)])
def test_fundamental_sets_small(rep, which, L, N):
    r = K.check_fundamental_set(rep, which, L, N, seed=2)
    assert r.violations == 0
    assert r.undecided_fraction < 0.05
    assert np.isnan(r.min_margin)


def test_fundamental_samples_are_inside(rep, rng):
    region = phi(rep)
    P = K.sample_fundamental(rep, region, 300, rng)
    assert len(P) == 300 and region.contains(P).all()


def test_phi_has_no_translated_copies(rep, rng):
    region = phi(rep)
    P = K.sample_fundamental(rep, region, 300, rng)
    for n in (-2, -1, 1, 2):
        assert not region.contains(apply_d_power(P, np.full(len(P), n), rep.r)).any()


def test_scalar_distance_of_generators_and_relator(rep):
    for g in rep.images.values():
        assert K.scalar_distance(g.matrix) > 1
    assert K.scalar_distance(rep.rho(rep.relator).matrix) < 1e-9


def test_nonidentity_excludes_only_trivial_words(rep):
    r = K.nonidentity_words(rep, L=5, cap=2000, seed=0)
    assert r.passed and r.min_margin >= 1e-6
    assert r.samples_tested + r.details["trivial_excluded"] == 2000
    assert r.details["trivial_excluded"] >= 1  # the empty word


def test_census_examples(census):
    entries, report = census
    by_word = {e.word: e for e in entries}
    g = by_word["a1 b1 a1^-1 b1^-1"]
    assert (g.conjugator, g.d_power) == ("1", 1)
    c = by_word["a1 a1 b1 a1^-1 b1^-1 a1^-1"]
    # conjugator h with h^-1 w h a power of d; rho(a1) sends infinity to the fixed point
    assert c.conjugator == "a1" and c.d_power == 1
    assert report.passed and report.violations == 0
    assert all(e.resolved and abs(e.d_power) == 1 for e in entries)


def test_reports_are_deterministic(rep):
    a = K.check_precisely_invariant(rep, 2, 2, 300, seed=9).to_json()
    b = K.check_precisely_invariant(rep, 2, 2, 300, seed=9).to_json()
    assert a == b
    d = json.loads(a)
    assert d["passed"] is True and d["check_name"] == "precisely_invariant_X2"


def test_merge_adds_counts_and_keeps_worst_margin():
    a = K.VerificationReport("a", 0, 10, 0, 2.0)
    b = K.VerificationReport("b", 0, 5, 1, 1.0, undecided=2)
    m = K.merge_reports("ab", [a, b], 0)
    assert (m.samples_tested, m.violations, m.undecided, m.min_margin) == (15, 1, 2, 1.0)
    assert not m.passed


def test_undecided_fraction_gates_the_verdict():
    r = K.VerificationReport("x", 0, 100, 0, 1.0, undecided=6, max_undecided_fraction=0.05)
    assert not r.passed
    r.undecided = 5
    assert r.passed


def test_enumeration_order_is_by_length(rep):
    words, _ = enumerate_rho(rep, 3)
    assert [len(w) for w in words] == sorted(len(w) for w in words)


def test_orbit_points_convert(rep, rng):
    P = K.sample_box(rep, 100, rng, (0.0, 10.0))
    z, u, v = lifts_to_horo(P)
    assert np.all(u > 0)
    assert np.all((quotient_w(z.real, z.imag, v) >= 0) & (quotient_w(z.real, z.imag, v) <= 10))
