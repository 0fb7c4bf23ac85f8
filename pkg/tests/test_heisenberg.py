import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pinch.chc import HoroCoord, apply, lift, to_horo
from pinch.heisenberg import (HeisElem, QuotientCoord, h_translation, heis_mul,
                              heis_translation, lift_quotient, quotient_map, section_P,
                              v_translation)

small = st.floats(-20, 20, allow_nan=False)
elems = st.builds(lambda x, y, v: HeisElem(complex(x, y), v), small, small, small)


def act(g, p):
    return to_horo(apply(g, lift(p)))


def test_group_law_values():
    z = HeisElem(2 - 1j, 3.0)
    assert heis_mul(HeisElem(), z) == z
    assert heis_mul(HeisElem(1), HeisElem(1j)) == HeisElem(1 + 1j, -2.0)
    assert heis_mul(z, z.inverse()) == HeisElem(0j, 0.0)


@given(elems, elems, elems)
def test_group_law_is_associative(a, b, c):
    l, r = (a * b) * c, a * (b * c)
    assert np.isclose(l.z, r.z) and np.isclose(l.v, r.v, atol=1e-9)


@given(elems, elems)
def test_matrix_action_is_the_group_law(a, b):
    p = HoroCoord(b.z, 2.5, b.v)
    q = act(heis_translation(a), p)
    ab = a * b
    assert np.isclose(q.z, ab.z, atol=1e-9)
    assert np.isclose(q.u, 2.5, atol=1e-7)
    assert np.isclose(q.v, ab.v, atol=1e-7)


def test_translation_values():
    q = act(h_translation(2.0), HoroCoord(1 + 3j, 5, 7))
    assert np.isclose(q.z, 3 + 3j) and np.isclose(q.u, 5) and np.isclose(q.v, -5)
    q = act(v_translation(4.0), HoroCoord(1 + 3j, 5, 7))
    assert np.isclose(q.z, 1 + 3j) and np.isclose(q.v, 11)


def test_quotient_map_values():
    assert quotient_map(HoroCoord(2 + 1j, 3, 4)) == QuotientCoord(1, 8, 3)
    assert quotient_map(HoroCoord(0 + 1.5j, 3, 4)) == QuotientCoord(1.5, 4, 3)
    assert section_P(QuotientCoord(1, 8, 3)) == HoroCoord(1j, 3, 8)


def test_quotient_map_rejects_negative_u():
    with pytest.raises(ValueError):
        quotient_map(HoroCoord(0j, -1, 0))


@given(small, small, st.floats(0, 20), small, st.floats(-5, 5))
def test_quotient_is_invariant_under_horizontal_translation(x, y, u, v, r):
    p = HoroCoord(complex(x, y), u, v)
    q = act(h_translation(r), p)
    a, b = quotient_map(p), quotient_map(HoroCoord(q.z, max(q.u, 0.0), q.v))
    assert np.isclose(a.w, b.w, atol=1e-6 * max(1, abs(a.w)))
    assert np.isclose(a.y, b.y, atol=1e-9)


@given(small, small, st.floats(0, 20), small)
def test_lift_quotient_inverts_quotient_map(x, y, u, v):
    p = HoroCoord(complex(x, y), u, v)
    back = lift_quotient(quotient_map(p), x)
    assert np.isclose(back.z, p.z) and np.isclose(back.v, p.v, atol=1e-9)
