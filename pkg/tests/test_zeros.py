import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from royden_lab.errors import NonIntegerWindingError
from royden_lab.geometry import annulus
from royden_lab.zeros import circle_winding, count_zeros, locate_zeros, winding_report


def poly(zeros):
    def f(w):
        w = np.asarray(w, dtype=complex)
        out = np.ones_like(w)
        for z, m in zeros:
            out = out * (w - z) ** m
        return out

    return f


def test_circle_winding_counts_enclosed_zeros():
    f = poly([(0.1, 2), (0.3j, 1), (2.0, 1)])
    assert round(circle_winding(f, 0, 1)) == 3
    assert np.isnan(circle_winding(f, 0, 0.1))  # passes through a zero


def test_winding_report_annulus(ann):
    f = poly([(0.0, 2), (0.7, 1), (0.2, -1)])
    rep = winding_report(f, ann)
    assert list(rep.k) == [1]
    assert rep.outer_winding == 2
    assert rep.zero_count == 1


def test_boundary_zero_raises(ann):
    with pytest.raises(NonIntegerWindingError):
        winding_report(poly([(1.0, 1)]), ann)


def test_locate_two_hole_zeros(two_holes):
    zs = [(0.1 + 0.5j, 1), (-0.7, 2), (0.4 - 0.3j, 1)]
    found = locate_zeros(poly(zs), two_holes)
    assert sorted(m for _, m in found) == [1, 1, 2]
    for z, m in zs:
        assert any(abs(y - z) < 1e-6 and k == m for y, k in found)


def test_locate_ignores_zeros_in_holes(two_holes):
    assert count_zeros(poly([(0.4, 1), (-0.4, 3)]), two_holes) == 0
    assert locate_zeros(poly([(0.4, 1), (-0.4, 3)]), two_holes) == []


@settings(max_examples=15, deadline=None)
@given(st.floats(0.55, 0.95), st.floats(0, 2 * np.pi), st.integers(1, 3))
def test_locate_random_zero(r, t, m):
    d = annulus(0.5, 0.75)
    z = r * np.exp(1j * t)
    found = locate_zeros(poly([(z, m)]), d)
    assert len(found) == 1
    assert abs(found[0][0] - z) < 1e-5 and found[0][1] == m
