import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from royden_lab.errors import BoundaryZeroError, UnboundedDataError, ZeroAtBasePointError, ZeroOnBoundaryError
from royden_lab.geometry import BoundaryField, annulus, sample_boundary
from royden_lab.hardy import (
    ZeroFreeForm,
    affiliated_graph,
    blaschke_singular_split,
    divides,
    equivalent_inner,
    gcd_zero_based,
    inner_outer_factor,
    is_inner,
    is_invertible_inner,
    is_outer,
    omega_density,
    outer_from_log_modulus,
    saito_split,
    winding_vector,
    zero_based_inner,
)
from royden_lab.laplace import greens_function
from royden_lab.zeros import count_zeros

W = lambda w: np.asarray(w, dtype=complex)
SQRT_HALF = math.sqrt(0.5)


@pytest.fixture(scope="module")
def dens(ann):
    return omega_density(ann)


@pytest.fixture(scope="module")
def zbi(ann):
    return zero_based_inner(ann, [ann.base_point])


def test_is_inner_on_powers(ann):
    s = sample_boundary(ann, 128)
    for k in range(-2, 4):
        check = is_inner(lambda w: 3 * W(w) ** k, s)
        assert check and abs(check.scale - 3) < 1e-12
        assert np.allclose(check.moduli, [1, 0.5**k], rtol=0, atol=1e-12)


def test_is_inner_rejects_nonconstant_modulus(ann):
    assert not is_inner(lambda w: W(w) - 2, sample_boundary(ann, 64))


def test_zero_function_is_inner(ann):
    assert is_inner(lambda w: 0 * W(w), sample_boundary(ann, 64))


def test_jensen_gap_equals_green_function(ann, dens):
    """log|f(ŵ)| + g(ŵ, z) = ∫ log|f| dω for f = w - z; the gap is the Green's function."""
    for z in (0.8, -0.6 + 0.3j):
        check = is_outer(lambda w: W(w) - z, dens)
        g = greens_function(ann, z, K=48)(ann.base_point)
        assert not check
        assert abs(check.gap - g) < 1e-9


def test_is_outer_flags_zero_at_base_point(ann, dens, zbi):
    assert not is_outer(zbi, dens)
    check = is_outer(lambda w: W(w) - ann.base_point, dens)
    assert not check and check.zero_at_base_point
    with pytest.raises(ZeroAtBasePointError):
        is_outer(lambda w: 0 * W(w), dens)


def test_zero_based_inner(ann, zbi, dens):
    s = sample_boundary(ann, 256)
    assert is_inner(zbi, s)
    assert abs(zbi(np.array([ann.base_point]))[0]) < 1e-10
    assert count_zeros(zbi, ann) == 1
    assert not is_invertible_inner(zbi, ann, dens).invertible
    with pytest.raises(ZeroOnBoundaryError):
        zero_based_inner(ann, [0.5])


def test_invertible_inners_are_outer(ann, dens):
    for k in (-1, 2):
        check = is_invertible_inner(lambda w, k=k: W(w) ** k, ann, dens)
        assert check.invertible and check.outer and check.consistent


@settings(max_examples=8, deadline=None)
@given(
    st.integers(-1, 2),
    st.complex_numbers(max_magnitude=0.8, allow_nan=False),
    st.sampled_from([None, 0.75j, -0.8]),
)
def test_factorization_properties(k, c, zero):
    d = annulus(0.5, SQRT_HALF)
    f = lambda w: W(w) ** k * np.exp(c * W(w)) * (1 if zero is None else W(w) - zero)
    res = inner_outer_factor(f, d)
    assert res.residual < 1e-8
    s = sample_boundary(d, 256)
    assert is_inner(res.inner, s, tol=1e-8)
    assert is_outer(res.outer, omega_density(d))
    # zero-free members of the family keep their winding in the inner part
    if zero is None:
        assert list(res.winding) == [k]
        assert np.allclose(res.component_moduli, [1, 0.5**k], atol=1e-10)
    else:
        assert res.zero_count == 1


def test_factor_rejects_boundary_zero(ann):
    with pytest.raises(BoundaryZeroError):
        inner_outer_factor(lambda w: W(w) - 1, ann)


def test_zero_free_form_roundtrip(ann):
    res = inner_outer_factor(lambda w: W(w) * (W(w) - 2), ann)
    g = res.outer
    assert isinstance(g, ZeroFreeForm)
    pts = np.array([0.6, 0.9j])
    assert np.allclose(g(pts) * g.reciprocal()(pts), 1)
    assert list(winding_vector(res.inner, sample_boundary(ann, 64))) == [1]


def test_outer_from_log_modulus(ann):
    s = sample_boundary(ann, 256)
    data = np.array([np.cos(s.angles), 0.3 + 0 * s.angles])
    h, unit = outer_from_log_modulus(ann, BoundaryField(s, data), K=64)
    # ∫ data dω on the hole is not matched by an outer function: the unit absorbs it
    expected = data - np.array([0.0, unit.a[0]])[:, None]
    assert np.max(np.abs(np.log(np.abs(h(s.points))) - expected)) < 1e-10
    assert list(winding_vector(h, s)) == [0]
    with pytest.raises(UnboundedDataError):
        outer_from_log_modulus(ann, BoundaryField(s, 100 + data), K=64)


def test_divides(ann, zbi):
    w = lambda z: W(z)
    assert divides(w, lambda z: W(z) ** 2, ann)
    assert not divides(zbi, lambda z: 1 + 0 * W(z), ann)
    assert divides(zbi, lambda z: zbi(z) * W(z), ann)
    assert equivalent_inner(lambda z: W(z) ** 2, lambda z: W(z) ** 2 * np.exp(0.1j), ann)


def test_gcd_takes_minimum_multiplicity(ann):
    z1, z2, z3 = 0.8, -0.7j, -0.75
    g = gcd_zero_based(ann, [(z1, 2), (z2, 1)], [(z1, 1), (z3, 1)])
    assert equivalent_inner(g, zero_based_inner(ann, [z1]), ann)


def test_blaschke_split(ann, zbi):
    split = blaschke_singular_split(lambda w: zbi(w) * W(w), ann)
    assert len(split.zeros) == 1 and abs(split.zeros[0][0] - ann.base_point) < 1e-6
    assert split.singular_invertible


def test_saito_split(ann):
    s = sample_boundary(ann, 256)
    b = s.apply(lambda w: (W(w) - 0.8) * np.exp(W(w)) + 0 * W(w))
    res = saito_split(b)
    assert np.max(res.psi_deviation) < 1e-10
    assert np.isfinite(res.alpha_inverse_h)


def test_affiliated_bounds(ann):
    G = affiliated_graph(W, lambda w: 1 + 0 * W(w), lambda w: W(w) - 2, lambda w: 1 + 0 * W(w), ann)
    assert 0 < G.c <= G.C < np.inf
    first, second = G.graph(lambda w: 1 + 0 * W(w))
    # Φ(1) = (b, w a); |a| + |b| is constant on each circle, 1 on the outer one
    total = np.abs(first.values) + np.abs(second.values / G.sampling.points)
    assert np.max(np.abs(total - G.component_constants[:, None])) < 1e-8
    assert abs(G.component_constants[0] - 1) < 1e-8
