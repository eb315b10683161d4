import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize

from royden_lab.errors import AxiomViolation, ConfigError
from royden_lab.gauge import (
    GaugeNormSpec,
    check_gauge_axioms,
    dual_norm,
    dual_norm_report,
    gauge_eval,
    h_alpha_membership,
)
from royden_lab.geometry import annulus, sample_boundary
from royden_lab.hardy import omega_density
from royden_lab.laplace import OmegaDensity


def fake_density(M=8, seed=1):
    """Arbitrary positive node masses; the gauge layer only sees the weights."""
    s = sample_boundary(annulus(0.5, 0.75), M)
    vals = np.random.default_rng(seed).uniform(0.2, 2.0, s.shape)
    vals /= np.sum(vals * s.weights)
    return OmegaDensity(s, vals, 1.0)


def mu_of(density):
    w = density.weights.ravel()
    return w / w.sum()


def slsqp_dual(spec, f, density):
    """sup Σ μ|f| t over t >= 0 with α(t) <= 1, one smooth constraint per term."""
    mu, x = mu_of(density), np.abs(np.ravel(f))
    c = mu * x

    def term(t, w, p):
        return w * np.sum(mu * np.abs(t) ** p) ** (1 / p)

    if spec.kind == "max":
        cons = [{"type": "ineq", "fun": lambda t, w=w, p=p: 1 - term(t, w, p)} for w, p in spec.terms]
    else:
        cons = [{"type": "ineq", "fun": lambda t: 1 - sum(term(t, w, p) for w, p in spec.terms)}]
    best = 0.0
    rng = np.random.default_rng(0)
    for _ in range(6):
        t0 = rng.uniform(0.1, 1.0, c.size)
        t0 /= max(max(term(t0, w, p) for w, p in spec.terms), 1e-300) * (len(spec.terms) if spec.kind == "sum" else 1)
        res = optimize.minimize(
            lambda t: -c @ t, t0, jac=lambda t: -c, bounds=[(0, None)] * c.size,
            constraints=cons, method="SLSQP", options={"ftol": 1e-14, "maxiter": 2000},
        )
        if all(cn["fun"](res.x) > -1e-9 for cn in cons):
            best = max(best, -res.fun)
    return best


def test_spec_validation_and_config_round_trip():
    with pytest.raises(ConfigError):
        GaugeNormSpec("p", ((1.0, 2.0), (1.0, 3.0)))
    with pytest.raises(ConfigError):
        GaugeNormSpec.p_norm(0.5)
    with pytest.raises(ConfigError):
        GaugeNormSpec("median", ((1.0, 1.0),))
    with pytest.raises(ConfigError):
        GaugeNormSpec.from_config({"kind": "max"})
    for spec in (GaugeNormSpec.p_norm(float("inf")), GaugeNormSpec.max_of([(1, 1), (0.5, 2)]), GaugeNormSpec.sum_of([(0.5, 1), (0.5, 3)])):
        assert GaugeNormSpec.from_config(spec.to_config()) == spec


def test_axioms_pass_for_p_norms_and_mixed(ann):
    dens = omega_density(ann, 128)
    for p in (1, 1.5, 2, 3):
        rep = check_gauge_axioms(GaugeNormSpec.p_norm(p), dens)
        assert rep.passed and abs(rep.alpha_one - 1) < 1e-14
    rep = check_gauge_axioms(GaugeNormSpec.max_of([(1, 1), (0.5, 2)]), dens)
    assert rep.dominating_margin >= -1e-12


def test_axiom_failures(ann):
    dens = omega_density(ann, 128)
    with pytest.raises(AxiomViolation) as err:
        check_gauge_axioms(GaugeNormSpec.p_norm(1, 0.5), dens)
    assert "alpha(1)" in str(err.value) and not err.value.report.passed
    # the sup norm of an indicator never shrinks
    with pytest.raises(AxiomViolation, match="decreasing"):
        check_gauge_axioms(GaugeNormSpec.p_norm(float("inf")), dens)


@pytest.mark.parametrize("p", [1, 1.5, 2, 3, float("inf")])
def test_p_dual_matches_conjugate_norm(p):
    dens = fake_density(16)
    mu = mu_of(dens)
    rng = np.random.default_rng(3)
    q = np.inf if p == 1 else (1 if np.isinf(p) else p / (p - 1))
    for _ in range(5):
        f = rng.standard_normal(dens.sampling.shape) + 1j * rng.standard_normal(dens.sampling.shape)
        x = np.abs(f).ravel()
        exact = x.max() if np.isinf(q) else np.sum(mu * x**q) ** (1 / q)
        assert abs(dual_norm_report(GaugeNormSpec.p_norm(p), f, dens).value - exact) < 1e-9 * exact


@pytest.mark.parametrize(
    "spec",
    [
        GaugeNormSpec.max_of([(1, 1), (0.5, 2)]),
        GaugeNormSpec.max_of([(1, 1.5), (0.8, 3)]),
        GaugeNormSpec.max_of([(1, 1), (0.6, 2), (0.4, 4)]),
        GaugeNormSpec.sum_of([(0.5, 1), (0.5, 2)]),
        GaugeNormSpec.sum_of([(0.7, 1.5), (0.3, 3)]),
    ],
)
def test_mixed_duals_against_slsqp(spec):
    dens = fake_density(8)
    rng = np.random.default_rng(11)
    for _ in range(3):
        f = rng.standard_normal(dens.sampling.shape) + 1j * rng.standard_normal(dens.sampling.shape)
        ours = dual_norm_report(spec, f, dens).value
        ref = slsqp_dual(spec, f, dens)
        assert abs(ours - ref) < 1e-6 * ref


def test_dual_of_zero_and_sparse_fields():
    dens = fake_density(8)
    spec = GaugeNormSpec.max_of([(1, 1), (0.5, 2)])
    assert dual_norm(spec, np.zeros(dens.sampling.shape), dens) == 0.0
    f = np.zeros(dens.sampling.shape)
    f[0, 3] = 2.0
    assert abs(dual_norm_report(spec, f, dens).value - slsqp_dual(spec, f, dens)) < 1e-6


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.floats(-5, 5), min_size=32, max_size=32),
    st.lists(st.floats(-5, 5), min_size=32, max_size=32),
    st.floats(-3, 3),
    st.floats(0, 2 * np.pi),
)
def test_norm_properties(a, b, scale, phase):
    dens = fake_density(16)
    spec = GaugeNormSpec.max_of([(1, 1), (0.5, 2)])
    f, g = np.array(a).reshape(2, 16), np.array(b).reshape(2, 16)
    af, ag = gauge_eval(spec, f, dens), gauge_eval(spec, g, dens)
    assert gauge_eval(spec, f + g, dens) <= af + ag + 1e-12 * (1 + af + ag)
    assert abs(gauge_eval(spec, scale * f, dens) - abs(scale) * af) <= 1e-12 * (1 + abs(scale) * af)
    assert abs(gauge_eval(spec, np.exp(1j * phase) * f, dens) - af) <= 1e-12 * (1 + af)
    assert af >= np.sum(mu_of(dens) * np.abs(f).ravel()) - 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([1, 1.5, 2, 3]))
def test_holder_probe(seed, p):
    dens = fake_density(16)
    spec = GaugeNormSpec.p_norm(p)
    rng = np.random.default_rng(seed)
    f, h = (rng.standard_normal(dens.sampling.shape) + 1j * rng.standard_normal(dens.sampling.shape) for _ in range(2))
    pairing = abs(np.sum(mu_of(dens) * (f * h).ravel()))
    assert pairing <= gauge_eval(spec, h, dens) * dual_norm(spec, f, dens) * (1 + 1e-9)


def test_h_alpha_membership(ann):
    dens = omega_density(ann, 128)
    ok, norm = h_alpha_membership(lambda w: w - 2, GaugeNormSpec.p_norm(2), dens)
    assert ok and 1 < norm < 3
