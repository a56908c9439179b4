import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from msnet.dist import (Deterministic, Empirical, Exponential, Gamma, MarkLaw, Uniform,
                        from_dict, log_mgf, mean, mgf_radius, sample)
from msnet.errors import ValidationError


def gen(seed=0):
    return np.random.default_rng(seed)


def test_point_masses():
    assert np.all(sample(Deterministic(3.0), gen(), 5) == 3.0)
    assert np.all(sample(Uniform(2.0, 2.0), gen(), 5) == 2.0)
    assert Deterministic(3.0).sample(gen()) == 3.0


def test_exponential_sample_mean():
    x = Exponential(1.0).sample(gen(1), 10**6)
    assert abs(x.mean() - 1.0) < 0.01


def test_log_mgf_examples():
    assert log_mgf(Exponential(2.0), 1.0) == pytest.approx(math.log(2.0), abs=1e-15)
    assert log_mgf(Deterministic(1.7), 0.3) == 0.3 * 1.7
    assert log_mgf(Exponential(1.0), 1.0) == math.inf
    assert log_mgf(Exponential(1.0), 5.0) == math.inf
    assert log_mgf(Gamma(2.0, 3.0), 3.0) == math.inf


def test_mean_and_radius():
    assert (mean(Exponential(2.0)), mgf_radius(Exponential(2.0))) == (0.5, 2.0)
    assert (mean(Uniform(1.0, 3.0)), mgf_radius(Uniform(1.0, 3.0))) == (2.0, math.inf)
    assert mean(Gamma(2.0, 3.0)) == pytest.approx(2 / 3)
    assert mgf_radius(Gamma(2.0, 3.0)) == 3.0
    assert mgf_radius(Deterministic(4.0)) == math.inf
    assert mgf_radius(Empirical((1.0, 2.0))) == math.inf


def _quad_log_mgf(logpdf, lo, hi, theta):
    val, _ = integrate.quad(lambda x: math.exp(theta * x + logpdf(x)), lo, hi, limit=200)
    return math.log(val)


@pytest.mark.parametrize("theta", [-3.0, -0.5, 0.4, 1.3, 2.9])
def test_log_mgf_against_quadrature(theta):
    u = Uniform(0.5, 2.0)
    assert u.log_mgf(theta) == pytest.approx(
        _quad_log_mgf(stats.uniform(0.5, 1.5).logpdf, 0.5, 2.0, theta), rel=1e-9, abs=1e-12)
    g = Gamma(2.5, 3.0)
    assert g.log_mgf(theta) == pytest.approx(
        _quad_log_mgf(stats.gamma(2.5, scale=1 / 3).logpdf, 0, math.inf, theta), rel=1e-7)
    e = Exponential(3.0)
    assert e.log_mgf(theta) == pytest.approx(
        _quad_log_mgf(stats.expon(scale=1 / 3).logpdf, 0, math.inf, theta), rel=1e-7)


def test_uniform_log_mgf_small_theta_is_stable():
    u = Uniform(1.0, 3.0)
    for t in (1e-12, -1e-12, 1e-8):
        assert u.log_mgf(t) == pytest.approx(t * 2.0, rel=1e-6)
    assert u.log_mgf(0.0) == 0.0


def test_empirical_log_mgf_matches_direct():
    xs = (0.2, 0.5, 3.0)
    e = Empirical(xs)
    for t in (-2.0, 0.7, 10.0):
        assert e.log_mgf(t) == pytest.approx(math.log(np.mean(np.exp(t * np.array(xs)))))
    assert e.mean() == pytest.approx(np.mean(xs))
    assert set(e.sample(gen(), 100)) <= set(xs)


def test_variances():
    assert Exponential(2.0).variance() == 0.25
    assert Uniform(1.0, 3.0).variance() == pytest.approx(1 / 3)
    assert Gamma(2.0, 4.0).variance() == pytest.approx(2 / 16)
    assert Deterministic(2.0).variance() == 0.0


laws = st.one_of(
    st.builds(Exponential, st.floats(0.2, 5.0)),
    st.builds(lambda lo, w: Uniform(lo, lo + w), st.floats(0.0, 2.0), st.floats(0.0, 2.0)),
    st.builds(Gamma, st.floats(0.5, 4.0), st.floats(0.5, 4.0)),
    st.builds(Deterministic, st.floats(0.0, 3.0)),
    st.builds(lambda xs: Empirical(tuple(xs)), st.lists(st.floats(0.0, 4.0), min_size=1, max_size=8)),
)


def _inside(law, frac):
    r = law.mgf_radius()
    return frac * (r if math.isfinite(r) else 3.0)


@settings(max_examples=200, deadline=None)
@given(laws, st.floats(-0.95, 0.95), st.floats(-0.95, 0.95))
def test_log_mgf_convex_and_anchored(law, f1, f2):
    t1, t2 = _inside(law, f1), _inside(law, f2)
    assert law.log_mgf(0.0) == 0.0
    mid = law.log_mgf(0.5 * (t1 + t2))
    assert mid <= 0.5 * (law.log_mgf(t1) + law.log_mgf(t2)) + 1e-9
    # Jensen: log E[e^{tX}] >= t E[X]
    assert law.log_mgf(t1) >= t1 * law.mean() - 1e-9


@settings(max_examples=100, deadline=None)
@given(laws)
def test_log_mgf_slope_at_zero_is_mean(law):
    h = 1e-5
    d = (law.log_mgf(h) - law.log_mgf(-h)) / (2 * h)
    assert d == pytest.approx(law.mean(), rel=1e-4, abs=1e-6)


@pytest.mark.parametrize("law,theta", [(Exponential(2.0), 0.6), (Uniform(0.0, 2.0), 1.0),
                                       (Gamma(3.0, 2.0), 0.5)])
def test_log_mgf_monte_carlo(law, theta):
    x = law.sample(gen(3), 400_000)
    w = np.exp(theta * x)
    se = w.std() / math.sqrt(x.size) / w.mean()
    assert math.log(w.mean()) == pytest.approx(law.log_mgf(theta), abs=4 * se)


@pytest.mark.parametrize("law", [Exponential(2.0), Uniform(0.5, 1.5), Gamma(2.0, 3.0),
                                 Deterministic(0.3), Empirical((1.0, 2.0))])
def test_dict_round_trip(law):
    assert from_dict(law.to_dict()) == law


@pytest.mark.parametrize("bad,needle", [
    ({"kind": "exponential", "rate": -1.0}, "rate"),
    ({"kind": "uniform", "lo": 2.0, "hi": 1.0}, "hi"),
    ({"kind": "gamma", "shape": 2.0}, "rate"),
    ({"kind": "weibull"}, "weibull"),
    ({"rate": 1.0}, "kind"),
    ({"kind": "exponential", "rate": 1.0, "scale": 2.0}, "scale"),
])
def test_from_dict_rejects(bad, needle):
    with pytest.raises(ValidationError, match=needle):
        from_dict(bad)


def test_constructors_reject_bad_parameters():
    for make in (lambda: Exponential(0.0), lambda: Deterministic(-1.0), lambda: Uniform(-1.0, 1.0),
                 lambda: Gamma(0.0, 1.0), lambda: Empirical(()), lambda: Exponential(math.nan)):
        with pytest.raises(ValidationError):
            make()


def test_common_marks_repeat_one_draw():
    m = MarkLaw.common(Exponential(1.0), 3)
    x = m.sample(gen(), (4, 5))
    assert x.shape == (4, 5, 3)
    assert np.all(x[..., 0] == x[..., 1]) and np.all(x[..., 1] == x[..., 2])


def test_independent_marks_uncorrelated():
    m = MarkLaw.independent(Exponential(2.0), Exponential(3.0))
    x = m.sample(gen(5), 10**5)
    assert x.shape == (10**5, 2)
    assert abs(np.corrcoef(x[:, 0], x[:, 1])[0, 1]) < 0.01
    assert x[:, 0].mean() == pytest.approx(0.5, rel=0.02)
    assert x[:, 1].mean() == pytest.approx(1 / 3, rel=0.02)


def test_mark_law_validation_and_round_trip():
    with pytest.raises(ValidationError):
        MarkLaw((Exponential(1.0), Exponential(2.0)), "common")
    with pytest.raises(ValidationError):
        MarkLaw((), "independent")
    with pytest.raises(ValidationError):
        MarkLaw((Exponential(1.0),), "sideways")
    m = MarkLaw.independent(Exponential(2.0), Uniform(0.0, 1.0))
    assert MarkLaw.from_dict(m.to_dict()) == m
    c = MarkLaw.from_dict({"dependence": "common", "law": {"kind": "exponential", "rate": 1.0},
                           "stations": 2})
    assert c == MarkLaw.common(Exponential(1.0), 2)
    assert c.means() == [1.0, 1.0]
