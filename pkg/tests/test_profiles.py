import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ignifront import make_profile
from ignifront.errors import ConfigurationError, ConstructionError
from ignifront.profiles import HypothesisParams, default_theta_star


def test_vanishes_below_threshold(canonical_profile):
    # rate is identically zero up to the ignition threshold
    assert canonical_profile(0.2) == 0.0
    u = np.linspace(0.0, 0.25, 101)
    assert np.all(canonical_profile(u) == 0.0)


def test_vanishes_at_one(canonical_profile):
    assert canonical_profile(1.0) == 0.0
    # and outside the unit range (extension by zero)
    assert canonical_profile(1.3) == 0.0
    assert canonical_profile(-0.2) == 0.0


def test_positive_between(canonical_profile):
    u = np.linspace(0.2500001, 0.9999, 400)
    assert np.all(canonical_profile(u) > 0.0)


def test_tabulation_slope_within_lipschitz(canonical_profile):
    # brute-force slope scan over a 1e4-point grid
    u = np.linspace(0.0, 1.0, 10_001)
    f = canonical_profile(u)
    slopes = np.abs(np.diff(f) / np.diff(u))
    assert slopes.max() <= canonical_profile.lipschitz + 1e-9


def test_cap_band_lower_bound_and_monotone(canonical_profile):
    p = canonical_profile
    lo = 1.0 - p.theta1_eff
    u = np.linspace(lo, 0.999999, 500)
    f = p(u)
    assert np.all(f >= p.alpha1 * (1.0 - u) ** p.m1 - 1e-12)
    assert np.all(np.diff(f) <= 1e-12)


def test_ramp_sandwich(canonical_profile):
    u = np.linspace(0.0, 1.0, 1001)
    ramp = canonical_profile.lipschitz * np.clip(u - canonical_profile.theta0, 0, None)
    assert np.all(canonical_profile(u) <= ramp + 1e-15)


def test_parameter_domain_errors():
    with pytest.raises(ConfigurationError):
        make_profile(0.6, 1.0, 2.0, 0.5)
    with pytest.raises(ConfigurationError):
        make_profile(0.25, 0.5, 2.0, 0.5)
    with pytest.raises(ConfigurationError):
        make_profile(0.25, 1.0, 0.5, 0.5)
    with pytest.raises(ConfigurationError):
        make_profile(0.25, 1.0, 2.0, -1.0)


def test_incompatible_cap_raises_construction_error():
    # m1 = 1 with alpha1 > M makes the cap branch steeper than the ramp cap
    with pytest.raises(ConstructionError):
        make_profile(0.25, 1.0, 1.0, 3.0)


@settings(max_examples=40, deadline=None)
@given(theta0=st.floats(0.05, 0.45), m1=st.floats(1.0, 3.0),
       alpha1=st.floats(0.05, 0.6))
def test_profile_invariants_property(theta0, m1, alpha1):
    try:
        p = make_profile(theta0, 1.0, m1, alpha1)
    except ConstructionError:
        return
    u = np.linspace(0.0, 1.0, 2001)
    f = p(u)
    assert np.all(f >= 0.0)
    assert f[u <= theta0].max(initial=0.0) == 0.0
    assert p(1.0) == 0.0
    slopes = np.abs(np.diff(f) / np.diff(u))
    assert slopes.max() <= 1.0 + 1e-9


def test_rescaled_profile():
    p = make_profile(0.25, 1.0, 2.0, 0.5)
    q = p.rescaled(2.0)
    u = np.linspace(0, 1, 501)
    assert np.allclose(q(u), 4.0 * p(u))


def test_hypothesis_params_derived(canonical_profile):
    hp = HypothesisParams.for_profile(canonical_profile)
    assert hp.theta_star == pytest.approx(0.0625)
    assert hp.beta1 == pytest.approx(max(0.5, 0.5 / 1.5))
    assert hp.c1(2) == pytest.approx(2.0 * np.sqrt(2.0))
    kappa1 = 1.0 + np.sqrt(2.0 / 1.0) * np.log(4.0 / (1.0 - 0.5))
    assert hp.kappa1(2) == pytest.approx(kappa1)
    assert 0.0 < hp.beta3(2) < 1.0


def test_theta_star_range():
    with pytest.raises(ConfigurationError):
        HypothesisParams(theta1=0.25, m1=2.0, alpha1=0.5, lipschitz=1.0,
                         theta_star=0.2)
    assert default_theta_star(0.25) == pytest.approx(0.0625)
