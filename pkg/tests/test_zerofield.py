import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stark_shell.errors import DomainError
from stark_shell.zerofield import (
    ShellParams,
    critical_strength,
    find_bound_states,
    mu_all,
    mu_ell,
    mu_ell_quadrature,
    mu_prime,
    s_wave_strength,
    shooting_bound_state,
)

ALPHA_K1 = s_wave_strength(1.0, 1.0)


def test_s_wave_strength_value():
    assert ALPHA_K1 == pytest.approx(-2.3130352855, abs=1e-10)


def test_mu0_closed_form():
    assert mu_ell(0, -1.0, 1.0) == pytest.approx((1 - math.exp(-2)) / 2, rel=1e-15)
    assert mu_ell(0, -1.0, 1.0) == pytest.approx(0.4323323583, abs=1e-10)


def test_mu1_value():
    # a^2 kappa i_1 k_1 at kappa = a = 1 equals 2/e^2
    assert mu_ell(1, -1.0, 1.0) == pytest.approx(2 * math.exp(-2), rel=1e-14)
    assert mu_ell_quadrature(1, -1.0, 1.0) == pytest.approx(0.2706705664732254, rel=1e-12)


@pytest.mark.parametrize("E", [-0.25, -1.0, -4.0, -0.5, -2.0])
@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_mu_oracle_equivalence(E, a):
    for ell in range(6):
        assert mu_ell(ell, E, a) == pytest.approx(mu_ell_quadrature(ell, E, a), rel=1e-8)


def test_mu_decays_for_large_kappa():
    vals = [mu_ell(2, -(k**2), 1.0) for k in (1, 10, 100, 1000)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-3


def test_mu_all_matches_mu_ell():
    vals = mu_all(8, -1.3, 0.7)
    for ell in range(9):
        assert vals[ell].real == pytest.approx(mu_ell(ell, -1.3, 0.7), rel=1e-13)
        assert abs(vals[ell].imag) < 1e-15


def test_mu_errors():
    with pytest.raises(DomainError):
        mu_ell(0, 0.0, 1.0)
    with pytest.raises(DomainError):
        mu_ell(0, 1.0, 1.0)
    with pytest.raises(DomainError):
        mu_prime(1, 0.5, 1.0)


def test_mu_prime_s_wave():
    ref = (1 - 3 * math.exp(-2)) / 4
    assert mu_prime(0, -1.0, 1.0) == pytest.approx(ref, rel=1e-14)
    assert mu_prime(0, -1.0, 1.0) == pytest.approx(0.1484985375725, rel=1e-12)
    # finite-difference confirmation of the grouping
    h = 1e-6
    fd = (mu_ell(0, -1 + h, 1.0) - mu_ell(0, -1 - h, 1.0)) / (2 * h)
    assert fd == pytest.approx(ref, abs=1e-8)


def test_mu_prime_higher_ell_fd_agrees():
    for ell in (1, 2, 5):
        an = mu_prime(ell, -1.0, 1.0)
        fd = mu_prime(ell, -1.0, 1.0, method="fd")
        assert fd == pytest.approx(an, rel=1e-8)
    # two step sizes agree
    h1, h2 = 1e-5, 5e-6

    def cd(h):
        return (mu_ell(1, -1 + h, 1.0) - mu_ell(1, -1 - h, 1.0)) / (2 * h)

    assert abs(cd(h1) - cd(h2)) < 1e-7


@given(st.floats(0.01, 20.0), st.floats(0.2, 5.0))
def test_mu0_prime_positive(kappa, a):
    assert mu_prime(0, -kappa * kappa, a) > 0


def test_critical_strength():
    assert critical_strength(0, 1.0) == -1.0
    assert critical_strength(0, 2.0) == -0.5
    assert critical_strength(1, 1.0) < critical_strength(0, 1.0)
    # mu_l(E -> 0-) -> a / (2l+1)
    for ell in range(4):
        assert mu_ell(ell, -1e-12, 1.3) == pytest.approx(1.3 / (2 * ell + 1), rel=1e-5)


def test_s_wave_example():
    states = find_bound_states(ShellParams(1.0, ALPHA_K1), 10)
    assert len(states) == 1
    s = states[0]
    assert (s.ell, s.multiplicity) == (0, 1)
    assert s.energy == pytest.approx(-1.0, abs=1e-12)
    assert abs(1 + ALPHA_K1 * mu_ell(0, s.energy, 1.0)) < 1e-10


def test_no_binding_above_threshold():
    assert find_bound_states(ShellParams(1.0, -0.5), 10) == []


def test_strong_coupling_against_shooting():
    p = ShellParams(1.0, -10.0)
    states = find_bound_states(p, 20)
    expected = [ell for ell in range(21) if -10.0 < critical_strength(ell, 1.0)]
    assert sorted(s.ell for s in states) == expected
    assert [s.energy for s in states] == sorted(s.energy for s in states)
    for s in states:
        ref = shooting_bound_state(s.ell, p)
        assert len(ref) == 1
        assert s.energy == pytest.approx(ref[0], rel=1e-8)
        assert s.multiplicity == 2 * s.ell + 1
        assert abs(1 + p.alpha * mu_ell(s.ell, s.energy, 1.0)) < 1e-10


@given(
    st.floats(0.3, 3.0),
    st.floats(-30.0, -1.2),
    st.sampled_from([0.5, 2.0, 3.0]),
)
def test_scaling_covariance(a, alpha, lam):
    base = find_bound_states(ShellParams(a, alpha), 12)
    scaled = find_bound_states(ShellParams(a, alpha).scaled(lam), 12)
    assert [s.ell for s in base] == [s.ell for s in scaled]
    for s0, s1 in zip(base, scaled):
        if not s0.shallow:
            assert s1.energy == pytest.approx(s0.energy / lam**2, rel=1e-9)


@given(st.floats(0.5, 2.0), st.floats(0.3, 3.0))
def test_s_wave_inversion_property(a, kappa):
    alpha = s_wave_strength(kappa, a)
    s = [st_ for st_ in find_bound_states(ShellParams(a, alpha), 0)][0]
    assert s.energy == pytest.approx(-kappa * kappa, rel=1e-9)


def test_finiteness_and_channel_count():
    for alpha in (-1.5, -4.0, -25.0):
        p = ShellParams(1.0, alpha)
        states = find_bound_states(p, 64)
        n = sum(1 for ell in range(65) if alpha < critical_strength(ell, 1.0))
        assert len(states) == n


def test_shallow_state_flagged():
    p = ShellParams(1.0, -1.0 - 1e-14)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        states = find_bound_states(p, 0)
    assert states[0].shallow
    assert any("shallower" in str(x.message) for x in w)


def test_params_validation():
    with pytest.raises(DomainError):
        ShellParams(-1.0, -2.0)
    with pytest.raises(DomainError):
        ShellParams(1.0, float("nan"))
    with pytest.raises(DomainError):
        find_bound_states(ShellParams(0.0, -2.0), 2)
