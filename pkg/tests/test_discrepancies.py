"""Published-formula variants checked against independent oracles.

Each test evaluates the printed variant next to the implemented one and
asserts which of the two the oracle confirms.
"""

import math

import numpy as np
import pytest
from scipy import special

from stark_shell.resonance1d import agmon_action, agmon_candidates, sweep, width_fit
from stark_shell.specfun import sph_i_array, sph_i_prime, sph_k_array, sph_k_prime
from stark_shell.starkshift import a2_coefficient, a2_from_elements
from stark_shell.weyl3d import DEFAULT_THETA, find_resonance_3d
from stark_shell.zerofield import ShellParams, mu_ell, mu_ell_quadrature, mu_prime, s_wave_strength

GRID = [(E, a) for E in (-0.5, -1.0, -2.0) for a in (0.5, 1.0, 2.0)]


def printed_mu(ell, E, a):
    """mu_l = a/(2 kappa) i_l k_l, the printed prefactor."""
    kap = math.sqrt(-E)
    t = kap * a
    return a / (2 * kap) * sph_i_array(ell, t)[ell] * sph_k_array(ell, t)[ell]


# ---------------------------------------------------------------------------
# mu_l prefactor


@pytest.mark.parametrize("ell", [0, 1, 3])
def test_mu_prefactor_oracle_confirms_a2_kappa(ell):
    for E, a in GRID:
        ref = mu_ell_quadrature(ell, E, a)
        assert mu_ell(ell, E, a) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("ell", [0, 1, 3])
def test_mu_prefactor_printed_variant_rejected(ell):
    # not even a constant multiple of the oracle, so no Bessel normalisation rescues it
    ratios = np.array([printed_mu(ell, E, a) / mu_ell_quadrature(ell, E, a) for E, a in GRID])
    assert np.ptp(ratios) / np.median(ratios) > 1.0


def test_mu_prefactor_other_bessel_normalisation_also_fails():
    # scipy's k_l carries an extra pi/2; the printed prefactor still scales wrongly
    ratios = []
    for E, a in GRID:
        kap = math.sqrt(-E)
        t = kap * a
        v = a / (2 * kap) * special.spherical_in(0, t) * special.spherical_kn(0, t)
        ratios.append(v / mu_ell_quadrature(0, E, a))
    assert np.ptp(ratios) / np.median(ratios) > 1.0


def test_mu_secular_equation_reproduces_s_wave_relation():
    # with a^2 kappa i_0 k_0 the secular equation gives alpha = -kappa(1 + coth(kappa a))
    for kap, a in ((0.7, 0.5), (1.0, 1.0), (2.5, 1.8)):
        alpha = -kap * (1 + 1 / math.tanh(kap * a))
        assert 1 + alpha * mu_ell(0, -kap * kap, a) == pytest.approx(0.0, abs=1e-14)
        assert abs(1 + alpha * printed_mu(0, -kap * kap, a)) > 1e-2


# ---------------------------------------------------------------------------
# Bessel Wronskian sign


@pytest.mark.parametrize("ell", [0, 1, 2, 5])
def test_wronskian_sign_is_positive(ell):
    t = np.linspace(0.2, 8.0, 15)
    w = sph_i_prime(ell, t) * sph_k_array(ell, t)[ell] - sph_i_array(ell, t)[ell] * sph_k_prime(ell, t)
    assert np.allclose(t * t * w, 1.0, rtol=1e-12)
    # -1/t^2 is violated in sign
    assert np.all(t * t * w > 0)


def test_wronskian_sign_independent_of_normalisation():
    # scipy: i_l' k_l - i_l k_l' = +pi/(2 t^2); positive whatever the constant in k_l
    t = np.linspace(0.2, 8.0, 15)
    for ell in range(4):
        w = special.spherical_in(ell, t, derivative=True) * special.spherical_kn(ell, t) - special.spherical_in(
            ell, t
        ) * special.spherical_kn(ell, t, derivative=True)
        assert np.allclose(w * t * t, math.pi / 2, rtol=1e-10)


def test_wronskian_sign_from_mpmath():
    mpmath = pytest.importorskip("mpmath")
    t = mpmath.mpf("1.3")
    i0 = lambda x: mpmath.sinh(x) / x
    k0 = lambda x: mpmath.exp(-x) / x
    w = mpmath.diff(i0, t) * k0(t) - i0(t) * mpmath.diff(k0, t)
    assert float(w * t * t) == pytest.approx(1.0, rel=1e-14)


# ---------------------------------------------------------------------------
# Agmon action display


def test_agmon_literal_integral_matches_neither_display():
    E0, a, F = -1.0, 0.3, 0.05
    c = agmon_candidates(E0, a, F)
    S = agmon_action(E0, a, F)
    assert S == pytest.approx(c["antiderivative"], rel=1e-12)
    assert abs(S / c["closed_form"] - 1) > 0.1
    assert abs(S / c["asymptote"] - 1) > 0.1


def test_agmon_limit_differs_from_printed_asymptote():
    limit = 2 / 3 * (2**1.5 - 1)
    for F in (1e-2, 1e-3, 1e-4):
        assert agmon_action(-1.0, 0.0, F) * F == pytest.approx(limit, rel=1e-12)
    assert limit / (2 / 3) == pytest.approx(2**1.5 - 1)


def test_width_law_confirms_asymptote_not_literal_integral():
    # Gamma ~ exp(-2 S): fitted c tracks 2 F S for the asymptote, not the literal integral
    traj = sweep(ShellParams(0.0, -2.0), np.geomspace(0.03, 0.12, 10))
    c = width_fit(traj, -1.0).c
    from_asymptote = 2 * (2 / 3)
    from_literal = 2 * 2 / 3 * (2**1.5 - 1)
    assert abs(c / from_asymptote - 1) < 0.03
    assert abs(c / from_literal - 1) > 0.4


# ---------------------------------------------------------------------------
# Further variants found while building


def test_mu0_prime_grouping():
    kap, a = 1.0, 1.0
    x = 2 * kap * a
    printed = 1 - (1 + x) * math.exp(-x) / (4 * kap**3)
    fixed = (1 - (1 + x) * math.exp(-x)) / (4 * kap**3)
    fd = mu_prime(0, -kap * kap, a, method="fd")
    assert fixed == pytest.approx(fd, rel=1e-9)
    assert mu_prime(0, -1.0, 1.0) == pytest.approx(fixed, rel=1e-14)
    assert abs(printed / fd - 1) > 1


def test_a2_coupling_sign_confirmed_by_3d_root():
    shell = ShellParams(1.0, s_wave_strength(1.0, 1.0))
    res = a2_coefficient(shell)
    m1 = list(res.m1_by_m.values())
    plus = a2_from_elements(shell.alpha, res.mu0_prime, res.mu1_at_E0, m1, res.m2_elem, 1.0)
    minus = a2_from_elements(shell.alpha, res.mu0_prime, res.mu1_at_E0, m1, res.m2_elem, -1.0)
    F = 0.05
    z = find_resonance_3d(-1.0, DEFAULT_THETA, ShellParams(1.0, shell.alpha, F), 6, check_truncation=False).z
    measured = (z.real + 1.0) / F**2
    assert abs(measured - plus) < 0.01 * abs(plus)
    assert abs(measured - minus) > 0.5 * abs(plus)
