import math

import numpy as np
import pytest

from stark_shell.errors import AccidentalDegeneracyError, ConvergenceError, DomainError
from stark_shell.specfun import sph_i_array, sph_k_array
from stark_shell.starkshift import (
    QuadratureSpec,
    a2_coefficient,
    a2_from_elements,
    calibrate_compact_forms,
    first_order_diagonal,
    m1_element_oracle,
    m2_element_oracle,
    q1,
    q2,
    x1_coupling,
)
from stark_shell.zerofield import ShellParams, mu_ell, mu_prime, s_wave_strength

ALPHA = s_wave_strength(1.0, 1.0)


def test_q1_is_one_over_t():
    for t in np.linspace(0.1, 20, 40):
        assert t * q1(t) == pytest.approx(1.0, rel=1e-12)
    assert q1(1.0) == pytest.approx(1.0, rel=1e-13)


def test_q2_values():
    assert q2(1.0) == pytest.approx((1 - math.exp(-2)) / 2 + 1, rel=1e-13)
    assert q2(2.0) == pytest.approx((1 - math.exp(-4)) / 4 + 0.5, rel=1e-13)
    assert q2(200.0) < 0.01


def test_q_errors():
    with pytest.raises(DomainError):
        q1(0.0)
    with pytest.raises(DomainError):
        q2(-1.0)


def test_golden_elements():
    v1, e1 = m1_element_oracle(-1.0, 1.0)
    v2, e2 = m2_element_oracle(-1.0, 1.0)
    assert v1 == pytest.approx(-0.0548019924385, rel=1e-9)
    assert v2 == pytest.approx(0.0386500875480, rel=1e-9)
    assert e1 < 1e-8 and e2 < 1e-6


def test_m1_against_mpmath_quadrature():
    import mpmath as mp

    mp.mp.dps = 30

    def g(ell, r):
        lo, hi = min(r, 1), max(r, 1)
        i = mp.sqrt(mp.pi / (2 * lo)) * mp.besseli(ell + 0.5, lo)
        k = mp.sqrt(2 / (mp.pi * hi)) * mp.besselk(ell + 0.5, hi)
        return i * k

    integral = mp.quad(lambda r: r**3 * g(0, r) * g(1, r), [0, 1, mp.inf])
    ref = -float(integral) * x1_coupling(0, 1)
    assert m1_element_oracle(-1.0, 1.0)[0] == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("E0,a", [(-1.0, 1.0), (-0.5, 2.0), (-2.0, 0.5)])
def test_element_signs(E0, a):
    assert m1_element_oracle(E0, a)[0] < 0
    assert m2_element_oracle(E0, a)[0] > 0


def test_selection_rules():
    assert m2_element_oracle(-1.0, 1.0, ell_mid=2)[0] == 0.0
    assert first_order_diagonal(-1.0, 1.0) == 0.0
    assert a2_coefficient(ShellParams(1.0, ALPHA)).a1 == 0.0


def test_element_scaling_powers():
    lam = 2.0
    v1 = m1_element_oracle(-1.0, 1.0)[0]
    v2 = m2_element_oracle(-1.0, 1.0)[0]
    assert m1_element_oracle(-1.0 / lam**2, lam)[0] == pytest.approx(lam**4 * v1, rel=1e-8)
    assert m2_element_oracle(-1.0 / lam**2, lam)[0] == pytest.approx(lam**7 * v2, rel=1e-8)


def test_refinement_convergence():
    quad = QuadratureSpec()
    for E0, a in ((-1.0, 1.0), (-0.25, 2.0)):
        for fn in (m1_element_oracle, m2_element_oracle):
            assert fn(E0, a, quad)[1] < 1e-6


def test_unconverged_quadrature_raises():
    quad = QuadratureSpec(16, 16, 20.0, 2, 1e-15)
    with pytest.raises(ConvergenceError) as info:
        m2_element_oracle(-400.0, 3.0, quad)
    assert "levels" in info.value.diagnostics


def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(nodes_inner=8)
    with pytest.raises(DomainError):
        QuadratureSpec(r_cut_multiplier=10)
    with pytest.raises(DomainError):
        QuadratureSpec(refinement_levels=1)


def test_compact_forms_rejected():
    cal = calibrate_compact_forms()
    for name in ("M1", "M2"):
        assert not cal[name].accepted
        assert cal[name].spread > 1e-6
        assert cal[name].ratios.shape == (3, 3)


def test_a2_value_and_pipeline():
    res = a2_coefficient(ShellParams(1.0, ALPHA))
    assert res.E0 == pytest.approx(-1.0, abs=1e-12)
    assert res.mu1_at_E0 == pytest.approx(mu_ell(1, -1.0, 1.0), rel=1e-12)
    assert res.mu0_prime == pytest.approx(mu_prime(0, -1.0, 1.0), rel=1e-12)
    assert res.mu0_prime > 0
    assert res.verified
    assert res.a2 == pytest.approx(-0.38537419, rel=1e-7)
    assert res.m1_by_m[-1] == 0.0 and res.m1_by_m[1] == 0.0


def test_a2_second_order_perturbation_theory():
    # independent route: eigenvalue branch of the 2x2 block {Y00, Y10}
    res = a2_coefficient(ShellParams(1.0, ALPHA))
    b, m2 = res.m1_elem, res.m2_elem

    def smallest_root(F):
        from scipy.optimize import brentq

        def f(E):
            kap = math.sqrt(-E)
            mu0 = -math.expm1(-2 * kap) / (2 * kap)
            mu1 = kap * sph_i_array(1, kap)[1] * sph_k_array(1, kap)[1]
            m1e, m2e = m1_element_oracle(E, 1.0)[0], m2_element_oracle(E, 1.0)[0]
            A = np.array([[1 + ALPHA * (mu0 + F * F * m2e), ALPHA * F * m1e], [ALPHA * F * m1e, 1 + ALPHA * mu1]])
            return np.linalg.det(A)

        return brentq(f, -1.1, -0.95, xtol=1e-15)

    F = 1e-3
    est = (smallest_root(F) + 1.0) / F**2
    assert est == pytest.approx(res.a2, rel=1e-3)
    assert b != 0 and m2 != 0


def test_a2_normalized_vector_form():
    # with phi = Y00/a / sqrt(mu0'), (M0' phi, phi) = 1 and the two forms agree
    res = a2_coefficient(ShellParams(1.0, ALPHA))
    norm = 1 / math.sqrt(res.mu0_prime)
    m2_n = res.m2_elem * norm**2
    m1_n = res.m1_elem * norm
    abstract = -m2_n + ALPHA * m1_n**2 / (1 + ALPHA * res.mu1_at_E0)
    assert abstract == pytest.approx(res.a2, rel=1e-14)


def test_a2_scaling():
    lam = 2.0
    base = a2_coefficient(ShellParams(1.0, ALPHA)).a2
    scaled = a2_coefficient(ShellParams(lam, ALPHA / lam)).a2
    assert scaled == pytest.approx(lam**4 * base, rel=1e-6)


def test_degeneracy_guard():
    mu1 = 0.25
    alpha = -1 / mu1 * (1 + 1e-10)
    with pytest.raises(AccidentalDegeneracyError):
        a2_from_elements(alpha, 0.1, mu1, [0.0, -0.05, 0.0], 0.04)


def test_no_s_wave_state():
    with pytest.raises(DomainError):
        a2_coefficient(ShellParams(1.0, -0.5))
