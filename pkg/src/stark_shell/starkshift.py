"""Quadratic Stark shift of the s-wave bound state.

For a small field the Weyl operator expands as

    M_F(z) = M_0(z) + F M_1(z) + F**2 M_2(z) + O(F**3),
    M_1 = -tau R_0 x_1 R_0 tau*,   M_2 = tau R_0 x_1 R_0 x_1 R_0 tau*,

and the s-wave state moves as E_0 + a_2 F**2 (x_1 only couples l to l +- 1,
so the linear coefficient vanishes).  The matrix elements are computed here
directly from their integral definitions: the free kernel is expanded in
partial waves, angles are reduced with Gaunt coefficients, and the remaining
radial integrals are done by Gauss-Legendre quadrature split at r = a.
Basis functions are Y_lm / a, orthonormal on L2(S_a).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AccidentalDegeneracyError, ConvergenceError, DomainError
from .specfun import gaunt_10, sph_i_array, sph_k_array
from .zerofield import ShellParams, critical_strength, find_bound_states, mu_ell, mu_prime

DEGENERACY_TOL = 1e-8
# Length of one outer radial sub-panel, in units of 1/kappa.
OUTER_PANEL = 5.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Radial quadrature: GL nodes on [0, a] and per outer sub-panel.

    The outer range [a, a + r_cut_multiplier / kappa] is cut into sub-panels
    of length 5/kappa.  ``refinement_levels`` successive doublings of both
    node counts are evaluated and must agree.
    """

    nodes_inner: int = 40
    nodes_outer: int = 40
    r_cut_multiplier: float = 24.0
    refinement_levels: int = 2
    tolerance: float = 1e-6

    def __post_init__(self):
        if min(self.nodes_inner, self.nodes_outer) < 16:
            raise DomainError("quadrature needs at least 16 nodes per panel")
        if self.r_cut_multiplier < 20:
            raise DomainError("r_cut_multiplier must be >= 20")
        if self.refinement_levels < 2:
            raise DomainError("at least two refinement levels are required")

    def refined(self, level: int) -> "QuadratureSpec":
        f = 2**level
        return QuadratureSpec(
            self.nodes_inner * f,
            self.nodes_outer * f,
            self.r_cut_multiplier,
            self.refinement_levels,
            self.tolerance,
        )


@dataclass(frozen=True)
class ShiftResult:
    E0: float
    a1: float
    a2: float
    m1_elem: float
    m2_elem: float
    mu1_at_E0: float
    mu0_prime: float
    oracle_rel_err: float
    verified: bool = True
    m1_by_m: dict = field(default_factory=dict)


def _gl(lo, hi, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def _panels(a, kap, spec):
    """Nodes/weights on [0, a] and on the outer sub-panels."""
    r_in, w_in = _gl(0.0, a, spec.nodes_inner)
    r_cut = a + spec.r_cut_multiplier / kap
    n_sub = max(1, math.ceil(spec.r_cut_multiplier / OUTER_PANEL))
    edges = np.linspace(a, r_cut, n_sub + 1)
    outer = [_gl(lo, hi, spec.nodes_outer) for lo, hi in zip(edges[:-1], edges[1:])]
    r_out = np.concatenate([o[0] for o in outer])
    w_out = np.concatenate([o[1] for o in outer])
    return r_in, w_in, r_out, w_out


def _radial(ell, kap, r, a):
    """i_l(kappa r<) k_l(kappa r>) with the shell radius as second point."""
    lo = np.minimum(r, a)
    hi = np.maximum(r, a)
    return sph_i_array(ell, kap * lo)[ell] * sph_k_array(ell, kap * hi)[ell]


def x1_coupling(ell: int, ellp: int) -> float:
    """<Y_l0, cos(theta) Y_l'0> via the Gaunt coefficient."""
    return math.sqrt(4.0 * math.pi / 3.0) * gaunt_10(ell, ellp)


def _m1_once(E0, a, spec, ell_out=1):
    kap = math.sqrt(-E0)
    ang = x1_coupling(0, ell_out)
    if ang == 0.0:
        return 0.0
    r_in, w_in, r_out, w_out = _panels(a, kap, spec)
    r = np.concatenate([r_in, r_out])
    w = np.concatenate([w_in, w_out])
    integrand = r**3 * _radial(0, kap, r, a) * _radial(ell_out, kap, r, a)
    return -a * a * kap * kap * ang * float(np.sum(w * integrand))


def _m2_once(E0, a, spec, ell_mid=1):
    kap = math.sqrt(-E0)
    ang = x1_coupling(0, ell_mid) ** 2
    if ang == 0.0:
        return 0.0
    r_in, w_in, r_out, w_out = _panels(a, kap, spec)

    def inner_integral(lo, hi, n):
        # GL on [lo, hi] for every outer node at once (rows = outer nodes)
        x, w = np.polynomial.legendre.leggauss(n)
        half = 0.5 * (hi - lo)[:, None]
        rr = half * x[None, :] + 0.5 * (hi + lo)[:, None]
        f = rr**3 * _radial(0, kap, rr, a) * sph_i_array(ell_mid, kap * rr)[ell_mid]
        return np.sum(half * w[None, :] * f, axis=1)

    # symmetric integrand: twice the r < s triangle
    inner_lo = inner_integral(np.zeros_like(r_in), r_in, spec.nodes_inner)
    core = inner_integral(np.zeros(1), np.array([a]), spec.nodes_inner)[0]
    inner_hi = core + inner_integral(np.full_like(r_out, a), r_out, spec.nodes_outer)
    s = np.concatenate([r_in, r_out])
    w = np.concatenate([w_in, w_out])
    inner = np.concatenate([inner_lo, inner_hi])
    outer = s**3 * _radial(0, kap, s, a) * sph_k_array(ell_mid, kap * s)[ell_mid]
    return float(a * a * kap**3 * ang * 2.0 * np.sum(w * outer * inner))


def _refine(fn, E0, a, spec, **kw):
    vals = [fn(E0, a, spec.refined(k), **kw) for k in range(spec.refinement_levels)]
    best = vals[-1]
    scale = max(abs(best), 1e-300)
    err = abs(vals[-1] - vals[-2]) / scale if best != 0.0 else abs(vals[-1] - vals[-2])
    if err > spec.tolerance:
        raise ConvergenceError(
            "radial quadrature not converged",
            levels=vals,
            rel_change=err,
            nodes=(spec.nodes_inner, spec.nodes_outer),
        )
    return best, err


def m1_element_oracle(E0: float, a: float, quad: QuadratureSpec | None = None, ell_out: int = 1):
    """<Y_00/a, M_1(E_0) Y_{l0}/a> from the integral definition.

    Returns ``(value, relative_change_between_last_two_levels)``.
    """
    if not E0 < 0:
        raise DomainError("E0 must be negative")
    return _refine(_m1_once, E0, a, quad or QuadratureSpec(), ell_out=ell_out)


def m2_element_oracle(E0: float, a: float, quad: QuadratureSpec | None = None, ell_mid: int = 1):
    """<Y_00/a, M_2(E_0) Y_00/a> through the intermediate channel ``ell_mid``."""
    if not E0 < 0:
        raise DomainError("E0 must be negative")
    return _refine(_m2_once, E0, a, quad or QuadratureSpec(), ell_mid=ell_mid)


def q1(t: float) -> float:
    """t (i_0 k_1 + i_1 k_0)(t)."""
    if not t > 0:
        raise DomainError("t must be positive")
    iv = sph_i_array(1, t)
    kv = sph_k_array(1, t)
    return float(t * (iv[0] * kv[1] + iv[1] * kv[0]))


def q2(t: float) -> float:
    """i_0(t) k_0(t) + q1(t)."""
    if not t > 0:
        raise DomainError("t must be positive")
    return float(-math.expm1(-2.0 * t) / (2.0 * t)) + q1(t)


def m1_compact(E0: float, a: float) -> float:
    """Candidate closed form -(a/3) Q_1(kappa a) for the M_1 element."""
    return -(a / 3.0) * q1(math.sqrt(-E0) * a)


def m2_compact(E0: float, a: float) -> float:
    """Candidate closed form (a**2/3) Q_2(kappa a) for the M_2 element."""
    return (a * a / 3.0) * q2(math.sqrt(-E0) * a)


@dataclass(frozen=True)
class Calibration:
    """Ratio oracle / compact form over a parameter grid."""

    ratios: np.ndarray
    constant: float
    spread: float
    accepted: bool


def calibrate_compact_forms(
    energies=(-0.5, -1.0, -2.0),
    radii=(0.5, 1.0, 2.0),
    quad: QuadratureSpec | None = None,
    tol: float = 1e-6,
) -> dict[str, Calibration]:
    """Test whether each compact form equals the oracle up to one constant."""
    out = {}
    for name, oracle, compact in (
        ("M1", m1_element_oracle, m1_compact),
        ("M2", m2_element_oracle, m2_compact),
    ):
        ratios = np.array(
            [[oracle(E, a, quad)[0] / compact(E, a) for a in radii] for E in energies]
        )
        const = float(np.median(ratios))
        spread = float(np.max(np.abs(ratios / const - 1.0)))
        out[name] = Calibration(ratios, const, spread, spread < tol)
    return out


def a2_from_elements(alpha, mu0_prime, mu1, m1_elems, m2_elem, coupling_sign=1.0):
    """Second-order coefficient from boundary matrix elements.

    ``m1_elems`` holds <Y_1m, M_1 Y_00> for m = -1, 0, 1 (only m = 0 is
    nonzero for a field along the polar axis).  The Schur complement of
    1 + alpha M_F onto the s-wave gives ``coupling_sign = +1``;
    ``coupling_sign = -1`` reproduces the opposite-sign variant.
    """
    denom = 1.0 + alpha * mu1
    if abs(denom) < DEGENERACY_TOL:
        raise AccidentalDegeneracyError(
            f"1 + alpha mu_1(E0) = {denom:.3e}: p-wave channel is degenerate"
        )
    coupling = sum(abs(v) ** 2 for v in m1_elems) / denom
    return -m2_elem / mu0_prime + coupling_sign * alpha * coupling / mu0_prime


def a2_coefficient(params: ShellParams, quad: QuadratureSpec | None = None) -> ShiftResult:
    """Quadratic Stark coefficient of the s-wave state of ``params``."""
    quad = quad or QuadratureSpec()
    if not params.alpha < critical_strength(0, params.a):
        raise DomainError("no s-wave bound state: alpha >= -1/a")
    s_wave = [s for s in find_bound_states(params, 0) if s.ell == 0][0]
    E0, a, alpha = s_wave.energy, params.a, params.alpha
    mu1 = mu_ell(1, E0, a)
    mu0p = mu_prime(0, E0, a)
    m1, err1 = m1_element_oracle(E0, a, quad)
    m2, err2 = m2_element_oracle(E0, a, quad)
    m1_by_m = {-1: 0.0, 0: m1, 1: 0.0}
    a2 = a2_from_elements(alpha, mu0p, mu1, list(m1_by_m.values()), m2)
    err = max(err1, err2)
    return ShiftResult(
        E0=E0,
        a1=0.0,
        a2=float(a2),
        m1_elem=m1,
        m2_elem=m2,
        mu1_at_E0=mu1,
        mu0_prime=mu0p,
        oracle_rel_err=err,
        verified=err < quad.tolerance,
        m1_by_m=m1_by_m,
    )


def first_order_diagonal(E0: float, a: float, quad: QuadratureSpec | None = None) -> float:
    """<Y_00, M_1 Y_00>: vanishes because gaunt_10(0, 0) = 0."""
    return m1_element_oracle(E0, a, quad, ell_out=0)[0]
