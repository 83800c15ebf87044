"""Zero-field partial-wave analysis of the delta-shell operator.

At F = 0 the boundary Weyl operator of the sphere |x| = a is diagonal in
spherical harmonics, M_0(z) Y_lm = mu_l(z) Y_lm, with

    mu_l(z) = a**2 * kappa * i_l(kappa a) * k_l(kappa a),   kappa = sqrt(-z),

and the bound states of -Delta + alpha delta(|x| - a) are the negative roots
of 1 + alpha mu_l(E) = 0.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import ConvergenceError, DomainError
from .specfun import sph_i_array, sph_k_array

SHALLOW_ENERGY = 1e-10
MAX_ITERATIONS = 200


@dataclass(frozen=True)
class ShellParams:
    """Sphere radius ``a``, wall strength ``alpha`` and field ``F`` (d = 3)."""

    a: float
    alpha: float
    F: float = 0.0

    def __post_init__(self):
        for name in ("a", "alpha", "F"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.a < 0:
            raise DomainError("radius must be non-negative")

    def scaled(self, lam: float) -> "ShellParams":
        """Dilated configuration (lam a, alpha / lam, F / lam**3)."""
        return ShellParams(self.a * lam, self.alpha / lam, self.F / lam**3)


@dataclass(frozen=True)
class PartialWaveBoundState:
    ell: int
    energy: float
    kappa: float
    multiplicity: int
    shallow: bool = False


def _kappa(z) -> complex:
    """Principal sqrt(-z), Re kappa > 0 away from the positive axis."""
    return cmath.sqrt(-complex(z))


def mu_all(lmax: int, z, a: float) -> np.ndarray:
    """mu_0(z), ..., mu_lmax(z) for complex z off [0, inf)."""
    kap = _kappa(z)
    t = kap * a
    # e^{-t} i_l and e^{t} k_l keep the product finite for large kappa a
    vals = a * a * kap * sph_i_array(lmax, t, scaled=True) * sph_k_array(lmax, t, scaled=True)
    # closed form for l = 0 stays accurate for tiny kappa
    vals[0] = -np.expm1(-2.0 * t) / (2.0 * kap) if abs(t) > 1e-300 else a
    return vals


def mu_ell(ell: int, E: float, a: float) -> float:
    """Zero-field partial-wave Weyl function at a negative energy."""
    if not E < 0:
        raise DomainError(f"mu_ell needs E < 0, got {E}")
    if a <= 0:
        raise DomainError("radius must be positive")
    kap = math.sqrt(-E)
    if ell == 0:
        return -math.expm1(-2.0 * kap * a) / (2.0 * kap)
    t = kap * a
    iv = sph_i_array(ell, t, scaled=True)[ell]
    kv = sph_k_array(ell, t, scaled=True)[ell]
    return float(a * a * kap * iv * kv)


def _mu_dkappa(ell: int, kap: float, a: float) -> float:
    t = kap * a
    iv = sph_i_array(ell + 1, t)
    kv = sph_k_array(ell + 1, t)
    if ell == 0:
        di, dk = iv[1], -kv[1]
    else:
        di = iv[ell - 1] - (ell + 1) / t * iv[ell]
        dk = -kv[ell - 1] - (ell + 1) / t * kv[ell]
    return a * a * (iv[ell] * kv[ell] + t * (di * kv[ell] + iv[ell] * dk))


def mu_prime(ell: int, E: float, a: float, method: str = "analytic") -> float:
    """d mu_l / dE at a negative energy.

    ``method="analytic"`` differentiates the Bessel product through the
    recurrences (and uses the closed form for l = 0); ``method="fd"`` is the
    Richardson-extrapolated central difference with relative step 1e-5.
    """
    if not E < 0:
        raise DomainError(f"mu_prime needs E < 0, got {E}")
    kap = math.sqrt(-E)
    if method == "fd":
        h = 1e-5 * abs(E)

        def cd(step):
            return (mu_ell(ell, E + step, a) - mu_ell(ell, E - step, a)) / (2 * step)

        return (4.0 * cd(h / 2) - cd(h)) / 3.0
    if ell == 0:
        x = 2.0 * kap * a
        return (-math.expm1(-x) - x * math.exp(-x)) / (4.0 * kap**3)
    return float(_mu_dkappa(ell, kap, a) * (-1.0 / (2.0 * kap)))


def critical_strength(ell: int, a: float) -> float:
    """Binding threshold: channel l binds iff alpha < -(2l+1)/a.

    Follows from mu_l(E) -> a / (2l+1) as E -> 0-.
    """
    if a <= 0:
        raise DomainError("radius must be positive")
    return -(2 * ell + 1) / a


def _secular(ell, kap, params):
    return 1.0 + params.alpha * mu_ell(ell, -kap * kap, params.a)


def _solve_channel(ell: int, params: ShellParams) -> PartialWaveBoundState:
    a, alpha = params.a, params.alpha
    t_lo = 1e-6 if ell <= 10 else 1e-2
    lo, hi = t_lo / a, abs(alpha)
    g_lo, g_hi = _secular(ell, lo, params), _secular(ell, hi, params)
    if g_lo >= 0:
        kap = lo
        warnings.warn(
            f"channel l={ell}: bound state shallower than kappa={lo:.3g}",
            RuntimeWarning,
        )
        return PartialWaveBoundState(ell, -kap * kap, kap, 2 * ell + 1, True)
    if g_hi <= 0:
        raise ConvergenceError(
            "secular function does not change sign", ell=ell, bracket=(lo, hi)
        )
    it = 0
    while hi - lo > 1e-3 * hi:
        mid = 0.5 * (lo + hi)
        if _secular(ell, mid, params) < 0:
            lo = mid
        else:
            hi = mid
        it += 1
    kap = 0.5 * (lo + hi)
    while it < MAX_ITERATIONS:
        it += 1
        g = _secular(ell, kap, params)
        # 1 + alpha mu cannot be resolved below a few ulps of 1
        if abs(g) <= 4 * np.finfo(float).eps:
            break
        if g < 0:
            lo = max(lo, kap)
        else:
            hi = min(hi, kap)
        if hi - lo <= 8e-16 * hi:
            break
        dg = alpha * _mu_dkappa(ell, kap, a)
        new = kap - g / dg if dg != 0 else 0.5 * (lo + hi)
        if not lo <= new <= hi:
            new = 0.5 * (lo + hi)
        if abs(new - kap) <= 4e-16 * kap:
            kap = new
            break
        kap = new
    else:
        raise ConvergenceError(
            "bound-state polish did not converge", ell=ell, bracket=(lo, hi), last=kap
        )
    E = -kap * kap
    return PartialWaveBoundState(ell, float(E), float(kap), 2 * ell + 1, bool(abs(E) < SHALLOW_ENERGY))


def find_bound_states(params: ShellParams, ell_max: int) -> list[PartialWaveBoundState]:
    """All negative eigenvalues of the zero-field operator with l <= ell_max.

    The field stored in ``params`` is ignored.  Each binding channel carries
    exactly one state since 1 + alpha mu_l is monotone in kappa.
    """
    if params.a <= 0:
        raise DomainError("radius must be positive")
    if ell_max > 64:
        raise DomainError("ell_max must be <= 64")
    states = [
        _solve_channel(ell, params)
        for ell in range(ell_max + 1)
        if params.alpha < critical_strength(ell, params.a)
    ]
    return sorted(states, key=lambda s: s.energy)


def s_wave_strength(kappa: float, a: float) -> float:
    """Wall strength that puts the s-wave state at E = -kappa**2."""
    return -kappa * (1.0 + 1.0 / math.tanh(kappa * a))


# ---------------------------------------------------------------------------
# Independent oracles


def mu_ell_quadrature(ell: int, E: float, a: float, nodes: int = 96) -> float:
    """mu_l from the surface kernel exp(-kappa R)/(4 pi R) by Funk-Hecke.

    With u = sin(gamma/2) (so cos gamma = 1 - 2u**2) the 1/R singularity
    cancels against the surface element and

        mu_l = a * int_0^1 exp(-2 kappa a u) P_l(1 - 2u**2) du.
    """
    kap = math.sqrt(-E)
    x, w = np.polynomial.legendre.leggauss(nodes)
    u = 0.5 * (x + 1.0)
    c = 1.0 - 2.0 * u * u
    p = np.polynomial.legendre.legval(c, [0] * ell + [1])
    return float(a * 0.5 * np.sum(w * np.exp(-2.0 * kap * a * u) * p))


def _log_derivs(ell: int, kap: float, a: float):
    cent = ell * (ell + 1)

    def rhs(r, y):
        return [y[1], (cent / (r * r) + kap * kap) * y[0]]

    r0 = 1e-3 * a
    c = kap * kap / (2 * (2 * ell + 3))
    u0 = r0 ** (ell + 1) * (1 + c * r0 * r0)
    du0 = (ell + 1) * r0**ell + c * (ell + 3) * r0 ** (ell + 2)
    inner = solve_ivp(rhs, (r0, a), [u0, du0], method="DOP853", rtol=1e-12, atol=1e-300)
    big_r = a + 40.0 / kap
    outer = solve_ivp(
        rhs, (big_r, a), [1e-10, -kap * 1e-10], method="DOP853", rtol=1e-12, atol=1e-300
    )
    ui, dui = inner.y[:, -1]
    uo, duo = outer.y[:, -1]
    return dui / ui, duo / uo


def shooting_bound_state(ell: int, params: ShellParams, scan: int = 400) -> list[float]:
    """Bound energies in channel l from direct radial ODE shooting.

    Integrates -u'' + l(l+1)/r**2 u = E u outwards from the origin and
    inwards from the exponential tail, imposing u'(a+) - u'(a-) = alpha u(a).
    """
    alpha, a = params.alpha, params.a

    def mismatch(kap):
        li, lo = _log_derivs(ell, kap, a)
        return lo - li - alpha

    grid = np.linspace(1e-3 / a, abs(alpha), scan)
    vals = [mismatch(k) for k in grid]
    roots = []
    for k0, k1, v0, v1 in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if np.sign(v0) != np.sign(v1):
            kap = brentq(mismatch, k0, k1, xtol=1e-15, rtol=1e-14)
            roots.append(-kap * kap)
    return roots
