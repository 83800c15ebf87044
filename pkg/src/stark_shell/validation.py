"""Self-check suite behind ``stark-shell validate``.

Each check compares an implementation against an independent oracle or an
exact identity and reports (value, tolerance, passed).
"""

from __future__ import annotations

import math

import numpy as np

from .resonance1d import fd_resolvent_solve, free_resolvent_apply, stark_green_1d
from .specfun import airy, sph_i_array, sph_k_array, sph_i_prime, sph_k_prime
from .weyl3d import (
    DEFAULT_THETA,
    det_p,
    green_by_time_integral_1d,
    stark_propagator_kernel,
    weyl_matrix,
)
from .zerofield import ShellParams, mu_all, mu_ell, mu_ell_quadrature


def bessel_wronskian_error(lmax: int = 10, npts: int = 40) -> float:
    t = np.logspace(-2.0, 1.5, npts)
    worst = 0.0
    for ell in range(lmax + 1):
        w = t * t * (sph_i_prime(ell, t) * sph_k(ell, t) - sph_i(ell, t) * sph_k_prime(ell, t))
        worst = max(worst, float(np.max(np.abs(w - 1.0))))
    return worst


def sph_i(ell, t):
    return sph_i_array(ell, t)[ell]


def sph_k(ell, t):
    return sph_k_array(ell, t)[ell]


def airy_wronskian_error(radius: float = 10.0, n: int = 41, scaled: bool = True) -> float:
    """Worst |pi W(Ai, Bi) - 1| on an n x n grid over |Re z|, |Im z| <= radius.

    Where Ai and Bi are both exponentially large, W is a difference of two
    products of size ~|Ai|**2 and float64 rounding of the values alone limits
    it.  ``scaled=True`` divides by that size, max(1, pi(|Ai Bi'| + |Ai' Bi|)).
    """
    xs = np.linspace(-radius, radius, n)
    worst = 0.0
    for x in xs:
        for y in xs:
            ai, bi = airy(complex(x, y))
            p1 = ai.value * bi.derivative
            p2 = ai.derivative * bi.value
            err = abs(math.pi * (p1 - p2) - 1.0)
            if scaled:
                err /= max(1.0, math.pi * (abs(p1) + abs(p2)))
            worst = max(worst, err)
    return worst


def mu_oracle_error(lmax: int = 5) -> float:
    worst = 0.0
    for E in (-0.5, -1.0, -2.0):
        for a in (0.5, 1.0, 2.0):
            for ell in range(lmax + 1):
                ref = mu_ell_quadrature(ell, E, a)
                worst = max(worst, abs(mu_ell(ell, E, a) / ref - 1.0))
    return worst


def green_pin_error(h: float = 1e-3) -> float:
    """Outgoing Airy Green's function against a finite-difference solve."""
    z, F = 1j, 1.0
    grid = np.arange(-12.0, 12.0 + h / 2, h)
    f = np.exp(-((grid - 0.5) ** 2))
    p = ShellParams(0.0, 0.0, F)
    fd = fd_resolvent_solve(f, z, p, grid)
    ex = free_resolvent_apply(f, z, F, grid)
    core = np.abs(grid) < 6
    return float(np.linalg.norm((fd - ex)[core]) / np.linalg.norm(ex[core]))


def propagator_residual(F: float = 0.4, h: float = 1e-3) -> float:
    x = np.array([0.3, -0.2, 0.5])
    y = np.array([-0.4, 0.1, 0.2])
    t = 0.7 - 0.2j

    def P(xx, tt):
        return stark_propagator_kernel(xx, y, tt, F)

    dt = (P(x, t + h) - P(x, t - h)) / (2 * h)
    lap = sum((P(x + h * e, t) - 2 * P(x, t) + P(x - h * e, t)) / h**2 for e in np.eye(3))
    return float(abs(1j * dt - (-lap + F * x[0] * P(x, t))) / abs(P(x, t)))


def propagator_1d_error(F: float = 0.1) -> float:
    g = green_by_time_integral_1d(0.3, -0.2, -1 + 0.5j, F)
    ref = stark_green_1d(0.3, -0.2, -1 + 0.5j, F)
    return abs(g - ref) / abs(ref)


def zero_field_reduction_error(L_max: int = 4) -> float:
    """Direct surface quadrature of the free kernel vs diag(mu_l)."""
    worst = 0.0
    for z in (-1.0, -0.25, -1 + 0.5j):
        W = weyl_matrix(z, DEFAULT_THETA, ShellParams(1.0, -2.0, 0.0), L_max, method="direct")
        mu = mu_all(L_max, z, 1.0)
        diag = np.diag([mu[ell] for ell, _ in W.index])
        worst = max(worst, float(np.max(np.abs(W.entries - diag))))
    return worst


def zero_field_det(alpha: float = -2.3130352855) -> float:
    W = weyl_matrix(-1.0, DEFAULT_THETA, ShellParams(1.0, alpha, 0.0), 6)
    return abs(det_p(W, alpha).value)


CHECKS = (
    ("bessel_wronskian", bessel_wronskian_error, 1e-10),
    ("airy_wronskian", airy_wronskian_error, 1e-10),
    ("mu_oracle", mu_oracle_error, 1e-8),
    ("green_fd_pin", green_pin_error, 1e-5),
    ("propagator_schrodinger_residual", propagator_residual, 1e-5),
    ("propagator_1d_time_integral", propagator_1d_error, 1e-6),
    ("weyl_zero_field_reduction", zero_field_reduction_error, 1e-6),
    ("det3_zero_field_root", zero_field_det, 1e-6),
)


def run_checks() -> list[dict]:
    rows = []
    for name, fn, tol in CHECKS:
        val = float(fn())
        rows.append({"check": name, "value": val, "tolerance": tol, "passed": bool(val < tol)})
    return rows
