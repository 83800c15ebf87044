"""Complex-argument special functions used throughout the package.

Conventions
-----------
Modified spherical Bessel functions are normalised as

    i_0(t) = sinh(t) / t,        k_0(t) = exp(-t) / t,
    i_1(t) = (t cosh t - sinh t) / t**2,
    k_1(t) = exp(-t) (t + 1) / t**2,

i.e. *without* the pi/2 factor that many texts put in front of k.  With this
choice the free resolvent kernel on a sphere expands as

    exp(-kappa |x-y|) / (4 pi |x-y|)
        = (kappa / 4 pi) sum_l (2l+1) i_l(kappa r<) k_l(kappa r>) P_l(cos g)

and the Wronskian is i_l' k_l - i_l k_l' = +1/t**2.

Airy functions come from the AMOS routines in :mod:`scipy.special`; close to
the real axis a Taylor refinement built from the Airy ODE restores full
relative accuracy of the (tiny) imaginary parts, which the resonance width
computations depend on.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy import special

from .errors import DomainError, UnstableRegimeError

ELL_MAX = 64
# |t| at or below which i_l is summed from its power series.
SERIES_RADIUS = 1.0
# Near-real Airy refinement is used when |Im z| * sqrt(max(1, |z|)) < this.
AIRY_TAYLOR_RADIUS = 0.05
AIRY_TAYLOR_TERMS = 18


def _check_ell(ell: int) -> None:
    if ell < 0:
        raise DomainError(f"order must be non-negative, got {ell}")
    if ell > ELL_MAX:
        raise UnstableRegimeError(
            f"order {ell} exceeds the validated range ell <= {ELL_MAX}"
        )


def _as_array(t):
    arr = np.asarray(t)
    real_input = not np.iscomplexobj(arr)
    return arr.astype(complex), real_input


def _finish(values, real_input):
    return values.real if real_input else values


def _sph_i_series(lmax: int, t: np.ndarray) -> np.ndarray:
    out = np.empty((lmax + 1,) + t.shape, dtype=complex)
    half_t2 = 0.5 * t * t
    pref = np.ones_like(t)
    for ell in range(lmax + 1):
        if ell > 0:
            pref = pref * t / (2 * ell + 1)
        term = np.ones_like(t)
        total = np.ones_like(t)
        for k in range(1, 30):
            term = term * half_t2 / (k * (2 * ell + 2 * k + 1))
            total = total + term
        out[ell] = pref * total
    return out


def _sph_i_miller(lmax: int, t: np.ndarray, scaled: bool = False) -> np.ndarray:
    """Downward recurrence normalised by sum (2l+1) i_l(t) = exp(t).

    With ``scaled`` the result is multiplied by exp(-t).
    """
    tmax = float(np.max(np.abs(t))) if t.size else 0.0
    top = max(lmax, int(tmax)) + 20 + int(math.sqrt(40.0 * max(lmax, tmax, 1.0)))
    flip = t.real < 0  # use sum (2l+1)(-1)^l i_l = exp(-t) there
    sign = np.where(flip, -1.0, 1.0)
    out = np.zeros((lmax + 1,) + t.shape, dtype=complex)
    f_next = np.zeros_like(t)
    f_cur = np.full_like(t, 1e-30)
    norm = (2 * top + 1) * f_cur * sign**top
    for n in range(top, 0, -1):
        if n <= lmax:
            out[n] = f_cur
        f_prev = f_next + (2 * n + 1) / t * f_cur
        norm = norm + (2 * (n - 1) + 1) * f_prev * sign ** (n - 1)
        f_next, f_cur = f_cur, f_prev
        big = np.abs(f_cur) > 1e200
        if np.any(big):
            scale = np.where(big, 1e-200, 1.0)
            f_cur = f_cur * scale
            f_next = f_next * scale
            norm = norm * scale
            out[n - 1 :] = out[n - 1 :] * scale
    out[0] = f_cur
    if scaled:
        target = np.where(flip, np.exp(-2 * t), 1.0)
    else:
        target = np.where(flip, np.exp(-t), np.exp(t))
    return out * (target / norm)


def sph_i_array(lmax: int, t, scaled: bool = False) -> np.ndarray:
    """Return ``i_0(t), ..., i_lmax(t)`` stacked along the first axis.

    ``scaled=True`` returns exp(-t) i_l(t), finite for large Re t.
    """
    _check_ell(lmax)
    arr, real_input = _as_array(t)
    if np.any(arr == 0):
        raise DomainError("i_l(t) is evaluated only for t != 0")
    out = np.empty((lmax + 1,) + arr.shape, dtype=complex)
    small = np.abs(arr) <= SERIES_RADIUS
    if np.any(small):
        out[:, small] = _sph_i_series(lmax, arr[small])
        if scaled:
            out[:, small] *= np.exp(-arr[small])
    if np.any(~small):
        out[:, ~small] = _sph_i_miller(lmax, arr[~small], scaled)
    return _finish(out, real_input)


def sph_k_array(lmax: int, t, scaled: bool = False) -> np.ndarray:
    """Return ``k_0(t), ..., k_lmax(t)`` by upward recurrence.

    ``scaled=True`` returns exp(t) k_l(t).
    """
    _check_ell(lmax)
    arr, real_input = _as_array(t)
    if np.any(arr == 0):
        raise DomainError("k_l(t) is singular at t = 0")
    if real_input and np.any(arr.real < 0):
        raise DomainError("k_l(t) needs Re t > 0 or non-real t")
    out = np.empty((lmax + 1,) + arr.shape, dtype=complex)
    out[0] = (1.0 if scaled else np.exp(-arr)) / arr
    if lmax >= 1:
        out[1] = out[0] * (1.0 + 1.0 / arr)
    for n in range(1, lmax):
        out[n + 1] = out[n - 1] + (2 * n + 1) / arr * out[n]
    return _finish(out, real_input)


def _derivs(vals: np.ndarray, t, sign: float) -> np.ndarray:
    """d/dt f_l = sign * f_{l-1} - (l+1)/t f_l, and f_0' = sign * f_1."""
    lmax = vals.shape[0] - 1
    out = np.empty_like(vals)
    out[0] = sign * vals[1]
    for n in range(1, lmax):
        out[n] = sign * vals[n - 1] - (n + 1) / t * vals[n]
    return out[:lmax]


def sph_i(ell: int, t):
    """Modified spherical Bessel function of the first kind, i_l(t)."""
    vals = sph_i_array(ell, t)
    return vals[ell][()]


def sph_k(ell: int, t):
    """Modified spherical Bessel function of the second kind, k_l(t)."""
    vals = sph_k_array(ell, t)
    return vals[ell][()]


def sph_i_prime(ell: int, t):
    """Derivative i_l'(t) from the three-term recurrence."""
    vals = sph_i_array(ell + 1, t)
    return _derivs(vals, np.asarray(t), 1.0)[ell][()]


def sph_k_prime(ell: int, t):
    """Derivative k_l'(t) from the three-term recurrence."""
    vals = sph_k_array(ell + 1, t)
    return _derivs(vals, np.asarray(t), -1.0)[ell][()]


# ---------------------------------------------------------------------------
# Airy functions


class AiryPair(NamedTuple):
    """Value and first derivative of one Airy-type solution."""

    value: complex
    derivative: complex


def _airy_taylor(x: float, eta: float):
    """Ai, Ai', Bi, Bi' at x + i*eta from real data at x.

    Taylor coefficients obey f^(n+2) = x f^(n) + n f^(n-1).
    """
    ai, aip, bi, bip = special.airy(x)
    res = []
    for f0, f1 in ((ai, aip), (bi, bip)):
        d = [f0, f1]
        for n in range(0, AIRY_TAYLOR_TERMS):
            d.append(x * d[n] + (n * d[n - 1] if n >= 1 else 0.0))
        h = 1j * eta
        val = 0j
        der = 0j
        p = 1.0 + 0j
        for n in range(AIRY_TAYLOR_TERMS):
            val += d[n] * p
            der += d[n + 1] * p
            p = p * h / (n + 1)
        res.extend([val, der])
    return res


def _airy_raw(z: complex):
    z = complex(z)
    if z.imag != 0.0 and abs(z.imag) * math.sqrt(max(1.0, abs(z.real))) < AIRY_TAYLOR_RADIUS:
        return _airy_taylor(z.real, z.imag)
    ai, aip, bi, bip = special.airy(z)
    return [complex(ai), complex(aip), complex(bi), complex(bip)]


def airy(z) -> tuple[AiryPair, AiryPair]:
    """Ai, Ai', Bi, Bi' at a complex argument.

    Raises ``OverflowError`` when Bi is not representable (large positive
    real part); use :func:`airy_scaled` in that regime.
    """
    z = complex(z)
    if abs(z) > 1e4:
        raise DomainError("airy() is validated for |z| <= 1e4")
    ai, aip, bi, bip = _airy_raw(z)
    if not all(np.isfinite(v) for v in (ai, aip, bi, bip)):
        raise OverflowError(f"Airy functions not representable at z={z}")
    return AiryPair(ai, aip), AiryPair(bi, bip)


def airy_scaled(z):
    """Exponentially scaled Airy functions (scipy ``airye`` convention).

    Returns ``(eAi, eAi', eBi, eBi', zeta)`` with zeta = (2/3) z**1.5 and
    eAi = Ai exp(zeta), eBi = Bi exp(-|Re zeta|).
    """
    z = complex(z)
    eai, eaip, ebi, ebip = special.airye(z)
    zeta = (2.0 / 3.0) * z**1.5
    return complex(eai), complex(eaip), complex(ebi), complex(ebip), zeta


def airy_outgoing(z) -> AiryPair:
    """Ci = Bi + i Ai: the solution that is outgoing as z -> -infinity."""
    ai, bi = airy(z)
    return AiryPair(bi.value + 1j * ai.value, bi.derivative + 1j * ai.derivative)


def airy_incoming(z) -> AiryPair:
    """Bi - i Ai, the time-reversed partner of :func:`airy_outgoing`."""
    ai, bi = airy(z)
    return AiryPair(bi.value - 1j * ai.value, bi.derivative - 1j * ai.derivative)


# ---------------------------------------------------------------------------
# Angular functions


def gaunt_10(ell: int, ellp: int) -> float:
    """Integral of Y_{l0} Y_{10} Y_{l'0} over the unit sphere."""
    if ell < 0 or ellp < 0:
        raise DomainError("angular momenta must be non-negative")
    if abs(ell - ellp) != 1:
        return 0.0
    lo = min(ell, ellp)
    return math.sqrt(3.0 / (4.0 * math.pi)) * (lo + 1) / math.sqrt(
        (2 * lo + 1) * (2 * lo + 3)
    )


def cos_matrix_element(ell: int, ellp: int, m: int = 0) -> float:
    """<Y_{lm}, cos(theta) Y_{l'm}> on the unit sphere."""
    if abs(ell - ellp) != 1:
        return 0.0
    hi = max(ell, ellp)
    if abs(m) >= hi:
        return 0.0
    return math.sqrt((hi * hi - m * m) / ((2 * hi - 1) * (2 * hi + 1)))


def sph_harm_table(lmax: int, x) -> np.ndarray:
    """Normalised associated Legendre functions.

    Returns ``T[l, m, ...]`` for 0 <= m <= l <= lmax such that
    Y_{lm}(theta, phi) = T[l, m](cos theta) * exp(i m phi) is orthonormal on
    the unit sphere (Condon-Shortley phase included).  Entries with m > l
    are zero.
    """
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    out = np.zeros((lmax + 1, lmax + 1) + x.shape)
    out[0, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    for m in range(1, lmax + 1):
        out[m, m] = -math.sqrt((2 * m + 1) / (2.0 * m)) * s * out[m - 1, m - 1]
    for m in range(0, lmax):
        out[m + 1, m] = math.sqrt(2 * m + 3) * x * out[m, m]
    for m in range(0, lmax + 1):
        for ell in range(m + 2, lmax + 1):
            a = math.sqrt((4 * ell * ell - 1) / (ell * ell - m * m))
            b = math.sqrt(((ell - 1) ** 2 - m * m) / (4 * (ell - 1) ** 2 - 1))
            out[ell, m] = a * (x * out[ell - 1, m] - b * out[ell - 2, m])
    return out
