"""One-dimensional Stark model with a point interaction.

    H = -d^2/dx^2 + F x + alpha delta(x - a)   on L2(R),  F > 0.

The free Stark Green's function is built from Airy functions of
xi(x) = F**(1/3) (x - z/F):

    G_F(x, y; z) = (pi / F**(1/3)) Ci(xi(x<)) Ai(xi(x>)),   Ci = Bi + i Ai,

which decays for x -> +inf, is outgoing for x -> -inf and is entire in z, so
it continues the resolvent kernel from Im z > 0 into the lower half-plane.
Resonances are the zeros of D(z) = 1 + alpha G_F(a, a; z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.linalg import solve_banded

from .errors import ConvergenceError, DomainError, NearPoleError, WidthUnderflowError
from .specfun import airy, airy_scaled
from .zerofield import ShellParams

# Fixed Green's-function sign, pinned against a finite-difference solve.
GREEN_SIGN = 1.0
# Beyond this |Re zeta| the scaled Airy representation is used.
SCALED_SWITCH = 600.0
NEWTON_MAX_ITER = 100
MIN_WIDTH = 1e-280


@dataclass(frozen=True)
class ResonancePoint:
    z: complex
    width: float
    F: float
    newton_residual: float
    iterations: int
    residual_history: tuple = ()


@dataclass
class Trajectory:
    points: list = field(default_factory=list)
    params: ShellParams | None = None

    @property
    def F(self) -> np.ndarray:
        return np.array([p.F for p in self.points])

    @property
    def z(self) -> np.ndarray:
        return np.array([p.z for p in self.points])

    @property
    def widths(self) -> np.ndarray:
        return np.array([p.width for p in self.points])


@dataclass(frozen=True)
class WidthFit:
    c: float
    b: float
    logC: float
    rms_residual: float
    F_window: tuple
    n_points: int
    c_expected: float

    @property
    def c_rel_error(self) -> float:
        return abs(self.c - self.c_expected) / self.c_expected


class AntiResonanceError(ConvergenceError):
    """Newton converged to a zero in the upper half-plane."""


# ---------------------------------------------------------------------------
# Green's function


def _xi(x, z, F):
    return F ** (1.0 / 3.0) * (x - z / F)


def _ci_ai_product(xl: complex, xg: complex, incoming: bool = False) -> complex:
    """Ci(xl) * Ai(xg), switching to scaled Airy functions when needed."""
    zeta_l = (2.0 / 3.0) * complex(xl) ** 1.5
    zeta_g = (2.0 / 3.0) * complex(xg) ** 1.5
    s = -1.0 if incoming else 1.0
    if max(abs(zeta_l.real), abs(zeta_g.real)) < SCALED_SWITCH:
        ai_l, bi_l = airy(xl)
        ai_g, _ = airy(xg)
        return (bi_l.value + s * 1j * ai_l.value) * ai_g.value
    eai_l, _, ebi_l, _, zl = airy_scaled(xl)
    eai_g, _, _, _, zg = airy_scaled(xg)
    return eai_g * (
        ebi_l * np.exp(abs(zl.real) - zg) + s * 1j * eai_l * np.exp(-zl - zg)
    )


def _green(x: float, y: float, z: complex, F: float, incoming: bool = False) -> complex:
    if F == 0.0:
        kap = np.sqrt(-complex(z))
        if incoming:
            kap = -kap
        return np.exp(-kap * abs(x - y)) / (2.0 * kap)
    lo, hi = min(x, y), max(x, y)
    pre = GREEN_SIGN * math.pi / F ** (1.0 / 3.0)
    return pre * _ci_ai_product(_xi(lo, z, F), _xi(hi, z, F), incoming)


def stark_green_1d(x: float, y: float, z: complex, F: float) -> complex:
    """Outgoing Green's function of -d^2/dx^2 + F x at energy z."""
    if not F > 0:
        raise DomainError("stark_green_1d needs F > 0")
    return _green(float(x), float(y), complex(z), float(F))


def boundary_condition(zc: complex, params: ShellParams, incoming: bool = False) -> complex:
    """Scalar boundary determinant D(z) = 1 + alpha G_F(a, a; z).

    ``incoming=True`` uses Bi - i Ai instead (the time-reversed branch).
    """
    if not params.F > 0:
        raise DomainError("boundary_condition needs F > 0")
    return 1.0 + params.alpha * _green(params.a, params.a, complex(zc), params.F, incoming)


# ---------------------------------------------------------------------------
# Root finding


def _newton(fun, seed: complex, tol: float = 1e-12):
    z = complex(seed)
    history = []
    for it in range(1, NEWTON_MAX_ITER + 1):
        d = fun(z)
        history.append(abs(d))
        h = 1e-7 * (1.0 + abs(z))
        deriv = (fun(z + h) - fun(z - h)) / (2.0 * h)
        if deriv == 0 or not np.isfinite(deriv):
            raise ConvergenceError("vanishing derivative", last=z, history=history)
        step = d / deriv
        z = z - step
        if not np.isfinite(z):
            raise ConvergenceError("Newton iteration diverged", last=z, history=history)
        if abs(d) < tol and abs(step) < tol:
            return z, abs(fun(z)), it, tuple(history)
        # step tolerance relative to the (possibly tiny) imaginary part
        if abs(step) < 1e-15 * abs(z) and abs(d) < tol:
            return z, abs(fun(z)), it, tuple(history)
    raise ConvergenceError("Newton iteration did not converge", last=z, history=history)


def find_resonance(seed: complex, params: ShellParams, incoming: bool = False) -> ResonancePoint:
    """Complex Newton on D(z) from ``seed``.

    A zero in the upper half-plane (only reachable on the incoming branch) is
    an anti-resonance and raises :class:`AntiResonanceError`.
    """
    z, res, it, hist = _newton(lambda w: boundary_condition(w, params, incoming), seed)
    if z.imag > 1e-14:
        raise AntiResonanceError("converged to an upper half-plane zero", root=z)
    return ResonancePoint(z, -2.0 * z.imag, params.F, res, it, hist)


def zero_field_energy(params: ShellParams) -> float:
    """Bound state of -d^2/dx^2 + alpha delta(x - a): E = -alpha^2/4."""
    if not params.alpha < 0:
        raise DomainError("the 1D point interaction binds only for alpha < 0")
    return -0.25 * params.alpha**2


def sweep(params_base: ShellParams, F_values, seed: complex | None = None) -> Trajectory:
    """Continue the zero-field bound state through increasing field values."""
    F_values = [float(f) for f in F_values]
    if any(f <= 0 for f in F_values):
        raise DomainError("field values must be positive")
    if any(b <= a for a, b in zip(F_values, F_values[1:])):
        raise DomainError("field values must be strictly increasing")
    traj = Trajectory([], params_base)
    if not F_values:
        return traj
    guess = complex(zero_field_energy(params_base) if seed is None else seed)
    for k, F in enumerate(F_values):
        if k >= 2:
            p1, p2 = traj.points[-2], traj.points[-1]
            guess = p2.z + (p2.z - p1.z) * (F - p2.F) / (p2.F - p1.F)
        elif k == 1:
            guess = traj.points[-1].z
        params = ShellParams(params_base.a, params_base.alpha, F)
        try:
            point = find_resonance(guess, params)
        except ConvergenceError as exc:
            exc.diagnostics["F"] = F
            raise
        traj.points.append(point)
    return traj


# ---------------------------------------------------------------------------
# Width law


def agmon_action(E0: float, a: float, F: float) -> float:
    """int_a^{-E0/F} sqrt(F s - E0) ds, by Gauss-Legendre quadrature.

    With u = sqrt(F s - E0) the integrand becomes 2 u**2 / F, which a
    20-point rule integrates exactly.
    """
    if not (F > 0 and E0 < 0):
        raise DomainError("agmon_action needs F > 0 and E0 < 0")
    upper = -E0 / F
    if upper <= a:
        raise DomainError("no barrier: -E0/F <= a")
    ua, ub = math.sqrt(F * a - E0), math.sqrt(F * upper - E0)
    x, w = np.polynomial.legendre.leggauss(20)
    u = 0.5 * (ub - ua) * x + 0.5 * (ub + ua)
    return float(0.5 * (ub - ua) * np.sum(w * 2.0 * u * u / F))


def agmon_candidates(E0: float, a: float, F: float) -> dict[str, float]:
    """The literal integral next to the closed forms it is compared with."""
    e = abs(E0)
    return {
        "quadrature": agmon_action(E0, a, F),
        "antiderivative": 2.0 / (3.0 * F) * ((2 * e) ** 1.5 - (F * a + e) ** 1.5),
        "closed_form": 2.0 / (3.0 * F) * (F * a + e) ** 1.5,
        "asymptote": 2.0 / (3.0 * F) * e**1.5,
        "downfield_barrier": 2.0 / (3.0 * F) * max(e - F * a, 0.0) ** 1.5,
    }


def width_fit(traj: Trajectory, E0: float, weights=None) -> WidthFit:
    """Least squares of log G = logC + b log F - c/F over the trajectory."""
    F = traj.F
    gam = traj.widths
    if len(F) < 6:
        raise DomainError("width fit needs at least 6 points")
    if np.any(gam <= MIN_WIDTH):
        raise WidthUnderflowError(
            "widths at or below 1e-280; use a larger-F window", widths=gam.tolist()
        )
    A = np.column_stack([np.ones_like(F), np.log(F), -1.0 / F])
    y = np.log(gam)
    w = np.ones_like(F) if weights is None else np.asarray(weights, dtype=float)
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], y * sw, rcond=None)
    resid = y - A @ coef
    return WidthFit(
        c=float(coef[2]),
        b=float(coef[1]),
        logC=float(coef[0]),
        rms_residual=float(np.sqrt(np.mean(resid**2))),
        F_window=(float(F.min()), float(F.max())),
        n_points=len(F),
        c_expected=4.0 / 3.0 * abs(E0) ** 1.5,
    )


# ---------------------------------------------------------------------------
# Krein resolvent formula


def _solutions(x: np.ndarray, z: complex, F: float):
    """Left (outgoing) and right (decaying) solutions and 1/Wronskian factor."""
    if F == 0.0:
        kap = np.sqrt(-complex(z))
        return np.exp(kap * x), np.exp(-kap * x), 1.0 / (2.0 * kap)
    xi = _xi(x, z, F)
    ai, _, bi, _ = special.airy(xi.astype(complex))
    return bi + 1j * ai, ai, GREEN_SIGN * math.pi / F ** (1.0 / 3.0)


def free_resolvent_apply(f: np.ndarray, z: complex, F: float, grid: np.ndarray) -> np.ndarray:
    """(R_0(z) f)(x) on the grid, via the separable Green's function."""
    uL, uR, c = _solutions(grid, z, F)
    left = cumulative_trapezoid(uL * f, grid, initial=0.0)
    # integrate the right piece from the far end to avoid cancellation
    right = -cumulative_trapezoid((uR * f)[::-1], grid[::-1], initial=0.0)[::-1]
    return c * (uR * left + uL * right)


def krein_apply_1d(f_samples, zc: complex, params: ShellParams, grid) -> np.ndarray:
    """Perturbed resolvent applied to ``f`` through the Krein formula.

    R_alpha f = R_0 f - G(., a) alpha / (1 + alpha G(a, a)) (R_0 f)(a)
    """
    zc = complex(zc)
    if not zc.imag > 0:
        raise DomainError("krein_apply_1d works in the resolvent regime Im z > 0")
    grid = np.asarray(grid, dtype=float)
    f = np.asarray(f_samples, dtype=complex)
    F, a, alpha = params.F, params.a, params.alpha
    r0f = free_resolvent_apply(f, zc, F, grid)
    g_col = _green_column(grid, a, zc, F)
    r0f_a = trapezoid(g_col * f, grid)
    denom = 1.0 + alpha * _green(a, a, zc, F)
    if abs(denom) < 1e-10:
        raise NearPoleError(f"1 + alpha G(a,a;z) = {denom:.2e}")
    return r0f - g_col * (alpha / denom) * r0f_a


def _green_column(grid, a, z, F):
    uL, uR, c = _solutions(grid, z, F)
    uLa, uRa, _ = _solutions(np.array([a]), z, F)
    return c * np.where(grid <= a, uL * uRa[0], uLa[0] * uR)


def fd_hamiltonian_bands(grid, z, params: ShellParams, outgoing_left: bool = True):
    """Banded matrix of H - z with a grid delta at x = a.

    Right end: Dirichlet.  Left end: Robin condition with the exact outgoing
    log-derivative (ghost node), or Dirichlet when ``outgoing_left`` is off.
    """
    x = np.asarray(grid, dtype=float)
    h = x[1] - x[0]
    n = x.size
    diag = 2.0 / h**2 + params.F * x - z + 0j
    j = int(np.argmin(np.abs(x - params.a)))
    if abs(x[j] - params.a) > 1e-9 * max(1.0, h):
        raise DomainError("the shell point must lie on the grid")
    diag[j] += params.alpha / h
    upper = np.full(n, -1.0 / h**2, dtype=complex)
    lower = np.full(n, -1.0 / h**2, dtype=complex)
    if outgoing_left:
        if params.F == 0.0:
            lam = np.sqrt(-complex(z))
        else:
            ci = airy(_xi(x[0], z, params.F))
            ai, bi = ci
            val = bi.value + 1j * ai.value
            der = bi.derivative + 1j * ai.derivative
            lam = params.F ** (1.0 / 3.0) * der / val
        # ghost u_{-1} = u_1 - 2 h lam u_0
        diag[0] += 2.0 * lam / h
        upper[1] = -2.0 / h**2
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = upper[1:]
    ab[1] = diag
    ab[2, :-1] = lower[:-1]
    return ab


def fd_resolvent_solve(f, z, params: ShellParams, grid, outgoing_left: bool = True):
    """Direct finite-difference solve of (H - z) u = f."""
    ab = fd_hamiltonian_bands(grid, complex(z), params, outgoing_left)
    return solve_banded((1, 1), ab, np.asarray(f, dtype=complex))


def fd_apply(u, z, params: ShellParams, grid, outgoing_left: bool = True):
    """Apply the discrete H - z to grid values ``u``."""
    ab = fd_hamiltonian_bands(grid, complex(z), params, outgoing_left)
    out = ab[1] * u
    out[:-1] += ab[0, 1:] * u[1:]
    out[1:] += ab[2, :-1] * u[:-1]
    return out
