"""Boundary Weyl matrix of the 3D Stark operator on a sphere.

The Stark resolvent kernel is written as a time integral of the
Avron-Herbst propagator,

    G_F(x, y; z) = i int_0^inf exp(i z t) P_t(x, y) dt,
    P_t(x, y) = (4 pi i t)^(-3/2) exp(i|x-y|^2/(4t) - i F t (x1+y1)/2 - i F^2 t^3/12),

for H = -Delta + F x1.  Rotating the contour to t = exp(-i theta) s,
0 < theta < pi/3, makes the integral converge for z in the lower half-plane
as long as Im(z exp(-i theta)) > 0; the result is the analytic continuation
of the boundary operator, and its zeros of det_p(I + alpha M) are the
resonances.  The free part is handled in closed form (diagonal mu_l(z)); only
the smooth difference kernel P^F - P^0 is integrated numerically.

Surface integrals use a rotated-pole rule: for every target point the
source sphere is parametrised by the geodesic angle gamma and azimuth beta
around it, which also removes the 1/R singularity of the free kernel.
The field axis x1 is the polar axis of the spherical harmonics, so the
matrix is block diagonal in m.
"""

from __future__ import annotations

import cmath
import functools
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, TruncationError
from .resonance1d import ResonancePoint
from .specfun import sph_harm_table
from .zerofield import ShellParams, mu_all

DEFAULT_THETA = math.pi / 6
# Convergence needs Im(z exp(-i theta)) above this.
MIN_DECAY_RATE = 1e-2
# Log-magnitude at which the time integrand is truncated.
TAIL_LOG = -40.0


def max_workers() -> int:
    """Thread cap from STARK_SHELL_THREADS (default: CPU count)."""
    env = os.environ.get("STARK_SHELL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SurfaceQuadrature:
    """Node counts for the surface and time quadratures.

    n_target: Gauss-Legendre nodes in cos(theta) for the target point.
    n_gamma, n_beta: rotated-pole rule (GL in gamma, trapezoid in beta).
    n_cheb: Chebyshev nodes for the dependence on x1 + y1.
    u_nodes: GL nodes per time panel (t = exp(-i theta) u^2).
    """

    n_target: int = 28
    n_gamma: int = 32
    n_beta: int = 32
    n_cheb: int = 40
    u_nodes: int = 16
    tolerance: float = 1e-6

    def as_dict(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "n_target": self.n_target,
            "n_gamma": self.n_gamma,
            "n_beta": self.n_beta,
            "n_cheb": self.n_cheb,
            "u_nodes": self.u_nodes,
        }


@dataclass(frozen=True)
class WeylMatrix:
    entries: np.ndarray
    index: tuple
    z: complex
    theta: float
    F: float
    a: float
    L_max: int
    quad_meta: dict = field(default_factory=dict)

    def block(self, m: int) -> np.ndarray:
        sel = [k for k, (_, mm) in enumerate(self.index) if mm == m]
        return self.entries[np.ix_(sel, sel)]


@dataclass(frozen=True)
class DeterminantValue:
    value: complex
    p: int
    L_max: int
    eig_count_used: int
    min_factor: float = 1.0
    on_zero: bool = False


def basis_index(L_max: int) -> tuple:
    """(l, m) labels in the order used by WeylMatrix.entries."""
    return tuple((ell, m) for ell in range(L_max + 1) for m in range(-ell, ell + 1))


# ---------------------------------------------------------------------------
# Propagator


def stark_propagator_kernel(x, y, t, F: float):
    """Kernel of exp(-i t H_F) for H_F = -Delta + F x1 in three dimensions."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=complex)
    if np.any(t == 0):
        raise DomainError("propagator is singular at t = 0")
    r2 = np.sum((x - y) ** 2, axis=-1)
    s1 = x[..., 0] + y[..., 0]
    phase = 1j * r2 / (4 * t) - 1j * F * t * s1 / 2 - 1j * F * F * t**3 / 12
    return (4j * np.pi * t) ** -1.5 * np.exp(phase)


def stark_propagator_1d(x, y, t, F: float):
    """Kernel of exp(-i t H) for H = -d^2/dx^2 + F x."""
    t = np.asarray(t, dtype=complex)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    phase = 1j * (x - y) ** 2 / (4 * t) - 1j * F * t * (x + y) / 2 - 1j * F * F * t**3 / 12
    return (4j * np.pi * t) ** -0.5 * np.exp(phase)


def _decay_rate(z: complex, theta: float) -> float:
    return (complex(z) * cmath.exp(-1j * theta)).imag


def admissible(z: complex, theta: float) -> bool:
    """Whether the rotated time integral converges at (z, theta)."""
    return 0.0 < theta < math.pi / 3 and _decay_rate(z, theta) > MIN_DECAY_RATE


def time_nodes(z: complex, F: float, theta: float, extent: float, u_nodes: int = 16):
    """Nodes t_k and weights W_k with  i int_0^inf e^{izt} f(t) dt ~ sum W_k f(t_k).

    ``extent`` bounds |x1 + y1| and sets the worst-case growth of the field
    phase.  The e^{izt} factor is included in the weights.
    """
    rate = _decay_rate(z, theta)
    if not admissible(z, theta):
        raise DomainError(
            f"contour angle {theta:.3f} not admissible at z={z}: need "
            f"0 < theta < pi/3 and Im(z e^(-i theta)) > {MIN_DECAY_RATE}"
        )
    growth = 0.5 * F * extent * math.sin(theta)
    cubic = F * F * math.sin(3 * theta) / 12.0

    def log_bound(u):
        free = -rate * u * u
        field = (growth - rate) * u * u - cubic * u**6
        return max(free, field) - 2.0 * math.log(max(u, 1e-300))

    u_max = 1.0
    while log_bound(u_max) > TAIL_LOG:
        u_max *= 1.1
        if u_max > 1e3:
            raise DomainError("time integrand does not decay; reduce F or change theta")
    edges = [0.0] + [1e-4 * 2.0**k for k in range(14)]
    edges = [e for e in edges if e < 1.0] + [1.0]
    period = math.pi / max(abs(complex(z)), 1.0)
    width = min(0.5, math.sqrt(period))
    n_uni = max(1, math.ceil((u_max - 1.0) / width))
    edges += list(np.linspace(1.0, max(u_max, 1.0 + width), n_uni + 1)[1:])
    x, w = np.polynomial.legendre.leggauss(u_nodes)
    us, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        us.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * w)
    u = np.concatenate(us)
    wu = np.concatenate(ws)
    rot = cmath.exp(-1j * theta)
    t = rot * u * u
    weights = 1j * 2.0 * u * rot * wu * np.exp(1j * z * t)
    return t, weights


def difference_kernel(R, S, z: complex, F: float, theta: float = DEFAULT_THETA, extent=None, u_nodes=16):
    """G_F - G_0 at distance R and x1 + y1 = S (arrays broadcast)."""
    R = np.asarray(R, dtype=float)
    S = np.asarray(S, dtype=float)
    if extent is None:
        extent = float(np.max(np.abs(S))) if S.size else 0.0
    t, W = time_nodes(z, F, theta, extent, u_nodes)
    shape = np.broadcast(R, S).shape
    Rb = np.broadcast_to(R, shape).ravel()
    Sb = np.broadcast_to(S, shape).ravel()
    base = W * (4j * np.pi * t) ** -1.5
    gauss = np.exp(1j * Rb[:, None] ** 2 / (4 * t[None, :]))
    field = np.expm1(-1j * F * t[None, :] * Sb[:, None] / 2 - 1j * F * F * t[None, :] ** 3 / 12)
    return np.sum(base[None, :] * gauss * field, axis=1).reshape(shape)


def difference_table(R, S, z: complex, F: float, theta: float, extent: float, u_nodes=16):
    """Outer-product table T[g, k] = (G_F - G_0)(R_g, S_k).

    The time integrand factors into an R part and an S part, so the table
    is one matrix product.
    """
    t, W = time_nodes(z, F, theta, extent, u_nodes)
    R = np.asarray(R, dtype=float).ravel()
    S = np.asarray(S, dtype=float).ravel()
    gauss = np.exp(1j * R[:, None] ** 2 / (4 * t[None, :])) * (W * (4j * np.pi * t) ** -1.5)
    field = np.expm1(-1j * F * t[None, :] * S[:, None] / 2 - 1j * F * F * t[None, :] ** 3 / 12)
    return gauss @ field.T


def green_by_time_integral_1d(x, y, z, F, theta=DEFAULT_THETA, u_nodes=16):
    """Rotated-contour time integral of the 1D propagator (cross-check)."""
    extent = abs(x + y)
    t, W = time_nodes(z, F, theta, extent, u_nodes)
    return complex(np.sum(W * stark_propagator_1d(x, y, t, F)))


def free_green_3d(R, z):
    kap = cmath.sqrt(-complex(z))
    R = np.asarray(R, dtype=float)
    return np.exp(-kap * R) / (4 * np.pi * R)


# ---------------------------------------------------------------------------
# Surface quadrature


def _cheb_nodes(n, half):
    k = np.arange(n)
    return half * np.cos(np.pi * (k + 0.5) / n)


def _cheb_interp(table, nodes_half, S):
    """Evaluate Chebyshev interpolants (rows of ``table``) at S.

    ``table[g, k]`` holds samples at first-kind Chebyshev nodes; S has shape
    (..., n_gamma) matching the row index on the last axis.
    """
    n = table.shape[1]
    k = np.arange(n)
    theta_k = np.pi * (k + 0.5) / n
    # coefficients c_j = (2/n) sum_k f_k cos(j theta_k)
    cosmat = np.cos(np.outer(np.arange(n), theta_k))
    coef = (2.0 / n) * table @ cosmat.T
    coef[:, 0] *= 0.5
    xs = np.clip(S / nodes_half, -1.0, 1.0)
    # Clenshaw over the last axis of S matched to rows of coef
    b1 = np.zeros(xs.shape, dtype=complex)
    b2 = np.zeros(xs.shape, dtype=complex)
    for j in range(n - 1, 0, -1):
        b1, b2 = 2 * xs * b1 - b2 + coef[:, j], b1
    return xs * b1 - b2 + coef[:, 0]


@functools.lru_cache(maxsize=16)
def _geometry_cached(quad: SurfaceQuadrature, a: float, L_max: int, full_azimuth: bool):
    phis = _target_phis(L_max, full_azimuth)
    geo = _geometry(quad, a, phis)
    idx = basis_index(L_max)
    ylm_src = sph_harm_table(L_max, geo["cos_src"])
    ylm_tgt = sph_harm_table(L_max, geo["xt"])
    src = np.empty((len(idx),) + geo["S"].shape, dtype=complex)
    for col, (ell, m) in enumerate(idx):
        src[col] = _signed_table(ylm_src, ell, m) * np.exp(1j * m * geo["phi_src"])
    w = geo["wgam"][:, None] * geo["wbeta"][None, :]
    geo["y_src_w"] = (src * w).reshape(len(idx), src.shape[1], src.shape[2], -1)
    geo["y_tgt"] = np.array([_signed_table(ylm_tgt, ell, m) for ell, m in idx])
    for arr in geo.values():
        if isinstance(arr, np.ndarray):
            arr.flags.writeable = False
    return geo


def _target_phis(L_max, full_azimuth):
    if full_azimuth:
        n = 2 * L_max + 2
        return 2 * np.pi * np.arange(n) / n
    return np.zeros(1)


def _geometry(quad: SurfaceQuadrature, a: float, phis):
    """Source points around each target (theta_i, phi_p)."""
    xt, wt = np.polynomial.legendre.leggauss(quad.n_target)
    xg, wg = np.polynomial.legendre.leggauss(quad.n_gamma)
    gam = 0.5 * np.pi * (xg + 1.0)
    wgam = 0.5 * np.pi * wg * np.sin(gam)
    beta = 2 * np.pi * np.arange(quad.n_beta) / quad.n_beta
    wbeta = np.full(quad.n_beta, 2 * np.pi / quad.n_beta)
    ct = xt[:, None, None, None]
    st = np.sqrt(1 - xt * xt)[:, None, None, None]
    cp = np.cos(phis)[None, :, None, None]
    sp = np.sin(phis)[None, :, None, None]
    cg = np.cos(gam)[None, None, :, None]
    sg = np.sin(gam)[None, None, :, None]
    cb = np.cos(beta)[None, None, None, :]
    sb = np.sin(beta)[None, None, None, :]
    # omega, e1 = d omega / d theta, e2 = d omega / (sin theta d phi)
    w1 = cg * ct - sg * cb * st
    w2 = cg * st * cp + sg * (cb * ct * cp - sb * sp)
    w3 = cg * st * sp + sg * (cb * ct * sp + sb * cp)
    shape = np.broadcast(w1, w2, w3).shape
    w1 = np.broadcast_to(w1, shape)
    R = 2 * a * np.sin(gam / 2)
    S = a * (ct + w1)
    return {
        "xt": xt,
        "wt": wt,
        "R": R,
        "wgam": wgam,
        "wbeta": wbeta,
        "cos_src": w1,
        "phi_src": np.arctan2(w3, w2),
        "S": S,
    }


def _project(kernel_vals, geo, L_max, a, phis, full_azimuth):
    """Matrix of the integral operator with kernel samples on the geometry."""
    idx = basis_index(L_max)
    n = len(idx)
    kv = kernel_vals.reshape(kernel_vals.shape[0], kernel_vals.shape[1], -1)
    # inner integrals g_j(theta_i, phi_p) for every basis function j
    inner = np.einsum("cipk,ipk->cip", geo["y_src_w"], kv)
    out = np.zeros((n, n), dtype=complex)
    ms = np.array([m for _, m in idx])
    for row, (ell, m) in enumerate(idx):
        y_t = geo["y_tgt"][row]
        if full_azimuth:
            wphi = 2 * np.pi / len(phis)
            weights = (geo["wt"] * y_t)[:, None] * np.exp(-1j * m * phis)[None, :] * wphi
            out[row] = a * a * np.einsum("ip,cip->c", weights, inner)
        else:
            cols = np.flatnonzero(ms == m)
            out[row, cols] = a * a * 2 * np.pi * (inner[cols, :, 0] @ (geo["wt"] * y_t))
    return out


def _signed_table(table, ell, m):
    """Y_{l,m} coefficient table including negative m."""
    if m >= 0:
        return table[ell, m]
    return (-1) ** (-m) * table[ell, -m]


def weyl_matrix(
    z: complex,
    theta: float,
    params: ShellParams,
    L_max: int,
    quad: SurfaceQuadrature | None = None,
    method: str = "subtracted",
    full_azimuth: bool = False,
) -> WeylMatrix:
    """Truncated matrix of M_F(theta; z) in the basis Y_lm / a, l <= L_max.

    ``method="subtracted"``: closed-form diagonal mu_l(z) plus the
    quadrature of the smooth difference kernel.  ``method="direct"``:
    quadrature of the full kernel G_0 + (G_F - G_0), used as a check.
    ``full_azimuth`` integrates the target azimuth as well instead of using
    the m-block structure, so off-block entries are computed rather than set.
    """
    quad = quad or SurfaceQuadrature()
    if L_max > 30:
        raise DomainError("L_max must be <= 30")
    if params.a <= 0:
        raise DomainError("radius must be positive")
    z = complex(z)
    a, F = params.a, params.F
    if F > 0 or method == "direct":
        if F > 0 and not admissible(z, theta):
            raise DomainError(f"(z={z}, theta={theta}) outside the admissible region")
    phis = _target_phis(L_max, full_azimuth)
    idx = basis_index(L_max)
    need_quad = F > 0 or method == "direct" or full_azimuth
    entries = np.zeros((len(idx), len(idx)), dtype=complex)
    if need_quad:
        geo = _geometry_cached(quad, a, L_max, full_azimuth)
        vals = np.zeros(geo["S"].shape, dtype=complex)
        if F > 0:
            s_nodes = _cheb_nodes(quad.n_cheb, 2 * a)
            table = difference_table(geo["R"], s_nodes, z, F, theta, 2 * a, quad.u_nodes)
            vals = vals + _cheb_interp(table, 2 * a, geo["S"].transpose(0, 1, 3, 2)).transpose(0, 1, 3, 2)
        if method == "direct":
            vals = vals + free_green_3d(geo["R"], z)[None, None, :, None]
        entries = _project(vals, geo, L_max, a, phis, full_azimuth)
    if method == "subtracted":
        mu = mu_all(L_max, z, a)
        entries = entries + np.diag([mu[ell] for ell, _ in idx])
    elif method != "direct":
        raise DomainError(f"unknown method {method!r}")
    _check_truncation(entries, idx, z, a, L_max, quad.tolerance)
    meta = dict(quad.as_dict(), method=method, full_azimuth=full_azimuth, contour_angle=-theta)
    return WeylMatrix(entries, idx, z, theta, F, a, L_max, meta)


def _check_truncation(entries, idx, z, a, L_max, tol):
    """Warn when the top-l diagonal is far from its zero-field value."""
    mu_top = mu_all(L_max, z, a)[L_max]
    top = [k for k, (ell, _) in enumerate(idx) if ell == L_max]
    dev = float(np.max(np.abs(np.diag(entries)[top] - mu_top)))
    if dev > 10 * tol * max(1.0, abs(mu_top)):
        warnings.warn(
            f"l = {L_max} diagonal deviates from mu_l by {dev:.2e}; increase L_max",
            RuntimeWarning,
        )
    return dev


# ---------------------------------------------------------------------------
# Determinant and resonances


def det_p(mat: WeylMatrix, alpha: float, p: int = 3) -> DeterminantValue:
    """Regularised determinant det_p(I - K) with K = -alpha M.

    The sign makes det_p vanish exactly on the secular equation
    1 + alpha mu_l = 0 at zero field.
    """
    if p < 3:
        raise DomainError("regularised determinant needs p >= 3")
    K = -alpha * np.asarray(mat.entries)
    if not np.any(K):
        return DeterminantValue(1.0 + 0j, p, mat.L_max, K.shape[0])
    try:
        lam = np.linalg.eigvals(K)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError("eigensolver failed", z=mat.z) from exc
    factors = 1.0 - lam
    corr = sum(lam**k / k for k in range(1, p))
    value = complex(np.prod(factors * np.exp(corr)))
    min_factor = float(np.min(np.abs(factors)))
    return DeterminantValue(value, p, mat.L_max, lam.size, min_factor, min_factor < 1e-300)


def det_function(theta: float, params: ShellParams, L_max: int, quad=None, p: int = 3):
    """z -> det_p(I + alpha M_F(theta; z)) as a plain callable."""

    def fun(z):
        return det_p(weyl_matrix(z, theta, params, L_max, quad), params.alpha, p).value

    return fun


def det_scan(zs, theta, params, L_max, quad=None, p=3):
    """|det_p| on an array of complex energies (threads capped by env)."""
    fun = det_function(theta, params, L_max, quad, p)
    flat = np.ravel(np.asarray(zs, dtype=complex))
    with ThreadPoolExecutor(max_workers()) as pool:
        vals = list(pool.map(fun, flat))
    return np.array(vals).reshape(np.shape(zs))


def _secant(fun, z0, z1, tol=1e-9, max_iter=60):
    f0, f1 = fun(z0), fun(z1)
    history = [abs(f1)]
    for it in range(1, max_iter + 1):
        if f1 == f0:
            raise ConvergenceError("secant stalled", last=z1, history=history)
        step = f1 * (z1 - z0) / (f1 - f0)
        z0, f0 = z1, f1
        z1 = z1 - step
        f1 = fun(z1)
        history.append(abs(f1))
        if abs(f1) < tol and abs(step) < tol:
            return z1, abs(f1), it, tuple(history)
    raise ConvergenceError("secant iteration did not converge", last=z1, history=history)


def find_resonance_3d(
    seed: complex,
    theta: float,
    params: ShellParams,
    L_max: int,
    quad: SurfaceQuadrature | None = None,
    p: int = 3,
    check_truncation: bool = True,
    truncation_tol: float = 1e-4,
) -> ResonancePoint:
    """Zero of z -> det_p(I + alpha M_F(theta; z)) near ``seed``.

    With ``check_truncation`` the root is recomputed at L_max + 2 and the
    two must agree to ``truncation_tol``.
    """
    seed = complex(seed)

    def solve(L):
        fun = det_function(theta, params, L, quad, p)
        h = 1e-4 * (1.0 + abs(seed))
        return _secant(fun, seed, seed + h)

    z, res, it, hist = solve(L_max)
    if check_truncation:
        z2, *_ = solve(L_max + 2)
        if abs(z2 - z) > truncation_tol:
            raise TruncationError(
                "resonance moves with the angular truncation", L_max=z, L_max_plus_2=z2
            )
    return ResonancePoint(z, -2.0 * z.imag, params.F, res, it, hist)


def smallest_singular_ratio(mat: WeylMatrix, alpha: float) -> float:
    """sigma_min(I - K) / ||I - K|| for K = -alpha M."""
    A = np.eye(mat.entries.shape[0]) + alpha * mat.entries
    s = np.linalg.svd(A, compute_uv=False)
    return float(s[-1] / s[0])
