"""Charge densities induced by a potential value.

Every density is a line integral of a marginal against an energy-shift
weight. Piecewise-constant marginals integrate in closed form; Gaussian and
tabulated marginals fall back to adaptive quadrature on segments where the
integrand is smooth, after removing the inverse-square-root factor with the
substitution w = sign(u) sqrt(u^2 - c).

All kernels work in the shifted velocity u = xi1 - alpha and accept the
cutoff parameter c >= 0 (c = 2 q Phi in the callers). Antiderivatives are
written in cancellation-free forms so far-out boxes at small cutoffs do not
lose precision to subtraction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .model import Marginal, PlasmaParams, TrappedMarginal

__all__ = [
    "QuadratureSettings",
    "integrate_sqrt_singular",
    "rho_plus_inf",
    "rho_minus",
    "rho_plus_trapped",
    "rho_shock_plus",
]


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_subdivisions: int = 200

    def __post_init__(self) -> None:
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 10:
            raise ValueError("max_subdivisions must be at least 10")


DEFAULT_QUADRATURE = QuadratureSettings()


def _underlying(g: Marginal | TrappedMarginal) -> Marginal:
    return g.g if isinstance(g, TrappedMarginal) else g


def _pieces_in_u(g: Marginal, alpha: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lo = np.array([p[0] - alpha for p in g.pieces])
    hi = np.array([p[1] - alpha for p in g.pieces])
    h = np.array([p[2] for p in g.pieces])
    return lo, hi, h


# -- stable antiderivative blocks (x >= 0 side, folded by the callers) -------


def _free_anti(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    # antiderivative of x / sqrt(x^2 + c)
    return np.sqrt(x * x + c)


def _cutoff_anti(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    # antiderivative of x / sqrt(x^2 - c), clipped flat below the band edge
    return np.sqrt(np.maximum(x * x - c, 0.0))


def _cube_diff(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # a^3 - b^3 without forming the cubes when a and b are close
    return (a - b) * (a * a + a * b + b * b)


def _free_v_anti(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    # antiderivative of x (sqrt(x^2 + c) - x), stable for x^2 >> c
    a = np.sqrt(x * x + c)
    return np.where(a + x > 0, c / np.maximum(a + x, 1e-300) * (a * a + a * x + x * x), 0.0) / 3.0


def _cutoff_v_anti(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    # antiderivative of x (x - sqrt(max(x^2 - c, 0)))
    w = np.sqrt(np.maximum(x * x - c, 0.0))
    inside = x * x <= c
    safe = np.where(inside, 1.0, x + w)
    out = np.where(inside, x * x * x, c / np.maximum(safe, 1e-300) * (x * x + x * w + w * w))
    return out / 3.0


def _shock_v_anti(x: np.ndarray, c_small: np.ndarray, c_big: np.ndarray) -> np.ndarray:
    # antiderivative of x (sqrt(max(x^2-c_small,0)) - sqrt(max(x^2-c_big,0)))
    w1 = np.sqrt(np.maximum(x * x - c_small, 0.0))
    w0 = np.sqrt(np.maximum(x * x - c_big, 0.0))
    return _cube_diff(w1, w0) / 3.0


def _fold(lo, hi, h, anti, *args) -> np.ndarray:
    """Sum piece contributions of an even-weight integrand over both signs.

    anti(x, *args) must be the x >= 0 antiderivative of the |u|-weighted
    integrand; folding maps each signed piece onto the positive axis.
    """
    p = lo[:, None]
    r = hi[:, None]
    pos = anti(np.maximum(r, 0.0), *args) - anti(np.maximum(p, 0.0), *args)
    neg = anti(np.maximum(-p, 0.0), *args) - anti(np.maximum(-r, 0.0), *args)
    return np.sum(h[:, None] * (pos + neg), axis=0)


# -- quadrature fallbacks -----------------------------------------------------


def _quad_segments(points: np.ndarray, f, settings: QuadratureSettings) -> float:
    total = 0.0
    with warnings.catch_warnings():
        # roundoff-width segments around marginal jumps trip the subdivision
        # heuristics; accuracy is still governed by the returned estimates
        warnings.simplefilter("ignore", IntegrationWarning)
        for a, b in zip(points[:-1], points[1:]):
            if b <= a:
                continue
            val, _ = quad(
                f, a, b, epsabs=settings.abs_tol, epsrel=settings.rel_tol, limit=settings.max_subdivisions
            )
            total += val
    return total


def _free_quad(g: Marginal, alpha: float, c: float, settings: QuadratureSettings) -> float:
    lo, hi = g.quad_support()
    if lo >= hi:
        return 0.0
    a, b = lo - alpha, hi - alpha
    cuts = np.unique(np.clip(np.concatenate([[a, b, 0.0], g.breakpoints() - alpha]), a, b))

    def f(u: float) -> float:
        return float(g(u + alpha)) * abs(u) / math.sqrt(u * u + c)

    return _quad_segments(cuts, f, settings)


def _cutoff_quad(g: Marginal, alpha: float, c: float, settings: QuadratureSettings) -> float:
    lo, hi = g.quad_support()
    if lo >= hi:
        return 0.0
    root = math.sqrt(c)
    total = 0.0
    knots = g.breakpoints() - alpha
    # positive side: u in (root, hi - alpha)
    top = hi - alpha
    if top > root:
        w_top = math.sqrt(top * top - c)
        inner = np.sqrt(np.maximum(knots[knots > root] ** 2 - c, 0.0))
        cuts = np.unique(np.clip(np.concatenate([[0.0, w_top], inner]), 0.0, w_top))
        total += _quad_segments(cuts, lambda w: float(g(math.sqrt(w * w + c) + alpha)), settings)
    # negative side: u in (lo - alpha, -root)
    bottom = lo - alpha
    if bottom < -root:
        w_top = math.sqrt(bottom * bottom - c)
        inner = np.sqrt(np.maximum(knots[knots < -root] ** 2 - c, 0.0))
        cuts = np.unique(np.clip(np.concatenate([[0.0, w_top], inner]), 0.0, w_top))
        total += _quad_segments(cuts, lambda w: float(g(-math.sqrt(w * w + c) + alpha)), settings)
    return total


def _band_quad(g: Marginal, alpha: float, m: float, M: float, settings: QuadratureSettings) -> float:
    if M <= m:
        return 0.0
    w_top = math.sqrt(M - m)
    knots = g.breakpoints() - alpha
    mapped = np.sqrt(np.maximum(knots[knots * knots > m] ** 2 - m, 0.0))
    cuts = np.unique(np.clip(np.concatenate([[0.0, w_top], mapped]), 0.0, w_top))
    return 2.0 * _quad_segments(cuts, lambda w: float(g(math.sqrt(w * w + m) + alpha)), settings)


# -- kernels ------------------------------------------------------------------


def _free_kernel(g: Marginal, alpha: float, c: np.ndarray, settings: QuadratureSettings) -> np.ndarray:
    if g.kind == "piecewise":
        lo, hi, h = _pieces_in_u(g, alpha)
        if lo.size == 0:
            return np.zeros_like(c)
        return _fold(lo, hi, h, _free_anti, c[None, :])
    out = np.empty_like(c)
    for i, ci in enumerate(c):
        out[i] = g.mass() if ci == 0.0 else _free_quad(g, alpha, float(ci), settings)
    return out


def _cutoff_kernel(g: Marginal, alpha: float, c: np.ndarray, settings: QuadratureSettings) -> np.ndarray:
    if g.kind == "piecewise":
        lo, hi, h = _pieces_in_u(g, alpha)
        if lo.size == 0:
            return np.zeros_like(c)
        return _fold(lo, hi, h, _cutoff_anti, c[None, :])
    if g.kind == "maxwellian" and g.center == alpha:
        # the Gaussian bump centered on the frame speed integrates exactly
        return g.mass_if_maxwellian * np.exp(-g.kappa * c / (2.0 * g.q))
    out = np.empty_like(c)
    for i, ci in enumerate(c):
        out[i] = g.mass() if ci == 0.0 else _cutoff_quad(g, alpha, float(ci), settings)
    return out


def _band_kernel(
    g: Marginal, alpha: float, m: np.ndarray, M: float, settings: QuadratureSettings
) -> np.ndarray:
    if g.kind == "piecewise":
        lo, hi, h = _pieces_in_u(g, alpha)
        if lo.size == 0:
            return np.zeros_like(m)
        root_M = math.sqrt(M)
        p = np.minimum(lo, root_M)[:, None]
        r = np.minimum(hi, root_M)[:, None]
        vals = _cutoff_anti(np.maximum(r, 0.0), m[None, :]) - _cutoff_anti(np.maximum(p, 0.0), m[None, :])
        return 2.0 * np.sum(h[:, None] * vals, axis=0)
    out = np.empty_like(m)
    for i, mi in enumerate(m):
        out[i] = _band_quad(g, alpha, float(mi), M, settings)
    return out


def _wrap_phi(phi) -> tuple[np.ndarray, bool]:
    arr = np.asarray(phi, dtype=float)
    scalar = arr.ndim == 0
    return np.atleast_1d(arr), scalar


def _ret(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


# -- public operations --------------------------------------------------------


def rho_plus_inf(
    g_plus: Marginal,
    params: PlasmaParams,
    phi,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
):
    """Ion density carried by the far-field marginal at potential phi >= 0."""
    p, scalar = _wrap_phi(phi)
    if np.any(p < 0):
        raise ValueError("phi must be nonnegative")
    c = 2.0 * params.q_plus * p
    return _ret(_free_kernel(_underlying(g_plus), params.alpha, c, settings), scalar)


def rho_minus(
    g_minus: Marginal,
    params: PlasmaParams,
    phi,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
):
    """Electron density at potential phi >= 0; the band |u| < sqrt(2 q phi) is excluded."""
    p, scalar = _wrap_phi(phi)
    if np.any(p < 0):
        raise ValueError("phi must be nonnegative")
    c = 2.0 * params.q_minus * p
    return _ret(_cutoff_kernel(_underlying(g_minus), params.alpha, c, settings), scalar)


def rho_plus_trapped(
    g_trapped: Marginal | TrappedMarginal,
    params: PlasmaParams,
    beta: float,
    phi,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
):
    """Density of the trapped ion population at potential phi in [0, beta]."""
    if isinstance(g_trapped, TrappedMarginal) and g_trapped.alpha != params.alpha:
        raise ValueError("trapped marginal frame speed disagrees with params.alpha")
    if not (beta > 0 and math.isfinite(beta)):
        raise ValueError("beta must be positive and finite")
    p, scalar = _wrap_phi(phi)
    if np.any(p < 0) or np.any(p > beta):
        raise ValueError("phi must lie in [0, beta]")
    m = 2.0 * params.q_plus * (beta - p)
    M = 2.0 * params.q_plus * beta
    return _ret(_band_kernel(_underlying(g_trapped), params.alpha, m, M, settings), scalar)


def rho_shock_plus(
    g_left: Marginal,
    params: PlasmaParams,
    phi_l: float,
    phi,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
):
    """Ion density across a front, carried by the left state, at phi in [0, phi_l]."""
    if not (phi_l > 0 and math.isfinite(phi_l)):
        raise ValueError("phi_l must be positive and finite")
    p, scalar = _wrap_phi(phi)
    if np.any(p < 0) or np.any(p > phi_l):
        raise ValueError("phi must lie in [0, phi_l]")
    c = 2.0 * params.q_plus * (phi_l - p)
    return _ret(_cutoff_kernel(_underlying(g_left), params.alpha, c, settings), scalar)


def integrate_sqrt_singular(
    f,
    c: float,
    a: float,
    b: float,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
) -> float:
    """Integral of f(u) |u| / sqrt(u^2 - c) over [a, b] on one side of the band.

    The substitution w = sign(u) sqrt(u^2 - c) removes the edge singularity
    exactly; [a, b] must not cross the open band (-sqrt(c), sqrt(c)).
    """
    if c < 0:
        raise ValueError("c must be nonnegative")
    if b < a:
        raise ValueError("need a <= b")
    root = math.sqrt(c)
    if a >= root:
        wa = math.sqrt(a * a - c)
        wb = math.sqrt(b * b - c)
        val, _ = quad(
            lambda w: f(math.sqrt(w * w + c)),
            wa,
            wb,
            epsabs=settings.abs_tol,
            epsrel=settings.rel_tol,
            limit=settings.max_subdivisions,
        )
        return val
    if b <= -root:
        wa = math.sqrt(a * a - c)
        wb = math.sqrt(b * b - c)
        val, _ = quad(
            lambda w: f(-math.sqrt(w * w + c)),
            wb,
            wa,
            epsabs=settings.abs_tol,
            epsrel=settings.rel_tol,
            limit=settings.max_subdivisions,
        )
        return val
    raise ValueError("interval crosses the singular band")
