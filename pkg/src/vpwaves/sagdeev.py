"""Pseudo-potential of the wave equation (d_X Phi)^2 = 2 V(Phi).

V accumulates the signed charge imbalance between the ion and electron
densities from the equilibrium at Phi = 0. Piecewise-constant marginals give
closed forms; other representations integrate the same inner antiderivatives
by adaptive quadrature. V(0) = 0 holds exactly in every code path because
each antiderivative difference vanishes identically at zero shift.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import Akima1DInterpolator

from .densities import (
    DEFAULT_QUADRATURE,
    QuadratureSettings,
    _band_kernel,
    _cube_diff,
    _cutoff_kernel,
    _cutoff_v_anti,
    _fold,
    _free_kernel,
    _free_v_anti,
    _pieces_in_u,
    _quad_segments,
    _shock_v_anti,
    _underlying,
)
from .model import Marginal, PlasmaParams, TrappedMarginal

__all__ = [
    "KinkInfo",
    "SagdeevPotential",
    "SyntheticPotential",
    "TabulatedPotential",
    "dv",
    "v_infinity",
    "v_shock",
    "v_total",
    "v_trapped",
]


class KinkInfo(NamedTuple):
    """Potential value in [0, amplitude] where dV/dPhi has a square-root kink.

    strength is the coefficient of the vanishing sqrt(|Phi - phi|) term;
    verifiers use it to size finite-difference exclusion windows.
    """

    phi: float
    strength: float


_GL16_NODES, _GL16_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _as_c_array(phi, amplitude: float):
    arr = np.atleast_1d(np.asarray(phi, dtype=float))
    scalar = np.asarray(phi).ndim == 0
    slack = 1e-12 * max(1.0, abs(amplitude))
    if np.any(arr < -slack) or np.any(arr > amplitude + slack):
        raise ValueError(f"phi outside the admissible interval [0, {amplitude}]")
    return np.clip(arr, 0.0, amplitude), scalar


# -- quadrature fallbacks for the integrated (V) kernels ----------------------


def _free_v_quad(g: Marginal, alpha: float, c: float, settings: QuadratureSettings) -> float:
    lo, hi = g.quad_support()
    if lo >= hi or c == 0.0:
        return 0.0
    a, b = lo - alpha, hi - alpha
    cuts = np.unique(np.clip(np.concatenate([[a, b, 0.0], g.breakpoints() - alpha]), a, b))

    def f(u: float) -> float:
        au = abs(u)
        return float(g(u + alpha)) * au * c / (math.sqrt(u * u + c) + au)

    return _quad_segments(cuts, f, settings)


def _cutoff_v_quad(g: Marginal, alpha: float, c: float, settings: QuadratureSettings) -> float:
    lo, hi = g.quad_support()
    if lo >= hi or c == 0.0:
        return 0.0
    a, b = lo - alpha, hi - alpha
    root = math.sqrt(c)
    pts = np.concatenate([[a, b, 0.0, root, -root], g.breakpoints() - alpha])
    cuts = np.unique(np.clip(pts, a, b))

    def f(u: float) -> float:
        au = abs(u)
        if au * au <= c:
            return float(g(u + alpha)) * au * au
        w = math.sqrt(au * au - c)
        return float(g(u + alpha)) * au * c / (au + w)

    return _quad_segments(cuts, f, settings)


def _band_v_quad(g: Marginal, alpha: float, m: float, M: float, settings: QuadratureSettings) -> float:
    if M <= m:
        return 0.0
    w_top = math.sqrt(M - m)
    knots = g.breakpoints() - alpha
    mapped = np.sqrt(np.maximum(knots[knots * knots > m] ** 2 - m, 0.0))
    cuts = np.unique(np.clip(np.concatenate([[0.0, w_top], mapped]), 0.0, w_top))
    return 2.0 * _quad_segments(
        cuts, lambda w: float(g(math.sqrt(w * w + m) + alpha)) * w * w, settings
    )


def _shock_v_quad(
    g: Marginal, alpha: float, c_small: float, c_big: float, settings: QuadratureSettings
) -> float:
    lo, hi = g.quad_support()
    if lo >= hi or c_small == c_big:
        return 0.0
    a, b = lo - alpha, hi - alpha
    r0, r1 = math.sqrt(c_big), math.sqrt(c_small)
    pts = np.concatenate([[a, b, 0.0, r0, -r0, r1, -r1], g.breakpoints() - alpha])
    cuts = np.unique(np.clip(pts, a, b))

    def f(u: float) -> float:
        uu = u * u
        au = abs(u)
        if uu <= c_small:
            return 0.0
        w1 = math.sqrt(uu - c_small)
        if uu <= c_big:
            return float(g(u + alpha)) * au * w1
        w0 = math.sqrt(uu - c_big)
        return float(g(u + alpha)) * au * (c_big - c_small) / (w1 + w0)

    return _quad_segments(cuts, f, settings)


# -- public potential pieces ---------------------------------------------------


def v_infinity(
    g_plus: Marginal,
    g_minus: Marginal,
    params: PlasmaParams,
    phi,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
):
    """Untrapped part of the potential: ion free-stream term minus electron term."""
    arr = np.atleast_1d(np.asarray(phi, dtype=float))
    scalar = np.asarray(phi).ndim == 0
    if np.any(arr < 0):
        raise ValueError("phi must be nonnegative")
    ion = _ion_free_v(_underlying(g_plus), params, arr, settings)
    ele = _electron_v(_underlying(g_minus), params, arr, settings)
    out = ion - ele
    return float(out[0]) if scalar else out


def _ion_free_v(g: Marginal, params: PlasmaParams, phi: np.ndarray, settings) -> np.ndarray:
    c = 2.0 * params.q_plus * phi
    coef = params.e_plus / params.q_plus
    if g.kind == "piecewise":
        lo, hi, h = _pieces_in_u(g, params.alpha)
        if lo.size == 0:
            return np.zeros_like(phi)
        return coef * _fold(lo, hi, h, _free_v_anti, c[None, :])
    return coef * np.array([_free_v_quad(g, params.alpha, float(ci), settings) for ci in c])


def _electron_v(g: Marginal, params: PlasmaParams, phi: np.ndarray, settings) -> np.ndarray:
    c = 2.0 * params.q_minus * phi
    coef = params.e_minus / params.q_minus
    if g.kind == "piecewise":
        lo, hi, h = _pieces_in_u(g, params.alpha)
        if lo.size == 0:
            return np.zeros_like(phi)
        return coef * _fold(lo, hi, h, _cutoff_v_anti, c[None, :])
    if g.kind == "maxwellian" and g.center == params.alpha and g.q == params.q_minus:
        # integrated form of the exponential density law
        kappa = g.kappa
        return params.e_minus * g.mass_if_maxwellian * (1.0 - np.exp(-kappa * phi)) / kappa
    return coef * np.array([_cutoff_v_quad(g, params.alpha, float(ci), settings) for ci in c])


def v_trapped(
    g_trapped: Marginal | TrappedMarginal,
    params: PlasmaParams,
    beta: float,
    phi,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
):
    """Trapped-ion contribution; vanishes identically at phi = 0 and is nonnegative."""
    if not (beta > 0 and math.isfinite(beta)):
        raise ValueError("beta must be positive and finite")
    arr = np.atleast_1d(np.asarray(phi, dtype=float))
    scalar = np.asarray(phi).ndim == 0
    if np.any(arr < 0) or np.any(arr > beta * (1 + 1e-12) + 1e-300):
        raise ValueError("phi must lie in [0, beta]")
    arr = np.minimum(arr, beta)
    g = _underlying(g_trapped)
    m = 2.0 * params.q_plus * (beta - arr)
    M = 2.0 * params.q_plus * beta
    coef = 2.0 * params.e_plus / (3.0 * params.q_plus)
    if g.kind == "piecewise":
        lo, hi, h = _pieces_in_u(g, params.alpha)
        if lo.size == 0:
            out = np.zeros_like(arr)
        else:
            root_M = math.sqrt(M)
            p = np.clip(lo, 0.0, root_M)[:, None]
            r = np.clip(hi, 0.0, root_M)[:, None]
            w_hi = np.sqrt(np.maximum(r * r - m[None, :], 0.0))
            w_lo = np.sqrt(np.maximum(p * p - m[None, :], 0.0))
            out = coef * np.sum(h[:, None] * _cube_diff(w_hi, w_lo), axis=0)
    else:
        out = 1.5 * coef * np.array(
            [_band_v_quad(g, params.alpha, float(mi), M, settings) for mi in m]
        )
    return float(out[0]) if scalar else out


def v_shock(
    g_plus_left: Marginal,
    g_minus_right: Marginal,
    params: PlasmaParams,
    phi_l: float,
    phi,
    settings: QuadratureSettings = DEFAULT_QUADRATURE,
):
    """Potential of a front: left-state ions against right-state electrons."""
    if not (phi_l > 0 and math.isfinite(phi_l)):
        raise ValueError("phi_l must be positive and finite")
    arr = np.atleast_1d(np.asarray(phi, dtype=float))
    scalar = np.asarray(phi).ndim == 0
    if np.any(arr < 0) or np.any(arr > phi_l * (1 + 1e-12)):
        raise ValueError("phi must lie in [0, phi_l]")
    arr = np.minimum(arr, phi_l)
    gp = _underlying(g_plus_left)
    gm = _underlying(g_minus_right)
    c_phi = 2.0 * params.q_plus * (phi_l - arr)
    c0 = 2.0 * params.q_plus * phi_l
    coef = params.e_plus / params.q_plus
    if gp.kind == "piecewise":
        lo, hi, h = _pieces_in_u(gp, params.alpha)
        ion = coef * _fold(lo, hi, h, _shock_v_anti, c_phi[None, :], c0) if lo.size else np.zeros_like(arr)
    else:
        ion = coef * np.array(
            [_shock_v_quad(gp, params.alpha, float(ci), c0, settings) for ci in c_phi]
        )
    ele = _electron_v(gm, params, arr, settings)
    out = ion - ele
    return float(out[0]) if scalar else out


# -- kink bookkeeping ----------------------------------------------------------


def _edge_jumps(g: Marginal) -> list[tuple[float, float]]:
    """(position, |height jump|) at every discontinuity of a piecewise marginal."""
    if g.kind != "piecewise":
        if g.kind == "tabulated":
            # slope breaks give weaker kinks; report them with their knot positions
            return [(float(k), 0.0) for k in g.knots]
        return []
    out: list[tuple[float, float]] = []
    pieces = g.pieces
    for i, (lo, hi, h) in enumerate(pieces):
        left = pieces[i - 1][2] if i > 0 and pieces[i - 1][1] == lo else 0.0
        if h != left:
            out.append((lo, abs(h - left)))
        right = pieces[i + 1][2] if i + 1 < len(pieces) and pieces[i + 1][0] == hi else None
        if right is None and h != 0.0:
            out.append((hi, abs(h)))
    return out


class SagdeevPotential:
    """Potential of one wave, with strict range guards on [0, amplitude].

    kind is one of 'solitary', 'shock', 'train'. For shocks g_plus is the
    left end state and g_minus the right end state; the amplitude is the left
    plateau value. For the other kinds the amplitude is the crest value.
    """

    def __init__(
        self,
        kind: str,
        params: PlasmaParams,
        amplitude: float,
        g_plus: Marginal,
        g_minus: Marginal,
        g_trapped: Marginal | TrappedMarginal | None = None,
        settings: QuadratureSettings = DEFAULT_QUADRATURE,
    ) -> None:
        if kind not in ("solitary", "shock", "train"):
            raise ValueError("kind must be solitary, shock or train")
        if not (amplitude > 0 and math.isfinite(amplitude)):
            raise ValueError("amplitude must be positive and finite")
        if kind == "shock" and g_trapped is not None:
            raise ValueError("fronts carry no trapped population")
        self.kind = kind
        self.params = params
        self.amplitude = float(amplitude)
        self.g_plus = g_plus
        self.g_minus = g_minus
        self.g_trapped = g_trapped
        self.settings = settings
        self._sup_v: float | None = None

    # constructors named for readability at call sites
    @classmethod
    def solitary(cls, g_plus, g_minus, beta, params, g_trapped=None, settings=DEFAULT_QUADRATURE):
        return cls("solitary", params, beta, g_plus, g_minus, g_trapped, settings)

    @classmethod
    def shock(cls, g_plus_left, g_minus_right, phi_l, params, settings=DEFAULT_QUADRATURE):
        return cls("shock", params, phi_l, g_plus_left, g_minus_right, None, settings)

    @classmethod
    def train(cls, h_plus, h_minus, beta, params, g_trapped=None, settings=DEFAULT_QUADRATURE):
        return cls("train", params, beta, h_plus, h_minus, g_trapped, settings)

    # -- evaluation ---------------------------------------------------------

    def v(self, phi):
        arr, scalar = _as_c_array(phi, self.amplitude)
        if self.kind == "shock":
            out = np.atleast_1d(
                v_shock(self.g_plus, self.g_minus, self.params, self.amplitude, arr, self.settings)
            )
            # against the plateau the antiderivative difference cancels to
            # roundoff while V itself is O((plateau - phi)^2); rebuild those
            # values from the derivative, whose terms stay individually small
            tail = np.atleast_1d(arr) > self.amplitude * (1.0 - 1e-3)
            if np.any(tail):
                out[tail] = self._v_near_plateau(np.atleast_1d(arr)[tail])
        else:
            out = np.atleast_1d(
                v_infinity(self.g_plus, self.g_minus, self.params, arr, self.settings)
            )
            if self.g_trapped is not None:
                out = out + np.atleast_1d(
                    v_trapped(self.g_trapped, self.params, self.amplitude, arr, self.settings)
                )
        return float(out[0]) if scalar else out

    def dv(self, phi):
        arr, scalar = _as_c_array(phi, self.amplitude)
        p = self.params
        if self.kind == "shock":
            ion = _cutoff_kernel(
                _underlying(self.g_plus), p.alpha, 2.0 * p.q_plus * (self.amplitude - arr), self.settings
            )
        else:
            ion = _free_kernel(_underlying(self.g_plus), p.alpha, 2.0 * p.q_plus * arr, self.settings)
        ele = _cutoff_kernel(_underlying(self.g_minus), p.alpha, 2.0 * p.q_minus * arr, self.settings)
        out = p.e_plus * ion - p.e_minus * ele
        if self.g_trapped is not None and self.kind != "shock":
            m = 2.0 * p.q_plus * (self.amplitude - arr)
            band = _band_kernel(
                _underlying(self.g_trapped), p.alpha, m, 2.0 * p.q_plus * self.amplitude, self.settings
            )
            out = out + p.e_plus * band
        return float(out[0]) if scalar else out

    def _v_near_plateau(self, arr: np.ndarray) -> np.ndarray:
        """V(phi) = -integral of dV/dPhi over [phi, plateau].

        Substituting s = sqrt(plateau - phi) keeps the integrand regular
        through the quadratic zero; one 16-point panel per target, split at
        any kink falling inside the integration range.
        """
        amp = self.amplitude
        s0 = np.sqrt(np.maximum(amp - arr, 0.0))
        s_max = float(np.max(s0)) if s0.size else 0.0
        s_kinks = sorted(
            math.sqrt(amp - k.phi)
            for k in self.kinks()
            if amp - s_max * s_max < k.phi < amp
        )
        if not s_kinks:
            half = 0.5 * s0
            nodes = half[:, None] * (_GL16_NODES[None, :] + 1.0)
            psi = np.minimum(amp - nodes * nodes, amp)
            dvv = np.asarray(self.dv(psi.ravel()), dtype=float).reshape(psi.shape)
            return -((2.0 * nodes * dvv) @ _GL16_WEIGHTS) * half
        out = np.zeros_like(s0)
        for i, s_hi in enumerate(s0):
            if s_hi == 0.0:
                continue
            edges = [0.0] + [sk for sk in s_kinks if sk < s_hi] + [float(s_hi)]
            acc = 0.0
            for a, b in zip(edges[:-1], edges[1:]):
                half = 0.5 * (b - a)
                nodes = 0.5 * (b + a) + half * _GL16_NODES
                psi = np.minimum(amp - nodes * nodes, amp)
                dvv = np.asarray(self.dv(psi), dtype=float)
                acc += half * float((2.0 * nodes * dvv) @ _GL16_WEIGHTS)
            out[i] = -acc
        return out

    def v_infinity_part(self, phi):
        if self.kind == "shock":
            raise ValueError("fronts have no far-field decomposition")
        return v_infinity(self.g_plus, self.g_minus, self.params, phi, self.settings)

    def v_trapped_part(self, phi):
        if self.kind == "shock":
            raise ValueError("fronts have no trapped part")
        if self.g_trapped is None:
            arr = np.asarray(phi, dtype=float)
            return 0.0 if arr.ndim == 0 else np.zeros_like(arr)
        return v_trapped(self.g_trapped, self.params, self.amplitude, phi, self.settings)

    # -- structure ----------------------------------------------------------

    def kinks(self) -> list[KinkInfo]:
        """Potential values in [0, amplitude] where dV/dPhi loses smoothness."""
        p = self.params
        out: list[KinkInfo] = []
        slack = 1e-12 * self.amplitude

        def _push(phi_star: float, strength: float) -> None:
            if -slack <= phi_star <= self.amplitude + slack and strength > 0.0:
                out.append(KinkInfo(
                    min(max(float(phi_star), 0.0), self.amplitude), float(strength)))

        def _limit_sum(g: Marginal, x: float) -> float:
            # the kernel limit is approached from both velocity signs
            d = 1e-9 * (1.0 + abs(x))
            return float(g(x - d)) + float(g(x + d))

        def _limit_below(g: Marginal, x: float) -> float:
            d = 1e-9 * (1.0 + abs(x))
            return max(float(g(x - d)), float(g(x)))

        for pos, jump in _edge_jumps(_underlying(self.g_minus)):
            w = abs(pos - p.alpha)
            # an edge at the frame speed leaves the moving limit term flat
            if w > 0.0:
                _push(w * w / (2.0 * p.q_minus), p.e_minus * math.sqrt(2.0 * p.q_minus) * jump)
        root = p.e_plus * math.sqrt(2.0 * p.q_plus)
        two_root = 2.0 * root
        if self.kind == "shock":
            for pos, jump in _edge_jumps(_underlying(self.g_plus)):
                w = abs(pos - p.alpha)
                if w > 0.0:
                    _push(self.amplitude - w * w / (2.0 * p.q_plus), root * jump)
            # the ion kernel's inner limit is pinned at zero speed, so mass of
            # the left state at alpha feeds a sqrt(plateau - phi) term
            _push(self.amplitude, root * _limit_sum(_underlying(self.g_plus), p.alpha))
        else:
            # same fixed-limit effect for free ions, at the foot of the wave
            _push(0.0, root * _limit_sum(_underlying(self.g_plus), p.alpha))
            if self.g_trapped is not None:
                gt = _underlying(self.g_trapped)
                for pos, jump in _edge_jumps(gt):
                    w = pos - p.alpha
                    if w > 0.0:
                        _push(self.amplitude - w * w / (2.0 * p.q_plus), two_root * jump)
                sep = math.sqrt(2.0 * p.q_plus * self.amplitude)
                # the trapped band reaches the separatrix from below only
                _push(0.0, two_root * _limit_below(gt, sep + p.alpha))
        merged: dict[float, float] = {}
        for k in out:
            merged[k.phi] = merged.get(k.phi, 0.0) + k.strength
        return sorted((KinkInfo(phi, s) for phi, s in merged.items()), key=lambda k: k.phi)

    def sup_v(self) -> float:
        if self._sup_v is None:
            grid = np.linspace(0.0, self.amplitude, 1025)
            self._sup_v = float(np.max(np.abs(self.v(grid))))
        return self._sup_v


def v_total(pot: "SagdeevPotential", phi):
    """Full potential of the wave described by pot."""
    return pot.v(phi)


def dv(pot: "SagdeevPotential", phi):
    """Signed charge density e+ rho+ - e- rho- at the given potential value."""
    return pot.dv(phi)


class SyntheticPotential:
    """Potential defined directly by callables; used by calibration and tests."""

    def __init__(
        self,
        v: Callable[[np.ndarray], np.ndarray],
        dv: Callable[[np.ndarray], np.ndarray],
        amplitude: float,
        kind: str = "solitary",
    ) -> None:
        self._v = v
        self._dv = dv
        self.amplitude = float(amplitude)
        self.kind = kind
        self._sup_v: float | None = None

    def v(self, phi):
        return self._v(np.asarray(phi, dtype=float))

    def dv(self, phi):
        return self._dv(np.asarray(phi, dtype=float))

    def kinks(self) -> list[KinkInfo]:
        return []

    def sup_v(self) -> float:
        if self._sup_v is None:
            grid = np.linspace(0.0, self.amplitude, 1025)
            self._sup_v = float(np.max(np.abs(self.v(grid))))
        return self._sup_v


class TabulatedPotential:
    """Local cubic interpolant through (phi, V) samples.

    The derivative comes from the interpolant, so it is only as accurate as
    the table; intended for re-verification of emitted tables and synthetic
    test fixtures, not as a primary potential. Akima avoids the derivative
    clipping a monotone interpolant applies around interior extrema.
    """

    def __init__(self, phi: np.ndarray, v: np.ndarray, kind: str = "solitary",
                 kinks: tuple = ()) -> None:
        phi = np.asarray(phi, dtype=float)
        v = np.asarray(v, dtype=float)
        if phi.ndim != 1 or phi.size < 4 or phi.size != v.size:
            raise ValueError("need matching one-dimensional tables with at least 4 rows")
        if not np.all(np.diff(phi) > 0):
            raise ValueError("phi samples must be strictly increasing")
        self._interp = Akima1DInterpolator(phi, v)
        self._deriv = self._interp.derivative()
        self.amplitude = float(phi[-1])
        self._phi0 = float(phi[0])
        self.kind = kind
        self._sup_v = float(np.max(np.abs(v)))
        # carried along so verifiers can keep masking derivative kinks
        # that the interpolant cannot represent
        self._kinks = tuple(KinkInfo(float(k[0]), float(k[1])) for k in kinks)

    def v(self, phi):
        arr = np.clip(np.asarray(phi, dtype=float), self._phi0, self.amplitude)
        return self._interp(arr)

    def dv(self, phi):
        arr = np.clip(np.asarray(phi, dtype=float), self._phi0, self.amplitude)
        return self._deriv(arr)

    def kinks(self) -> list[KinkInfo]:
        return list(self._kinks)

    def mask_pad(self, phi_k: float) -> float:
        """Radius around a derivative kink where dv should not be trusted.

        The interpolant cannot represent the fractional-power term at a
        kink; its stencil reaches four knots to each side, so that whole
        neighborhood inherits the error.
        """
        x = self._interp.x
        i = int(np.clip(np.searchsorted(x, phi_k), 0, x.size - 1))
        lo = max(i - 4, 0)
        hi = min(i + 4, x.size - 1)
        return float(max(x[hi] - phi_k, phi_k - x[lo]))

    def sup_v(self) -> float:
        return self._sup_v
