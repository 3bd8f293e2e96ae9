"""Phase-space reconstruction and residual verification.

The distribution of each species is recovered from the wave profile by the
characteristic branch formulas: along a characteristic the value equals the
end-state marginal evaluated at the velocity the particle has where the
potential vanishes (or at the crest, for the trapped population). The
verifiers check the field equation, the energy identity, constancy along
characteristics, and global neutrality on the discrete profile.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .densities import (
    DEFAULT_QUADRATURE,
    rho_minus,
    rho_plus_inf,
    rho_plus_trapped,
    rho_shock_plus,
)
from .model import Marginal, PlasmaParams, TrappedMarginal, check_symmetry
from .profile import WaveProfile

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)

SPECIES = ("plus", "minus")
DIRECTIONS = ("l_to_r", "r_to_l")

__all__ = [
    "PhaseDistribution",
    "density_recovery_error",
    "fd_energy_residual",
    "marginal_bundle",
    "phase_summary_json",
    "phase_to_csv",
    "reconstruct",
    "shock_endstate_map",
    "verify_characteristics",
    "verify_neutrality",
    "verify_poisson",
]


def marginal_bundle(pot) -> dict:
    """Marginal mapping for reconstruct/verify built from a wave potential."""
    bundle = {
        "plus": pot.g_plus,
        "minus": pot.g_minus,
        "params": pot.params,
    }
    if pot.kind in ("solitary", "train"):
        bundle["trapped"] = pot.g_trapped
    return bundle


def _params_of(marginals, profile) -> PlasmaParams:
    if isinstance(marginals, Mapping) and marginals.get("params") is not None:
        return marginals["params"]
    params = getattr(profile.pot, "params", None)
    if params is None:
        raise ValueError("plasma parameters unavailable: supply them in the marginal mapping")
    return params


def _trapped_marginal(marginals, params) -> Optional[Marginal]:
    # present-but-None means an identically zero trapped population;
    # an absent key is an error for the kinds that need the crest data
    if "trapped" not in marginals:
        raise ValueError("missing trapped marginal for the plus species")
    g = marginals["trapped"]
    if g is None:
        return None
    if isinstance(g, TrappedMarginal):
        return g.g
    return g


@dataclass(frozen=True)
class PhaseDistribution:
    """F(X, xi1) sampled on a rectangular grid, one species."""

    X_grid: np.ndarray
    xi1_grid: np.ndarray
    values: np.ndarray
    species: str
    profile: WaveProfile
    marginals: Mapping = field(repr=False, default=None)

    def __post_init__(self):
        if self.values.shape != (self.X_grid.size, self.xi1_grid.size):
            raise ValueError("values shape does not match the grids")
        if self.species not in SPECIES:
            raise ValueError("species must be 'plus' or 'minus'")
        if float(np.min(self.values)) < 0.0:
            raise ValueError("phase-space values must be nonnegative")


def _eval_g(g: Marginal, x: np.ndarray) -> np.ndarray:
    flat = np.asarray(g(np.ravel(x)), dtype=float)
    return flat.reshape(np.shape(x))


def _phase_rows(phi: np.ndarray, u: np.ndarray, species: str, kind: str,
                params: PlasmaParams, amplitude: float,
                g_free: Marginal, g_trapped: Optional[Marginal]) -> np.ndarray:
    """Exact branch formulas on the outer product grid phi x u."""
    alpha = params.alpha
    P = phi[:, None]
    U = u[None, :]
    out = np.zeros((phi.size, u.size))
    if species == "minus":
        arg = np.sqrt(U * U + 2.0 * params.q_minus * P)
        for sgn in (1.0, -1.0):
            sel = np.broadcast_to(sgn * U > 0.0, out.shape)
            out[sel] = _eval_g(g_free, (sgn * arg + alpha)[sel])
        return out
    if kind == "shock":
        arg = np.sqrt(U * U + 2.0 * params.q_plus * np.maximum(amplitude - P, 0.0))
        for sgn in (1.0, -1.0):
            sel = np.broadcast_to(sgn * U > 0.0, out.shape)
            out[sel] = _eval_g(g_free, (sgn * arg + alpha)[sel])
        return out
    disc = U * U - 2.0 * params.q_plus * P
    free = disc > 0.0
    root = np.sqrt(np.where(free, disc, 0.0))
    for sgn in (1.0, -1.0):
        sel = free & (sgn * U > 0.0)
        out[sel] = _eval_g(g_free, (sgn * root + alpha)[sel])
    trapped = disc < 0.0
    if np.any(trapped):
        if g_trapped is not None:
            m = 2.0 * params.q_plus * np.maximum(amplitude - P, 0.0)
            warg = np.sqrt(np.where(trapped, disc + 2.0 * params.q_plus * amplitude,
                                    m + np.zeros_like(disc)))
            out[trapped] = _eval_g(g_trapped, (warg + alpha)[trapped])
    return out


def _phase_points(phi: np.ndarray, u: np.ndarray, species: str, kind: str,
                  params: PlasmaParams, amplitude: float,
                  g_free: Marginal, g_trapped: Optional[Marginal]) -> np.ndarray:
    """Branch formulas for paired samples (phi_i, u_i); mirrors _phase_rows."""
    alpha = params.alpha
    out = np.zeros(phi.shape)
    if species == "minus" or kind == "shock":
        q = params.q_minus if species == "minus" else params.q_plus
        cc = 2.0 * q * phi if species == "minus" else \
            2.0 * q * np.maximum(amplitude - phi, 0.0)
        arg = np.sqrt(u * u + cc)
        for sgn in (1.0, -1.0):
            sel = sgn * u > 0.0
            out[sel] = _eval_g(g_free, (sgn * arg + alpha)[sel])
        return out
    q = params.q_plus
    disc = u * u - 2.0 * q * phi
    free = disc > 0.0
    root = np.sqrt(np.where(free, disc, 0.0))
    for sgn in (1.0, -1.0):
        sel = free & (sgn * u > 0.0)
        out[sel] = _eval_g(g_free, (sgn * root + alpha)[sel])
    trapped = disc < 0.0
    if np.any(trapped) and g_trapped is not None:
        warg = np.sqrt(np.where(trapped, disc + 2.0 * q * amplitude, 1.0))
        out[trapped] = _eval_g(g_trapped, (warg + alpha)[trapped])
    return out


def _xi1_grid(profile: WaveProfile, marginals, species: str, params: PlasmaParams,
              n_fill: int, phi_samples: int) -> np.ndarray:
    """Union of mapped marginal breakpoints over sampled potential values,
    plus a uniform fill; keeps box edges on the grid for every plotted slice."""
    alpha = params.alpha
    kind = profile.kind
    amp = profile.amplitude
    idx = np.unique(np.linspace(0, profile.Phi.size - 1, phi_samples).astype(int))
    phis = np.unique(profile.Phi[idx])
    mapped = [np.array([0.0])]
    sources = []
    if species == "minus":
        sources.append(("minus", marginals["minus"]))
    else:
        sources.append(("plus", marginals["plus"]))
        g_t = marginals.get("trapped")
        if g_t is not None:
            sources.append(("trapped", g_t.g if isinstance(g_t, TrappedMarginal) else g_t))
    for tag, g in sources:
        w = np.abs(np.asarray(g.breakpoints(), dtype=float) - alpha)
        if w.size == 0:
            continue
        for phi in phis:
            if tag == "minus":
                c = 2.0 * params.q_minus * phi
                uu = w * w - c
            elif tag == "plus" and kind == "shock":
                c = 2.0 * params.q_plus * (amp - phi)
                uu = w * w - c
            elif tag == "plus":
                c = 2.0 * params.q_plus * phi
                uu = w * w + c
            else:
                m = 2.0 * params.q_plus * (amp - phi)
                uu = w * w - m
            uu = uu[uu >= 0.0]
            if uu.size:
                r = np.sqrt(uu)
                mapped.append(r)
                mapped.append(-r)
    edges = np.concatenate(mapped)
    u_max = 1.1 * max(float(np.max(np.abs(edges))), 1e-12)
    fill = np.linspace(-u_max, u_max, n_fill)
    u = np.unique(np.concatenate([edges, fill]))
    tol = 1e-12 * max(1.0, u_max)
    keep = np.concatenate([[True], np.diff(u) > tol])
    return u[keep] + alpha


def reconstruct(profile: WaveProfile, marginals, species: str, *,
                n_xi: int = 1201, x_stride: int = 1,
                phi_samples: int = 33) -> PhaseDistribution:
    """Phase-space distribution of one species over the profile grid.

    marginals maps "plus"/"minus" to the end-state marginals (for a shock,
    the left ion state and the right electron state), optionally "trapped"
    to the crest data and "params" to the plasma parameters. For the plus
    species of a solitary wave or a wave train the "trapped" key must be
    present; the explicit value None stands for a vanishing population.
    """
    if species not in SPECIES:
        raise ValueError("species must be 'plus' or 'minus'")
    params = _params_of(marginals, profile)
    g_trapped = None
    if species == "plus":
        g_free = marginals["plus"]
        if profile.kind in ("solitary", "train"):
            g_trapped = _trapped_marginal(marginals, params)
    else:
        g_free = marginals["minus"]
    xi1 = _xi1_grid(profile, marginals, species, params, n_xi, phi_samples)
    X = profile.X_grid[::x_stride]
    phi = profile.Phi[::x_stride]
    u = xi1 - params.alpha
    values = np.empty((X.size, xi1.size))
    step = max(1, int(2.0e6 // max(xi1.size, 1)))
    for lo in range(0, X.size, step):
        hi = min(lo + step, X.size)
        values[lo:hi] = _phase_rows(phi[lo:hi], u, species, profile.kind,
                                    params, profile.amplitude, g_free, g_trapped)
    return PhaseDistribution(X, xi1, values, species, profile, marginals)


def _map_pieces_outward(pieces, alpha: float, c: float, shift: float):
    """Images of piecewise boxes under w -> sign(w) sqrt(w^2 + shift) with the
    parts |w| < sqrt(max(-shift, 0)) removed; exact edge arithmetic."""
    out = []
    cut = math.sqrt(max(-shift, 0.0))
    for lo, hi, h in pieces:
        if h == 0.0:
            continue
        for sgn in (1.0, -1.0):
            a = max(lo - alpha, cut) if sgn > 0 else max(alpha - hi, cut)
            b = hi - alpha if sgn > 0 else alpha - lo
            if b <= a:
                continue
            # a == cut means the image edge is exactly 0; re-squaring can
            # miss by an ulp and leave a hole at the origin
            p = 0.0 if (shift < 0.0 and a <= cut) else \
                math.sqrt(max(a * a + shift, 0.0))
            q = math.sqrt(max(b * b + shift, 0.0))
            out.append((sgn * p, sgn * q, h) if sgn > 0 else (sgn * q, sgn * p, h))
    return out


def shock_endstate_map(g: Marginal, params: PlasmaParams, phi_l: float,
                       direction: str, species: str, *, tol=None) -> Marginal:
    """Opposite end state of a shock implied by energy conservation.

    The transported directions (plus l_to_r, minus r_to_l) determine the
    produced state everywhere from the outer part of the input, whose inner
    band must be symmetric about alpha. The reverse directions determine
    only |xi1 - alpha| > sqrt(2 q Phi_l); the produced band has no
    transported image and is filled by continuing each energy level through
    its turning point, symmetrized, which keeps the band mirror symmetric
    and the value continuous at the band edge.
    """
    if phi_l <= 0.0:
        raise ValueError("Phi_l must be positive")
    if direction not in DIRECTIONS:
        raise ValueError("direction must be 'l_to_r' or 'r_to_l'")
    if species not in SPECIES:
        raise ValueError("species must be 'plus' or 'minus'")
    q = params.q_plus if species == "plus" else params.q_minus
    c = 2.0 * q * phi_l
    root_c = math.sqrt(c)
    alpha = params.alpha
    complete = (species == "plus" and direction == "l_to_r") or \
               (species == "minus" and direction == "r_to_l")
    if complete and not check_symmetry(g, alpha, root_c, tol=tol):
        raise ValueError("end-state marginal is not symmetric on the band")
    if g.pieces is not None:
        if complete:
            mapped = _map_pieces_outward(g.pieces, alpha, c, -c)
            pieces = [(lo + alpha, hi + alpha, h) for lo, hi, h in mapped]
            return Marginal.piecewise(sorted(pieces)) if pieces else \
                Marginal.piecewise([(alpha - 1.0, alpha + 1.0, 0.0)])
        mapped = _map_pieces_outward(g.pieces, alpha, c, c)
        # band edges in the produced state from the input core edges
        s_edges = {0.0, root_c}
        for lo, hi, _ in g.pieces:
            for e in (lo - alpha, hi - alpha):
                if abs(e) < root_c:
                    s_edges.add(abs(e))
        s_sorted = sorted(s_edges)
        w_edges = sorted({math.sqrt(max(c - s * s, 0.0)) for s in s_sorted})
        band = []
        for a, b in zip(w_edges[:-1], w_edges[1:]):
            mid = 0.5 * (a + b)
            s = math.sqrt(max(c - mid * mid, 0.0))
            val = 0.5 * (float(g(s + alpha)) + float(g(-s + alpha)))
            if val != 0.0:
                band.append((a, b, val))
                band.append((-b, -a, val))
        pieces = [(lo + alpha, hi + alpha, h) for lo, hi, h in mapped + band]
        return Marginal.piecewise(sorted(pieces)) if pieces else \
            Marginal.piecewise([(alpha - 1.0, alpha + 1.0, 0.0)])
    # smooth or tabulated input: sampled representation on mapped knots
    lo_s, hi_s = g.quad_support()
    w_hi = max(abs(lo_s - alpha), abs(hi_s - alpha))
    out_hi = math.sqrt(w_hi * w_hi + c) if not complete else \
        math.sqrt(max(w_hi * w_hi - c, 0.0))
    out_hi = max(out_hi, root_c * 1.5, 1e-6)
    w = np.linspace(-out_hi, out_hi, 2001)
    if complete:
        vals = _eval_g(g, np.sign(w) * np.sqrt(w * w + c) + alpha)
        vals[w == 0.0] = float(g(root_c + alpha))
    else:
        vals = np.empty_like(w)
        outer = np.abs(w) >= root_c
        vals[outer] = _eval_g(g, np.sign(w[outer]) *
                              np.sqrt(w[outer] ** 2 - c) + alpha)
        s = np.sqrt(np.clip(c - w[~outer] ** 2, 0.0, None))
        vals[~outer] = 0.5 * (_eval_g(g, s + alpha) + _eval_g(g, -s + alpha))
    return Marginal.tabulated(w + alpha, vals)


def _kink_keep_mask(profile: WaveProfile, phi: np.ndarray, tol: float) -> np.ndarray:
    """Nodes far enough from crossings of square-root kinks of dV/dPhi that
    the central difference keeps its h^2 accuracy at the requested tol."""
    keep = np.ones(phi.size, dtype=bool)
    kinks = profile.pot.kinks() if hasattr(profile.pot, "kinks") else []
    if not kinks:
        return keep
    h = float(profile.X_grid[1] - profile.X_grid[0])
    for k in kinks:
        strength = max(float(getattr(k, "strength", 1.0)), 1e-300)
        # slope of Phi where it crosses the kink level, not the global max:
        # the stencil error scales with the local crossing speed
        try:
            vk = float(np.asarray(profile.pot.v(np.array([k.phi])), float)[0])
        except (TypeError, ValueError):
            vk = float(np.max(np.abs(profile.dPhi))) ** 2 / 2.0
        p1 = math.sqrt(2.0 * max(vk, 0.0))
        r_trunc = (h * h * strength * p1 * p1 /
                   (24.0 * max(tol, 1e-300))) ** (2.0 / 3.0)
        # a kink level at a turning point of Phi is crossed with zero slope;
        # nodes whose stencil straddles the turning point lose an order of
        # accuracy, and they sit within the local quadratic rise over 2h
        try:
            k2 = abs(float(np.asarray(profile.pot.dv(np.array([k.phi])), float)[0]))
        except (TypeError, ValueError):
            k2 = 0.0
        r = max(r_trunc, 5.0 * h * p1, 3.0 * k2 * h * h)
        # a potential rebuilt from a table flags its own unreliable zone
        pad = getattr(profile.pot, "mask_pad", None)
        if pad is not None:
            r = max(r, pad(k.phi))
        keep &= np.abs(phi - k.phi) > r
    return keep


def verify_poisson(profile: WaveProfile, marginals=None, tol: float = 1e-6) -> float:
    """Max relative residual of the central second difference of Phi against
    dV/dPhi on interior nodes, skipping kink neighborhoods sized for tol.

    With a marginal mapping the right side is assembled from the density
    operators; otherwise the potential's own derivative is used.
    """
    X = profile.X_grid
    phi = profile.Phi[1:-1]
    h = float(X[1] - X[0])
    lap = (profile.Phi[2:] - 2.0 * profile.Phi[1:-1] + profile.Phi[:-2]) / (h * h)
    if marginals is None:
        rhs = np.asarray(profile.pot.dv(phi), dtype=float)
    else:
        params = _params_of(marginals, profile)
        settings = getattr(profile.pot, "settings", DEFAULT_QUADRATURE)
        if profile.kind == "shock":
            rp = rho_shock_plus(marginals["plus"], params, profile.amplitude, phi, settings)
        else:
            rp = rho_plus_inf(marginals["plus"], params, phi, settings)
            g_t = marginals.get("trapped")
            if g_t is not None:
                gt = g_t if isinstance(g_t, TrappedMarginal) else \
                    TrappedMarginal(g_t, params.alpha)
                rp = rp + rho_plus_trapped(gt, params, profile.amplitude, phi, settings)
        rm = rho_minus(marginals["minus"], params, phi, settings)
        rhs = params.e_plus * np.asarray(rp, dtype=float) - \
            params.e_minus * np.asarray(rm, dtype=float)
    scale = max(1.0, float(np.max(np.abs(rhs))))
    keep = _kink_keep_mask(profile, phi, tol * scale)
    if not np.any(keep):
        raise ValueError("kink exclusion removed every interior node")
    return float(np.max(np.abs(lap - rhs)[keep]) / scale)


def fd_energy_residual(profile: WaveProfile) -> float:
    """Max midpoint defect |(dPhi/dX)^2 / 2 - V| relative to max(1, sup V).

    Second-order quantity: halving the grid step shrinks it about fourfold.
    Kink neighborhoods are skipped for the same reason as in verify_poisson.
    """
    h = float(profile.X_grid[1] - profile.X_grid[0])
    dmid = np.diff(profile.Phi) / h
    pmid = 0.5 * (profile.Phi[1:] + profile.Phi[:-1])
    vmid = np.asarray(profile.pot.v(np.clip(pmid, 0.0, profile.amplitude)), dtype=float)
    res = np.abs(0.5 * dmid * dmid - vmid)
    keep = np.ones(pmid.size, dtype=bool)
    kinks = profile.pot.kinks() if hasattr(profile.pot, "kinks") else []
    pad = 8.0 * h * float(np.max(np.abs(profile.dPhi)))
    for k in kinks:
        keep &= np.abs(pmid - k.phi) > pad
    scale = max(1.0, float(np.max(vmid)))
    return float(np.max(res[keep]) / scale)


def verify_characteristics(dist: PhaseDistribution, profile: WaveProfile = None,
                           species: str = None, n_samples: int = 2000, *,
                           seed: int = 0) -> float:
    """Max |F difference| over random phase-point pairs sharing the invariant
    (xi1-alpha)^2/2 -/+ q Phi and the branch class.

    Values are taken from the generating formulas, so agreement is exact up
    to roundoff; samples whose marginal argument falls within 1e-9 of a
    breakpoint are redrawn to keep box edges out of the comparison.
    """
    profile = profile if profile is not None else dist.profile
    species = species if species is not None else dist.species
    marginals = dist.marginals
    params = _params_of(marginals, profile)
    alpha = params.alpha
    kind = profile.kind
    amp = profile.amplitude
    g_free = marginals["plus"] if species == "plus" else marginals["minus"]
    g_tr = None
    if species == "plus" and kind in ("solitary", "train"):
        g_tr = _trapped_marginal(marginals, params)
    rng = np.random.default_rng(seed)
    phi_all = profile.Phi
    lo_s, hi_s = g_free.quad_support()
    w_cap = max(abs(lo_s - alpha), abs(hi_s - alpha)) * 1.2 + 1.0
    bps = {id(g_free): np.asarray(g_free.breakpoints(), dtype=float)}
    if g_tr is not None:
        bps[id(g_tr)] = np.asarray(g_tr.breakpoints(), dtype=float)

    def away_from_edges(g, args):
        edges = bps[id(g)]
        if edges.size == 0:
            return np.ones(args.shape, dtype=bool)
        d = np.min(np.abs(args[:, None] - edges[None, :]), axis=1)
        return d > 1e-9 * max(1.0, float(np.max(np.abs(edges))))

    worst = 0.0
    want = n_samples
    attempts = 0
    while want > 0 and attempts < 8:
        attempts += 1
        m = 2 * want
        i1 = rng.integers(0, phi_all.size, m)
        i2 = rng.integers(0, phi_all.size, m)
        p1 = phi_all[i1]
        p2 = phi_all[i2]
        sgn = np.where(rng.random(m) < 0.5, 1.0, -1.0)
        if species == "minus":
            q = params.q_minus
            e_lo = q * np.maximum(p1, p2)
            e = e_lo + rng.random(m) * np.maximum(0.5 * w_cap * w_cap - e_lo, 1e-12)
            u1 = sgn * np.sqrt(2.0 * np.clip(e - q * p1, 0.0, None))
            u2 = sgn * np.sqrt(2.0 * np.clip(e - q * p2, 0.0, None))
            a1 = sgn * np.sqrt(2.0 * e) + alpha
            ok = (u1 != 0.0) & (u2 != 0.0) & away_from_edges(g_free, a1)
        elif kind == "shock":
            q = params.q_plus
            drop1 = 2.0 * q * (amp - p1)
            drop2 = 2.0 * q * (amp - p2)
            wlo = np.maximum(drop1, drop2)
            ww = wlo + rng.random(m) * np.maximum(w_cap * w_cap - wlo, 1e-12)
            u1 = sgn * np.sqrt(np.clip(ww - drop1, 0.0, None))
            u2 = sgn * np.sqrt(np.clip(ww - drop2, 0.0, None))
            a1 = sgn * np.sqrt(ww) + alpha
            ok = (u1 != 0.0) & (u2 != 0.0) & away_from_edges(g_free, a1)
        else:
            q = params.q_plus
            trapped_draw = (rng.random(m) < 0.4) & (g_tr is not None)
            e = rng.random(m) * 0.5 * w_cap * w_cap + 1e-12
            u1 = sgn * np.sqrt(2.0 * (e + q * p1))
            u2 = sgn * np.sqrt(2.0 * (e + q * p2))
            a1 = sgn * np.sqrt(2.0 * e) + alpha
            ok = away_from_edges(g_free, a1)
            if g_tr is not None and np.any(trapped_draw):
                # trapped class: same invariant, mirrored branch signs allowed
                mm_lo = 2.0 * q * (amp - np.minimum(p1, p2))
                mm_hi = 2.0 * q * amp
                mm = mm_lo + rng.random(m) * np.maximum(mm_hi - mm_lo, 0.0)
                v1 = np.clip(mm - 2.0 * q * (amp - p1), 0.0, None)
                v2 = np.clip(mm - 2.0 * q * (amp - p2), 0.0, None)
                t1 = sgn * np.sqrt(v1)
                t2 = -sgn * np.sqrt(v2)
                b1 = np.sqrt(mm) + alpha
                tok = (mm_hi - mm_lo > 0.0) & (v1 > 0.0) & (v2 > 0.0) & \
                    away_from_edges(g_tr, b1)
                u1 = np.where(trapped_draw, t1, u1)
                u2 = np.where(trapped_draw, t2, u2)
                ok = np.where(trapped_draw, tok, ok)
        # values go through the actual branch-selection code
        f1 = _phase_points(p1, u1, species, kind, params, amp, g_free, g_tr)
        f2 = _phase_points(p2, u2, species, kind, params, amp, g_free, g_tr)
        got = int(np.count_nonzero(ok))
        if got:
            worst = max(worst, float(np.max(np.abs(f1 - f2)[ok])))
            want -= got
    return worst


def verify_neutrality(profile: WaveProfile, tol=None) -> float:
    """|trapezoid of dV/dPhi along the profile|; analytically it telescopes
    to the difference of the end slopes. tol is recorded by callers only."""
    rhs = np.asarray(profile.pot.dv(profile.Phi), dtype=float)
    trapezoid = getattr(np, "trapezoid", np.trapz)
    return float(abs(trapezoid(rhs, profile.X_grid)))


def _panel_quad(f, edges) -> float:
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        total += half * float(np.sum(_GL_WEIGHTS * f(mid + half * _GL_NODES)))
    return total


def _slice_density(profile: WaveProfile, marginals, species: str,
                   params: PlasmaParams, phi: float) -> float:
    """Integral of the reconstructed slice over xi1, by panels whose edges
    are the mapped marginal breakpoints (smooth integrand inside each)."""
    alpha = params.alpha
    kind = profile.kind
    amp = profile.amplitude
    if species == "minus" or kind == "shock":
        g = marginals["minus"] if species == "minus" else marginals["plus"]
        q = params.q_minus if species == "minus" else params.q_plus
        cc = 2.0 * q * phi if species == "minus" else 2.0 * q * (amp - phi)
        lo_s, hi_s = g.quad_support()
        w_edges = sorted({abs(b - alpha) for b in (list(g.breakpoints()) + [lo_s, hi_s])})
        u_edges = [0.0] + [math.sqrt(w * w - cc) for w in w_edges if w * w > cc]
        u_edges = sorted(set(u_edges))
        total = 0.0
        for sgn in (1.0, -1.0):
            total += _panel_quad(
                lambda t, s=sgn: _eval_g(g, s * np.sqrt(t * t + cc) + alpha),
                u_edges)
        return total
    # plus species, solitary or train: free part in the end-state velocity
    g = marginals["plus"]
    q = params.q_plus
    c = 2.0 * q * phi
    lo_s, hi_s = g.quad_support()
    w_edges = sorted({abs(b - alpha) for b in (list(g.breakpoints()) + [lo_s, hi_s])})
    w_edges = [0.0] + [w for w in w_edges if w > 0.0]
    total = 0.0
    for sgn in (1.0, -1.0):
        total += _panel_quad(
            lambda t, s=sgn: _eval_g(g, s * t + alpha) * np.abs(t) /
            np.sqrt(t * t + c) if c > 0.0 else _eval_g(g, s * t + alpha),
            w_edges)
    g_tr = _trapped_marginal(marginals, params)
    if g_tr is not None and phi > 0.0:
        m = 2.0 * q * max(amp - phi, 0.0)
        band = math.sqrt(c)
        edges = {0.0, band}
        for b in g_tr.breakpoints():
            w = b - alpha
            if m <= w * w <= m + c:
                edges.add(math.sqrt(w * w - m))
        total += 2.0 * _panel_quad(
            lambda t: _eval_g(g_tr, np.sqrt(t * t + m) + alpha),
            sorted(edges))
    return total


def density_recovery_error(profile: WaveProfile, marginals, species: str, *,
                           max_slices: int = 65) -> float:
    """Max over sampled X of |integral of F(X,.) - rho(Phi(X))| / (1 + rho)."""
    params = _params_of(marginals, profile)
    settings = getattr(profile.pot, "settings", DEFAULT_QUADRATURE)
    idx = np.unique(np.linspace(0, profile.Phi.size - 1, max_slices).astype(int))
    phis = profile.Phi[idx]
    if species == "minus":
        ref = np.asarray(rho_minus(marginals["minus"], params, phis, settings), float)
    elif profile.kind == "shock":
        ref = np.asarray(rho_shock_plus(marginals["plus"], params, profile.amplitude,
                                        phis, settings), float)
    else:
        ref = np.asarray(rho_plus_inf(marginals["plus"], params, phis, settings), float)
        g_t = marginals.get("trapped")
        if g_t is not None:
            gt = g_t if isinstance(g_t, TrappedMarginal) else \
                TrappedMarginal(g_t, params.alpha)
            ref = ref + np.asarray(rho_plus_trapped(gt, params, profile.amplitude,
                                                    phis, settings), float)
    worst = 0.0
    for phi, r in zip(phis, ref):
        got = _slice_density(profile, marginals, species, params, float(phi))
        worst = max(worst, abs(got - float(r)) / (1.0 + float(r)))
    return worst


def phase_to_csv(dist: PhaseDistribution, dest) -> None:
    """Rows (X, xi1, F) with a short comment header."""
    own = isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__")
    fh = open(dest, "w", newline="") if own else dest
    try:
        fh.write(f"# species: {dist.species}\n")
        fh.write(f"# n_x: {dist.X_grid.size}\n")
        fh.write(f"# n_xi: {dist.xi1_grid.size}\n")
        fh.write("X,xi1,F\n")
        n_xi = dist.xi1_grid.size
        for i, x in enumerate(dist.X_grid):
            block = np.column_stack([
                np.full(n_xi, x), dist.xi1_grid, dist.values[i]])
            np.savetxt(fh, block, fmt="%.16e", delimiter=",")
    finally:
        if own:
            fh.close()


def phase_summary_json(dist: PhaseDistribution) -> dict:
    """Compact per-slice norms: L1 over xi1 (trapezoid) and the maximum."""
    trapezoid = getattr(np, "trapezoid", np.trapz)
    l1 = trapezoid(np.abs(dist.values), dist.xi1_grid, axis=1)
    mx = np.max(dist.values, axis=1)
    return {
        "species": dist.species,
        "kind": dist.profile.kind,
        "n_x": int(dist.X_grid.size),
        "n_xi": int(dist.xi1_grid.size),
        "slices": [
            {"X": float(x), "l1": float(a), "max": float(b)}
            for x, a, b in zip(dist.X_grid, l1, mx)
        ],
    }
