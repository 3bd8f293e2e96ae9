"""Wave profiles Phi(X) assembled from the potential by quadrature.

The reduced equation (d_X Phi)^2 = 2 V(Phi) degenerates at the zeros of V,
so profiles are never produced by stepping the ODE. The arc length
X(Phi) = int dPhi / sqrt(2 V) is accumulated by panel quadrature instead,
with a square-root substitution at simple zeros and geometric grading
toward quadratic ones, then inverted onto a uniform X grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from .conditions import ConditionError, check_exists
from .densities import rho_minus, rho_plus_inf, rho_plus_trapped, rho_shock_plus
from .sagdeev import TabulatedPotential

__all__ = [
    "WaveProfile",
    "build_shock",
    "build_solitary",
    "build_train",
    "load_profile_csv",
    "period",
    "profile_to_csv",
    "x_of_phi",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)

DEFAULT_POINTS_PER_BRANCH = 2001
DEFAULT_EPS_TAIL = 1e-6


@dataclass(frozen=True)
class WaveProfile:
    """One assembled wave: potential profile and slope on a uniform X grid."""

    kind: str
    X_grid: np.ndarray
    Phi: np.ndarray
    dPhi: np.ndarray
    amplitude: float
    period: float | None
    L: float | None
    eps_tail: float | None
    pot: object

    def __post_init__(self) -> None:
        if not (self.X_grid.shape == self.Phi.shape == self.dPhi.shape):
            raise ValueError("grid arrays must share one shape")
        if np.any(np.diff(self.X_grid) <= 0):
            raise ValueError("X grid must be strictly increasing")


def _slope_tol(pot) -> float:
    return 1e-8 * max(1.0, pot.sup_v() / max(pot.amplitude, 1e-300))


def _end_kind(pot, phi: float) -> str:
    """regular (V>0) | simple (V=0, slope) | flat (V=0, no slope)."""
    if abs(float(pot.v(phi))) > 1e-10 * max(1.0, pot.sup_v()):
        return "regular"
    if abs(float(pot.dv(phi))) > _slope_tol(pot):
        return "simple"
    return "flat"


def _panels(pot, t_nodes: np.ndarray, integrand) -> np.ndarray:
    """Per-interval Gauss panels of integrand over consecutive t nodes."""
    a, b = t_nodes[:-1], t_nodes[1:]
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    ts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = integrand(ts.ravel()).reshape(ts.shape)
    return np.abs(half) * (vals @ _GL_WEIGHTS)


def _sqrt_2v(pot, phi: np.ndarray) -> np.ndarray:
    v = np.asarray(pot.v(phi), dtype=float)
    if np.any(v <= 0.0):
        raise ValueError("potential not positive")
    return np.sqrt(2.0 * v)


def _insert(base: np.ndarray, extra: list[float]) -> np.ndarray:
    """Sorted union along base's direction, dropping near-duplicates."""
    direction = 1.0 if base[-1] >= base[0] else -1.0
    pts = np.sort(np.concatenate([base * direction, np.asarray(extra) * direction]))
    tol = 1e-12 * max(1.0, float(np.max(np.abs(pts))))
    keep = [pts[0]]
    for p in pts[1:]:
        if p - keep[-1] > tol:
            keep.append(p)
    if keep[-1] != pts[-1]:
        keep[-1] = pts[-1]
    return np.asarray(keep) * direction


def _half_table(pot, p: float, q: float, mode: str, zero_phi: float, n: int, kinks):
    """(phi nodes, segment lengths) for the traversal p -> q.

    mode: uniform | s0/s1 (sqrt substitution, zero at the p/q side) |
    g0/g1 (geometric grading toward a quadratic zero behind the p/q side).
    """
    inner = [k for k in kinks if min(p, q) < k < max(p, q)]
    if mode in ("s0", "s1"):
        anchor = p if mode == "s0" else q
        far = q if mode == "s0" else p
        sgn = 1.0 if far >= anchor else -1.0
        smax = math.sqrt(abs(far - anchor))
        s = np.linspace(0.0, smax, n + 1)
        s = _insert(s, [math.sqrt(abs(k - anchor)) for k in inner])
        if mode == "s1":
            s = s[::-1]
        phi = anchor + sgn * s * s
        seg = _panels(pot, s, lambda t: 2.0 * np.abs(t) / _sqrt_2v(pot, anchor + sgn * t * t))
        # re-squaring can land 1 ulp off the exact ends; pin both so the
        # assembled table joins its other half without a monotonicity break
        phi[0], phi[-1] = p, q
        return phi, seg
    if mode in ("g0", "g1"):
        near = p if mode == "g0" else q
        sgn = 1.0 if near >= zero_phi else -1.0
        r_lo = abs(near - zero_phi)
        r_hi = abs((q if mode == "g0" else p) - zero_phi)
        r = np.geomspace(r_lo, r_hi, n + 1)
        if mode == "g1":
            r = r[::-1]
        phi = zero_phi + sgn * r
        phi = _insert(phi, inner)
        phi[0], phi[-1] = p, q
    else:
        phi = _insert(np.linspace(p, q, n + 1), inner)
    seg = _panels(pot, phi, lambda t: 1.0 / _sqrt_2v(pot, t))
    return phi, seg


def x_of_phi(pot, from_phi: float, to_phi: float, settings=None, *,
             n: int = 800, eps_tail: float = DEFAULT_EPS_TAIL):
    """Monotone table (phi_i, X_i) of X(phi) accumulated from from_phi.

    Simple zeros of V at either endpoint are absorbed by the substitution
    phi = endpoint -/+ s^2; a quadratic zero is never reached and the table
    stops at distance eps_tail * amplitude from it. X is nonnegative and
    increasing along the direction of traversal.
    """
    amp = pot.amplitude
    slack = 1e-12 * max(1.0, amp)
    for name, val in (("from_phi", from_phi), ("to_phi", to_phi)):
        if not (-slack <= val <= amp + slack):
            raise ValueError(f"{name} outside [0, amplitude]")
    if from_phi == to_phi:
        return np.empty(0), np.empty(0)
    sgn = 1.0 if to_phi > from_phi else -1.0
    kind_a = _end_kind(pot, from_phi)
    kind_b = _end_kind(pot, to_phi)
    a_eff = from_phi + (sgn * eps_tail * amp if kind_a == "flat" else 0.0)
    b_eff = to_phi - (sgn * eps_tail * amp if kind_b == "flat" else 0.0)
    if (b_eff - a_eff) * sgn <= 0:
        raise ValueError("interval vanishes after tail truncation")
    mid = 0.5 * (a_eff + b_eff)
    kinks = [k.phi for k in pot.kinks()]

    mode_a = {"simple": "s0", "flat": "g0", "regular": "uniform"}[kind_a]
    mode_b = {"simple": "s1", "flat": "g1", "regular": "uniform"}[kind_b]
    phi_a, seg_a = _half_table(pot, a_eff, mid, mode_a, from_phi, n, kinks)
    phi_b, seg_b = _half_table(pot, mid, b_eff, mode_b, to_phi, n, kinks)
    phi = np.concatenate([phi_a, phi_b[1:]])
    x = np.concatenate([[0.0], np.cumsum(np.concatenate([seg_a, seg_b]))])
    return phi, x


def _gauss_segments(pot, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Integral of 1/sqrt(2V) from a[i] to b[i] by one 16-point panel each."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    flat = np.where(np.abs(half)[:, None] > 0.0, nodes, mid[:, None])
    vals = 1.0 / _sqrt_2v(pot, flat.ravel())
    return half * (vals.reshape(nodes.shape) @ _GL_WEIGHTS)


def _gauss_segments_sub(pot, zero: float, side: float, kz: float,
                        sa: np.ndarray, sb: np.ndarray) -> np.ndarray:
    """Same integral in s = sqrt(|phi - zero|), smooth through a simple zero.

    V is floored at a fraction of its local quadratic model kz*s^2 so that
    roundoff in a closed-form V cannot push an evaluation at distance ~1e-15
    from the zero to a nonpositive value.
    """
    half = 0.5 * (sb - sa)
    mid = 0.5 * (sb + sa)
    s_nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    psi = zero + side * s_nodes * s_nodes
    v = np.asarray(pot.v(psi.ravel()), dtype=float).reshape(psi.shape)
    v = np.maximum(v, 0.25 * kz * s_nodes * s_nodes)
    bad = v <= 0.0
    if np.any(bad):
        v = np.where(bad, 1.0, v)
    vals = 2.0 * s_nodes / np.sqrt(2.0 * v)
    if np.any(bad):
        vals = np.where(bad, 0.0, vals)
    return side * half * (vals @ _GL_WEIGHTS)


def _invert_table(phi_tab: np.ndarray, x_tab: np.ndarray, x_targets: np.ndarray, pot,
                  zero_start=None, zero_end=None):
    """phi values solving X(phi) = x_target to near machine accuracy.

    A monotone interpolant of the table seeds Newton iterations whose
    residual is the exact arc integral from the nearest table node, so the
    result is not limited by interpolation error. zero_start / zero_end give
    the phi of a simple zero of V sitting at the corresponding end of the
    table; targets on that side use the square-root substitution, in which
    both the residual and the slope stay regular through the zero.
    """
    # rounding in span*integer grids can overshoot the table hull by 1 ulp
    x_targets = np.clip(np.asarray(x_targets, dtype=float), x_tab[0], x_tab[-1])
    initial = PchipInterpolator(x_tab, phi_tab, extrapolate=False)
    trav = 1.0 if phi_tab[-1] >= phi_tab[0] else -1.0
    lo = min(float(phi_tab[0]), float(phi_tab[-1]))
    hi = max(float(phi_tab[0]), float(phi_tab[-1]))
    phi = np.clip(np.asarray(initial(x_targets), dtype=float), lo, hi)
    n_int = len(x_tab) - 1
    idx = np.clip(np.searchsorted(x_tab, x_targets, side="right") - 1, 0, n_int - 1)
    x_a = x_tab[idx]
    phi_a = phi_tab[idx]
    start_side = idx < n_int // 2 if zero_start is not None else np.zeros(idx.shape, bool)
    end_side = ~start_side if zero_end is not None else np.zeros(idx.shape, bool)
    if zero_start is not None and zero_end is None:
        pass
    elif zero_end is not None and zero_start is None:
        end_side = np.ones(idx.shape, bool)
        start_side = np.zeros(idx.shape, bool)
    plain = ~(start_side | end_side)
    span = float(x_tab[-1] - x_tab[0])
    out = phi.copy()
    for mask, zero in ((plain, None), (start_side, zero_start), (end_side, zero_end)):
        if not np.any(mask):
            continue
        xt = x_targets[mask]
        xa = x_a[mask]
        pa = phi_a[mask]
        p = out[mask]
        if zero is None:
            for _ in range(4):
                resid = xa + trav * _gauss_segments(pot, pa, p) - xt
                if np.max(np.abs(resid)) <= 1e-14 * max(1.0, span):
                    break
                v = np.maximum(np.asarray(pot.v(p), dtype=float), 0.0)
                p = np.clip(p - trav * resid * np.sqrt(2.0 * v), lo, hi)
        else:
            other = phi_tab[-1] if zero == phi_tab[0] else phi_tab[0]
            side = 1.0 if other >= zero else -1.0
            kz = abs(float(pot.dv(zero)))
            if kz <= 0.0:
                kz = 1e-300
            s_hull = math.sqrt(max(abs(hi - zero), abs(lo - zero)))
            sa = np.sqrt(np.abs(pa - zero))
            s = np.sqrt(np.clip(side * (p - zero), 0.0, None))
            for _ in range(4):
                resid = xa + trav * _gauss_segments_sub(pot, zero, side, kz, sa, s) - xt
                if np.max(np.abs(resid)) <= 1e-14 * max(1.0, span):
                    break
                psi = zero + side * s * s
                q = np.asarray(pot.v(psi), dtype=float)
                with np.errstate(divide="ignore", invalid="ignore"):
                    q = np.where(s > 0.0, q / (s * s), kz)
                slope = trav * side * 2.0 / np.sqrt(2.0 * np.maximum(q, 0.25 * kz))
                s = np.clip(s - resid / slope, 0.0, s_hull)
            p = np.clip(zero + side * s * s, lo, hi)
        out[mask] = p
    return out


def build_solitary(pot, settings=None, *, points_per_branch: int = DEFAULT_POINTS_PER_BRANCH,
                   eps_tail: float = DEFAULT_EPS_TAIL, table_n: int = 800,
                   check: bool = True) -> WaveProfile:
    """Even hump profile: Phi(0) = amplitude, decaying tails both sides."""
    if pot.kind != "solitary":
        raise ValueError("potential does not describe a solitary wave")
    if check:
        report = check_exists(pot)
        if not report.exists:
            raise ConditionError(report)
    beta = pot.amplitude
    phi_tab, x_tab = x_of_phi(pot, beta, 0.0, settings, n=table_n, eps_tail=eps_tail)
    span = float(x_tab[-1])
    xr = np.linspace(0.0, span, points_per_branch)
    zs = beta if _end_kind(pot, beta) == "simple" else None
    phir = _invert_table(phi_tab, x_tab, xr, pot, zero_start=zs)
    phir[0] = beta
    x_grid = np.concatenate([-xr[::-1], xr[1:]])
    phi = np.concatenate([phir[::-1], phir[1:]])
    dphi = -np.sign(x_grid) * np.sqrt(2.0 * np.maximum(np.asarray(pot.v(phi), float), 0.0))
    dphi[points_per_branch - 1] = 0.0
    return WaveProfile("solitary", x_grid, phi, dphi, beta, None, span, eps_tail, pot)


def build_shock(pot, settings=None, *, points_per_branch: int = DEFAULT_POINTS_PER_BRANCH,
                eps_tail: float = DEFAULT_EPS_TAIL, table_n: int = 800,
                check: bool = True) -> WaveProfile:
    """Monotone front profile anchored at Phi(0) = amplitude / 2."""
    if pot.kind != "shock":
        raise ValueError("potential does not describe a shock wave")
    if check:
        report = check_exists(pot)
        if not report.exists:
            raise ConditionError(report)
    phi_l = pot.amplitude
    up_phi, up_x = x_of_phi(pot, phi_l / 2.0, phi_l, settings, n=table_n, eps_tail=eps_tail)
    lo_phi, lo_x = x_of_phi(pot, phi_l / 2.0, 0.0, settings, n=table_n, eps_tail=eps_tail)
    left_span = float(up_x[-1])
    right_span = float(lo_x[-1])
    h = (left_span + right_span) / (2.0 * (points_per_branch - 1))
    k_left = int(math.floor(left_span / h))
    k_right = int(math.floor(right_span / h))
    x_grid = np.arange(-k_left, k_right + 1, dtype=float) * h
    phi = np.empty_like(x_grid)
    neg = x_grid < 0.0
    pos = x_grid > 0.0
    phi[neg] = _invert_table(up_phi, up_x, -x_grid[neg], pot)
    phi[pos] = _invert_table(lo_phi, lo_x, x_grid[pos], pot)
    phi[x_grid == 0.0] = phi_l / 2.0
    dphi = -np.sqrt(2.0 * np.maximum(np.asarray(pot.v(phi), float), 0.0))
    return WaveProfile("shock", x_grid, phi, dphi, phi_l, None, float(x_grid[-1]), eps_tail, pot)


def build_train(pot, settings=None, *, points_per_branch: int = DEFAULT_POINTS_PER_BRANCH,
                table_n: int = 800, check: bool = True) -> WaveProfile:
    """One full period: Phi(0) = 0, crest at half period, mirrored back."""
    if pot.kind != "train":
        raise ValueError("potential does not describe a wave train")
    if check:
        report = check_exists(pot)
        if not report.exists:
            raise ConditionError(report)
    beta = pot.amplitude
    phi_tab, x_tab = x_of_phi(pot, 0.0, beta, settings, n=table_n)
    half = float(x_tab[-1])
    gamma = 2.0 * half
    xr = np.linspace(0.0, half, points_per_branch)
    zs = 0.0 if _end_kind(pot, 0.0) == "simple" else None
    ze = beta if _end_kind(pot, beta) == "simple" else None
    phir = _invert_table(phi_tab, x_tab, xr, pot, zero_start=zs, zero_end=ze)
    phir[0] = 0.0
    phir[-1] = beta
    x_grid = np.concatenate([xr, gamma - xr[-2::-1]])
    phi = np.concatenate([phir, phir[-2::-1]])
    v = np.maximum(np.asarray(pot.v(phi), float), 0.0)
    dphi = np.sqrt(2.0 * v)
    dphi[points_per_branch - 1:] *= -1.0
    dphi[points_per_branch - 1] = 0.0
    return WaveProfile("train", x_grid, phi, dphi, beta, gamma, None, None, pot)


def period(pot, settings=None) -> float:
    """Full period 2 * int_0^amplitude dPhi / sqrt(2 V(Phi)).

    Valid when V has simple zeros at both ends; each half is integrated in
    the substituted variable s = sqrt(distance to the zero), which makes the
    integrand bounded and analytic between kinks.
    """
    amp = pot.amplitude
    eq_tol = 1e-10 * max(1.0, pot.sup_v())
    if abs(float(pot.v(0.0))) > eq_tol or abs(float(pot.v(amp))) > eq_tol:
        raise ValueError("period requires equilibria at both endpoints")
    tol = _slope_tol(pot)
    if abs(float(pot.dv(0.0))) <= tol or abs(float(pot.dv(amp))) <= tol:
        raise ValueError("period integral diverges at an equilibrium endpoint")
    kinks = [k.phi for k in pot.kinks() if 0.0 < k.phi < amp]
    half = amp / 2.0

    def near_zero(s):
        return 2.0 * s / math.sqrt(2.0 * float(pot.v(s * s)))

    def near_crest(s):
        return 2.0 * s / math.sqrt(2.0 * float(pot.v(amp - s * s)))

    smax = math.sqrt(half)
    pts_lo = sorted(math.sqrt(k) for k in kinks if k < half)
    pts_hi = sorted(math.sqrt(amp - k) for k in kinks if k > half)
    lo, _ = quad(near_zero, 0.0, smax, points=pts_lo or None,
                 epsabs=1e-13, epsrel=1e-11, limit=200)
    hi, _ = quad(near_crest, 0.0, smax, points=pts_hi or None,
                 epsabs=1e-13, epsrel=1e-11, limit=200)
    return 2.0 * (lo + hi)


def _density_columns(profile: WaveProfile):
    pot = profile.pot
    params = getattr(pot, "params", None)
    g_plus = getattr(pot, "g_plus", None)
    g_minus = getattr(pot, "g_minus", None)
    if params is None or g_plus is None or g_minus is None:
        nancol = np.full(profile.Phi.shape, math.nan)
        return nancol, nancol
    phi = np.clip(profile.Phi, 0.0, profile.amplitude)
    if profile.kind == "shock":
        rp = rho_shock_plus(g_plus, params, profile.amplitude, phi, pot.settings)
    else:
        rp = rho_plus_inf(g_plus, params, phi, pot.settings)
        if pot.g_trapped is not None:
            rp = rp + rho_plus_trapped(pot.g_trapped, params, profile.amplitude, phi, pot.settings)
    rm = rho_minus(g_minus, params, phi, pot.settings)
    return np.asarray(rp, float), np.asarray(rm, float)


def profile_to_csv(profile: WaveProfile, dest) -> None:
    """Write the profile table; see the README for the column contract."""
    rho_p, rho_m = _density_columns(profile)
    v = np.asarray(profile.pot.v(np.clip(profile.Phi, 0.0, profile.amplitude)), float)
    lines = [f"# kind: {profile.kind}", f"# amplitude: {profile.amplitude:.16e}"]
    if profile.period is not None:
        lines.append(f"# period: {profile.period:.16e}")
    if profile.L is not None:
        lines.append(f"# L: {profile.L:.16e}")
    if profile.eps_tail is not None:
        lines.append(f"# eps_tail: {profile.eps_tail:.16e}")
    kinks = profile.pot.kinks() if hasattr(profile.pot, "kinks") else []
    if kinks:
        lines.append("# kinks: " + ";".join(
            f"{k.phi:.16e}:{k.strength:.16e}" for k in kinks))
    lines.append("X,Phi,dPhi,V,rho_plus,rho_minus")
    for i in range(profile.X_grid.size):
        lines.append(
            f"{profile.X_grid[i]:.16e},{profile.Phi[i]:.16e},{profile.dPhi[i]:.16e},"
            f"{v[i]:.16e},{rho_p[i]:.16e},{rho_m[i]:.16e}"
        )
    text = "\n".join(lines) + "\n"
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)


def load_profile_csv(src) -> WaveProfile:
    """Rebuild a profile from its CSV; V comes back as a tabulated potential."""
    if hasattr(src, "read"):
        raw = src.read().splitlines()
    else:
        with open(src, "r", encoding="utf-8") as fh:
            raw = fh.read().splitlines()
    meta: dict[str, str] = {}
    rows = []
    for line in raw:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
        elif line[0].isdigit() or line[0] in "+-.":
            rows.append([float(tok) for tok in line.split(",")])
    if not rows:
        raise ValueError("no data rows in profile CSV")
    data = np.asarray(rows)
    kind = meta.get("kind", "solitary")
    amplitude = float(meta["amplitude"])
    phi, v = data[:, 1], data[:, 3]
    order = np.argsort(phi)
    phi_s, v_s = phi[order], v[order]
    keep = np.concatenate([[True], np.diff(phi_s) > 1e-15 * max(1.0, amplitude)])
    kinks = []
    for tok in meta.get("kinks", "").split(";"):
        at, _, strength = tok.partition(":")
        if at and strength:
            kinks.append((float(at), float(strength)))
    pot = TabulatedPotential(phi_s[keep], v_s[keep], kind=kind, kinks=tuple(kinks))
    return WaveProfile(
        kind=kind,
        X_grid=data[:, 0],
        Phi=data[:, 1],
        dPhi=data[:, 2],
        amplitude=amplitude,
        period=float(meta["period"]) if "period" in meta else None,
        L=float(meta["L"]) if "L" in meta else None,
        eps_tail=float(meta["eps_tail"]) if "eps_tail" in meta else None,
        pot=pot,
    )
