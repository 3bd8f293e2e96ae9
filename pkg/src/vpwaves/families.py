"""Families of distinct waves built on top of a single profile problem.

Three mechanisms generate the members.  A trapped population can be
reshaped without moving the potential it closes, an untrapped potential
that dips below zero past its first positive zero can be topped up with a
small trapped box, and periodic trains built from box marginals can be
rescaled or matched against a thermalized electron background to hit any
period below a constructive ceiling.  Every constructor re-validates its
output through the existence conditions before handing it back.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar

from .conditions import ConditionError, ConditionReport, check_exists
from .densities import (
    DEFAULT_QUADRATURE,
    QuadratureSettings,
    rho_minus,
    rho_plus_inf,
    rho_plus_trapped,
)
from .model import Marginal, PlasmaParams, TrappedMarginal
from .profile import period
from .sagdeev import KinkInfo, SagdeevPotential, _edge_jumps, v_infinity, v_trapped

__all__ = [
    "FamilyMember",
    "boltzmann_gamma_star",
    "boltzmann_gamma_tilde",
    "boltzmann_train_match",
    "rescale_to_period",
    "solitary_inject_case_b",
    "solitary_inject_case_c",
    "solitary_perturb",
    "train_box_family",
]


@dataclass(frozen=True)
class FamilyMember:
    """One wave produced by a family constructor.

    Carries the marginals that define it, the potential when one was
    assembled, the condition report for that potential, and the knobs the
    constructor chose, so the member can be serialized and re-ingested.
    """

    kind: str
    amplitude: float
    parameters: dict = field(default_factory=dict)
    g_plus: Marginal | None = None
    g_minus: Marginal | None = None
    g_trapped: Marginal | TrappedMarginal | None = None
    pot: object | None = None
    report: ConditionReport | None = None
    period: float | None = None

    def to_dict(self) -> dict:
        """JSON-ready description: parameters, marginal specs, period, verdict."""

        def spec(g):
            return None if g is None else g.to_dict()

        return {
            "kind": self.kind,
            "amplitude": self.amplitude,
            "parameters": dict(self.parameters),
            "marginals": {
                "g_plus": spec(self.g_plus),
                "g_minus": spec(self.g_minus),
                "g_trapped": spec(self.g_trapped),
            },
            "period": self.period,
            "verdict": None if self.report is None else self.report.verdict,
        }


# ---------------------------------------------------------------------------
# reshaping an existing trapped population


def _cubic_weight(g: Marginal, alpha: float, hi: float):
    """Cumulative mass of g against (x - alpha)^2 over (alpha, hi).

    Returns the total together with an inverse lookup.  Boxes invert in
    closed form; other shapes fall back to adaptive quadrature.
    """
    if g.kind == "piecewise":
        segs: list[tuple[float, float, float]] = []
        for p_lo, p_hi, h in g.pieces:
            a, b = max(p_lo, alpha), min(p_hi, hi)
            if b > a and h > 0.0:
                segs.append((a, b, h))
        cums = [0.0]
        for a, b, h in segs:
            cums.append(cums[-1] + h * ((b - alpha) ** 3 - (a - alpha) ** 3) / 3.0)
        total = cums[-1]

        def invert(target: float) -> float:
            if not segs or target <= 0.0:
                return alpha
            if target >= total:
                return segs[-1][1]
            i = min(bisect.bisect_right(cums, target) - 1, len(segs) - 1)
            a, _, h = segs[i]
            rem = target - cums[i]
            return alpha + ((a - alpha) ** 3 + 3.0 * rem / h) ** (1.0 / 3.0)

        return total, invert

    lo_s, hi_s = g.quad_support()
    a0, b0 = max(alpha, lo_s), min(hi, hi_s)
    if b0 <= a0:
        return 0.0, lambda target: alpha
    inner = [float(k) for k in g.breakpoints() if a0 < k < b0]

    def weighted(x: float) -> float:
        return float(g(x)) * (x - alpha) ** 2

    def up_to(x: float) -> float:
        pts = [p for p in inner if p < x]
        val, _ = quad(weighted, a0, x, points=pts or None, limit=200)
        return val

    total = up_to(b0)

    def invert(target: float) -> float:
        if target <= 0.0:
            return a0
        if target >= total:
            return b0
        return float(brentq(lambda x: up_to(x) - target, a0, b0,
                            xtol=1e-14 * max(1.0, abs(b0))))

    return total, invert


def _region_factor(alpha: float, cut_zero: float, cut_double: float, x: float) -> float:
    if x <= alpha:
        return 1.0
    if x <= cut_zero:
        return 0.0
    if x <= cut_double:
        return 2.0
    return 1.0


def _reweight(g: Marginal, alpha: float, cut_zero: float, cut_double: float) -> Marginal:
    """Zero g on (alpha, cut_zero], double it on (cut_zero, cut_double]."""
    if g.kind == "piecewise":
        pieces: list[tuple[float, float, float]] = []
        cuts = (alpha, cut_zero, cut_double)
        for lo, hi, h in g.pieces:
            edges = sorted({lo, hi, *(c for c in cuts if lo < c < hi)})
            for a, b in zip(edges[:-1], edges[1:]):
                f = _region_factor(alpha, cut_zero, cut_double, 0.5 * (a + b))
                if h * f > 0.0:
                    pieces.append((a, b, h * f))
        return Marginal.piecewise(pieces)
    if g.kind == "tabulated":
        knots = np.asarray(g.knots, dtype=float)
        pts = {float(k) for k in knots}
        for c in (alpha, cut_zero, cut_double):
            if knots[0] < c < knots[-1]:
                # a narrow two-knot bridge emulates the jump of the reshaped
                # density; wide enough to survive kernel changes of variable
                pts.add(float(c))
                pts.add(float(c + 1e-12 * (1.0 + abs(c))))
        ks = sorted(pts)
        vals = [float(g(k)) * _region_factor(alpha, cut_zero, cut_double, k) for k in ks]
        return Marginal.tabulated(ks, vals)
    raise ValueError("trapped marginal must be piecewise or tabulated")


def solitary_perturb(G, beta: float, params: PlasmaParams, tau: float, *,
                     settings: QuadratureSettings = DEFAULT_QUADRATURE) -> FamilyMember:
    """Reshape a trapped population without moving the wave it closes.

    Trapped mass is weighed by the squared distance to the frame speed.
    The lowest tau fraction of that weight is removed and exactly
    compensated by doubling the next tau fraction, so the closing value of
    the potential at the crest is untouched while the population changes
    on a set of positive measure.  The reshaped population never falls
    below zero and never lowers the potential anywhere on [0, beta]; both
    facts are re-checked numerically before the member is returned.
    """
    if not (0.0 < tau < 0.5):
        raise ValueError("tau must lie in (0, 1/2)")
    if not (beta > 0.0 and math.isfinite(beta)):
        raise ValueError("beta must be positive and finite")
    inner = G.g if isinstance(G, TrappedMarginal) else G
    if inner.kind == "maxwellian":
        raise ValueError("trapped marginal must be piecewise or tabulated")
    alpha = params.alpha
    window_hi = alpha + math.sqrt(2.0 * params.q_plus * beta)
    total, invert = _cubic_weight(inner, alpha, window_hi)
    if total <= 0.0:
        raise ValueError("no trapped mass to perturb")
    cut_zero = float(invert(tau * total))
    cut_double = float(invert(2.0 * tau * total))
    reshaped = _reweight(inner, alpha, cut_zero, cut_double)

    # the crest closure must be preserved and the potential never lowered
    base_crest = float(v_trapped(inner, params, beta, beta, settings))
    new_crest = float(v_trapped(reshaped, params, beta, beta, settings))
    tight = 1e-12 if inner.kind == "piecewise" else 1e-9
    tol = tight * max(1.0, abs(base_crest))
    if abs(new_crest - base_crest) > tol:
        raise RuntimeError("reshaped population shifts the crest closure")
    grid = np.linspace(0.0, beta, 257)
    gain = (np.asarray(v_trapped(reshaped, params, beta, grid, settings), dtype=float)
            - np.asarray(v_trapped(inner, params, beta, grid, settings), dtype=float))
    if float(np.min(gain)) < -tol:
        raise RuntimeError("reshaped population lowers the potential somewhere")

    out_g = TrappedMarginal(reshaped, alpha) if isinstance(G, TrappedMarginal) else reshaped
    weighted_mass = 2.0 * params.e_plus / params.q_plus * total
    return FamilyMember(
        kind="perturb",
        amplitude=float(beta),
        parameters={
            "tau": float(tau),
            "cut_zero": cut_zero,
            "cut_double": cut_double,
            "weighted_mass": weighted_mass,
        },
        g_trapped=out_g,
    )


# ---------------------------------------------------------------------------
# injecting a trapped box past the first zero of the untrapped potential


class _Untrapped:
    """Uniform view of an untrapped potential: value, slope, kinks."""

    def __init__(self, v, dv, kinks_for, g_plus, g_minus):
        self.v = v
        self.dv = dv
        self.kinks_for = kinks_for
        self.g_plus = g_plus
        self.g_minus = g_minus


def _vectorized(f: Callable[[float], float]):
    def wrapped(phi):
        arr = np.asarray(phi, dtype=float)
        if arr.ndim == 0:
            return float(f(float(arr)))
        return np.array([float(f(float(x))) for x in arr.ravel()]).reshape(arr.shape)

    return wrapped


def _untrapped(v_inf, params: PlasmaParams, settings: QuadratureSettings) -> _Untrapped:
    if (hasattr(v_inf, "g_plus") and hasattr(v_inf, "g_minus")
            and getattr(v_inf, "kind", None) != "shock"
            and getattr(v_inf, "g_plus", None) is not None):
        gp, gm = v_inf.g_plus, v_inf.g_minus
        p = getattr(v_inf, "params", None) or params

        def value(phi):
            return v_infinity(gp, gm, p, phi, settings)

        def slope(phi):
            arr = np.asarray(phi, dtype=float)
            out = (p.e_plus * np.asarray(rho_plus_inf(gp, p, arr, settings), dtype=float)
                   - p.e_minus * np.asarray(rho_minus(gm, p, arr, settings), dtype=float))
            return float(out) if arr.ndim == 0 else out

        def kinks_for(amp: float) -> list[KinkInfo]:
            probe = SagdeevPotential.solitary(gp, gm, amp, p, settings=settings)
            return probe.kinks()

        return _Untrapped(value, slope, kinks_for, gp, gm)
    if hasattr(v_inf, "v") and hasattr(v_inf, "dv"):
        base_kinks = list(v_inf.kinks()) if hasattr(v_inf, "kinks") else []

        def kinks_for(amp: float) -> list[KinkInfo]:
            return [k for k in base_kinks if 0.0 <= k.phi <= amp]

        return _Untrapped(lambda x: np.asarray(v_inf.v(x), dtype=float) if np.ndim(x) else float(v_inf.v(x)),
                          lambda x: np.asarray(v_inf.dv(x), dtype=float) if np.ndim(x) else float(v_inf.dv(x)),
                          kinks_for, None, None)
    if callable(v_inf):
        value = _vectorized(v_inf)

        def slope_scalar(x: float) -> float:
            h = 1e-6 * max(1.0, abs(x))
            if x - h < 0.0:
                # parabolic one-sided slope; a plain forward difference is
                # biased by O(h) at the flat equilibrium every quasineutral
                # wave has at zero, which flips its tail classification
                return (-3.0 * float(v_inf(x)) + 4.0 * float(v_inf(x + h))
                        - float(v_inf(x + 2.0 * h))) / (2.0 * h)
            return (float(v_inf(x + h)) - float(v_inf(x - h))) / (2.0 * h)

        return _Untrapped(value, _vectorized(slope_scalar), lambda amp: [], None, None)
    raise TypeError("v_inf must be a potential-like object or a callable")


class _AugmentedPotential:
    """Untrapped evaluator combined with one explicit trapped population.

    Walks and talks like a solitary-wave potential (value, slope, kink
    catalogue, amplitude guard) so the condition checks and the profile
    builder can consume it unchanged.
    """

    kind = "solitary"

    def __init__(self, untrapped: _Untrapped, g_trapped, amplitude: float,
                 params: PlasmaParams, settings: QuadratureSettings = DEFAULT_QUADRATURE):
        self._untrapped = untrapped
        self.g_trapped = g_trapped
        self.amplitude = float(amplitude)
        self.params = params
        self.settings = settings
        self.g_plus = untrapped.g_plus
        self.g_minus = untrapped.g_minus
        self._kinks = self._merge_kinks()
        self._sup: float | None = None

    def _merge_kinks(self) -> list[KinkInfo]:
        p = self.params
        box = self.g_trapped.g if isinstance(self.g_trapped, TrappedMarginal) else self.g_trapped
        two_root = 2.0 * p.e_plus * math.sqrt(2.0 * p.q_plus)
        extra: list[KinkInfo] = []
        for pos, jump in _edge_jumps(box):
            w = pos - p.alpha
            if w > 0.0 and jump > 0.0:
                phi_star = self.amplitude - w * w / (2.0 * p.q_plus)
                if 0.0 <= phi_star <= self.amplitude:
                    extra.append(KinkInfo(float(phi_star), two_root * jump))
        sep = math.sqrt(2.0 * p.q_plus * self.amplitude) + p.alpha
        d = 1e-9 * (1.0 + abs(sep))
        sep_val = max(float(box(sep - d)), float(box(sep)))
        if sep_val > 0.0:
            extra.append(KinkInfo(0.0, two_root * sep_val))
        merged: dict[float, float] = {}
        for k in list(self._untrapped.kinks_for(self.amplitude)) + extra:
            merged[k.phi] = merged.get(k.phi, 0.0) + k.strength
        return sorted((KinkInfo(phi, s) for phi, s in merged.items()), key=lambda k: k.phi)

    def _clip(self, phi):
        arr = np.atleast_1d(np.asarray(phi, dtype=float))
        slack = 1e-12 * max(1.0, self.amplitude)
        if np.any(arr < -slack) or np.any(arr > self.amplitude + slack):
            raise ValueError(f"phi outside the admissible interval [0, {self.amplitude}]")
        return np.clip(arr, 0.0, self.amplitude), np.asarray(phi).ndim == 0

    def v(self, phi):
        arr, scalar = self._clip(phi)
        out = (np.asarray(self._untrapped.v(arr), dtype=float)
               + np.atleast_1d(np.asarray(
                   v_trapped(self.g_trapped, self.params, self.amplitude, arr, self.settings),
                   dtype=float)))
        return float(out[0]) if scalar else out

    def dv(self, phi):
        arr, scalar = self._clip(phi)
        band = np.atleast_1d(np.asarray(
            rho_plus_trapped(self.g_trapped, self.params, self.amplitude, arr, self.settings),
            dtype=float))
        out = np.asarray(self._untrapped.dv(arr), dtype=float) + self.params.e_plus * band
        return float(out[0]) if scalar else out

    def kinks(self) -> list[KinkInfo]:
        return list(self._kinks)

    def sup_v(self) -> float:
        if self._sup is None:
            grid = np.linspace(0.0, self.amplitude, 1025)
            self._sup = float(np.max(np.abs(self.v(grid))))
        return self._sup


def _unit_box_height(params: PlasmaParams) -> float:
    return 1.0 / (2.0 * params.e_plus * math.sqrt(2.0 * params.q_plus))


def _finish_injection(kind: str, ev: _Untrapped, box: Marginal, amplitude: float,
                      beta_star: float, params: PlasmaParams,
                      settings: QuadratureSettings, parameters: dict) -> FamilyMember:
    trapped = TrappedMarginal(box, params.alpha)
    pot = _AugmentedPotential(ev, trapped, amplitude, params, settings)
    crest = abs(float(pot.v(amplitude)))
    if crest > 1e-10 * max(1.0, pot.sup_v()):
        raise RuntimeError("crest closure misses zero")
    star = beta_star if (ev.g_minus is None and math.isfinite(beta_star)) else None
    report = check_exists(pot, beta_star_value=star)
    if not report.exists:
        raise ConditionError(report)
    return FamilyMember(kind=kind, amplitude=float(amplitude), parameters=parameters,
                        g_plus=ev.g_plus, g_minus=ev.g_minus, g_trapped=trapped,
                        pot=pot, report=report)


def solitary_inject_case_b(v_inf, beta: float, beta_sharp: float, beta_star: float,
                           params: PlasmaParams, *,
                           settings: QuadratureSettings = DEFAULT_QUADRATURE,
                           grid_points: int = 512) -> FamilyMember:
    """Wave with a trapped box where the untrapped potential dives.

    Requires the untrapped potential to leave its first positive zero with
    strictly negative slope.  A box over the whole trapped window of that
    zero is scaled so the combined potential returns to zero at a new
    crest; the crest is pulled toward the first zero until the combined
    slope stays below a quarter of the departure rate the whole way.
    """
    ev = _untrapped(v_inf, params, settings)
    if not (beta_sharp > 0.0 and math.isfinite(beta_sharp)):
        raise ValueError("beta_sharp must be positive and finite")
    hi0 = min(beta_sharp + beta, beta_star)
    if not hi0 > beta_sharp:
        raise ValueError("classification mismatch: no room above the first zero")
    scale = float(np.max(np.abs(np.asarray(
        ev.v(np.linspace(0.0, beta_sharp, 513)), dtype=float))))
    if abs(float(ev.v(beta_sharp))) > 1e-8 * max(1.0, scale):
        raise ValueError(
            "classification mismatch: the untrapped potential is not zero at beta_sharp")
    pull = -float(ev.dv(beta_sharp))
    if not pull > 1e-8 * max(1.0, scale):
        raise ValueError("classification mismatch: the untrapped potential must leave "
                         "its first zero with negative slope")

    height = _unit_box_height(params)
    box_top = params.alpha + math.sqrt(2.0 * params.q_plus * beta_sharp)
    unit_box = Marginal.piecewise([(params.alpha, box_top, height)])
    closed_crest = (2.0 / 3.0) * beta_sharp ** 1.5

    span = hi0 - beta_sharp
    chosen = None
    for _ in range(200):
        amp = beta_sharp + span
        grid = beta_sharp + span * np.linspace(0.0, 1.0, grid_points + 1)[1:]
        vals = np.asarray(ev.v(grid), dtype=float)
        slopes = np.asarray(ev.dv(grid), dtype=float)
        if float(vals[-1]) < 0.0 and float(np.max(slopes)) <= -0.5 * pull:
            lift_crest = float(v_trapped(unit_box, params, amp, amp, settings))
            lam = -float(vals[-1]) / lift_crest
            rise = np.sqrt(np.maximum(grid - (amp - beta_sharp), 0.0))
            if lam > 0.0 and float(np.max(slopes + lam * rise)) <= -0.25 * pull:
                chosen = (amp, lam, lift_crest)
                break
        span *= 0.5
    if chosen is None:
        raise ValueError(
            "classification mismatch: found no admissible crest above the first zero")
    amp, lam, lift_crest = chosen
    if abs(lift_crest - closed_crest) > 1e-12 * max(1.0, closed_crest):
        raise RuntimeError("trapped box closure drifted from its closed form")

    return _finish_injection(
        "inject-b", ev, unit_box.scaled(lam), amp, beta_star, params, settings,
        parameters={
            "beta_sharp": float(beta_sharp),
            "descent_rate": pull,
            "box_scale": lam,
            "box_top": box_top,
            "box_height": height * lam,
        })


def solitary_inject_case_c(v_inf, beta: float, beta_sharp: float, beta_star: float,
                           params: PlasmaParams, *,
                           settings: QuadratureSettings = DEFAULT_QUADRATURE,
                           grid_points: int = 4096) -> FamilyMember:
    """Wave with a trapped box when the untrapped potential leaves flat.

    Requires the untrapped potential to touch zero at its first positive
    zero with vanishing slope while still turning negative somewhere
    beyond it.  The crest goes where the drop per unit distance from the
    first zero is steepest; a two-edge box spanning the energies between
    half the base amplitude and the full base amplitude lifts the
    potential back to a simple zero there, and its contribution is concave
    past the first zero, which keeps the combined potential positive.
    """
    ev = _untrapped(v_inf, params, settings)
    if not (beta_sharp > 0.0 and math.isfinite(beta_sharp)):
        raise ValueError("beta_sharp must be positive and finite")
    if beta > beta_sharp * (1.0 + 1e-12):
        raise ValueError("classification mismatch: base amplitude exceeds the first zero")
    scale = float(np.max(np.abs(np.asarray(
        ev.v(np.linspace(0.0, beta_sharp, 513)), dtype=float))))
    if abs(float(ev.v(beta_sharp))) > 1e-8 * max(1.0, scale):
        raise ValueError(
            "classification mismatch: the untrapped potential is not zero at beta_sharp")
    if abs(float(ev.dv(beta_sharp))) > 1e-8 * max(1.0, scale):
        raise ValueError("classification mismatch: the untrapped potential must leave "
                         "its first zero with vanishing slope")

    cap = beta_star
    if not math.isfinite(cap):
        cap = getattr(v_inf, "amplitude", beta_sharp + 8.0 * beta)
    xs = np.linspace(beta_sharp, cap, 4097)[1:]
    vsc = np.asarray(ev.v(xs), dtype=float)
    if float(np.min(vsc)) >= 0.0:
        raise ValueError(
            "classification mismatch: the untrapped potential never turns negative "
            "past the first zero")
    probe = float(xs[int(np.argmin(vsc))])

    # steepest average descent from the first zero fixes the new crest
    ys = beta_sharp + (probe - beta_sharp) * np.linspace(0.0, 1.0, grid_points + 1)[1:]
    ratios = np.asarray(ev.v(ys), dtype=float) / (ys - beta_sharp)
    j = int(np.argmin(ratios))
    lo_b = ys[max(j - 1, 0)]
    hi_b = ys[min(j + 1, len(ys) - 1)]
    res = minimize_scalar(lambda x: float(ev.v(x)) / (x - beta_sharp),
                          bounds=(float(lo_b), float(hi_b)), method="bounded",
                          options={"xatol": 1e-13 * max(1.0, probe)})
    amp = float(res.x)
    pull = -float(res.fun)
    if not (pull > 0.0 and float(ev.v(amp)) < 0.0):
        raise ValueError(
            "classification mismatch: no descent found past the first zero")

    height = _unit_box_height(params)
    box_lo = params.alpha + math.sqrt(2.0 * params.q_plus * (amp - beta))
    box_hi = params.alpha + math.sqrt(2.0 * params.q_plus * (amp - 0.5 * beta))
    unit_box = Marginal.piecewise([(box_lo, box_hi, height)])

    def lift_closed(phi):
        t1 = np.maximum(np.asarray(phi, dtype=float) - 0.5 * beta, 0.0) ** 1.5
        t2 = np.maximum(np.asarray(phi, dtype=float) - beta, 0.0) ** 1.5
        return (2.0 / 3.0) * (t1 - t2)

    phis = np.linspace(0.0, amp, 257)
    lift = np.asarray(v_trapped(unit_box, params, amp, phis, settings), dtype=float)
    closed = lift_closed(phis)
    if float(np.max(np.abs(lift - closed))) > 1e-12 * max(1.0, float(np.max(closed))):
        raise RuntimeError("trapped box closure drifted from its closed form")
    # concavity past the first zero keeps the lifted potential above the chord
    mid = np.linspace(beta_sharp, amp, 130)[1:-1]
    curvature = 0.5 * ((mid - 0.5 * beta) ** -0.5 - (mid - beta) ** -0.5)
    if float(np.max(curvature)) >= 0.0:
        raise RuntimeError("trapped box contribution is not concave past the first zero")

    lift_crest = float(v_trapped(unit_box, params, amp, amp, settings))
    lam = -float(ev.v(amp)) / lift_crest
    if not lam > 0.0:
        raise RuntimeError("trapped box scale must be positive")

    return _finish_injection(
        "inject-c", ev, unit_box.scaled(lam), amp, beta_star, params, settings,
        parameters={
            "beta_sharp": float(beta_sharp),
            "descent_rate": pull,
            "box_scale": lam,
            "box_lo": box_lo,
            "box_hi": box_hi,
            "box_height": height * lam,
        })


# ---------------------------------------------------------------------------
# periodic trains from box marginals


def train_box_family(params: PlasmaParams, beta: float, tau: float, *,
                     settings: QuadratureSettings = DEFAULT_QUADRATURE) -> FamilyMember:
    """Periodic wave whose two species are flat boxes of matched width.

    The ion box is centered on the frame speed and the electron boxes sit
    just outside the electron hole, sized so the two charge densities are
    the same ridge function read from opposite ends of [0, beta].  The
    assembled potential is compared against its closed form before the
    member is returned.
    """
    if not (beta > 0.0 and math.isfinite(beta)):
        raise ValueError("beta must be positive and finite")
    if not (tau > 0.0 and math.isfinite(tau)):
        raise ValueError("tau must be positive and finite")
    p = params
    a = p.alpha
    w_plus = math.sqrt(2.0 * p.q_plus * tau)
    h_plus = Marginal.piecewise([(a - w_plus, a + w_plus, _unit_box_height(p))])
    w_lo = math.sqrt(2.0 * p.q_minus * beta)
    w_hi = math.sqrt(2.0 * p.q_minus * (beta + tau))
    hm = 1.0 / (2.0 * p.e_minus * math.sqrt(2.0 * p.q_minus))
    h_minus = Marginal.piecewise([(a - w_hi, a - w_lo, hm), (a + w_lo, a + w_hi, hm)])
    pot = SagdeevPotential.train(h_plus, h_minus, beta, p, settings=settings)

    def ridge_area(x):
        # integral of sqrt(x + tau) - sqrt(x) from 0
        x = np.asarray(x, dtype=float)
        return (2.0 / 3.0) * ((x + tau) ** 1.5 - x ** 1.5 - tau ** 1.5)

    grid = np.linspace(0.0, beta, 257)
    closed = ridge_area(grid) - (ridge_area(beta) - ridge_area(np.maximum(beta - grid, 0.0)))
    vals = np.asarray(pot.v(grid), dtype=float)
    v_scale = max(1.0, float(np.max(np.abs(closed))))
    if float(np.max(np.abs(vals - closed))) > 1e-10 * v_scale:
        raise RuntimeError("assembled potential drifts from its closed form")
    if abs(float(pot.v(beta))) > 1e-12 * v_scale:
        raise RuntimeError("crest value misses zero")
    report = check_exists(pot)
    if not report.exists:
        raise ConditionError(report)
    gamma = float(period(pot, settings))
    return FamilyMember(kind="train-box", amplitude=float(beta),
                        parameters={"tau": float(tau), "beta": float(beta)},
                        g_plus=h_plus, g_minus=h_minus, g_trapped=None,
                        pot=pot, report=report, period=gamma)


def rescale_to_period(member: FamilyMember, gamma_target: float, *,
                      settings: QuadratureSettings = DEFAULT_QUADRATURE) -> FamilyMember:
    """Same train shape with every marginal scaled to hit a target period.

    The potential is linear in the marginals, so scaling them by c
    multiplies the potential by c and divides the period by sqrt(c).
    """
    if not (gamma_target > 0.0 and math.isfinite(gamma_target)):
        raise ValueError("target period must be positive")
    pot = member.pot
    if pot is None or getattr(pot, "kind", None) != "train":
        raise ValueError("only wave-train members can be rescaled")
    gamma0 = member.period if member.period is not None else float(period(pot, settings))
    factor = (gamma0 / gamma_target) ** 2
    g_plus = member.g_plus.scaled(factor)
    g_minus = member.g_minus.scaled(factor)
    g_trapped = member.g_trapped.scaled(factor) if member.g_trapped is not None else None
    new_pot = SagdeevPotential.train(g_plus, g_minus, member.amplitude, pot.params,
                                     g_trapped=g_trapped, settings=settings)
    gamma1 = float(period(new_pot, settings))
    if abs(gamma1 - gamma_target) > 1e-8 * gamma_target:
        raise RuntimeError("rescaled period misses the target")
    report = check_exists(new_pot)
    if not report.exists:
        raise ConditionError(report)
    parameters = dict(member.parameters)
    parameters.update({"rescaled_by": factor, "period_target": float(gamma_target)})
    return FamilyMember(kind=member.kind, amplitude=member.amplitude,
                        parameters=parameters, g_plus=g_plus, g_minus=g_minus,
                        g_trapped=g_trapped, pot=new_pot, report=report, period=gamma1)


# ---------------------------------------------------------------------------
# trains matched against a thermalized electron background

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(128)


def _matched_pieces(tau: float, beta: float, kappa: float):
    """Balance ratio and dimensionless potential of the matched train."""
    plus_at_beta = float(_three_halves_diff(tau, beta)) - beta ** 1.5
    ratio = -math.expm1(-kappa * beta) / plus_at_beta

    def dimensionless(phi):
        phi = np.asarray(phi, dtype=float)
        plus = (phi + tau) ** 1.5 - phi ** 1.5 - tau ** 1.5
        return ratio * plus + np.expm1(-kappa * phi)

    return ratio, dimensionless


def _three_halves_diff(base, step):
    """(base+step)**1.5 - base**1.5 without cancellation for small steps."""
    top = base + step
    return step * (top + np.sqrt(top * base) + base) / (np.sqrt(top) + np.sqrt(base))


def boltzmann_gamma_tilde(tau: float, beta: float, kappa: float) -> float:
    """Dimensionless period of the thermal-electron train at (tau, beta).

    Both endpoints are simple zeros, so each half of the period integral
    is taken in the square-root distance to its endpoint, where the
    integrand is analytic and a fixed Gauss-Legendre rule converges to
    machine accuracy.
    """
    if not (kappa > 0.0 and math.isfinite(kappa)):
        raise ValueError("kappa must be positive and finite")
    cap = 1.0 / (10.0 * kappa)
    hi = cap * (1.0 + 1e-12)
    if not (0.0 < tau <= hi and 0.0 < beta <= hi):
        raise ValueError("tau and beta must lie in (0, 1/(10 kappa)]")
    ratio, _ = _matched_pieces(tau, beta, kappa)
    decay_at_beta = math.exp(-kappa * beta)

    # offset forms from each endpoint; plain evaluation loses the value to
    # rounding once beta is small and the offset sits near the crest zero
    def from_left(d):
        plus = _three_halves_diff(tau, d) - d ** 1.5
        return ratio * plus + np.expm1(-kappa * d)

    def from_right(d):
        plus_drop = _three_halves_diff(beta - d, d) - _three_halves_diff(beta - d + tau, d)
        return ratio * plus_drop + decay_at_beta * np.expm1(kappa * d)

    def half(edge_value) -> float:
        s_max = math.sqrt(0.5 * beta)
        half_w = 0.5 * s_max
        s = half_w * (_GL_NODES + 1.0)
        vals = edge_value(s * s)
        if float(np.min(vals)) <= 0.0:
            raise ArithmeticError("matched potential not positive inside the period")
        return half_w * float((2.0 * s / np.sqrt(vals)) @ _GL_WEIGHTS)

    return 2.0 * (half(from_left) + half(from_right))


def boltzmann_gamma_star(params: PlasmaParams) -> float:
    """Largest period the thermal-electron matching can reach."""
    bz = params.boltzmann
    if bz is None:
        raise ValueError("params must carry the thermal-electron constants")
    cap = 1.0 / (10.0 * bz.kappa)
    dim = math.sqrt(bz.kappa / (2.0 * params.e_minus * bz.rho))
    return dim * boltzmann_gamma_tilde(cap, cap, bz.kappa)


def _match_beta(tau: float, cap: float, kappa: float, tilde_target: float) -> float:
    def gap(b: float) -> float:
        return boltzmann_gamma_tilde(tau, b, kappa) - tilde_target

    at_cap = gap(cap)
    if abs(at_cap) <= 1e-13 * max(1.0, tilde_target):
        return cap
    if at_cap < 0.0:
        raise ArithmeticError("target period out of reach at this box width")
    lo = cap
    for _ in range(4000):
        lo *= 0.25
        if gap(lo) < 0.0:
            break
    else:
        raise ArithmeticError("period bracket not found")
    return float(brentq(gap, lo, cap, xtol=1e-18, rtol=8.9e-16, maxiter=200))


def _matched_member(params: PlasmaParams, tau: float, beta: float, gamma_target: float,
                    settings: QuadratureSettings) -> FamilyMember:
    p = params
    bz = p.boltzmann
    ratio, dimensionless = _matched_pieces(tau, beta, bz.kappa)
    height = 3.0 * p.e_minus * bz.rho * ratio / (
        2.0 * bz.kappa * p.e_plus * math.sqrt(2.0 * p.q_plus))
    g_plus = Marginal.piecewise([
        (p.alpha, p.alpha + math.sqrt(2.0 * p.q_plus * tau), height)])
    g_minus = Marginal.maxwellian(bz.rho, p.alpha, bz.kappa, p.q_minus)
    pot = SagdeevPotential.train(g_plus, g_minus, beta, p, settings=settings)

    grid = np.linspace(0.0, beta, 65)
    v_scale = p.e_minus * bz.rho / bz.kappa
    drift = (np.asarray(pot.v(grid), dtype=float)
             - v_scale * np.asarray(dimensionless(grid), dtype=float))
    if float(np.max(np.abs(drift))) > 1e-10 * max(1.0, v_scale):
        raise RuntimeError("assembled potential drifts from the matched closure")
    dens = np.asarray(rho_minus(g_minus, p, grid, settings), dtype=float)
    thermal = bz.rho * np.exp(-bz.kappa * grid)
    if float(np.max(np.abs(dens - thermal))) > 1e-8 * bz.rho:
        raise RuntimeError("electron density drifts from the thermal closure")

    report = check_exists(pot)
    if not report.exists:
        raise ConditionError(report)
    gamma = float(period(pot, settings))
    if abs(gamma - gamma_target) > 1e-6 * gamma_target:
        raise RuntimeError("assembled period misses the target")
    return FamilyMember(kind="boltzmann-match", amplitude=float(beta),
                        parameters={"tau": float(tau), "beta": float(beta),
                                    "balance_ratio": ratio, "box_height": height},
                        g_plus=g_plus, g_minus=g_minus, g_trapped=None,
                        pot=pot, report=report, period=gamma)


def boltzmann_train_match(params: PlasmaParams, gamma_target: float, count: int, *,
                          settings: QuadratureSettings = DEFAULT_QUADRATURE
                          ) -> list[FamilyMember]:
    """Distinct thermal-electron trains sharing one target period.

    The dimensionless period grows with the ion box width and vanishes
    with the crest value, so for any target below the ceiling there is a
    window of box widths near the widest admissible one whose period
    stays above target; each width is then matched by bisection in the
    crest value.  Ion boxes of different widths give different waves.
    """
    bz = params.boltzmann
    if bz is None:
        raise ValueError("params must carry the thermal-electron constants")
    if not (isinstance(count, int) and count >= 1):
        raise ValueError("count must be a positive integer")
    if not (gamma_target > 0.0 and math.isfinite(gamma_target)):
        raise ValueError("target period must be positive")
    kappa = bz.kappa
    cap = 1.0 / (10.0 * kappa)
    dim = math.sqrt(kappa / (2.0 * params.e_minus * bz.rho))
    tilde_star = boltzmann_gamma_tilde(cap, cap, kappa)
    ceiling = dim * tilde_star
    if gamma_target > ceiling * (1.0 + 1e-12):
        raise ValueError(
            f"above the constructive range: target period {gamma_target:.12g} "
            f"exceeds the ceiling {ceiling:.12g}")
    tilde_target = gamma_target / dim

    at_corner = abs(tilde_target - tilde_star) <= 1e-12 * tilde_star
    if at_corner and count > 1:
        raise ValueError(
            "above the constructive range: only one wave attains the ceiling period")
    if at_corner:
        widths = [cap]
    else:
        delta = 0.5 * cap
        for _ in range(200):
            if boltzmann_gamma_tilde(cap - delta, cap, kappa) > tilde_target:
                break
            delta *= 0.5
        else:
            raise ArithmeticError("no box-width window reaches the target period")
        widths = [cap - delta * i / count for i in range(count)]

    members = []
    for tau in widths:
        beta = _match_beta(tau, cap, kappa, tilde_target)
        members.append(_matched_member(params, tau, beta, gamma_target, settings))
    return members
