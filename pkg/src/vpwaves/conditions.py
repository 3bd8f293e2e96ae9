"""Existence checks and uniqueness classification for traveling waves.

A wave exists exactly when its potential satisfies the kind's clause set:
an electron symmetry clause, interior positivity with an equilibrium at the
far end, and endpoint integrability of 1/sqrt(V) of the right type (a
quadratic zero makes the approach infinitely long, a simple zero finite).
Improper integrals are never evaluated numerically; the local slope or a
fitted exponent at the endpoint decides them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .densities import DEFAULT_QUADRATURE, rho_minus, rho_plus_inf
from .model import (
    Marginal,
    PlasmaParams,
    TrappedMarginal,
    beta_star,
    check_symmetry,
    symmetry_defect,
)
from .sagdeev import SagdeevPotential, v_infinity

__all__ = [
    "DEGENERATE",
    "ClauseCheck",
    "ConditionError",
    "ConditionReport",
    "TailClass",
    "UniquenessVerdict",
    "beta_sharp",
    "check_exists",
    "check_quasineutral",
    "check_shock_matching",
    "classify_tail",
    "classify_uniqueness",
    "compute_alpha",
]

DEGENERATE = "degenerate"

CLAUSES_BY_KIND = {
    "solitary": ("G-beta1", "G-beta2", "G-beta3"),
    "shock": ("Phil1", "Phil2"),
    "train": ("tG-beta1", "tG-beta2", "tG-beta3"),
}


@dataclass(frozen=True)
class TailClass:
    classification: str  # divergent | convergent | indeterminate
    slope: float | None = None
    exponent: float | None = None

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "slope": self.slope,
            "exponent": self.exponent,
        }


@dataclass(frozen=True)
class ClauseCheck:
    label: str
    ok: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"label": self.label, "ok": self.ok, "details": self.details}


@dataclass(frozen=True)
class ConditionReport:
    kind: str
    clauses: tuple[ClauseCheck, ...]
    quasi_neutral: bool | None
    symmetry_ok: bool | None
    positivity_ok: bool
    endpoint_zero_ok: bool
    tail_class_at_0: TailClass
    tail_class_at_amplitude: TailClass
    verdict: str
    failed: tuple[str, ...]

    @property
    def exists(self) -> bool:
        return self.verdict == "exists"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "failed": list(self.failed),
            "clauses": {c.label: c.to_dict() for c in self.clauses},
            "quasi_neutral": self.quasi_neutral,
            "symmetry_ok": self.symmetry_ok,
            "positivity_ok": self.positivity_ok,
            "endpoint_zero_ok": self.endpoint_zero_ok,
            "tail_at_zero": self.tail_class_at_0.to_dict(),
            "tail_at_amplitude": self.tail_class_at_amplitude.to_dict(),
        }


class ConditionError(ValueError):
    """Raised when an operation requires a wave whose conditions fail."""

    def __init__(self, report: "ConditionReport") -> None:
        super().__init__(
            "wave conditions fail: " + (", ".join(report.failed) or report.verdict)
        )
        self.report = report


@dataclass(frozen=True)
class UniquenessVerdict:
    classification: str
    beta_star: float
    beta_sharp: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "beta_star": self.beta_star,
            "beta_sharp": self.beta_sharp,
            "details": self.details,
        }


def check_quasineutral(
    g_plus: Marginal, g_minus: Marginal, params: PlasmaParams, tol: float = 1e-9
) -> bool:
    """Whether the signed end-state charges cancel."""
    return abs(params.e_plus * g_plus.mass() - params.e_minus * g_minus.mass()) <= tol


def compute_alpha(gl: Marginal, gr: Marginal, tol: float = 1e-12):
    """Frame speed forced by two end states, DEGENERATE when both moments cancel.

    The speed is the ratio of the first-moment difference to the mass
    difference; when both vanish the speed is a free input, and a vanishing
    denominator with a surviving numerator admits no frame at all.
    """
    num = gr.moment(1) - gl.moment(1)
    den = gr.mass() - gl.mass()
    scale = max(1.0, gl.mass(), gr.mass(), abs(gl.moment(1)), abs(gr.moment(1)))
    if abs(den) <= tol * scale:
        if abs(num) <= tol * scale:
            return DEGENERATE
        raise ValueError("inconsistent end states: mass difference vanishes but momentum difference does not")
    return num / den


def _matching_probes(c: float, offsets: np.ndarray, hull: float) -> np.ndarray:
    """Positive test offsets strictly outside the band edge sqrt(c)."""
    root = math.sqrt(c)
    pts = np.sort(np.concatenate([offsets[offsets > root], [root, hull]]))
    # a stored edge and its mapped image can differ by a few ulp; collapsing
    # them keeps probes out of such sliver intervals, where the two operands
    # sit on opposite sides of their half-open edges
    merged = [float(pts[0])]
    for p in pts[1:]:
        if p - merged[-1] > 1e-9 * max(1.0, abs(float(p))):
            merged.append(float(p))
    pts = np.asarray(merged)
    mids = []
    for a, b in zip(pts[:-1], pts[1:]):
        if b - a <= 0:
            continue
        mids.extend([a + 0.25 * (b - a), a + 0.6 * (b - a)])
    fill = np.linspace(root, hull, 257)[1:]
    out = np.concatenate([np.asarray(mids), fill])
    return out[out > root * (1 + 1e-15) + 1e-300]


def check_shock_matching(
    gl_plus: Marginal,
    gr_plus: Marginal,
    gl_minus: Marginal,
    gr_minus: Marginal,
    params: PlasmaParams,
    phi_l: float,
    tol: float | None = None,
) -> bool:
    """Verify the six end-state compatibility clauses of a front.

    Ions: the left state is mirror-symmetric on its inner band and maps onto
    the right state under the energy shift; electrons satisfy the mirrored
    statements with the roles of the ends exchanged.
    """
    if not (phi_l > 0 and math.isfinite(phi_l)):
        raise ValueError("phi_l must be positive and finite")
    alpha = params.alpha
    if tol is None:
        tol = 1e-10

    def _pair_ok(g_band: Marginal, g_outer: Marginal, g_mapped: Marginal, q: float) -> bool:
        c = 2.0 * q * phi_l
        if not check_symmetry(g_band, alpha, math.sqrt(c)):
            return False
        lo_o, hi_o = g_outer.quad_support()
        lo_m, hi_m = g_mapped.quad_support()
        hull = max(abs(lo_o - alpha), abs(hi_o - alpha), math.sqrt(
            max(lo_m - alpha, alpha - lo_m, hi_m - alpha, alpha - hi_m) ** 2 + c
        )) + 1.0
        offsets = np.unique(
            np.concatenate(
                [
                    np.abs(g_outer.breakpoints() - alpha),
                    np.sqrt(np.maximum((g_mapped.breakpoints() - alpha) ** 2 + c, 0.0)),
                ]
            )
        )
        probes = _matching_probes(c, offsets, hull)
        for sgn in (1.0, -1.0):
            u = sgn * probes
            mapped = sgn * np.sqrt(probes * probes - c)
            if np.max(np.abs(g_mapped(mapped + alpha) - g_outer(u + alpha))) > tol:
                return False
        return True

    # ions: left band symmetric, right state is the push-forward of the left
    if not _pair_ok(gl_plus, gl_plus, gr_plus, params.q_plus):
        return False
    # electrons: right band symmetric, left state is the push-forward of the right
    return _pair_ok(gr_minus, gr_minus, gl_minus, params.q_minus)


def classify_tail(pot, endpoint: str, *, fit_points: int = 6, tol: float | None = None) -> TailClass:
    """Decide whether the approach to an equilibrium endpoint takes infinite X.

    A nonzero slope means a simple zero of V and a finite approach; a flat
    slope triggers a local log-log exponent fit, with exponent >= 1.9 read as
    a quadratic (or higher) zero and hence an infinite approach.
    """
    if endpoint not in ("zero", "amplitude"):
        raise ValueError("endpoint must be 'zero' or 'amplitude'")
    amp = pot.amplitude
    sup = pot.sup_v()
    eq_tol = tol if tol is not None else 1e-10 * max(1.0, sup)
    x0 = 0.0 if endpoint == "zero" else amp
    if abs(float(pot.v(x0))) > eq_tol:
        raise ValueError("endpoint not equilibrium")
    s = float(pot.dv(x0))
    # the guard keeps the literal 1e-8 slope cut on unit-scale potentials and
    # tightens proportionally when V is small relative to its Phi range
    slope_tol = 1e-8 * max(1.0, sup / max(amp, 1e-300))
    if abs(s) > slope_tol:
        return TailClass("convergent", slope=s)
    d = np.geomspace(amp * 1e-3, amp * 1e-8, fit_points)
    x = d if endpoint == "zero" else amp - d
    vals = np.asarray(pot.v(x), dtype=float)
    # samples at the fp noise floor can round to <= 0; they carry no slope
    # information, so the fit runs on the positive ones and takes the median
    # of consecutive log-log slopes, which one bad sample cannot drag
    keep = vals > 0.0
    if int(np.count_nonzero(keep)) < 2:
        return TailClass("indeterminate", slope=s)
    p = float(np.median(np.diff(np.log(vals[keep])) / np.diff(np.log(d[keep]))))
    if p >= 1.9:
        return TailClass("divergent", slope=s, exponent=p)
    return TailClass("indeterminate", slope=s, exponent=p)


def _interior_minimum(pot, n: int = 2048) -> tuple[float, float, float]:
    """(min value, min location, max value) of V over the open interval."""
    amp = pot.amplitude
    xs = np.linspace(0.0, amp, n + 2)[1:-1]
    vs = np.asarray(pot.v(xs), dtype=float)
    ds = np.asarray(pot.dv(xs), dtype=float)
    locs = list(xs)
    vals = list(vs)
    flips = np.nonzero(ds[:-1] * ds[1:] < 0.0)[0]
    for i in flips:
        try:
            crit = brentq(lambda t: float(pot.dv(t)), xs[i], xs[i + 1], xtol=1e-14 * max(1.0, amp))
        except ValueError:
            continue
        locs.append(crit)
        vals.append(float(pot.v(crit)))
    vals_arr = np.asarray(vals)
    k = int(np.argmin(vals_arr))
    return float(vals_arr[k]), float(locs[k]), float(np.max(vs))


def _electron_marginal(pot, marginals):
    if marginals is None:
        return getattr(pot, "g_minus", None)
    if isinstance(marginals, dict):
        return marginals.get("g_minus")
    return marginals


def check_exists(
    pot,
    marginals=None,
    tol: float | None = None,
    *,
    beta_star_value: float | None = None,
) -> ConditionReport:
    """Evaluate every existence clause for the potential's wave kind.

    marginals may carry the electron marginal for the symmetry clause; it
    defaults to the potential's own. When neither marginal nor
    beta_star_value is available (purely synthetic potentials) the symmetry
    clause is recorded as unchecked rather than failed.
    """
    kind = getattr(pot, "kind", "solitary")
    if kind not in CLAUSES_BY_KIND:
        raise ValueError(f"unknown wave kind {kind!r}")
    amp = pot.amplitude
    sup = pot.sup_v()
    eq_tol = tol if tol is not None else 1e-10 * max(1.0, sup)

    min_val, min_loc, _ = _interior_minimum(pot)
    positivity_ok = min_val > eq_tol
    endpoint_zero_ok = abs(float(pot.v(amp))) <= eq_tol

    tail0 = classify_tail(pot, "zero", tol=eq_tol)
    if endpoint_zero_ok:
        tail1 = classify_tail(pot, "amplitude", tol=eq_tol)
    else:
        tail1 = TailClass("indeterminate")

    params = getattr(pot, "params", None)
    g_minus = _electron_marginal(pot, marginals)
    symmetry_ok: bool | None = None
    sym_detail: dict = {}
    if kind in ("solitary", "train"):
        if g_minus is not None and params is not None:
            delta = math.sqrt(2.0 * params.q_minus * amp)
            symmetry_ok = check_symmetry(g_minus, params.alpha, delta)
            sym_detail = {
                "delta": delta,
                "defect": symmetry_defect(g_minus, params.alpha, delta),
                "checked": True,
            }
        elif beta_star_value is not None:
            symmetry_ok = amp <= beta_star_value * (1 + 1e-12)
            sym_detail = {"beta_star": beta_star_value, "checked": True}
        else:
            symmetry_ok = True
            sym_detail = {"checked": False, "note": "no electron marginal supplied"}

    quasi_neutral: bool | None = None
    if kind == "solitary":
        g_plus = getattr(pot, "g_plus", None)
        if g_plus is not None and g_minus is not None and params is not None:
            quasi_neutral = check_quasineutral(g_plus, g_minus, params)
    elif kind == "shock":
        # both plateau charges cancel exactly when the density imbalance
        # vanishes at the two equilibria
        nt = 1e-9 * max(1.0, sup)
        quasi_neutral = abs(float(pot.dv(0.0))) <= nt and abs(float(pot.dv(amp))) <= nt
    else:
        quasi_neutral = True  # enforced over a period by periodicity

    shape_detail = {
        "interior_min": min_val,
        "interior_min_at": min_loc,
        "amplitude_value": float(pot.v(amp)),
        "tolerance": eq_tol,
    }
    if kind == "solitary":
        clauses = (
            ClauseCheck("G-beta1", bool(symmetry_ok), sym_detail),
            ClauseCheck("G-beta2", positivity_ok and endpoint_zero_ok, shape_detail),
            ClauseCheck(
                "G-beta3",
                tail0.classification == "divergent" and tail1.classification == "convergent",
                {"at_zero": tail0.to_dict(), "at_amplitude": tail1.to_dict()},
            ),
        )
    elif kind == "shock":
        clauses = (
            ClauseCheck("Phil1", positivity_ok and endpoint_zero_ok, shape_detail),
            ClauseCheck(
                "Phil2",
                tail0.classification == "divergent" and tail1.classification == "divergent",
                {"at_zero": tail0.to_dict(), "at_amplitude": tail1.to_dict()},
            ),
        )
    else:
        clauses = (
            ClauseCheck("tG-beta1", bool(symmetry_ok), sym_detail),
            ClauseCheck("tG-beta2", positivity_ok and endpoint_zero_ok, shape_detail),
            ClauseCheck(
                "tG-beta3",
                tail0.classification == "convergent" and tail1.classification == "convergent",
                {"at_zero": tail0.to_dict(), "at_amplitude": tail1.to_dict()},
            ),
        )

    failed = tuple(c.label for c in clauses if not c.ok)
    return ConditionReport(
        kind=kind,
        clauses=clauses,
        quasi_neutral=quasi_neutral,
        symmetry_ok=symmetry_ok,
        positivity_ok=positivity_ok,
        endpoint_zero_ok=endpoint_zero_ok,
        tail_class_at_0=tail0,
        tail_class_at_amplitude=tail1,
        verdict="exists" if not failed else "fails",
        failed=failed,
    )


def _eval_vectorized(f: Callable, xs: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(f(xs), dtype=float)
        if out.shape == xs.shape:
            return out
    except Exception:
        pass
    return np.array([float(f(float(x))) for x in xs])


def beta_sharp(
    v_inf: Callable,
    beta_star: float,
    *,
    scan_hi: float | None = None,
    samples: int = 4096,
) -> float:
    """First potential value where the untrapped part turns negative.

    Returns beta_star when no sign change is found on the scanned range.
    The scan combines a linear and a geometric grid so crossings near zero
    are not skipped, then bisects the bracketing interval.
    """
    if math.isfinite(beta_star):
        hi = beta_star
    elif scan_hi is not None:
        hi = scan_hi
    else:
        hi = 1e9
    if hi <= 0:
        return 0.0
    xs = np.unique(
        np.concatenate([np.linspace(0.0, hi, samples), hi * np.geomspace(1e-12, 1.0, 512)])
    )
    vs = _eval_vectorized(v_inf, xs)
    neg = np.nonzero(vs < 0.0)[0]
    if neg.size == 0:
        return beta_star
    i = int(neg[0])
    lo, up = float(xs[i - 1]), float(xs[i])
    for _ in range(200):
        if up - lo <= 1e-15 * max(1.0, lo):
            break
        mid = 0.5 * (lo + up)
        if float(v_inf(mid)) < 0.0:
            up = mid
        else:
            lo = mid
    return lo


def _default_scan_cap(g_minus: Marginal, params: PlasmaParams, amplitude: float) -> float:
    lo, hi = g_minus.quad_support()
    w = max(abs(lo - params.alpha), abs(hi - params.alpha))
    # beyond this value the electron term is gone and V only grows
    cap = w * w / (2.0 * params.q_minus)
    return max(cap * 1.000001 + 1e-9, 4.0 * amplitude)


def classify_uniqueness(
    pot: SagdeevPotential,
    G: Marginal | TrappedMarginal | None = None,
    params: PlasmaParams | None = None,
    *,
    deriv_tol: float = 1e-8,
    beta_star_value: float | None = None,
    scan_hi: float | None = None,
) -> UniquenessVerdict:
    """Place a solitary wave in the uniqueness taxonomy.

    Uniqueness requires an empty trapped population together with either the
    maximal symmetric amplitude or a nonnegative untrapped potential all the
    way to it; otherwise the wave admits infinitely many companions, split by
    how the untrapped potential leaves zero at its first negative point.
    """
    if pot.kind != "solitary":
        raise ValueError("uniqueness classification applies to solitary waves")
    params = params or pot.params
    if G is None:
        G = pot.g_trapped
    bstar = beta_star_value if beta_star_value is not None else beta_star(pot.g_minus, params)

    window_hi = math.sqrt(2.0 * params.q_plus * pot.amplitude) + params.alpha
    if G is None:
        trapped_mass = 0.0
    else:
        trapped_mass = _mass_on(G, params.alpha, window_hi)
    g_zero = trapped_mass <= 1e-12

    def v_inf(phi):
        return v_infinity(pot.g_plus, pot.g_minus, params, phi, pot.settings)

    cap = scan_hi if scan_hi is not None else _default_scan_cap(pot.g_minus, params, pot.amplitude)
    bsharp = beta_sharp(v_inf, bstar, scan_hi=cap)

    details = {"trapped_mass_in_window": trapped_mass}
    if g_zero and math.isfinite(bstar) and abs(pot.amplitude - bstar) <= 1e-9 * max(1.0, bstar):
        cls = "unique_case_i"
        details["matched"] = "amplitude equals the maximal symmetric value"
    elif g_zero and (bsharp >= bstar or (math.isinf(bstar) and math.isinf(bsharp))):
        cls = "unique_case_ii"
        details["matched"] = "untrapped potential nonnegative up to the symmetric limit"
    elif not g_zero:
        cls = "nonunique_a"
        details["matched"] = "trapped population present"
    else:
        s = float(
            params.e_plus * rho_plus_inf(pot.g_plus, params, bsharp, pot.settings)
            - params.e_minus * rho_minus(pot.g_minus, params, bsharp, pot.settings)
        )
        details["slope_at_beta_sharp"] = s
        cls = "nonunique_b" if s < -deriv_tol else "nonunique_c"
    return UniquenessVerdict(cls, beta_star=bstar, beta_sharp=bsharp, details=details)


def _mass_on(g: Marginal | TrappedMarginal, a: float, b: float) -> float:
    inner = g.g if isinstance(g, TrappedMarginal) else g
    if b <= a:
        return 0.0
    if inner.kind == "piecewise":
        return float(
            sum(h * max(0.0, min(hi, b) - max(lo, a)) for lo, hi, h in inner.pieces)
        )
    lo_s, hi_s = inner.quad_support()
    a, b = max(a, lo_s), min(b, hi_s)
    if b <= a:
        return 0.0
    xs = np.linspace(a, b, 20001)
    return float(np.trapezoid(inner(xs), xs)) if hasattr(np, "trapezoid") else float(
        np.trapz(inner(xs), xs)
    )
