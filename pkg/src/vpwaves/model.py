"""Plasma parameters and one-dimensional velocity marginals.

Transverse velocity directions never enter any quadrature in this package:
every distribution is handled through its first-velocity marginal, evaluated
on the line. Marginals come in three representations (piecewise-constant
boxes, a Gaussian bump, tabulated linear interpolation) behind one interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "BoltzmannParams",
    "PlasmaParams",
    "Marginal",
    "TrappedMarginal",
    "marginal_mass",
    "symmetry_defect",
    "check_symmetry",
    "beta_star",
]

_PIECEWISE_SYM_TOL = 1e-12
_TABULATED_SYM_TOL = 1e-9

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

# Gaussian bumps are integrated over +-12 standard deviations; the discarded
# tail mass is below 1e-30 relative.
GAUSSIAN_TRUNCATION_SIGMAS = 12.0


@dataclass(frozen=True)
class BoltzmannParams:
    """Thermalized-electron closure constants: reference density and inverse temperature."""

    rho: float
    kappa: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise ValueError("rho must be positive and finite")
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ValueError("kappa must be positive and finite")


@dataclass(frozen=True)
class PlasmaParams:
    """Species couplings, wave speed, and dimension.

    e_plus/e_minus scale the charge densities, q_plus/q_minus the potential
    coupling inside each species' particle energy. alpha is the traveling
    frame speed. n is the full velocity dimension; it only matters for
    bookkeeping since all operations run on first-velocity marginals.
    """

    e_plus: float = 1.0
    e_minus: float = 1.0
    q_plus: float = 1.0
    q_minus: float = 1.0
    alpha: float = 0.0
    n: int = 1
    boltzmann: BoltzmannParams | None = None

    def __post_init__(self) -> None:
        for name in ("e_plus", "e_minus", "q_plus", "q_minus"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite")
        if not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValueError("n must be an integer >= 1")


def _as_float_array(values: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class Marginal:
    """First-velocity marginal of a species distribution.

    Construct through the classmethods; the constructor fields mirror the
    JSON schema. Exactly one representation is populated per instance:

    - piecewise: sorted, non-overlapping boxes [lo, hi) with height >= 0
    - maxwellian: mass * sqrt(kappa/(2 pi q)) * exp(-kappa (x-center)^2 / (2 q))
    - tabulated: linear interpolation through (knots, values), zero outside
    """

    kind: str
    pieces: tuple[tuple[float, float, float], ...] = ()
    mass_if_maxwellian: float = 0.0
    center: float = 0.0
    kappa: float = 1.0
    q: float = 1.0
    knots: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    _edges: np.ndarray = field(init=False, repr=False, compare=False, default=None)
    _heights: np.ndarray = field(init=False, repr=False, compare=False, default=None)
    _knots_arr: np.ndarray = field(init=False, repr=False, compare=False, default=None)
    _values_arr: np.ndarray = field(init=False, repr=False, compare=False, default=None)

    # -- constructors -------------------------------------------------------

    @classmethod
    def piecewise(cls, pieces: Sequence[Sequence[float]]) -> "Marginal":
        normalized = tuple((float(lo), float(hi), float(h)) for lo, hi, h in pieces)
        return cls(kind="piecewise", pieces=normalized)

    @classmethod
    def maxwellian(cls, mass: float, center: float, kappa: float, q: float = 1.0) -> "Marginal":
        return cls(
            kind="maxwellian",
            mass_if_maxwellian=float(mass),
            center=float(center),
            kappa=float(kappa),
            q=float(q),
        )

    @classmethod
    def tabulated(cls, knots: Sequence[float], values: Sequence[float]) -> "Marginal":
        return cls(kind="tabulated", knots=tuple(map(float, knots)), values=tuple(map(float, values)))

    def __post_init__(self) -> None:
        if self.kind == "piecewise":
            lows = []
            prev_hi = -math.inf
            for lo, hi, h in self.pieces:
                if not all(map(math.isfinite, (lo, hi, h))):
                    raise ValueError("piece entries must be finite")
                if hi <= lo:
                    raise ValueError("piece must have hi > lo")
                if h < 0:
                    raise ValueError("piece height must be nonnegative")
                if lo < prev_hi:
                    raise ValueError("pieces must be sorted and non-overlapping")
                prev_hi = hi
                lows.append(lo)
            edges = np.empty(2 * len(self.pieces))
            heights = np.empty(len(self.pieces))
            for k, (lo, hi, h) in enumerate(self.pieces):
                edges[2 * k] = lo
                edges[2 * k + 1] = hi
                heights[k] = h
            object.__setattr__(self, "_edges", edges)
            object.__setattr__(self, "_heights", heights)
        elif self.kind == "maxwellian":
            if not (math.isfinite(self.mass_if_maxwellian) and self.mass_if_maxwellian >= 0):
                raise ValueError("maxwellian mass must be nonnegative and finite")
            if not math.isfinite(self.center):
                raise ValueError("maxwellian center must be finite")
            if not (math.isfinite(self.kappa) and self.kappa > 0):
                raise ValueError("maxwellian kappa must be positive")
            if not (math.isfinite(self.q) and self.q > 0):
                raise ValueError("maxwellian q must be positive")
        elif self.kind == "tabulated":
            knots = _as_float_array(self.knots, "knots")
            values = _as_float_array(self.values, "values")
            if knots.size < 2:
                raise ValueError("tabulated marginal needs at least two knots")
            if knots.size != values.size:
                raise ValueError("knots and values must have equal length")
            if not np.all(np.diff(knots) > 0):
                raise ValueError("knots must be strictly increasing")
            if np.any(values < 0):
                raise ValueError("tabulated values must be nonnegative")
            object.__setattr__(self, "_knots_arr", knots)
            object.__setattr__(self, "_values_arr", values)
        else:
            raise ValueError(f"unknown marginal kind {self.kind!r}")

    # -- evaluation ---------------------------------------------------------

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        if scalar:
            x = x.reshape(1)
        if self.kind == "piecewise":
            out = np.zeros_like(x)
            if self._edges.size:
                idx = np.searchsorted(self._edges, x, side="right")
                inside = (idx % 2) == 1
                piece = np.clip(idx // 2, 0, len(self.pieces) - 1)
                out[inside] = self._heights[piece[inside]]
        elif self.kind == "maxwellian":
            norm = self.mass_if_maxwellian * math.sqrt(self.kappa / (2.0 * math.pi * self.q))
            out = norm * np.exp(-self.kappa * (x - self.center) ** 2 / (2.0 * self.q))
        else:
            out = np.interp(x, self._knots_arr, self._values_arr, left=0.0, right=0.0)
        return float(out[0]) if scalar else out

    # -- exact moments ------------------------------------------------------

    def mass(self) -> float:
        if self.kind == "piecewise":
            return float(sum((hi - lo) * h for lo, hi, h in self.pieces))
        if self.kind == "maxwellian":
            return self.mass_if_maxwellian
        return float(_trapezoid(self._values_arr, self._knots_arr))

    def moment(self, order: int, about: float = 0.0) -> float:
        """Exact integral of (x - about)^order * g(x) for order in {0, 1, 2}."""
        if order == 0:
            return self.mass()
        if self.kind == "piecewise":
            total = 0.0
            for lo, hi, h in self.pieces:
                a, b = lo - about, hi - about
                total += h * (b ** (order + 1) - a ** (order + 1)) / (order + 1)
            return total
        if self.kind == "maxwellian":
            mu = self.center - about
            if order == 1:
                return self.mass_if_maxwellian * mu
            if order == 2:
                return self.mass_if_maxwellian * (mu * mu + self.q / self.kappa)
            raise ValueError("moment order must be 0, 1 or 2")
        if order not in (1, 2):
            raise ValueError("moment order must be 0, 1 or 2")
        # linear segments integrate exactly against polynomials
        k = self._knots_arr - about
        v = self._values_arr
        total = 0.0
        for i in range(k.size - 1):
            a, b = k[i], k[i + 1]
            va, vb = v[i], v[i + 1]
            if b == a:
                continue
            slope = (vb - va) / (b - a)
            const = va - slope * a
            if order == 1:
                total += const * (b**2 - a**2) / 2 + slope * (b**3 - a**3) / 3
            else:
                total += const * (b**3 - a**3) / 3 + slope * (b**4 - a**4) / 4
        return float(total)

    # -- structure ----------------------------------------------------------

    def breakpoints(self) -> np.ndarray:
        """Abscissas where the marginal is not smooth (box edges, knots)."""
        if self.kind == "piecewise":
            return np.array(self._edges) if self._edges.size else np.empty(0)
        if self.kind == "maxwellian":
            return np.empty(0)
        return np.array(self._knots_arr)

    def support(self) -> tuple[float, float]:
        """Hull of the set where the marginal is nonzero; (inf, -inf) if empty."""
        if self.kind == "piecewise":
            lo, hi = math.inf, -math.inf
            for plo, phi, h in self.pieces:
                if h > 0:
                    lo = min(lo, plo)
                    hi = max(hi, phi)
            return lo, hi
        if self.kind == "maxwellian":
            if self.mass_if_maxwellian == 0:
                return math.inf, -math.inf
            return -math.inf, math.inf
        nz = np.nonzero(self._values_arr)[0]
        if nz.size == 0:
            return math.inf, -math.inf
        lo_i = max(nz[0] - 1, 0)
        hi_i = min(nz[-1] + 1, self._knots_arr.size - 1)
        return float(self._knots_arr[lo_i]), float(self._knots_arr[hi_i])

    def quad_support(self) -> tuple[float, float]:
        """Finite interval outside which the marginal is treated as zero."""
        if self.kind == "maxwellian":
            sigma = math.sqrt(self.q / self.kappa)
            w = GAUSSIAN_TRUNCATION_SIGMAS * sigma
            return self.center - w, self.center + w
        lo, hi = self.support()
        if lo > hi:
            return 0.0, 0.0
        return lo, hi

    def scaled(self, factor: float) -> "Marginal":
        """Same shape with all values multiplied by a nonnegative factor."""
        if factor < 0:
            raise ValueError("scaling factor must be nonnegative")
        if self.kind == "piecewise":
            return Marginal.piecewise([(lo, hi, h * factor) for lo, hi, h in self.pieces])
        if self.kind == "maxwellian":
            return Marginal.maxwellian(self.mass_if_maxwellian * factor, self.center, self.kappa, self.q)
        return Marginal.tabulated(self.knots, tuple(v * factor for v in self.values))

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        if self.kind == "piecewise":
            return {"kind": "piecewise", "pieces": [list(p) for p in self.pieces]}
        if self.kind == "maxwellian":
            out = {
                "kind": "maxwellian",
                "mass": self.mass_if_maxwellian,
                "center": self.center,
                "kappa": self.kappa,
            }
            if self.q != 1.0:
                out["q"] = self.q
            return out
        return {"kind": "tabulated", "knots": list(self.knots), "values": list(self.values)}

    @classmethod
    def from_dict(cls, data: dict) -> "Marginal":
        if not isinstance(data, dict) or "kind" not in data:
            raise ValueError("marginal document must be an object with a 'kind' field")
        kind = data["kind"]
        if kind == "piecewise":
            return cls.piecewise(data["pieces"])
        if kind == "maxwellian":
            return cls.maxwellian(data["mass"], data["center"], data["kappa"], data.get("q", 1.0))
        if kind == "tabulated":
            return cls.tabulated(data["knots"], data["values"])
        raise ValueError(f"unknown marginal kind {kind!r}")


@dataclass(frozen=True)
class TrappedMarginal:
    """Marginal restricted to velocities strictly above the frame speed.

    Used for the trapped-particle population; the representation must vanish
    for x <= alpha so that the trapped branch never reaches back across the
    frame speed.
    """

    g: Marginal
    alpha: float

    def __post_init__(self) -> None:
        if self.g.kind == "maxwellian":
            if self.g.mass_if_maxwellian > 0:
                raise ValueError("a maxwellian has full support and cannot be a trapped marginal")
            return
        if self.g.kind == "piecewise":
            for lo, hi, h in self.g.pieces:
                if h > 0 and lo < self.alpha:
                    raise ValueError("trapped marginal must vanish at and below alpha")
            return
        knots = np.asarray(self.g.knots)
        values = np.asarray(self.g.values)
        bad = (knots <= self.alpha) & (values > 0)
        if np.any(bad):
            raise ValueError("trapped marginal must vanish at and below alpha")
        # a segment straddling alpha must not interpolate to positive values below it
        for i in range(knots.size - 1):
            if knots[i] < self.alpha < knots[i + 1] and values[i + 1] > 0:
                raise ValueError("trapped marginal must vanish at and below alpha")

    def __call__(self, x):
        return self.g(x)

    def mass(self) -> float:
        return self.g.mass()

    def moment(self, order: int, about: float = 0.0) -> float:
        return self.g.moment(order, about)

    def breakpoints(self) -> np.ndarray:
        return self.g.breakpoints()

    def support(self) -> tuple[float, float]:
        return self.g.support()

    def quad_support(self) -> tuple[float, float]:
        return self.g.quad_support()

    def scaled(self, factor: float) -> "TrappedMarginal":
        return TrappedMarginal(self.g.scaled(factor), self.alpha)

    def to_dict(self) -> dict:
        return self.g.to_dict()


def marginal_mass(g: Marginal | TrappedMarginal) -> float:
    """Total mass of the marginal, exact for every representation."""
    return g.mass()


def _symmetry_samples(g: Marginal | TrappedMarginal, alpha: float, delta: float) -> np.ndarray:
    """Offsets t in (0, delta) at which mirror symmetry is probed.

    Box edges are sampled just inside and just outside rather than exactly on
    them: the half-open evaluation convention makes single-point values at
    edges meaningless for an almost-everywhere comparison.
    """
    ts = [(np.arange(2048) + 0.5) * (delta / 2048.0)]  # cell centers
    offsets = np.abs(np.concatenate([g.breakpoints(), np.asarray(g.quad_support())]) - alpha)
    offsets = np.unique(offsets[(offsets > 0) & (offsets < delta)])
    if offsets.size:
        eps = 1e-12 * np.maximum(1.0, offsets)
        ts.append(offsets - eps)
        ts.append(offsets + eps)
        if offsets.size > 1:
            ts.append(0.5 * (offsets[:-1] + offsets[1:]))
    ts.append(np.array([delta * 1e-9, delta * (1 - 1e-9)]))
    t = np.unique(np.concatenate(ts))
    return t[(t > 0) & (t < delta)]


def symmetry_defect(g: Marginal | TrappedMarginal, alpha: float, delta: float) -> float:
    """Largest sampled deviation |g(alpha+t) - g(alpha-t)| over t in (0, delta)."""
    if not (math.isfinite(delta) and delta > 0):
        raise ValueError("delta must be positive and finite")
    t = _symmetry_samples(g, alpha, delta)
    if t.size == 0:
        return 0.0
    return float(np.max(np.abs(g(alpha + t) - g(alpha - t))))


def check_symmetry(
    g: Marginal | TrappedMarginal,
    alpha: float,
    delta: float,
    tol: float | None = None,
) -> bool:
    """True when the marginal is mirror-symmetric about alpha on (0, delta).

    Sampling covers box edges (nudged off the exact edge), a dense grid of
    cell centers, and near-endpoint offsets. Default tolerance is 1e-12 for
    exact representations and 1e-9 for tabulated ones.
    """
    if tol is None:
        kind = g.g.kind if isinstance(g, TrappedMarginal) else g.kind
        tol = _TABULATED_SYM_TOL if kind == "tabulated" else _PIECEWISE_SYM_TOL
    return symmetry_defect(g, alpha, delta) <= tol


def _first_mismatch_offset_piecewise(g: Marginal, alpha: float) -> float:
    """Largest t0 with g(alpha+t) == g(alpha-t) for all t in (0, t0); inf if global."""
    offsets = np.unique(np.abs(g.breakpoints() - alpha))
    offsets = offsets[offsets > 0]
    grid = np.concatenate([[0.0], offsets])
    for left, right in zip(grid[:-1], grid[1:]):
        tm = 0.5 * (left + right)
        a, b = float(g(alpha + tm)), float(g(alpha - tm))
        if not math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-300):
            return float(left)
    return math.inf


def _first_mismatch_offset_tabulated(g: Marginal, alpha: float) -> float:
    offsets = np.unique(np.abs(g.breakpoints() - alpha))
    offsets = offsets[offsets > 0]
    grid = np.concatenate([[0.0], offsets])
    scale = max(1.0, float(np.max(np.abs(g._values_arr)))) if g._values_arr is not None else 1.0
    tol = _TABULATED_SYM_TOL * scale
    for left, right in zip(grid[:-1], grid[1:]):
        # the mirrored difference is linear between mapped knots, so two
        # interior probes per interval decide it exactly
        for frac in (0.25, 0.75):
            tm = left + frac * (right - left)
            if abs(float(g(alpha + tm)) - float(g(alpha - tm))) > tol:
                return float(left)
    return math.inf


def beta_star(g_minus: Marginal | TrappedMarginal, params: PlasmaParams) -> float:
    """Half of the squared largest mirror-symmetric half-width, scaled by q_minus.

    Returns +inf when the marginal is mirror-symmetric about alpha everywhere.
    The piecewise and tabulated branches walk breakpoints exactly; the
    Gaussian branch reduces to comparing the center with alpha.
    """
    g = g_minus.g if isinstance(g_minus, TrappedMarginal) else g_minus
    alpha = params.alpha
    if g.kind == "maxwellian":
        if g.mass_if_maxwellian == 0 or g.center == alpha:
            return math.inf
        delta = 0.0
    elif g.kind == "piecewise":
        delta = _first_mismatch_offset_piecewise(g, alpha)
    else:
        delta = _first_mismatch_offset_tabulated(g, alpha)
    if math.isinf(delta):
        return math.inf
    return delta * delta / (2.0 * params.q_minus)
