"""Independent slow-path evaluations used to cross-check the library.

Every routine here takes the dumbest defensible route: flattened-variable
midpoint Riemann sums for the density kernels and plain bisection for
roots. Nothing imports the library's quadrature internals, so agreement
is evidence, not tautology.
"""
from __future__ import annotations

import math

import numpy as np


def midpoint_sum(f, a: float, b: float, n: int, chunk: int = 2_000_000) -> float:
    if b <= a:
        return 0.0
    h = (b - a) / n
    total = 0.0
    done = 0
    while done < n:
        k = min(chunk, n - done)
        idx = np.arange(done, done + k, dtype=np.float64)
        total += float(np.sum(f(a + (idx + 0.5) * h)))
        done += k
    return total * h


def brute_free_density(g, alpha: float, c: float, n: int) -> float:
    """Integral of g(xi) |xi - alpha| / sqrt((xi - alpha)^2 + c)."""
    lo, hi = g.quad_support()
    return midpoint_sum(
        lambda u: g(alpha + u) * np.abs(u) / np.sqrt(u * u + c),
        lo - alpha, hi - alpha, n)


def brute_cutoff_density(g, alpha: float, c: float, n: int,
                         pad: float = 1e-9) -> float:
    """Same kernel with sqrt(u^2 - c), over |u| > sqrt(c).

    Substituting s = sqrt(u^2 - c) removes the singularity: each side
    becomes the integral of g(alpha +- sqrt(s^2 + c)) ds. The band
    s < pad is excised and contributes only O(pad).
    """
    lo, hi = g.quad_support()
    root = math.sqrt(max(c, 0.0))
    total = 0.0
    for sign in (-1.0, 1.0):
        edge = (hi - alpha) if sign > 0 else (alpha - lo)
        if edge <= root:
            continue
        s_max = math.sqrt(edge * edge - c)
        total += midpoint_sum(
            lambda s: g(alpha + sign * np.sqrt(s * s + c)), pad, s_max, n)
    return total


def brute_band_density(G, alpha: float, m: float, M: float, n: int,
                       pad: float = 1e-9) -> float:
    """Bound-orbit kernel: 2 * integral over sqrt(m) < u < sqrt(M) of
    G(alpha + u) u / sqrt(u^2 - m), flattened the same way."""
    if M <= m:
        return 0.0
    s_max = math.sqrt(M - m)
    return 2.0 * midpoint_sum(
        lambda s: G(alpha + np.sqrt(s * s + m)), pad, s_max, n)


def brute_free_v(g, alpha: float, c: float, n: int) -> float:
    """Ion part of the pseudo potential, via the inner closed form.

    Integrating the free density in the field variable first gives
    integral of g(xi) |u| (sqrt(u^2 + c) - |u|) du with u = xi - alpha;
    the outer integral is smooth, so a plain midpoint sum suffices.
    """
    lo, hi = g.quad_support()
    return midpoint_sum(
        lambda u: g(alpha + u) * np.abs(u) * (np.sqrt(u * u + c) - np.abs(u)),
        lo - alpha, hi - alpha, n)


def brute_cutoff_v(g, alpha: float, c: float, n: int) -> float:
    """Electron part: integral of g |u| (|u| - sqrt(max(u^2 - c, 0))) du."""
    lo, hi = g.quad_support()
    return midpoint_sum(
        lambda u: g(alpha + u) * np.abs(u)
        * (np.abs(u) - np.sqrt(np.maximum(u * u - c, 0.0))),
        lo - alpha, hi - alpha, n)


def box_free_v(pieces, alpha: float, c: float, n: int = 200_000) -> float:
    """box_free_v splits the sum at box edges so no panel straddles a jump."""
    return sum(
        h * midpoint_sum(
            lambda u: np.abs(u) * (np.sqrt(u * u + c) - np.abs(u)),
            lo - alpha, hi - alpha, n)
        for lo, hi, h in pieces)


def box_cutoff_v(pieces, alpha: float, c: float, n: int = 200_000) -> float:
    return sum(
        h * midpoint_sum(
            lambda u: np.abs(u)
            * (np.abs(u) - np.sqrt(np.maximum(u * u - c, 0.0))),
            lo - alpha, hi - alpha, n)
        for lo, hi, h in pieces)


def box_shock_ion_v(pieces, alpha: float, c_phi: float, c0: float,
                    n: int = 200_000) -> float:
    return sum(
        h * midpoint_sum(
            lambda u: np.abs(u)
            * (np.sqrt(np.maximum(u * u - c_phi, 0.0))
               - np.sqrt(np.maximum(u * u - c0, 0.0))),
            lo - alpha, hi - alpha, n)
        for lo, hi, h in pieces)


def bisect(f, lo: float, hi: float, iters: int = 200) -> float:
    flo = f(lo)
    if flo == 0.0:
        return lo
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# closed forms for flat-box marginals, written from the antiderivatives
# sqrt(u^2 + c) and sqrt(u^2 - c) directly


def box_free_density(pieces, alpha: float, c: float) -> float:
    total = 0.0
    for lo, hi, h in pieces:
        a, b = lo - alpha, hi - alpha
        # |u| splits the box at 0; the negative side reflects to (|b'|, |a|)
        for p, q in ((max(a, 0.0), max(b, 0.0)), (-min(b, 0.0), -min(a, 0.0))):
            if q > p:
                total += h * (math.sqrt(q * q + c) - math.sqrt(p * p + c))
    return total


def box_cutoff_density(pieces, alpha: float, c: float) -> float:
    root = math.sqrt(max(c, 0.0))

    def anti(x: float) -> float:
        # the antiderivative vanishes exactly at the band edge; computing
        # sqrt(root^2 - c) in floating point would leave an O(1e-8) ghost
        if x <= root:
            return 0.0
        return math.sqrt(max(x * x - c, 0.0))

    total = 0.0
    for lo, hi, h in pieces:
        a, b = lo - alpha, hi - alpha
        for p, q in ((max(a, root), max(b, root)),
                     (max(-b, root), max(-a, root))):
            if q > p:
                total += h * (anti(q) - anti(p))
    return total
