"""Core arithmetic for the quadratic family f_c(z) = z^2 + c.

Orbits, the dividing/non-dividing fixed points, and Newton solvers for
superattracting centers and for parameters whose critical orbit hits the
co-fixed point.  Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import DEFAULT, RunConfig
from .errors import (
    DegenerateFixedPoint,
    InvalidInput,
    LandedOnAlpha,
    NoConvergence,
    WrongPeriod,
)

PARAM_BOUND = 8.0  # escape-safe bound on |c| for all public operations


def _check_param(c: complex) -> complex:
    c = complex(c)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise InvalidInput("parameter must be finite")
    if abs(c) > PARAM_BOUND:
        raise InvalidInput(f"|c| = {abs(c):.3g} exceeds the supported bound {PARAM_BOUND}")
    return c


@dataclass(frozen=True)
class FixedPointPair:
    """The two solutions of z^2 + c = z.

    ``alpha`` is the branch (1 - sqrt(1-4c))/2 with the principal square
    root (the dividing fixed point inside every wake of interest);
    ``beta`` is the other one.  ``alpha_multiplier`` = 2*alpha.
    """

    alpha: complex
    beta: complex
    alpha_multiplier: complex


@dataclass(frozen=True)
class OrbitBuffer:
    """Critical orbit f_c^k(0), truncated at escape.

    ``escaped_at`` is the first index k with |points[k]| > escape_radius,
    or None if the stored orbit never escapes.
    """

    points: np.ndarray
    escaped_at: int | None
    escape_radius: float

    def __len__(self) -> int:
        return len(self.points)


def fixed_points(c: complex, tol: float = 1e-14) -> FixedPointPair:
    """Both fixed points of f_c; raises DegenerateFixedPoint near c = 1/4."""
    c = _check_param(c)
    disc = 1 - 4 * c
    if abs(disc) < tol:
        raise DegenerateFixedPoint(f"1-4c = {disc:.3e}; fixed points collide at c = 1/4")
    root = cmath.sqrt(disc)
    alpha = (1 - root) / 2
    beta = (1 + root) / 2
    return FixedPointPair(alpha=alpha, beta=beta, alpha_multiplier=2 * alpha)


def cofixed_point(c: complex) -> complex:
    """The non-fixed preimage of alpha, i.e. -alpha.

    For c = 0 this coincides with alpha itself (both are 0); callers that
    care can compare against ``fixed_points(c).alpha``.
    """
    return -fixed_points(c).alpha


def critical_orbit(c: complex, n: int, escape_radius: float = DEFAULT.escape_radius) -> OrbitBuffer:
    """Orbit of 0 under f_c, at most n iterations, truncated at escape."""
    c = _check_param(c)
    if n < 1:
        raise InvalidInput("n must be >= 1")
    if escape_radius < 2:
        raise InvalidInput("escape_radius must be >= 2")
    pts = np.empty(n + 1, dtype=np.complex128)
    pts[0] = 0.0
    z = 0j
    escaped_at = None
    length = n + 1
    for k in range(1, n + 1):
        z = z * z + c
        pts[k] = z
        if abs(z) > escape_radius:
            escaped_at = k
            length = k + 1
            break
    return OrbitBuffer(points=pts[:length].copy(), escaped_at=escaped_at,
                       escape_radius=escape_radius)


def _iterate_with_derivative(c: complex, n: int) -> tuple[complex, complex]:
    """(f_c^n(0), d/dc f_c^n(0)) by forward accumulation."""
    z = 0j
    dz = 0j
    for _ in range(n):
        dz = 2 * z * dz + 1
        z = z * z + c
    return z, dz


def _proper_divisors(n: int) -> list[int]:
    return [d for d in range(1, n) if n % d == 0]


def solve_center(period: int, seed: complex, cfg: RunConfig = DEFAULT) -> complex:
    """Superattracting parameter: f_c^period(0) = 0 with minimal period.

    Newton iteration on c |-> f_c^period(0) from the caller's seed; the
    result is rejected (WrongPeriod) if a proper divisor of the period
    already annihilates the critical point.
    """
    if period < 1:
        raise InvalidInput("period must be >= 1")
    c = _check_param(seed)
    for _ in range(cfg.newton_max_iter):
        z, dz = _iterate_with_derivative(c, period)
        if dz == 0:
            raise NoConvergence("vanishing derivative in center solve")
        step = z / dz
        c = c - step
        if abs(c) > cfg.newton_divergence_radius:
            raise NoConvergence(f"center solve left |c| <= {cfg.newton_divergence_radius}")
        if abs(step) < cfg.newton_step_tol:
            break
    else:
        raise NoConvergence(f"center solve: no convergence in {cfg.newton_max_iter} iterations")
    residual, _ = _iterate_with_derivative(c, period)
    if abs(residual) > 1e-12:
        raise NoConvergence(f"center residual {abs(residual):.3e} above 1e-12")
    for d in _proper_divisors(period):
        zd, _ = _iterate_with_derivative(c, d)
        if abs(zd) < 1e-8:
            raise WrongPeriod(f"divisor {d} of {period} also annihilates the critical point")
    return c


def solve_misiurewicz(p: int, q: int, n: int, seed: complex, cfg: RunConfig = DEFAULT) -> complex:
    """Parameter with f_c^(p*n)(0) equal to the co-fixed point -alpha.

    Newton on the full composed map g(c) = f_c^(p*n)(0) + alpha(c), with
    the orbit derivative accumulated forward and d(alpha)/dc = 1/sqrt(1-4c).
    Raises LandedOnAlpha when the converged parameter satisfies
    f^(p*n)(0) = alpha instead (wrong branch, typically a seed outside
    the intended wake).
    """
    if p < 2 or not (1 <= q < p) or math.gcd(p, q) != 1:
        raise InvalidInput("need p >= 2, 1 <= q < p, gcd(p, q) = 1")
    if n < 1:
        raise InvalidInput("n must be >= 1")
    c = _check_param(seed)
    total = p * n
    for _ in range(cfg.newton_max_iter):
        disc = 1 - 4 * c
        if abs(disc) < 1e-14:
            raise NoConvergence("iterate hit the degenerate parameter c = 1/4")
        root = cmath.sqrt(disc)
        alpha = (1 - root) / 2
        z, dz = _iterate_with_derivative(c, total)
        g = z + alpha
        dg = dz + 1 / root
        if dg == 0:
            raise NoConvergence("vanishing derivative in Misiurewicz solve")
        step = g / dg
        c = c - step
        if abs(c) > cfg.newton_divergence_radius:
            raise NoConvergence("Misiurewicz solve diverged")
        if abs(step) < cfg.newton_step_tol:
            break
    else:
        raise NoConvergence(f"Misiurewicz solve: no convergence in {cfg.newton_max_iter} iterations")
    pair = fixed_points(c)
    z, _ = _iterate_with_derivative(c, total)
    if abs(z - pair.alpha) < 1e-10 and abs(pair.alpha + pair.alpha) > 1e-8:
        raise LandedOnAlpha("critical orbit lands on alpha, not the co-fixed point")
    if abs(z + pair.alpha) > 1e-12:
        raise NoConvergence(f"Misiurewicz residual {abs(z + pair.alpha):.3e} above 1e-12")
    return c


def _compose_critical_polynomial(n: int) -> np.ndarray:
    """Coefficients (ascending) of f_c^n(0) as a polynomial in c."""
    coeffs = np.zeros(2, dtype=object)
    coeffs[1] = 1  # f^1(0) = c
    for _ in range(n - 1):
        sq = np.convolve(coeffs, coeffs)
        sq[1] += 1
        coeffs = sq
    return coeffs


@lru_cache(maxsize=None)
def real_centers_up_to(max_period: int, lo: float = -2.0, hi: float = -0.74) -> tuple[float, ...]:
    """All real superattracting centers with period <= max_period in [lo, hi].

    Found from the roots of the composed critical polynomial per period,
    filtered for minimal period and polished by Newton.  Used to
    pre-classify near-center parameters in the real nest engine.
    """
    if max_period > 14:
        raise InvalidInput("polynomial degree grows as 2^(n-1); keep max_period <= 14")
    centers: list[float] = []
    for period in range(1, max_period + 1):
        poly = _compose_critical_polynomial(period)
        roots = np.roots(np.array(poly[::-1], dtype=np.float64))
        for r in roots:
            if abs(r.imag) > 1e-9:
                continue
            cr = float(r.real)
            if not (lo <= cr <= hi):
                continue
            try:
                polished = solve_center(period, cr)
            except (NoConvergence, WrongPeriod):
                continue
            if abs(polished.imag) < 1e-12 and all(abs(polished.real - e) > 1e-10 for e in centers):
                centers.append(float(polished.real))
    return tuple(sorted(centers))
