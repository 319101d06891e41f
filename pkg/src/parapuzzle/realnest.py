"""Real principal nest for c in [-2, -3/4): interval returns, cascades,
scaling factors, and renormalizability classification.

Levels are cascade-compressed: one record per generalized-renormalization
step.  A record at level l carries the central interval I^l = [a, b], the
first return time m_l of the critical orbit to I^l, and the cascade length
N_l (1 for a non-central return; N-1 consecutive central returns
otherwise).  The next interval is the N_l-fold central pullback of I^l
under f^(m_l), so return times increase strictly.

Pullbacks are computed by the monotone backward square-root chain along
the critical orbit (each backward step picks the branch containing the
orbit point); for first-return chains the intermediate intervals never
contain the critical point, so the chain is the exact central component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np
from numba import njit

from . import dynamics
from .config import DEFAULT, RunConfig
from .errors import DomainError, InsufficientLevels, InvalidInput

REAL_DOMAIN = (-2.0, -0.75)

# kernel status codes
_OK = 0
_NO_RETURN = 1
_RENORM = 2
_GRAZE = 3
_WORKCAP = 4


@njit(cache=True, nogil=True)
def _pullback(orbit, m, u, v, c):
    """Central component of f^-m([u, v]) along the critical orbit."""
    for k in range(m, 0, -1):
        lo = u - c
        hi = v - c
        if hi < 0.0:
            hi = 0.0
        if lo <= 0.0:
            s = math.sqrt(hi)
            u = -s
            v = s
        else:
            slo = math.sqrt(lo)
            shi = math.sqrt(hi)
            if orbit[k - 1] >= 0.0:
                u = slo
                v = shi
            else:
                u = -shi
                v = -slo
    return u, v


@njit(cache=True, nogil=True)
def _nest_kernel(c, max_level, max_cascade, iter_cap, graze_tol, width_floor,
                 a_out, b_out, m_out, n_out):
    """Fills the per-level arrays; returns (levels_computed, status).

    ``iter_cap`` budgets the total iterate work per parameter (return
    searching and pullback chains combined); exhausting it yields
    _NO_RETURN when searching, _WORKCAP otherwise.  When a pullback
    produces an interval narrower than ``width_floor`` the nest has gone
    below the resolvable scale of double precision (returns to it would
    also exceed any practical budget), so the computation stops with
    _NO_RETURN after recording the completed level.
    """
    alpha = (1.0 - math.sqrt(1.0 - 4.0 * c)) / 2.0
    a = alpha
    b = -alpha
    orbit = np.empty(4096, dtype=np.float64)
    orbit[0] = 0.0
    olen = 1
    x = 0.0
    m_prev = 0
    work = 0
    for lev in range(max_level):
        # first return of the critical orbit to (a, b), strictly after m_prev
        m = -1
        j = m_prev + 1
        while work < iter_cap:
            work += 1
            if j >= olen:
                if olen >= orbit.shape[0]:
                    grown = np.empty(orbit.shape[0] * 2, dtype=np.float64)
                    grown[:olen] = orbit[:olen]
                    orbit = grown
                x = x * x + c
                orbit[olen] = x
                olen += 1
            zj = orbit[j]
            if abs(zj - a) < graze_tol or abs(zj - b) < graze_tol:
                return lev, _GRAZE
            if a < zj < b:
                m = j
                break
            j += 1
        if m < 0:
            return lev, _NO_RETURN
        zm = orbit[m]
        wa, wb = _pullback(orbit, m, a, b, c)
        work += m
        ncasc = 1
        while wa < zm < wb:
            if zm - wa < graze_tol or wb - zm < graze_tol:
                return lev, _GRAZE
            ncasc += 1
            if ncasc > max_cascade:
                return lev, _RENORM
            if work >= iter_cap:
                return lev, _WORKCAP
            wa, wb = _pullback(orbit, m, wa, wb, c)
            work += m
        if abs(zm - wa) < graze_tol or abs(zm - wb) < graze_tol:
            return lev, _GRAZE
        a_out[lev] = a
        b_out[lev] = b
        m_out[lev] = m
        n_out[lev] = ncasc
        a = wa
        b = wb
        m_prev = m
        if wb - wa < width_floor:
            return lev + 1, _NO_RETURN
    return max_level, _OK


@njit(cache=True, nogil=True)
def _pattern_kernel(c, m_expected, iter_cap, graze_tol):
    """Depth to which the nest shows non-central returns at expected times.

    Exits at the first mismatch, so scanning large parameter sets for a
    combinatorial pattern costs O(sum of expected times) per parameter.
    """
    alpha = (1.0 - math.sqrt(1.0 - 4.0 * c)) / 2.0
    a = alpha
    b = -alpha
    npat = m_expected.shape[0]
    horizon = m_expected[npat - 1] + 1
    orbit = np.empty(horizon + 1, dtype=np.float64)
    orbit[0] = 0.0
    x = 0.0
    for k in range(1, horizon + 1):
        x = x * x + c
        orbit[k] = x
    m_prev = 0
    depth = 0
    for lev in range(npat):
        target = m_expected[lev]
        # no earlier return, return exactly at `target`
        for j in range(m_prev + 1, target):
            if a <= orbit[j] <= b:
                return depth
        zm = orbit[target]
        if not (a < zm < b):
            return depth
        if zm - a < graze_tol or b - zm < graze_tol:
            return depth
        wa, wb = _pullback(orbit, target, a, b, c)
        if wa < zm < wb:
            return depth  # central return: pattern requires trivial cascades
        depth += 1
        a = wa
        b = wb
        m_prev = target
    return depth


class Verdict(str, Enum):
    NON_RENORM_FINITE_CASCADES = "NonRenormFiniteCascades"
    NON_RENORM_CASCADE_AT = "NonRenormCascadeAt"
    LIKELY_RENORMALIZABLE = "LikelyRenormalizable"
    MISIUREWICZ_NO_RETURN = "MisiurewiczNoReturn"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class RealNestLevel:
    level: int
    a: float
    b: float
    return_time: int
    central: bool
    cascade_len: int

    @property
    def width(self) -> float:
        return self.b - self.a


@dataclass(frozen=True)
class NestClassification:
    verdict: Verdict
    levels_computed: int
    cascade_lengths: tuple[int, ...]
    cascade_levels: tuple[int, ...]   # levels with a non-trivial cascade
    boundary_graze: bool
    in_primary_window: bool           # c < d (left of the tip parameter)
    levels: tuple[RealNestLevel, ...] = field(default=(), repr=False)


@lru_cache(maxsize=1)
def tip_parameter() -> float:
    """The real parameter d with f_d^2(0) = -alpha (so f_d^3(0) = alpha)."""
    return float(dynamics.solve_misiurewicz(2, 1, 1, -1.5).real)


def _check_domain(c: float) -> float:
    c = float(c)
    if not (REAL_DOMAIN[0] <= c < REAL_DOMAIN[1]):
        raise DomainError(f"c = {c} outside [{REAL_DOMAIN[0]}, {REAL_DOMAIN[1]})")
    return c


def real_nest(c: float, max_level: int = 16, cfg: RunConfig = DEFAULT
              ) -> tuple[list[RealNestLevel], Verdict, bool]:
    """Compute the nest; returns (levels, terminal verdict, graze flag).

    The verdict describes how the computation ended: OK at max_level maps
    to a NonRenorm* verdict, a blown cascade to LikelyRenormalizable, a
    missed return to MisiurewiczNoReturn, a graze to Undetermined.
    """
    c = _check_domain(c)
    if max_level < 1:
        raise InvalidInput("max_level must be >= 1")
    a = np.empty(max_level, dtype=np.float64)
    b = np.empty(max_level, dtype=np.float64)
    m = np.empty(max_level, dtype=np.int64)
    n = np.empty(max_level, dtype=np.int64)
    nlev, status = _nest_kernel(c, max_level, cfg.max_cascade,
                                cfg.realnest_iter_cap, cfg.graze_tol,
                                cfg.realnest_width_floor, a, b, m, n)
    levels = [RealNestLevel(level=i, a=float(a[i]), b=float(b[i]),
                            return_time=int(m[i]), central=bool(n[i] > 1),
                            cascade_len=int(n[i]))
              for i in range(nlev)]
    if status == _OK:
        if any(lv.cascade_len > 1 for lv in levels):
            verdict = Verdict.NON_RENORM_CASCADE_AT
        else:
            verdict = Verdict.NON_RENORM_FINITE_CASCADES
    elif status == _RENORM:
        verdict = Verdict.LIKELY_RENORMALIZABLE
    elif status == _NO_RETURN:
        verdict = Verdict.MISIUREWICZ_NO_RETURN
    else:
        verdict = Verdict.UNDETERMINED  # graze or work budget exhausted
    return levels, verdict, status == _GRAZE


def classify_parameter(c: float, max_level: int = 8, cfg: RunConfig = DEFAULT
                       ) -> NestClassification:
    """Full classification record for one real parameter."""
    c = _check_domain(c)
    in_window = c < tip_parameter()
    for center in dynamics.real_centers_up_to(8):
        if abs(c - center) < cfg.center_preclassify_tol:
            return NestClassification(
                verdict=Verdict.LIKELY_RENORMALIZABLE, levels_computed=0,
                cascade_lengths=(), cascade_levels=(), boundary_graze=False,
                in_primary_window=in_window)
    levels, verdict, graze = real_nest(c, max_level=max_level, cfg=cfg)
    return NestClassification(
        verdict=verdict,
        levels_computed=len(levels),
        cascade_lengths=tuple(lv.cascade_len for lv in levels),
        cascade_levels=tuple(lv.level for lv in levels if lv.cascade_len > 1),
        boundary_graze=graze,
        in_primary_window=in_window,
        levels=tuple(levels))


@dataclass(frozen=True)
class ScalingReport:
    lambdas: tuple[float, ...]
    sqrt_sum: float
    fit_c: float
    fit_rho: float
    fit_r2: float
    acim_flag: bool  # geometric decay detected (rho < 1, R^2 > 0.9)


def scaling_factors(c: float, levels: int, cfg: RunConfig = DEFAULT) -> ScalingReport:
    """Interval scaling factors |I^(l+1)|/|I^l| and their geometric fit."""
    if levels < 1:
        raise InsufficientLevels("need at least one requested level")
    nest, verdict, _ = real_nest(c, max_level=levels + 1, cfg=cfg)
    if len(nest) < 4:
        raise InsufficientLevels(
            f"only {len(nest)} nest levels available (terminal: {verdict.value})")
    lams = []
    for i in range(len(nest) - 1):
        lams.append(nest[i + 1].width / nest[i].width)
    lams = lams[:levels]
    lam = np.asarray(lams)
    if np.any(lam <= 0) or np.any(lam >= 1):
        raise InsufficientLevels("degenerate scaling data")
    logs = np.log(lam)
    idx = np.arange(len(lam), dtype=np.float64)
    design = np.vstack([np.ones_like(idx), idx]).T
    coef, *_ = np.linalg.lstsq(design, logs, rcond=None)
    pred = design @ coef
    ss_res = float(np.sum((logs - pred) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    rho = math.exp(coef[1])
    return ScalingReport(
        lambdas=tuple(float(x) for x in lam),
        sqrt_sum=float(np.sum(np.sqrt(lam))),
        fit_c=math.exp(coef[0]),
        fit_rho=rho,
        fit_r2=r2,
        acim_flag=bool(rho < 1.0 and r2 > 0.9))


# ----------------------------------------------------------------------
# parameter search on the real line
# ----------------------------------------------------------------------

FIBONACCI_RETURNS = (3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987)


def pattern_depth(c: float, pattern: tuple[int, ...], cfg: RunConfig = DEFAULT) -> int:
    """How many initial nest levels show non-central returns at the given times."""
    m_expected = np.asarray(pattern, dtype=np.int64)
    return int(_pattern_kernel(float(c), m_expected, cfg.realnest_iter_cap, cfg.graze_tol))


def find_return_pattern(pattern: tuple[int, ...], lo: float, hi: float,
                        target_depth: int, cfg: RunConfig = DEFAULT,
                        samples: int = 129, budget: int = 4000) -> float:
    """Locate a real parameter matching a return-time pattern by scan refinement.

    A finite pattern can be realized on several disjoint parameter
    intervals (distinct symbolic words share return times), and only one
    of them subdivides all the way down, so the refinement backtracks:
    every contiguous max-depth run of each scan becomes a candidate
    bracket, explored deepest-first.
    """
    target_depth = min(target_depth, len(pattern))
    # candidate stack entries: (-depth_reached, lo, hi)
    stack: list[tuple[int, float, float]] = [(0, lo, hi)]
    best_point, best_depth = 0.5 * (lo + hi), -1
    evals = 0
    while stack and evals < budget:
        stack.sort(key=lambda t: t[0])
        depth_hint, blo, bhi = stack.pop(0)
        pts = np.linspace(blo, bhi, samples)
        depths = [pattern_depth(float(p), pattern, cfg) for p in pts]
        evals += samples
        dmax = max(depths)
        if dmax == 0:
            continue
        spacing = (bhi - blo) / (samples - 1)
        i = 0
        while i < samples:
            if depths[i] == dmax:
                j = i
                while j + 1 < samples and depths[j + 1] == dmax:
                    j += 1
                mid = float(pts[(i + j) // 2])
                if dmax > best_depth:
                    best_point, best_depth = mid, dmax
                    if dmax >= target_depth:
                        return mid
                run_lo = float(pts[max(0, i - 1)])
                run_hi = float(pts[min(samples - 1, j + 1)])
                if run_hi - run_lo > max(1e-16, abs(mid) * 4e-16):
                    stack.append((-dmax, run_lo, run_hi))
                i = j + 1
            else:
                i += 1
    if best_depth < min(3, target_depth):
        raise InvalidInput("pattern not found in bracket")
    return best_point


@lru_cache(maxsize=8)
def fibonacci_parameter(depth: int = 9) -> float:
    """The real parameter whose nest has Fibonacci return times, to `depth` levels.

    Double precision resolves the combinatorics to about 9 levels; the
    located value agrees with the independently refined constant
    -1.8705286321646448 to the last bit.
    """
    return find_return_pattern(FIBONACCI_RETURNS, -2.0, -1.70, depth)
