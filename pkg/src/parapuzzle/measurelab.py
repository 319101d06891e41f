"""Monte Carlo estimates of central-return densities, the exponential
decay fit, and the positive-measure proxy for non-renormalizable
parameters on [-2, d).

Sampling uses the counter-based Philox generator (seed + stream index
determines every draw), all samples are drawn up front, and each sample
is classified independently by the real-nest kernel, so reports are
bit-identical across runs and across worker counts.  Conditioning per
level follows the tiling: the density at level l is measured among
samples still unresolved at level l, and boundary-grazing samples are
discarded from both numerator and denominator with their fraction
reported.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import dynamics, realnest
from .config import DEFAULT, RunConfig
from .errors import DomainError, InsufficientData, InvalidInput

_Z95 = 1.959963984540054

# sample status codes (match the kernel codes in realnest)
_COMPLETED = 0
_NO_RETURN = 1
_RENORM = 2
_GRAZE = 3
_WORKCAP = 4
_NEAR_CENTER = 5


@njit(cache=True, nogil=True)
def _mc_chunk(samples, skip, max_level, max_cascade, iter_cap, graze_tol,
              width_floor, status, nlev, cascades, times, start, stop):
    """Classify samples[start:stop] into the preallocated output rows.

    Sequential and GIL-free: worker threads process disjoint chunks, and
    every row depends only on its own sample, so results are identical
    for any worker count.
    """
    a = np.empty(max_level, dtype=np.float64)
    b = np.empty(max_level, dtype=np.float64)
    m = np.empty(max_level, dtype=np.int64)
    ncasc = np.empty(max_level, dtype=np.int64)
    for i in range(start, stop):
        if skip[i]:
            status[i] = _NEAR_CENTER
            nlev[i] = 0
            continue
        k, st = realnest._nest_kernel(samples[i], max_level, max_cascade,
                                      iter_cap, graze_tol, width_floor,
                                      a, b, m, ncasc)
        status[i] = st
        nlev[i] = k
        for j in range(k):
            cascades[i, j] = ncasc[j]
            times[i, j] = m[j]


@dataclass(frozen=True)
class Wilson:
    fraction: float
    lo: float
    hi: float
    n: int


def wilson_interval(successes: int, n: int, z: float = _Z95) -> Wilson:
    if n == 0:
        return Wilson(fraction=0.0, lo=0.0, hi=1.0, n=0)
    p = successes / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return Wilson(fraction=p, lo=max(0.0, center - half),
                  hi=min(1.0, center + half), n=n)


@dataclass
class LevelDensity:
    level: int
    in_play: int
    central: int
    density: float
    ci_lo: float
    ci_hi: float


@dataclass
class MeasureReport:
    interval: tuple[float, float]
    n_samples: int
    seed: int
    max_level: int
    densities: list[LevelDensity]
    fit_c: float | None
    fit_q: float | None
    fit_r2: float | None
    nr_fraction: float
    nr_ci: tuple[float, float]
    discard_fraction: float
    verdict_counts: dict[str, int]
    # per-sample arrays (not serialized; needed by the tail checks)
    samples: np.ndarray = field(repr=False, default=None)
    status: np.ndarray = field(repr=False, default=None)
    levels_computed: np.ndarray = field(repr=False, default=None)
    cascades: np.ndarray = field(repr=False, default=None)
    return_times: np.ndarray = field(repr=False, default=None)

    def to_json(self, indent: int = 2) -> str:
        payload = {
            "interval": list(self.interval),
            "n_samples": self.n_samples,
            "seed": self.seed,
            "max_level": self.max_level,
            "densities": [
                {"level": d.level, "in_play": d.in_play, "central": d.central,
                 "density": d.density, "ci_lo": d.ci_lo, "ci_hi": d.ci_hi}
                for d in self.densities],
            "fit": {"C": self.fit_c, "q": self.fit_q, "r2": self.fit_r2},
            "nr_fraction": self.nr_fraction,
            "nr_ci": list(self.nr_ci),
            "discard_fraction": self.discard_fraction,
            "verdict_counts": self.verdict_counts,
        }
        return json.dumps(payload, indent=indent, sort_keys=True)


def _draw_samples(lo: float, hi: float, n: int, seed: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=seed))
    return lo + (hi - lo) * gen.random(n, dtype=np.float64)


def density_experiment(interval: tuple[float, float], n_samples: int,
                       max_level: int = 8, seed: int = 42,
                       cfg: RunConfig = DEFAULT, workers: int | None = None
                       ) -> MeasureReport:
    """Per-level central-return densities over a seeded uniform sample."""
    lo, hi = float(interval[0]), float(interval[1])
    d = realnest.tip_parameter()
    if not (-2.0 <= lo < hi <= d):
        raise DomainError(f"interval must lie within [-2, {d:.10f})")
    if n_samples < 100:
        raise InvalidInput("need at least 100 samples")
    if max_level < 1:
        raise InvalidInput("max_level must be >= 1")

    samples = _draw_samples(lo, hi, n_samples, seed)
    centers = np.asarray(dynamics.real_centers_up_to(8))
    skip = np.zeros(n_samples, dtype=np.bool_)
    if len(centers):
        skip = np.min(np.abs(samples[:, None] - centers[None, :]), axis=1) \
            < cfg.center_preclassify_tol

    status = np.empty(n_samples, dtype=np.int64)
    nlev = np.empty(n_samples, dtype=np.int64)
    cascades = np.zeros((n_samples, max_level), dtype=np.int64)
    times = np.zeros((n_samples, max_level), dtype=np.int64)

    nwork = max(1, workers if workers is not None else cfg.workers)
    args = (samples, skip, max_level, cfg.max_cascade,
            cfg.realnest_iter_cap, cfg.graze_tol, cfg.realnest_width_floor,
            status, nlev, cascades, times)
    if nwork == 1:
        _mc_chunk(*args, 0, n_samples)
    else:
        chunk = (n_samples + nwork - 1) // nwork
        bounds = [(k * chunk, min((k + 1) * chunk, n_samples)) for k in range(nwork)]
        with ThreadPoolExecutor(max_workers=nwork) as pool:
            futures = [pool.submit(_mc_chunk, *args, lo_, hi_) for lo_, hi_ in bounds]
            for fut in futures:
                fut.result()

    discarded = (status == _GRAZE) | (status == _WORKCAP)
    kept = ~discarded
    densities = []
    for lev in range(max_level):
        in_play = kept & ((nlev > lev)
                          | ((nlev == lev) & ((status == _RENORM)
                                              | (status == _NO_RETURN)
                                              | (status == _NEAR_CENTER))))
        central = in_play & (((nlev > lev) & (cascades[:, lev] > 1))
                             | ((nlev == lev) & ((status == _RENORM)
                                                 | (status == _NEAR_CENTER))))
        n_in = int(in_play.sum())
        n_c = int(central.sum())
        ci = wilson_interval(n_c, n_in)
        densities.append(LevelDensity(level=lev, in_play=n_in, central=n_c,
                                      density=n_c / n_in if n_in else 0.0,
                                      ci_lo=ci.lo, ci_hi=ci.hi))

    fit_c = fit_q = fit_r2 = None
    pts = [(d_.level, d_.density) for d_ in densities
           if d_.in_play >= 30 and d_.density > 0]
    if len(pts) >= 3:
        ls = np.array([p[0] for p in pts], dtype=float)
        logd = np.log(np.array([p[1] for p in pts]))
        design = np.vstack([np.ones_like(ls), ls]).T
        coef, *_ = np.linalg.lstsq(design, logd, rcond=None)
        pred = design @ coef
        ss_res = float(np.sum((logd - pred) ** 2))
        ss_tot = float(np.sum((logd - logd.mean()) ** 2))
        fit_c = math.exp(coef[0])
        fit_q = math.exp(coef[1])
        fit_r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0

    nr_mask = kept & ((status == _COMPLETED) | (status == _NO_RETURN))
    n_kept = int(kept.sum())
    ci = wilson_interval(int(nr_mask.sum()), n_kept)
    names = {_COMPLETED: "completed", _NO_RETURN: "misiurewicz_no_return",
             _RENORM: "likely_renormalizable", _GRAZE: "boundary_graze",
             _WORKCAP: "work_budget", _NEAR_CENTER: "near_center"}
    counts = {names[k]: int((status == k).sum()) for k in names}

    return MeasureReport(
        interval=(lo, hi), n_samples=n_samples, seed=seed, max_level=max_level,
        densities=densities, fit_c=fit_c, fit_q=fit_q, fit_r2=fit_r2,
        nr_fraction=ci.fraction, nr_ci=(ci.lo, ci.hi),
        discard_fraction=float(discarded.mean()),
        verdict_counts=counts,
        samples=samples, status=status, levels_computed=nlev,
        cascades=cascades, return_times=times)


def nr_measure_estimate(report: MeasureReport) -> tuple[float, float, float]:
    """(fraction, ci_lo, ci_hi) of the non-renormalizable proxy."""
    if report.status is None or len(report.status) == 0:
        return (0.0, 0.0, 1.0)
    return (report.nr_fraction, report.nr_ci[0], report.nr_ci[1])


@dataclass(frozen=True)
class BorelCantelliVerdict:
    tail_levels: tuple[int, ...]
    tail_fractions: tuple[float, ...]
    sum_densities: float
    geometric_sum: float | None
    passed: bool


def borel_cantelli_check(report: MeasureReport, tail_level: int
                         ) -> BorelCantelliVerdict:
    """Tail fractions of late central returns among non-renormalizable
    samples, swept from ``tail_level`` to the report depth.

    Passes when the tail fractions are nonincreasing and the summed
    densities are dominated by the fitted geometric series (allowing a
    50% headroom on the finite-sample fit).
    """
    if report.status is None:
        raise InsufficientData("report carries no per-sample data")
    if tail_level >= report.max_level:
        raise InsufficientData("tail_level must be below the report depth")
    kept = ~((report.status == _GRAZE) | (report.status == _WORKCAP))
    nr = kept & ((report.status == _COMPLETED) | (report.status == _NO_RETURN))
    n_nr = int(nr.sum())
    if n_nr < 30:
        raise InsufficientData(f"only {n_nr} non-renormalizable samples")
    central = report.cascades > 1
    levels = tuple(range(tail_level, report.max_level))
    fracs = []
    for t in levels:
        has_late = central[:, t:report.max_level].any(axis=1)
        fracs.append(float((nr & has_late).sum()) / n_nr)
    nonincreasing = all(fracs[i + 1] <= fracs[i] + 1e-12 for i in range(len(fracs) - 1))
    total = float(sum(d.density for d in report.densities))
    geo = None
    dominated = True
    if report.fit_q is not None and report.fit_q < 1:
        geo = report.fit_c / (1 - report.fit_q)
        dominated = total <= 1.5 * geo
    elif report.fit_q is not None and report.fit_q >= 1:
        dominated = False
    passed = nonincreasing and dominated and (report.fit_q is None or report.fit_q < 1)
    return BorelCantelliVerdict(tail_levels=levels, tail_fractions=tuple(fracs),
                                sum_densities=total, geometric_sum=geo,
                                passed=passed)


# ----------------------------------------------------------------------
# helpers for experiments
# ----------------------------------------------------------------------

def period3_window(cfg: RunConfig = DEFAULT) -> tuple[float, float]:
    """The real parameter window around the period-3 center, located by
    bisection on the renormalizability flag."""
    center = float(dynamics.solve_center(3, -1.8).real)

    def renorm(c: float) -> bool:
        _, verdict, _ = realnest.real_nest(c, max_level=6, cfg=cfg)
        return verdict is realnest.Verdict.LIKELY_RENORMALIZABLE

    lo_out, hi_out = center - 0.05, center + 0.05
    lo_in = hi_in = center
    for _ in range(60):
        mid = 0.5 * (lo_out + lo_in)
        if renorm(mid):
            lo_in = mid
        else:
            lo_out = mid
    for _ in range(60):
        mid = 0.5 * (hi_out + hi_in)
        if renorm(mid):
            hi_in = mid
        else:
            hi_out = mid
    return (lo_in, hi_in)
