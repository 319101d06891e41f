"""Green's functions, Boettcher targets, and external-ray tracing.

Conventions: the "level" of an equipotential is exp(G), so the truncating
equipotential of level 4 is {G = log 4}.  Angles are exact rationals in
turns; doubling is integer arithmetic and never drifts.

Ray tracing follows the standard halving scheme: the point at potential g
on the ray of angle theta solves f^n(z) = exp(2^n g + 2 pi i {2^n theta})
for the smallest n that puts the right-hand side in the far field where
the Boettcher coordinate is the identity to machine accuracy.  Each
generation halves the potential with several intermediate Newton targets,
seeded by the previous point.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .config import DEFAULT, RunConfig
from .errors import InvalidInput

G_FAR = math.log(1e6)  # potential above which Boettcher == identity numerically


# ----------------------------------------------------------------------
# exact angles
# ----------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Angle:
    """Exact rational angle num/den in turns, reduced, in [0, 1)."""

    num: int
    den: int

    def __post_init__(self):
        if self.den < 1:
            raise InvalidInput("denominator must be >= 1")
        g = math.gcd(self.num % self.den, self.den)
        object.__setattr__(self, "num", (self.num % self.den) // g)
        object.__setattr__(self, "den", self.den // g)

    @classmethod
    def parse(cls, text: str) -> "Angle":
        if "/" in text:
            a, b = text.split("/", 1)
            return cls(int(a), int(b))
        return cls(int(text), 1)

    def double(self) -> "Angle":
        return Angle(2 * self.num % self.den, self.den)

    def doubled(self, k: int) -> "Angle":
        return Angle(pow(2, k, self.den) * self.num % self.den, self.den)

    def halves(self) -> tuple["Angle", "Angle"]:
        """The two doubling preimages theta/2 and theta/2 + 1/2."""
        return Angle(self.num, 2 * self.den), Angle(self.num + self.den, 2 * self.den)

    def period_under_doubling(self) -> int | None:
        """Exact period under doubling, or None if strictly preperiodic."""
        seen = self
        for k in range(1, self.den + 1):
            seen = seen.double()
            if seen == self:
                return k
        return None

    def turns(self) -> float:
        return self.num / self.den

    def radians(self) -> float:
        return 2 * math.pi * self.num / self.den

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"


# ----------------------------------------------------------------------
# Green's functions
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialValue:
    """Green value g >= 0 and the equipotential level exp(g)."""

    g: float
    level: float
    escaped: bool  # False means the orbit never escaped within the cap


def _green_orbit(c: complex, z: complex, cfg: RunConfig) -> tuple[float, bool]:
    r2 = cfg.escape_radius * cfg.escape_radius
    w = complex(z)
    for n in range(cfg.green_max_iter):
        mag2 = w.real * w.real + w.imag * w.imag
        if mag2 > r2:
            # G = 2^-n (log|w| + (1/2) log|1 + c/w^2|): one correction term
            g = 0.5 * math.log(mag2)
            g += 0.5 * math.log(abs(1 + c / (w * w)))
            return g * (0.5 ** n), True
        if not (math.isfinite(w.real) and math.isfinite(w.imag)):
            return 0.0, False
        w = w * w + c
    return 0.0, False


def green_dynamical(c: complex, z: complex, cfg: RunConfig = DEFAULT) -> PotentialValue:
    """Green's function of the filled Julia set of f_c at z."""
    g, escaped = _green_orbit(c, z, cfg)
    if not escaped or g < cfg.green_zero_threshold:
        return PotentialValue(g=0.0, level=1.0, escaped=escaped)
    return PotentialValue(g=g, level=math.exp(g), escaped=True)


def green_parameter(c: complex, cfg: RunConfig = DEFAULT) -> PotentialValue:
    """Green's function of the Mandelbrot set at c, i.e. G_c(c)."""
    return green_dynamical(c, c, cfg)


# ----------------------------------------------------------------------
# ray tracing
# ----------------------------------------------------------------------

@dataclass
class RayTrace:
    """A traced external ray, ordered by decreasing potential."""

    plane: Literal["dynamical", "parameter"]
    c: complex | None            # base parameter for dynamical rays
    angle: Angle
    points: list[complex] = field(default_factory=list)
    potentials: list[float] = field(default_factory=list)
    landed: bool = False
    landing_point: complex | None = None
    failure: str | None = None   # 'newton_divergence' | 'branch_ambiguity' | None

    def as_rows(self):
        return [(g, z.real, z.imag) for g, z in zip(self.potentials, self.points)]


def _target_depth(g: float) -> int:
    """Smallest n with 2^n g >= G_FAR."""
    if g >= G_FAR:
        return 0
    return max(0, math.ceil(math.log2(G_FAR / g) - 1e-12))


def _ray_equation(plane: str, c_or_none, z: complex, n: int):
    """(value, derivative) of the depth-n iterate used by the ray solver.

    Dynamical plane: w = f_c^n(z), derivative in z.
    Parameter plane: w = f_c^n(c) (the critical value orbit), derivative in c.
    """
    if plane == "dynamical":
        c = c_or_none
        w = z
        dw = 1 + 0j
        for _ in range(n):
            dw = 2 * w * dw
            w = w * w + c
        return w, dw
    c = z
    w = c
    dw = 1 + 0j
    for _ in range(n):
        dw = 2 * w * dw + 1
        w = w * w + c
    return w, dw


def _solve_ray_point(plane: str, c, angle: Angle, g: float, guess: complex,
                     cfg: RunConfig) -> complex | None:
    """Newton-correct ``guess`` onto the ray point at potential g."""
    n = _target_depth(g)
    theta_n = angle.doubled(n)
    t = (2.0 ** n) * g
    target = cmath.exp(complex(t, theta_n.radians()))
    z = guess
    for _ in range(cfg.ray_newton_iter):
        w, dw = _ray_equation(plane, c, z, n)
        if dw == 0 or not (math.isfinite(w.real) and math.isfinite(w.imag)):
            return None
        step = (w - target) / dw
        z = z - step
        if abs(z) > 1e8:
            return None
        if abs(step) < 1e-13 * max(1.0, abs(z)):
            return z
    return None


def _aitken(z0: complex, z1: complex, z2: complex) -> complex:
    d1, d0 = z2 - z1, z1 - z0
    denom = d1 - d0
    if abs(denom) < 1e-300:
        return z2
    return z2 - d1 * d1 / denom


def trace_ray(plane: str, angle: Angle, g_start: float, g_end: float = 0.0,
              c: complex | None = None, cfg: RunConfig = DEFAULT) -> RayTrace:
    """Trace an external ray from potential g_start down toward g_end.

    The trace records points once the potential drops to g_start (the
    walk always begins in the far field).  Landing is declared once the
    potential is below ``cfg.ray_land_g`` and the trace tail is Cauchy
    within ``cfg.ray_land_tol``; the landing point is the Aitken limit of
    the last three points.  Newton failures return the partial trace with
    ``failure`` set rather than raising.
    """
    if plane not in ("dynamical", "parameter"):
        raise InvalidInput("plane must be 'dynamical' or 'parameter'")
    if plane == "dynamical" and c is None:
        raise InvalidInput("dynamical rays need the parameter c")
    if not (g_start > g_end >= 0.0):
        raise InvalidInput("need g_start > g_end >= 0")
    if g_start > G_FAR:
        raise InvalidInput(f"g_start must be <= log(1e6) = {G_FAR:.4f}")

    trace = RayTrace(plane=plane, c=c if plane == "dynamical" else None, angle=angle)
    steps = cfg.ray_steps_per_gen
    ratio = 0.5 ** (1.0 / steps)

    g = G_FAR
    z = cmath.exp(complex(g, angle.radians()))
    gens = 0
    g_floor = max(g_end, 1e-14)
    while gens < cfg.ray_max_gens * steps:
        gens += 1
        g_next = g * ratio
        record = g_next <= g_start * (1 + 1e-12)
        z_new = _solve_ray_point(plane, c, angle, g_next, z, cfg)
        if z_new is None:
            trace.failure = "newton_divergence"
            break
        if record:
            if g_next > 1e-10:  # below this the Green value cannot resolve
                check = (green_dynamical(c, z_new, cfg) if plane == "dynamical"
                         else green_parameter(z_new, cfg))
                if check.escaped and abs(check.g - g_next) > cfg.ray_branch_jump * g_next:
                    trace.failure = "branch_ambiguity"
                    return trace
            trace.points.append(z_new)
            trace.potentials.append(g_next)
        g, z = g_next, z_new
        if g < cfg.ray_land_g and len(trace.points) >= 3:
            if abs(trace.points[-1] - trace.points[-2]) < cfg.ray_land_tol:
                trace.landed = True
                trace.landing_point = _aitken(*trace.points[-3:])
                return trace
        if g <= g_floor:
            break
    if g_end == 0.0 and not trace.landed:
        # out of potential range: accept a cleanly converging geometric tail
        # (slow landing at a weakly repelling point) and extrapolate
        if len(trace.points) >= 6:
            deltas = [abs(trace.points[-k] - trace.points[-k - 1]) for k in (1, 2, 3, 4)]
            ratios = [deltas[i] / deltas[i + 1] for i in range(3) if deltas[i + 1] > 0]
            if (len(ratios) == 3 and max(ratios) < 0.985
                    and deltas[0] < 1e3 * cfg.ray_land_tol):
                trace.landed = True
                trace.failure = None
                trace.landing_point = _aitken(*trace.points[-3:])
                return trace
        trace.failure = trace.failure or "newton_divergence"
    return trace


def point_on_ray(plane: str, angle: Angle, g: float, c: complex | None = None,
                 cfg: RunConfig = DEFAULT, guess: complex | None = None) -> complex:
    """The single ray point at potential g (walking in from the far field)."""
    if guess is not None:
        z = _solve_ray_point(plane, c, angle, g, guess, cfg)
        if z is not None:
            return z
    t = trace_ray(plane, angle, g_start=min(G_FAR, max(g * 1.0001, g + 1e-9)),
                  g_end=g * 0.999, c=c, cfg=cfg)
    if t.failure or not t.points:
        raise InvalidInput(f"could not reach potential {g} on ray {angle}")
    z = _solve_ray_point(plane, c, angle, g, t.points[-1], cfg)
    if z is None:
        raise InvalidInput(f"Newton failed at potential {g} on ray {angle}")
    return z


def equipotential_loop(plane: str, g: float, n_samples: int,
                       c: complex | None = None, cfg: RunConfig = DEFAULT) -> np.ndarray:
    """Closed sampled loop of the equipotential {G = g} (first point repeated).

    Samples sit on the rays of angle k/n_samples at potential g, walked in
    from the far field with angular continuation.
    """
    if n_samples < 8:
        raise InvalidInput("need at least 8 samples")
    pts = np.empty(n_samples + 1, dtype=np.complex128)
    guess = None
    for k in range(n_samples):
        ang = Angle(k, n_samples)
        z = point_on_ray(plane, ang, g, c=c, cfg=cfg, guess=guess)
        pts[k] = z
        guess = z * cmath.exp(2j * math.pi / n_samples)
    pts[n_samples] = pts[0]
    return pts
