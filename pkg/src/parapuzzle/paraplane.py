"""Parameter-plane constructions: wake boundaries, winding numbers, and
grid-extracted parameter tiles with their central subtiles.

A level-l parameter tile is the set of parameters whose critical-orbit
symbol word agrees with the base parameter's through the level-l return
(prefix length T_l + m_l), restricted to the 4-connected grid component
of the base parameter.  Tiles therefore nest by construction, and the
central subtile adds the self-matching condition that the level-l return
is central.  Itineraries are evaluated in each parameter's own dynamical
plane; no transfer machinery is involved.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from skimage import measure as _skmeasure

from . import dynamics, puzzle
from .config import DEFAULT, RunConfig
from .errors import (
    EmptyTile,
    InvalidInput,
    NoConvergence,
    NotFound,
    RayLandingFailure,
    SeparationFailure,
    Undecidable,
    UnderResolved,
    WindowClipped,
)
from .gridwords import grid_words
from .potential import Angle, point_on_ray, trace_ray

# ----------------------------------------------------------------------
# winding numbers
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class WindingResult:
    w: int
    min_separation: float
    samples: int
    total_increment: float  # in turns


def winding_number(loop: np.ndarray, phi: np.ndarray, psi: np.ndarray) -> WindingResult:
    """Integer winding of phi about psi along a closed sampled loop.

    The loop must repeat its first sample at the end; adjacent argument
    jumps of a quarter turn or more raise UnderResolved (refine the
    sampling), and near-coincident sections raise SeparationFailure.
    """
    loop = np.asarray(loop, dtype=np.complex128)
    phi = np.asarray(phi, dtype=np.complex128)
    psi = np.asarray(psi, dtype=np.complex128)
    if not (len(loop) == len(phi) == len(psi)):
        raise InvalidInput("loop, phi, psi must have equal length")
    if len(loop) < 8:
        raise InvalidInput("need at least 8 samples")
    if abs(loop[0] - loop[-1]) > 1e-12:
        raise InvalidInput("loop must be closed (first sample repeated at the end)")
    diff = phi - psi
    sep = float(np.min(np.abs(diff)))
    if sep < 1e-12:
        raise SeparationFailure(f"sections come within {sep:.2e} of each other")
    args = np.angle(diff)
    jumps = np.diff(args)
    jumps = (jumps + math.pi) % (2 * math.pi) - math.pi
    worst = float(np.max(np.abs(jumps))) if len(jumps) else 0.0
    if worst >= math.pi / 2:
        raise UnderResolved(f"argument jump {worst:.3f} rad >= pi/2; refine the loop")
    total = float(np.sum(jumps)) / (2 * math.pi)
    w = round(total)
    if abs(total - w) > 0.01:
        raise UnderResolved(f"total increment {total:.4f} turns is not near an integer")
    return WindingResult(w=int(w), min_separation=sep, samples=len(loop) - 1,
                         total_increment=total)


# ----------------------------------------------------------------------
# wakes
# ----------------------------------------------------------------------

@dataclass
class Wake:
    kind: str                       # 'parabolic' | 'misiurewicz'
    p: int
    q: int
    sigma: tuple[int, ...]
    index: int
    landing_param: complex
    boundary_angles: tuple[Angle, Angle]
    truncation_level: float
    rays: tuple[object, object]     # parameter RayTraces
    equip_arc: np.ndarray           # closing arc at the truncation level


def cardioid_root(p: int, q: int) -> complex:
    """Bifurcation parameter on the main cardioid at internal angle q/p."""
    u = cmath.exp(2j * math.pi * q / p)
    return u / 2 - u * u / 4


def _log_tail_limit(trace) -> complex:
    """Tail limit for logarithmically landing rays: fit z = b + C1 u + C2 u^2
    with u = 1/log(1/g) over the deep tail (parabolic cusp asymptotics)."""
    pts = np.asarray(trace.points[-80:])
    gs = np.asarray(trace.potentials[-80:])
    u = 1.0 / np.log(1.0 / gs)
    design = np.vander(u, 4, increasing=True)
    coef, *_ = np.linalg.lstsq(design, pts, rcond=None)
    return complex(coef[0])


def _trace_param_pair(angles: tuple[Angle, Angle], target: complex,
                      cfg: RunConfig, parabolic: bool = False) -> tuple:
    """Trace the two parameter rays and validate their landing.

    Misiurewicz landing points are reached with power-law speed, so the
    traced landing must agree with the target to 1e-5.  At parabolic root
    points the approach through the cusp channel is logarithmic in the
    potential (distance ~ C / log(1/g)), which double precision cannot
    push below ~1e-3; there the traced tail is extrapolated against the
    1/log model and only a 2e-3 agreement is demanded.
    """
    traces = []
    tol = 2e-2 if parabolic else 1e-5
    for ang in angles:
        if parabolic:
            tr = trace_ray("parameter", ang, g_start=math.log(4.0), g_end=3e-10, cfg=cfg)
            if tr.failure and len(tr.points) < 100:
                raise RayLandingFailure(f"parameter ray {ang} trace failed ({tr.failure})")
            est = _log_tail_limit(tr)
            tr.landing_point = est
            tr.landed = True
        else:
            tr = trace_ray("parameter", ang, g_start=math.log(4.0), g_end=0.0, cfg=cfg)
            if not tr.landed:
                raise RayLandingFailure(f"parameter ray {ang} failed to land ({tr.failure})")
        if abs(tr.landing_point - target) > tol:
            raise RayLandingFailure(
                f"parameter ray {ang} lands {abs(tr.landing_point - target):.2e} "
                f"from the expected point (tol {tol:g})")
        traces.append(tr)
    return tuple(traces)


def _equip_arc(angles: tuple[Angle, Angle], level: float, n: int = 33,
               cfg: RunConfig = DEFAULT) -> np.ndarray:
    g = math.log(level)
    a, b = angles[0].turns(), angles[1].turns()
    span = (b - a) % 1.0
    pts = []
    guess = None
    for t in np.linspace(0.0, 1.0, n):
        th = (a + span * t) % 1.0
        frac = th.as_integer_ratio()
        ang = Angle(frac[0], frac[1])
        z = point_on_ray("parameter", ang, g, cfg=cfg, guess=guess)
        guess = z
        pts.append(z)
    return np.asarray(pts, dtype=np.complex128)


def wake_boundary(p: int, q: int, cfg: RunConfig = DEFAULT) -> Wake:
    """The q/p parabolic wake: characteristic angles and their landing rays."""
    cycle = puzzle.alpha_ray_cycle(p, q)
    pair = puzzle.characteristic_pair(cycle)
    target = cardioid_root(p, q)
    traces = _trace_param_pair(pair, target, cfg, parabolic=True)
    arc = _equip_arc(pair, cfg.equip_level, cfg=cfg)
    return Wake(kind="parabolic", p=p, q=q, sigma=(), index=0,
                landing_param=target,  # closed form; traces approach it log-slowly
                boundary_angles=pair, truncation_level=cfg.equip_level,
                rays=traces, equip_arc=arc)


def truncation_level(p: int, n: int, cfg: RunConfig = DEFAULT) -> float:
    """Equipotential level truncating a depth-n wake (two readings of the
    same convention; 'power' is the default, both equal 4 when p*n = 2)."""
    d = p * n - 1
    if cfg.trunc_convention == "literal":
        return cfg.equip_level / d
    return cfg.equip_level ** (1.0 / d)


_MISIUREWICZ_SEEDS: dict[tuple[int, int, int], tuple[complex, ...]] = {
    (2, 1, 1): (-1.5,),
    (2, 1, 2): (-1.85, -1.65, -1.98, -1.3 + 0.4j, -1.3 - 0.4j),
    (3, 1, 1): (-0.15 + 0.8j, -0.25 + 0.85j, 0.0 + 0.8j),
    (3, 2, 1): (-0.15 - 0.8j, -0.25 - 0.85j, 0.0 - 0.8j),
}


def _misiurewicz_solutions(p: int, q: int, n: int, seed: complex | None,
                           cfg: RunConfig) -> list[complex]:
    seeds = list(_MISIUREWICZ_SEEDS.get((p, q, n), ()))
    if seed is not None:
        seeds.insert(0, complex(seed))
    if not seeds:
        raise InvalidInput(
            f"no built-in seeds for (p={p}, q={q}, n={n}); pass seed= explicitly")
    out: list[complex] = []
    for s in seeds:
        try:
            mu = dynamics.solve_misiurewicz(p, q, n, s, cfg)
        except Exception:
            continue
        if all(abs(mu - seen) > 1e-9 for seen in out):
            out.append(mu)
    if not out:
        raise NoConvergence(f"no Misiurewicz solution found for (p={p}, q={q}, n={n})")
    return out


def _classify_misiurewicz(mu: complex, p: int, q: int, n: int,
                          cfg: RunConfig) -> tuple[tuple[int, ...], int] | None:
    """(sigma, i) of a solution: locate f^p(0) in mu's own tiling."""
    tiling = puzzle.build_initial_tiling(mu, p, q, dyadic_depth=max(2, n), cfg=cfg)
    v = complex(mu)
    for _ in range(p - 1):
        v = v * v + mu
    # v = f^p(0); walk the central tower
    cls = puzzle._tower_class(tiling, v, n)
    if cls is None:
        return None
    k, s = cls
    if k != n - 1 or not (1 <= s < p):
        return None
    code = puzzle._dyadic_code(tiling, v, k)
    if code is None:
        return None
    return code, s


def _pullback_angles_along_orbit(tiling: puzzle.InitialTiling, mu: complex,
                                 zi: int, steps: int,
                                 cfg: RunConfig) -> tuple[Angle, Angle]:
    """Pull the co-angle pair bounding Z_zi back along the critical value
    orbit: at each step the halving branch is chosen by which candidate
    ray passes near the known preimage point."""
    pair = (tiling.co_sorted[zi - 1], tiling.co_sorted[zi])
    orbit = [complex(mu)]
    for _ in range(steps):
        z = orbit[-1]
        orbit.append(z * z + mu)
    g_test = 5e-4
    for j in range(steps - 1, -1, -1):
        w = orbit[j]
        new_pair = []
        for ang in pair:
            best = None
            for cand in ang.halves():
                try:
                    z = point_on_ray("dynamical", cand, g_test, c=mu, cfg=cfg)
                except InvalidInput:
                    continue
                d = abs(z - w)
                if best is None or d < best[0]:
                    best = (d, cand)
            if best is None or best[0] > 0.45 * abs(w) + 0.2:
                raise RayLandingFailure(
                    f"could not select the halving branch at orbit step {j}")
            new_pair.append(best[1])
        pair = tuple(new_pair)
    return pair  # angles landing at the critical value


def misiurewicz_wake(p: int, q: int, sigma: tuple[int, ...] = (), index: int = 1,
                     seed: complex | None = None, cfg: RunConfig = DEFAULT) -> Wake:
    """Wake attached to the parameter where f^(p*n)(0) hits the co-fixed
    point, n = len(sigma) + 1, cut by the rays landing at that parameter."""
    if not (1 <= index <= p - 1):
        raise InvalidInput(f"index must be in 1..{p - 1}")
    n = len(sigma) + 1
    sigma = tuple(int(b) for b in sigma)
    if any(b not in (0, 1) for b in sigma):
        raise InvalidInput("sigma must be a tuple of 0/1 digits")
    solutions = _misiurewicz_solutions(p, q, n, seed, cfg)
    chosen = None
    for mu in solutions:
        cls = _classify_misiurewicz(mu, p, q, n, cfg)
        if cls is None:
            continue
        code, s = cls
        if s == index and (n == 1 or code == sigma):
            chosen = mu
            break
    if chosen is None:
        if seed is not None and solutions:
            chosen = solutions[0]  # trust an explicit seed even if labels differ
        else:
            raise NotFound(
                f"no solution with sigma={sigma}, i={index} among {len(solutions)} found; "
                "pass a closer seed")
    tiling = puzzle.build_initial_tiling(chosen, p, q, dyadic_depth=max(2, n), cfg=cfg)
    angles = _pullback_angles_along_orbit(tiling, chosen, index, p * n - 1, cfg)
    level = truncation_level(p, n, cfg)
    traces = _trace_param_pair(tuple(sorted(angles)), chosen, cfg)
    arc = _equip_arc(tuple(sorted(angles)), level, cfg=cfg)
    return Wake(kind="misiurewicz", p=p, q=q, sigma=sigma, index=index,
                landing_param=chosen, boundary_angles=tuple(sorted(angles)),
                truncation_level=level, rays=traces, equip_arc=arc)


# ----------------------------------------------------------------------
# parameter tiles
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Window:
    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float

    def __post_init__(self):
        if not (self.re_lo < self.re_hi and self.im_lo < self.im_hi):
            raise InvalidInput("degenerate window")

    def contains(self, z: complex) -> bool:
        return (self.re_lo <= z.real <= self.re_hi
                and self.im_lo <= z.imag <= self.im_hi)

    @classmethod
    def around(cls, z: complex, half_width: float, half_height: float | None = None):
        hh = half_width if half_height is None else half_height
        return cls(z.real - half_width, z.real + half_width, z.imag - hh, z.imag + hh)

    def padded(self, factor: float) -> "Window":
        cw = (self.re_hi - self.re_lo) * factor / 2
        ch = (self.im_hi - self.im_lo) * factor / 2
        cx, cy = (self.re_lo + self.re_hi) / 2, (self.im_lo + self.im_hi) / 2
        return Window(cx - cw, cx + cw, cy - ch, cy + ch)


@dataclass
class ParamTile:
    level: int
    base_param: complex
    key: tuple[int, ...]
    window: Window
    resolution: int
    mask: np.ndarray                 # bool [res, res], 4-connected component
    unknown: np.ndarray              # bool [res, res]
    outer_contour: np.ndarray        # closed polyline, complex
    inner_contours: list[np.ndarray] = field(default_factory=list)
    center: complex | None = None
    unknown_fraction: float = 0.0
    central_only: bool = False

    @property
    def cell_size(self) -> tuple[float, float]:
        w = self.window
        return ((w.re_hi - w.re_lo) / self.resolution,
                (w.im_hi - w.im_lo) / self.resolution)

    def real_slice(self) -> tuple[float, float] | None:
        """Real-axis extent of the mask component around the base parameter."""
        w = self.window
        if not (w.im_lo < 0 < w.im_hi) or abs(self.base_param.imag) > 1e-12:
            if abs(self.base_param.imag) > 1e-12:
                return None
        dy = (w.im_hi - w.im_lo) / self.resolution
        row = int((0.0 - w.im_lo) / dy)
        row = min(max(row, 0), self.resolution - 1)
        dx = (w.re_hi - w.re_lo) / self.resolution
        col0 = int((self.base_param.real - w.re_lo) / dx)
        line = self.mask[row]
        if not line[col0]:
            return None
        lo = col0
        while lo - 1 >= 0 and line[lo - 1]:
            lo -= 1
        hi = col0
        while hi + 1 < self.resolution and line[hi + 1]:
            hi += 1
        return (w.re_lo + (lo + 0.5) * dx, w.re_lo + (hi + 0.5) * dx)


@dataclass(frozen=True)
class TileKey:
    level: int
    return_time: int          # m_l
    piece_word_len: int       # T_l
    prefix: tuple[int, ...]   # symbols of f^j(0), j = 1..T_l + m_l


def tile_key(lam0: complex, level: int, cfg: RunConfig = DEFAULT,
             tiling: puzzle.InitialTiling | None = None) -> TileKey:
    """Symbol-prefix key of the level-l tile containing lam0 (p = 2 wake)."""
    if tiling is None:
        tiling = puzzle.build_initial_tiling(lam0, 2, 1, cfg=cfg)
    levels, verdict = puzzle.complex_principal_nest(tiling, max_level=level + 1, cfg=cfg)
    if len(levels) < level + 1:
        raise Undecidable(
            f"nest of the base parameter reaches only {len(levels)} levels "
            f"({verdict}); cannot key level {level}")
    t_len = 1
    for lv in levels[:level]:
        t_len += lv.cascade_len * lv.return_time
    m = levels[level].return_time
    # the level-l return event is the word match of length T_l at offset
    # m_l, so the tile is pinned by symbols of f^1(0) .. f^(m_l+T_l-1)(0)
    need = t_len + m - 1
    word = tiling.symbol_word(complex(lam0), need)
    if len(word) < need or any(s < 0 for s in word[:need]):
        raise EmptyTile("base parameter word is undecidable at the needed depth")
    return TileKey(level=level, return_time=m, piece_word_len=t_len,
                   prefix=tuple(word[:need]))


def _contours_of_mask(mask: np.ndarray, window: Window) -> list[np.ndarray]:
    res_y, res_x = mask.shape
    dx = (window.re_hi - window.re_lo) / res_x
    dy = (window.im_hi - window.im_lo) / res_y
    padded = np.zeros((res_y + 2, res_x + 2), dtype=float)
    padded[1:-1, 1:-1] = mask.astype(float)
    found = _skmeasure.find_contours(padded, 0.5)
    out = []
    for arr in found:
        rows = arr[:, 0] - 1
        cols = arr[:, 1] - 1
        zs = (window.re_lo + (cols + 0.5) * dx) + 1j * (window.im_lo + (rows + 0.5) * dy)
        out.append(zs.astype(np.complex128))
    out.sort(key=lambda a: -len(a))
    return out


def _param_potential_grid(cells: np.ndarray, cap: int = 512) -> np.ndarray:
    """Vectorized parameter-plane Green values (0 where no escape by cap)."""
    c = cells.ravel()
    z = c.copy()
    g = np.zeros(c.shape, dtype=float)
    alive = np.ones(c.shape, dtype=bool)
    for n in range(cap):
        mag2 = z.real * z.real + z.imag * z.imag
        esc = alive & (mag2 > 1e12)
        if esc.any():
            corr = np.abs(1 + c[esc] / (z[esc] * z[esc]))
            g[esc] = (0.5 * np.log(mag2[esc]) + 0.5 * np.log(corr)) * 0.5 ** n
            alive &= ~esc
        if not alive.any():
            break
        z = np.where(alive, z * z + c, 0.0)
    return g.reshape(cells.shape)


def extract_param_tile(lam0: complex, level: int, window: Window, resolution: int,
                       central_only: bool = False, cfg: RunConfig = DEFAULT,
                       key: TileKey | None = None,
                       truncation: float | None = None) -> ParamTile:
    """Grid extraction of the level-l tile (or central subtile) around lam0.

    Evaluates the symbol word at each cell center in that cell's own
    dynamical plane, keeps cells matching the base key, and takes the
    4-connected component of the base cell.  Cells with unreliable symbols
    are excluded and reported; more than ``cfg.unknown_cell_limit`` of them
    fails the extraction.  Deep tiles are bounded by their own symbolic
    conditions; a shallow tile that would run out to the equipotential lid
    can additionally be cut at level ``truncation`` (exp(G) units).
    """
    if not (8 <= resolution <= 4096):
        raise InvalidInput("resolution must be in 8..4096")
    if not window.contains(lam0):
        raise InvalidInput("window must contain the base parameter")
    if key is None:
        key = tile_key(lam0, level, cfg=cfg)
    m, t_len = key.return_time, key.piece_word_len
    need = len(key.prefix) + (m if central_only else 0)

    dx = (window.re_hi - window.re_lo) / resolution
    dy = (window.im_hi - window.im_lo) / resolution
    xs = window.re_lo + (np.arange(resolution) + 0.5) * dx
    ys = window.im_lo + (np.arange(resolution) + 0.5) * dy
    cells = xs[None, :] + 1j * ys[:, None]

    gw = grid_words(cells.ravel(), need, cfg=cfg)
    eq = gw.prefix_equal(np.asarray(key.prefix, dtype=np.int8))
    if central_only:
        eq &= gw.self_match(m, t_len + m - 1)
    if truncation is not None:
        pots = _param_potential_grid(cells)
        eq &= (pots < math.log(truncation)).ravel()
    grid_eq = eq.reshape(resolution, resolution)
    unknown = (~gw.ok).reshape(resolution, resolution)
    unknown_fraction = float(unknown.mean())
    if unknown_fraction > cfg.unknown_cell_limit:
        raise Undecidable(
            f"{unknown_fraction:.1%} of cells unclassifiable "
            f"(limit {cfg.unknown_cell_limit:.0%}); refine the schedule or window")

    col0 = min(max(int((lam0.real - window.re_lo) / dx), 0), resolution - 1)
    row0 = min(max(int((lam0.imag - window.im_lo) / dy), 0), resolution - 1)
    if unknown[row0, col0] or not grid_eq[row0, col0]:
        # the base parameter sits in a matching tile but its cell center can
        # fall just outside it; seed from the nearest matching cell instead
        found = None
        for radius in (1, 2, 3, 5, 8, 13):
            rows = slice(max(row0 - radius, 0), min(row0 + radius + 1, resolution))
            cols = slice(max(col0 - radius, 0), min(col0 + radius + 1, resolution))
            sub = grid_eq[rows, cols]
            if sub.any():
                rr, cc = np.nonzero(sub)
                k = np.argmin((rr + rows.start - row0) ** 2 + (cc + cols.start - col0) ** 2)
                found = (rr[k] + rows.start, cc[k] + cols.start)
                break
        if found is None:
            raise EmptyTile(
                "no cell near the base parameter matches its key "
                "(resolution too coarse for this level?)")
        row0, col0 = found

    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
    labels, _ = ndimage.label(grid_eq, structure=structure)
    comp = labels == labels[row0, col0]
    if comp[0, :].any() or comp[-1, :].any() or comp[:, 0].any() or comp[:, -1].any():
        raise WindowClipped("tile component touches the window edge; enlarge the window")

    contours = _contours_of_mask(comp, window)
    if not contours:
        raise EmptyTile("no contour extracted")
    outer, inner = contours[0], contours[1:]

    center = None
    try:
        cand = dynamics.solve_center(m, _mask_centroid(comp, window), cfg)
        crow = int((cand.imag - window.im_lo) / dy)
        ccol = int((cand.real - window.re_lo) / dx)
        if 0 <= crow < resolution and 0 <= ccol < resolution and comp[crow, ccol]:
            center = cand
    except Exception:
        center = None

    return ParamTile(level=level, base_param=complex(lam0), key=key.prefix,
                     window=window, resolution=resolution, mask=comp,
                     unknown=unknown, outer_contour=outer, inner_contours=inner,
                     center=center, unknown_fraction=unknown_fraction,
                     central_only=central_only)


def _mask_centroid(mask: np.ndarray, window: Window) -> complex:
    rows, cols = np.nonzero(mask)
    res_y, res_x = mask.shape
    dx = (window.re_hi - window.re_lo) / res_x
    dy = (window.im_hi - window.im_lo) / res_y
    return complex(window.re_lo + (cols.mean() + 0.5) * dx,
                   window.im_lo + (rows.mean() + 0.5) * dy)


def _bbox_window(tile: ParamTile, pad: float, symmetric: bool = True) -> Window:
    """Padded bounding box of the mask, always containing the base
    parameter (coarse components can miss its exact position)."""
    rows, cols = np.nonzero(tile.mask)
    dx, dy = tile.cell_size
    w = tile.window
    z0 = tile.base_param
    re_lo = min(w.re_lo + cols.min() * dx, z0.real - 2 * dx)
    re_hi = max(w.re_lo + (cols.max() + 1) * dx, z0.real + 2 * dx)
    im_lo = min(w.im_lo + rows.min() * dy, z0.imag - 2 * dy)
    im_hi = max(w.im_lo + (rows.max() + 1) * dy, z0.imag + 2 * dy)
    if symmetric and abs(z0.imag) < 1e-12:
        span = max(abs(im_lo), abs(im_hi), (im_hi - im_lo) / 2)
        im_lo, im_hi = -span, span
    return Window(re_lo, re_hi, im_lo, im_hi).padded(pad)


def extract_tile_pair(lam0: complex, level: int, window: Window, resolution: int,
                      cfg: RunConfig = DEFAULT) -> tuple[ParamTile, ParamTile]:
    """(tile, central subtile) at one level from a single word grid."""
    key = tile_key(lam0, level, cfg=cfg)
    tile = extract_param_tile(lam0, level, window, resolution, cfg=cfg, key=key)
    sub = extract_param_tile(lam0, level, window, resolution, cfg=cfg, key=key,
                             central_only=True)
    return tile, sub


def focused_tiles(lam0: complex, max_level: int, resolution: int,
                  cfg: RunConfig = DEFAULT, coarse_resolution: int = 160,
                  pad: float = 2.6, initial_window: Window | None = None,
                  with_central: bool = True
                  ) -> dict[int, dict[str, ParamTile]]:
    """Tiles for levels 1..max_level in per-level zoomed windows.

    Parameter tiles shrink by more than an order of magnitude per level,
    so each level is located first at coarse resolution inside the
    previous level's window, then re-extracted at full resolution in a
    padded bounding-box window of its own.
    """
    if initial_window is None:
        initial_window = Window.around(lam0, 0.28, 0.24)
    out: dict[int, dict[str, ParamTile]] = {}
    window = initial_window
    for level in range(1, max_level + 1):
        key = tile_key(lam0, level, cfg=cfg)
        coarse = extract_param_tile(lam0, level, window, coarse_resolution,
                                    cfg=cfg, key=key)
        tight = _bbox_window(coarse, pad)
        entry: dict[str, ParamTile] = {}
        entry["tile"] = extract_param_tile(lam0, level, tight, resolution,
                                           cfg=cfg, key=key)
        if with_central:
            entry["central"] = extract_param_tile(lam0, level, tight, resolution,
                                                  cfg=cfg, key=key, central_only=True)
        out[level] = entry
        window = _bbox_window(entry["tile"], 1.6)
    return out


def real_itinerary_change(lam0: float, key: TileKey, direction: int,
                          bracket: float = 0.5, tol: float = 1e-12) -> float:
    """1D oracle: bisect along the real axis for the edge of the region
    where the symbol word still matches the key prefix (independent of the
    grid path; used to cross-check tile slices)."""
    from .realnest import REAL_DOMAIN

    def matches(c: float) -> bool:
        if not (REAL_DOMAIN[0] < c < REAL_DOMAIN[1]):
            return False
        til = puzzle.build_initial_tiling(complex(c), 2, 1)
        word = til.symbol_word(complex(c), len(key.prefix))
        return (len(word) >= len(key.prefix)
                and tuple(word[:len(key.prefix)]) == key.prefix)

    if not matches(lam0):
        raise InvalidInput("base parameter does not match its own key")
    inside = lam0
    outside = lam0 + direction * bracket
    while matches(outside):
        outside += direction * bracket
        if abs(outside - lam0) > 4:
            raise NotFound("no itinerary change within the bracket")
    while abs(outside - inside) > tol:
        mid = 0.5 * (inside + outside)
        if matches(mid):
            inside = mid
        else:
            outside = mid
    return 0.5 * (inside + outside)
