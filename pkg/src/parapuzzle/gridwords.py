"""Vectorized symbol words for grids of parameters in the 1/2-wake.

Parameter tiles need the coarse symbol word of the critical orbit at every
grid cell, each cell in its own dynamical plane.  This module reimplements
the scalar classifier of ``puzzle`` with numpy over a flat array of
parameters: per-cell rays at angles 1/3, 2/3 (landing at alpha) and
1/6, 5/6 (landing at the co-fixed point) traced on a fixed coarse
schedule, then crossing-parity sector tests with escalation near the two
landing points.  Cells whose classification becomes unreliable (boundary
bands, Newton failures, escapes) are flagged rather than guessed.

Everything here is restricted to p = 2 (the wake carrying the real
interval [-2, -3/4)); the scalar path in ``puzzle`` covers general p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, RunConfig
from .potential import G_FAR

SYM_C = 0
SYM_Z = 1
SYM_A = 2

_G_HI = math.log(40.0)
_FAR_RADIUS = 40.0

# angles traced per cell, in turns
_ANGLES = (1.0 / 3.0, 2.0 / 3.0, 1.0 / 6.0, 5.0 / 6.0)


def _ray_schedule(steps_per_gen: int, g_low: float) -> np.ndarray:
    ratio = 0.5 ** (1.0 / steps_per_gen)
    out = [_G_HI]
    g = _G_HI
    while g > g_low:
        g *= ratio
        out.append(g)
    return np.asarray(out)


@dataclass
class GridWords:
    """Result bundle: per-cell symbol matrix and validity flags."""

    symbols: np.ndarray   # int8 [n, length]; sentinel 99 after escape
    ok: np.ndarray        # bool [n]; False where any needed symbol is unreliable

    def prefix_equal(self, prefix: np.ndarray) -> np.ndarray:
        k = len(prefix)
        return self.ok & np.all(self.symbols[:, :k] == prefix[None, :], axis=1)

    def self_match(self, offset: int, length: int) -> np.ndarray:
        """word[offset + t] == word[t] for t < length (symbol indices are
        1-based here: column j holds the symbol of f^(j+1)(0))."""
        a = self.symbols[:, offset:offset + length]
        b = self.symbols[:, :length]
        return self.ok & np.all(a == b, axis=1)


class GridWordEngine:
    """Coarse-symbol word evaluation over a flat parameter array."""

    def __init__(self, params: np.ndarray, cfg: RunConfig = DEFAULT,
                 steps_per_gen: int = 3, g_low: float = 1e-4,
                 newton_iters: int = 6, arc_samples: int = 17):
        self.cfg = cfg
        self.c = np.ascontiguousarray(params, dtype=np.complex128)
        n = self.c.shape[0]
        self.n = n
        self._newton_iters = newton_iters
        self.alpha = (1 - np.sqrt(1 - 4 * self.c)) / 2
        self.cof = -self.alpha
        self.bad = np.zeros(n, dtype=bool)

        gs = _ray_schedule(steps_per_gen, g_low)
        rays = {}
        for theta in _ANGLES:
            rays[theta] = self._trace(theta, gs)
        self._rays = rays

        land_err = np.zeros(n)
        for theta, pts in rays.items():
            target = self.alpha if theta in (_ANGLES[0], _ANGLES[1]) else self.cof
            land_err = np.maximum(land_err, np.abs(pts[:, -1] - target))
        self.r_safe = np.maximum(cfg.sector_safe_radius, 4.0 * land_err + 1e-7)
        self.bad |= land_err > 0.05  # ray failed to get near its landing point

        # far arc samples shared by all cells (radius 40, Boettcher ~ id)
        t_a = np.linspace(1.0 / 3.0, 2.0 / 3.0, arc_samples)
        self._arc_a = _FAR_RADIUS * np.exp(2j * math.pi * t_a)
        t_z = np.linspace(1.0 / 6.0, -1.0 / 6.0, arc_samples)
        self._arc_z = _FAR_RADIUS * np.exp(2j * math.pi * t_z)

        self._poly_a = self._assemble_polygon(
            head=self.alpha,
            ray_out=rays[1.0 / 3.0][:, ::-1],   # landing end -> far
            arc=self._arc_a,
            ray_in=rays[2.0 / 3.0],             # far -> landing end
            tail=self.alpha)
        self._poly_z = self._assemble_polygon(
            head=self.cof,
            ray_out=rays[1.0 / 6.0][:, ::-1],
            arc=self._arc_z,
            ray_in=rays[5.0 / 6.0],
            tail=self.cof)

    # -- ray tracing ------------------------------------------------------

    def _trace(self, theta: float, gs: np.ndarray) -> np.ndarray:
        """Polyline [n, len(gs)] from the far field toward landing."""
        n = self.n
        c = self.c
        z = np.full(n, np.exp(_G_HI) * np.exp(2j * math.pi * theta), dtype=np.complex128)
        out = np.empty((n, len(gs)), dtype=np.complex128)
        for k, g in enumerate(gs):
            depth = max(0, math.ceil(math.log2(G_FAR / g) - 1e-12))
            frac = (theta * (2 ** depth)) % 1.0
            target = math.exp((2.0 ** depth) * g) * np.exp(2j * math.pi * frac)
            for it in range(self._newton_iters + 1):
                w = z.copy()
                dw = np.ones(n, dtype=np.complex128)
                for _ in range(depth):
                    dw = 2 * w * dw
                    w = w * w + c
                # Newton on log(f^depth(z) / target): nearly linear in log z,
                # so a couple of iterations close a whole potential substep
                ratio = w / target
                resid = np.abs(np.log(np.abs(ratio))) + np.abs(np.angle(ratio))
                if it == self._newton_iters:
                    break  # final pass only measures the residual
                h = np.log(np.abs(ratio)) + 1j * np.angle(ratio)
                dw = np.where(dw == 0, 1.0, dw)
                step = h * w / dw
                z = z - np.where(np.isfinite(step), step, 0.0)
            self.bad |= ~np.isfinite(resid) | (resid > 1e-8)
            z = np.where(np.isfinite(z), z, 0.0)
            out[:, k] = z
        return out

    @staticmethod
    def _assemble_polygon(head, ray_out, arc, ray_in, tail) -> np.ndarray:
        n = ray_out.shape[0]
        parts = [head[:, None], ray_out,
                 np.broadcast_to(arc, (n, len(arc))), ray_in, tail[:, None]]
        return np.concatenate(parts, axis=1)

    # -- sector tests -------------------------------------------------------

    def _inside(self, z: np.ndarray, poly: np.ndarray, active: np.ndarray,
                near: np.ndarray) -> np.ndarray:
        """Even-odd crossing test of z against per-cell polygons.

        Also accumulates ``near`` for points within the boundary band of
        any polygon edge (band width scales with edge length to absorb
        polyline sag).
        """
        x, y = z.real, z.imag
        inside = np.zeros(self.n, dtype=bool)
        tol = self.cfg.boundary_tol
        for j in range(poly.shape[1] - 1):
            ax, ay = poly[:, j].real, poly[:, j].imag
            bx, by = poly[:, j + 1].real, poly[:, j + 1].imag
            straddle = (ay <= y) != (by <= y)
            dy = np.where(by == ay, 1.0, by - ay)
            t = (y - ay) / dy
            xi = ax + t * (bx - ax)
            inside ^= active & straddle & (x < xi)
            # distance to the edge segment, only where plausible
            ex, ey = bx - ax, by - ay
            L2 = ex * ex + ey * ey
            L2s = np.where(L2 == 0, 1.0, L2)
            s = np.clip(((x - ax) * ex + (y - ay) * ey) / L2s, 0.0, 1.0)
            dx, dyy = x - (ax + s * ex), y - (ay + s * ey)
            d2 = dx * dx + dyy * dyy
            band = np.maximum(tol, 0.02 * np.sqrt(L2))
            near |= active & (d2 < band * band)
        return inside

    def symbols_of(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(symbols int8, unreliable bool) of one point per cell."""
        n = self.n
        sym = np.full(n, SYM_C, dtype=np.int8)
        unreliable = np.zeros(n, dtype=bool)
        z = z.copy()

        # points near the co-fixed point: map the question to alpha by f
        near_cof = np.abs(z - self.cof) < self.r_safe
        z = np.where(near_cof, z * z + self.c, z)

        # escalate near alpha: f^2 fixes each local sector and expands
        for _ in range(self.cfg.sector_escalate_cap):
            near_alpha = np.abs(z - self.alpha) < self.r_safe
            if not near_alpha.any():
                break
            zz = z * z + self.c
            z = np.where(near_alpha, zz * zz + self.c, z)
        else:
            pass
        still = np.abs(z - self.alpha) < self.r_safe
        unreliable |= still

        far = np.abs(z) > _FAR_RADIUS
        # far field: classify by bare angle
        t = (np.angle(z) / (2 * math.pi)) % 1.0
        far_a = far & (t > 1.0 / 3.0) & (t < 2.0 / 3.0)
        far_z = far & ((t > 5.0 / 6.0) | (t < 1.0 / 6.0))

        active = ~far & ~still
        near = np.zeros(n, dtype=bool)
        in_a = self._inside(z, self._poly_a, active, near)
        in_z = self._inside(z, self._poly_z, active, near)
        unreliable |= near

        sym[in_a | far_a] = SYM_A
        sym[in_z | far_z] = SYM_Z
        # translate back through f for the near-co-fixed lane:
        # image in the off-critical sector means the central side, anything
        # else means the co-fixed piece
        a_side = np.where(in_a | far_a, True, False)
        sym[near_cof] = np.where(a_side[near_cof], SYM_C, SYM_Z)
        return sym, unreliable

    def words(self, length: int) -> GridWords:
        """Symbol words of the critical orbit: column j = symbol of f^(j+1)(0)."""
        n = self.n
        out = np.full((n, length), 99, dtype=np.int8)
        ok = ~self.bad.copy()
        z = self.c.copy()  # f(0)
        esc2 = (_FAR_RADIUS * 1.05) ** 2
        alive = np.ones(n, dtype=bool)
        for j in range(length):
            mag2 = z.real * z.real + z.imag * z.imag
            escaped = mag2 > esc2
            alive &= ~escaped
            zs = np.where(alive, z, 0.0)
            sym, unreliable = self.symbols_of(zs)
            ok &= ~(unreliable & alive)
            out[alive, j] = sym[alive]
            z = z * z + self.c
            z = np.where(alive, z, 0.0)
        return GridWords(symbols=out, ok=ok)


def grid_words(params: np.ndarray, length: int, cfg: RunConfig = DEFAULT,
               chunk: int = 32768, **kwargs) -> GridWords:
    """Chunked driver: words for a flat complex parameter array."""
    params = np.ascontiguousarray(params, dtype=np.complex128).ravel()
    n = params.shape[0]
    symbols = np.empty((n, length), dtype=np.int8)
    ok = np.empty(n, dtype=bool)
    for start in range(0, n, chunk):
        sl = slice(start, min(start + chunk, n))
        eng = GridWordEngine(params[sl], cfg=cfg, **kwargs)
        gw = eng.words(length)
        symbols[sl] = gw.symbols
        ok[sl] = gw.ok
    return GridWords(symbols=symbols, ok=ok)
