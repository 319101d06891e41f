"""Conformal modulus of annuli between Jordan curves, and the moduli of
nests of parameter tiles.

Convention: mod of the round annulus {r < |z| < R} is log(R/r), so the
grid estimate is 2*pi / (Dirichlet energy) of the harmonic potential that
is 0 on the inner curve and 1 on the outer one.  The discretization is a
resistor network on cell centers: unit conductances between neighbouring
interior cells, and shortened conductances 1/t for edges cut by a
boundary curve at fraction t (which restores near-second-order accuracy
of the energy on smooth curves).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import cg as _cg
from skimage import measure as _skmeasure

try:
    import pyamg
    _HAVE_PYAMG = True
except Exception:  # pragma: no cover
    _HAVE_PYAMG = False

from .config import DEFAULT, RunConfig
from .errors import CurvesIntersect, InvalidInput, TooThin

# ----------------------------------------------------------------------


@dataclass(frozen=True)
class AnnulusSpec:
    outer: np.ndarray    # closed polyline (complex), first point repeated
    inner: np.ndarray
    grid_resolution: int = 512


@dataclass(frozen=True)
class ModulusEstimate:
    mod: float
    energy: float
    resolution_pair: tuple[int, int]
    richardson_error: float


def _close(poly: np.ndarray) -> np.ndarray:
    poly = np.asarray(poly, dtype=np.complex128)
    if abs(poly[0] - poly[-1]) > 1e-12:
        poly = np.concatenate([poly, poly[:1]])
    return poly


def _points_in_poly(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    pts = np.column_stack([points.real, points.imag])
    verts = np.column_stack([poly.real, poly.imag])
    return _skmeasure.points_in_poly(pts, verts)


def _grid_inside(xs: np.ndarray, ys: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd membership of a full grid row-by-row via scanline crossings."""
    a, b = poly[:-1], poly[1:]
    ay, by = a.imag, b.imag
    out = np.zeros((len(ys), len(xs)), dtype=bool)
    for i, y in enumerate(ys):
        straddle = (ay <= y) != (by <= y)
        if not straddle.any():
            continue
        aa, bb = a[straddle], b[straddle]
        t = (y - aa.imag) / (bb.imag - aa.imag)
        xcross = np.sort(aa.real + t * (bb.real - aa.real))
        counts = np.searchsorted(xcross, xs, side="left")
        out[i] = (len(xcross) - counts) % 2 == 1
    return out


def _segments_intersect(p: np.ndarray, q: np.ndarray) -> bool:
    """Any proper intersection between two closed polylines (bbox-pruned)."""
    a0, a1 = p[:-1], p[1:]
    b0, b1 = q[:-1], q[1:]
    ax_lo = np.minimum(a0.real, a1.real)[:, None]
    ax_hi = np.maximum(a0.real, a1.real)[:, None]
    ay_lo = np.minimum(a0.imag, a1.imag)[:, None]
    ay_hi = np.maximum(a0.imag, a1.imag)[:, None]
    bx_lo = np.minimum(b0.real, b1.real)[None, :]
    bx_hi = np.maximum(b0.real, b1.real)[None, :]
    by_lo = np.minimum(b0.imag, b1.imag)[None, :]
    by_hi = np.maximum(b0.imag, b1.imag)[None, :]
    cand = (ax_lo <= bx_hi) & (bx_lo <= ax_hi) & (ay_lo <= by_hi) & (by_lo <= ay_hi)
    ii, jj = np.nonzero(cand)
    if len(ii) == 0:
        return False
    def cross(o, a, b):
        return ((a.real - o.real) * (b.imag - o.imag)
                - (a.imag - o.imag) * (b.real - o.real))
    o, e = a0[ii], a1[ii]
    u, v = b0[jj], b1[jj]
    d1 = cross(o, e, u)
    d2 = cross(o, e, v)
    d3 = cross(u, v, o)
    d4 = cross(u, v, e)
    hit = ((d1 > 0) != (d2 > 0)) & ((d3 > 0) != (d4 > 0))
    return bool(hit.any())


def _crossing_fraction(starts: np.ndarray, ends: np.ndarray,
                       poly: np.ndarray) -> np.ndarray:
    """Fraction t in (0, 1] along each segment where the polygon is first
    crossed (1.0 where no crossing is found)."""
    a0, a1 = poly[:-1], poly[1:]
    out = np.ones(len(starts))
    for k in range(len(starts)):
        s, e = starts[k], ends[k]
        d = e - s
        seg = a1 - a0
        denom = d.real * seg.imag - d.imag * seg.real
        ok = np.abs(denom) > 1e-30
        rel = a0 - s
        t = (rel.real * seg.imag - rel.imag * seg.real) / np.where(ok, denom, 1.0)
        u = (rel.real * d.imag - rel.imag * d.real) / np.where(ok, denom, 1.0)
        valid = ok & (t > 1e-12) & (t <= 1.0) & (u >= 0.0) & (u <= 1.0)
        if valid.any():
            out[k] = float(t[valid].min())
    return out


def annulus_modulus(spec: AnnulusSpec, cfg: RunConfig = DEFAULT) -> ModulusEstimate:
    """Grid-conductance modulus with a Richardson error field from a
    half-resolution solve."""
    outer = _close(spec.outer)
    inner = _close(spec.inner)
    if spec.grid_resolution < 64:
        raise InvalidInput("resolution must be >= 64")
    if not _points_in_poly(inner, outer).all():
        raise CurvesIntersect("inner curve is not strictly inside the outer curve")
    if _points_in_poly(outer[:-1], inner).any():
        raise CurvesIntersect("outer curve dips inside the inner curve")
    if _segments_intersect(outer, inner):
        raise CurvesIntersect("curves intersect")

    coarse = _solve(outer, inner, spec.grid_resolution // 2, cfg)
    fine = _solve(outer, inner, spec.grid_resolution, cfg)
    return ModulusEstimate(mod=fine[0], energy=fine[1],
                           resolution_pair=(spec.grid_resolution // 2,
                                            spec.grid_resolution),
                           richardson_error=abs(fine[0] - coarse[0]))


def _solve(outer: np.ndarray, inner: np.ndarray, n: int, cfg: RunConfig
           ) -> tuple[float, float]:
    xs_lo, xs_hi = outer.real.min(), outer.real.max()
    ys_lo, ys_hi = outer.imag.min(), outer.imag.max()
    span = max(xs_hi - xs_lo, ys_hi - ys_lo)
    h = span / (n - 4)
    x0 = (xs_lo + xs_hi) / 2 - (n / 2) * h
    y0 = (ys_lo + ys_hi) / 2 - (n / 2) * h
    xs = x0 + (np.arange(n) + 0.5) * h
    ys = y0 + (np.arange(n) + 0.5) * h
    centers = (xs[None, :] + 1j * ys[:, None])

    in_outer = _grid_inside(xs, ys, outer)
    in_inner = _grid_inside(xs, ys, inner)
    region = in_outer & ~in_inner                   # conductor cells
    inner_side = in_inner

    # minimum thickness guard: a 3-cell erosion must keep the two
    # boundaries separated, approximated by the vertex-distance test
    gap = _min_gap(outer, inner)
    if gap < 3 * h:
        raise TooThin(f"annulus gap {gap:.3g} < 3 grid cells ({3 * h:.3g})")

    idx = -np.ones((n, n), dtype=np.int64)
    nodes = np.nonzero(region)
    nnode = len(nodes[0])
    if nnode == 0:
        raise TooThin("no conductor cells")
    idx[nodes] = np.arange(nnode)

    rows_list, cols_list = [], []
    diag = np.zeros(nnode)
    rhs = np.zeros(nnode)

    cut_starts, cut_ends, cut_node, cut_val, cut_poly = [], [], [], [], []
    for drow, dcol in ((0, 1), (1, 0)):
        r0 = slice(0, n - drow)
        c0 = slice(0, n - dcol)
        r1 = slice(drow, n)
        c1 = slice(dcol, n)
        a_in = region[r0, c0]
        b_in = region[r1, c1]
        both = a_in & b_in
        ai = idx[r0, c0][both]
        bi = idx[r1, c1][both]
        rows_list.extend([ai, bi])
        cols_list.extend([bi, ai])
        diag += np.bincount(ai, minlength=nnode) + np.bincount(bi, minlength=nnode)
        # cut edges: one endpoint in the annulus, the other beyond a curve
        for a_is_node in (True, False):
            na = a_in & ~b_in if a_is_node else b_in & ~a_in
            if not na.any():
                continue
            rr, cc = np.nonzero(na)
            if a_is_node:
                node_rc = (rr, cc)
                out_rc = (rr + drow, cc + dcol)
            else:
                node_rc = (rr + drow, cc + dcol)
                out_rc = (rr, cc)
            node_ids = idx[node_rc]
            starts = centers[node_rc]
            ends = centers[out_rc]
            into_inner = inner_side[out_rc]
            cut_starts.append(starts)
            cut_ends.append(ends)
            cut_node.append(node_ids)
            cut_val.append(np.where(into_inner, 0.0, 1.0))
            cut_poly.append(into_inner)

    boundary_const = 0.0
    if cut_starts:
        starts = np.concatenate(cut_starts)
        ends = np.concatenate(cut_ends)
        node_ids = np.concatenate(cut_node)
        bvals = np.concatenate(cut_val)
        inn = np.concatenate(cut_poly)
        t = np.ones(len(starts))
        if inn.any():
            t[inn] = _crossing_fraction(starts[inn], ends[inn], inner)
        if (~inn).any():
            t[~inn] = _crossing_fraction(starts[~inn], ends[~inn], outer)
        t = np.clip(t, 0.05, 1.0)
        g = 1.0 / t
        np.add.at(diag, node_ids, g)
        np.add.at(rhs, node_ids, g * bvals)
        boundary_const = float((g * bvals * bvals).sum())
    else:
        raise TooThin("annulus has no boundary-adjacent cells")

    rows_arr = np.concatenate(rows_list + [np.arange(nnode)])
    cols_arr = np.concatenate(cols_list + [np.arange(nnode)])
    vals_arr = np.concatenate([np.full(len(rows_arr) - nnode, -1.0), diag])
    lap = sparse.csr_matrix((vals_arr, (rows_arr, cols_arr)), shape=(nnode, nnode))

    if _HAVE_PYAMG:
        ml = pyamg.ruge_stuben_solver(lap)
        u = ml.solve(rhs, tol=cfg.laplace_tol, accel="cg", maxiter=400)
    else:  # pragma: no cover
        u, _ = _cg(lap, rhs, rtol=cfg.laplace_tol, maxiter=20000)

    # network energy: interior edge terms plus shortened boundary edges
    energy = float(u @ (lap @ u)) - 2.0 * float(rhs @ u) + boundary_const
    if energy <= 0:
        raise TooThin("degenerate energy; annulus unresolved")
    return 2.0 * math.pi / energy, energy


def _min_gap(outer: np.ndarray, inner: np.ndarray) -> float:
    """Minimum distance between the two polylines (vertex-to-segment)."""
    def d(points, poly):
        a, b = poly[:-1], poly[1:]
        ab = b - a
        den = (ab.real ** 2 + ab.imag ** 2)
        den = np.where(den == 0, 1.0, den)
        best = np.full(len(points), np.inf)
        chunk = 2048
        for s in range(0, len(points), chunk):
            p = points[s:s + chunk, None]
            t = ((p - a[None, :]).real * ab.real + (p - a[None, :]).imag * ab.imag) / den
            t = np.clip(t, 0.0, 1.0)
            proj = a[None, :] + t * ab[None, :]
            best[s:s + chunk] = np.abs(p - proj).min(axis=1)
        return best
    return float(min(d(inner, outer).min(), d(outer, inner).min()))


def round_annulus_spec(r: float, R: float, resolution: int = 512,
                       samples: int = 720) -> AnnulusSpec:
    th = np.linspace(0.0, 2 * math.pi, samples + 1)
    return AnnulusSpec(outer=R * np.exp(1j * th), inner=r * np.exp(1j * th),
                       grid_resolution=resolution)


# ----------------------------------------------------------------------
# moduli of nested parameter tiles
# ----------------------------------------------------------------------

@dataclass
class NestModulusRecord:
    level: int
    tile_gap: ModulusEstimate | None = None      # mod(tile_l \ tile_{l+1})
    central_gap: ModulusEstimate | None = None   # mod(tile_l \ central subtile_l)
    error: str | None = None


def nest_moduli(lam0: complex, levels: int, resolution: int = 512,
                grid_resolution: int = 512, cfg: RunConfig = DEFAULT,
                tiles: dict | None = None) -> list[NestModulusRecord]:
    """Moduli of the annuli between successive parameter tiles of lam0.

    Tiles at levels 1..levels+1 are grid-extracted in per-level focused
    windows; each record holds the modulus between consecutive tile
    contours, and between a tile and its central subtile where that
    subtile is present.  Per-level failures are tagged, not raised.
    """
    from . import paraplane

    if levels < 1:
        return []
    if tiles is None:
        tiles = paraplane.focused_tiles(lam0, levels + 1, resolution, cfg=cfg)
    records = []
    for level in range(1, levels + 1):
        rec = NestModulusRecord(level=level)
        try:
            outer = tiles[level]["tile"].outer_contour
            inner = tiles[level + 1]["tile"].outer_contour
            rec.tile_gap = annulus_modulus(
                AnnulusSpec(outer=outer, inner=inner, grid_resolution=grid_resolution),
                cfg)
        except Exception as exc:  # tagged, per spec
            rec.error = f"tile gap: {type(exc).__name__}: {exc}"
        try:
            central = tiles[level].get("central")
            if central is not None and central.mask.sum() > 0:
                rec.central_gap = annulus_modulus(
                    AnnulusSpec(outer=tiles[level]["tile"].outer_contour,
                                inner=central.outer_contour,
                                grid_resolution=grid_resolution), cfg)
        except Exception as exc:
            note = f"central gap: {type(exc).__name__}: {exc}"
            rec.error = f"{rec.error}; {note}" if rec.error else note
        records.append(rec)
    return records
