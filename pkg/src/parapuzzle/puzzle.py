"""Dynamical-plane combinatorics: ray cycles at alpha, the initial tiling
of a wake, point location, and the complex principal nest.

The working partition is the one cut by the rays landing at alpha and at
the co-fixed point: the p-1 off-critical sectors at alpha (symbols A_i),
the central piece bounded by two rays at alpha and the two outermost rays
at the co-fixed point (symbol C, real trace [alpha, -alpha]), and the p-1
pieces attached to the co-fixed point (symbols Z_i).  Everything deeper is
decided by the symbol word of forward orbits, never by polygons of deep
pieces: a point lies in the level-l central piece iff its first T_l
symbols match the critical point's, where T_0 = 1 and
T_{l+1} = T_l + N_l * m_l accumulates return times through cascades.

Near alpha the sector of a point is read after escalating by f^p (which
fixes each landing ray, so local sectors are preserved while the orbit is
pushed away from the fixed point); near the co-fixed point one application
of f moves the question to alpha.  Points within tolerance of a decision
surface classify as Boundary and propagate to Undecidable outcomes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import dynamics
from .config import DEFAULT, RunConfig
from .errors import (
    InvalidInput,
    NotFound,
    NotInWake,
    OrbitEscaped,
    RayLandingFailure,
    Undecidable,
)
from .potential import Angle, green_dynamical, trace_ray

# word sentinels (non-negative codes are partition symbols)
SYM_C = 0
SYM_BOUNDARY = -1
SYM_ESCAPED = -2


def sym_z(i: int) -> int:
    """Symbol code of the co-fixed piece Z_i, i = 1..p-1."""
    return i


def sym_a(p: int, i: int) -> int:
    """Symbol code of the off-critical sector A_i, i = 1..p-1."""
    return p - 1 + i


# ----------------------------------------------------------------------
# ray cycles at alpha
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class RayCycle:
    p: int
    q: int
    angles: tuple[Angle, ...]  # sorted, exact period p under doubling


def _rotation_positions(angles: list[Angle]) -> int | None:
    """Circular-order advance of doubling on a sorted angle list, or None."""
    order = {a: i for i, a in enumerate(angles)}
    shifts = {(order[a.double()] - order[a]) % len(angles) for a in angles}
    return shifts.pop() if len(shifts) == 1 else None


def alpha_ray_cycle(p: int, q: int) -> RayCycle:
    """The unique period-p doubling orbit with combinatorial rotation number q/p.

    Built from the rotation word: digit j of the base angle is 1 when the
    rigid rotation by q/p has entered the upper gap, giving the angle
    a/(2^p - 1); the circular-order property is then verified exactly.
    """
    if not (p >= 2 and 1 <= q < p and math.gcd(p, q) == 1):
        raise InvalidInput("need p >= 2, 1 <= q < p, gcd(p, q) = 1")
    if p > 24:
        raise NotFound("enumeration bound p <= 24")
    den = (1 << p) - 1
    a = 0
    for j in range(p):
        a <<= 1
        if (j * q) % p >= p - q:
            a |= 1
    base = Angle(a, den)
    angles = sorted(base.doubled(k) for k in range(p))
    if len(set(angles)) != p:
        raise NotFound(f"rotation word for {q}/{p} did not give a period-{p} orbit")
    rot = _rotation_positions(angles)
    if rot != q:
        raise NotFound(f"constructed orbit has rotation number {rot}/{p}, wanted {q}/{p}")
    return RayCycle(p=p, q=q, angles=tuple(angles))


def enumerate_cycles(p: int) -> list[RayCycle]:
    """All period-p doubling orbits with a well-defined rotation number
    (brute force; used as a test oracle for small p)."""
    den = (1 << p) - 1
    seen: set[int] = set()
    out = []
    for k in range(1, den):
        if k in seen:
            continue
        orbit = []
        j = k
        while j not in seen:
            seen.add(j)
            orbit.append(j)
            j = (2 * j) % den
        if len(orbit) != p:
            continue
        angles = sorted(Angle(i, den) for i in orbit)
        rot = _rotation_positions(angles)
        if rot is not None and math.gcd(rot, p) == 1:
            out.append(RayCycle(p=p, q=rot, angles=tuple(angles)))
    return out


def characteristic_pair(cycle: RayCycle) -> tuple[Angle, Angle]:
    """The two cycle angles bounding the critical-value sector (minimal gap)."""
    angs = list(cycle.angles)
    best = None
    for i in range(len(angs)):
        a, b = angs[i], angs[(i + 1) % len(angs)]
        gap = (b.turns() - a.turns()) % 1.0
        if best is None or gap < best[0]:
            best = (gap, a, b)
    return best[1], best[2]


def co_angles(cycle: RayCycle) -> tuple[Angle, ...]:
    """Angles of the p rays landing at the co-fixed point: the doubling
    preimages of the cycle that are not themselves in the cycle."""
    cyc = set(cycle.angles)
    out = []
    for a in cycle.angles:
        for h in a.halves():
            if h not in cyc:
                out.append(h)
    if len(out) != cycle.p:
        raise NotFound("co-angle construction failed")
    return tuple(sorted(out))


# ----------------------------------------------------------------------
# sector geometry
# ----------------------------------------------------------------------

def _arc_contains(lo: float, hi: float, x: float) -> bool:
    """Is angle x (turns) inside the circular arc from lo to hi (ccw)?"""
    span = (hi - lo) % 1.0
    return (x - lo) % 1.0 < span


def _point_in_polygon(z: complex, poly: np.ndarray) -> bool:
    """Even-odd rule with the half-open vertex convention."""
    x, y = z.real, z.imag
    inside = False
    x0, y0 = poly[:-1].real, poly[:-1].imag
    x1, y1 = poly[1:].real, poly[1:].imag
    for ax, ay, bx, by in zip(x0, y0, x1, y1):
        if (ay <= y) != (by <= y):
            t = (y - ay) / (by - ay)
            if x < ax + t * (bx - ax):
                inside = not inside
    return inside


def _dist_to_polyline(z: complex, pts: np.ndarray) -> float:
    a = pts[:-1]
    b = pts[1:]
    ab = b - a
    denom = (ab.real ** 2 + ab.imag ** 2)
    denom = np.where(denom == 0, 1.0, denom)
    t = ((z - a).real * ab.real + (z - a).imag * ab.imag) / denom
    t = np.clip(t, 0.0, 1.0)
    proj = a + t * ab
    return float(np.min(np.abs(z - proj)))


@dataclass
class _Sector:
    """One coarse piece: vertex rays plus a far arc, as a closed polygon."""

    symbol: int
    arc: tuple[float, float]      # angular window at the far circle (turns, ccw)
    polygon: np.ndarray


@dataclass
class PieceRef:
    """Symbolic descriptor of a catalog piece."""

    label: str                     # 'Y0' | 'V0' | 'Z' | 'X'
    index: int = 0                 # Z_i / X sector index
    depth: int = 0                 # pullback depth (equipotential halvings)
    code: tuple[int, ...] = ()     # dyadic code for pulled-back Z pieces
    angles: tuple[Angle, ...] = ()

    def name(self) -> str:
        if self.label == "Z" and self.code:
            sigma = "".join(str(d) for d in self.code)
            return f"Z({sigma},{self.index})^({self.depth})"
        if self.label == "Z":
            return f"Z({self.index})^(1)"
        if self.label == "X":
            return f"X({self.index},{self.depth})"
        return self.label


# ----------------------------------------------------------------------
# the initial tiling
# ----------------------------------------------------------------------

class InitialTiling:
    """Coarse partition machinery plus the symbolic catalog for one wake.

    Construction traces the p rays at alpha and the p rays at the co-fixed
    point, verifies their landing, and assembles the sector polygons used
    by the coarse symbol test.  Membership in deeper catalog pieces is
    decided by forward iteration of the symbol test.
    """

    def __init__(self, c: complex, p: int, q: int, dyadic_depth: int = 2,
                 cfg: RunConfig = DEFAULT):
        if dyadic_depth < 1 or dyadic_depth > 12:
            raise InvalidInput("dyadic_depth must be in 1..12")
        self.c = complex(c)
        self.p = p
        self.q = q
        self.dyadic_depth = dyadic_depth
        self.cfg = cfg
        self.equip_level = cfg.equip_level
        self.cycle = alpha_ray_cycle(p, q)
        self.co = co_angles(self.cycle)
        pair = dynamics.fixed_points(c)
        self.alpha = pair.alpha
        self.cofixed = -pair.alpha

        self._trace_boundary_rays()
        self._build_sectors()
        self._catalog = self._build_catalog()
        # the critical point must sit in the central piece
        if self.raw_symbol(0j) != SYM_C:
            raise NotInWake("critical point does not locate in the central piece")

    # -- construction ---------------------------------------------------

    def _trace_boundary_rays(self):
        cfg = self.cfg
        g_start = math.log(40.0)
        self.rays: dict[Angle, np.ndarray] = {}
        land_alpha = []
        for ang in self.cycle.angles:
            tr = trace_ray("dynamical", ang, g_start=g_start, g_end=0.0, c=self.c, cfg=cfg)
            if not tr.landed:
                raise RayLandingFailure(f"ray {ang} failed to land ({tr.failure})")
            land_alpha.append(tr.landing_point)
            pts = np.asarray(tr.points[::-1], dtype=np.complex128)  # landing end first
            self.rays[ang] = np.concatenate(([tr.landing_point], pts))
        gaps = [abs(w - land_alpha[0]) for w in land_alpha[1:]]
        if gaps and max(gaps) > 1e-5:
            raise NotInWake(
                f"the {self.q}/{self.p} ray cycle does not land at a common point "
                f"(max landing gap {max(gaps):.2e})")
        if abs(land_alpha[0] - self.alpha) > 1e-5:
            raise NotInWake(
                f"cycle lands {abs(land_alpha[0] - self.alpha):.2e} away from alpha")
        self._alpha_land_err = max([abs(w - self.alpha) for w in land_alpha])

        land_co = []
        for ang in self.co:
            tr = trace_ray("dynamical", ang, g_start=g_start, g_end=0.0, c=self.c, cfg=cfg)
            if not tr.landed:
                raise RayLandingFailure(f"co-ray {ang} failed to land ({tr.failure})")
            land_co.append(tr.landing_point)
            pts = np.asarray(tr.points[::-1], dtype=np.complex128)
            self.rays[ang] = np.concatenate(([tr.landing_point], pts))
        gap_co = max(abs(w - self.cofixed) for w in land_co)
        if gap_co > 1e-5:
            raise NotInWake(f"co-rays land {gap_co:.2e} away from the co-fixed point")

        land_err = max(self._alpha_land_err, gap_co)
        self.r_safe = max(self.cfg.sector_safe_radius, 50.0 * land_err)
        self._far_radius = 40.0

    def _arc_points(self, a: float, b: float, n: int = 24) -> np.ndarray:
        """Far-circle samples from angle a to b ccw (turns)."""
        span = (b - a) % 1.0
        ts = a + span * np.linspace(0.0, 1.0, n)
        return self._far_radius * np.exp(2j * math.pi * ts)

    def _ray_poly(self, ang: Angle, outward: bool) -> np.ndarray:
        pts = self.rays[ang]
        return pts if outward else pts[::-1]

    def _build_sectors(self):
        p = self.p
        self.char_pair = characteristic_pair(self.cycle)
        angs = sorted(self.cycle.angles, key=lambda a: a.turns())

        # the critical-point sector is the consecutive cycle arc of maximal
        # length (it doubles over the whole circle); the p-1 others are the
        # off-critical sectors A_i.
        gaps = []
        for i in range(p):
            a, b = angs[i], angs[(i + 1) % p]
            gaps.append(((b.turns() - a.turns()) % 1.0, a, b))
        crit = max(gaps, key=lambda t: t[0])
        th_a, th_b = crit[1], crit[2]  # critical sector runs ccw from th_a to th_b
        self.crit_pair = (th_a, th_b)

        self.sectors: list[_Sector] = []
        self._a_sector_start: dict[Angle, int] = {}
        i_a = 0
        for gap, a, b in gaps:
            if a == th_a and b == th_b:
                continue
            i_a += 1
            poly = np.concatenate([
                [self.alpha],
                self._ray_poly(a, outward=True),
                self._arc_points(a.turns(), b.turns()),
                self._ray_poly(b, outward=False),
                [self.alpha],
            ])
            self.sectors.append(_Sector(symbol=sym_a(p, i_a), arc=(a.turns(), b.turns()),
                                        polygon=poly))
            self._a_sector_start[a] = sym_a(p, i_a)
        self._n_off = i_a

        # co-angles ordered ccw inside the critical arc (th_a .. th_b)
        co_sorted = sorted(self.co, key=lambda u: (u.turns() - th_a.turns()) % 1.0)
        self.co_sorted = tuple(co_sorted)

        # central piece: two alpha-rays and the outermost co-rays
        c_first, c_last = co_sorted[0], co_sorted[-1]
        poly_c = np.concatenate([
            [self.alpha],
            self._ray_poly(th_a, outward=True),
            self._arc_points(th_a.turns(), c_first.turns()),
            self._ray_poly(c_first, outward=False),
            self._ray_poly(c_last, outward=True),
            self._arc_points(c_last.turns(), th_b.turns()),
            self._ray_poly(th_b, outward=False),
            [self.alpha],
        ])
        # the central piece owns the two angular windows flanking the Z fan
        self._c_windows = ((th_a.turns(), c_first.turns()),
                           (c_last.turns(), th_b.turns()))
        self.sectors.append(_Sector(symbol=SYM_C,
                                    arc=(th_a.turns(), th_b.turns()),
                                    polygon=poly_c))

        # Z_i between consecutive co-rays
        for i in range(p - 1):
            a, b = co_sorted[i], co_sorted[i + 1]
            poly = np.concatenate([
                [self.cofixed],
                self._ray_poly(a, outward=True),
                self._arc_points(a.turns(), b.turns()),
                self._ray_poly(b, outward=False),
                [self.cofixed],
            ])
            self.sectors.append(_Sector(symbol=sym_z(i + 1), arc=(a.turns(), b.turns()),
                                        polygon=poly))

        # doubling correspondence for the local sectors at the co-fixed
        # point: the gap (co_i, co_i+1) maps to the alpha-sector whose arc
        # starts at 2*co_i ('crit' for the critical sector itself).
        self._gap_image: dict[int, object] = {}
        for i in range(p - 1):
            start = co_sorted[i].double()
            if start == th_a:
                self._gap_image[i + 1] = "crit"
            else:
                self._gap_image[i + 1] = self._a_sector_start.get(start)

    def _build_catalog(self) -> list[PieceRef]:
        p = self.p
        cat = [PieceRef(label="Y0", depth=0, angles=self.crit_pair)]
        c_first, c_last = self.co_sorted[0], self.co_sorted[-1]
        cat.append(PieceRef(label="V0", depth=1,
                            angles=(self.crit_pair[0], self.crit_pair[1], c_first, c_last)))
        for i in range(p - 1):
            cat.append(PieceRef(label="Z", index=i + 1, depth=1,
                                angles=(self.co_sorted[i], self.co_sorted[i + 1])))
        x_cap = self.dyadic_depth + 2
        for k in range(1, x_cap + 1):
            for i in range(p):
                cat.append(PieceRef(label="X", index=i, depth=k))
        for k in range(1, self.dyadic_depth):
            for code_bits in range(1 << k):
                code = tuple((code_bits >> (k - 1 - j)) & 1 for j in range(k))
                for i in range(p - 1):
                    cat.append(PieceRef(label="Z", index=i + 1, depth=1 + k * p, code=code))
        return cat

    @property
    def catalog(self) -> list[PieceRef]:
        return self._catalog

    def pieces(self, label: str) -> list[PieceRef]:
        return [ref for ref in self._catalog if ref.label == label]

    # -- coarse symbol ---------------------------------------------------

    def _far_symbol(self, z: complex) -> int:
        """Sector by bare angle, valid outside the far circle."""
        t = (cmath.phase(z) / (2 * math.pi)) % 1.0
        for sec in self.sectors:
            if _arc_contains(sec.arc[0], sec.arc[1], t):
                return sec.symbol
        return SYM_BOUNDARY

    def _polygon_symbol(self, z: complex) -> int:
        tol = self.cfg.boundary_tol
        for ang, pts in self.rays.items():
            # segment-sag guard: coarse polylines widen the boundary band
            d = _dist_to_polyline(z, pts)
            if d < tol:
                return SYM_BOUNDARY
        for sec in self.sectors:
            if _point_in_polygon(z, sec.polygon):
                return sec.symbol
        return SYM_BOUNDARY

    def _fp(self, z: complex) -> complex:
        for _ in range(self.p):
            z = z * z + self.c
        return z

    def raw_symbol(self, z: complex) -> int:
        """Coarse partition symbol of a single point (A_i / C / Z_i).

        Points within ``r_safe`` of alpha are escalated by f^p (which
        preserves each local sector while expanding); near the co-fixed
        point one f step moves the question to alpha and the answer is
        pulled back through the doubling correspondence of local sectors.
        """
        if abs(z) > self._far_radius:
            return self._far_symbol(z)
        if abs(z - self.cofixed) < self.r_safe:
            w = z * z + self.c
            sym = self._alpha_side_symbol(w)
            if sym == SYM_BOUNDARY:
                return SYM_BOUNDARY
            image = "crit" if sym < self.p else sym
            for gap_index, gap_image in self._gap_image.items():
                if gap_image == image:
                    return sym_z(gap_index)
            return SYM_C
        return self._alpha_side_symbol(z)

    def _alpha_side_symbol(self, z: complex) -> int:
        cap = self.cfg.sector_escalate_cap
        k = 0
        while abs(z - self.alpha) < self.r_safe:
            z = self._fp(z)
            k += 1
            if k > cap:
                return SYM_BOUNDARY
        if abs(z) > self._far_radius:
            return self._far_symbol(z)
        return self._polygon_symbol(z)

    def symbol_word(self, z: complex, length: int) -> list[int]:
        """Symbols of z, f(z), ..., f^(length-1)(z); stops after a sentinel."""
        out = []
        w = complex(z)
        esc2 = (self._far_radius * 1.05) ** 2
        for _ in range(length):
            if w.real * w.real + w.imag * w.imag > esc2:
                out.append(SYM_ESCAPED)
                break
            s = self.raw_symbol(w)
            out.append(s)
            if s == SYM_BOUNDARY:
                break
            w = w * w + self.c
        return out


def build_initial_tiling(c: complex, p: int, q: int, dyadic_depth: int = 2,
                         cfg: RunConfig = DEFAULT) -> InitialTiling:
    """Verify that c carries the q/p cycle at alpha and build the tiling."""
    return InitialTiling(c, p, q, dyadic_depth=dyadic_depth, cfg=cfg)


# ----------------------------------------------------------------------
# point location against the catalog
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Location:
    kind: str                    # 'piece' | 'outside' | 'boundary'
    piece: PieceRef | None = None

    def name(self) -> str:
        if self.kind == "piece":
            return self.piece.name()
        return self.kind.capitalize()


OUTSIDE = Location(kind="outside")
BOUNDARY = Location(kind="boundary")


def locate_point(tiling: InitialTiling, z: complex) -> Location:
    """Locate z against the catalog of the initial tiling.

    Points above the truncating equipotential, or in the off-critical
    sectors (outside the top piece Y0), return Outside.  Inside the
    central region, escaping points fall into the equipotential bands
    X(i, k); non-escaping points resolve to V0, a co-fixed piece, or one
    of its dyadic pullbacks, by reading the symbol word of the f^p orbit.
    """
    cfg = tiling.cfg
    log_top = math.log(tiling.equip_level)
    pot = green_dynamical(tiling.c, z, cfg)
    if pot.escaped and pot.g >= log_top:
        return OUTSIDE
    sym = tiling.raw_symbol(z)
    if sym == SYM_BOUNDARY:
        return BOUNDARY
    if sym >= tiling.p:  # off-critical sector
        return OUTSIDE
    if pot.escaped and pot.g > 0.0:
        band = math.ceil(math.log2(log_top / pot.g) - 1e-12)
        band = max(band, 1)
        for ref in tiling.pieces("X"):
            if ref.depth == band and ref.index == sym:
                return Location(kind="piece", piece=ref)
        return Location(kind="piece", piece=PieceRef(label="Y0", depth=band))
    if sym != SYM_C:
        for ref in tiling.pieces("Z"):
            if ref.depth == 1 and ref.index == sym:
                return Location(kind="piece", piece=ref)
    # non-escaping central point: walk the f^p tower
    p = tiling.p
    word = []
    w = complex(z)
    for k in range(tiling.dyadic_depth + 1):
        s = tiling.raw_symbol(w)
        if s == SYM_BOUNDARY:
            return BOUNDARY
        word.append(s)
        if s != SYM_C:
            break
        for _ in range(p):
            w = w * w + tiling.c
    exit_k = len(word) - 1
    exit_sym = word[-1]
    if exit_sym == SYM_C:
        return Location(kind="piece", piece=tiling.pieces("V0")[0])
    if not (1 <= exit_sym < p):
        return Location(kind="piece", piece=PieceRef(label="Y0", depth=1 + exit_k * p))
    if exit_k == 0:
        # already handled above; kept for completeness
        for ref in tiling.pieces("Z"):
            if ref.depth == 1 and ref.index == exit_sym:
                return Location(kind="piece", piece=ref)
    # dyadic pullback of Z_i of depth 1 + exit_k * p; the component through
    # the critical point is V0 (checked by walking the segment to 0)
    if _same_class_as_origin(tiling, z, exit_k, exit_sym):
        return Location(kind="piece", piece=tiling.pieces("V0")[0])
    code = _dyadic_code(tiling, z, exit_k)
    if code is None:
        return BOUNDARY
    for ref in tiling.pieces("Z"):
        if ref.depth == 1 + exit_k * p and ref.index == exit_sym and ref.code == code:
            return Location(kind="piece", piece=ref)
    return Location(kind="piece",
                    piece=PieceRef(label="Z", index=exit_sym, depth=1 + exit_k * p, code=code))


def _tower_class(tiling: InitialTiling, z: complex, k_max: int) -> tuple[int, int] | None:
    w = complex(z)
    for k in range(k_max + 1):
        s = tiling.raw_symbol(w)
        if s == SYM_BOUNDARY:
            return None
        if s != SYM_C:
            return (k, s)
        for _ in range(tiling.p):
            w = w * w + tiling.c
    return (k_max + 1, SYM_C)


def _same_class_as_origin(tiling: InitialTiling, z: complex, exit_k: int,
                          exit_sym: int, samples: int = 17) -> bool:
    """Does the straight segment from 0 to z stay in one (k, symbol) class?
    True exactly when z sits in the component containing the critical point."""
    ref = _tower_class(tiling, 0j, exit_k)
    if ref != (exit_k, exit_sym):
        return False
    for t in np.linspace(0.0, 1.0, samples):
        if _tower_class(tiling, t * z, exit_k) != ref:
            return False
    return True


def _dyadic_code(tiling: InitialTiling, z: complex, exit_k: int) -> tuple[int, ...] | None:
    """Dyadic digits of the pullback branch: the side of each f^(kp) image
    relative to the symmetry axis of the central double cover (real-part
    sign convention, exact on the real slice)."""
    digs = []
    w = complex(z)
    for _ in range(exit_k):
        if abs(w.real) < tiling.cfg.boundary_tol:
            return None
        digs.append(0 if w.real >= 0 else 1)
        for _ in range(tiling.p):
            w = w * w + tiling.c
    return tuple(digs)


# ----------------------------------------------------------------------
# the complex principal nest
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexNestLevel:
    level: int
    return_time: int
    cascade_len: int
    central: bool
    witness: tuple[int, ...]  # symbol word between the previous and this return


class CriticalWord:
    """Lazily extended symbol word of the critical orbit (index j = f^j(0))."""

    def __init__(self, tiling: InitialTiling):
        self.tiling = tiling
        self.symbols: list[int] = [SYM_C]
        self._z = 0j
        self._dead = False

    def ensure(self, n: int) -> None:
        esc2 = (self.tiling._far_radius * 1.05) ** 2
        c = self.tiling.c
        while len(self.symbols) <= n and not self._dead:
            self._z = self._z * self._z + c
            z = self._z
            if z.real * z.real + z.imag * z.imag > esc2:
                self.symbols.append(SYM_ESCAPED)
                self._dead = True
                break
            s = self.tiling.raw_symbol(z)
            self.symbols.append(s)
            if s == SYM_BOUNDARY:
                self._dead = True

    def __getitem__(self, j: int) -> int:
        self.ensure(j)
        if j < len(self.symbols):
            return self.symbols[j]
        return self.symbols[-1]  # sentinel repeats


def _match_length(word: CriticalWord, offset: int, limit: int) -> tuple[int, int]:
    """Longest t <= limit with word[offset+k] == word[k] for all k < t.

    Returns (t, stop_symbol): stop_symbol is the sentinel that interrupted
    matching, or 0 when matching stopped on an honest mismatch/limit.
    """
    t = 0
    while t < limit:
        a = word[t]
        b = word[offset + t]
        if a < 0 or b < 0:
            return t, min(a, b)
        if a != b:
            return t, 0
        t += 1
    return t, 0


def complex_principal_nest(c_or_tiling, max_level: int = 8,
                           max_cascade: int | None = None,
                           cfg: RunConfig = DEFAULT,
                           ) -> tuple[list[ComplexNestLevel], str]:
    """Principal nest levels from the critical orbit's symbol word.

    Membership in the level-l central piece is word-prefix matching of
    length T_l; the first return time m_l is the first offset past the
    previous return whose match reaches T_l, and the cascade length counts
    how many extra multiples of m_l the match extends (each one more
    central pullback).  Returns (levels, verdict) with the same verdict
    vocabulary as the real engine.
    """
    if isinstance(c_or_tiling, InitialTiling):
        tiling = c_or_tiling
    else:
        tiling = build_initial_tiling(c_or_tiling, 2, 1, cfg=cfg)
    if max_cascade is None:
        max_cascade = cfg.max_cascade
    word = CriticalWord(tiling)
    levels: list[ComplexNestLevel] = []
    t_len = 1          # defining word length of the current central piece
    m_prev = 0
    budget = cfg.word_cap
    for lev in range(max_level):
        m = None
        j = m_prev + 1
        while j + t_len <= budget:
            word.ensure(min(j + t_len, budget))
            t, stop = _match_length(word, j, t_len)
            if t == t_len:
                m = j
                break
            if stop == SYM_ESCAPED and word[j] == SYM_ESCAPED:
                raise OrbitEscaped(f"critical orbit escaped at iterate {j}")
            if stop == SYM_BOUNDARY and word[j] == SYM_BOUNDARY:
                raise Undecidable(f"critical orbit grazes a decision surface at iterate {j}")
            j += 1
        if m is None:
            return levels, "MisiurewiczNoReturn"
        run, stop = _match_length(word, m, t_len + max_cascade * m + 1)
        if stop == SYM_ESCAPED:
            raise OrbitEscaped("critical orbit escaped while resolving a cascade")
        if stop == SYM_BOUNDARY:
            raise Undecidable("boundary graze while resolving a cascade")
        k_max = (run - t_len) // m
        ncasc = k_max + 1
        if ncasc > max_cascade:
            return levels, "LikelyRenormalizable"
        levels.append(ComplexNestLevel(
            level=lev, return_time=m, cascade_len=ncasc, central=ncasc > 1,
            witness=tuple(word.symbols[m_prev + 1:m + 1])))
        t_len = t_len + ncasc * m
        m_prev = m
    return levels, "Completed"
