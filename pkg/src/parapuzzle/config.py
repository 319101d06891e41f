"""Run configuration: tolerances, caps, and conventions in one place.

Every numeric knob that the library exposes lives here so that the CLI can
thread a single object through all modules.  Functions take a ``cfg``
argument defaulting to ``DEFAULT``; tests that need a tweaked knob build a
``replace(DEFAULT, ...)`` copy.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path


@dataclass(frozen=True)
class RunConfig:
    # escape / potential
    escape_radius: float = 1e6          # potential-theory escape (not 2)
    green_max_iter: int = 8192
    green_zero_threshold: float = 1e-12

    # Newton solves (centers, Misiurewicz points, ray correction)
    newton_max_iter: int = 200
    newton_step_tol: float = 1e-13
    newton_divergence_radius: float = 8.0

    # external-ray tracing
    ray_steps_per_gen: int = 8          # intermediate targets per potential halving
    ray_newton_iter: int = 30
    ray_land_g: float = 1e-5            # potential below which landing may be declared
    ray_land_tol: float = 1e-7          # Cauchy criterion on the trace tail
    ray_max_gens: int = 64
    ray_branch_jump: float = 0.5        # potential jump fraction flagged as ambiguous

    # puzzle / tiling
    equip_level: float = 4.0            # truncating equipotential, exp(G) = 4
    trunc_convention: str = "power"     # 'power': 4**(1/(p*n-1)); 'literal': 4/(p*n-1)
    boundary_tol: float = 1e-9
    sector_safe_radius: float = 1e-4    # escalate f^p near alpha below this distance
    sector_escalate_cap: int = 256
    word_cap: int = 200_000             # complex-nest symbol budget per parameter

    # principal nest engines
    max_cascade: int = 64
    realnest_iter_cap: int = 2_000_000
    realnest_width_floor: float = 1e-10  # stop when |I^l| drops below this
    center_preclassify_tol: float = 1e-12
    graze_tol: float = 1e-12

    # parameter-plane grids
    grid_resolution: int = 512
    unknown_cell_limit: float = 0.05

    # modulus solver
    laplace_tol: float = 1e-10

    # experiment plumbing
    seed: int = 42
    workers: int = 1
    outdir: Path = field(default_factory=lambda: Path("out"))


DEFAULT = RunConfig()


def with_overrides(cfg: RunConfig | None = None, **kwargs) -> RunConfig:
    """Copy ``cfg`` (or DEFAULT) with the given fields replaced."""
    base = cfg if cfg is not None else DEFAULT
    return replace(base, **kwargs) if kwargs else base


def load_config_file(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    """Read a flat ``key = value`` config file (TOML-style scalars only)."""
    base = base if base is not None else DEFAULT
    overrides = {}
    fields = {f for f in RunConfig.__dataclass_fields__}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in fields:
            raise ValueError(f"unknown config key: {key}")
        current = getattr(base, key)
        if isinstance(current, bool):
            overrides[key] = val.lower() in ("1", "true", "yes")
        elif isinstance(current, int):
            overrides[key] = int(val)
        elif isinstance(current, float):
            overrides[key] = float(val)
        elif isinstance(current, Path):
            overrides[key] = Path(val.strip("\"'"))
        else:
            overrides[key] = val.strip("\"'")
    return replace(base, **overrides)
