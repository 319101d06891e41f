"""Command-line front end.

Subcommands wrap one library operation each and emit CSV/JSON/SVG files
into the output directory.  Numeric output is printed with 15 significant
digits; exit code 0 on success, 1 on domain errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import (
    artifacts,
    config,
    dynamics,
    measurelab,
    modulus,
    paraplane,
    potential,
    puzzle,
    realnest,
)
from .artifacts import fmt
from .errors import ParapuzzleError
from .potential import Angle


def _parse_complex(text: str) -> complex:
    return complex(text.replace("i", "j").replace(" ", ""))


def _base_config(args) -> config.RunConfig:
    cfg = config.DEFAULT
    if getattr(args, "config", None):
        cfg = config.load_config_file(args.config, cfg)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    if getattr(args, "out_dir", None) is not None:
        overrides["outdir"] = Path(args.out_dir)
    if getattr(args, "trunc_convention", None):
        overrides["trunc_convention"] = args.trunc_convention
    return config.with_overrides(cfg, **overrides)


def _out(cfg: config.RunConfig, name: str) -> Path:
    cfg.outdir.mkdir(parents=True, exist_ok=True)
    return cfg.outdir / name


# ----------------------------------------------------------------------
# subcommand handlers
# ----------------------------------------------------------------------

def _cmd_ray(args, cfg):
    plane = "parameter" if args.plane in ("param", "parameter") else "dynamical"
    angle = Angle.parse(args.angle)
    c = _parse_complex(args.c) if args.c else None
    g_end = 0.0 if args.land else args.g_end
    trace = potential.trace_ray(plane, angle, args.g_start, g_end, c=c, cfg=cfg)
    path = _out(cfg, f"ray_{plane}_{angle.num}_{angle.den}.csv")
    artifacts.write_csv(path, ["g", "re", "im"], trace.as_rows())
    if args.svg:
        artifacts.write_svg_curves(_out(cfg, f"ray_{plane}_{angle.num}_{angle.den}.svg"),
                                   [np.asarray(trace.points)], [f"ray {angle}"])
    print(f"plane={plane} angle={angle} points={len(trace.points)} "
          f"landed={trace.landed} failure={trace.failure}")
    if trace.landed:
        print(f"landing_point={fmt(trace.landing_point)}")
    print(f"csv={path}")
    return 0


def _cmd_green(args, cfg):
    c = _parse_complex(args.c)
    if args.plane in ("param", "parameter"):
        val = potential.green_parameter(c, cfg)
    else:
        z = _parse_complex(args.z)
        val = potential.green_dynamical(c, z, cfg)
    print(f"g={fmt(val.g)} level={fmt(val.level)} escaped={val.escaped}")
    return 0


def _cmd_cycle(args, cfg):
    cyc = puzzle.alpha_ray_cycle(args.p, args.q)
    pair = puzzle.characteristic_pair(cyc)
    co = puzzle.co_angles(cyc)
    print("cycle:", " ".join(str(a) for a in cyc.angles))
    print("characteristic:", str(pair[0]), str(pair[1]))
    print("co-angles:", " ".join(str(a) for a in co))
    artifacts.write_json(_out(cfg, f"cycle_{args.q}_{args.p}.json"), {
        "p": args.p, "q": args.q,
        "angles": [str(a) for a in cyc.angles],
        "characteristic": [str(a) for a in pair],
        "co_angles": [str(a) for a in co],
    })
    return 0


def _cmd_tiling(args, cfg):
    c = _parse_complex(args.c)
    tiling = puzzle.build_initial_tiling(c, args.p, args.q,
                                         dyadic_depth=args.depth, cfg=cfg)
    counts: dict[str, int] = {}
    for ref in tiling.catalog:
        counts[ref.label] = counts.get(ref.label, 0) + 1
    print("catalog:", " ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    payload = {
        "c": [c.real, c.imag], "p": args.p, "q": args.q,
        "equip_level": tiling.equip_level,
        "alpha": [tiling.alpha.real, tiling.alpha.imag],
        "pieces": [{"name": ref.name(), "label": ref.label, "index": ref.index,
                    "depth": ref.depth, "code": list(ref.code),
                    "angles": [str(a) for a in ref.angles]}
                   for ref in tiling.catalog],
    }
    artifacts.write_json(_out(cfg, "tiling.json"), payload)
    print(f"json={_out(cfg, 'tiling.json')}")
    return 0


def _cmd_nest(args, cfg):
    c = _parse_complex(args.c)
    if args.complex_plane or abs(c.imag) > 1e-13:
        tiling = puzzle.build_initial_tiling(c, 2, 1, cfg=cfg)
        levels, verdict = puzzle.complex_principal_nest(
            tiling, max_level=args.max_level, cfg=cfg)
        rows = [(fmt(c), lv.level, lv.return_time, int(lv.central), lv.cascade_len)
                for lv in levels]
        path = _out(cfg, "nest_complex.csv")
        artifacts.write_csv(path, ["c", "level", "return_time", "central", "cascade_len"],
                            rows)
        print(f"verdict={verdict} levels={len(levels)} csv={path}")
    else:
        levels, verdict, graze = realnest.real_nest(c.real, max_level=args.max_level,
                                                    cfg=cfg)
        rows = [(c.real, lv.level, lv.a, lv.b, lv.return_time, int(lv.central),
                 lv.cascade_len) for lv in levels]
        path = _out(cfg, "nest_real.csv")
        artifacts.write_csv(path, ["c", "level", "a", "b", "return_time", "central",
                                   "cascade_len"], rows)
        print(f"verdict={verdict.value} levels={len(levels)} graze={graze} csv={path}")
    return 0


def _cmd_classify(args, cfg):
    rec = realnest.classify_parameter(float(args.c), max_level=args.max_level, cfg=cfg)
    payload = {
        "c": float(args.c), "verdict": rec.verdict.value,
        "levels_computed": rec.levels_computed,
        "cascade_lengths": list(rec.cascade_lengths),
        "cascade_levels": list(rec.cascade_levels),
        "boundary_graze": rec.boundary_graze,
        "in_primary_window": rec.in_primary_window,
    }
    print(json.dumps(payload, sort_keys=True))
    artifacts.write_json(_out(cfg, "classify.json"), payload)
    return 0


def _cmd_scaling(args, cfg):
    rep = realnest.scaling_factors(float(args.c), args.levels, cfg=cfg)
    path = _out(cfg, "scaling.csv")
    artifacts.write_csv(path, ["level", "lambda"],
                        [(i, lam) for i, lam in enumerate(rep.lambdas)])
    print(f"levels={len(rep.lambdas)} sqrt_sum={fmt(rep.sqrt_sum)} "
          f"fit_rho={fmt(rep.fit_rho)} r2={fmt(rep.fit_r2)} acim={rep.acim_flag}")
    print(f"csv={path}")
    return 0


def _cmd_wake(args, cfg):
    if args.sigma is not None or args.index is not None:
        sigma = tuple(int(ch) for ch in (args.sigma or ""))
        seed = _parse_complex(args.wake_seed) if args.wake_seed else None
        wake = paraplane.misiurewicz_wake(args.p, args.q, sigma,
                                          args.index or 1, seed=seed, cfg=cfg)
    else:
        wake = paraplane.wake_boundary(args.p, args.q, cfg=cfg)
    print(f"kind={wake.kind} angles={wake.boundary_angles[0]},{wake.boundary_angles[1]} "
          f"landing={fmt(wake.landing_param)} truncation_level={fmt(wake.truncation_level)}")
    rows = []
    for tag, tr in zip(("minus", "plus"), wake.rays):
        for g, z in zip(tr.potentials, tr.points):
            rows.append((tag, g, z.real, z.imag))
    for z in wake.equip_arc:
        rows.append(("arc", math.log(wake.truncation_level), z.real, z.imag))
    path = _out(cfg, f"wake_{args.q}_{args.p}.csv")
    artifacts.write_csv(path, ["part", "g", "re", "im"], rows)
    print(f"csv={path}")
    return 0


def _cmd_winding(args, cfg):
    n = args.samples
    th = np.linspace(0.0, 2 * math.pi, n + 1)
    if args.case == "equipotential":
        loop = potential.equipotential_loop("parameter", math.log(args.level), n, cfg=cfg)
        phi = loop.copy()
        psi = np.zeros_like(loop)
    else:
        loop = np.exp(1j * th)
        psi = np.zeros_like(loop)
        phi = {"identity": loop, "square": loop ** 2,
               "const": np.full_like(loop, 5.0)}[args.case]
    res = paraplane.winding_number(loop, phi, psi)
    print(f"w={res.w} samples={res.samples} min_separation={fmt(res.min_separation)} "
          f"increment_turns={fmt(res.total_increment)}")
    return 0


def _cmd_tile(args, cfg):
    lam0 = _parse_complex(args.lam0)
    if args.window:
        vals = [float(v) for v in args.window.split(",")]
        window = paraplane.Window(*vals)
        tile = paraplane.extract_param_tile(lam0, args.level, window,
                                            args.resolution, cfg=cfg,
                                            central_only=args.central_only)
    else:
        tiles = paraplane.focused_tiles(lam0, args.level, args.resolution, cfg=cfg,
                                        with_central=args.central_only)
        tile = tiles[args.level]["central" if args.central_only else "tile"]
    payload = {
        "level": tile.level, "base_param": [lam0.real, lam0.imag],
        "key": list(tile.key), "resolution": tile.resolution,
        "window": [tile.window.re_lo, tile.window.re_hi,
                   tile.window.im_lo, tile.window.im_hi],
        "cells": int(tile.mask.sum()),
        "unknown_fraction": tile.unknown_fraction,
        "central_only": tile.central_only,
        "center": None if tile.center is None else [tile.center.real, tile.center.imag],
        "mask_rle": artifacts.rle_mask(tile.mask),
    }
    jpath = _out(cfg, f"tile_l{args.level}.json")
    artifacts.write_json(jpath, payload)
    artifacts.write_svg_curves(_out(cfg, f"tile_l{args.level}.svg"),
                               [tile.outer_contour] + tile.inner_contours,
                               [f"tile level {args.level}"])
    print(f"cells={int(tile.mask.sum())} unknown={tile.unknown_fraction:.4f} "
          f"json={jpath}")
    return 0


def _cmd_moduli(args, cfg):
    lam0 = _parse_complex(args.lam0)
    tiles = paraplane.focused_tiles(lam0, args.levels + 1, args.resolution, cfg=cfg)
    records = modulus.nest_moduli(lam0, args.levels, resolution=args.resolution,
                                  grid_resolution=args.grid_resolution, cfg=cfg,
                                  tiles=tiles)
    rows = []
    curves = []
    labels = []
    for rec in records:
        gap = rec.tile_gap
        cgap = rec.central_gap
        rows.append((rec.level,
                     gap.mod if gap else "",
                     gap.richardson_error if gap else "",
                     cgap.mod if cgap else "",
                     cgap.richardson_error if cgap else "",
                     rec.error or ""))
        print(f"level {rec.level}: mod_gap="
              f"{fmt(gap.mod) if gap else 'n/a'} "
              f"mod_central={fmt(cgap.mod) if cgap else 'n/a'} "
              f"{'error=' + rec.error if rec.error else ''}")
    for lv in sorted(tiles):
        curves.append(tiles[lv]["tile"].outer_contour)
        labels.append(f"level {lv}")
    path = _out(cfg, "moduli.csv")
    artifacts.write_csv(path, ["level", "mod", "richardson", "central_mod",
                               "central_richardson", "error"], rows)
    artifacts.write_svg_curves(_out(cfg, "tiles.svg"), curves, labels)
    print(f"csv={path}")
    return 0


def _cmd_measure(args, cfg):
    if args.hi == "auto-d":
        hi = realnest.tip_parameter()
    else:
        hi = float(args.hi)
    rep = measurelab.density_experiment((args.lo, hi), args.n,
                                        max_level=args.max_level,
                                        seed=cfg.seed, cfg=cfg,
                                        workers=cfg.workers)
    path = _out(cfg, "measure.json")
    path.write_text(rep.to_json() + "\n", encoding="utf-8")
    if args.samples_csv:
        rows = [(fmt(c), int(s), int(k))
                for c, s, k in zip(rep.samples, rep.status, rep.levels_computed)]
        artifacts.write_csv(_out(cfg, "measure_samples.csv"),
                            ["c", "status", "levels"], rows)
    print(f"n={rep.n_samples} nr_fraction={fmt(rep.nr_fraction)} "
          f"ci=[{fmt(rep.nr_ci[0])},{fmt(rep.nr_ci[1])}] "
          f"q={fmt(rep.fit_q) if rep.fit_q else 'n/a'} "
          f"discard={fmt(rep.discard_fraction)}")
    print(f"json={path}")
    return 0


def _cmd_report(args, cfg):
    payload = json.loads(Path(args.input).read_text())
    levels = [d["level"] for d in payload["densities"] if d["density"] > 0]
    dens = [d["density"] for d in payload["densities"] if d["density"] > 0]
    svg = _out(cfg, "density_decay.svg")
    artifacts.write_svg_series(svg, levels, dens,
                               title="central-return density per level", logy=True)
    fit = payload.get("fit", {})
    print(f"interval={payload['interval']} n={payload['n_samples']} "
          f"seed={payload['seed']}")
    print(f"nr_fraction={fmt(payload['nr_fraction'])} "
          f"ci={payload['nr_ci']} discard={fmt(payload['discard_fraction'])}")
    if fit.get("q") is not None:
        print(f"fit: C={fmt(fit['C'])} q={fmt(fit['q'])} r2={fmt(fit['r2'])}")
    print(f"svg={svg}")
    return 0


# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="parapuzzle",
        description="puzzle and parapuzzle computations for z^2 + c")
    ap.add_argument("--config", help="key = value config file")
    ap.add_argument("--out-dir", help="artifact directory (default ./out)")
    ap.add_argument("--seed", type=int, help="RNG seed for stochastic commands")
    ap.add_argument("--workers", type=int, help="worker threads for sweeps")
    ap.add_argument("--trunc-convention", choices=("power", "literal"),
                    help="wake truncation-level reading")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ray", help="trace an external ray")
    p.add_argument("--plane", choices=("dynamical", "param", "parameter"),
                   required=True)
    p.add_argument("--angle", required=True, help="rational angle, e.g. 1/2")
    p.add_argument("--c", help="parameter for dynamical rays, e.g. -1.5+0.1i")
    p.add_argument("--g-start", type=float, default=math.log(4.0))
    p.add_argument("--g-end", type=float, default=1e-4)
    p.add_argument("--land", action="store_true", help="trace down to landing")
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=_cmd_ray)

    p = sub.add_parser("green", help="Green's function value")
    p.add_argument("--plane", choices=("dynamical", "param", "parameter"),
                   required=True)
    p.add_argument("--c", required=True)
    p.add_argument("--z", help="dynamical-plane point")
    p.set_defaults(func=_cmd_green)

    p = sub.add_parser("cycle", help="ray cycle at the dividing fixed point")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.set_defaults(func=_cmd_cycle)

    p = sub.add_parser("tiling", help="initial tiling catalog")
    p.add_argument("--c", required=True)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--depth", type=int, default=2)
    p.set_defaults(func=_cmd_tiling)

    p = sub.add_parser("nest", help="principal nest of one parameter")
    p.add_argument("--c", required=True)
    p.add_argument("--max-level", type=int, default=10)
    p.add_argument("--complex-plane", action="store_true",
                   help="use the puzzle engine even for real c")
    p.set_defaults(func=_cmd_nest)

    p = sub.add_parser("classify", help="renormalizability classification")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--max-level", type=int, default=8)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("scaling", help="interval scaling factors")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--levels", type=int, default=9)
    p.set_defaults(func=_cmd_scaling)

    p = sub.add_parser("wake", help="parabolic or Misiurewicz wake")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--sigma", help="dyadic code, e.g. 01 (Misiurewicz wake)")
    p.add_argument("--index", type=int, help="co-fixed piece index (Misiurewicz wake)")
    p.add_argument("--wake-seed", help="Newton seed for the landing parameter")
    p.set_defaults(func=_cmd_wake)

    p = sub.add_parser("winding", help="winding-number test loops")
    p.add_argument("--case", choices=("identity", "square", "const", "equipotential"),
                   required=True)
    p.add_argument("--samples", type=int, default=1024)
    p.add_argument("--level", type=float, default=4.0,
                   help="equipotential level for the equipotential case")
    p.set_defaults(func=_cmd_winding)

    p = sub.add_parser("tile", help="extract a parameter tile")
    p.add_argument("--lam0", required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--window", help="re_lo,re_hi,im_lo,im_hi (default: focused)")
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--central-only", action="store_true")
    p.set_defaults(func=_cmd_tile)

    p = sub.add_parser("moduli", help="moduli of nested parameter tiles")
    p.add_argument("--lam0", required=True)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--grid-resolution", type=int, default=512)
    p.set_defaults(func=_cmd_moduli)

    p = sub.add_parser("measure", help="Monte Carlo density experiment")
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", required=True, help="number or auto-d")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-level", type=int, default=8)
    p.add_argument("--seed", type=int, dest="seed")
    p.add_argument("--workers", type=int, dest="workers")
    p.add_argument("--samples-csv", action="store_true")
    p.set_defaults(func=_cmd_measure)

    p = sub.add_parser("report", help="render a measure report")
    p.add_argument("--input", required=True)
    p.set_defaults(func=_cmd_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    cfg = _base_config(args)
    try:
        return args.func(args, cfg)
    except ParapuzzleError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
