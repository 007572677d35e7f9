"""Command-line front end: ``horseshoe-lab <command> <config.json> [flags]``.

Every command writes ``<output_dir>/<command>.json`` (and CSV/PGM artifacts
where relevant) and echoes the JSON to stdout.  Exit codes: 0 success, 1
domain error, 2 configuration or I/O error; errors go to stderr as JSON.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cantor import (gap_lemma, hky_check, ifs_from_gamma, ifs_from_sigma, ifs_thickness, intersect, refine,
                     selfsimilar_thickness)
from .config import RunConfig, load_config
from .errors import ConfigError, LabError, PreconditionViolated
from .fractal import (Section, box_dimension, omega_sets, render_pgm, sample_H, sample_invariant_set,
                      theorem_a_report, theorem_b_report)
from .geometry import (binding_constraint, dimension_reducible, epsilon_margin, rates, shape_constants,
                       validate_system)
from .hmap import build_map, cone_check, fixed_saddles
from .surfaces import graph_transform_cs, graph_transform_cu, invariance_defect, section_line

COMMANDS = ("validate", "constants", "surface", "cantor", "intersect", "render", "boxdim",
            "theorem-a", "theorem-b")


def _clean(x):
    """JSON-safe plain values (numpy scalars/arrays, inf, nan)."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return x


def _map(cfg: RunConfig):
    return build_map(cfg.system, cfg.signs, cfg.make_perturbation(), require_valid=cfg.require_valid)


def _section(cfg: RunConfig, default: str) -> Section:
    try:
        return Section.parse(cfg.section if cfg.section is not None else default)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad section {cfg.section!r}: {exc}") from None


# ---------------------------------------------------------------------------
# commands; each returns (result dict, {artifact name: writer})

def cmd_validate(cfg, args):
    sysm = cfg.system
    rep = validate_system(sysm)
    r = rates(sysm)
    return {"validation": rep.to_dict(), "rates": r.to_dict(), "dimension_reducible": dimension_reducible(r),
            "horseshoe_shaped": r.is_horseshoe_shaped()}, {}


def cmd_constants(cfg, args):
    sysm = cfg.system
    r = rates(sysm)
    k = shape_constants(sysm)
    eps = epsilon_margin(r, k)
    return {"rates": r.to_dict(), "shape_constants": k.to_dict(), "dimension_reducible": dimension_reducible(r),
            "epsilon_margin": eps, "binding_constraint": binding_constraint(r, k)}, {}


def cmd_surface(cfg, args):
    m = _map(cfg)
    phi = graph_transform_cu(m, resolution=cfg.resolution)
    phis = graph_transform_cs(m, resolution=cfg.resolution)
    line = section_line(m, phi, phis)
    P, Q = fixed_saddles(m)
    cones = cone_check(m, cfg.theta, seed=cfg.seed)
    res = {"cu": phi.to_dict(), "cs": phis.to_dict(), "section_line": line.to_dict(),
           "invariance_defect": {"cu": invariance_defect(m, phi), "cs": invariance_defect(m, phis)},
           "saddles": {"P": P, "Q": Q}, "cones": cones.to_dict(),
           "convergence": {"cu": phi.log, "cs": phis.log}}
    return res, {"surface_cu.csv": phi.to_csv, "surface_cs.csv": phis.to_csv}


def cmd_cantor(cfg, args):
    sysm = cfg.system
    out, arts = {}, {}
    for name, make in (("gamma", ifs_from_gamma), ("sigma", ifs_from_sigma)):
        ifs = make(sysm, cfg.signs)
        S = refine(ifs, cfg.depth)
        t = ifs_thickness(ifs, cfg.depth)
        try:
            ss = selfsimilar_thickness(ifs)
        except PreconditionViolated as exc:
            ss = f"n/a: {exc}"
        out[name] = {"ifs": ifs.to_dict(), "depth": cfg.depth, "intervals": len(S),
                     "hull": S.hull.as_list(), "thickness": t.to_dict(), "selfsimilar_thickness": ss}
        arts[f"cantor_{name}.csv"] = S.to_csv
    k = shape_constants(sysm)
    out["shape_constants"] = k.to_dict()
    return out, arts


def cmd_intersect(cfg, args):
    m = _map(cfg)
    om = omega_sets(m, cfg.depth)
    gl = gap_lemma(om.omega1, om.omega2)
    inter = intersect(om.omega1, om.omega2)
    res = {"omega": om.to_dict(), "gap_lemma": gl.to_dict(), "intersection_intervals": len(inter),
           "intersection_nonempty_by_depth": [not intersect(a, b).empty for a, b in zip(om.levels1, om.levels2)]}
    try:
        res["hky"] = hky_check(om.omega1, om.omega2, cfg.hky_eps).to_dict()
    except LabError as exc:
        res["hky"] = exc.to_dict()
    arts = {"omega1.csv": om.omega1.to_csv, "omega2.csv": om.omega2.to_csv}
    if not inter.empty:
        arts["intersection.csv"] = inter.to_csv
    return res, arts


def _cloud(cfg, which):
    m = _map(cfg)
    if which == "H":
        sec = _section(cfg, "u=1")
        return sample_H(m, sec, cfg.grid, cfg.n_fwd, cfg.n_back, cfg.transient)
    if which == "unstable":
        P, _ = fixed_saddles(m)
        sec = _section(cfg, f"s={float(P[2])!r}")
        return sample_invariant_set(m, "unstable", sec, cfg.grid, cfg.n_back, cfg.transient)
    _, Q = fixed_saddles(m)
    sec = _section(cfg, f"u={float(Q[0])!r}")
    return sample_invariant_set(m, "stable", sec, cfg.grid, cfg.n_fwd, cfg.transient)


def _box_or_error(data, scales):
    try:
        return box_dimension(data, scales).to_dict()
    except LabError as exc:
        return exc.to_dict()


def cmd_render(cfg, args):
    cloud = _cloud(cfg, args.which)
    res = {"which": args.which, "section": cloud.section.to_dict(), "params": cloud.params, "points": len(cloud)}
    res["box"] = _box_or_error(cloud, cfg.scales)
    stem = f"render_{args.which}"
    return res, {f"{stem}.csv": cloud.to_csv, f"{stem}.pgm": lambda p: render_pgm(cloud, p)}


def cmd_boxdim(cfg, args):
    sysm = cfg.system
    res = {}
    for name, make in (("gamma", ifs_from_gamma), ("sigma", ifs_from_sigma)):
        try:
            res[name] = box_dimension(refine(make(sysm, cfg.signs), cfg.depth), cfg.scales).to_dict()
        except LabError as exc:
            res[name] = exc.to_dict()
    cloud = _cloud(cfg, args.which)
    res[f"section_{args.which}"] = {"section": cloud.section.to_dict(), "points": len(cloud),
                                    "box": _box_or_error(cloud, cfg.scales)}
    return res, {}


def cmd_theorem_a(cfg, args):
    m = _map(cfg)
    return theorem_a_report(cfg.system, m, cfg.depth, cfg.grid, cfg.transient).to_dict(), {}


def cmd_theorem_b(cfg, args):
    m = _map(cfg)
    return theorem_b_report(cfg.system, m, cfg.depth, cfg.tau0).to_dict(), {}


_DISPATCH = {"validate": cmd_validate, "constants": cmd_constants, "surface": cmd_surface,
             "cantor": cmd_cantor, "intersect": cmd_intersect, "render": cmd_render,
             "boxdim": cmd_boxdim, "theorem-a": cmd_theorem_a, "theorem-b": cmd_theorem_b}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="horseshoe-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("config", help="JSON run configuration")
    ap.add_argument("--depth", type=int)
    ap.add_argument("--grid", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--tau0", type=float)
    ap.add_argument("--output-dir")
    ap.add_argument("--which", choices=("H", "unstable", "stable"), default="H",
                    help="set sampled by render/boxdim")
    ap.add_argument("--threads", type=int, default=0, help="worker threads for numpy (0 = library default)")
    ap.add_argument("--quiet", action="store_true", help="do not echo the JSON result")
    return ap


def _fail(exc, code: int) -> int:
    d = exc.to_dict() if hasattr(exc, "to_dict") else {"error": type(exc).__name__, "message": str(exc)}
    sys.stderr.write(json.dumps(d, sort_keys=True) + "\n")
    return code


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads > 0:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    try:
        cfg = load_config(args.config).override(depth=args.depth, grid=args.grid, seed=args.seed,
                                                tau0=args.tau0, output_dir=args.output_dir)
    except ConfigError as exc:
        return _fail(exc, 2)
    try:
        result, artifacts = _DISPATCH[args.command](cfg, args)
    except LabError as exc:
        return _fail(exc, 1)
    except ConfigError as exc:
        return _fail(exc, 2)
    doc = {"command": args.command, "config_sha256": cfg.sha256, "tool_version": __version__,
           "result": _clean(result)}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    try:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.command}.json").write_text(text)
        for name, writer in artifacts.items():
            writer(out / name)
    except OSError as exc:
        return _fail(ConfigError(f"cannot write artifacts: {exc}"), 2)
    if not args.quiet:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
