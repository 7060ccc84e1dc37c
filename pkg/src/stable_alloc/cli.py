"""Command-line interface.

Exit codes: 0 success, 1 invalid input, 2 verification failure, 3 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import analysis
from .errors import InvalidInputError
from .experiment import (
    EXIT_INVALID,
    EXIT_IO,
    EXIT_OK,
    EXIT_UNSTABLE,
    build_centers,
    run,
    summarize,
    sweep,
    sweep_csv,
)
from .io import ExperimentConfig, load_allocation, load_config, parse_alpha
from .oracle import TinyInstance, oracle_deferred_acceptance, oracle_enumerate
from .render import RenderSpec, render
from .sources import save_centers
from .verifier import stability_report

log = logging.getLogger("stable_alloc")


def _floats(text):
    return tuple(float(v) for v in text.split(","))


def _ints(text):
    return tuple(int(v) for v in text.split(","))


def _add_experiment_flags(p):
    p.add_argument("--config", help="JSON experiment config; flags override it")
    p.add_argument("--region", choices=("torus", "box"))
    p.add_argument("--sides", type=_floats, help="side lengths a[,b[,c]]")
    p.add_argument("--resolution", type=_ints, help="cells per side m[,m2[,m3]]")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--lambda", dest="intensity", type=float, help="Poisson intensity")
    src.add_argument("--count", type=int, help="fixed number of uniform centers")
    src.add_argument("--lattice", help="spacing[,jitter]")
    src.add_argument("--centers", help="centers CSV file")
    p.add_argument("--alpha", help="appetite: a number, 'inf' or 'critical'")
    p.add_argument("--algo", choices=("site", "center", "greedy"))
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--render", help="ppm[:px-per-unit]")
    p.add_argument("--style", choices=("flat", "annuli"))
    p.add_argument("--palette-seed", type=int)


def _render_spec(args, base=None):
    spec = dict(base or {})
    if args.render:
        fmt, _, ppu = args.render.partition(":")
        if fmt != "ppm":
            raise InvalidInputError(f"only ppm rendering is supported, got {fmt!r}")
        if ppu:
            spec["px_per_unit"] = float(ppu)
    if getattr(args, "style", None):
        spec["style"] = args.style
    if getattr(args, "palette_seed", None) is not None:
        spec["palette_seed"] = args.palette_seed
    return spec


def config_from_args(args) -> ExperimentConfig:
    data = load_config(args.config).to_dict() if args.config else ExperimentConfig().to_dict()
    if args.sides:
        data["sides"] = list(args.sides)
        if not args.resolution and len(data["resolution"]) != len(args.sides):
            data["resolution"] = [data["resolution"][0]] * len(args.sides)
    if args.region:
        data["region"] = args.region
    if args.resolution:
        data["resolution"] = list(args.resolution)
    if args.intensity is not None:
        data["source"] = {"kind": "poisson", "intensity": args.intensity}
    elif args.count is not None:
        data["source"] = {"kind": "uniform", "count": args.count}
    elif args.lattice:
        spacing, _, jitter = args.lattice.partition(",")
        data["source"] = {"kind": "lattice", "spacing": float(spacing), "jitter": float(jitter or 0.0)}
    elif args.centers:
        data["source"] = {"kind": "file", "path": args.centers}
    if args.alpha is not None:
        data["alpha"] = args.alpha
    if args.algo:
        data["algorithm"] = args.algo
    if args.seed is not None:
        data["seed"] = args.seed
    if args.out:
        data["out"] = args.out
    if args.render or args.style or args.palette_seed is not None:
        data["render"] = _render_spec(args, data.get("render"))
    return ExperimentConfig.from_dict(data)


def _emit(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json_default(o):
    if isinstance(o, float) and math.isinf(o):
        return "inf"
    if hasattr(o, "tolist"):
        return o.tolist()
    raise TypeError(type(o))


def cmd_generate(args):
    cfg = config_from_args(args)
    cs = build_centers(cfg)
    out = Path(args.out or "centers.csv")
    if out.suffix != ".csv":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "centers.csv"
    save_centers(cs, out)
    _emit({"centers": len(cs), "intensity": cs.intensity, "path": str(out)})
    return EXIT_OK


def cmd_allocate(args):
    cfg = config_from_args(args)
    if not cfg.out:
        raise InvalidInputError("allocate needs --out")
    result = run(cfg)
    _emit({"exit_code": result.exit_code, "files": result.files, "stats": result.stats})
    return result.exit_code


def _allocation_path(args):
    p = Path(args.allocation)
    return p / "allocation.csv" if p.is_dir() else p


def cmd_verify(args):
    alloc = load_allocation(_allocation_path(args))
    report = stability_report(alloc)
    _emit(report, args.report)
    return EXIT_OK if report["stable"] and report["valid"] else EXIT_UNSTABLE


def cmd_stats(args):
    alloc = load_allocation(_allocation_path(args))
    stats = summarize(alloc)
    if args.territories:
        stats["territories"] = [t.__dict__ for t in analysis.territory_geometry(alloc)]
    if args.probe is not None:
        stats["demand"] = analysis.demand_diagnostics(alloc, args.probe).to_dict()
    _emit(stats, args.report)
    return EXIT_OK


def cmd_render(args):
    alloc = load_allocation(_allocation_path(args))
    spec = RenderSpec(**_render_spec(args))
    data = render(alloc, spec)
    out = Path(args.image)
    out.write_bytes(data)
    _emit({"image": str(out), "bytes": len(data)})
    return EXIT_OK


def _parse_grid(items):
    params = {}
    for item in items:
        name, _, values = item.partition("=")
        if not values:
            raise InvalidInputError(f"--grid expects name=v1,v2,..., got {item!r}")
        name = name.strip()
        conv = {
            "alpha": parse_alpha,
            "intensity": float, "lambda": float, "spacing": float, "jitter": float,
            "count": int, "algorithm": str, "region": str,
            "sides": float, "resolution": int,
        }.get(name, str)
        if name == "lambda":
            name = "intensity"
        params[name] = [conv(v) for v in values.split(",")]
    return params


def _parse_seeds(text):
    if ":" in text:
        a, b = text.split(":")
        return list(range(int(a), int(b)))
    return [int(s) for s in text.split(",") if s.strip()]


def cmd_sweep(args):
    base = config_from_args(args)
    params = _parse_grid(args.grid or [])
    seeds = _parse_seeds(args.seeds)
    rows = sweep(base, params, seeds, args.threads)
    text = sweep_csv(rows, list(params))
    if args.csv:
        Path(args.csv).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_oracle(args):
    data = json.loads(Path(args.instance).read_text(encoding="utf-8"))
    quotas = data.get("quotas")
    if quotas is None:
        quotas = [data["quota"]] * len(data["distances"][0])
    inst = TinyInstance(data["distances"], quotas)
    _emit({
        "sites_propose": oracle_deferred_acceptance(inst, "sites"),
        "centers_propose": oracle_deferred_acceptance(inst, "centers"),
        "stable_assignments": oracle_enumerate(inst),
        "tie_free": inst.is_tie_free(),
    })
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="stable-alloc", description="Stable allocations of Lebesgue measure to point sets.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{generate,allocate,verify,stats,render,sweep}")

    p = sub.add_parser("generate", help="write a centers CSV")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("allocate", help="run one experiment and write its artifacts")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("verify", help="check stability of a saved allocation")
    p.add_argument("allocation", help="allocation CSV or run directory")
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("stats", help="phase and geometry statistics of a saved allocation")
    p.add_argument("allocation")
    p.add_argument("--report")
    p.add_argument("--territories", action="store_true", help="include per-center geometry")
    p.add_argument("--probe", type=int, help="center index for demand diagnostics")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("render", help="draw a saved 2-d allocation as PPM")
    p.add_argument("allocation")
    p.add_argument("--image", required=True)
    p.add_argument("--render", default="ppm", help="ppm[:px-per-unit]")
    p.add_argument("--style", choices=("flat", "annuli"))
    p.add_argument("--palette-seed", type=int)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("sweep", help="run a parameter grid over seeds and aggregate")
    _add_experiment_flags(p)
    p.add_argument("--grid", action="append", help="name=v1,v2,... (repeatable)")
    p.add_argument("--seeds", default="0", help="comma list or start:stop")
    p.add_argument("--threads", type=int, help="overrides STABLE_ALLOC_THREADS")
    p.add_argument("--csv", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle")  # debugging aid, not listed in help
    p.add_argument("instance", help="JSON with 'distances' and 'quota' or 'quotas'")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InvalidInputError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INVALID
    except (OSError, json.JSONDecodeError) as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO
    except (KeyError, ValueError, TypeError) as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
