"""Running single experiments and parameter sweeps."""
from __future__ import annotations

import csv
import io as _io
import itertools
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .allocator import allocate
from .errors import InvalidInputError
from .grid import build_grid, critical_alpha, quantization_error
from .io import ExperimentConfig, format_alpha, save_allocation, save_config
from .render import RenderSpec, render
from .sources import load_centers, sample_lattice, sample_poisson, sample_uniform, save_centers
from .verifier import stability_report

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_UNSTABLE = 2
EXIT_IO = 3


def build_centers(config: ExperimentConfig):
    region = config.region_obj()
    src = config.source
    kind = src["kind"]
    if kind == "poisson":
        return sample_poisson(float(src.get("intensity", 1.0)), region, config.seed)
    if kind == "uniform":
        return sample_uniform(int(src["count"]), region, config.seed)
    if kind == "lattice":
        return sample_lattice(region, float(src["spacing"]), float(src.get("jitter", 0.0)), config.seed)
    return load_centers(src["path"], region)


def resolve_alpha(config: ExperimentConfig, grid, n_centers: int) -> float:
    if config.alpha == "critical":
        return critical_alpha(grid, n_centers)
    return float(config.alpha)


def compute(config: ExperimentConfig, verify: bool = True):
    """Generate centers, allocate and (optionally) verify; returns ``(allocation, stability report)``."""
    grid = build_grid(config.region_obj(), config.resolution)
    cs = build_centers(config)
    alpha = resolve_alpha(config, grid, len(cs))
    alloc = allocate(grid, cs, alpha, config.algorithm)
    report = stability_report(alloc) if verify else None
    return alloc, report


def summarize(alloc) -> dict:
    """Phase statistics plus distance and territory summaries, as plain JSON types."""
    ps = analysis.phase_stats(alloc)
    X = alloc.allocation_distances()
    claimed = X[np.isfinite(X)]
    geo = analysis.territory_geometry(alloc)
    comps = [t.components for t in geo if t.load]
    radii = [t.radius for t in geo if t.load]
    return {
        "n_cells": alloc.grid.n_cells,
        "n_centers": len(alloc.centers),
        "cell_mass": alloc.grid.cell_mass,
        "quota": int(alloc.quota),
        "alpha": format_alpha(alloc.alpha),
        "quantization_error": quantization_error(alloc.alpha, alloc.grid),
        "intensity": ps.intensity,
        "phase": ps.phase,
        "unclaimed_fraction": ps.unclaimed_fraction,
        "mean_residual_appetite": ps.mean_residual_appetite,
        "identity_gap": ps.identity_gap if math.isfinite(ps.identity_gap) else None,
        "mean_distance": float(claimed.mean()) if claimed.size else None,
        "max_distance": float(claimed.max()) if claimed.size else None,
        "max_components": max(comps) if comps else 0,
        "mean_components": float(np.mean(comps)) if comps else 0.0,
        "max_territory_radius": max(radii) if radii else 0.0,
    }


@dataclass
class RunResult:
    exit_code: int
    stats: dict
    stability: dict
    files: dict = field(default_factory=dict)


def run(config: ExperimentConfig) -> RunResult:
    """Full experiment; writes centers, allocation, stats and optional image into ``config.out``."""
    alloc, report = compute(config)
    stats = summarize(alloc)
    stats["stable"] = report["stable"]
    stats["n_unstable_pairs"] = report["n_unstable_pairs"]
    stats["seed"] = config.seed
    stats["algorithm"] = config.algorithm
    files = {}
    if config.out:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        files["centers"] = out / "centers.csv"
        save_centers(alloc.centers, files["centers"])
        files["allocation"] = out / "allocation.csv"
        save_allocation(alloc, files["allocation"], "centers.csv", seed=config.seed)
        files["config"] = out / "config.json"
        save_config(config, files["config"])
        files["stats"] = out / "stats.json"
        files["stats"].write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        files["verify"] = out / "verify.json"
        files["verify"].write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        if config.render is not None:
            spec = RenderSpec(**config.render)
            files["image"] = out / "allocation.ppm"
            files["image"].write_bytes(render(alloc, spec))
    code = EXIT_OK if report["stable"] and report["valid"] else EXIT_UNSTABLE
    if code != EXIT_OK:
        log.error("verification failed: %d unstable pairs", report["n_unstable_pairs"])
    return RunResult(code, stats, report, {k: str(v) for k, v in files.items()})


# sweep ---------------------------------------------------------------------

SWEEP_PARAMS = ("alpha", "intensity", "count", "spacing", "jitter", "sides", "resolution", "algorithm", "region")
SUMMARY_FIELDS = ("unclaimed_fraction", "mean_residual_appetite", "mean_distance", "n_centers")


def _apply_param(config: ExperimentConfig, name: str, value) -> ExperimentConfig:
    if name in ("intensity", "count", "spacing", "jitter"):
        src = dict(config.source)
        src[name] = value
        return config.replace(source=src)
    if name in ("sides", "resolution") and not isinstance(value, (list, tuple)):
        value = (value,) * len(config.sides)
    if name not in SWEEP_PARAMS:
        raise InvalidInputError(f"cannot sweep over {name!r}; choose from {SWEEP_PARAMS}")
    return config.replace(**{name: value})


def _sweep_one(job):
    names, values, seed, base = job
    row = {"kind": "run", "seed": seed}
    row.update({n: _fmt_param(v) for n, v in zip(names, values)})
    try:
        cfg = base
        for n, v in zip(names, values):
            cfg = _apply_param(cfg, n, v)
        cfg = cfg.replace(seed=seed, out=None, render=None)
        alloc, report = compute(cfg)
        s = summarize(alloc)
        row.update({
            "status": "ok" if report["stable"] else "unstable",
            "n_centers": s["n_centers"],
            "quota": s["quota"],
            "unclaimed_fraction": s["unclaimed_fraction"],
            "mean_residual_appetite": s["mean_residual_appetite"],
            "mean_distance": s["mean_distance"],
            "n_unstable_pairs": report["n_unstable_pairs"],
            "error": "",
        })
    except Exception as exc:  # recorded, the sweep continues
        row.update({"status": "error", "error": f"{type(exc).__name__}: {exc}"})
    return row


def _fmt_param(v):
    if isinstance(v, (list, tuple)):
        return ";".join(_fmt_param(x) for x in v)
    if isinstance(v, float):
        return format_alpha(v) if math.isinf(v) else repr(v)
    return str(v)


def sweep_threads() -> int:
    env = os.environ.get("STABLE_ALLOC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InvalidInputError(f"STABLE_ALLOC_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def sweep(base: ExperimentConfig, parameters: dict, seeds, threads: int | None = None) -> list:
    """Run every (parameter point, seed) combination.

    Returns run rows sorted by (parameter point, seed), each parameter
    point followed by a summary row with means and standard errors.
    """
    seeds = list(seeds)
    if not seeds:
        raise InvalidInputError("sweep needs at least one seed")
    if not parameters or any(len(v) == 0 for v in parameters.values()):
        raise InvalidInputError("sweep needs a nonempty parameter grid")
    names = list(parameters)
    for n in names:
        if n not in SWEEP_PARAMS:
            raise InvalidInputError(f"cannot sweep over {n!r}; choose from {SWEEP_PARAMS}")
    points = list(itertools.product(*(parameters[n] for n in names)))
    jobs = [(names, p, s, base) for p in points for s in seeds]
    threads = threads or sweep_threads()
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]
    # map() already preserves submission order, which is (point, seed) order
    rows = []
    for i, p in enumerate(points):
        block = results[i * len(seeds):(i + 1) * len(seeds)]
        rows.extend(block)
        summary = {"kind": "summary", "seed": ""}
        summary.update({n: _fmt_param(v) for n, v in zip(names, p)})
        ok = [r for r in block if r.get("status") in ("ok", "unstable")]
        summary["status"] = f"{len(ok)}/{len(block)} ok"
        for f in SUMMARY_FIELDS:
            vals = np.array([r[f] for r in ok if r.get(f) is not None], dtype=float)
            summary[f] = float(vals.mean()) if vals.size else None
            summary[f + "_se"] = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else None
        rows.append(summary)
    return rows


def sweep_csv(rows, parameter_names) -> str:
    fields = ["kind", *parameter_names, "seed", "status", "n_centers", "quota",
              "unclaimed_fraction", "unclaimed_fraction_se",
              "mean_residual_appetite", "mean_residual_appetite_se",
              "mean_distance", "mean_distance_se", "n_centers_se", "n_unstable_pairs", "error"]
    buf = _io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: ("" if v is None else (repr(v) if isinstance(v, float) else v)) for k, v in r.items()})
    return buf.getvalue()
