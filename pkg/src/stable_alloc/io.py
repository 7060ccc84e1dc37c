"""Persistence: allocation CSV + JSON sidecar, and experiment configuration.

Allocation files hold ``cell_index,center_index`` rows (``-1`` = unclaimed).
The sidecar ``<name>.json`` records region, resolution, appetite, quota,
algorithm, seed and the centers file (relative to the sidecar's directory).
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .allocator import ALGORITHMS, Allocation
from .errors import InvalidInputError
from .geometry import Region
from .grid import build_grid
from .sources import load_centers

ALLOCATION_HEADER = "cell_index,center_index"


def format_alpha(alpha) -> object:
    if isinstance(alpha, str):
        return alpha
    return "inf" if math.isinf(alpha) else float(alpha)


def parse_alpha(value) -> float | str:
    """A float, ``inf`` or the literal ``critical``."""
    if isinstance(value, (int, float)):
        alpha = float(value)
    else:
        text = str(value).strip().lower()
        if text == "critical":
            return "critical"
        if text in ("inf", "infinite", "infinity"):
            return math.inf
        try:
            alpha = float(text)
        except ValueError:
            raise InvalidInputError(f"appetite must be a number, 'inf' or 'critical', got {value!r}") from None
    if math.isnan(alpha) or alpha < 0:
        raise InvalidInputError(f"appetite must be >= 0, got {value!r}")
    return alpha


def save_allocation(alloc: Allocation, path, centers_file: str = "centers.csv", seed=None) -> None:
    path = Path(path)
    rows = [ALLOCATION_HEADER]
    rows.extend(f"{i},{c}" for i, c in enumerate(alloc.assignment.tolist()))
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    meta = {
        "region": alloc.grid.region.to_dict(),
        "resolution": list(alloc.grid.resolution),
        "alpha": format_alpha(alloc.alpha),
        "quota": int(alloc.quota),
        "algorithm": alloc.algorithm,
        "seed": seed,
        "centers_file": centers_file,
        "n_cells": alloc.grid.n_cells,
        "n_centers": len(alloc.centers),
    }
    sidecar(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def sidecar(path) -> Path:
    return Path(path).with_suffix(".json")


def load_allocation(path) -> Allocation:
    path = Path(path)
    meta = json.loads(sidecar(path).read_text(encoding="utf-8"))
    region = Region.from_dict(meta["region"])
    grid = build_grid(region, tuple(meta["resolution"]))
    centers = load_centers(path.parent / meta["centers_file"], region)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != ALLOCATION_HEADER:
        raise InvalidInputError(f"{path}: header must be {ALLOCATION_HEADER!r}")
    assignment = np.full(grid.n_cells, -2, dtype=np.int64)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            i, c = (int(v) for v in line.split(","))
        except ValueError:
            raise InvalidInputError(f"{path}: line {lineno}: expected two integers") from None
        if not 0 <= i < grid.n_cells or assignment[i] != -2:
            raise InvalidInputError(f"{path}: line {lineno}: bad or repeated cell index {i}")
        assignment[i] = c
    if (assignment == -2).any():
        raise InvalidInputError(f"{path}: {int((assignment == -2).sum())} cells missing")
    alpha = parse_alpha(meta["alpha"])
    return Allocation(grid, centers, alpha, int(meta["quota"]), assignment, meta.get("algorithm", "greedy"))


@dataclass
class ExperimentConfig:
    """One allocation experiment.

    ``source`` is one of ``{"kind": "poisson", "intensity": l}``,
    ``{"kind": "uniform", "count": n}``, ``{"kind": "lattice", "spacing": s, "jitter": j}``
    or ``{"kind": "file", "path": p}``.  ``alpha`` may be ``inf`` or
    ``"critical"`` (quota = cells / centers, which must divide exactly).
    """

    region: str = "torus"
    sides: tuple = (16.0, 16.0)
    resolution: tuple = (64, 64)
    source: dict = field(default_factory=lambda: {"kind": "poisson", "intensity": 1.0})
    alpha: object = 1.0
    algorithm: str = "greedy"
    seed: int = 0
    out: str | None = None
    render: dict | None = None

    def __post_init__(self):
        self.sides = tuple(float(s) for s in self.sides)
        self.resolution = tuple(int(m) for m in self.resolution)
        self.alpha = parse_alpha(self.alpha)
        self.seed = int(self.seed)
        self.source = dict(self.source)
        if self.algorithm not in ALGORITHMS:
            raise InvalidInputError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if len(self.resolution) == 1 and len(self.sides) > 1:
            self.resolution = self.resolution * len(self.sides)
        kind = self.source.get("kind")
        if kind not in ("poisson", "uniform", "lattice", "file"):
            raise InvalidInputError(f"unknown source kind {kind!r}")
        self.region_obj()  # validates kind and sides

    def region_obj(self) -> Region:
        return Region(self.region, self.sides)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["sides"] = list(self.sides)
        d["resolution"] = list(self.resolution)
        d["alpha"] = format_alpha(self.alpha)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def replace(self, **changes) -> "ExperimentConfig":
        data = self.to_dict()
        data.update(changes)
        return ExperimentConfig.from_dict(data)


def save_config(config: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid JSON ({exc})") from None
    return ExperimentConfig.from_dict(data)
