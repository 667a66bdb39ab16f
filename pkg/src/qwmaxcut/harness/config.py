"""Experiment configuration: one TOML file per run, validated up front.

Every experiment names a ``kind``, an instance population, an output
directory, and kind-specific parameter tables. All per-instance seeds are
derived deterministically from the master seed, so a config file pins the
entire run byte for byte.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..graphs import DEFAULT_EDGE_PROBABILITY

EXPERIMENT_KINDS = ("gamma_sweep", "time_series", "thermal_stats",
                    "dos_histogram", "msqw", "floquet_sweep", "shorttime")
SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class InstanceSpec:
    family: str
    sizes: tuple[int, ...]
    count: int
    master_seed: int
    p: float = DEFAULT_EDGE_PROBABILITY
    d: int = 3

    def seeds(self) -> np.ndarray:
        """One 64-bit seed per (size, instance), row-major in size then index."""
        total = len(self.sizes) * self.count
        return np.random.SeedSequence(self.master_seed).generate_state(
            total, dtype=np.uint64)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    instances: InstanceSpec
    output_dir: Path
    threads: int = 1
    params: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict)   # parsed TOML echo for the manifest


def _require(table: dict, key: str, context: str):
    if key not in table:
        raise ConfigError(f"missing required key '{key}' in {context}")
    return table[key]


def _as_int(value, context: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{context} must be an integer, got {value!r}")
    return value


def parse_config(data: dict, base_dir: Path | None = None) -> ExperimentConfig:
    kind = _require(data, "kind", "the top level")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(
            f"unknown experiment kind {kind!r}; expected one of {EXPERIMENT_KINDS}")

    inst = _require(data, "instances", "the top level")
    family = _require(inst, "family", "[instances]")
    if family not in ("binomial", "regular"):
        raise ConfigError(f"[instances] family must be binomial or regular, got {family!r}")
    sizes = _require(inst, "sizes", "[instances]")
    if not sizes or not all(isinstance(s, int) and 2 <= s for s in sizes):
        raise ConfigError(f"[instances] sizes must be integers >= 2, got {sizes!r}")
    count = _as_int(_require(inst, "count", "[instances]"), "[instances] count")
    if count < 1:
        raise ConfigError("[instances] count must be at least 1")
    master_seed = _as_int(_require(inst, "master_seed", "[instances]"),
                          "[instances] master_seed")
    p = float(inst.get("p", DEFAULT_EDGE_PROBABILITY))
    if not (0.0 <= p <= 1.0):
        raise ConfigError(f"[instances] p must lie in [0, 1], got {p}")
    d = _as_int(inst.get("d", 3), "[instances] d")
    if family == "regular":
        for s in sizes:
            if (s * d) % 2 != 0 or d >= s:
                raise ConfigError(
                    f"regular family needs even n*d and d < n; n={s}, d={d}")

    out = _require(data, "output", "the top level")
    out_dir = Path(_require(out, "dir", "[output]"))
    if base_dir is not None and not out_dir.is_absolute():
        out_dir = base_dir / out_dir

    run = data.get("run", {})
    threads = _as_int(run.get("threads", 1), "[run] threads")
    if threads < 1:
        raise ConfigError("[run] threads must be at least 1")

    params = dict(data.get(kind, {}))
    _validate_params(kind, params)

    spec = InstanceSpec(family=family, sizes=tuple(sizes), count=count,
                        master_seed=master_seed, p=p, d=d)
    return ExperimentConfig(kind=kind, instances=spec, output_dir=out_dir,
                            threads=threads, params=params, source=data)


def _validate_params(kind: str, params: dict):
    def check_grid(key):
        grid = params.get(key)
        if grid is None:
            return
        if (not isinstance(grid, dict)
                or not all(k in grid for k in ("lo", "hi", "step"))):
            raise ConfigError(f"[{kind}] {key} needs lo/hi/step entries")
        if not (0 < grid["lo"] <= grid["hi"] and grid["step"] > 0):
            raise ConfigError(f"[{kind}] {key} must satisfy 0 < lo <= hi, step > 0")

    if kind == "gamma_sweep":
        check_grid("grid")
    elif kind == "thermal_stats":
        strategies = params.get("strategies", ["brute"])
        for s in strategies:
            if s not in ("brute", "heuristic", "gaussian_opt", "emg_opt"):
                raise ConfigError(f"[thermal_stats] unknown strategy {s!r}")
        params["strategies"] = list(strategies)
        check_grid("coarse")
    elif kind == "time_series":
        if params.get("samples", 2000) < 2:
            raise ConfigError("[time_series] samples must be at least 2")
    elif kind == "msqw":
        gammas = params.get("gammas", [0.5, 1.0, 1.5, 2.0, 2.5])
        if sorted(gammas) != list(gammas):
            raise ConfigError("[msqw] gammas must be non-decreasing")
        params["gammas"] = [float(g) for g in gammas]
        if params.get("duration", 20.0) <= 0:
            raise ConfigError("[msqw] duration must be positive")
    elif kind == "floquet_sweep":
        taus = params.get("taus", [0.2])
        if not all(t > 0 for t in taus):
            raise ConfigError("[floquet_sweep] taus must be positive")
        params["taus"] = [float(t) for t in taus]
    elif kind == "shorttime":
        gammas = params.get("gammas", [0.05, 1.0])
        if not all(g > 0 for g in gammas):
            raise ConfigError("[shorttime] gammas must be positive")
        params["gammas"] = [float(g) for g in gammas]
    elif kind == "dos_histogram":
        if params.get("bins", 100) < 2:
            raise ConfigError("[dos_histogram] bins must be at least 2")


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}")
    return parse_config(data, base_dir=path.parent)
