"""Experiment drivers: instance ensembles, parallel sweeps, deterministic CSVs.

Each experiment kind maps one (instance, parameter) unit to a worker function;
units run in a process pool (BLAS pinned to one thread per worker) and results
are gathered in task order, so re-running a config byte-reproduces every CSV.
The manifest echoes the config, documents the column schemas and isolates the
only nondeterministic fields (timing).
"""

from __future__ import annotations

import json
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .. import floquet, msqw, shorttime, thermal
from ..dynamics import (entanglement_entropy, evolve, expand_plus_state,
                        random_half_subset, restrict_plus_state,
                        steady_state_hp, time_average_hp)
from ..graphs import Graph, gen_binomial, gen_regular, is_connected, to_json
from ..operators import (diagonalize, problem_diagonal, sector_walk,
                         uniform_plus_state)
from .config import SCHEMA_VERSION, ExperimentConfig

NORM_DRIFT_TOL = 1e-8

COLUMNS = {
    "gamma_sweep": ["instance_id", "n", "family", "gamma", "hp_bar"],
    "thermal_stats": ["instance_id", "n", "family", "gamma", "strategy",
                      "beta_exact", "beta_gauss", "beta_emg", "hp_dyn",
                      "hp_gibbs", "hp_gauss", "hp_emg", "entropy_meas",
                      "S_norm", "S_EM"],
    "msqw": ["instance_id", "stage", "gamma", "target_energy", "beta",
             "hp_pred", "hp_dyn_steady"],
    "floquet_sweep": ["instance_id", "tau", "gamma", "hp_floquet", "hp_ctqw",
                      "hp_pred_model", "beta_model", "corrected"],
    "dos_histogram": ["instance_id", "n", "family", "gamma", "sse_gaussian",
                      "sse_emg"],
    "time_series": ["t", "hp", "hd", "hqw", "p_ground", "entropy"],
    "shorttime": ["t", "hp_2d", "eps_2d"],
}


class ExperimentError(RuntimeError):
    pass


@dataclass
class UnitResult:
    instance_id: str
    rows: dict                 # filename -> list of row dicts
    files: dict                # filename -> csv text (per-instance series)
    graph_json: str
    graph_meta: dict
    error: str | None = None


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def rows_to_csv(columns: list[str], rows: list[dict]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def series_to_csv(columns: list[str], arrays: list[np.ndarray]) -> str:
    lines = [",".join(columns)]
    for vals in zip(*arrays):
        lines.append(",".join(_fmt(v) for v in vals))
    return "\n".join(lines) + "\n"


def make_instance(family: str, n: int, seed: int, p: float, d: int) -> Graph:
    """Deterministic instance; reseeds (seed+1, ...) until the edge set is nonempty."""
    for bump in range(100):
        s = (seed + bump) % (1 << 64)
        g = gen_binomial(n, p, s) if family == "binomial" else gen_regular(n, d, s)
        if g.kappa2 > 0:
            return g
    raise ExperimentError(f"could not draw a nonempty graph (n={n}, seed={seed})")


def _check_drift(traj, n: int, where: str):
    norm_drift = float(np.abs(traj.observables["norm"] - 1.0).max())
    if norm_drift > NORM_DRIFT_TOL:
        raise ExperimentError(f"{where}: norm drift {norm_drift:.2e}")
    hqw = traj.observables["hqw"]
    if float(np.abs(hqw - hqw[0]).max()) > NORM_DRIFT_TOL * n:
        raise ExperimentError(f"{where}: energy drift along a constant segment")


def _check_spinflip(g: Graph):
    d = problem_diagonal(g)
    if not np.array_equal(d, d[::-1]):
        raise ExperimentError("problem diagonal breaks the spin-flip symmetry")


def brute_gamma(g: Graph, coarse: dict, fine_halfwidth: float, fine_step: float):
    """Two-stage grid argmin of the measured steady-state average.

    Coarse pass on (lo, hi, step), then a fine pass of resolution fine_step
    around the coarse winner; either grid is extended while its argmin sits
    on an edge. Returns (gamma, hp_bar, even-sector decomposition at gamma).
    """
    cache: dict[float, float] = {}
    best = {"gamma": None, "hp": np.inf, "spec": None}

    def value(gam: float) -> float:
        key = round(gam, 6)
        if key not in cache:
            spec = diagonalize(sector_walk(g, key))
            hp = time_average_hp(spec, uniform_plus_state(g.n, "spinflip_plus"),
                                 problem_diagonal(g)[: spec.dim])
            cache[key] = hp
            if hp < best["hp"]:
                best.update(gamma=key, hp=hp, spec=spec)
        return cache[key]

    def argmin_on(grid: np.ndarray) -> float:
        vals = [value(float(x)) for x in grid]
        return float(grid[int(np.argmin(vals))])

    lo, hi, step = coarse["lo"], coarse["hi"], coarse["step"]
    grid = np.round(np.arange(lo, hi + 0.5 * step, step), 6)
    for _ in range(6):
        gmin = argmin_on(grid)
        if gmin > grid[0] + 1e-12 and gmin < grid[-1] - 1e-12:
            break
        if gmin <= grid[0] + 1e-12 and grid[0] - step >= 0.05 - 1e-12:
            grid = np.round(np.concatenate([grid[0] - step * np.arange(3, 0, -1), grid]), 6)
            grid = grid[grid >= 0.049]
        else:
            grid = np.round(np.concatenate([grid, grid[-1] + step * np.arange(1, 4)]), 6)
    center = gmin
    fine = np.round(np.arange(center - fine_halfwidth,
                              center + fine_halfwidth + 0.5 * fine_step,
                              fine_step), 6)
    fine = fine[fine >= 0.049]
    for _ in range(6):
        gmin = argmin_on(fine)
        if gmin > fine[0] + 1e-12 and gmin < fine[-1] - 1e-12:
            break
        if gmin <= fine[0] + 1e-12 and fine[0] - fine_step >= 0.049:
            fine = np.round(np.concatenate([[fine[0] - fine_step], fine]), 6)
        else:
            fine = np.round(np.concatenate([fine, [fine[-1] + fine_step]]), 6)
    return best["gamma"], best["hp"], best["spec"]


# --- per-kind unit workers ---------------------------------------------------

def _unit_thermal_stats(g: Graph, instance_id: str, params: dict) -> dict:
    _check_spinflip(g)
    n = g.n
    coarse = params.get("coarse", {"lo": 0.3, "hi": 1.5, "step": 0.2})
    fine_half = params.get("fine_halfwidth", 0.2)
    fine_step = params.get("fine_step", 0.05)
    subset = random_half_subset(n, seed=g.seed ^ 0x5EED)
    hp_diag_full = problem_diagonal(g)
    rows = []
    for strategy in params.get("strategies", ["brute"]):
        if strategy == "brute":
            gamma, hp_dyn, spec = brute_gamma(g, coarse, fine_half, fine_step)
        else:
            gamma, _ = thermal.gamma_select(g, strategy)
            spec = diagonalize(sector_walk(g, gamma))
            hp_dyn = time_average_hp(spec, uniform_plus_state(n, "spinflip_plus"),
                                     hp_diag_full[: spec.dim])
        data = thermal.walk_thermal_data(g, gamma, plus_spec=spec)
        beta_exact = thermal.solve_beta_exact(data, -float(n))
        hp_gibbs = thermal.gibbs_expectation(data, None, beta_exact)
        gauss = thermal.fit_gaussian(g, gamma)
        emg = thermal.fit_dos_model(g, gamma, "emg")
        pg = thermal.hp_model(gauss, g, gamma)
        pe = thermal.hp_model(emg, g, gamma)
        # measured entanglement entropy: mean over a few late-time samples
        psi0 = uniform_plus_state(n, "spinflip_plus")
        amp = spec.states.conj().T @ psi0
        ent = []
        for t in params.get("entropy_times", (60.0, 70.0, 80.0, 90.0, 100.0)):
            red = spec.states @ (np.exp(-1j * spec.energies * t) * amp)
            ent.append(entanglement_entropy(expand_plus_state(red), subset))
        rows.append({
            "instance_id": instance_id, "n": n, "family": g.family,
            "gamma": gamma, "strategy": strategy,
            "beta_exact": beta_exact, "beta_gauss": pg.beta, "beta_emg": pe.beta,
            "hp_dyn": hp_dyn, "hp_gibbs": hp_gibbs,
            "hp_gauss": pg.hp, "hp_emg": pe.hp,
            "entropy_meas": float(np.mean(ent)),
            "S_norm": pg.entropy, "S_EM": pe.entropy,
        })
    return {"results.csv": rows}, {}, {"entropy_subset": list(subset)}


def _unit_gamma_sweep(g: Graph, instance_id: str, params: dict) -> dict:
    _check_spinflip(g)
    grid = params.get("grid", {"lo": 0.05, "hi": 3.0, "step": 0.05})
    gammas = np.round(np.arange(grid["lo"], grid["hi"] + 0.5 * grid["step"],
                                grid["step"]), 6)
    rows = [{"instance_id": instance_id, "n": g.n, "family": g.family,
             "gamma": float(gam), "hp_bar": steady_state_hp(g, float(gam))}
            for gam in gammas]
    return {"results.csv": rows}, {}, {}


def _unit_time_series(g: Graph, instance_id: str, params: dict) -> dict:
    _check_spinflip(g)
    gamma = float(params.get("gamma", 1.0))
    times = np.linspace(0.0, float(params.get("t_max", 100.0)),
                        int(params.get("samples", 2000)))
    subset = random_half_subset(g.n, seed=g.seed ^ 0x5EED)
    op = sector_walk(g, gamma)
    traj = evolve(op, uniform_plus_state(g.n, "spinflip_plus"), times,
                  p_ground=True, entropy_subset=subset)
    _check_drift(traj, g.n, instance_id)
    obs = traj.observables
    text = series_to_csv(COLUMNS["time_series"],
                         [times, obs["hp"], obs["hd"], obs["hqw"],
                          obs["p_ground"], obs["entropy"]])
    return {}, {f"series_{instance_id}.csv": text}, {"entropy_subset": list(subset)}


def _unit_shorttime(g: Graph, instance_id: str, params: dict) -> dict:
    files = {}
    samples = int(params.get("samples", 300))
    for gamma in params.get("gammas", [0.05, 1.0]):
        ana = shorttime.analyze(g, gamma)
        t_max = params.get("t_max")
        if t_max is None:
            horizon = ana.horizon if np.isfinite(ana.horizon) else 10.0
            t_max = 1.5 * horizon * 0.01**0.25   # 1.5x the eps_2d <= 0.01 window
        times = np.linspace(0.0, float(t_max), samples)
        hp2d, eps = shorttime.two_level_prediction(g, gamma, times)
        files[f"st_{instance_id}_g{gamma:g}.csv"] = series_to_csv(
            COLUMNS["shorttime"], [times, hp2d, eps])
    return {}, files, {}


def _unit_msqw(g: Graph, instance_id: str, params: dict) -> dict:
    _check_spinflip(g)
    gammas = params.get("gammas", [0.5, 1.0, 1.5, 2.0, 2.5])
    duration = float(params.get("duration", 20.0))
    schedule = msqw.WalkSchedule(tuple((gam, duration) for gam in gammas))
    samples = int(params.get("samples_per_stage", 400))
    traj = msqw.run_msqw(g, schedule, samples_per_stage=samples)
    for k in range(len(gammas)):
        seg = slice(k * samples, (k + 1) * samples)
        hqw = traj.observables["hqw"][seg]
        if float(np.abs(hqw - hqw[0]).max()) > NORM_DRIFT_TOL * g.n:
            raise ExperimentError(f"{instance_id}: stage {k} energy drift")
    _check_drift_norm_only(traj)
    numeric_rows, emg_rows = [], []
    stages = traj.meta["stages"]
    for rec in stages:
        pred = msqw.predict_stage_numeric(g, schedule, rec.index, rec.entry_state)
        numeric_rows.append({
            "instance_id": instance_id, "stage": rec.index, "gamma": rec.gamma,
            "target_energy": rec.entry_energy, "beta": pred.beta,
            "hp_pred": pred.hp, "hp_dyn_steady": rec.hp_steady})
    target = -float(g.n)
    for rec, pred in zip(stages, msqw.predict_msqw_analytic(g, schedule, "emg")):
        if rec.index > 0:
            prev = emg_rows[-1]
            target = prev["target_energy"] + (rec.gamma - prev["gamma"]) * prev["hp_pred"]
        emg_rows.append({
            "instance_id": instance_id, "stage": rec.index, "gamma": rec.gamma,
            "target_energy": target, "beta": pred.beta,
            "hp_pred": pred.hp, "hp_dyn_steady": rec.hp_steady})
    return {"stages_numeric.csv": numeric_rows, "stages_emg.csv": emg_rows}, {}, {}


def _check_drift_norm_only(traj):
    norm_drift = float(np.abs(traj.observables["norm"] - 1.0).max())
    if norm_drift > NORM_DRIFT_TOL:
        raise ExperimentError(f"norm drift {norm_drift:.2e}")


def _unit_floquet(g: Graph, instance_id: str, params: dict) -> dict:
    _check_spinflip(g)
    gamma = float(params.get("gamma", 1.0))
    dos_kind = params.get("dos", "emg")
    spec = diagonalize(sector_walk(g, gamma))
    hp_red = problem_diagonal(g)[: spec.dim]
    hp_ctqw = time_average_hp(spec, uniform_plus_state(g.n, "spinflip_plus"), hp_red)
    rows = []
    for tau in params.get("taus", [0.2]):
        cfg = floquet.FloquetConfig(tau=float(tau), gamma=gamma)
        dec = floquet.floquet_decompose(g, cfg)
        if abs(float(np.abs(dec.overlaps) ** 2 @ np.ones(dec.overlaps.shape[0])) - 1.0) > 1e-10:
            raise ExperimentError(f"{instance_id}: Floquet overlaps not complete")
        pred = floquet.floquet_thermal_prediction(g, cfg, dos_kind)
        rows.append({"instance_id": instance_id, "tau": float(tau), "gamma": gamma,
                     "hp_floquet": floquet.floquet_steady_hp(dec, hp_red),
                     "hp_ctqw": hp_ctqw, "hp_pred_model": pred.hp,
                     "beta_model": pred.beta, "corrected": False})
        psi_corr = restrict_plus_state(floquet.corrected_initial_state(g, cfg))
        pred_corr = thermal.hp_model(thermal.fit_dos_model(g, gamma, dos_kind), g, gamma)
        rows.append({"instance_id": instance_id, "tau": float(tau), "gamma": gamma,
                     "hp_floquet": floquet.floquet_steady_hp(dec, hp_red, psi0=psi_corr),
                     "hp_ctqw": hp_ctqw, "hp_pred_model": pred_corr.hp,
                     "beta_model": pred_corr.beta, "corrected": True})
    return {"results.csv": rows}, {}, {}


def _unit_dos_histogram(g: Graph, instance_id: str, params: dict) -> dict:
    strategy = params.get("gamma_strategy", "emg_opt")
    if "gamma" in params:
        gamma = float(params["gamma"])
    else:
        gamma, _ = thermal.gamma_select(g, strategy)
    data = thermal.walk_thermal_data(g, gamma, need_hp=False)
    bins = int(params.get("bins", 100))
    density, edges = np.histogram(data.energies, bins=bins, density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    gauss = thermal.fit_gaussian(g, gamma).pdf(centers)
    emg = thermal.fit_dos_model(g, gamma, "emg").pdf(centers)
    text = series_to_csv(["bin_center", "density", "gaussian", "emg"],
                         [centers, density, gauss, emg])
    row = {"instance_id": instance_id, "n": g.n, "family": g.family,
           "gamma": gamma,
           "sse_gaussian": float(np.sum((density - gauss) ** 2)),
           "sse_emg": float(np.sum((density - emg) ** 2))}
    return {"results.csv": [row]}, {f"dos_{instance_id}.csv": text}, {}


_UNIT_FUNCS = {
    "thermal_stats": _unit_thermal_stats,
    "gamma_sweep": _unit_gamma_sweep,
    "time_series": _unit_time_series,
    "shorttime": _unit_shorttime,
    "msqw": _unit_msqw,
    "floquet_sweep": _unit_floquet,
    "dos_histogram": _unit_dos_histogram,
}


def _run_unit(task: tuple) -> UnitResult:
    kind, params, family, n, p, d, seed, instance_id = task
    try:
        g = make_instance(family, n, seed, p, d)
        rows, files, extra_meta = _UNIT_FUNCS[kind](g, instance_id, params)
        meta = {"instance_id": instance_id, "seed": int(g.seed),
                "connected": is_connected(g), **extra_meta}
        return UnitResult(instance_id=instance_id, rows=rows, files=files,
                          graph_json=to_json(g), graph_meta=meta)
    except Exception:
        return UnitResult(instance_id=instance_id, rows={}, files={},
                          graph_json="", graph_meta={},
                          error=traceback.format_exc(limit=10))


def _worker_init():
    try:
        import threadpoolctl
        threadpoolctl.threadpool_limits(limits=1)
    except ImportError:
        pass


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Execute the experiment, write CSVs + graph JSONs + manifest.

    Returns the manifest dict. Instance failures do not abort the batch; they
    are collected in manifest["failures"] (CLI exit code 2).
    """
    t_start = time.time()
    out = Path(cfg.output_dir)
    (out / "graphs").mkdir(parents=True, exist_ok=True)
    inst = cfg.instances
    seeds = inst.seeds()
    tasks = []
    for si, n in enumerate(inst.sizes):
        for i in range(inst.count):
            seed = int(seeds[si * inst.count + i])
            instance_id = f"{inst.family[:3]}-n{n:02d}-i{i:03d}"
            tasks.append((cfg.kind, cfg.params, inst.family, n, inst.p, inst.d,
                          seed, instance_id))

    if cfg.threads > 1 and len(tasks) > 1:
        # fork keeps arbitrary callers picklable-free (spawn would re-import
        # __main__, which breaks scripts run from a pipe or a notebook)
        ctx = get_context("fork")
        with ProcessPoolExecutor(max_workers=cfg.threads, mp_context=ctx,
                                 initializer=_worker_init) as pool:
            results = list(pool.map(_run_unit, tasks, chunksize=1))
    else:
        results = [_run_unit(t) for t in tasks]

    table_rows: dict[str, list] = {}
    graph_meta, failures = [], []
    for res in results:
        if res.error is not None:
            failures.append({"instance_id": res.instance_id, "error": res.error})
            continue
        (out / "graphs" / f"{res.instance_id}.json").write_text(
            res.graph_json + "\n")
        graph_meta.append(res.graph_meta)
        for fname, text in res.files.items():
            (out / fname).write_text(text)
        for fname, rows in res.rows.items():
            table_rows.setdefault(fname, []).extend(rows)

    columns_by_file = {}
    for fname, rows in table_rows.items():
        cols = COLUMNS["msqw"] if cfg.kind == "msqw" else COLUMNS[cfg.kind]
        (out / fname).write_text(rows_to_csv(cols, rows))
        columns_by_file[fname] = cols

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "kind": cfg.kind,
        "config": cfg.source,
        "columns": columns_by_file,
        "graphs": graph_meta,
        "failures": failures,
        "n_tasks": len(tasks),
        "timing": {"created_unix": time.time(), "wall_s": time.time() - t_start},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2,
                                                  sort_keys=True) + "\n")
    return manifest


def _manifest_matches(out_dir: Path, cfg: ExperimentConfig) -> bool:
    path = out_dir / "manifest.json"
    if not path.exists():
        return False
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError:
        return False
    return (manifest.get("config") == cfg.source
            and not manifest.get("failures"))


def ensure_experiment(cfg: ExperimentConfig) -> Path:
    """Run the experiment unless matching outputs already exist (cache hit)."""
    out = Path(cfg.output_dir)
    if not _manifest_matches(out, cfg):
        manifest = run_experiment(cfg)
        if manifest["failures"]:
            raise ExperimentError(
                f"{len(manifest['failures'])} units failed; see {out}/manifest.json")
    return out
