"""Aggregation of experiment CSVs into the summary tables the paper-style
figures (and the acceptance suite) are built from."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

TABLES = ("beta_errors", "gamma_fit", "gamma_quality", "msqw_summary",
          "floquet_summary")


class ReportError(ValueError):
    pass


def read_rows(path: Path) -> list[dict]:
    if not path.exists():
        raise ReportError(f"missing results file: {path}")
    with open(path, newline="") as fh:
        rows = []
        for raw in csv.DictReader(fh):
            row = {}
            for key, val in raw.items():
                if val in ("true", "false"):
                    row[key] = val == "true"
                    continue
                try:
                    row[key] = float(val)
                except ValueError:
                    row[key] = val
            rows.append(row)
    return rows


def _quartiles(values) -> tuple[float, float, float]:
    arr = np.asarray(values, dtype=float)
    return (float(np.percentile(arr, 25)), float(np.median(arr)),
            float(np.percentile(arr, 75)))


def _format_table(header: list[str], rows: list[list]) -> str:
    table = [header] + [[f"{v:.4g}" if isinstance(v, float) else str(v)
                        for v in row] for row in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths))
             for row in table]
    return "\n".join(lines) + "\n"


def beta_errors(result_dir: Path) -> str:
    """Per-size quartiles of the relative beta errors of the two DOS models."""
    rows = [r for r in read_rows(result_dir / "results.csv")
            if r["strategy"] == "brute"]
    if not rows:
        raise ReportError("no brute-strategy rows; beta errors need gamma_opt data")
    out = []
    for n in sorted({int(r["n"]) for r in rows}):
        sub = [r for r in rows if int(r["n"]) == n]
        rel_g = [abs(r["beta_gauss"] - r["beta_exact"]) / r["beta_exact"] for r in sub]
        rel_e = [abs(r["beta_emg"] - r["beta_exact"]) / r["beta_exact"] for r in sub]
        sgn_g = np.median([r["beta_gauss"] - r["beta_exact"] for r in sub])
        sgn_e = np.median([r["beta_emg"] - r["beta_exact"] for r in sub])
        q1g, mg, q3g = _quartiles(rel_g)
        q1e, me, q3e = _quartiles(rel_e)
        out.append([n, len(sub), q1g, mg, q3g, q1e, me, q3e,
                    float(sgn_g), float(sgn_e)])
    return _format_table(
        ["n", "count", "gauss_q1", "gauss_med", "gauss_q3",
         "emg_q1", "emg_med", "emg_q3", "gauss_sign_med", "emg_sign_med"], out)


def gamma_fit(result_dir: Path) -> str:
    """Median brute gamma_opt per size and the a*n^(-1/2) least-squares fit."""
    rows = [r for r in read_rows(result_dir / "results.csv")
            if r["strategy"] == "brute"]
    if not rows:
        raise ReportError("no brute-strategy rows; gamma fit needs gamma_opt data")
    sizes = sorted({int(r["n"]) for r in rows})
    medians = {n: float(np.median([r["gamma"] for r in rows if int(r["n"]) == n]))
               for n in sizes}
    x = np.array([n ** -0.5 for n in sizes])
    y = np.array([medians[n] for n in sizes])
    a = float((x @ y) / (x @ x))
    out = [[n, medians[n], a * n ** -0.5] for n in sizes]
    table = _format_table(["n", "gamma_opt_median", "fit_a_n^-1/2"], out)
    return table + f"fitted a = {a:.4f}\n"


def gamma_quality(result_dir: Path) -> str:
    """Fraction of instances where the EMG-optimal gamma measures at least as
    good a steady state as the heuristic gamma."""
    rows = read_rows(result_dir / "results.csv")
    by_instance: dict[str, dict] = {}
    for r in rows:
        by_instance.setdefault(r["instance_id"], {})[r["strategy"]] = r
    wins = total = 0
    for rec in by_instance.values():
        if "emg_opt" in rec and "heuristic" in rec:
            total += 1
            wins += rec["emg_opt"]["hp_dyn"] <= rec["heuristic"]["hp_dyn"] + 1e-9
    if total == 0:
        raise ReportError("need rows for both 'emg_opt' and 'heuristic' strategies")
    return _format_table(["instances", "emg_no_worse", "fraction"],
                         [[total, wins, wins / total]])


def _final_stage(rows: list[dict]) -> dict[str, dict]:
    last = max(int(r["stage"]) for r in rows)
    return {r["instance_id"]: r for r in rows if int(r["stage"]) == last}


def msqw_summary(result_dir: Path) -> str:
    numeric = read_rows(result_dir / "stages_numeric.csv")
    emg = read_rows(result_dir / "stages_emg.csv")
    ids = sorted({r["instance_id"] for r in numeric})
    betas = {iid: [r["beta"] for r in sorted(
        (x for x in numeric if x["instance_id"] == iid),
        key=lambda x: x["stage"])] for iid in ids}
    heating = sum(all(b1 > b2 for b1, b2 in zip(bs, bs[1:]))
                  for bs in betas.values())
    fin_num = _final_stage(numeric)
    fin_emg = _final_stage(emg)
    err_num = [abs(r["hp_pred"] - r["hp_dyn_steady"]) for r in fin_num.values()]
    err_emg = [abs(r["hp_pred"] - r["hp_dyn_steady"]) for r in fin_emg.values()]
    rows = [["beta_strictly_decreasing", heating / len(ids)],
            ["numeric_final_within_0.5", float(np.mean([e <= 0.5 for e in err_num]))],
            ["emg_final_within_0.5", float(np.mean([e <= 0.5 for e in err_emg]))],
            ["numeric_final_median_err", float(np.median(err_num))],
            ["emg_final_median_err", float(np.median(err_emg))]]
    return _format_table(["metric", "value"], rows)


def floquet_summary(result_dir: Path) -> str:
    rows = read_rows(result_dir / "results.csv")
    plain = [r for r in rows if not r["corrected"]]
    corr = {(r["instance_id"], r["tau"]): r for r in rows if r["corrected"]}
    out = []
    for tau in sorted({r["tau"] for r in plain}):
        sub = [r for r in plain if r["tau"] == tau]
        ctqw_better = float(np.mean([r["hp_ctqw"] < r["hp_floquet"] for r in sub]))
        med_err = float(np.median([abs(r["hp_pred_model"] - r["hp_floquet"])
                                   for r in sub]))
        closer = []
        for r in sub:
            c = corr.get((r["instance_id"], r["tau"]))
            if c is not None:
                closer.append(abs(c["hp_floquet"] - r["hp_ctqw"])
                              < abs(r["hp_floquet"] - r["hp_ctqw"]))
        out.append([tau, len(sub), ctqw_better, med_err,
                    float(np.mean(closer)) if closer else float("nan")])
    return _format_table(
        ["tau", "count", "ctqw_better_frac", "model_median_err",
         "corrected_closer_frac"], out)


def render_table(result_dir: str | Path, table: str) -> str:
    result_dir = Path(result_dir)
    if table not in TABLES:
        raise ReportError(f"unknown table {table!r}; available: {', '.join(TABLES)}")
    return globals()[table](result_dir)
