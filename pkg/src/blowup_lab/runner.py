"""Experiment orchestration: validate, integrate, analyze, write artifacts.

Outputs per run: trace.csv, profile_final.csv, summary.json, profile.svg and
(for blow-up runs) rate_fit.svg.  All files are UTF-8 with LF endings and
%.17g floats so identical configs reproduce byte-identical bytes.  Nothing
is written when validation fails.
"""

from __future__ import annotations

import concurrent.futures
import json
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import analysis
from .config import ExperimentConfig, sweep_configs
from .errors import (BlowupLabError, NoRootError, NotBlownUpError,
                     PreconditionFailedError, ThresholdNeverReachedError,
                     ValidationError, WindowTooSmallError)
from .problem import (ProblemKind, validate_dirichlet_ic, validate_neumann_ic)
from .solver import RunResult, integrate
from .svgplot import write_line_plot

TRACE_HEADER = "t,dt,u_center,u_boundary,u_max,argmax_r"
PROFILE_HEADER = "r,u"


def _g17(x: float) -> str:
    return f"{float(x):.17g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if not math.isfinite(v) else v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


@dataclass
class RunSummary:
    """Everything a downstream consumer needs about one run.

    wall_clock_s is intentionally excluded from the JSON serialization so
    identical configs yield byte-identical summary files.
    """

    data: dict
    wall_clock_s: float

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.data), sort_keys=True, indent=2) + "\n"


def validate_config(cfg: ExperimentConfig):
    """Build the problem and run the admissibility checks.

    Raises ValidationError on structural failures (always) and, in strict
    mode, on any failed condition including the source-sign inequality.
    """
    try:
        spec = cfg.problem_spec()
    except NoRootError as exc:
        raise ValidationError(str(exc)) from exc
    if spec.kind is ProblemKind.DIRICHLET_SOURCE:
        report = validate_dirichlet_ic(spec.initial_data, spec.grid, spec.p)
    else:
        report = validate_neumann_ic(spec.initial_data, spec.grid, spec.p)
    if not report.passed:
        raise ValidationError("; ".join(report.notes) or "datum rejected")
    if cfg.strict_validation and report.time_monotone is False:
        raise ValidationError("; ".join(report.notes))
    return spec, report


def _run_monitors(result: RunResult) -> dict:
    monitors: dict = {}

    def guard(name, fn):
        try:
            out = fn()
        except (PreconditionFailedError, NotBlownUpError,
                ThresholdNeverReachedError, WindowTooSmallError) as exc:
            monitors[name] = {"error": str(exc)}
            return None
        return out

    rep = guard("monotonicity", lambda: analysis.monitor_monotonicity(result))
    if rep is not None:
        monitors["monotonicity"] = _report_dict(rep)

    if result.spec.kind is ProblemKind.DIRICHLET_SOURCE:
        out = guard("gradient_bound",
                    lambda: analysis.monitor_gradient_bound(result, delta=0.5))
        if out is not None:
            eps, rep = out
            monitors["gradient_bound"] = _report_dict(rep)
            rep2 = guard("pointwise_bound",
                         lambda: analysis.check_pointwise_bound(result, 0.5, eps))
            if rep2 is not None:
                monitors["pointwise_bound"] = _report_dict(rep2)
        out = guard("center_growth",
                    lambda: analysis.monitor_growth_dirichlet(result))
        if out is not None:
            monitors["center_growth"] = _report_dict(out[1])
    else:
        out = guard("boundary_growth",
                    lambda: analysis.monitor_growth_neumann(result))
        if out is not None:
            monitors["boundary_growth"] = _report_dict(out[1])
    return monitors


def _report_dict(rep: analysis.MonitorReport) -> dict:
    return {
        "satisfied_fraction": rep.satisfied_fraction,
        "checked": rep.checked,
        "worst_margin": rep.worst_margin,
        "worst_radius": rep.worst_radius,
        "worst_time": rep.worst_time,
        "details": dict(rep.details),
        "notes": list(rep.notes),
    }


def _write_trace_csv(path: Path, result: RunResult) -> None:
    tr = result.trace
    lines = [TRACE_HEADER]
    for j in range(len(tr)):
        lines.append(",".join((_g17(tr.times[j]), _g17(tr.dt[j]),
                               _g17(tr.u_center[j]), _g17(tr.u_boundary[j]),
                               _g17(tr.u_max[j]), _g17(tr.argmax_radius[j]))))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _write_profile_csv(path: Path, result: RunResult) -> None:
    r = result.spec.grid.nodes
    u = result.final_state.values
    lines = [PROFILE_HEADER]
    lines.extend(f"{_g17(a)},{_g17(b)}" for a, b in zip(r, u))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def execute(cfg: ExperimentConfig) -> tuple[RunResult, RunSummary]:
    """Validate and integrate one config; no files written."""
    t0 = time.perf_counter()
    spec, report = validate_config(cfg)
    result = integrate(spec, cfg.solver_config(), validation=report)

    data: dict = {
        "config": _jsonable(asdict(cfg)),
        "validation": {
            "passed": report.passed,
            "time_monotone": report.time_monotone,
            "source_sign_min": report.source_sign_min,
            "slope_ratio_min": report.slope_ratio_min,
            "compat_residual": report.compat_residual,
            "convexity_floor": report.convexity_floor,
            "notes": list(report.notes),
        },
        "blew_up": result.blew_up,
        "stop_reason": result.stop_reason.value,
        "steps": result.final_state.step_index,
        "t_final": result.final_state.t,
        "u_max_final": float(result.final_state.values.max()),
        "samples": len(result.trace),
        "t_hat": None,
        "estimator_spread": None,
        "rate": None,
        "blowup_set": None,
    }

    if result.blew_up:
        try:
            t_hat, spread = analysis.estimate_blowup_time(result.trace, spec.p)
            fit = analysis.fit_rate(result.trace, t_hat, spec.p,
                                    estimator_spread=spread)
            data["t_hat"] = t_hat
            data["estimator_spread"] = spread
            data["rate"] = {
                "slope": fit.slope,
                "slope_theory": fit.slope_theory,
                "intercept": fit.intercept,
                "rms_residual": fit.rms_residual,
                "log_c_envelope": fit.log_c_envelope,
                "window": [fit.window_first, fit.window_last],
                "n_window": fit.n_window,
            }
        except (WindowTooSmallError, NotBlownUpError) as exc:
            data["rate"] = {"error": str(exc)}
        radii = analysis.estimate_blowup_set(result)
        data["blowup_set"] = {
            "r_min": float(radii.min()) if radii.size else None,
            "r_max": float(radii.max()) if radii.size else None,
            "count": int(radii.size),
        }

    data["monitors"] = _run_monitors(result)
    return result, RunSummary(data=data, wall_clock_s=time.perf_counter() - t0)


def write_outputs(out_dir: Path, result: RunResult, summary: RunSummary) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_trace_csv(out_dir / "trace.csv", result)
    _write_profile_csv(out_dir / "profile_final.csv", result)
    (out_dir / "summary.json").write_text(summary.to_json(), encoding="utf-8",
                                          newline="\n")
    r = result.spec.grid.nodes
    write_line_plot(out_dir / "profile.svg",
                    [(r, result.final_state.values, "u at stop")],
                    title="final profile", xlabel="r", ylabel="u")
    rate = summary.data.get("rate")
    t_hat = summary.data.get("t_hat")
    if rate and "slope" in rate and t_hat is not None:
        tr = result.trace
        kind = result.spec.kind
        idx = analysis.window_indices(tr, kind)
        u = (tr.u_center if kind is ProblemKind.DIRICHLET_SOURCE
             else tr.u_boundary)[idx]
        x = -np.log(t_hat - tr.times[idx])
        fit_line = rate["intercept"] + rate["slope"] * x
        write_line_plot(out_dir / "rate_fit.svg",
                        [(x, u, "data"), (x, fit_line, "fit")],
                        title=f"rate fit: slope {rate['slope']:.3f} "
                              f"(theory {rate['slope_theory']:.3f})",
                        xlabel="-log(T-t)", ylabel="u")


def run_experiment(cfg: ExperimentConfig, out_dir: Path,
                   quiet: bool = False) -> RunSummary:
    """Full pipeline for one config; writes artifacts into out_dir."""
    result, summary = execute(cfg)
    write_outputs(Path(out_dir), result, summary)
    if not quiet:
        d = summary.data
        rate = d.get("rate") or {}
        print(f"[{cfg.run_label()}] blew_up={d['blew_up']} "
              f"stop={d['stop_reason']} steps={d['steps']} "
              f"T_hat={d['t_hat']} slope={rate.get('slope')} "
              f"wall={summary.wall_clock_s:.2f}s")
    return summary


def _sweep_one(args: tuple[dict, ExperimentConfig, str]) -> dict:
    combo, run_cfg, out_dir = args
    row = {key: combo[key] for key in sorted(combo)}
    try:
        summary = run_experiment(run_cfg, Path(out_dir), quiet=True)
    except BlowupLabError as exc:
        row.update({"failed": True, "error": str(exc), "blew_up": None,
                    "t_hat": None, "slope": None})
        return row
    d = summary.data
    rate = d.get("rate") or {}
    monitors = d.get("monitors", {})
    row.update({
        "failed": False,
        "error": "",
        "blew_up": d["blew_up"],
        "t_hat": d["t_hat"],
        "estimator_spread": d["estimator_spread"],
        "slope": rate.get("slope"),
        "slope_theory": rate.get("slope_theory"),
    })
    for name, rep in sorted(monitors.items()):
        row[f"frac_{name}"] = rep.get("satisfied_fraction")
    return row


def run_sweep(cfg: ExperimentConfig, out_root: Path, jobs: int = 1,
              quiet: bool = False) -> list[dict]:
    """Cartesian sweep; per-run failures are flagged rows, not aborts."""
    out_root = Path(out_root)
    combos = sweep_configs(cfg)
    tasks = []
    for combo, run_cfg in combos:
        label = "_".join(f"{k}{v:g}" for k, v in sorted(combo.items()))
        tasks.append((combo, run_cfg, str(out_root / label)))

    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, tasks))
    else:
        rows = [_sweep_one(t) for t in tasks]

    out_root.mkdir(parents=True, exist_ok=True)
    keys: list[str] = []
    for row in rows:
        for k in row:
            if k not in keys:
                keys.append(k)
    lines = [",".join(keys)]
    for row in rows:
        cells = []
        for k in keys:
            v = row.get(k)
            if v is None:
                cells.append("")
            elif isinstance(v, bool):
                cells.append(str(v).lower())
            elif isinstance(v, float):
                cells.append(_g17(v))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    (out_root / "sweep.csv").write_text("\n".join(lines) + "\n",
                                        encoding="utf-8", newline="\n")

    if cfg.sweep_num_cells:
        conv = ["num_cells,t_hat"]
        for row in rows:
            if not row.get("failed") and row.get("t_hat") is not None:
                conv.append(f"{int(row['num_cells'])},{_g17(row['t_hat'])}")
        (out_root / "convergence.csv").write_text("\n".join(conv) + "\n",
                                                  encoding="utf-8",
                                                  newline="\n")
    if not quiet:
        n_failed = sum(1 for r in rows if r.get("failed"))
        print(f"sweep: {len(rows)} runs, {n_failed} failed -> {out_root}")
    return rows
