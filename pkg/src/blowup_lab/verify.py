"""Acceptance verification: every quantitative gate runnable as one command.

Builds the reference runs once, evaluates each criterion at its stated
tolerance, and reports one row per check.  The whole collection is
deterministic: no randomness anywhere in the pipeline.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import analysis
from .config import ExperimentConfig
from .errors import NoRootError
from .problem import ProblemKind, solve_neumann_curvature
from .runner import RunSummary, execute
from .solver import RunTrace, integrate_reaction_only

SQRT20 = math.sqrt(20.0)
SQRT10 = math.sqrt(10.0)

# Reference configurations.  The boundary-flux reference runs at R = 0.8:
# for p = 2 the compatibility equation 2*b*R = exp((b*R^2)^p) has no positive
# root for any R > 2^(1/2)*exp(-1/2) ~ 0.858 (the suite checks this), so a
# radius-1 ball admits no compatible paraboloid datum at p = 2.
REFERENCE_DIRICHLET = dict(problem="dirichlet", p=2.0, n_dim=1, radius=1.0,
                           amplitude=2.0, shape=1.0, cfl_safety=0.8,
                           reaction_safety=0.025, record_every=100,
                           u_stop=SQRT20, t_max=1.0)
REFERENCE_NEUMANN = dict(problem="neumann", p=2.0, n_dim=1, radius=0.8,
                         center_value=0.0, curvature="auto", cfl_safety=0.8,
                         reaction_safety=0.015, record_every=300,
                         u_stop=SQRT10, t_max=5.0)

REACTION_CASES = (
    # (p, u0, exact blow-up time): integral of exp(-u**p) from u0 to infinity
    (1.0, 0.0, 1.0),
    (1.0, 1.0, math.exp(-1.0)),
    (2.0, 0.0, math.sqrt(math.pi) / 2.0),
)


def reference_dirichlet(num_cells: int, **overrides) -> ExperimentConfig:
    kwargs = dict(REFERENCE_DIRICHLET, num_cells=num_cells, **overrides)
    return ExperimentConfig(**kwargs)


def reference_neumann(num_cells: int, **overrides) -> ExperimentConfig:
    kwargs = dict(REFERENCE_NEUMANN, num_cells=num_cells, **overrides)
    return ExperimentConfig(**kwargs)


@dataclass(frozen=True)
class CriterionRow:
    cid: str
    name: str
    measured: str
    bound: str
    passed: bool
    note: str = ""


def synthetic_trace(p: float, t_end: float, kind: ProblemKind,
                    t_first: float, t_last: float, n: int,
                    offset: float = 0.0,
                    noise: np.ndarray | None = None) -> RunTrace:
    """Trace following the envelope law u = offset - b_th*log(T - t) exactly.

    Samples are geometric in (T - t), i.e. uniform in -log(T - t), matching
    how an adaptive run clusters them.
    """
    x = np.linspace(-math.log(t_end - t_first), -math.log(t_end - t_last), n)
    ts = t_end - np.exp(-x)
    b = analysis.theory_slope(kind, p)
    u = offset + b * x
    if noise is not None:
        u = u + noise
    dts = np.diff(ts, prepend=ts[0] - (ts[1] - ts[0]))
    return RunTrace(times=ts, dt=dts, u_center=u, u_boundary=u.copy(),
                    u_max=u.copy(), argmax_radius=np.zeros_like(u),
                    flags=np.zeros(n, dtype=np.int64),
                    stop_threshold=float(u.max()), kind=kind, blew_up=True)


def _fraction(summary: RunSummary, monitor: str) -> float:
    rep = summary.data["monitors"].get(monitor, {})
    return rep.get("satisfied_fraction", math.nan)


def collect_verification(overrides: dict | None = None,
                         quiet: bool = True) -> tuple[list[CriterionRow], dict]:
    """Run everything and evaluate the acceptance gates.

    overrides (solver-level keys) apply to all reference configs; useful to
    demonstrate that tampering (for example cfl_safety = 10) fails loudly.
    """
    t_start = time.perf_counter()
    overrides = overrides or {}
    rows: list[CriterionRow] = []
    bundle: dict = {}

    def log(msg: str) -> None:
        if not quiet:
            print(msg)

    # --- criterion 1: diffusion-free closed-form oracles -------------------
    t0 = time.perf_counter()
    worst_rel = 0.0
    for p, u0, exact in REACTION_CASES:
        trace = integrate_reaction_only(u0, p)
        t_hat, _ = analysis.estimate_blowup_time(trace, p,
                                                 ProblemKind.DIRICHLET_SOURCE)
        rel = abs(t_hat - exact) / exact
        worst_rel = max(worst_rel, rel)
        log(f"  reaction p={p} u0={u0}: T={t_hat:.8f} exact={exact:.8f} "
            f"rel={rel:.2e}")
    dt_oracle = time.perf_counter() - t0
    rows.append(CriterionRow("1", "flat-reaction blow-up time vs closed form",
                             f"rel err {worst_rel:.2e}, {dt_oracle:.1f}s",
                             "<= 5e-3, < 5 s",
                             worst_rel <= 5e-3 and dt_oracle < 5.0))
    bundle["reaction_worst_rel"] = worst_rel

    # --- reference runs -----------------------------------------------------
    runs: dict[str, tuple] = {}
    walls: dict[str, float] = {}
    for label, maker, cells in (("d100", reference_dirichlet, 100),
                                ("d200", reference_dirichlet, 200),
                                ("d400", reference_dirichlet, 400),
                                ("n200", reference_neumann, 200),
                                ("n400", reference_neumann, 400)):
        cfg = maker(cells, **overrides)
        t0 = time.perf_counter()
        try:
            result, summary = execute(cfg)
            runs[label] = (result, summary)
            walls[label] = time.perf_counter() - t0
            log(f"  run {label}: steps={summary.data['steps']} "
                f"blew_up={summary.data['blew_up']} "
                f"wall={walls[label]:.1f}s")
        except Exception as exc:  # tampered configs may fail structurally
            runs[label] = (None, None)
            walls[label] = time.perf_counter() - t0
            rows.append(CriterionRow("run", f"reference run {label} failed",
                                     str(exc)[:60], "completes", False))
    bundle["runs"] = runs
    bundle["walls"] = walls

    def rate_of(label: str) -> dict:
        _, summary = runs[label]
        if summary is None:
            return {}
        return summary.data.get("rate") or {}

    # --- criterion 2: interior-source rate ---------------------------------
    b200 = rate_of("d200").get("slope", math.nan)
    b400 = rate_of("d400").get("slope", math.nan)
    drift = abs(b200 - b400)
    ok_band = (0.4 <= b200 <= 0.6) and (0.4 <= b400 <= 0.6)
    rows.append(CriterionRow("2a", "center rate slope in band (M=200/400)",
                             f"{b200:.3f} / {b400:.3f}", "[0.40, 0.60]",
                             ok_band))
    rows.append(CriterionRow("2b", "slope drift across resolutions",
                             f"{drift:.3f}", "<= 0.05", drift <= 0.05))
    env200 = rate_of("d200").get("log_c_envelope", math.nan)
    env400 = rate_of("d400").get("log_c_envelope", math.nan)
    ok_env = (math.isfinite(env200) and math.isfinite(env400)
              and env400 <= env200 + 0.05)
    rows.append(CriterionRow("2c", "envelope constant finite and stable",
                             f"{env200:.3f} -> {env400:.3f}",
                             "finite, non-increasing (+0.05)", ok_env))
    t100 = (runs["d100"][1].data.get("t_hat") or math.nan) if runs["d100"][1] else math.nan
    t200 = (runs["d200"][1].data.get("t_hat") or math.nan) if runs["d200"][1] else math.nan
    t400 = (runs["d400"][1].data.get("t_hat") or math.nan) if runs["d400"][1] else math.nan
    conv1, conv2 = abs(t100 - t200), abs(t200 - t400)
    rows.append(CriterionRow("2d", "blow-up time converges under refinement",
                             f"|dT| {conv1:.2e} -> {conv2:.2e}", "decreasing",
                             conv2 < conv1))
    bundle["t_hats"] = (t100, t200, t400)
    pair_wall = walls.get("d200", 0.0) + walls.get("d400", 0.0)
    rows.append(CriterionRow("2e", "interior reference pair runtime",
                             f"{pair_wall:.1f}s", "< 120 s",
                             pair_wall < 120.0))

    # --- criterion 3: single-point blow-up at the center --------------------
    def blowup_set_or_nan(result) -> np.ndarray:
        if result is None or not result.blew_up:
            return np.array([math.nan])
        radii = analysis.estimate_blowup_set(result)
        return radii if radii.size else np.array([math.nan])

    set_rows = {}
    for label in ("d200", "d400"):
        set_rows[label] = blowup_set_or_nan(runs[label][0])
    edge200 = float(set_rows["d200"].max())
    edge400 = float(set_rows["d400"].max())
    radius = REFERENCE_DIRICHLET["radius"]
    ok_set = edge200 <= 0.2 * radius and edge400 <= edge200 + 1e-12
    rows.append(CriterionRow("3a", "blow-up set confined to center",
                             f"edge {edge200:.4f} / {edge400:.4f}",
                             f"<= {0.2 * radius:g}, nested", ok_set))
    result200 = runs["d200"][0]
    off = result200.spec.grid.nodes >= 0.2 * radius
    off_cap = float(result200.fields[:, off].max())
    u_stop = result200.config.u_stop
    rows.append(CriterionRow("3b", "off-center values stay bounded",
                             f"max {off_cap:.3f}", f"<= {0.6 * u_stop:.3f}",
                             off_cap <= 0.6 * u_stop))

    # --- criteria 4, 5: pointwise tail bound and gradient functional --------
    for cid, mon, name in (("4", "pointwise_bound", "tail-integral bound"),
                           ("5", "gradient_bound", "gradient functional")):
        fr200 = _fraction(runs["d200"][1], mon)
        fr400 = _fraction(runs["d400"][1], mon)
        rows.append(CriterionRow(cid, f"{name} satisfied fraction",
                                 f"{fr200:.4f} / {fr400:.4f}", ">= 0.99",
                                 fr200 >= 0.99 and fr400 >= 0.99))

    # --- criterion 6: boundary-flux rate and blow-up set --------------------
    nb200 = rate_of("n200").get("slope", math.nan)
    nb400 = rate_of("n400").get("slope", math.nan)
    ndrift = abs(nb200 - nb400)
    ok_nband = (0.175 <= nb200 <= 0.325) and (0.175 <= nb400 <= 0.325)
    note6 = "R=0.8: no compatible datum exists at R=1 (see NoRoot check)"
    rows.append(CriterionRow("6a", "boundary rate slope in band (M=200/400)",
                             f"{nb200:.3f} / {nb400:.3f}", "[0.175, 0.325]",
                             ok_nband, note=note6))
    rows.append(CriterionRow("6b", "boundary slope drift",
                             f"{ndrift:.3f}", "<= 0.05", ndrift <= 0.05))
    nres200 = runs["n200"][0]
    nradius = REFERENCE_NEUMANN["radius"]
    nset = blowup_set_or_nan(nres200)
    ok_nset = float(nset.min()) >= 0.8 * nradius
    rows.append(CriterionRow("6c", "boundary blow-up set confined to rim",
                             f"[{float(nset.min()):.4f}, {float(nset.max()):.4f}]",
                             f">= {0.8 * nradius:g}", ok_nset))
    argmax_ok = bool(np.all(nres200.trace.argmax_radius == nradius))
    rows.append(CriterionRow("6d", "argmax at the rim in every sample",
                             "all samples" if argmax_ok else "violations",
                             "argmax = R", argmax_ok))
    try:
        solve_neumann_curvature(0.0, 1.0, 2.0)
        noroot_ok = False
    except NoRootError:
        noroot_ok = True
    rows.append(CriterionRow("6e", "radius-1 flux datum proven incompatible",
                             "NoRoot raised" if noroot_ok else "root found",
                             "NoRoot", noroot_ok))

    # --- criterion 7: monotonicity monitors ---------------------------------
    frac_d = _fraction(runs["d200"][1], "monotonicity")
    frac_d4 = _fraction(runs["d400"][1], "monotonicity")
    frac_n = _fraction(runs["n200"][1], "monotonicity")
    frac_n4 = _fraction(runs["n400"][1], "monotonicity")
    ok_mono = all(f == 1.0 for f in (frac_d, frac_d4, frac_n, frac_n4))
    rows.append(CriterionRow("7", "monotonicity monitors (both problems)",
                             f"{frac_d:.4f} {frac_d4:.4f} {frac_n:.4f} "
                             f"{frac_n4:.4f}", "= 1.0", ok_mono,
                             note="interior u_t check gated on the "
                                  "source-sign condition"))

    # --- criterion 8: growth functionals ------------------------------------
    fg_d = _fraction(runs["d200"][1], "center_growth")
    fg_d4 = _fraction(runs["d400"][1], "center_growth")
    fg_n = _fraction(runs["n200"][1], "boundary_growth")
    fg_n4 = _fraction(runs["n400"][1], "boundary_growth")
    ok_growth = all(f >= 0.99 for f in (fg_d, fg_d4, fg_n, fg_n4))
    rows.append(CriterionRow("8a", "growth functionals satisfied fraction",
                             f"{fg_d:.4f} {fg_d4:.4f} {fg_n:.4f} {fg_n4:.4f}",
                             ">= 0.99", ok_growth))
    det_n = runs["n200"][1].data["monitors"].get("boundary_growth", {})
    eps_used = det_n.get("details", {}).get("epsilon", math.nan)
    eps_bound = det_n.get("details", {}).get("epsilon_rim_bound", math.nan)
    rows.append(CriterionRow("8b", "flux growth constant within admissible bound",
                             f"{eps_used:.4f}", f"<= {eps_bound:.4f}",
                             eps_used <= eps_bound))

    # --- criterion 9: numerical hygiene --------------------------------------
    from .grid import FixedValueEdge, build_grid, radial_laplacian
    worst_quad = 0.0
    for n_dim in (1, 2, 3):
        g = build_grid(n_dim, 1.0, 32)
        vals = 3.0 + 2.0 * g.nodes ** 2
        lap = radial_laplacian(g, vals, FixedValueEdge(float(vals[-1])))
        worst_quad = max(worst_quad,
                         float(np.abs(lap[:-1] / (4.0 * n_dim) - 1.0).max()))
    rows.append(CriterionRow("9a", "radial stencil exact on quadratics",
                             f"rel err {worst_quad:.2e}", "<= 1e-12",
                             worst_quad <= 1e-12))

    gauss = analysis.tail_integral(0.0, 1.0, 2.0)
    gamma_rel = abs(gauss - math.sqrt(math.pi) / 2.0) / (math.sqrt(math.pi) / 2.0)
    half = analysis.tail_integral(0.0, 0.5, 2.0)
    half_exact = 0.5 ** -0.5 * math.gamma(1.5)
    gamma_rel = max(gamma_rel, abs(half - half_exact) / half_exact)
    rows.append(CriterionRow("9b", "tail integral matches gamma identity",
                             f"rel err {gamma_rel:.2e}", "<= 1e-10",
                             gamma_rel <= 1e-10))

    tr = synthetic_trace(3.0, 2.0, ProblemKind.DIRICHLET_SOURCE,
                         0.5, 2.0 - 1e-6, 400)
    fit = analysis.fit_rate(tr, 2.0, 3.0)
    synth_err = max(abs(fit.slope - 1.0 / 3.0), fit.rms_residual)
    rows.append(CriterionRow("9c", "rate fitter recovers synthetic law",
                             f"err {synth_err:.2e}", "<= 1e-8",
                             synth_err <= 1e-8))

    spreads = {}
    for label in ("d200", "d400", "n200", "n400"):
        result, summary = runs[label]
        if summary is None or summary.data.get("t_hat") is None:
            spreads[label] = math.nan
            continue
        t_hat = summary.data["t_hat"]
        spread = summary.data["estimator_spread"]
        idx = analysis.window_indices(result.trace)
        span = t_hat - result.trace.times[idx[0]]
        spreads[label] = spread / span
    worst_spread = max(spreads.values())
    rows.append(CriterionRow("9d", "blow-up time estimator spread",
                             " ".join(f"{100 * v:.2f}%" for v in
                                      spreads.values()),
                             "<= 2% of window span",
                             worst_spread <= 0.02,
                             note="interior refs sit above 2%: the bias that "
                                  "keeps the slope in band exceeds it"))
    bundle["spreads"] = spreads

    cfg = reference_dirichlet(100, **overrides)
    _, s1 = execute(cfg)
    _, s2 = execute(cfg)
    det_ok = s1.to_json() == s2.to_json()
    rows.append(CriterionRow("9e", "re-run is byte-identical",
                             "identical" if det_ok else "differs",
                             "byte-identical", det_ok))

    elapsed = time.perf_counter() - t_start
    rows.append(CriterionRow("9f", "full verification runtime",
                             f"{elapsed:.1f}s", "<= 600 s", elapsed <= 600.0))
    bundle["elapsed_s"] = elapsed
    return rows, bundle


def format_table(rows: list[CriterionRow]) -> str:
    w_name = max(len(r.name) for r in rows)
    w_meas = max(len(r.measured) for r in rows)
    w_bound = max(len(r.bound) for r in rows)
    lines = [f"{'id':<4} {'criterion':<{w_name}} {'measured':<{w_meas}} "
             f"{'bound':<{w_bound}} result"]
    lines.append("-" * len(lines[0]))
    for r in rows:
        status = "PASS" if r.passed else "FAIL"
        line = (f"{r.cid:<4} {r.name:<{w_name}} {r.measured:<{w_meas}} "
                f"{r.bound:<{w_bound}} {status}")
        if r.note:
            line += f"   [{r.note}]"
        lines.append(line)
    n_fail = sum(1 for r in rows if not r.passed)
    lines.append("-" * len(lines[0]))
    lines.append(f"{len(rows) - n_fail}/{len(rows)} checks passed"
                 + (f", {n_fail} FAILED" if n_fail else ""))
    return "\n".join(lines)
