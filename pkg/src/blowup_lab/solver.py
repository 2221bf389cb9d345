"""Explicit time integration into the blow-up regime.

Heun stepping (explicit trapezoidal, order 2) with an adaptive step chosen
from the diffusion stability limit and the reaction timescale of the source.
Near blow-up the reaction bounds shrink dt naturally, which is exactly what
the rate fitter needs: dense late-time samples.  A diffusion-free scalar mode
integrates u' = exp(u**p) with the same stepper and serves as an exact oracle
(its blow-up time has a closed form).

Recording: one trace row every ``record_every`` accepted steps, plus always
the final 200 steps at stride 1 so the fit window never starves.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum, IntFlag

import numpy as np

from .errors import NegativeInputError, SourceOverflowError
from .grid import FixedValueEdge, FluxEdge, RadialGrid, radial_laplacian
from .problem import (LOG_OVERFLOW, ProblemKind, ProblemSpec,
                      ValidationReport, source_slope, source_value)

TAIL_STEPS = 200          # final window recorded at stride 1
DT_MIN_DEFAULT = 1e-14


def default_stop_threshold(kind: ProblemKind, p: float) -> float:
    """Stop level on max u, deep in the asymptotic regime but resolvable.

    Interior source: exp(u^p) is the stiff scale, capped at exp(20).
    Boundary flux: the boundary grows like exp(2*u^p), so the cap halves
    to keep the same resolvable stiffness.
    """
    budget = 20.0 if kind is ProblemKind.DIRICHLET_SOURCE else 10.0
    return budget ** (1.0 / p)


@dataclass(frozen=True)
class SolverConfig:
    cfl_safety: float = 0.8        # sigma; stability guaranteed only in (0, 1]
    reaction_safety: float = 0.025  # rho in (0, 1]: per-step growth budget
    dt_min: float = DT_MIN_DEFAULT
    u_stop: float = 4.0
    t_max: float = 1.0
    record_every: int = 100
    reaction_enabled: bool = True   # False: plain heat equation (diagnostics)

    def __post_init__(self):
        # sigma > 1 is constructible (stress/tamper runs) but unstable; the
        # integrator detects the breakdown and stops with the UNSTABLE flag
        if not self.cfl_safety > 0.0:
            raise ValueError("cfl_safety must be positive")
        if not 0.0 < self.reaction_safety <= 1.0:
            raise ValueError("reaction_safety must be in (0, 1]")
        if not self.dt_min > 0.0:
            raise ValueError("dt_min must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


class StopReason(Enum):
    THRESHOLD_REACHED = "threshold_reached"
    DT_UNDERFLOW = "dt_underflow"
    T_MAX_REACHED = "t_max_reached"
    OVERFLOW_GUARD = "overflow_guard"


class TraceFlags(IntFlag):
    NONE = 0
    UMAX_DECREASED = 1      # recorded max u fell below the previous record
    REACTION_LIMITED = 2    # dt set by the reaction bound, not diffusion
    DT_FLOORED = 4          # dt hit dt_min
    UNSTABLE = 8            # step rejected: non-finite or negative state


@dataclass(frozen=True)
class SolutionState:
    t: float
    values: np.ndarray
    step_index: int
    last_dt: float


@dataclass(frozen=True)
class RunTrace:
    """Per-sample time series of a run (strictly increasing times)."""

    times: np.ndarray
    dt: np.ndarray
    u_center: np.ndarray
    u_boundary: np.ndarray
    u_max: np.ndarray
    argmax_radius: np.ndarray
    flags: np.ndarray            # TraceFlags bits per sample
    stop_threshold: float
    kind: ProblemKind
    blew_up: bool

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class RunResult:
    trace: RunTrace
    fields: np.ndarray           # recorded nodal values, shape (samples, M+1)
    final_state: SolutionState
    stop_reason: StopReason
    blew_up: bool
    spec: ProblemSpec
    config: SolverConfig
    validation: ValidationReport | None = None


def rhs_dirichlet(values: np.ndarray, spec: ProblemSpec,
                  reaction_enabled: bool = True) -> np.ndarray:
    """lap u + exp(u^p) with the boundary row pinned to zero."""
    out = radial_laplacian(spec.grid, values, FixedValueEdge(0.0))
    if reaction_enabled:
        out = out + source_value(values, spec.p)
    out[-1] = 0.0
    return out


def rhs_neumann(values: np.ndarray, spec: ProblemSpec,
                reaction_enabled: bool = True) -> np.ndarray:
    """lap u with the outward flux exp(u(R)^p) folded in via ghost elimination."""
    flux = source_value(float(values[-1]), spec.p) if reaction_enabled else 0.0
    return radial_laplacian(spec.grid, values, FluxEdge(flux))


def _rhs(values: np.ndarray, spec: ProblemSpec, reaction_enabled: bool) -> np.ndarray:
    if spec.kind is ProblemKind.DIRICHLET_SOURCE:
        return rhs_dirichlet(values, spec, reaction_enabled)
    return rhs_neumann(values, spec, reaction_enabled)


def adaptive_dt(values: np.ndarray, spec: ProblemSpec, cfg: SolverConfig) -> float:
    """Step size: diffusion stability and reaction-resolution bounds.

    dt = max(dt_min, min(sigma*h^2/(2n), rho/f'(umax), rho/f(umax))).

    For the boundary-flux problem the flux enters the boundary row with
    weight 2/h + (n-1)/R, so an additional bound rho / (weight * max(f, f'))
    at the boundary value is required; without it the boundary mode is
    under-resolved by a factor 2/h once the flux dominates.
    """
    h = spec.grid.spacing
    n = spec.grid.n_dim
    bounds = [cfg.cfl_safety * h * h / (2.0 * n)]
    if cfg.reaction_enabled:
        umax = float(values.max())
        fp = source_slope(umax, spec.p)
        fv = source_value(umax, spec.p)
        if fp > 0.0:
            bounds.append(cfg.reaction_safety / fp)
        bounds.append(cfg.reaction_safety / fv)
        if spec.kind is ProblemKind.NEUMANN_FLUX:
            ub = float(values[-1])
            weight = 2.0 / h + (n - 1) / spec.grid.radius
            fb = source_value(ub, spec.p)
            fbp = source_slope(ub, spec.p)
            bounds.append(cfg.reaction_safety / (weight * max(fb, fbp)))
    return max(cfg.dt_min, min(bounds))


@dataclass
class _Record:
    step: int
    t: float
    dt: float
    flags: int
    values: np.ndarray


def integrate(spec: ProblemSpec, cfg: SolverConfig,
              validation: ValidationReport | None = None) -> RunResult:
    """March the validated datum until a stop condition fires.

    Stop conditions: max u >= u_stop (threshold), u^p at the overflow guard,
    dt floored at dt_min, or t_max reached (the last step is clamped to land
    on t_max exactly).  A non-finite or negative candidate state is rejected
    and classified under the overflow guard with the UNSTABLE flag raised.
    """
    dirichlet = spec.kind is ProblemKind.DIRICHLET_SOURCE
    u = spec.initial_values().astype(float, copy=True)
    if dirichlet:
        u[-1] = 0.0
    t = 0.0
    step = 0
    last_dt = 0.0
    prev_umax = float(u.max())

    strided: dict[int, _Record] = {}
    tail: deque[_Record] = deque(maxlen=TAIL_STEPS)
    strided[0] = _Record(0, t, 0.0, 0, u.copy())

    stop = None
    blew_up = False
    extra_flags = 0

    while True:
        umax = float(u.max())
        if umax >= cfg.u_stop:
            stop = StopReason.THRESHOLD_REACHED
            blew_up = True
            break
        if umax ** spec.p >= LOG_OVERFLOW:
            stop = StopReason.OVERFLOW_GUARD
            blew_up = True
            break
        if t >= cfg.t_max:
            stop = StopReason.T_MAX_REACHED
            break

        dt = adaptive_dt(u, spec, cfg)
        flags = 0
        if dt <= cfg.dt_min:
            stop = StopReason.DT_UNDERFLOW
            blew_up = umax >= 0.5 * cfg.u_stop
            break
        h2bound = cfg.cfl_safety * spec.grid.spacing ** 2 / (2.0 * spec.grid.n_dim)
        if dt < h2bound:
            flags |= TraceFlags.REACTION_LIMITED
        if t + dt > cfg.t_max:
            dt = cfg.t_max - t

        try:
            k1 = _rhs(u, spec, cfg.reaction_enabled)
            u_pred = u + dt * k1
            if dirichlet:
                u_pred[-1] = 0.0
            k2 = _rhs(u_pred, spec, cfg.reaction_enabled)
        except (SourceOverflowError, NegativeInputError):
            stop = StopReason.OVERFLOW_GUARD
            blew_up = True
            extra_flags |= TraceFlags.UNSTABLE
            break

        u_new = u + 0.5 * dt * (k1 + k2)
        if dirichlet:
            u_new[-1] = 0.0
        if not np.isfinite(u_new).all() or float(u_new.min()) < 0.0:
            stop = StopReason.OVERFLOW_GUARD
            blew_up = True
            extra_flags |= TraceFlags.UNSTABLE
            break

        u = u_new
        t += dt
        step += 1
        last_dt = dt
        if float(u.max()) < prev_umax:
            flags |= TraceFlags.UMAX_DECREASED
        prev_umax = max(prev_umax, float(u.max()))

        rec = _Record(step, t, dt, flags, u.copy())
        tail.append(rec)
        if step % cfg.record_every == 0:
            strided[step] = rec

    merged = dict(strided)
    for rec in tail:
        merged[rec.step] = rec
    if step not in merged:
        merged[step] = _Record(step, t, last_dt, extra_flags, u.copy())
    if extra_flags:
        merged[step].flags |= extra_flags
    records = [merged[k] for k in sorted(merged)]

    r_nodes = spec.grid.nodes
    fields = np.array([rec.values for rec in records])
    argmax = r_nodes[np.argmax(fields, axis=1)]
    trace = RunTrace(
        times=np.array([rec.t for rec in records]),
        dt=np.array([rec.dt for rec in records]),
        u_center=fields[:, 0].copy(),
        u_boundary=fields[:, -1].copy(),
        u_max=fields.max(axis=1),
        argmax_radius=argmax,
        flags=np.array([rec.flags for rec in records], dtype=np.int64),
        stop_threshold=cfg.u_stop,
        kind=spec.kind,
        blew_up=blew_up,
    )
    final = SolutionState(t=t, values=u.copy(), step_index=step, last_dt=last_dt)
    return RunResult(trace=trace, fields=fields, final_state=final,
                     stop_reason=stop, blew_up=blew_up, spec=spec, config=cfg,
                     validation=validation)


def integrate_reaction_only(u0: float, p: float,
                            cfg: SolverConfig | None = None) -> RunTrace:
    """Scalar mode: u' = exp(u**p) from u(0) = u0 with the same Heun stepper.

    p >= 1 is permitted here (p = 1 has the closed form T = exp(-u0)).
    Returns the scalar trace; feed it to estimate_blowup_time for the
    extrapolated blow-up time.
    """
    if u0 < 0.0:
        raise ValueError("u0 must be >= 0")
    if p < 1.0:
        raise ValueError("p must be >= 1")
    if cfg is None:
        cfg = SolverConfig(u_stop=18.0 ** (1.0 / p), record_every=1, t_max=math.inf)

    rho = cfg.reaction_safety
    u = float(u0)
    t = 0.0
    step = 0
    times = [0.0]
    dts = [0.0]
    us = [u]
    blew_up = False
    while True:
        if u >= cfg.u_stop:
            blew_up = True
            break
        if u ** p >= LOG_OVERFLOW:
            blew_up = True
            break
        if t >= cfg.t_max:
            break
        fv = source_value(u, p)
        fp = source_slope(u, p)
        dt = min(rho / fv, rho / fp) if fp > 0.0 else rho / fv
        dt = max(dt, cfg.dt_min)
        if dt <= cfg.dt_min:
            blew_up = u >= 0.5 * cfg.u_stop
            break
        k1 = source_value(u, p)
        k2 = source_value(u + dt * k1, p)
        u = u + 0.5 * dt * (k1 + k2)
        t += dt
        step += 1
        times.append(t)
        dts.append(dt)
        us.append(u)

    arr_u = np.array(us)
    return RunTrace(times=np.array(times), dt=np.array(dts), u_center=arr_u,
                    u_boundary=arr_u.copy(), u_max=arr_u.copy(),
                    argmax_radius=np.zeros_like(arr_u),
                    flags=np.zeros(len(us), dtype=np.int64),
                    stop_threshold=cfg.u_stop,
                    kind=ProblemKind.DIRICHLET_SOURCE, blew_up=blew_up)
