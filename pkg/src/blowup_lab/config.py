"""Experiment configuration: flat TOML files, strictly validated at parse time.

Unknown keys are rejected and every field is bounds-checked before anything
runs.  The pipeline is seed-free; identical configs produce byte-identical
outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

import tomli

from .errors import ConfigError
from .grid import build_grid
from .problem import (PolynomialBump, ProblemKind, ProblemSpec,
                      QuadraticNeumann, solve_neumann_curvature)
from .solver import SolverConfig, default_stop_threshold

SWEEP_KEYS = ("sweep_p", "sweep_num_cells", "sweep_amplitude")


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str = "dirichlet"
    p: float = 2.0
    n_dim: int = 1
    radius: float = 1.0
    num_cells: int = 200
    amplitude: float = 2.0        # bump datum (interior source)
    shape: float = 1.0
    center_value: float = 0.0     # paraboloid datum (boundary flux)
    curvature: float | str = "auto"
    cfl_safety: float = 0.8
    reaction_safety: float = 0.025
    dt_min: float = 1e-14
    u_stop: float = 0.0           # 0 -> default for (problem, p)
    t_max: float = 1.0
    record_every: int = 100
    reaction_enabled: bool = True
    strict_validation: bool = False
    out_dir: str = ""
    sweep_p: tuple = ()
    sweep_num_cells: tuple = ()
    sweep_amplitude: tuple = ()

    @property
    def kind(self) -> ProblemKind:
        return (ProblemKind.DIRICHLET_SOURCE if self.problem == "dirichlet"
                else ProblemKind.NEUMANN_FLUX)

    def stop_threshold(self) -> float:
        if self.u_stop > 0.0:
            return self.u_stop
        return default_stop_threshold(self.kind, self.p)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(cfl_safety=self.cfl_safety,
                            reaction_safety=self.reaction_safety,
                            dt_min=self.dt_min,
                            u_stop=self.stop_threshold(),
                            t_max=self.t_max,
                            record_every=self.record_every,
                            reaction_enabled=self.reaction_enabled)

    def problem_spec(self) -> ProblemSpec:
        """Build the grid and realized initial datum (curvature solved when
        'auto'); may raise NoRootError for incompatible flux parameters."""
        grid = build_grid(self.n_dim, self.radius, self.num_cells)
        if self.kind is ProblemKind.DIRICHLET_SOURCE:
            data = PolynomialBump(amplitude=self.amplitude, shape=self.shape)
        else:
            beta = self.curvature
            if beta == "auto":
                beta = solve_neumann_curvature(self.center_value, self.radius,
                                               self.p)
            data = QuadraticNeumann(center_value=self.center_value,
                                    curvature=float(beta))
        return ProblemSpec(kind=self.kind, p=self.p, grid=grid,
                           initial_data=data)

    def run_label(self) -> str:
        parts = [self.problem, f"p{self.p:g}", f"M{self.num_cells}"]
        if self.kind is ProblemKind.DIRICHLET_SOURCE:
            parts.append(f"A{self.amplitude:g}")
        return "_".join(parts)


_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}


def _check_bounds(cfg: ExperimentConfig) -> None:
    if cfg.problem not in ("dirichlet", "neumann"):
        raise ConfigError(f"problem must be 'dirichlet' or 'neumann', "
                          f"got {cfg.problem!r}")
    if not cfg.p > 1.0:
        raise ConfigError(f"p must exceed 1, got {cfg.p}")
    if cfg.n_dim < 1:
        raise ConfigError(f"n_dim must be >= 1, got {cfg.n_dim}")
    if not cfg.radius > 0.0:
        raise ConfigError(f"radius must be positive, got {cfg.radius}")
    if cfg.num_cells < 8:
        raise ConfigError(f"num_cells must be >= 8, got {cfg.num_cells}")
    if not cfg.amplitude > 0.0:
        raise ConfigError(f"amplitude must be positive, got {cfg.amplitude}")
    if cfg.shape < 1.0:
        raise ConfigError(f"shape must be >= 1, got {cfg.shape}")
    if cfg.center_value < 0.0:
        raise ConfigError(f"center_value must be >= 0, got {cfg.center_value}")
    if cfg.curvature != "auto":
        if not isinstance(cfg.curvature, (int, float)) or cfg.curvature <= 0:
            raise ConfigError("curvature must be 'auto' or a positive number")
    if not 0.0 < cfg.cfl_safety:
        raise ConfigError("cfl_safety must be positive")
    if not 0.0 < cfg.reaction_safety <= 1.0:
        raise ConfigError("reaction_safety must be in (0, 1]")
    if not cfg.dt_min > 0.0:
        raise ConfigError("dt_min must be positive")
    if cfg.u_stop < 0.0:
        raise ConfigError("u_stop must be >= 0 (0 selects the default)")
    if cfg.u_stop > 0.0 and cfg.u_stop ** cfg.p > 650.0:
        raise ConfigError("u_stop**p too close to the overflow ceiling")
    if not cfg.t_max > 0.0:
        raise ConfigError("t_max must be positive")
    if cfg.record_every < 1:
        raise ConfigError("record_every must be >= 1")
    for key in SWEEP_KEYS:
        vals = getattr(cfg, key)
        if not isinstance(vals, tuple):
            raise ConfigError(f"{key} must be a list")
        for v in vals:
            if not isinstance(v, (int, float)):
                raise ConfigError(f"{key} entries must be numbers")
    if cfg.sweep_p and any(not v > 1.0 for v in cfg.sweep_p):
        raise ConfigError("sweep_p entries must exceed 1")
    if cfg.sweep_num_cells and any(v < 8 for v in cfg.sweep_num_cells):
        raise ConfigError("sweep_num_cells entries must be >= 8")
    if cfg.sweep_amplitude and any(not v > 0 for v in cfg.sweep_amplitude):
        raise ConfigError("sweep_amplitude entries must be positive")


def config_from_mapping(raw: dict) -> ExperimentConfig:
    unknown = set(raw) - _FIELD_NAMES
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    coerced = dict(raw)
    for key in SWEEP_KEYS:
        if key in coerced:
            coerced[key] = tuple(coerced[key])
    for key in ("n_dim", "num_cells", "record_every"):
        if key in coerced:
            v = coerced[key]
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(f"{key} must be an integer, got {v!r}")
    for key in ("reaction_enabled", "strict_validation"):
        if key in coerced and not isinstance(coerced[key], bool):
            raise ConfigError(f"{key} must be a boolean")
    try:
        cfg = ExperimentConfig(**coerced)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    _check_bounds(cfg)
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = tomli.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from exc
    return config_from_mapping(raw)


def sweep_configs(cfg: ExperimentConfig) -> list[tuple[dict, ExperimentConfig]]:
    """Cartesian product of the sweep axes; (axis-values, run config) pairs."""
    axes: list[tuple[str, tuple]] = []
    if cfg.sweep_p:
        axes.append(("p", cfg.sweep_p))
    if cfg.sweep_num_cells:
        axes.append(("num_cells", cfg.sweep_num_cells))
    if cfg.sweep_amplitude:
        axes.append(("amplitude", cfg.sweep_amplitude))
    if not axes:
        raise ConfigError("no sweep axes set; use the run command instead")
    combos: list[dict] = [{}]
    for name, values in axes:
        combos = [dict(c, **{name: v}) for c in combos for v in values]
    out = []
    for combo in combos:
        clean = dict(combo)
        if "num_cells" in clean:
            clean["num_cells"] = int(clean["num_cells"])
        run_cfg = replace(cfg, sweep_p=(), sweep_num_cells=(),
                          sweep_amplitude=(), **clean)
        _check_bounds(run_cfg)
        out.append((combo, run_cfg))
    return out
