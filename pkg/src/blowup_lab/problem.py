"""Problem definitions: the source nonlinearity exp(u**p), the two boundary
regimes, parametric initial-data families, and admissibility validators.

The families are fixed parametric forms rather than arbitrary arrays so that
every admissibility condition can be checked against analytic derivatives,
with floating tolerances only absorbing roundoff:

  * ``PolynomialBump``     u0(r) = A*(1 - (r/R)^2)^k   (interior-source runs)
  * ``QuadraticNeumann``   u0(r) = a + b*r^2           (boundary-flux runs)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (FamilyMismatchError, NegativeInputError, NoRootError,
                     SourceOverflowError)
from .grid import RadialGrid

# Natural-log ceiling of double precision; evaluation stops before exp()
# returns Inf so blow-up detection fires on a finite state.
LOG_OVERFLOW = 700.0

# Condition tolerances: the admissibility conditions are analytic identities
# for the fixed families, so these only absorb floating error.
TOL_SOURCE_SIGN = 1e-9   # relative, on min(lap u0 + exp(u0^p))
TOL_COMPAT = 1e-8        # absolute, on |u0'(R) - exp(u0(R)^p)|


def source_value(u, p: float):
    """exp(u**p) for u >= 0.

    Raises NegativeInputError on negative input and SourceOverflowError once
    u**p crosses the double-precision log ceiling.  p >= 1 (p = 1 is allowed
    for the spatially flat closed-form oracle only).
    """
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0.0):
        raise NegativeInputError(f"source evaluated at negative u (min {arr.min():g})")
    powu = arr ** p
    if float(np.max(powu, initial=0.0)) > LOG_OVERFLOW:
        raise SourceOverflowError(f"u**p = {float(np.max(powu)):g} exceeds log ceiling")
    out = np.exp(powu)
    return float(out) if np.isscalar(u) else out


def source_slope(u, p: float):
    """d/du of exp(u**p): p * u**(p-1) * exp(u**p); same guards as source_value."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0.0):
        raise NegativeInputError(f"source slope at negative u (min {arr.min():g})")
    powu = arr ** p
    if float(np.max(powu, initial=0.0)) > LOG_OVERFLOW:
        raise SourceOverflowError(f"u**p = {float(np.max(powu)):g} exceeds log ceiling")
    out = p * arr ** (p - 1.0) * np.exp(powu)
    return float(out) if np.isscalar(u) else out


class ProblemKind(Enum):
    DIRICHLET_SOURCE = "dirichlet"   # u_t = lap u + exp(u^p), u(R) = 0
    NEUMANN_FLUX = "neumann"         # u_t = lap u, u_r(R) = exp(u(R)^p)


@dataclass(frozen=True)
class PolynomialBump:
    """Radially nonincreasing bump A*(1 - (r/R)^2)^k, vanishing at r = R."""

    amplitude: float          # A > 0
    shape: float = 1.0        # k >= 1

    def profile(self, r: np.ndarray, radius: float) -> np.ndarray:
        s2 = (r / radius) ** 2
        return self.amplitude * (1.0 - s2) ** self.shape

    def slope(self, r: np.ndarray, radius: float) -> np.ndarray:
        A, k = self.amplitude, self.shape
        s2 = (r / radius) ** 2
        return -2.0 * A * k * r / radius**2 * (1.0 - s2) ** (k - 1.0)

    def laplacian(self, r: np.ndarray, radius: float, n_dim: int) -> np.ndarray:
        A, k = self.amplitude, self.shape
        s2 = (r / radius) ** 2
        out = -2.0 * A * k * n_dim / radius**2 * (1.0 - s2) ** (k - 1.0)
        if k >= 2.0:
            out = out + (4.0 * A * k * (k - 1.0) * r**2 / radius**4
                         * (1.0 - s2) ** (k - 2.0))
        return out


@dataclass(frozen=True)
class QuadraticNeumann:
    """Radially nondecreasing paraboloid a + b*r^2 with constant Laplacian."""

    center_value: float       # a >= 0
    curvature: float          # b > 0

    def profile(self, r: np.ndarray, radius: float) -> np.ndarray:
        return self.center_value + self.curvature * r**2

    def slope(self, r: np.ndarray, radius: float) -> np.ndarray:
        return 2.0 * self.curvature * r

    def laplacian(self, r: np.ndarray, radius: float, n_dim: int) -> np.ndarray:
        return np.full_like(np.asarray(r, dtype=float),
                            2.0 * n_dim * self.curvature)


InitialData = PolynomialBump | QuadraticNeumann


@dataclass(frozen=True)
class ProblemSpec:
    """One fully specified problem: regime, exponent, geometry, initial data."""

    kind: ProblemKind
    p: float
    grid: RadialGrid
    initial_data: InitialData

    def __post_init__(self):
        if not self.p > 1.0:
            raise ValueError(f"exponent p must exceed 1, got {self.p}")

    def initial_values(self) -> np.ndarray:
        return self.initial_data.profile(self.grid.nodes, self.grid.radius)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the admissibility checks for one initial datum.

    ``passed`` means the datum may be integrated (structural requirements:
    nonzero, nonnegative, correct monotonicity, boundary behaviour, and for
    the flux problem a compatible datum).  ``time_monotone`` records whether
    the interior source-sign condition min(lap u0 + exp(u0^p)) >= 0 holds;
    when it fails the solution is not guaranteed to grow pointwise in time
    and the time-monotonicity monitor does not apply, but the run itself is
    still well-posed.
    """

    passed: bool
    notes: tuple[str, ...] = ()
    source_sign_min: float | None = None    # min over nodes, lap u0 + exp(u0^p)
    time_monotone: bool | None = None
    slope_ratio_min: float | None = None    # min over (0,R] of -u0'(r)/r
    compat_residual: float | None = None    # |u0'(R) - exp(u0(R)^p)|
    convexity_floor: float | None = None    # min lap u0 (= 2*n*b for the paraboloid)


def validate_dirichlet_ic(data: InitialData, grid: RadialGrid,
                          p: float) -> ValidationReport:
    """Check a bump datum for the interior-source problem.

    Structural requirements: positive amplitude, shape >= 1, nonzero and
    nonnegative profile vanishing at r = R, radially nonincreasing.  Also
    reported: the source-sign minimum (admissible growth-in-time condition)
    and the largest delta with u0'(r) <= -delta*r, both from the analytic
    family derivatives evaluated on the nodes.
    """
    if not isinstance(data, PolynomialBump):
        raise FamilyMismatchError("dirichlet validator expects PolynomialBump")
    notes: list[str] = []
    ok = True
    if not data.amplitude > 0.0:
        ok = False
        notes.append("amplitude must be positive (nonzero datum required)")
    if data.shape < 1.0:
        ok = False
        notes.append("shape exponent must be >= 1 (smoothness at the rim)")

    r = grid.nodes
    u0 = data.profile(r, grid.radius)
    du0 = data.slope(r, grid.radius)
    lap0 = data.laplacian(r, grid.radius, grid.n_dim)

    if np.any(u0 < 0.0):
        ok = False
        notes.append("datum must be nonnegative")
    if abs(u0[-1]) > 1e-12 * max(1.0, abs(data.amplitude)):
        ok = False
        notes.append(f"datum must vanish at r = R (got {u0[-1]:g})")
    if np.any(du0 > 0.0):
        ok = False
        notes.append("datum must be radially nonincreasing")

    src = lap0 + np.exp(np.minimum(u0 ** p, LOG_OVERFLOW))
    source_sign_min = float(src.min())
    scale = float(max(1.0, np.abs(lap0).max(), np.exp(min(float(u0.max()) ** p,
                                                          LOG_OVERFLOW))))
    time_monotone = source_sign_min >= -TOL_SOURCE_SIGN * scale
    if not time_monotone:
        i = int(src.argmin())
        notes.append("source-sign condition lap u0 + exp(u0^p) >= 0 fails "
                     f"(min {source_sign_min:g} at r = {r[i]:g}); growth in "
                     "time is not guaranteed off-center")

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(r > 0.0, -du0 / np.where(r > 0.0, r, 1.0), np.inf)
    slope_ratio_min = float(ratio[1:].min()) if len(r) > 1 else 0.0
    if slope_ratio_min <= 0.0:
        notes.append("initial slope does not dominate -delta*r for any "
                     "delta > 0; gradient-bound monitor will not apply")

    return ValidationReport(passed=ok, notes=tuple(notes),
                            source_sign_min=source_sign_min,
                            time_monotone=time_monotone,
                            slope_ratio_min=slope_ratio_min)


def validate_neumann_ic(data: InitialData, grid: RadialGrid,
                        p: float) -> ValidationReport:
    """Check a paraboloid datum for the boundary-flux problem.

    Requires nonnegativity, a radially nondecreasing profile, a strictly
    positive Laplacian floor, and flux compatibility at the rim:
    u0'(R) = exp(u0(R)^p) to within TOL_COMPAT.
    """
    if not isinstance(data, QuadraticNeumann):
        raise FamilyMismatchError("neumann validator expects QuadraticNeumann")
    notes: list[str] = []
    ok = True
    if data.center_value < 0.0:
        ok = False
        notes.append("center value must be >= 0")
    if not data.curvature > 0.0:
        ok = False
        notes.append("curvature must be positive (needs lap u0 > 0)")

    R = grid.radius
    u0R = data.center_value + data.curvature * R * R
    resid = abs(2.0 * data.curvature * R
                - math.exp(min(u0R ** p, LOG_OVERFLOW)))
    if resid > TOL_COMPAT:
        ok = False
        notes.append(f"flux compatibility u0'(R) = exp(u0(R)^p) violated "
                     f"(residual {resid:g})")

    floor = 2.0 * grid.n_dim * data.curvature
    return ValidationReport(passed=ok, notes=tuple(notes),
                            compat_residual=float(resid),
                            convexity_floor=float(floor),
                            time_monotone=ok)


def solve_neumann_curvature(alpha: float, radius: float, p: float,
                            beta_max: float = 16.0) -> float:
    """Smallest positive curvature b making a + b*r^2 flux-compatible.

    Solves g(b) = 2*b*R - exp((a + b*R^2)^p) = 0 by a dense sign scan on
    (0, beta_max] followed by bisection to |g| <= 1e-12.  Raises NoRootError
    when g < 0 throughout, i.e. this (a, R, p) admits no compatible
    paraboloid and the caller must change parameters.
    """
    if alpha < 0.0:
        raise ValueError("center value must be >= 0")
    if not radius > 0.0:
        raise ValueError("radius must be positive")
    if not p > 1.0:
        raise ValueError("p must exceed 1")

    R = radius

    def g(b: float) -> float:
        expo = (alpha + b * R * R) ** p
        if expo > LOG_OVERFLOW:
            return -math.inf
        return 2.0 * b * R - math.exp(expo)

    bs = np.linspace(0.0, beta_max, 65537)[1:]
    with np.errstate(over="ignore"):
        expo = (alpha + bs * R * R) ** p
        vals = np.where(expo > LOG_OVERFLOW, -np.inf,
                        2.0 * bs * R - np.exp(np.minimum(expo, LOG_OVERFLOW)))
    pos = np.where(vals > 0.0)[0]
    if pos.size == 0:
        raise NoRootError(f"no compatible curvature for alpha={alpha:g}, "
                          f"R={R:g}, p={p:g} on (0, {beta_max:g}]")
    i = int(pos[0])
    lo = float(bs[i - 1]) if i > 0 else 0.0
    hi = float(bs[i])
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)
