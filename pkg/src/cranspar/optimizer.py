"""Dinkelbach iteration for the optimal distance threshold.

The fractional objective ``F1/F2`` is reduced to a sequence of concave
subtractive subproblems ``F1 - q*F2``; each is maximized by bisection on
the sign of its derivative, and ``q`` is updated to the achieved ratio
until the subproblem value drops below the termination threshold.  A
brute-force grid evaluation of the fidelity bound serves as the
validation oracle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .analysis import BoundInputs, fidelity_lower_bound, objective_parts
from .errors import DomainError

__all__ = [
    "SolverSettings",
    "Termination",
    "DinkelbachIteration",
    "DinkelbachTrace",
    "solve_subproblem",
    "dinkelbach",
    "grid_oracle",
]


@dataclass(frozen=True)
class SolverSettings:
    """Termination threshold, iteration cap, and bisection granularity."""

    delta: float = 1e-4
    n_max: int = 20
    bisection_tol: float = 1e-3
    grid_points: int = 10_000

    def __post_init__(self):
        if self.delta <= 0 or self.n_max < 1 or self.bisection_tol <= 0:
            raise ValueError("delta and bisection_tol must be positive, n_max >= 1")
        if self.grid_points < 2:
            raise ValueError("grid_points must be at least 2")


class Termination(enum.Enum):
    CONVERGED_BELOW_DELTA = "converged_below_delta"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class DinkelbachIteration:
    index: int
    q: float
    d0: float
    f_of_q: float


@dataclass(frozen=True)
class DinkelbachTrace:
    iterations: tuple[DinkelbachIteration, ...]
    converged: bool
    final_d0: float
    final_q: float
    termination: Termination


def _subtractive(inputs: BoundInputs, q: float, d0: float) -> float:
    f1, f2 = objective_parts(inputs, d0)
    return f1 - q * f2


def solve_subproblem(inputs: BoundInputs, q: float, settings: SolverSettings) -> float:
    """Maximize ``F1 - q*F2`` over the threshold interval.

    ``q = 0`` maximizes ``F1`` alone, which is strictly increasing, so the
    right endpoint is returned directly.  Otherwise the concave objective
    is bisected on the sign of a central finite-difference derivative; if
    that derivative never changes sign, the better endpoint wins.  The
    ratio ``q`` is a fidelity-like quantity scaled by the mean link gain
    and must stay in [0, 1); anything else indicates a malformed
    configuration.
    """
    if not (0.0 <= q < 1.0):
        raise DomainError(f"subproblem parameter q must lie in [0, 1), got {q}")
    cfg = inputs.cfg
    r0, r = cfg.min_dist_m, cfg.radius_m
    if q == 0.0:
        return r

    h = max(settings.bisection_tol, 1e-6 * r)

    def derivative(x: float) -> float:
        x = min(max(x, r0 + h), r - h)
        return (
            _subtractive(inputs, q, x + h) - _subtractive(inputs, q, x - h)
        ) / (2.0 * h)

    lo, hi = r0, r
    if derivative(lo) <= 0.0 or derivative(hi) >= 0.0:
        # No interior sign change to bracket: compare the endpoints.
        return r0 if _subtractive(inputs, q, r0) >= _subtractive(inputs, q, r) else r
    while hi - lo > settings.bisection_tol:
        mid = 0.5 * (lo + hi)
        if derivative(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def dinkelbach(inputs: BoundInputs, settings: SolverSettings | None = None) -> DinkelbachTrace:
    """Iterate the subtractive subproblem until the ratio update stalls.

    Starts at ``q = 0``; each iteration solves the subproblem, records
    ``(q, d0, F(q))``, and either terminates (subproblem value below the
    threshold) or lifts ``q`` to the achieved ratio.  Hitting the
    iteration cap is an explicit, non-error outcome.
    """
    settings = settings or SolverSettings()
    iterations: list[DinkelbachIteration] = []
    q = 0.0
    converged = False
    d0 = inputs.cfg.radius_m
    for index in range(1, settings.n_max + 1):
        d0 = solve_subproblem(inputs, q, settings)
        f_value = _subtractive(inputs, q, d0)
        iterations.append(DinkelbachIteration(index=index, q=q, d0=d0, f_of_q=f_value))
        if f_value < settings.delta:
            converged = True
            break
        f1, f2 = objective_parts(inputs, d0)
        q = f1 / f2
    return DinkelbachTrace(
        iterations=tuple(iterations),
        converged=converged,
        final_d0=float(d0),
        final_q=float(iterations[-1].q),
        termination=(
            Termination.CONVERGED_BELOW_DELTA if converged else Termination.MAX_ITERATIONS
        ),
    )


def grid_oracle(inputs: BoundInputs, grid_points: int) -> tuple[float, float]:
    """Exhaustive argmax of the fidelity bound on a uniform threshold grid.

    Ties break toward the smaller threshold (sparser matrices at equal
    fidelity).
    """
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    cfg = inputs.cfg
    grid = np.linspace(cfg.min_dist_m, cfg.radius_m, grid_points)
    values = np.asarray(fidelity_lower_bound(inputs, grid))
    best = int(np.argmax(values))
    return float(grid[best]), float(values[best])
