"""
Numerical configuration.

All thresholds used by the library live in one frozen `Tolerances` record so
that a caller (or the CLI `--tol NAME=VALUE` flag) can override any of them
without touching module constants.
"""

from dataclasses import dataclass, fields, replace
from enum import Enum


class SpdMode(str, Enum):
    """How a singularity certificate is built when Cholesky fails."""

    EIGEN = "eigen"
    CHOLESKY = "cholesky"


@dataclass(frozen=True)
class Tolerances:
    # absolute; |Σ_ij - Σ_ji| above this is rejected, below it is averaged
    sym_tol: float = 1e-8
    # relative to max diag(Σ); Cholesky pivots at or below this fail
    spd_pivot_floor: float = 1e-12
    # relative residual accepted from an SPD solve before a warning is logged
    solve_tol: float = 1e-10
    # ‖μ - r_f‖∞ at or below this counts as zero excess returns
    zero_excess: float = 1e-12
    # |𝟙Σ⁻¹μ̃ᵀ| relative to ‖Σ⁻¹μ̃‖₁ at or below this: no tangency
    tangency_floor: float = 1e-12
    # d relative to C·A at or below this: degenerate frontier
    degenerate_frontier: float = 1e-12
    # |μ01 - μ02| relative to max magnitude at or below this: equal funds
    equal_funds: float = 1e-14
    # |Σ coeffs - 1| allowed by combine_funds
    coeff_sum: float = 1e-6
    # |𝟙W_i - 1| allowed for each fund passed to combine_funds
    fund_budget: float = 1e-6
    # relative σ gap to the frontier still counted as efficient
    efficiency_rtol: float = 1e-6
    # relative gap between hyperbola σ and target-return weights σ in samples
    frontier_check: float = 1e-8
    # SML classification band
    sml_tol: float = 1e-9
    # one-sided slack for oracle margins
    oracle_slack: float = 1e-9


DEFAULT_TOLERANCES = Tolerances()


def tolerance_names() -> list[str]:
    return [f.name for f in fields(Tolerances)]


def get_tolerances(base: Tolerances | None = None, **overrides: float) -> Tolerances:
    """Defaults (or `base`) with `overrides` applied; unknown names are rejected."""
    from mv_frontier.exceptions import InvalidParameter, throw

    known = set(tolerance_names())
    unknown = sorted(set(overrides) - known)
    if unknown:
        throw(f"Unknown tolerance(s): {', '.join(unknown)}", InvalidParameter, names=unknown)

    for name, value in overrides.items():
        if not value >= 0:
            throw(f"Tolerance {name} must be a non-negative number, got {value!r}", InvalidParameter)

    return replace(base or DEFAULT_TOLERANCES, **{k: float(v) for k, v in overrides.items()})


def resolve(tolerances: Tolerances | None) -> Tolerances:
    return tolerances if tolerances is not None else DEFAULT_TOLERANCES
