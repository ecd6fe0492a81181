"""
CAPM and the security market line.

The systemic portfolio is an outside input: callers pass its expected
return and variance plus the asset's covariance with it.
"""

from dataclasses import dataclass
from enum import Enum

from mv_frontier.config import resolve
from mv_frontier.exceptions import InvalidParameter, NonPositiveSystemicVariance, throw


class SmlClass(str, Enum):
    FAIR = "Fair"
    # below the line
    OVERESTIMATED = "Overestimated"
    # above the line
    UNDERESTIMATED = "Underestimated"


@dataclass(frozen=True)
class CapmInputs:
    r_f: float
    mu_S: float
    var_S: float
    cov_AS: float

    def __post_init__(self):
        if not self.var_S > 0:
            throw(f"Systemic variance must be positive, got {self.var_S!r}", NonPositiveSystemicVariance)

    @property
    def beta(self) -> float:
        return beta(self.cov_AS, self.var_S)

    @property
    def expected_return(self) -> float:
        return capm_expected_return(self.r_f, self.beta, self.mu_S)


def beta(cov_AS: float, var_S: float) -> float:
    """β = cov(r_A, r_S)/σ_S²."""
    if not var_S > 0:
        throw(f"Systemic variance must be positive, got {var_S!r}", NonPositiveSystemicVariance)
    return cov_AS / var_S


def security_market_line(beta: float, r_f: float, mu_S: float) -> float:
    # (1 - β)·r_f + β·μ_S hits (0, r_f) and (1, μ_S) without rounding
    return (1.0 - beta) * r_f + beta * mu_S


def capm_expected_return(r_f: float, beta: float, mu_S: float) -> float:
    """r_f + β(μ_S - r_f)."""
    return security_market_line(beta, r_f, mu_S)


def sml_classify(observed_mu: float, beta: float, r_f: float, mu_S: float, tol: float | None = None) -> SmlClass:
    tol = resolve(None).sml_tol if tol is None else tol
    if not tol >= 0:
        throw(f"Classification tolerance must be non-negative, got {tol!r}", InvalidParameter)
    gap = observed_mu - security_market_line(beta, r_f, mu_S)
    if abs(gap) <= tol:
        return SmlClass.FAIR
    return SmlClass.OVERESTIMATED if gap < 0 else SmlClass.UNDERESTIMATED
