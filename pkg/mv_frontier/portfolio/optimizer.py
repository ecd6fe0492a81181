"""
Closed-form constrained optima.

- min_variance_portfolio: the global minimum variance portfolio
- max_sharpe_portfolio: the maximal Sharpe ratio (tangency) portfolio
- min_variance_for_return: minimum variance under a target return
- min_variance_with_riskfree: the same with a risk-free asset available
- two_fund_weights / combine_funds: mutual fund separation

Every solution reports the ∞-norm residual of its stationarity equation
instead of re-deriving second-order conditions: Σ is positive definite once
validated, so each stationary point is the optimum.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from mv_frontier.config import Tolerances, resolve
from mv_frontier.exceptions import (
    CoefficientSumViolation,
    DegenerateFrontier,
    DimensionMismatch,
    EqualFundReturns,
    InvalidParameter,
    TangencyUndefined,
    ZeroExcessReturns,
    ZeroVariancePortfolio,
    throw,
)
from mv_frontier.portfolio.market_model import (
    MarketModel,
    ensure_validated,
    portfolio_moments,
    portfolio_variance,
    solve_spd,
)
from mv_frontier.utils import as_vector, logger

NEGATIVE_TANGENCY = "NegativeTangency"
INEFFICIENT_BRANCH = "InefficientBranch"
FRONTIER_UNAVAILABLE = "FrontierUnavailable"


@dataclass(frozen=True)
class PortfolioSolution:
    weights: np.ndarray
    mu: float
    sigma: float
    kkt_residual: float
    wf: float | None = None
    sharpe: float | None = None
    warnings: tuple[str, ...] = ()
    labels: tuple[str, ...] = ()
    # combine_funds only
    efficient: bool | None = None
    target_mu: float | None = None

    @property
    def budget(self) -> float:
        """𝟙Wᵀ + w_f; 1 for every closed-form solution."""
        return float(np.sum(self.weights)) + (self.wf or 0.0)

    def to_dict(self) -> dict:
        out = {"labels": list(self.labels), "weights": self.weights.tolist()}
        if self.wf is not None:
            out["wf"] = self.wf
        out.update(
            mu=self.mu,
            sigma=self.sigma,
            sharpe=self.sharpe,
            kkt_residual=self.kkt_residual,
            warnings=list(self.warnings),
        )
        if self.efficient is not None:
            out["efficient"] = self.efficient
        if self.target_mu is not None:
            out["target_mu"] = self.target_mu
        return out


class Fund(NamedTuple):
    weights: Sequence[float] | np.ndarray
    # target return the fund was built for; realized μWᵀ when None
    mu_0: float | None = None

    @classmethod
    def coerce(cls, entry) -> "Fund":
        """A Fund, a (weights, mu_0) pair or a bare weight vector."""
        if isinstance(entry, Fund):
            return entry
        if isinstance(entry, tuple | list) and len(entry) == 2 and np.ndim(entry[0]) == 1 and np.ndim(entry[1]) == 0:
            return cls(entry[0], entry[1])
        return cls(entry)


def _solution(
    model: MarketModel, weights: np.ndarray, kkt: float, wf: float | None = None, rf: float = 0.0, **kwargs
) -> PortfolioSolution:
    mu_p, sigma_p = portfolio_moments(model, weights)
    if wf is not None:
        mu_p += wf * rf
    return PortfolioSolution(
        weights=as_vector(weights), mu=mu_p, sigma=sigma_p, kkt_residual=kkt, wf=wf, labels=model.labels, **kwargs
    )


def _inf_norm(vec: np.ndarray) -> float:
    return float(np.max(np.abs(vec))) if len(vec) else 0.0


def risk_free_rate(model: MarketModel, rf: float | None) -> float:
    rf = model.rf if rf is None else rf
    if rf is None:
        throw("A risk-free rate is required (none given and the model has no rf)", InvalidParameter)
    return float(rf)


def excess_returns(model: MarketModel, rf: float, tol: Tolerances) -> np.ndarray:
    excess = model.mu - rf
    if _inf_norm(excess) <= tol.zero_excess:
        throw(f"Every expected return equals the risk-free rate {rf!r}", ZeroExcessReturns)
    return excess


# ========= MINIMUM VARIANCE =========
def min_variance_portfolio(model: MarketModel, tolerances: Tolerances | None = None) -> PortfolioSolution:
    """Wᵀ = Σ⁻¹𝟙ᵀ/A with σ² = 1/A; multiplier λ = 2/A."""
    model = ensure_validated(model, tolerances)
    f = model.factor

    weights = f.inv_ones / f.A
    lam = 2.0 / f.A
    kkt = _inf_norm(2.0 * model.sigma @ weights - lam)

    sol = _solution(model, weights, kkt)
    logger("optimizer").debug(f"[minvar] sigma={sol.sigma!r} mu={sol.mu!r} kkt={kkt:.3e}")
    return sol


# ========= MAXIMAL SHARPE RATIO =========
def max_sharpe_portfolio(
    model: MarketModel, rf: float | None = None, tolerances: Tolerances | None = None
) -> PortfolioSolution:
    """Wᵀ = Σ⁻¹μ̃ᵀ/(𝟙Σ⁻¹μ̃ᵀ), μ̃ = μ - r_f𝟙.

    The reported Sharpe ratio is √(μ̃Σ⁻¹μ̃ᵀ) times the sign of 𝟙Σ⁻¹μ̃ᵀ. A
    negative denominator is flagged NegativeTangency: the weights are still
    returned but there is no tangency geometry.
    """
    tol = resolve(tolerances)
    model = ensure_validated(model, tol)
    rf = risk_free_rate(model, rf)
    excess = excess_returns(model, rf, tol)

    x = solve_spd(model.factor, excess, tol)
    denominator = float(np.sum(x))
    if abs(denominator) <= tol.tangency_floor * float(np.sum(np.abs(x))):
        throw(
            f"𝟙Σ⁻¹μ̃ᵀ = {denominator!r} vanishes at r_f={rf!r}: the maximal Sharpe portfolio is undefined",
            TangencyUndefined,
            denominator=denominator,
        )

    weights = x / denominator
    sharpe = float(np.sqrt(excess @ x)) * float(np.sign(denominator))
    warnings = ()
    if denominator < 0:
        warnings = (NEGATIVE_TANGENCY,)
        logger("optimizer").warning(
            f"[tangency] 𝟙Σ⁻¹μ̃ᵀ = {denominator!r} < 0 at r_f={rf!r}; r_f lies above the minimum variance return"
        )
    kkt = _inf_norm(2.0 * model.sigma @ weights - (2.0 / denominator) * excess)

    sol = _solution(model, weights, kkt, sharpe=sharpe, warnings=warnings)
    logger("optimizer").debug(f"[tangency] rf={rf!r} sharpe={sharpe!r} sigma={sol.sigma!r} mu={sol.mu!r}")
    return sol


def sharpe_ratio(model: MarketModel, weights, rf: float | None = None) -> float:
    """S_P(W) = Wμ̃ᵀ/√(WΣWᵀ); invariant under positive scaling of W."""
    rf = risk_free_rate(model, rf)
    weights = as_vector(weights)
    variance = portfolio_variance(model, weights)
    if not variance > 0:
        throw(f"Portfolio variance {variance!r} is not positive", ZeroVariancePortfolio)
    return float(weights @ (model.mu - rf)) / float(np.sqrt(variance))


# ========= TARGET RETURN =========
def target_multipliers(model: MarketModel, mu_0: float, tolerances: Tolerances | None = None) -> tuple[float, float]:
    """(λ₁/2, λ₂/2) solving the 2x2 system [C B; B A]·λ/2 = (μ₀, 1)."""
    tol = resolve(tolerances)
    model = ensure_validated(model, tol)
    f = model.factor
    if f.is_degenerate(tol):
        throw(
            f"Expected returns are collinear with 𝟙 (d = {f.d!r}); the frontier degenerates",
            DegenerateFrontier,
            d=f.d,
        )
    return (f.A * mu_0 - f.B) / f.d, (f.C - f.B * mu_0) / f.d


def min_variance_for_return(
    model: MarketModel, mu_0: float, tolerances: Tolerances | None = None
) -> PortfolioSolution:
    """Wᵀ = Σ⁻¹μᵀ·λ₁/2 + Σ⁻¹𝟙ᵀ·λ₂/2 with μWᵀ = μ₀ and 𝟙Wᵀ = 1.

    Targets below the minimum variance return are allowed (the lower,
    inefficient half of the frontier) and flagged InefficientBranch.
    """
    tol = resolve(tolerances)
    model = ensure_validated(model, tol)
    f = model.factor
    mu_0 = float(mu_0)

    half_1, half_2 = target_multipliers(model, mu_0, tol)
    weights = f.inv_mu * half_1 + f.inv_ones * half_2
    kkt = _inf_norm(2.0 * model.sigma @ weights - 2.0 * half_1 * model.mu - 2.0 * half_2)

    warnings = ()
    if mu_0 < f.B / f.A:
        warnings = (INEFFICIENT_BRANCH,)
        logger("optimizer").debug(f"[target] mu_0={mu_0!r} is below the minimum variance return {f.B / f.A!r}")

    sol = _solution(model, weights, kkt, warnings=warnings)
    logger("optimizer").debug(f"[target] mu_0={mu_0!r} sigma={sol.sigma!r} kkt={kkt:.3e}")
    return sol


def min_variance_with_riskfree(
    model: MarketModel, rf: float | None, mu_0: float, tolerances: Tolerances | None = None
) -> PortfolioSolution:
    """Wᵀ = (μ₀ - r_f)·Σ⁻¹μ̃ᵀ/(μ̃Σ⁻¹μ̃ᵀ), w_f = 1 - 𝟙Wᵀ, σ_P = |μ₀ - r_f|/√(μ̃Σ⁻¹μ̃ᵀ)."""
    tol = resolve(tolerances)
    model = ensure_validated(model, tol)
    rf = risk_free_rate(model, rf)
    mu_0 = float(mu_0)
    excess = excess_returns(model, rf, tol)

    x = solve_spd(model.factor, excess, tol)
    quad = float(excess @ x)
    weights = (mu_0 - rf) * x / quad
    wf = 1.0 - float(np.sum(weights))
    lam = 2.0 * (mu_0 - rf) / quad
    kkt = _inf_norm(2.0 * model.sigma @ weights - lam * excess)
    sharpe = float(np.sign(mu_0 - rf)) * float(np.sqrt(quad))

    sol = _solution(model, weights, kkt, wf=wf, rf=rf, sharpe=sharpe)
    logger("optimizer").debug(f"[target+rf] rf={rf!r} mu_0={mu_0!r} wf={wf!r} sigma={sol.sigma!r}")
    return sol


# ========= FUND SEPARATION =========
def two_fund_weights(
    mu_01: float, mu_02: float, target: float, tolerances: Tolerances | None = None
) -> tuple[float, float]:
    """Interpolation weights of two efficient funds that hit `target`."""
    tol = resolve(tolerances)
    spread = mu_01 - mu_02
    if abs(spread) <= tol.equal_funds * max(abs(mu_01), abs(mu_02)):
        throw(f"Fund returns {mu_01!r} and {mu_02!r} coincide", EqualFundReturns)
    return (target - mu_02) / spread, (mu_01 - target) / spread


def combine_funds(
    model: MarketModel,
    funds: Sequence[Fund | tuple],
    coeffs: Sequence[float],
    tolerances: Tolerances | None = None,
) -> PortfolioSolution:
    """Σ coeffs_i·W_i, verified against the frontier.

    `efficient` is True when the combination's σ matches the minimum variance
    portfolio at the combined target Σ coeffs_i·μ₀ᵢ (within efficiency_rtol)
    and that target is on the upper half of the frontier.
    """
    tol = resolve(tolerances)
    model = ensure_validated(model, tol)
    funds = [Fund.coerce(fund) for fund in funds]
    coeffs = as_vector(coeffs)

    if not funds or len(funds) != len(coeffs):
        throw(f"{len(coeffs)} coefficients given for {len(funds)} funds", DimensionMismatch)
    rows = [as_vector(fund.weights) for fund in funds]
    for i, row in enumerate(rows):
        if len(row) != model.n:
            throw(f"Fund {i + 1} holds {len(row)} weights, model has {model.n} assets", DimensionMismatch)
    matrix = np.vstack(rows)

    for i, row in enumerate(matrix):
        if abs(float(np.sum(row)) - 1.0) > tol.fund_budget:
            throw(f"Fund {i + 1} weights sum to {float(np.sum(row))!r}, not 1", InvalidParameter, fund=i + 1)
    if abs(float(np.sum(coeffs)) - 1.0) > tol.coeff_sum:
        throw(f"Coefficients sum to {float(np.sum(coeffs))!r}, not 1", CoefficientSumViolation)

    fund_targets = np.array(
        [float(model.mu @ row) if fund.mu_0 is None else float(fund.mu_0) for fund, row in zip(funds, matrix)]
    )
    weights = coeffs @ matrix
    target = float(coeffs @ fund_targets)
    _, sigma_p = portfolio_moments(model, weights)

    warnings = []
    efficient = None
    kkt = float("nan")
    try:
        reference = min_variance_for_return(model, target, tol)
        half_1, half_2 = target_multipliers(model, target, tol)
        kkt = _inf_norm(2.0 * model.sigma @ weights - 2.0 * half_1 * model.mu - 2.0 * half_2)
        on_frontier = abs(sigma_p - reference.sigma) <= tol.efficiency_rtol * reference.sigma
        upper = INEFFICIENT_BRANCH not in reference.warnings
        if not upper:
            warnings.append(INEFFICIENT_BRANCH)
        efficient = bool(on_frontier and upper)
        if not on_frontier:
            logger("optimizer").warning(
                f"[separate] combined sigma {sigma_p!r} is off the frontier ({reference.sigma!r} at mu={target!r})"
            )
    except DegenerateFrontier:
        warnings.append(FRONTIER_UNAVAILABLE)
        logger("optimizer").warning("[separate] frontier is degenerate; efficiency not checked")

    sol = _solution(model, weights, kkt, warnings=tuple(warnings), efficient=efficient, target_mu=target)
    logger("optimizer").debug(f"[separate] m={len(funds)} target={target!r} efficient={efficient}")
    return sol
