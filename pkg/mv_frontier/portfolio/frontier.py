"""
Frontier geometry in the (σ, μ) plane.

The minimum variance frontier is the hyperbola σ² = aμ² + bμ + c; its upper
half (μ ≥ μ_σmin) is the efficient frontier. With a risk-free asset the
frontier becomes the semi-lines μ = ±slope·σ + r_f, the upper one touching
the hyperbola at the tangency portfolio.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import pandas as pd

from mv_frontier.config import Tolerances, resolve
from mv_frontier.exceptions import DegenerateFrontier, InvalidRange, NegativeTangency, throw
from mv_frontier.portfolio.market_model import MarketModel, ensure_validated, solve_spd
from mv_frontier.portfolio.optimizer import (
    NEGATIVE_TANGENCY,
    PortfolioSolution,
    excess_returns,
    max_sharpe_portfolio,
    min_variance_for_return,
    risk_free_rate,
)
from mv_frontier.utils import logger

EFFICIENT = "efficient"
INEFFICIENT = "inefficient"


@dataclass(frozen=True)
class FrontierCoefficients:
    a: float
    b: float
    c: float
    d: float
    mu_sigma_min: float
    sigma_min: float

    def sigma_at(self, mu: float) -> float:
        return frontier_sigma(self, mu)

    def mu_at(self, sigma: float, branch: str = EFFICIENT) -> float:
        return frontier_mu(self, sigma, branch)

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "d": self.d,
            "mu_sigma_min": self.mu_sigma_min,
            "sigma_min": self.sigma_min,
        }


@dataclass(frozen=True)
class LineSpec:
    """μ = slope·σ + intercept on the half-line σ ≥ 0."""

    slope: float
    intercept: float
    sigma_min: float = 0.0

    def mu_at(self, sigma: float) -> float:
        if sigma < self.sigma_min:
            throw(f"sigma={sigma!r} is outside the line's domain sigma >= {self.sigma_min!r}", InvalidRange)
        return self.slope * sigma + self.intercept

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "sigma_min": self.sigma_min}


@dataclass(frozen=True)
class TangentLine:
    line: LineSpec
    sigma_m: float
    mu_m: float
    portfolio: PortfolioSolution

    def parametric(self, w: float) -> tuple[float, float]:
        """(σ, μ) of w in the tangency portfolio and 1 - w in the risk-free asset."""
        return w * self.sigma_m, w * self.mu_m + (1.0 - w) * self.line.intercept

    def sample(self, k: int, w_max: float = 1.0) -> list[tuple[float, float]]:
        if k < 2 or not w_max > 0:
            throw(f"Need k >= 2 and w_max > 0, got k={k!r} w_max={w_max!r}", InvalidRange)
        return [self.parametric(float(w)) for w in np.linspace(0.0, w_max, k)]

    def to_dict(self) -> dict:
        return {**self.line.to_dict(), "tangency": {"sigma": self.sigma_m, "mu": self.mu_m}}


class FrontierPoint(NamedTuple):
    mu: float
    sigma: float
    weights: np.ndarray
    efficient: bool


# ========= HYPERBOLA =========
def frontier_coefficients(model: MarketModel, tolerances: Tolerances | None = None) -> FrontierCoefficients:
    """a = A/d, b = -2B/d, c = C/d with d = CA - B²."""
    tol = resolve(tolerances)
    model = ensure_validated(model, tol)
    f = model.factor
    if f.is_degenerate(tol):
        throw(
            f"Expected returns are collinear with 𝟙 (d = {f.d!r}); the frontier degenerates",
            DegenerateFrontier,
            d=f.d,
        )
    d = f.d
    coeffs = FrontierCoefficients(
        a=f.A / d,
        b=-2.0 * f.B / d,
        c=f.C / d,
        d=d,
        mu_sigma_min=f.B / f.A,
        sigma_min=float(np.sqrt(1.0 / f.A)),
    )
    logger("frontier").debug(f"[coefficients] a={coeffs.a!r} b={coeffs.b!r} c={coeffs.c!r} d={d!r}")
    return coeffs


def frontier_sigma(coeffs: FrontierCoefficients, mu: float) -> float:
    variance = coeffs.a * mu * mu + coeffs.b * mu + coeffs.c
    return float(np.sqrt(max(variance, 0.0)))


def frontier_mu(coeffs: FrontierCoefficients, sigma: float, branch: str = EFFICIENT) -> float:
    """Return on the chosen half of the frontier at standard deviation `sigma`."""
    if branch not in (EFFICIENT, INEFFICIENT):
        throw(f"branch must be '{EFFICIENT}' or '{INEFFICIENT}', got {branch!r}", InvalidRange)
    excess_variance = sigma * sigma - coeffs.sigma_min**2
    if sigma < 0 or excess_variance < -1e-12 * coeffs.sigma_min**2:
        throw(f"sigma={sigma!r} is below the minimum standard deviation {coeffs.sigma_min!r}", InvalidRange)
    offset = float(np.sqrt(max(excess_variance, 0.0) / coeffs.a))
    return coeffs.mu_sigma_min + offset if branch == EFFICIENT else coeffs.mu_sigma_min - offset


# ========= LINES =========
def cml_line(
    model: MarketModel, rf: float | None = None, mirrored: bool = False, tolerances: Tolerances | None = None
) -> LineSpec:
    """μ = √(μ̃Σ⁻¹μ̃ᵀ)·σ + r_f; `mirrored` gives the lower semi-line."""
    tol = resolve(tolerances)
    model = ensure_validated(model, tol)
    rf = risk_free_rate(model, rf)
    excess = excess_returns(model, rf, tol)
    slope = float(np.sqrt(excess @ solve_spd(model.factor, excess, tol)))
    logger("frontier").debug(f"[cml] rf={rf!r} slope={slope!r}")
    return LineSpec(slope=-slope if mirrored else slope, intercept=rf)


def tangent_line(model: MarketModel, rf: float | None = None, tolerances: Tolerances | None = None) -> TangentLine:
    """Tangent to the efficient frontier through (0, r_f), touching it at the tangency portfolio."""
    tol = resolve(tolerances)
    model = ensure_validated(model, tol)
    rf = risk_free_rate(model, rf)
    portfolio = max_sharpe_portfolio(model, rf, tol)
    if NEGATIVE_TANGENCY in portfolio.warnings:
        throw(
            f"r_f={rf!r} is not below the minimum variance return; no tangent line exists",
            NegativeTangency,
        )
    slope = (portfolio.mu - rf) / portfolio.sigma
    return TangentLine(
        line=LineSpec(slope=slope, intercept=rf),
        sigma_m=portfolio.sigma,
        mu_m=portfolio.mu,
        portfolio=portfolio,
    )


def line_discriminant(coeffs: FrontierCoefficients, line: LineSpec) -> float:
    """Discriminant of (as² - 1)σ² + (2as·r + bs)σ + (ar² + br + c) = 0.

    Substituting μ = sσ + r into σ² = aμ² + bμ + c; zero means the line
    touches the hyperbola exactly once.
    """
    a, b, c = coeffs.a, coeffs.b, coeffs.c
    s, r = line.slope, line.intercept
    quad = a * s * s - 1.0
    lin = 2.0 * a * s * r + b * s
    const = a * r * r + b * r + c
    return lin * lin - 4.0 * quad * const


# ========= SAMPLING =========
def sample_frontier(
    model: MarketModel,
    mu_lo: float,
    mu_hi: float,
    k: int,
    include_inefficient: bool = False,
    tolerances: Tolerances | None = None,
) -> list[FrontierPoint]:
    """k evenly spaced returns in [mu_lo, mu_hi], ascending.

    Points below μ_σmin are on the inefficient half; they are dropped unless
    `include_inefficient` is set.
    """
    tol = resolve(tolerances)
    if int(k) != k or k < 2 or not mu_lo < mu_hi:
        throw(f"Need k >= 2 and mu_lo < mu_hi, got k={k!r} range=[{mu_lo!r}, {mu_hi!r}]", InvalidRange)
    model = ensure_validated(model, tol)
    coeffs = frontier_coefficients(model, tol)

    points = []
    for mu in np.linspace(mu_lo, mu_hi, int(k)):
        mu = float(mu)
        efficient = mu >= coeffs.mu_sigma_min
        if not (efficient or include_inefficient):
            continue
        sigma = frontier_sigma(coeffs, mu)
        solution = min_variance_for_return(model, mu, tol)
        if abs(solution.sigma - sigma) > tol.frontier_check * max(sigma, coeffs.sigma_min):
            logger("frontier").warning(
                f"[sample] mu={mu!r}: hyperbola sigma {sigma!r} vs portfolio sigma {solution.sigma!r}"
            )
        points.append(FrontierPoint(mu=mu, sigma=sigma, weights=solution.weights, efficient=efficient))

    logger("frontier").debug(f"[sample] {len(points)} of {k} points kept on [{mu_lo!r}, {mu_hi!r}]")
    return points


def frontier_csv(points: list[FrontierPoint]) -> str:
    """`mu,sigma,efficient` rows with 17 significant digits."""
    frame = pd.DataFrame(
        {
            "mu": [p.mu for p in points],
            "sigma": [p.sigma for p in points],
            "efficient": ["true" if p.efficient else "false" for p in points],
        }
    )
    return frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")
