"""
Brute-force verification of the closed forms.

Random portfolios are drawn on the constraint plane by projection (never
rejection): W = W₀ + P·Z with Z Gaussian, P the orthogonal projector onto the
null space of the constraint normals and W₀ a point of the plane. Samples are
generated in fixed-size blocks whose generators are seeded by
(seed, block index), so the best sample found does not depend on how many
workers evaluate the blocks.
"""

from collections.abc import Callable, Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from mv_frontier.config import Tolerances, resolve
from mv_frontier.exceptions import InvalidParameter, throw
from mv_frontier.portfolio.market_model import MarketModel, ensure_validated, portfolio_variance
from mv_frontier.portfolio.optimizer import (
    NEGATIVE_TANGENCY,
    max_sharpe_portfolio,
    min_variance_for_return,
    risk_free_rate,
)
from mv_frontier.utils import as_vector, logger

BLOCK_SIZE = 4096

MIN_VARIANCE = "minvar"
MAX_SHARPE = "sharpe"
TARGET_RETURN = "target"


@dataclass(frozen=True)
class OracleReport:
    """`margin` is positive when the closed form wins: oracle - closed form
    for minimized objectives, closed form - oracle for maximized ones."""

    objective: str
    best_objective: float
    best_weights: np.ndarray
    samples: int
    seed: int
    closed_form_objective: float
    margin: float
    spread: float
    slack: float

    @property
    def passed(self) -> bool:
        return self.margin >= -self.slack

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "best_objective": self.best_objective,
            "best_weights": self.best_weights.tolist(),
            "samples": self.samples,
            "seed": self.seed,
            "spread": self.spread,
            "closed_form_objective": self.closed_form_objective,
            "margin": self.margin,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class ConstraintPlane:
    """{W : KWᵀ = h} for K = [𝟙] or [𝟙; μ]."""

    base: np.ndarray
    normals: np.ndarray

    @classmethod
    def build(cls, n: int, mu=None, mu_0: float | None = None) -> "ConstraintPlane":
        ones = np.ones(n)
        if mu is None:
            return cls(base=as_vector(ones / n), normals=_orthonormal(ones[:, None]))
        constraint = np.vstack([ones, as_vector(mu)])
        base, *_ = np.linalg.lstsq(constraint, np.array([1.0, float(mu_0)]), rcond=None)
        return cls(base=as_vector(base), normals=_orthonormal(constraint.T))

    def project(self, z: np.ndarray) -> np.ndarray:
        return z - (z @ self.normals) @ self.normals.T


def _orthonormal(columns: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(columns)
    return q


def _sample_block(plane: ConstraintPlane, seed: int, block: int, size: int, spread: float) -> np.ndarray:
    rng = np.random.default_rng([seed, block])
    z = rng.standard_normal((size, len(plane.base))) * spread
    return plane.base + plane.project(z)


def _block_sizes(samples: int) -> list[int]:
    full, rest = divmod(samples, BLOCK_SIZE)
    return [BLOCK_SIZE] * full + ([rest] if rest else [])


def _check_sampling(samples: int, seed: int, spread: float) -> None:
    if int(samples) != samples or samples < 1:
        throw(f"samples must be a positive integer, got {samples!r}", InvalidParameter)
    if int(seed) != seed or seed < 0:
        throw(f"seed must be a non-negative integer, got {seed!r}", InvalidParameter)
    if not spread >= 0:
        throw(f"spread must be non-negative, got {spread!r}", InvalidParameter)


# ========= SAMPLING =========
def random_constraint_portfolios(
    n: int,
    samples: int,
    seed: int,
    spread: float = 1.0,
    mu=None,
    mu_0: float | None = None,
) -> Iterator[np.ndarray]:
    """Stream of `samples` weight vectors with 𝟙Wᵀ = 1 (and μWᵀ = mu_0 when `mu` is given)."""
    _check_sampling(samples, seed, spread)
    plane = ConstraintPlane.build(n, mu, mu_0)
    for block, size in enumerate(_block_sizes(samples)):
        yield from _sample_block(plane, seed, block, size, spread)


def _search(
    plane: ConstraintPlane,
    evaluate: Callable[[np.ndarray], np.ndarray],
    samples: int,
    seed: int,
    spread: float,
    maximize: bool,
    workers: int,
) -> tuple[float, np.ndarray]:
    sizes = _block_sizes(samples)

    def run(block: int):
        weights = _sample_block(plane, seed, block, sizes[block], spread)
        values = evaluate(weights)
        i = int(np.argmax(values) if maximize else np.argmin(values))
        return float(values[i]), block * BLOCK_SIZE + i, weights[i]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(len(sizes))))
    else:
        results = [run(block) for block in range(len(sizes))]

    # ties go to the lowest global sample index
    sign = -1.0 if maximize else 1.0
    best_value, _, best_weights = min(results, key=lambda r: (sign * r[0], r[1]))
    return best_value, as_vector(best_weights)


def _variances(sigma: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    return lambda weights: np.einsum("ij,jk,ik->i", weights, sigma, weights)


def _report(objective, best, weights, samples, seed, spread, closed, maximize, tol) -> OracleReport:
    margin = closed - best if maximize else best - closed
    report = OracleReport(
        objective=objective,
        best_objective=best,
        best_weights=weights,
        samples=int(samples),
        seed=int(seed),
        closed_form_objective=closed,
        margin=margin,
        spread=float(spread),
        slack=tol.oracle_slack,
    )
    log = logger("oracle")
    log.debug(f"[{objective}] samples={samples} seed={seed} closed={closed!r} best={best!r} margin={margin!r}")
    if not report.passed:
        log.warning(f"[{objective}] oracle beat the closed form by {-margin!r}")
    return report


# ========= VERIFICATION =========
def verify_min_variance(
    model: MarketModel,
    samples: int = 100_000,
    seed: int = 42,
    spread: float = 1.0,
    workers: int = 1,
    tolerances: Tolerances | None = None,
) -> OracleReport:
    tol = resolve(tolerances)
    _check_sampling(samples, seed, spread)
    model = ensure_validated(model, tol)
    closed = 1.0 / model.factor.A

    plane = ConstraintPlane.build(model.n)
    best, weights = _search(plane, _variances(model.sigma), samples, seed, spread, False, workers)
    return _report(MIN_VARIANCE, best, weights, samples, seed, spread, closed, False, tol)


def verify_max_sharpe(
    model: MarketModel,
    rf: float | None = None,
    samples: int = 100_000,
    seed: int = 42,
    spread: float = 1.0,
    workers: int = 1,
    tolerances: Tolerances | None = None,
) -> OracleReport:
    tol = resolve(tolerances)
    _check_sampling(samples, seed, spread)
    model = ensure_validated(model, tol)
    rf = risk_free_rate(model, rf)
    solution = max_sharpe_portfolio(model, rf, tol)
    if NEGATIVE_TANGENCY in solution.warnings:
        logger("oracle").warning("[sharpe] negative tangency: the closed form is not a Sharpe maximizer")

    excess = model.mu - rf
    variances = _variances(model.sigma)

    def sharpe(weights: np.ndarray) -> np.ndarray:
        return (weights @ excess) / np.sqrt(variances(weights))

    plane = ConstraintPlane.build(model.n)
    best, weights = _search(plane, sharpe, samples, seed, spread, True, workers)
    return _report(MAX_SHARPE, best, weights, samples, seed, spread, solution.sharpe, True, tol)


def verify_target_return(
    model: MarketModel,
    mu_0: float,
    samples: int = 100_000,
    seed: int = 42,
    spread: float = 1.0,
    workers: int = 1,
    tolerances: Tolerances | None = None,
) -> OracleReport:
    tol = resolve(tolerances)
    _check_sampling(samples, seed, spread)
    model = ensure_validated(model, tol)
    solution = min_variance_for_return(model, mu_0, tol)
    closed = portfolio_variance(model, solution.weights)

    plane = ConstraintPlane.build(model.n, model.mu, mu_0)
    best, weights = _search(plane, _variances(model.sigma), samples, seed, spread, False, workers)
    return _report(TARGET_RETURN, best, weights, samples, seed, spread, closed, False, tol)
