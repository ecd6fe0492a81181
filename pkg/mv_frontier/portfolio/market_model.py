"""
Market data model and SPD linear algebra.

A `MarketModel` carries labels, expected returns μ, covariance Σ and an
optional risk-free rate. `validate_model` symmetrizes Σ, factorizes it with
Cholesky and attaches an `SpdFactor`; everything downstream solves against
that factor, Σ⁻¹ is never formed.
"""

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from mv_frontier.config import SpdMode, Tolerances, resolve
from mv_frontier.exceptions import (
    AsymmetryBeyondTolerance,
    DimensionMismatch,
    InvalidParameter,
    NegativeDiagonal,
    NotPositiveDefinite,
    throw,
)
from mv_frontier.utils import as_matrix, as_vector, logger


def default_labels(n: int) -> tuple[str, ...]:
    return tuple(f"A{i}" for i in range(1, n + 1))


@dataclass(frozen=True)
class SpdFactor:
    """Cholesky factor of a validated Σ with the cached aggregates
    A = 𝟙Σ⁻¹𝟙ᵀ, B = μΣ⁻¹𝟙ᵀ, C = μΣ⁻¹μᵀ."""

    matrix: np.ndarray
    lower: np.ndarray
    inv_ones: np.ndarray
    inv_mu: np.ndarray
    A: float
    B: float
    C: float

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    @property
    def d(self) -> float:
        return self.C * self.A - self.B * self.B

    def is_degenerate(self, tolerances: Tolerances | None = None) -> bool:
        """μ collinear with 𝟙 in the Σ⁻¹ inner product (d vanishes)."""
        tol = resolve(tolerances).degenerate_frontier
        return self.d <= tol * self.C * self.A


@dataclass(frozen=True)
class MarketModel:
    labels: tuple[str, ...]
    mu: np.ndarray
    sigma: np.ndarray
    rf: float | None = None
    factor: SpdFactor | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "mu", as_vector(self.mu))
        object.__setattr__(self, "sigma", as_matrix(self.sigma))
        labels = self.labels if self.labels is not None else default_labels(len(self.mu))
        object.__setattr__(self, "labels", tuple(str(label) for label in labels))
        if self.rf is not None:
            object.__setattr__(self, "rf", float(self.rf))

    @property
    def n(self) -> int:
        return len(self.mu)

    @property
    def validated(self) -> bool:
        return self.factor is not None

    def with_rf(self, rf: float | None) -> "MarketModel":
        return replace(self, rf=rf)

    def to_dict(self) -> dict:
        out = {"labels": list(self.labels), "mu": self.mu.tolist(), "sigma": self.sigma.tolist()}
        if self.rf is not None:
            out["rf"] = self.rf
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "MarketModel":
        for key in ("mu", "sigma"):
            if key not in data:
                throw(f"Model document has no '{key}' field", InvalidParameter)
        return cls(labels=data.get("labels"), mu=data["mu"], sigma=data["sigma"], rf=data.get("rf"))


def load_model(path: str | Path) -> MarketModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        throw(f"Cannot read model file {path}: {e}", InvalidParameter)
    except json.JSONDecodeError as e:
        throw(f"Model file {path} is not valid JSON: {e}", InvalidParameter)
    if not isinstance(data, dict):
        throw(f"Model file {path} must hold a JSON object", InvalidParameter)
    return MarketModel.from_dict(data)


# ========= VALIDATION =========
def validate_model(
    raw: MarketModel,
    sym_tol: float | None = None,
    spd_mode: SpdMode = SpdMode.EIGEN,
    tolerances: Tolerances | None = None,
) -> MarketModel:
    """Check dimensions, symmetrize Σ, Cholesky-factorize it.

    Returns a copy of `raw` with the symmetrized Σ and its `SpdFactor`
    attached. A singular (or indefinite) Σ raises NotPositiveDefinite whose
    `certificate` is a unit weight vector W with WΣWᵀ ≈ 0: a portfolio whose
    return is almost surely constant.
    """
    tol = resolve(tolerances)
    sym_tol = tol.sym_tol if sym_tol is None else sym_tol
    spd_mode = SpdMode(spd_mode)

    mu, sigma = raw.mu, raw.sigma
    n = len(mu)
    if mu.ndim != 1 or n < 1:
        throw("Expected returns must be a non-empty vector", DimensionMismatch, n=n)
    if sigma.shape != (n, n):
        throw(f"Covariance shape {sigma.shape} does not match {n} expected returns", DimensionMismatch)
    if len(raw.labels) != n:
        throw(f"{len(raw.labels)} labels given for {n} assets", DimensionMismatch)
    if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
        throw("Model contains non-finite numbers", InvalidParameter)

    diag = np.diag(sigma)
    if np.any(diag < 0):
        bad = int(np.argmin(diag))
        throw(
            f"Negative variance {diag[bad]!r} for asset {raw.labels[bad]}",
            NegativeDiagonal,
            asset=raw.labels[bad],
        )

    asymmetry = float(np.max(np.abs(sigma - sigma.T)))
    if asymmetry > sym_tol:
        throw(
            f"Covariance is not symmetric: max |Σij - Σji| = {asymmetry!r} > {sym_tol!r}",
            AsymmetryBeyondTolerance,
            max_asymmetry=asymmetry,
        )
    sym = (sigma + sigma.T) / 2.0

    lower = _cholesky(sym, tol.spd_pivot_floor, spd_mode)
    sym.setflags(write=False)
    lower.setflags(write=False)

    ones = np.ones(n)
    inv_ones = as_vector(linalg.cho_solve((lower, True), ones))
    inv_mu = as_vector(linalg.cho_solve((lower, True), mu))
    factor = SpdFactor(
        matrix=sym,
        lower=lower,
        inv_ones=inv_ones,
        inv_mu=inv_mu,
        A=float(ones @ inv_ones),
        B=float(mu @ inv_ones),
        C=float(mu @ inv_mu),
    )
    logger("market_model").debug(
        f"[validate] n={n} asymmetry={asymmetry:.3e} A={factor.A!r} B={factor.B!r} C={factor.C!r}"
    )
    return replace(raw, sigma=sym, factor=factor)


def ensure_validated(model: MarketModel, tolerances: Tolerances | None = None) -> MarketModel:
    return model if model.validated else validate_model(model, tolerances=tolerances)


def _cholesky(sym: np.ndarray, pivot_floor: float, spd_mode: SpdMode) -> np.ndarray:
    n = sym.shape[0]
    floor = pivot_floor * float(np.max(np.diag(sym)))
    lower, info = lapack.dpotrf(sym, lower=1, clean=1, overwrite_a=0)

    if info < 0:
        throw(f"LAPACK dpotrf rejected argument {-info}", InvalidParameter)

    if info > 0:
        broken = info - 1
        pivot = None
    else:
        pivots = np.diag(lower) ** 2
        below = np.nonzero(pivots <= floor)[0]
        if not len(below):
            return np.tril(lower)
        broken = int(below[0])
        pivot = float(pivots[broken])

    if spd_mode is SpdMode.CHOLESKY:
        certificate = _breakdown_direction(sym, broken)
    else:
        certificate = _smallest_eigenvector(sym)
    curvature = float(certificate @ sym @ certificate)
    throw(
        f"Covariance is not positive definite (Cholesky pivot {broken + 1} of {n}"
        f"{'' if pivot is None else f' = {pivot!r}'} at or below floor {floor!r}); "
        f"certificate portfolio has variance {curvature!r}",
        NotPositiveDefinite,
        certificate=certificate,
        pivot_index=broken,
    )


def _smallest_eigenvector(sym: np.ndarray) -> np.ndarray:
    _, vectors = linalg.eigh(sym)
    return _normalize_sign(vectors[:, 0])


def _breakdown_direction(sym: np.ndarray, k: int) -> np.ndarray:
    """x with x_k = 1 and leading part -Σ[:k,:k]⁻¹Σ[:k,k], so xΣxᵀ is the failed pivot."""
    x = np.zeros(sym.shape[0])
    x[k] = 1.0
    if k > 0:
        head = linalg.cholesky(sym[:k, :k], lower=True)
        x[:k] = -linalg.cho_solve((head, True), sym[:k, k])
    return _normalize_sign(x / np.linalg.norm(x))


def _normalize_sign(vec: np.ndarray) -> np.ndarray:
    nonzero = np.nonzero(np.abs(vec) > 1e-12 * np.max(np.abs(vec)))[0]
    if len(nonzero) and vec[nonzero[0]] < 0:
        vec = -vec
    return as_vector(vec)


# ========= SOLVES AND MOMENTS =========
def solve_spd(factor: SpdFactor, rhs, tolerances: Tolerances | None = None) -> np.ndarray:
    """Σ⁻¹·rhs by forward/back substitution on the Cholesky factor."""
    rhs = as_vector(rhs)
    if len(rhs) != factor.n:
        throw(f"Right-hand side has length {len(rhs)}, expected {factor.n}", DimensionMismatch)

    x = linalg.cho_solve((factor.lower, True), rhs)
    scale = float(np.max(np.abs(rhs))) if len(rhs) else 0.0
    residual = float(np.max(np.abs(factor.matrix @ x - rhs)))
    if residual > resolve(tolerances).solve_tol * scale:
        logger("market_model").warning(f"[solve_spd] residual {residual:.3e} exceeds tolerance (|rhs|={scale:.3e})")
    return as_vector(x)


def portfolio_variance(model: MarketModel, weights) -> float:
    """WΣWᵀ; raises DimensionMismatch on a wrong-length W."""
    weights = _check_weights(model, weights)
    return float(weights @ model.sigma @ weights)


def portfolio_moments(model: MarketModel, weights) -> tuple[float, float]:
    """(μ_P, σ_P) = (μWᵀ, √(WΣWᵀ)); weights need not sum to 1."""
    weights = _check_weights(model, weights)
    mu_p = float(model.mu @ weights)
    variance = portfolio_variance(model, weights)
    return mu_p, float(np.sqrt(max(variance, 0.0)))


def _check_weights(model: MarketModel, weights) -> np.ndarray:
    weights = as_vector(weights)
    if len(weights) != model.n:
        throw(f"Weight vector has length {len(weights)}, model has {model.n} assets", DimensionMismatch)
    return weights
