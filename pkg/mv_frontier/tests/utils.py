import json
import os
import tempfile
import unittest

import numpy as np

from mv_frontier.portfolio.market_model import MarketModel, validate_model

# ========= EIGHT-ASSET WORKED EXAMPLE (as printed, four decimals) =========
# The printed seventh return reads 0.6780; every printed portfolio implies 0.0678.
PRINTED_MU = (0.0620, 0.0660, 0.0838, 0.0849, 0.0674, 0.0949, 0.0678, 0.0691)
PRINTED_RF = 0.015
PRINTED_SIGMA = (
    (0.0099, 0.0105, 0.0124, 0.0002, 0.0023, 0.0020, -0.0050, -0.0032),
    (0.0105, 0.0114, 0.0142, -0.0004, 0.0024, 0.0014, -0.0058, -0.0039),
    (0.0124, 0.0142, 0.0201, -0.0019, 0.0026, 0.0000, -0.0079, -0.0057),
    (0.0002, -0.0004, -0.0019, 0.0207, 0.0136, 0.0216, 0.0217, 0.0197),
    (0.0023, 0.0024, 0.0026, 0.0136, 0.0353, 0.0125, 0.0109, 0.0108),
    (0.0020, 0.0014, 0.0000, 0.0216, 0.0125, 0.0239, 0.0203, 0.0188),
    (-0.0050, -0.0058, -0.0079, 0.0217, 0.0109, 0.0203, 0.0312, 0.0262),
    (-0.0032, -0.0039, -0.0057, 0.0197, 0.0108, 0.0188, 0.0262, 0.0229),
)
PRINTED_MIN_VARIANCE = (0.4343, 0.7324, -0.4033, 0.5122, -0.0019, -0.6344, 0.0394, 0.3213)
PRINTED_TANGENCY = (1.2007, -1.5916, 0.8996, 0.5272, -0.0389, -0.0715, -0.1321, 0.2066)
PRINTED_FRONTIER_A = 3.7017

# Efficient funds at targets 0.09402, 0.11992, 0.14349. The first weight of
# the third fund is printed with a decimal comma ("2,4379").
PRINTED_FUNDS = (
    (1.3834, -2.1453, 1.2100, 0.5308, -0.0477, 0.0626, -0.1730, 0.1792),
    (1.9352, -3.8185, 2.1480, 0.5417, -0.0744, 0.4679, -0.2964, 0.0966),
    (2.4379, -5.3426, 3.0024, 0.5515, -0.0987, 0.8370, -0.4089, 0.0213),
)
PRINTED_FUND_RETURNS = (0.09402, 0.11992, 0.14349)


def calibrated_sigma() -> np.ndarray:
    """Minimum-norm symmetric correction of PRINTED_SIGMA.

    The printed Σ is rounded to four decimals and its minimum variance
    weights move by more than 0.6 under that rounding. The correction Δ
    solves (Σ + Δ)·W_min = s·𝟙 and (Σ + Δ)·W_M = k·(μ - r_f), which makes the
    printed minimum variance and tangency portfolios exact; s is fixed by the
    printed leading frontier coefficient a = s / ((μ₀ - r_f)(μ_M - μ₀)) and
    symmetry forces s = k·(μ₀ - r_f).
    """
    sigma = np.array(PRINTED_SIGMA)
    mu = np.array(PRINTED_MU)
    w_min = np.array(PRINTED_MIN_VARIANCE)
    w_m = np.array(PRINTED_TANGENCY)
    n = len(mu)

    mu_0 = mu @ w_min
    mu_m = mu @ w_m
    s = PRINTED_FRONTIER_A * (mu_0 - PRINTED_RF) * (mu_m - mu_0)
    k = s / (mu_0 - PRINTED_RF)

    upper = [(i, j) for i in range(n) for j in range(i, n)]
    index = {pair: u for u, pair in enumerate(upper)}
    system = np.zeros((2 * n, len(upper)))
    for block, w in enumerate((w_min, w_m)):
        for i in range(n):
            for j in range(n):
                system[block * n + i, index[(min(i, j), max(i, j))]] += w[j]
    rhs = np.concatenate([s - sigma @ w_min, k * (mu - PRINTED_RF) - sigma @ w_m])

    delta, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    correction = np.zeros((n, n))
    for (i, j), value in zip(upper, delta):
        correction[i, j] = correction[j, i] = value
    return sigma + correction


def worked_example(calibrated: bool = True, rf: float | None = PRINTED_RF) -> MarketModel:
    sigma = calibrated_sigma() if calibrated else PRINTED_SIGMA
    return MarketModel(labels=None, mu=PRINTED_MU, sigma=sigma, rf=rf)


# ========= RANDOM INSTANCES =========
def random_spd(rng: np.random.Generator, n: int, ridge: float = 0.5) -> np.ndarray:
    g = rng.standard_normal((n, n)) * 0.2
    sigma = g @ g.T + ridge * 0.04 * np.eye(n)
    return (sigma + sigma.T) / 2.0


def random_model(rng: np.random.Generator, n: int, rf: float | None = None) -> MarketModel:
    mu = rng.uniform(0.02, 0.15, size=n)
    return validate_model(MarketModel(labels=None, mu=mu, sigma=random_spd(rng, n), rf=rf))


def singular_spd(rng: np.random.Generator, n: int) -> np.ndarray:
    """Rank n-1 covariance."""
    g = rng.standard_normal((n, n - 1))
    sigma = g @ g.T
    return (sigma + sigma.T) / 2.0


class PortfolioTestCase(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(20240531)

    def make_model(self, n: int = 4, rf: float | None = None) -> MarketModel:
        return random_model(self.rng, n, rf)

    def make_tempdir(self) -> str:
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        return tmp.name

    def write_json(self, name: str, data) -> str:
        path = os.path.join(self.make_tempdir(), name)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f)
        return path

    def write_text(self, name: str, text: str) -> str:
        path = os.path.join(self.make_tempdir(), name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return path

    def assertVectorClose(self, actual, expected, atol: float, msg: str | None = None):
        actual = np.asarray(actual, dtype=float)
        expected = np.asarray(expected, dtype=float)
        self.assertEqual(actual.shape, expected.shape, msg)
        gap = float(np.max(np.abs(actual - expected))) if actual.size else 0.0
        self.assertLessEqual(gap, atol, msg or f"max gap {gap!r} > {atol!r}")

    def assertRelClose(self, actual: float, expected: float, rtol: float, msg: str | None = None):
        scale = max(abs(expected), 1e-300)
        self.assertLessEqual(abs(actual - expected), rtol * scale, msg or f"{actual!r} vs {expected!r}")
