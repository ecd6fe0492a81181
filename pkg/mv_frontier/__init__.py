"""
MV Frontier

Closed-form mean-variance portfolio analytics: the global minimum variance
portfolio, the maximal Sharpe ratio (tangency) portfolio, minimum variance
portfolios for a target return with and without a risk-free asset, the
efficient frontier and capital market line, mutual fund separation and the
CAPM security market line. Every optimum is cross-checked by a seeded
brute-force oracle.

Version: 1.0.0
Author: MV Frontier Developers
"""

__version__ = "1.0.0"
