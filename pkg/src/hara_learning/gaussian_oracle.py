"""Closed forms for a normal prior on the market price of risk.

These never touch quadrature and serve as the independent reference for
the general code path in :mod:`hara_learning.policy`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import DivergenceError
from .policy import EvalPoint, MarketParams, Power

NEAR_DIVERGENT = 1e-8


class NearDivergenceWarning(RuntimeWarning):
    """Evaluation within 1e-8 of the existence boundary."""


@dataclass(frozen=True)
class GaussianPriorParams:
    m: float
    v: float

    def __post_init__(self):
        if not self.v > 0:
            raise ValueError("v must be positive")


def _margin(gp: GaussianPriorParams, mkt: MarketParams, gamma: float) -> float:
    return (1.0 - gamma) - gamma * gp.v**2 * mkt.T


def exists_power(gp: GaussianPriorParams, mkt: MarketParams, gamma: float) -> bool:
    return _margin(gp, mkt, gamma) > 0


def _require(gp, mkt, gamma):
    margin = _margin(gp, mkt, gamma)
    if margin <= 0:
        raise DivergenceError(f"no finite solution: (1-γ) - γv²T = {margin:g} <= 0")
    if margin < NEAR_DIVERGENT:
        warnings.warn(f"near-divergent: (1-γ) - γv²T = {margin:g}", NearDivergenceWarning, stacklevel=3)


def closed_log_F(gp: GaussianPriorParams, t: float, y: float) -> float:
    m, v2 = gp.m, gp.v**2
    return (m + v2 * y) ** 2 / (2 * v2 * (1 + v2 * t)) - m**2 / (2 * v2) - 0.5 * math.log1p(v2 * t)


def closed_theta_hat(gp: GaussianPriorParams, t: float, y: float) -> float:
    v2 = gp.v**2
    return (gp.m + v2 * y) / (1 + v2 * t)


def closed_theta_var(gp: GaussianPriorParams, t: float) -> float:
    v2 = gp.v**2
    return v2 / (1 + v2 * t)


def closed_log_h(gp: GaussianPriorParams, mkt: MarketParams, t: float, y: float, gamma: float) -> float:
    """Log of the heat-equation solution; log F(T, ·) is quadratic so the
    Gaussian convolution is explicit."""
    _require(gp, mkt, gamma)
    v2, T = gp.v**2, mkt.T
    k = 1.0 / (1.0 - gamma)
    a = v2 / (1 + v2 * T)
    b = y + gp.m / v2
    c = -gp.m**2 / (2 * v2) - 0.5 * math.log1p(v2 * T)
    d = 1.0 - k * a * (T - t)
    return k * c - 0.5 * math.log(d) + k * a * b**2 / (2 * d)


def closed_ratio(gp: GaussianPriorParams, mkt: MarketParams, t: float, gamma: float) -> float:
    _require(gp, mkt, gamma)
    v2 = gp.v**2
    return (1 - gamma) * (1 + t * v2) / ((1 - gamma) - gamma * v2 * mkt.T + v2 * t)


def closed_relative_hedging(gp: GaussianPriorParams, mkt: MarketParams, t: float, gamma: float) -> float:
    _require(gp, mkt, gamma)
    v2 = gp.v**2
    return gamma * v2 * (mkt.T - t) / ((1 - gamma) - gamma * v2 * mkt.T + v2 * t)


def _merton_exposure(util: Power, mkt: MarketParams, pt: EvalPoint) -> float:
    return pt.x / (mkt.sigma * (1 - util.gamma)) + util.eta * math.exp(-mkt.r * (mkt.T - pt.t)) / (
        mkt.sigma * util.beta
    )


def closed_pi_hat(gp: GaussianPriorParams, util: Power, mkt: MarketParams, pt: EvalPoint) -> float:
    th = closed_theta_hat(gp, pt.t, pt.y)
    return _merton_exposure(util, mkt, pt) * th * closed_ratio(gp, mkt, pt.t, util.gamma)


def closed_hedging(gp: GaussianPriorParams, util: Power, mkt: MarketParams, pt: EvalPoint) -> float:
    th = closed_theta_hat(gp, pt.t, pt.y)
    return _merton_exposure(util, mkt, pt) * th * closed_relative_hedging(gp, mkt, pt.t, util.gamma)


def closed_pi_hat_exp(gp: GaussianPriorParams, mkt: MarketParams, beta: float, pt: EvalPoint) -> float:
    """Exponential investor: the γ → -∞ limit of the power formula with η = 1."""
    v2 = gp.v**2
    lim_ratio = (1 + v2 * pt.t) / (1 + v2 * mkt.T)
    disc = math.exp(-mkt.r * (mkt.T - pt.t))
    return disc / (mkt.sigma * beta) * closed_theta_hat(gp, pt.t, pt.y) * lim_ratio
