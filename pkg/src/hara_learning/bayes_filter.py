"""Exact Bayesian filter for a constant unknown market price of risk.

Given the observation ``Y_t = y`` (with ``Y_t = Θ t + W_t``) the posterior of
Θ has density ``exp(θ y - θ² t / 2) / F(t, y)`` with respect to the prior,
where ``F(t, y) = ∫ exp(θ y - θ² t / 2) μ(dθ)``.

All functions broadcast over ``y`` and return floats for scalar input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import HaraError
from .prior import Prior


@dataclass(frozen=True)
class FilterState:
    t: float
    y: float
    log_F: float
    theta_hat: float
    theta_var: float


def _check_time(t) -> float:
    t = float(t)
    if not t >= 0:
        raise HaraError(f"time must be nonnegative, got {t}")
    return t


def _posterior(prior: Prior, t: float, y) -> tuple[np.ndarray, np.ndarray]:
    """Return ``log F`` and normalized posterior masses on the prior nodes (trailing axis)."""
    th = prior.nodes
    e = np.multiply.outer(np.asarray(y, dtype=float), th)
    e += prior.log_weights - (0.5 * t) * th**2
    top = e.max(axis=-1, keepdims=True)
    e -= top
    np.exp(e, out=e)
    total = e.sum(axis=-1)
    e /= total[..., None]
    return top[..., 0] + np.log(total), e


def _ret(x, y):
    return float(x) if np.ndim(y) == 0 else x


def filter_moments(prior: Prior, t: float, y):
    """Return ``(log F, posterior mean, posterior variance)`` at ``(t, y)``."""
    t = _check_time(t)
    lf, p = _posterior(prior, t, y)
    th = prior.nodes
    mean = p @ th
    # centered second pass avoids E[θ²] - mean² cancellation
    var = np.einsum("...i,...i->...", p, (th - mean[..., None]) ** 2)
    return lf, mean, var


def log_F_and_mean(prior: Prior, t: float, y):
    """``(log F, posterior mean)`` without the variance pass."""
    t = _check_time(t)
    lf, p = _posterior(prior, t, y)
    return lf, p @ prior.nodes


def log_F(prior: Prior, t: float, y):
    """Log of ``F(t, y)``; ``F(0, 0) = 1``."""
    t = _check_time(t)
    return _ret(_posterior(prior, t, y)[0], y)


def posterior_density(prior: Prior, t: float, y: float) -> Callable[[np.ndarray], np.ndarray]:
    """Posterior density of Θ with respect to the prior, as a function of θ."""
    if not t > 0:
        raise HaraError("posterior defined for t>0; at t=0 the posterior is the prior")
    lf = log_F(prior, t, y)

    def density(theta):
        theta = np.asarray(theta, dtype=float)
        return np.exp(theta * y - 0.5 * t * theta**2 - lf)

    return density


def posterior_masses(prior: Prior, t: float, y) -> np.ndarray:
    """Posterior probabilities of the prior nodes (trailing axis)."""
    t = _check_time(t)
    return _posterior(prior, t, y)[1]


def theta_hat(prior: Prior, t: float, y):
    """Posterior mean of Θ; at ``(0, 0)`` this is the prior mean."""
    return _ret(log_F_and_mean(prior, t, y)[1], y)


def theta_var(prior: Prior, t: float, y):
    """Posterior variance of Θ."""
    return _ret(filter_moments(prior, t, y)[2], y)


def filter_state(prior: Prior, t: float, y: float) -> FilterState:
    lf, m, v = filter_moments(prior, t, y)
    return FilterState(float(t), float(y), float(lf), float(m), float(v))
