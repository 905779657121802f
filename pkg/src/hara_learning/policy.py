"""Optimal and myopic HARA portfolios under partial observation.

The power investor's optimal amount in the risky asset is

    π̂_γ(t, x, y) = (x / (σ(1-γ)) + η e^{-r(T-t)} / (σβ)) · L(t, y; γ)

where the *learning factor* ``L`` is the mean of ``Θ̂(T, y + z)`` under the
tilted density ``q(z) ∝ F(T, y + z)^{1/(1-γ)} φ_{T-t}(z)``. The exponential
investor uses the untilted kernel (the ``γ → -∞`` limit), and the
logarithmic investor is myopic. Myopic portfolios plug ``Θ̂(t, y)`` into
Merton's constant-θ formulas.

Integrals over ``z`` use an adaptive Gauss-Hermite rule re-centered on the
tilted density, with a node-doubling self-convergence check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Callable, Sequence, Union

import numpy as np
from scipy.special import logsumexp

from .bayes_filter import filter_moments, log_F_and_mean, theta_hat
from .errors import DivergenceError, DomainError, HaraError
from .numerics import DEFAULT_QUAD, QuadConfig, normal_logpdf, self_converge, shifted_rule
from .prior import Prior

GAMMA_MIN = -1e6
GAMMA_MAX = 1.0 - 1e-6
BOUNDARY_EPS = 1e-12


# -- domain types -------------------------------------------------------------


@dataclass(frozen=True)
class MarketParams:
    sigma: float
    T: float
    r: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if not self.r >= 0:
            raise ValueError("r must be nonnegative")


@dataclass(frozen=True)
class Power:
    """u(x) = (1-γ)/γ · (βx/(1-γ) + η)^γ on {βx/(1-γ) + η > 0}."""

    gamma: float
    beta: float = 1.0
    eta: float = 0.0

    def __post_init__(self):
        if not (self.gamma < 1 and self.gamma != 0):
            raise ValueError("power utility needs gamma < 1 and gamma != 0")
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    def base(self, x):
        return self.beta * np.asarray(x, dtype=float) / (1.0 - self.gamma) + self.eta

    def in_domain(self, x, eps: float = 0.0):
        return self.base(x) > eps

    def __call__(self, x):
        g = self.gamma
        return (1.0 - g) / g * self.base(x) ** g

    def inverse(self, u):
        g = self.gamma
        return (1.0 - g) / self.beta * ((g * np.asarray(u) / (1.0 - g)) ** (1.0 / g) - self.eta)


@dataclass(frozen=True)
class Log:
    """u(x) = ln(βx + η) on {βx + η > 0}."""

    beta: float = 1.0
    eta: float = 0.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    def base(self, x):
        return self.beta * np.asarray(x, dtype=float) + self.eta

    def in_domain(self, x, eps: float = 0.0):
        return self.base(x) > eps

    def __call__(self, x):
        return np.log(self.base(x))

    def inverse(self, u):
        return (np.exp(u) - self.eta) / self.beta


@dataclass(frozen=True)
class Exp:
    """u(x) = -exp(-βx) on the whole real line."""

    beta: float = 1.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    def in_domain(self, x, eps: float = 0.0):
        return np.isfinite(np.asarray(x, dtype=float))

    def __call__(self, x):
        return -np.exp(-self.beta * np.asarray(x, dtype=float))

    def inverse(self, u):
        return -np.log(-np.asarray(u)) / self.beta


UtilitySpec = Union[Power, Log, Exp]


@dataclass(frozen=True)
class EvalPoint:
    t: float
    x: float
    y: float


@dataclass(frozen=True)
class PolicyReport:
    pi_hat: float
    pi_myopic: float
    hedging_demand: float
    relative_hedging: float | None
    ratio: float | None


# -- tilted z-integrals -------------------------------------------------------


@dataclass(frozen=True)
class TiltedMoments:
    """Integrals against ``F(T, y+z)^k φ_{T-t}(z)``.

    ``log_h`` is the log of the unnormalized integral; ``theta_mean`` and
    ``log_F_mean`` are means of ``Θ̂(T, y+z)`` and ``log F(T, y+z)`` under
    the normalized density.
    """

    log_h: np.ndarray
    theta_mean: np.ndarray
    log_F_mean: np.ndarray


def tilt_exponent(gamma: float) -> float:
    """``1/(1-γ)``; ``γ = -inf`` maps to 0 (exponential limit)."""
    if gamma == -math.inf:
        return 0.0
    if not gamma < 1:
        raise DomainError("gamma must be < 1")
    return 1.0 / (1.0 - gamma)


def _tilted_fixed(terminal, s2: float, y: np.ndarray, k: float, n: int, iters: int):
    center = np.zeros_like(y)
    scale = np.full_like(y, math.sqrt(s2))
    for it in range(iters + 1):
        z, logw = shifted_rule(s2, n, center, scale)
        lf, th = terminal(y[..., None] + z)
        L = k * lf + logw
        log_h = logsumexp(L, axis=-1)
        q = np.exp(L - log_h[..., None])
        if it < iters:
            center = np.sum(q * z, axis=-1)
            var = np.sum(q * (z - center[..., None]) ** 2, axis=-1)
            # keep the previous scale if the tilted density collapsed numerically
            scale = np.where(var > 1e-300, np.sqrt(np.maximum(var, 1e-300)), scale)
    return log_h, np.sum(q * th, axis=-1), np.sum(q * lf, axis=-1)


def tilted_moments(
    prior: Prior,
    T: float,
    t: float,
    y,
    k: float,
    quad: QuadConfig = DEFAULT_QUAD,
    check: bool = True,
    terminal: Callable | None = None,
) -> TiltedMoments:
    """Tilted integrals at observation(s) ``y``; broadcasts over ``y``.

    At ``t == T`` the kernel is a point mass and the boundary values are
    returned. ``check=False`` skips the self-convergence doubling (used for
    bulk tabulation). ``terminal`` maps ``u`` to ``(log F(T, u), Θ̂(T, u))``
    and defaults to the exact filter.
    """
    if terminal is None:
        terminal = partial(log_F_and_mean, prior, T)
    scalar = np.ndim(y) == 0
    y = np.atleast_1d(np.asarray(y, dtype=float))
    s2 = T - t
    if s2 < 0:
        raise HaraError(f"t={t} lies beyond the horizon T={T}")
    if s2 == 0:
        lf, th = terminal(y)
        out = (k * lf, th, lf)
    elif check:
        out = self_converge(
            lambda n: _tilted_fixed(terminal, s2, y, k, n, quad.adapt_iters), quad.z_nodes, quad.tol
        )
    else:
        out = _tilted_fixed(terminal, s2, y, k, quad.z_nodes, quad.adapt_iters)
    log_h, th_mean, lf_mean = out
    if not np.all(np.isfinite(log_h)):
        raise DivergenceError("prior/γ combination numerically divergent")
    if scalar:
        return TiltedMoments(float(log_h[0]), float(th_mean[0]), float(lf_mean[0]))
    return TiltedMoments(log_h, th_mean, lf_mean)


def check_existence(prior: Prior, mkt: MarketParams, gamma: float) -> None:
    """Raise if the power problem has no finite solution for a Gaussian prior."""
    if prior.kind == "gaussian" and gamma > 0 and gamma != -math.inf:
        v = prior.params["v"]
        if (1.0 - gamma) - gamma * v**2 * mkt.T <= 0:
            raise DivergenceError(
                "prior/γ combination numerically divergent: (1-γ) - γ v² T <= 0"
            )


def q_density(
    prior: Prior, mkt: MarketParams, t: float, y: float, gamma: float, quad: QuadConfig = DEFAULT_QUAD
) -> Callable[[np.ndarray], np.ndarray]:
    """Tilted density of ``z`` at ``(t, y)``; ``γ = 0`` is allowed here."""
    if not t < mkt.T:
        raise HaraError("q is defined for t < T")
    check_existence(prior, mkt, gamma)
    k = tilt_exponent(gamma)
    s2 = mkt.T - t
    log_h = tilted_moments(prior, mkt.T, t, y, k, quad).log_h

    def density(z):
        z = np.asarray(z, dtype=float)
        lf = filter_moments(prior, mkt.T, y + z)[0]
        return np.exp(k * lf + normal_logpdf(z, s2) - log_h)

    return density


def h_value(
    prior: Prior, mkt: MarketParams, t: float, y, gamma: float, quad: QuadConfig = DEFAULT_QUAD
):
    """Log of the heat-equation solution ``ĥ(t, y; γ)``."""
    if gamma == 0:
        raise DomainError("gamma must be nonzero")
    check_existence(prior, mkt, gamma)
    return tilted_moments(prior, mkt.T, t, y, tilt_exponent(gamma), quad).log_h


def learning_factor(
    prior: Prior,
    mkt: MarketParams,
    t: float,
    y,
    gamma: float,
    quad: QuadConfig = DEFAULT_QUAD,
    check: bool = True,
    terminal: Callable | None = None,
):
    """Mean of ``Θ̂(T, y+z)`` under the tilted density; ``γ = -inf`` gives the untilted kernel.

    With ``γ = 0`` this reproduces ``Θ̂(t, y)``.
    """
    check_existence(prior, mkt, gamma)
    return tilted_moments(prior, mkt.T, t, y, tilt_exponent(gamma), quad, check, terminal).theta_mean


# -- portfolios -----------------------------------------------------------------


def _check_point(util: UtilitySpec, mkt: MarketParams, pt: EvalPoint) -> float:
    if not 0 <= pt.t <= mkt.T:
        raise HaraError(f"t={pt.t} outside [0, T={mkt.T}]")
    forward = pt.x * math.exp(mkt.r * (mkt.T - pt.t))
    if not util.in_domain(forward):
        raise DomainError(f"wealth x={pt.x} is outside the utility domain at t={pt.t}")
    return forward


def exposure(util: UtilitySpec, mkt: MarketParams, t: float, x):
    """Amount invested per unit of market price of risk in Merton's formula."""
    disc = np.exp(-mkt.r * (mkt.T - t))
    if isinstance(util, Power):
        return x / (mkt.sigma * (1.0 - util.gamma)) + util.eta * disc / (mkt.sigma * util.beta)
    if isinstance(util, Log):
        return x / mkt.sigma + util.eta * disc / (mkt.sigma * util.beta)
    if isinstance(util, Exp):
        return disc / (mkt.sigma * util.beta) + 0.0 * np.asarray(x, dtype=float)
    raise TypeError(f"unknown utility {util!r}")


def pi_merton(util: UtilitySpec, mkt: MarketParams, pt: EvalPoint, theta: float) -> float:
    """Merton's optimal amount in the risky asset for a known market price of risk."""
    _check_point(util, mkt, pt)
    return float(exposure(util, mkt, pt.t, pt.x) * theta)


def pi_myopic(prior: Prior, util: UtilitySpec, mkt: MarketParams, pt: EvalPoint) -> float:
    _check_point(util, mkt, pt)
    return float(exposure(util, mkt, pt.t, pt.x) * theta_hat(prior, pt.t, pt.y))


def pi_hat_power(
    prior: Prior, util: Power, mkt: MarketParams, pt: EvalPoint, quad: QuadConfig = DEFAULT_QUAD
) -> float:
    _check_point(util, mkt, pt)
    g = util.gamma
    if g >= GAMMA_MAX:
        raise DomainError(f"gamma={g} too close to 1 for a stable evaluation")
    if pt.t == mkt.T:
        return pi_myopic(prior, util, mkt, pt)
    # past GAMMA_MIN the tilt 1/(1-γ) is below 1e-6: use the exponential limit
    factor = learning_factor(prior, mkt, pt.t, pt.y, -math.inf if g <= GAMMA_MIN else g, quad)
    return float(exposure(util, mkt, pt.t, pt.x) * factor)


def pi_hat_log(prior: Prior, util: Log, mkt: MarketParams, pt: EvalPoint) -> float:
    _check_point(util, mkt, pt)
    return float(exposure(util, mkt, pt.t, pt.x) * theta_hat(prior, pt.t, pt.y))


def pi_hat_exp(
    prior: Prior, util: Exp, mkt: MarketParams, pt: EvalPoint, quad: QuadConfig = DEFAULT_QUAD
) -> float:
    _check_point(util, mkt, pt)
    if pt.t == mkt.T:
        return pi_myopic(prior, util, mkt, pt)
    factor = learning_factor(prior, mkt, pt.t, pt.y, -math.inf, quad)
    return float(exposure(util, mkt, pt.t, pt.x) * factor)


def pi_hat(
    prior: Prior, util: UtilitySpec, mkt: MarketParams, pt: EvalPoint, quad: QuadConfig = DEFAULT_QUAD
) -> float:
    """Optimal portfolio under partial observation for any HARA utility."""
    if isinstance(util, Power):
        return pi_hat_power(prior, util, mkt, pt, quad)
    if isinstance(util, Log):
        return pi_hat_log(prior, util, mkt, pt)
    if isinstance(util, Exp):
        return pi_hat_exp(prior, util, mkt, pt, quad)
    raise TypeError(f"unknown utility {util!r}")


def policy_report(
    prior: Prior, util: UtilitySpec, mkt: MarketParams, pt: EvalPoint, quad: QuadConfig = DEFAULT_QUAD
) -> PolicyReport:
    ph = pi_hat(prior, util, mkt, pt, quad)
    pm = pi_myopic(prior, util, mkt, pt)
    ratio = ph / pm if pm != 0 else None
    return PolicyReport(
        pi_hat=ph,
        pi_myopic=pm,
        hedging_demand=ph - pm,
        relative_hedging=None if ratio is None else ratio - 1.0,
        ratio=ratio,
    )


def value_function(
    prior: Prior, util: UtilitySpec, mkt: MarketParams, pt: EvalPoint, quad: QuadConfig = DEFAULT_QUAD
) -> float:
    """Value of the reduced problem, ``sup Ẽ[F(T, Y_T) u(X_T)]`` from ``(t, x, y)``.

    At ``(0, x, 0)`` this is the investor's maximal expected utility.
    """
    fwd = _check_point(util, mkt, pt)
    T, t, y = mkt.T, pt.t, pt.y
    if isinstance(util, Power):
        check_existence(prior, mkt, util.gamma)
        log_h = tilted_moments(prior, T, t, y, tilt_exponent(util.gamma), quad).log_h
        return float(util(fwd) * math.exp((1.0 - util.gamma) * log_h))
    if isinstance(util, Log):
        lf_t = filter_moments(prior, t, y)[0]
        tm = tilted_moments(prior, T, t, y, 1.0, quad)
        F_t = math.exp(lf_t)
        return float(F_t * util(fwd) - F_t * lf_t + math.exp(tm.log_h) * tm.log_F_mean)
    if isinstance(util, Exp):
        tm = tilted_moments(prior, T, t, y, 0.0, quad)
        return float(util(fwd) * math.exp(tm.log_F_mean))
    raise TypeError(f"unknown utility {util!r}")


# -- gamma sweeps -------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    pi_hat: float | None
    pi_myopic: float | None
    ratio: float | None
    hedging: float | None
    error: str | None = None


def gamma_sweep(
    prior: Prior,
    mkt: MarketParams,
    pt: EvalPoint,
    eta: float,
    gammas: Sequence[float],
    beta: float = 1.0,
    quad: QuadConfig = DEFAULT_QUAD,
) -> list[SweepRow]:
    """Power portfolios over a grid of γ, in ascending order.

    Failures (domain, divergence, quadrature) are recorded on the row.
    """
    rows = []
    for g in sorted(float(g) for g in gammas):
        try:
            rep = policy_report(prior, Power(g, beta, eta), mkt, pt, quad)
            rows.append(SweepRow(g, rep.pi_hat, rep.pi_myopic, rep.ratio, rep.hedging_demand))
        except (HaraError, ValueError) as exc:
            rows.append(SweepRow(g, None, None, None, None, f"{type(exc).__name__}: {exc}"))
    return rows


def monotonicity_violations(rows: Sequence[SweepRow], column: str = "ratio", slack: float = 1e-9):
    """Consecutive row pairs where ``column`` decreases by more than ``slack``."""
    good = [r for r in rows if getattr(r, column) is not None]
    out = []
    for a, b in zip(good, good[1:]):
        va, vb = getattr(a, column), getattr(b, column)
        if vb < va - slack * max(1.0, abs(va)):
            out.append((a.gamma, b.gamma, va, vb))
    return out


def increasing_from(rows: Sequence[SweepRow], column: str = "hedging", slack: float = 1e-9):
    """Smallest grid γ from which ``column`` is nondecreasing to the end of the sweep.

    Gives the empirical location of the threshold below which hedging
    demand stops being monotone; ``None`` for an empty sweep.
    """
    good = [r for r in rows if getattr(r, column) is not None]
    if not good:
        return None
    start = good[-1].gamma
    for a, b in reversed(list(zip(good, good[1:]))):
        va, vb = getattr(a, column), getattr(b, column)
        if vb < va - slack * max(1.0, abs(va)):
            break
        start = a.gamma
    return start
