"""Monte Carlo simulation of learning and wealth under competing strategies.

Each path draws Θ from the prior and a Brownian path; all strategies see the
same draws, so per-path utility differences are paired. The observation
process is ``Y_t = Θ t + W_t`` and the filter is evaluated exactly along it.
Wealth is stepped by Euler-Maruyama on discounted wealth ``e^{-rt} X_t``,
which keeps riskless growth exact.

The optimal power/exponential portfolio needs a quadrature per state; it is
tabulated on a fixed ``y`` grid at every time step and interpolated with a
cubic spline (points off the grid are evaluated directly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .bayes_filter import filter_moments, log_F_and_mean, posterior_masses
from .errors import DomainError, HaraError
from .numerics import DEFAULT_QUAD, QuadConfig
from .policy import (
    BOUNDARY_EPS,
    GAMMA_MIN,
    Exp,
    Log,
    MarketParams,
    Power,
    UtilitySpec,
    exposure,
    learning_factor,
)
from .prior import Prior

Z95 = 1.959963984540054


@dataclass(frozen=True)
class Strategy:
    kind: str  # "optimal", "myopic" or "merton"
    theta: float | None = None

    def __post_init__(self):
        if self.kind not in ("optimal", "myopic", "merton"):
            raise ValueError(f"unknown strategy {self.kind!r}")
        if (self.kind == "merton") != (self.theta is not None):
            raise ValueError("a merton strategy needs theta; others must not set it")

    @property
    def name(self) -> str:
        return f"merton({self.theta:g})" if self.kind == "merton" else self.kind

    @classmethod
    def parse(cls, text: str) -> "Strategy":
        text = text.strip().lower()
        for sep in ("(", ":"):
            if text.startswith("merton" + sep):
                return cls("merton", float(text[len("merton") + 1 :].rstrip(")")))
        return cls(text)


OPTIMAL = Strategy("optimal")
MYOPIC = Strategy("myopic")


@dataclass(frozen=True)
class SimConfig:
    prior: Prior
    mkt: MarketParams
    utility: UtilitySpec
    x0: float = 1.0
    n_paths: int = 10_000
    n_steps: int = 250
    seed: int = 0
    strategies: tuple[Strategy, ...] = (OPTIMAL, MYOPIC)
    antithetic: bool = False
    quad: QuadConfig = DEFAULT_QUAD
    table_points: int = 481
    chunk_size: int = 8192

    def __post_init__(self):
        if self.n_paths < 1 or self.n_steps < 1:
            raise ValueError("n_paths and n_steps must be positive")
        if not self.strategies:
            raise ValueError("at least one strategy is required")
        if len({s.name for s in self.strategies}) != len(self.strategies):
            raise ValueError("duplicate strategies")
        if not self.utility.in_domain(self.x0 * math.exp(self.mkt.r * self.mkt.T)):
            raise DomainError("initial wealth outside the utility domain")

    @property
    def dt(self) -> float:
        return self.mkt.T / self.n_steps


@dataclass
class SimPath:
    theta_draw: float
    dW: np.ndarray
    Y: np.ndarray
    theta_hat_path: np.ndarray
    theta_var_path: np.ndarray
    wealth: dict[str, np.ndarray]


@dataclass(frozen=True)
class StrategyStats:
    mean_utility: float
    std_error: float
    certainty_equivalent: float
    n_valid: int
    violations: int


@dataclass(frozen=True)
class PairedStats:
    mean: float
    std_error: float
    ci_low: float
    ci_high: float
    n: int


@dataclass
class SimReport:
    strategies: dict[str, StrategyStats]
    paired: dict[str, PairedStats]
    violations: int
    theta: np.ndarray = field(repr=False)
    Y_T: np.ndarray = field(repr=False)
    wealth_T: dict[str, np.ndarray] = field(repr=False)
    utility_T: dict[str, np.ndarray] = field(repr=False)
    valid: dict[str, np.ndarray] = field(repr=False)

    def summary(self) -> dict:
        return {
            "strategies": {k: vars(v) for k, v in self.strategies.items()},
            "paired": {k: vars(v) for k, v in self.paired.items()},
            "violations": self.violations,
        }

    def write_paths_csv(self, path, precision: int = 12) -> None:
        names = list(self.wealth_T)
        cols = ["path", "theta", "Y_T"]
        for n in names:
            cols += [f"X_T[{n}]", f"u[{n}]", f"valid[{n}]"]
        fmt = f"{{:.{precision}g}}"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(cols) + "\n")
            for i in range(self.theta.size):
                row = [str(i), fmt.format(self.theta[i]), fmt.format(self.Y_T[i])]
                for n in names:
                    row += [
                        fmt.format(self.wealth_T[n][i]),
                        fmt.format(self.utility_T[n][i]),
                        str(int(self.valid[n][i])),
                    ]
                fh.write(",".join(row) + "\n")


# -- noise -------------------------------------------------------------------------


def path_noise(cfg: SimConfig, indices: np.ndarray, n_steps: int | None = None):
    """Θ draws and Brownian increments for the given path indices.

    Path ``i`` uses its own stream seeded by ``(seed, i)``; with antithetics
    paths ``2j`` and ``2j+1`` share stream ``j`` and the odd one is mirrored.
    """
    n_steps = n_steps or cfg.n_steps
    sq = math.sqrt(cfg.mkt.T / n_steps)
    theta = np.empty(indices.size)
    dW = np.empty((indices.size, n_steps))
    for row, i in enumerate(indices):
        stream = i // 2 if cfg.antithetic else i
        rng = np.random.default_rng([cfg.seed, int(stream)])
        theta[row] = cfg.prior.sample(rng)
        dW[row] = rng.standard_normal(n_steps) * sq
        if cfg.antithetic and i % 2 == 1:
            dW[row] = -dW[row]
    return theta, dW


# -- optimal-portfolio tables --------------------------------------------------------


def _theta_scale(prior: Prior) -> float:
    if prior.kind == "gaussian":
        return abs(prior.params["m"]) + 6.0 * prior.params["v"]
    return float(np.max(np.abs(prior.nodes)))


class TerminalSpline:
    """Cubic-spline surrogate for ``u -> (log F(T, u), Θ̂(T, u))``.

    Exact values are used outside the tabulated interval.
    """

    def __init__(self, prior: Prior, T: float, lo: float, hi: float, step: float = 0.005):
        self.prior, self.T, self.lo, self.hi = prior, T, lo, hi
        grid = np.linspace(lo, hi, int(math.ceil((hi - lo) / step)) + 1)
        lf, th = log_F_and_mean(prior, T, grid)
        self._lf = CubicSpline(grid, lf)
        self._th = CubicSpline(grid, th)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        lf, th = self._lf(u), self._th(u)
        off = (u < self.lo) | (u > self.hi)
        if np.any(off):
            lf[off], th[off] = log_F_and_mean(self.prior, self.T, u[off])
        return lf, th


class FactorTable:
    """Learning factor tabulated on a ``y`` grid at each simulation time."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        util = cfg.utility
        if isinstance(util, Exp):
            self.gamma = -math.inf
        else:
            self.gamma = -math.inf if util.gamma <= GAMMA_MIN else util.gamma
        T = cfg.mkt.T
        half = _theta_scale(cfg.prior) * T + 8.0 * math.sqrt(T)
        self.lo, self.hi = -half, half
        self.grid = np.linspace(-half, half, cfg.table_points)
        # z-nodes reach roughly 15 kernel widths past the grid
        terminal = TerminalSpline(cfg.prior, T, -half - 20.0 * math.sqrt(T), half + 20.0 * math.sqrt(T))
        self.splines = []
        for k in range(cfg.n_steps):
            vals = learning_factor(
                cfg.prior, cfg.mkt, k * cfg.dt, self.grid, self.gamma, cfg.quad, False, terminal
            )
            self.splines.append(CubicSpline(self.grid, vals))

    def __call__(self, k: int, y: np.ndarray) -> np.ndarray:
        out = self.splines[k](y)
        off = (y < self.lo) | (y > self.hi)
        if np.any(off):
            out[off] = learning_factor(
                self.cfg.prior, self.cfg.mkt, k * self.cfg.dt, y[off], self.gamma, self.cfg.quad
            )
        return out


def _needs_table(cfg: SimConfig) -> bool:
    # log investors and single-atom priors hold the myopic portfolio exactly
    if isinstance(cfg.utility, Log) or cfg.prior.nodes.size == 1:
        return False
    return any(s.kind == "optimal" for s in cfg.strategies)


# -- engine -------------------------------------------------------------------------


def _run(cfg: SimConfig, indices: np.ndarray, table: FactorTable | None, record: bool):
    prior, mkt, util = cfg.prior, cfg.mkt, cfg.utility
    N, dt = cfg.n_steps, cfg.dt
    theta, dW = path_noise(cfg, indices)
    P = indices.size
    growth_T = math.exp(mkt.r * mkt.T)
    Y = np.zeros(P)
    disc = {s.name: np.full(P, float(cfg.x0)) for s in cfg.strategies}  # e^{-rt} X_t
    alive = {s.name: np.ones(P, dtype=bool) for s in cfg.strategies}
    if record:
        Ys, means, variances = [Y.copy()], [], []
        wealth = {s.name: [disc[s.name].copy()] for s in cfg.strategies}

    for k in range(N):
        t = k * dt
        if record:
            _, th_hat, th_var = filter_moments(prior, t, Y)
            means.append(th_hat)
            variances.append(th_var)
        else:
            th_hat = log_F_and_mean(prior, t, Y)[1]
        factor = table(k, Y) if table is not None else None
        dY = theta * dt + dW[:, k]
        e_t = math.exp(mkt.r * t)
        for s in cfg.strategies:
            if s.kind == "optimal":
                f = th_hat if factor is None else factor
            elif s.kind == "myopic":
                f = th_hat
            else:
                f = s.theta
            d = disc[s.name]
            pi = exposure(util, mkt, t, e_t * d) * f
            new = d + mkt.sigma * pi * dY / e_t
            ok = alive[s.name] & util.in_domain(growth_T * new, BOUNDARY_EPS)
            disc[s.name] = np.where(ok, new, d)
            alive[s.name] = ok
            if record:
                wealth[s.name].append(disc[s.name] * math.exp(mkt.r * (k + 1) * dt))
        Y = Y + dY
        if record:
            Ys.append(Y.copy())

    X_T = {name: growth_T * d for name, d in disc.items()}
    if not record:
        return theta, Y, X_T, alive
    _, th_hat, th_var = filter_moments(prior, mkt.T, Y)
    means.append(th_hat)
    variances.append(th_var)
    path = SimPath(
        theta_draw=float(theta[0]),
        dW=dW[0].copy(),
        Y=np.array([y[0] for y in Ys]),
        theta_hat_path=np.array([m[0] for m in means]),
        theta_var_path=np.array([v[0] for v in variances]),
        wealth={n: np.array([w[0] for w in ws]) for n, ws in wealth.items()},
    )
    return path


def simulate_path(cfg: SimConfig, path_index: int = 0, table: FactorTable | None = None) -> SimPath:
    """Full trajectory of a single path, identical to its role in :func:`simulate`."""
    if table is None and _needs_table(cfg):
        table = FactorTable(cfg)
    return _run(cfg, np.array([path_index]), table, record=True)


def _stats(values: np.ndarray, units: int) -> tuple[float, float]:
    mean = float(np.mean(values))
    if units < 2:
        return mean, math.nan
    return mean, float(np.std(values, ddof=1) / math.sqrt(units))


def _pair_units(values: np.ndarray, idx: np.ndarray, antithetic: bool) -> np.ndarray:
    """Average antithetic partners so the standard error sees independent units."""
    if not antithetic:
        return values
    pair = idx // 2
    sums = np.bincount(pair, weights=values)
    counts = np.bincount(pair)
    keep = counts > 0
    return sums[keep] / counts[keep]


def simulate(cfg: SimConfig, table: FactorTable | None = None) -> SimReport:
    """Run all paths and summarize utilities per strategy and paired differences.

    Paths whose wealth leaves the utility domain are excluded from the
    means and counted as violations. Paired differences compare the first
    strategy against each other one on paths valid for both.
    """
    if table is None and _needs_table(cfg):
        table = FactorTable(cfg)
    thetas, Ys = [], []
    X_T = {s.name: [] for s in cfg.strategies}
    alive = {s.name: [] for s in cfg.strategies}
    for start in range(0, cfg.n_paths, cfg.chunk_size):
        idx = np.arange(start, min(start + cfg.chunk_size, cfg.n_paths))
        th, y, x, ok = _run(cfg, idx, table, record=False)
        thetas.append(th)
        Ys.append(y)
        for name in X_T:
            X_T[name].append(x[name])
            alive[name].append(ok[name])
    theta = np.concatenate(thetas)
    Y_T = np.concatenate(Ys)
    X_T = {n: np.concatenate(v) for n, v in X_T.items()}
    valid = {n: np.concatenate(v) for n, v in alive.items()}
    path_idx = np.arange(cfg.n_paths)

    utility_T, stats = {}, {}
    for name, x in X_T.items():
        u = np.full(x.shape, np.nan)
        u[valid[name]] = cfg.utility(x[valid[name]])
        utility_T[name] = u
        ok = valid[name]
        units = _pair_units(u[ok], path_idx[ok], cfg.antithetic)
        mean, se = _stats(units, units.size) if units.size else (math.nan, math.nan)
        ce = float(cfg.utility.inverse(mean)) if units.size else math.nan
        stats[name] = StrategyStats(mean, se, ce, int(ok.sum()), int((~ok).sum()))

    paired = {}
    names = [s.name for s in cfg.strategies]
    ref = names[0]
    for other in names[1:]:
        ok = valid[ref] & valid[other]
        diff = utility_T[ref][ok] - utility_T[other][ok]
        units = _pair_units(diff, path_idx[ok], cfg.antithetic)
        mean, se = _stats(units, units.size) if units.size else (math.nan, math.nan)
        paired[f"{ref}-{other}"] = PairedStats(mean, se, mean - Z95 * se, mean + Z95 * se, int(ok.sum()))

    return SimReport(
        strategies=stats,
        paired=paired,
        violations=sum(s.violations for s in stats.values()),
        theta=theta,
        Y_T=Y_T,
        wealth_T=X_T,
        utility_T=utility_T,
        valid=valid,
    )


# -- filter SDE check ---------------------------------------------------------------------


@dataclass(frozen=True)
class FilterSDEResult:
    """Euler-integrated filter versus the exact filter.

    ``theta_hat_error`` and ``density_error`` are means over paths of the
    largest deviation along the path; ``max_error`` is the larger of the two.
    """

    n_steps: int
    theta_hat_error: float
    density_error: float
    mass_drift: float
    min_mass: float

    @property
    def max_error(self) -> float:
        return max(self.theta_hat_error, self.density_error)


def _euler_filter(prior: Prior, T: float, theta: np.ndarray, dW: np.ndarray) -> FilterSDEResult:
    P, N = dW.shape
    dt = T / N
    th = prior.nodes
    w = prior.weights
    Y = np.zeros(P)
    m_euler = np.full(P, float(w @ th))
    dens = np.ones((P, th.size))  # density w.r.t. the prior, starts at 1
    err_m = np.zeros(P)
    err_p = np.zeros(P)
    drift = 0.0
    min_mass = 1.0
    for k in range(N):
        t = k * dt
        _, _, v_exact = filter_moments(prior, t, Y)
        dY = theta * dt + dW[:, k]
        m_dens = dens @ (w * th)
        m_euler = m_euler + v_exact * (dY - m_euler * dt)
        dens = dens + dens * (th - m_dens[:, None]) * (dY - m_dens * dt)[:, None]
        Y = Y + dY
        masses = posterior_masses(prior, t + dt, Y)
        _, m_exact, _ = filter_moments(prior, t + dt, Y)
        err_m = np.maximum(err_m, np.abs(m_euler - m_exact))
        err_p = np.maximum(err_p, np.max(np.abs(dens - masses / w), axis=1))
        euler_masses = dens * w
        drift = max(drift, float(np.max(np.abs(euler_masses.sum(axis=1) - 1.0))))
        min_mass = min(min_mass, float(euler_masses.min()))
    return FilterSDEResult(N, float(err_m.mean()), float(err_p.mean()), drift, min_mass)


def filter_sde_check(cfg: SimConfig, n_steps: int | None = None) -> FilterSDEResult:
    """Integrate the filter SDEs by Euler on simulated observation paths.

    The posterior-mean equation uses the exact conditional variance as its
    coefficient; the density equation is closed in itself.
    """
    if cfg.prior.kind not in ("point_mass", "discrete"):
        raise HaraError("filter SDE check needs a discrete prior")
    theta, dW = path_noise(cfg, np.arange(cfg.n_paths), n_steps)
    return _euler_filter(cfg.prior, cfg.mkt.T, theta, dW)


def filter_sde_convergence(cfg: SimConfig, levels=(250, 500)) -> list[FilterSDEResult]:
    """Run the Euler filter at several step counts on refinements of the same Brownian paths."""
    if cfg.prior.kind not in ("point_mass", "discrete"):
        raise HaraError("filter SDE check needs a discrete prior")
    finest = max(levels)
    if any(finest % n for n in levels):
        raise ValueError("every level must divide the finest level")
    theta, dW = path_noise(cfg, np.arange(cfg.n_paths), finest)
    out = []
    for n in levels:
        coarse = dW.reshape(dW.shape[0], n, finest // n).sum(axis=2)
        out.append(_euler_filter(cfg.prior, cfg.mkt.T, theta, coarse))
    return out
