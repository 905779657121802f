"""Executable structural checks on a prior/market configuration.

Each check returns a :class:`Check`. For priors that are not constant in
sign the monotonicity results need not hold, so those checks run in
detection mode: they report where monotonicity fails without failing the
suite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import gaussian_oracle as go
from .bayes_filter import log_F, posterior_density, theta_hat
from .errors import DivergenceError, HaraError
from .numerics import DEFAULT_QUAD, QuadConfig
from .policy import (
    EvalPoint,
    Exp,
    Log,
    MarketParams,
    Power,
    gamma_sweep,
    learning_factor,
    monotonicity_violations,
    pi_hat_exp,
    pi_hat_log,
    pi_hat_power,
    pi_myopic,
)
from .prior import Prior, SignClass, integrate, sign_class, support_bounds

MONO_SLACK = 1e-9


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""
    detection_only: bool = False

    @property
    def status(self) -> str:
        if self.detection_only:
            return "DETECT"
        return "PASS" if self.passed else "FAIL"


def default_gammas(n: int = 50, lo: float = -20.0, hi: float = 0.95) -> list[float]:
    return [float(g) for g in np.linspace(lo, hi, n) if g != 0]


def _admissible_gammas(prior: Prior, mkt: MarketParams, gammas: Sequence[float]) -> list[float]:
    if prior.kind != "gaussian":
        return list(gammas)
    gp = go.GaussianPriorParams(prior.params["m"], prior.params["v"])
    return [g for g in gammas if go.exists_power(gp, mkt, g) and go._margin(gp, mkt, g) > 1e-6]


def filter_checks(prior: Prior, mkt: MarketParams, ts: Sequence[float], ys: Sequence[float]) -> list[Check]:
    out = []
    tpos = [t for t in ts if t > 0] or [mkt.T]
    worst_norm = max(
        abs(integrate(prior, posterior_density(prior, t, y)) - 1.0) for t in tpos for y in ys
    )
    out.append(Check("posterior normalization", worst_norm <= 1e-10, f"max |∫p dμ - 1| = {worst_norm:.3g}"))

    h = 1e-5
    worst_fd = max(
        abs((log_F(prior, t, y + h) - log_F(prior, t, y - h)) / (2 * h) - theta_hat(prior, t, y))
        for t in tpos
        for y in ys
    )
    out.append(Check("theta_hat = d/dy log F", worst_fd <= 1e-6, f"max deviation = {worst_fd:.3g}"))

    dense = np.linspace(min(ys) - 1.0, max(ys) + 1.0, 201)
    bad = [t for t in tpos if np.any(np.diff(theta_hat(prior, t, dense)) < -MONO_SLACK)]
    out.append(Check("theta_hat increasing in y", not bad, f"violations at t={bad}" if bad else ""))

    bounds = support_bounds(prior)
    if bounds is not None:
        lo, hi = bounds
        vals = np.concatenate([theta_hat(prior, t, dense) for t in ts])
        ok = bool(np.all(vals >= lo - 1e-12) and np.all(vals <= hi + 1e-12))
        out.append(Check("theta_hat within support", ok, f"range [{vals.min():.6g}, {vals.max():.6g}]"))
    return out


def policy_checks(
    prior: Prior,
    mkt: MarketParams,
    ts: Sequence[float],
    xs: Sequence[float],
    ys: Sequence[float],
    gammas: Sequence[float],
    eta: float = 0.0,
    beta: float = 1.0,
    quad: QuadConfig = DEFAULT_QUAD,
) -> list[Check]:
    out = []
    ts = [t for t in ts if t < mkt.T] or [0.0]
    sc = sign_class(prior)
    constant_sign = sc is not SignClass.MIXED
    x_pos = [x for x in xs if x > 0] or [1.0]
    points = [EvalPoint(t, x, y) for t, x, y in itertools.product(ts, x_pos, ys)]

    worst = max(
        abs(learning_factor(prior, mkt, p.t, p.y, 0.0, quad) - theta_hat(prior, p.t, p.y)) for p in points
    )
    out.append(Check("representation identity (gamma=0)", worst <= 1e-8, f"max deviation = {worst:.3g}"))

    grid = _admissible_gammas(prior, mkt, gammas)
    mono_bad, pos_bad, bound_bad, abs_bad = [], [], [], []
    bounds = support_bounds(prior)
    for p in points:
        rows = [r for r in gamma_sweep(prior, mkt, p, eta, grid, beta, quad) if r.ratio is not None]
        if not rows:
            continue
        for a, b, va, vb in monotonicity_violations(rows, "ratio", MONO_SLACK):
            mono_bad.append((p, a, b))
        pos_bad += [(p, r.gamma) for r in rows if not r.ratio > 0]
        if bounds is not None and constant_sign:
            lo, hi = sorted(abs(v) for v in bounds)
            rb = (lo / hi, hi / lo)
            bound_bad += [(p, r.gamma) for r in rows if not rb[0] - 1e-12 <= r.ratio <= rb[1] + 1e-12]
        for r in rows:
            if r.gamma > 0 and abs(r.pi_hat) < abs(r.pi_myopic) * (1 - MONO_SLACK):
                abs_bad.append((p, r.gamma))
            if r.gamma < 0 and abs(r.pi_hat) > abs(r.pi_myopic) * (1 + MONO_SLACK):
                abs_bad.append((p, r.gamma))

    detect = not constant_sign and prior.kind != "gaussian"
    out.append(
        Check(
            "ratio nondecreasing in gamma",
            not mono_bad,
            f"{len(mono_bad)} violations" + (f", first at {mono_bad[0]}" if mono_bad else ""),
            detection_only=detect,
        )
    )
    out.append(Check("ratio positive", not pos_bad, f"{len(pos_bad)} violations", detection_only=detect))
    out.append(
        Check("|pi_hat| vs |pi_myopic| ordered by sign of gamma", not abs_bad, f"{len(abs_bad)} violations", detection_only=detect)
    )
    if bound_bad or (bounds is not None and constant_sign):
        out.append(Check("ratio within support-ratio bounds", not bound_bad, f"{len(bound_bad)} violations"))

    # limits in gamma and in time
    lim_log, lim_exp, lim_T, ratio_one = [], [], [], []
    for p in points:
        th0 = theta_hat(prior, p.t, p.y)
        if th0 == 0:
            continue
        plog = pi_hat_log(prior, Log(beta, eta), mkt, p)
        for g in (1e-4, -1e-4):
            pg = pi_hat_power(prior, Power(g, beta, eta), mkt, p, quad)
            lim_log.append(abs(pg - plog) / abs(plog))
            pm = pi_myopic(prior, Power(g, beta, eta), mkt, p)
            ratio_one.append(abs(pg / pm - 1.0))
        pexp = pi_hat_exp(prior, Exp(beta), mkt, p, quad)
        pg = pi_hat_power(prior, Power(-1e4, beta, 1.0), mkt, p, quad)
        if pexp != 0:
            lim_exp.append(abs(pg - pexp) / abs(pexp))
        near = EvalPoint(mkt.T - 1e-4, p.x, p.y)
        at_T = EvalPoint(mkt.T, p.x, p.y)
        for util in (Power(-1.0, beta, eta), Exp(beta)):
            a = pi_hat_power(prior, util, mkt, near, quad) if isinstance(util, Power) else pi_hat_exp(prior, util, mkt, near, quad)
            b = pi_myopic(prior, util, mkt, at_T)
            lim_T.append(abs(a - b) / max(abs(b), 1e-300))
    for name, vals in (
        ("gamma->0 limit equals log portfolio", lim_log),
        ("gamma->-inf limit equals exponential portfolio", lim_exp),
        ("t->T limit equals myopic portfolio", lim_T),
        ("ratio -> 1 as gamma -> 0", ratio_one),
    ):
        worst = max(vals) if vals else 0.0
        out.append(Check(name, worst <= 1e-3, f"max relative deviation = {worst:.3g}"))

    if constant_sign:
        bad = []
        for p in points:
            pe = pi_hat_exp(prior, Exp(beta), mkt, p, quad)
            pm = pi_myopic(prior, Exp(beta), mkt, p)
            if pm != 0 and not (-MONO_SLACK <= pe / pm <= 1 + MONO_SLACK):
                bad.append(p)
        out.append(Check("exponential ratio in [0, 1]", not bad, f"{len(bad)} violations"))
    return out


def gaussian_checks(
    prior: Prior,
    mkt: MarketParams,
    ts: Sequence[float],
    xs: Sequence[float],
    ys: Sequence[float],
    gammas: Sequence[float],
    eta: float = 0.0,
    beta: float = 1.0,
    quad: QuadConfig = DEFAULT_QUAD,
    rtol: float = 1e-6,
) -> list[Check]:
    gp = go.GaussianPriorParams(prior.params["m"], prior.params["v"])
    grid = _admissible_gammas(prior, mkt, gammas)
    worst_pi = worst_ratio = worst_hedge = 0.0
    sign_bad = 0
    for g, t, x, y in itertools.product(grid, [t for t in ts if t < mkt.T], xs, ys):
        util = Power(g, beta, eta)
        pt = EvalPoint(t, x, y)
        try:
            ph = pi_hat_power(prior, util, mkt, pt, quad)
        except (DivergenceError, HaraError):
            continue
        pm = pi_myopic(prior, util, mkt, pt)
        c = go.closed_pi_hat(gp, util, mkt, pt)
        scale = abs(go._merton_exposure(util, mkt, pt)) * max(abs(gp.m), gp.v)
        worst_pi = max(worst_pi, abs(ph - c) / max(abs(c), 1e-12 * scale, 1e-300))
        worst_hedge = max(
            worst_hedge,
            abs((ph - pm) - go.closed_hedging(gp, util, mkt, pt)) / max(abs(c), 1e-12 * scale, 1e-300),
        )
        if pm != 0 and abs(pm) > 1e-12 * scale:
            worst_ratio = max(worst_ratio, abs(ph / pm - go.closed_ratio(gp, mkt, t, g)) / go.closed_ratio(gp, mkt, t, g))
        if abs(c) > 1e-12 * scale and np.sign(ph) != np.sign(go.closed_theta_hat(gp, t, y)):
            sign_bad += 1
    out = [
        Check("gaussian oracle: pi_hat", worst_pi <= rtol, f"max relative error = {worst_pi:.3g}"),
        Check("gaussian oracle: ratio", worst_ratio <= rtol, f"max relative error = {worst_ratio:.3g}"),
        Check("gaussian oracle: hedging demand", worst_hedge <= rtol, f"max relative error = {worst_hedge:.3g}"),
        Check("gaussian: sign(pi_hat) = sign(theta_hat)", sign_bad == 0, f"{sign_bad} violations"),
    ]
    inc_bad = [
        t for t in ts if t < mkt.T and np.any(np.diff([go.closed_ratio(gp, mkt, t, g) for g in grid]) <= 0)
    ]
    out.append(
        Check("gaussian: closed ratio increasing in gamma", not inc_bad, f"violations at t={inc_bad}" if inc_bad else "")
    )
    return out


def run_suite(
    prior: Prior,
    mkt: MarketParams,
    ts: Sequence[float],
    xs: Sequence[float],
    ys: Sequence[float],
    gammas: Sequence[float] | None = None,
    eta: float = 0.0,
    beta: float = 1.0,
    quad: QuadConfig = DEFAULT_QUAD,
) -> list[Check]:
    gammas = default_gammas() if gammas is None else list(gammas)
    checks = filter_checks(prior, mkt, ts, ys)
    checks += policy_checks(prior, mkt, ts, xs, ys, gammas, eta, beta, quad)
    if prior.kind == "gaussian":
        checks += gaussian_checks(prior, mkt, ts, xs, ys, gammas, eta, beta, quad)
    return checks


def suite_passed(checks: Sequence[Check]) -> bool:
    return all(c.passed for c in checks if not c.detection_only)


def format_checks(checks: Sequence[Check]) -> str:
    width = max(len(c.name) for c in checks)
    return "\n".join(f"[{c.status:6}] {c.name:<{width}}  {c.detail}".rstrip() for c in checks)
