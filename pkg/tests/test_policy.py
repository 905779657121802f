import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hara_learning import (
    EvalPoint,
    Exp,
    Log,
    MarketParams,
    Power,
    Prior,
    gamma_sweep,
    h_value,
    learning_factor,
    pi_hat,
    pi_merton,
    pi_myopic,
    policy_report,
    theta_hat,
    value_function,
)
from hara_learning.errors import DivergenceError, DomainError, HaraError
from hara_learning.policy import monotonicity_violations, pi_hat_exp, pi_hat_power, q_density

ATOMS = [(0.1, 0.5), (0.5, 0.5)]


def integer_tilt_oracle(atoms, T, t, y, k):
    """Exact ∫F(T,y+z)^k φ_{T-t}(z)dz for a discrete prior and integer k.

    F^k expands into a sum of exponentials linear in z, each of which has a
    closed-form normal expectation. Returns (log h, learning factor).
    """
    s2 = T - t
    terms, slopes = [], []
    for combo in itertools.product(atoms, repeat=k):
        S = sum(a for a, _ in combo)
        Q = sum(a * a for a, _ in combo)
        logw = sum(math.log(w) for _, w in combo)
        terms.append(logw + S * y - Q * T / 2 + S * S * s2 / 2)
        slopes.append(S)
    terms = np.array(terms)
    top = terms.max()
    c = np.exp(terms - top)
    log_h = top + math.log(c.sum())
    return log_h, float(np.dot(c, slopes) / c.sum()) / k


def trapezoid_oracle(atoms, T, t, y, k, n=40001):
    """Dense trapezoid rule on ±14 standard deviations; independent of the library."""
    s = math.sqrt(T - t)
    z = np.linspace(-14 * s, 14 * s, n)
    th = np.array([a for a, _ in atoms])
    w = np.array([w for _, w in atoms])
    u = y + z
    terms = np.exp(np.outer(u, th) - th**2 * T / 2) * w
    F = terms.sum(axis=1)
    theta_T = (terms * th).sum(axis=1) / F
    kern = np.exp(-(z**2) / (2 * s * s)) / math.sqrt(2 * math.pi * s * s)
    g = F**k * kern
    h = np.trapezoid(g, z)
    return math.log(h), np.trapezoid(g * theta_T, z) / h


@pytest.mark.parametrize("gamma,k", [(0.5, 2), (2 / 3, 3)])
@pytest.mark.parametrize("t,y", [(0.0, 0.0), (0.3, -0.7), (0.8, 1.5), (0.0, 4.0)])
def test_integer_tilt_closed_form(mkt, gamma, k, t, y):
    prior = Prior.discrete(ATOMS)
    log_h, L = integer_tilt_oracle(ATOMS, mkt.T, t, y, k)
    assert h_value(prior, mkt, t, y, gamma) == pytest.approx(log_h, rel=1e-10, abs=1e-12)
    assert learning_factor(prior, mkt, t, y, gamma) == pytest.approx(L, rel=1e-10)


@pytest.mark.parametrize("gamma", [-20.0, -1.0, -0.1, 0.3])
@pytest.mark.parametrize("t,y", [(0.0, 0.0), (0.5, -1.0), (0.9, 2.0)])
def test_fractional_tilt_against_trapezoid(mkt, gamma, t, y):
    atoms = [(-0.2, 0.3), (0.4, 0.7)]
    prior = Prior.discrete(atoms)
    k = 1 / (1 - gamma)
    log_h, L = trapezoid_oracle(atoms, mkt.T, t, y, k)
    assert h_value(prior, mkt, t, y, gamma) == pytest.approx(log_h, abs=1e-9)
    assert learning_factor(prior, mkt, t, y, gamma) == pytest.approx(L, abs=1e-9)


@pytest.mark.parametrize("gamma", [-3.0, -0.5, 0.4])
def test_learning_factor_is_log_derivative_of_h(mkt, gamma):
    prior = Prior.uniform(0.05, 0.6)
    t, y, d = 0.25, 0.4, 1e-5
    fd = (h_value(prior, mkt, t, y + d, gamma) - h_value(prior, mkt, t, y - d, gamma)) / (2 * d)
    assert (1 - gamma) * fd == pytest.approx(learning_factor(prior, mkt, t, y, gamma), abs=1e-7)


@given(st.floats(0.0, 0.99), st.floats(-3, 3))
def test_tower_identity(t, y):
    prior = Prior.discrete([(-0.4, 0.3), (0.2, 0.3), (0.9, 0.4)])
    m = MarketParams(0.2, 1.0)
    assert learning_factor(prior, m, t, y, 0.0) == pytest.approx(theta_hat(prior, t, y), abs=1e-8)


def test_q_density_integrates_to_one(mkt):
    prior = Prior.discrete(ATOMS)
    q = q_density(prior, mkt, 0.2, 0.1, -1.0)
    z = np.linspace(-10, 10, 20001)
    assert np.trapezoid(q(z), z) == pytest.approx(1.0, abs=1e-9)


UTILITIES = [Power(-2.0), Power(0.5, beta=2.0, eta=0.3), Log(), Log(beta=0.5, eta=0.2), Exp(), Exp(beta=3.0)]


@pytest.mark.parametrize("theta0", [-0.3, 0.0, 0.3])
@pytest.mark.parametrize("util", UTILITIES)
def test_point_mass_is_merton(mkt, theta0, util):
    prior = Prior.point_mass(theta0)
    for t, x, y in itertools.product([0.0, 0.4, 0.99], [0.5, 2.0], [-1.0, 0.0, 1.0]):
        pt = EvalPoint(t, x, y)
        expected = pi_merton(util, mkt, pt, theta0)
        assert abs(pi_hat(prior, util, mkt, pt) - expected) <= 1e-12 * max(1.0, abs(expected))


@pytest.mark.parametrize("theta0", [-0.3, 0.3])
def test_point_mass_value_functions(theta0):
    m = MarketParams(0.2, 1.5, 0.03)
    prior = Prior.point_mass(theta0)
    pt = EvalPoint(0.0, 1.3, 0.0)
    fwd = pt.x * math.exp(m.r * m.T)
    T = m.T
    # classical Merton values with a known drift
    g = -1.5
    assert value_function(prior, Power(g), m, pt) == pytest.approx(
        Power(g)(fwd) * math.exp(g * theta0**2 * T / (2 * (1 - g))), rel=1e-12
    )
    assert value_function(prior, Log(), m, pt) == pytest.approx(math.log(fwd) + theta0**2 * T / 2, rel=1e-12)
    assert value_function(prior, Exp(2.0), m, pt) == pytest.approx(
        -math.exp(-2.0 * fwd - theta0**2 * T / 2), rel=1e-12
    )


def test_value_at_horizon_is_F_times_utility(two_point, mkt):
    pt = EvalPoint(mkt.T, 1.2, 0.4)
    from hara_learning import log_F

    F = math.exp(log_F(two_point, mkt.T, 0.4))
    assert value_function(two_point, Power(-1.0), mkt, pt) == pytest.approx(F * Power(-1.0)(1.2), rel=1e-12)
    assert value_function(two_point, Exp(), mkt, pt) == pytest.approx(F * Exp()(1.2), rel=1e-12)


def test_ratio_is_one_for_log(two_point, mkt):
    rep = policy_report(two_point, Log(), mkt, EvalPoint(0.2, 1.0, 0.3))
    assert rep.ratio == 1.0 and rep.hedging_demand == 0.0


@given(
    st.floats(0.02, 1.0),
    st.floats(0.02, 1.0),
    st.floats(0.1, 0.9),
    st.floats(0.0, 0.9),
    st.floats(-2.0, 2.0),
)
def test_ratio_monotone_and_bounded_for_positive_priors(a, b, w, t, y):
    lo, hi = sorted((a, b))
    if hi - lo < 1e-3:
        hi = lo + 1e-3
    prior = Prior.discrete([(lo, w), (hi, 1 - w)])
    m = MarketParams(0.2, 1.0)
    rows = gamma_sweep(prior, m, EvalPoint(t, 1.0, y), 0.0, np.linspace(-20, 0.95, 12))
    assert all(r.error is None for r in rows)
    assert not monotonicity_violations(rows, "ratio", 1e-9)
    for r in rows:
        assert lo / hi - 1e-12 <= r.ratio <= hi / lo + 1e-12


@given(st.floats(0.02, 1.0), st.floats(0.02, 1.0), st.floats(0.0, 0.9), st.floats(-2, 2))
def test_exponential_ratio_in_unit_interval(a, b, t, y):
    prior = Prior.discrete([(min(a, b), 0.5), (max(a, b) + 1e-3, 0.5)])
    m = MarketParams(0.25, 2.0, 0.01)
    pt = EvalPoint(t, 0.7, y)
    ratio = pi_hat_exp(prior, Exp(), m, pt) / pi_myopic(prior, Exp(), m, pt)
    assert -1e-12 <= ratio <= 1 + 1e-12


@pytest.mark.parametrize("util", [Power(-3.0, eta=0.2), Power(0.6), Exp(), Log()])
def test_mirror_symmetry(mkt, util):
    pos = Prior.discrete([(0.1, 0.3), (0.5, 0.7)])
    neg = Prior.discrete([(-0.1, 0.3), (-0.5, 0.7)])
    pt = EvalPoint(0.3, 1.0, 0.4)
    mirrored = EvalPoint(0.3, 1.0, -0.4)
    assert pi_hat(neg, util, mkt, mirrored) == pytest.approx(-pi_hat(pos, util, mkt, pt), rel=1e-12)


def test_gamma_limits(two_point, mkt):
    pt = EvalPoint(0.2, 1.0, 0.1)
    plog = pi_hat(two_point, Log(), mkt, pt)
    assert pi_hat(two_point, Power(1e-4), mkt, pt) == pytest.approx(plog, rel=1e-3)
    pexp = pi_hat(two_point, Exp(), mkt, pt)
    assert pi_hat(two_point, Power(-1e4, eta=1.0), mkt, pt) == pytest.approx(pexp, rel=1e-3)
    # below the delegation threshold the exponential tilt is used directly
    assert pi_hat(two_point, Power(-1e7, eta=1.0), mkt, pt) == pytest.approx(pexp, rel=1e-6)


def test_horizon_limit(two_point, mkt):
    pt = EvalPoint(mkt.T - 1e-4, 1.0, 0.3)
    for util in (Power(-1.0), Exp()):
        assert pi_hat(two_point, util, mkt, pt) == pytest.approx(pi_myopic(two_point, util, mkt, pt), rel=1e-3)
    at_T = EvalPoint(mkt.T, 1.0, 0.3)
    assert pi_hat(two_point, Power(-1.0), mkt, at_T) == pi_myopic(two_point, Power(-1.0), mkt, at_T)


def test_domain_errors(two_point, mkt):
    with pytest.raises(DomainError):
        pi_hat(two_point, Power(-1.0), mkt, EvalPoint(0.0, -1.0, 0.0))
    with pytest.raises(DomainError):
        pi_hat(two_point, Log(eta=0.0), mkt, EvalPoint(0.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        Power(1.0)
    with pytest.raises(HaraError):
        pi_hat(two_point, Power(-1.0), mkt, EvalPoint(1.5, 1.0, 0.0))


def test_negative_wealth_allowed_with_eta(two_point, mkt):
    # βx/(1-γ) + η > 0 admits x < 0 when η > 0
    assert np.isfinite(pi_hat(two_point, Power(-1.0, eta=1.0), mkt, EvalPoint(0.0, -0.5, 0.0)))


def test_gaussian_divergence_detected(gauss, mkt):
    with pytest.raises(DivergenceError):
        pi_hat_power(gauss, Power(0.9), mkt, EvalPoint(0.0, 1.0, 0.0))


def test_sweep_records_errors_and_sorts(gauss, mkt):
    rows = gamma_sweep(gauss, mkt, EvalPoint(0.0, 1.0, 0.0), 0.0, [0.9, -1.0, 0.5])
    assert [r.gamma for r in rows] == [-1.0, 0.5, 0.9]
    assert rows[-1].error and rows[-1].error.startswith("DivergenceError")
    assert rows[0].error is None


def test_hedging_sign_flips_at_log(two_point, mkt):
    pt = EvalPoint(0.0, 1.0, 0.0)
    rows = gamma_sweep(two_point, mkt, pt, 0.0, [-2.0, -0.5, 0.25, 0.5])
    assert all(r.hedging < 0 for r in rows if r.gamma < 0)
    assert all(r.hedging > 0 for r in rows if r.gamma > 0)


def test_vectorized_learning_factor(two_point, mkt):
    ys = np.linspace(-2, 2, 7)
    vec = learning_factor(two_point, mkt, 0.3, ys, -1.0)
    np.testing.assert_allclose(vec, [learning_factor(two_point, mkt, 0.3, y, -1.0) for y in ys], rtol=1e-12)
