import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import logsumexp

from hara_learning import Prior
from hara_learning.errors import IntegrandError, QuadratureError
from hara_learning.numerics import (
    gauss_hermite_z,
    log_sum_exp_integrate,
    self_converge,
    shifted_rule,
    standard_normal_rule,
)


@pytest.mark.parametrize("power", range(0, 12, 2))
def test_gauss_hermite_normal_moments(power):
    s2 = 0.7
    rule = gauss_hermite_z(s2, 16)
    # E[Z^p] = s^p (p-1)!!
    expected = s2 ** (power / 2) * math.prod(range(power - 1, 0, -2))
    assert rule.integrate(lambda z: z**power) == pytest.approx(expected, rel=1e-12)


@given(st.floats(-2, 2), st.floats(0.05, 3.0))
def test_exponential_moment(a, s2):
    rule = gauss_hermite_z(s2, 64)
    assert rule.integrate(lambda z: np.exp(a * z)) == pytest.approx(math.exp(a * a * s2 / 2), rel=1e-12)


def test_degenerate_kernel():
    with pytest.raises(QuadratureError, match="degenerate kernel"):
        gauss_hermite_z(0.0, 16)


@given(st.floats(-0.5, 0.5), st.floats(0.8, 1.2), st.floats(-2, 2))
def test_shifted_rule_recentred_on_tilt(offset, rel_scale, a):
    # nodes placed near the tilted mean a*s2 with roughly the kernel width
    s2 = 0.8
    z, logw = shifted_rule(s2, 64, np.array(a * s2 + offset), np.array(rel_scale * math.sqrt(s2)))
    got = logsumexp(a * z + logw)
    assert got == pytest.approx(a * a * s2 / 2, abs=1e-10)


def test_shifted_rule_reduces_to_plain_rule():
    s2 = 0.5
    z, logw = shifted_rule(s2, 20, np.array(0.0), np.array(math.sqrt(s2)))
    plain = gauss_hermite_z(s2, 20)
    np.testing.assert_allclose(z, plain.nodes, rtol=1e-15)
    np.testing.assert_allclose(np.exp(logw), plain.weights, rtol=1e-12)


def test_standard_rule_is_cached_and_read_only():
    x1, _ = standard_normal_rule(8)
    x2, _ = standard_normal_rule(8)
    assert x1 is x2
    with pytest.raises(ValueError):
        x1[0] = 0.0


def test_log_sum_exp_survives_huge_exponents():
    p = Prior.discrete([(1.0, 0.5), (2.0, 0.5)])
    got = log_sum_exp_integrate(p, lambda th: 1000.0 * th)
    assert got == pytest.approx(2000.0 + math.log(0.5 * (1 + math.exp(-1000.0))), abs=1e-12)


def test_log_sum_exp_errors():
    p = Prior.discrete([(1.0, 0.5), (2.0, 0.5)])
    with pytest.raises(IntegrandError):
        log_sum_exp_integrate(p, lambda th: np.where(th > 1.5, np.nan, 0.0))
    with pytest.raises(QuadratureError):
        log_sum_exp_integrate(p, lambda th: np.full_like(th, -np.inf))


def test_self_converge_accepts_and_rejects():
    out = self_converge(lambda n: (np.array(1.0 + 1.0 / n**8),), 16, 1e-9)
    assert out[0] == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(QuadratureError):
        self_converge(lambda n: (np.array(1.0 / n),), 16, 1e-12)
