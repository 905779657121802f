"""Numerically stable primitives shared by the filter and the policy code."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import logsumexp

from .errors import IntegrandError, QuadratureError
from .prior import Prior

LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class QuadConfig:
    """Quadrature settings (config keys ``quad.z_nodes``, ``quad.theta_nodes``, ``quad.tol``).

    ``theta_nodes`` is only consulted when a Gaussian or continuous prior is
    built from a config; ``None`` keeps the per-kind default.
    """

    z_nodes: int = 64
    theta_nodes: int | None = None
    tol: float = 1e-10
    adapt_iters: int = 2

    def __post_init__(self):
        if self.z_nodes < 2:
            raise ValueError("z_nodes must be at least 2")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


DEFAULT_QUAD = QuadConfig()


@dataclass(frozen=True)
class ZQuadrature:
    """Nodes/weights approximating integrals against the centered normal kernel."""

    nodes: np.ndarray
    weights: np.ndarray
    variance: float

    def integrate(self, g: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, g(self.nodes)))


@lru_cache(maxsize=32)
def standard_normal_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes and log-weights for expectations under N(0, 1)."""
    x, w = hermgauss(n)
    x = np.sqrt(2.0) * x
    with np.errstate(divide="ignore"):
        lw = np.log(w) - 0.5 * np.log(np.pi)
    x.setflags(write=False)
    lw.setflags(write=False)
    return x, lw


def gauss_hermite_z(T_minus_t: float, n: int) -> ZQuadrature:
    """Rule for ``∫ g(z) φ(z) dz`` with φ the N(0, T_minus_t) density.

    Exact for polynomials up to degree ``2n - 1``.
    """
    if not T_minus_t > 0:
        raise QuadratureError("degenerate kernel; use boundary value")
    if n < 2:
        raise QuadratureError("need at least 2 nodes")
    x, lw = standard_normal_rule(n)
    return ZQuadrature(np.sqrt(T_minus_t) * x, np.exp(lw), float(T_minus_t))


def shifted_rule(
    variance: float, n: int, center: np.ndarray, scale: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Importance-shifted Gauss-Hermite rule for the N(0, variance) kernel.

    Nodes are placed at ``center + scale * x_i``; the returned log-weights
    absorb the ratio between the target kernel and the N(center, scale²)
    sampling kernel, so ``logsumexp(log g(z) + logw)`` approximates
    ``log ∫ g(z) φ(z) dz``. ``center`` and ``scale`` broadcast against a
    trailing node axis. With ``center=0`` and ``scale=sqrt(variance)`` this
    is exactly :func:`gauss_hermite_z`.
    """
    if not variance > 0:
        raise QuadratureError("degenerate kernel; use boundary value")
    x, lw = standard_normal_rule(n)
    center = np.asarray(center, dtype=float)[..., None]
    scale = np.asarray(scale, dtype=float)[..., None]
    z = center + scale * x
    logw = lw + 0.5 * x**2 + np.log(scale) - 0.5 * z**2 / variance - 0.5 * np.log(variance)
    return z, logw


def normal_logpdf(z, variance: float):
    return -0.5 * np.asarray(z) ** 2 / variance - 0.5 * (LOG_2PI + np.log(variance))


def log_sum_exp_integrate(prior: Prior, exponent: Callable[[np.ndarray], np.ndarray]) -> float:
    """Return ``log ∫ exp(exponent(θ)) μ(dθ)`` without overflow."""
    e = np.broadcast_to(np.asarray(exponent(prior.nodes), dtype=float), prior.nodes.shape)
    if np.any(np.isnan(e)) or np.any(e == np.inf):
        raise IntegrandError("integrand not finite")
    if np.all(e == -np.inf):
        raise QuadratureError("all exponents are -inf; integral is zero")
    return float(logsumexp(e + prior.log_weights))


def self_converge(evaluate: Callable[[int], tuple], n: int, tol: float) -> tuple:
    """Evaluate at ``n`` and ``2n`` nodes; accept the finer result if they agree.

    ``evaluate(n)`` returns a tuple of arrays. Agreement means
    ``|a - b| <= tol * (1 + |b|)`` elementwise for every entry. On failure
    the node count is doubled once more; a second failure raises.
    """
    coarse = evaluate(n)
    for factor in (2, 4):
        fine = evaluate(factor * n)
        if _agree(coarse, fine, tol):
            return fine
        coarse = fine
    raise QuadratureError(f"quadrature did not self-converge at {4 * n} nodes (tol={tol:g})")


def _agree(a: tuple, b: tuple, tol: float) -> bool:
    for u, v in zip(a, b):
        u = np.asarray(u)
        v = np.asarray(v)
        if not np.all(np.isfinite(v)):
            return False
        if np.any(np.abs(u - v) > tol * (1.0 + np.abs(v))):
            return False
    return True
