"""Prior distributions for the market price of risk.

Every prior is stored as a finite node/weight measure on the real line.
Discrete priors are exact; Gaussian priors use Gauss-Hermite nodes and
bounded continuous priors use Gauss-Legendre nodes on their support.
Downstream code only ever integrates against the prior, so this single
representation serves all variants.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss

from .errors import IntegrandError, PriorError

WEIGHT_SUM_TOL = 1e-9
DEFAULT_GAUSSIAN_NODES = 64
DEFAULT_CONTINUOUS_NODES = 128


class SignClass(enum.Enum):
    STRICTLY_POSITIVE = "strictly_positive"
    STRICTLY_NEGATIVE = "strictly_negative"
    MIXED = "mixed"


@dataclass(frozen=True, eq=False)
class Prior:
    """Node/weight representation of the prior of the market price of risk.

    Use the classmethod constructors rather than building this directly.

    Attributes
    ----------
    kind : one of ``point_mass``, ``discrete``, ``gaussian``, ``continuous``
    nodes, weights : atoms and their probabilities (weights sum to one)
    params : constructor parameters, kept for sign/support queries,
        the Gaussian existence check and config serialization
    """

    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float).ravel()
        weights = np.array(self.weights, dtype=float).ravel()
        if nodes.size == 0 or nodes.shape != weights.shape:
            raise PriorError("nodes and weights must be non-empty and of equal length")
        if not np.all(np.isfinite(nodes)):
            raise PriorError("prior atoms must be finite")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise PriorError("prior weights must be strictly positive")
        total = weights.sum()
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise PriorError(f"prior weights sum to {total!r}, not 1")
        # remove rounding-level residue only; larger mismatches were rejected above
        weights = weights / total
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    # -- constructors -----------------------------------------------------

    @classmethod
    def point_mass(cls, theta0: float) -> "Prior":
        return cls("point_mass", [theta0], [1.0], {"theta0": float(theta0)})

    @classmethod
    def discrete(cls, atoms: Sequence[tuple[float, float]]) -> "Prior":
        """Prior with finitely many atoms given as ``(theta, weight)`` pairs."""
        atoms = [(float(a), float(w)) for a, w in atoms]
        if not atoms:
            raise PriorError("discrete prior needs at least one atom")
        thetas, weights = zip(*atoms)
        return cls("discrete", thetas, weights, {"atoms": atoms})

    @classmethod
    def gaussian(cls, m: float, v: float, n_nodes: int = DEFAULT_GAUSSIAN_NODES) -> "Prior":
        """Normal prior with mean ``m`` and standard deviation ``v``."""
        if not v > 0:
            raise PriorError("gaussian prior needs a positive standard deviation")
        if n_nodes < 2:
            raise PriorError("gaussian prior needs at least 2 nodes")
        x, w = hermgauss(n_nodes)
        w = w / np.sqrt(np.pi)
        keep = w > 0  # extreme Hermite weights underflow for large node counts
        return cls(
            "gaussian",
            m + np.sqrt(2.0) * v * x[keep],
            w[keep],
            {"m": float(m), "v": float(v), "n_nodes": int(n_nodes)},
        )

    @classmethod
    def continuous(
        cls,
        density: Callable[[np.ndarray], np.ndarray],
        lower: float,
        upper: float,
        n_nodes: int = DEFAULT_CONTINUOUS_NODES,
        params: dict | None = None,
    ) -> "Prior":
        """Bounded continuous prior discretized by Gauss-Legendre on ``[lower, upper]``.

        ``density`` must integrate to one on the interval and be strictly
        positive at the interior quadrature nodes.
        """
        if not (np.isfinite(lower) and np.isfinite(upper) and lower < upper):
            raise PriorError("continuous prior needs a finite interval lower < upper")
        x, w = leggauss(n_nodes)
        half = 0.5 * (upper - lower)
        nodes = lower + half * (x + 1.0)
        dens = np.asarray(density(nodes), dtype=float)
        p = dict(params or {})
        p.update(lower=float(lower), upper=float(upper), n_nodes=int(n_nodes))
        return cls("continuous", nodes, half * w * dens, p)

    @classmethod
    def uniform(cls, lower: float, upper: float, n_nodes: int = DEFAULT_CONTINUOUS_NODES) -> "Prior":
        return cls.continuous(
            lambda th: np.full_like(th, 1.0 / (upper - lower)),
            lower,
            upper,
            n_nodes,
            params={"family": "uniform"},
        )

    @classmethod
    def beta(
        cls, a: float, b: float, lower: float, upper: float, n_nodes: int = DEFAULT_CONTINUOUS_NODES
    ) -> "Prior":
        """Beta(a, b) law rescaled to ``[lower, upper]``."""
        from scipy.stats import beta as beta_dist

        dist = beta_dist(a, b, loc=lower, scale=upper - lower)
        return cls.continuous(
            dist.pdf, lower, upper, n_nodes, params={"family": "beta", "a": float(a), "b": float(b)}
        )

    # -- derived quantities -----------------------------------------------

    @cached_property
    def log_weights(self) -> np.ndarray:
        return np.log(self.weights)

    @property
    def mean(self) -> float:
        return integrate(self, lambda th: th)

    @property
    def variance(self) -> float:
        mu = self.mean
        return integrate(self, lambda th: (th - mu) ** 2)

    def sample(self, rng: np.random.Generator, size=None):
        """Draw from the prior; Gaussian draws are exact, others sample the atoms."""
        if self.kind == "gaussian":
            return self.params["m"] + self.params["v"] * rng.standard_normal(size)
        if self.nodes.size == 1:
            return np.full(size, self.nodes[0]) if size is not None else float(self.nodes[0])
        idx = rng.choice(self.nodes.size, size=size, p=self.weights)
        return self.nodes[idx]

    def __repr__(self):
        return f"Prior(kind={self.kind!r}, params={self.params!r}, n_nodes={self.nodes.size})"


def integrate(prior: Prior, g: Callable[[np.ndarray], np.ndarray]) -> float:
    """Return the integral of ``g`` against the prior.

    ``g`` is called once with the full array of nodes and must be vectorized.
    """
    vals = np.broadcast_to(np.asarray(g(prior.nodes), dtype=float), prior.nodes.shape)
    if not np.all(np.isfinite(vals)):
        raise IntegrandError("integrand not finite")
    return float(np.dot(prior.weights, vals))


def sign_class(prior: Prior) -> SignClass:
    if prior.kind == "gaussian":
        return SignClass.MIXED
    if np.all(prior.nodes > 0):
        return SignClass.STRICTLY_POSITIVE
    if np.all(prior.nodes < 0):
        return SignClass.STRICTLY_NEGATIVE
    return SignClass.MIXED


def support_bounds(prior: Prior) -> tuple[float, float] | None:
    """Tight support bounds, or ``None`` when the support is unbounded."""
    if prior.kind == "gaussian":
        return None
    if prior.kind == "continuous":
        return prior.params["lower"], prior.params["upper"]
    return float(prior.nodes.min()), float(prior.nodes.max())
