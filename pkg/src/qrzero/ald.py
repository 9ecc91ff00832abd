"""Asymmetric Laplace distribution: check loss, density, CDF and the
normal-exponential mixture constants.

All functions accept scalars or numpy arrays and broadcast.
"""
from dataclasses import dataclass

import numpy as np


def validate_tau(tau):
    """Return ``tau`` as a float, rejecting values outside the open unit interval."""
    tau = float(tau)
    if not 0.0 < tau < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {tau!r}")
    return tau


@dataclass(frozen=True)
class ALDParams:
    mu: float
    sigma: float
    tau: float

    def __post_init__(self):
        validate_tau(self.tau)
        if not self.sigma > 0:
            raise ValueError(f"scale must be positive, got {self.sigma!r}")


@dataclass(frozen=True)
class MixtureConstants:
    theta: float
    psi2: float


def check_loss(u, tau):
    u = np.asarray(u, dtype=float)
    out = u * (tau - (u < 0))
    return out if out.ndim else float(out)


def ald_logpdf(y, p):
    y = np.asarray(y, dtype=float)
    out = (np.log(p.tau * (1.0 - p.tau) / p.sigma)
           - check_loss((y - p.mu) / p.sigma, p.tau))
    return out if np.ndim(out) else float(out)


def ald_cdf_at_zero(mu, sigma, tau):
    """P(Y <= 0) for Y ~ ALD(mu, sigma, tau).

    Both branches evaluate to ``tau`` at ``mu == 0``.
    """
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    # clamp the exponents so the unused branch never overflows
    upper = tau * np.exp(-(1.0 - tau) * np.maximum(mu, 0.0) / sigma)
    lower = 1.0 - (1.0 - tau) * np.exp(tau * np.minimum(mu, 0.0) / sigma)
    out = np.where(mu >= 0, upper, lower)
    return out if out.ndim else float(out)


def ald_cdf(y, p):
    """CDF obtained by shifting the location: F(y; mu) = F(0; mu - y)."""
    return ald_cdf_at_zero(p.mu - np.asarray(y, dtype=float), p.sigma, p.tau)


def ald_ppf(q, mu, sigma, tau):
    """Quantile function of the ALD, vectorised over ``q`` and ``mu``."""
    q = np.asarray(q, dtype=float)
    lo = np.minimum(q, tau)
    hi = np.maximum(q, tau)
    below = mu + sigma / (1.0 - tau) * np.log(lo / tau)
    above = mu - sigma / tau * (np.log1p(-hi) - np.log1p(-tau))
    out = np.where(q <= tau, below, above)
    return out if out.ndim else float(out)


def mixture_constants(tau):
    tau = validate_tau(tau)
    w = tau * (1.0 - tau)
    return MixtureConstants(theta=(1.0 - 2.0 * tau) / w, psi2=2.0 / w)
