"""
The asymmetric Laplace likelihood and the censoring probability
================================================================

The quantile-regression likelihood is an asymmetric Laplace distribution
(ALD). Written as a normal scale mixture it becomes conditionally Gaussian,
which is what makes a Gibbs sampler possible. This script checks that
representation numerically and tabulates the probability that an observed
zero is a censored value rather than a true zero.
"""
import numpy as np
from scipy import stats

from qrzero.ald import ALDParams, ald_cdf, ald_cdf_at_zero, mixture_constants
from qrzero.model import censor_prob
from qrzero.stochastic import make_rng

# Mixture draws: Y = mu + theta v + sqrt(psi2 sigma v) Z with v ~ Exp(mean sigma)
rng = make_rng(1)
mu, sigma = 0.5, 1.0
for tau in (0.1, 0.5, 0.9):
    mc = mixture_constants(tau)
    v = rng.exponential(sigma, 100_000)
    y = mu + mc.theta * v + np.sqrt(mc.psi2 * sigma * v) * rng.standard_normal(v.size)
    p = ALDParams(mu, sigma, tau)
    ks = stats.kstest(y, lambda t: ald_cdf(t, p)).statistic
    # the location is the tau-quantile
    print(f"tau={tau}: KS={ks:.4f}  P(Y <= mu)={np.mean(y <= mu):.3f}")

# F(0) is the chance that the latent response falls at or below zero
print("\nF(0) for mu = -1, 0, 1 at sigma = 1")
for tau in (0.25, 0.5, 0.75):
    print(f"  tau={tau}:", "  ".join(f"{ald_cdf_at_zero(m, 1.0, tau):.3f}" for m in (-1, 0, 1)))

# Given y = 0, the chance it was censored is (1-p) F(0) / (p + (1-p) F(0)).
# It never exceeds 1 - p and it grows as the fitted quantile moves below zero.
print("\nP(censored | y = 0) against p, sigma = 1, tau = 0.5")
print("   p    mu=-1   mu=+1")
for p in (0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0):
    lo = censor_prob(p, ald_cdf_at_zero(-1.0, 1.0, 0.5))
    hi = censor_prob(p, ald_cdf_at_zero(1.0, 1.0, 0.5))
    print(f"  {p:.1f}   {lo:.3f}   {hi:.3f}")
