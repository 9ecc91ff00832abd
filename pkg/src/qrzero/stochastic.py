"""Seedable random variate generation for the sampler.

Every function takes a ``numpy.random.Generator`` and an optional ``size``.
Streams come from :func:`make_rng`, which derives independent child seeds via
``SeedSequence`` spawn keys so that chains and replications never share state.
"""
from dataclasses import dataclass

import numpy as np
from scipy import special

# below this standardized bound the inverse-CDF route loses relative accuracy
_TAIL_SWITCH = -5.0


def make_rng(seed, stream_id=0):
    """Generator for stream ``stream_id`` of ``seed``.

    Identical ``(seed, stream_id)`` pairs replay identical sequences; distinct
    ``stream_id`` values map to distinct spawn keys of the same entropy and
    hence to independent PCG64 streams.
    """
    if isinstance(stream_id, (tuple, list)):
        key = tuple(int(s) for s in stream_id)
    else:
        key = (int(stream_id),)
    ss = np.random.SeedSequence(int(seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class GigHalfParams:
    """GIG with index 1/2: density proportional to
    v**(-1/2) * exp(-(delta**2 / v + xi**2 * v) / 2) on v > 0."""

    delta: float
    xi: float

    def __post_init__(self):
        if not self.xi > 0:
            raise ValueError(f"xi must be positive, got {self.xi!r}")
        if not self.delta >= 0:
            raise ValueError(f"delta must be non-negative, got {self.delta!r}")


def draw_std_normal(rng, size=None):
    return rng.standard_normal(size)


def draw_mvn(mean, cov, rng):
    """Multivariate normal draw through the Cholesky factor of ``cov``.

    Raises ``numpy.linalg.LinAlgError`` when ``cov`` is not positive definite.
    """
    mean = np.asarray(mean, dtype=float)
    chol = np.linalg.cholesky(np.asarray(cov, dtype=float))
    return mean + chol @ rng.standard_normal(mean.shape[0])


def draw_exponential_mean(mean, rng, size=None):
    return rng.exponential(mean, size)


def draw_inverse_gamma(shape, scale, rng, size=None):
    """Inverse gamma with density proportional to x**(-shape-1) exp(-scale/x)."""
    return scale / rng.gamma(shape, 1.0, size)


def draw_bernoulli(prob, rng, size=None):
    if size is None:
        size = np.shape(prob)
    return (rng.random(size) < prob).astype(np.int8)


def draw_inverse_gaussian(mean, shape, rng, size=None):
    """Inverse Gaussian via the Michael-Schucany-Haas transformation.

    The smaller root is computed as ``m**2 / (m + a + sqrt(a**2 + 2am))``, which
    avoids the cancellation of the textbook form when ``mean >> shape``.
    """
    mean = np.asarray(mean, dtype=float)
    shape = np.asarray(shape, dtype=float)
    if size is None:
        size = np.broadcast(mean, shape).shape
    chi2 = rng.standard_normal(size) ** 2
    u = rng.random(size)
    a = mean * mean * chi2 / (2.0 * shape)
    x = mean * mean / (mean + a + np.sqrt(a * a + 2.0 * a * mean))
    keep = u * (mean + x) <= mean
    return np.where(keep, x, mean * mean / x)


def draw_gig_half(delta, xi, rng, size=None):
    """Draw from GIG(1/2, delta, xi), vectorised over the parameters.

    For delta > 0, 1/V is inverse Gaussian with mean xi/delta and shape xi**2.
    delta == 0 is the gamma(1/2, rate xi**2/2) limit.
    """
    if isinstance(delta, GigHalfParams):
        delta, xi = delta.delta, delta.xi
    delta = np.asarray(delta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if size is None:
        size = np.broadcast(delta, xi).shape
    delta = np.broadcast_to(delta, size)
    xi = np.broadcast_to(xi, size)
    out = np.empty(size)
    degenerate = delta <= 0.0
    if np.any(degenerate):
        out[degenerate] = rng.gamma(0.5, 1.0, np.count_nonzero(degenerate)) * 2.0 / (
            xi[degenerate] ** 2)
    regular = ~degenerate
    if np.any(regular):
        d, x = delta[regular], xi[regular]
        out[regular] = 1.0 / draw_inverse_gaussian(x / d, x * x, rng)
    return out if out.ndim else float(out)


def _normal_tail(lower, rng):
    """Standard normal conditioned on exceeding ``lower`` (all > 0), by
    exponential-proposal rejection with the optimal rate."""
    lower = np.asarray(lower, dtype=float)
    rate = 0.5 * (lower + np.sqrt(lower * lower + 4.0))
    out = np.empty(lower.shape)
    todo = np.arange(lower.size)
    while todo.size:
        b, r = lower.flat[todo], rate.flat[todo]
        x = b + rng.exponential(1.0, todo.size) / r
        ok = rng.random(todo.size) <= np.exp(-0.5 * (x - r) ** 2)
        out.flat[todo[ok]] = x[ok]
        todo = todo[~ok]
    return out


def draw_truncnorm_upper(mean, var, upper, rng, size=None):
    """Normal(mean, var) conditioned on the value being <= ``upper``.

    Inverse-CDF for moderate bounds; exponential rejection in the far tail, so
    the cost stays bounded however far ``mean`` sits above ``upper``.
    """
    mean = np.asarray(mean, dtype=float)
    sd = np.sqrt(np.asarray(var, dtype=float))
    upper = np.asarray(upper, dtype=float)
    if size is None:
        size = np.broadcast(mean, sd, upper).shape
    mean, sd, upper = (np.broadcast_to(a, size) for a in (mean, sd, upper))
    bound = (upper - mean) / sd
    z = np.empty(size)
    near = bound >= _TAIL_SWITCH
    if np.any(near):
        u = 1.0 - rng.random(np.count_nonzero(near))
        z[near] = special.ndtri(u * special.ndtr(bound[near]))
    far = ~near
    if np.any(far):
        z[far] = -_normal_tail(-bound[far], rng)
    out = np.minimum(mean + sd * z, upper)
    return out if out.ndim else float(out)
