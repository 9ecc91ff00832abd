"""Data containers, link functions, likelihood kernels and the censoring
probability for the zero-inflated quantile regression model."""
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .ald import ald_cdf_at_zero, mixture_constants, validate_tau

VARIANTS = ("twopart", "censored_mix", "tobit")
LINKS = ("logit", "probit")
TRANSFORMS = ("identity", "sqrt")
GAMMA_UPDATES = ("collapsed", "conditional")
GAMMA_INITS = ("twopart_mode", "zero")


class ConfigurationError(ValueError):
    """Invalid data or model configuration."""


# --------------------------------------------------------------------------
# transforms
# --------------------------------------------------------------------------

def apply_transform(y, transform="identity"):
    y = np.asarray(y, dtype=float)
    if transform == "identity":
        return y.copy()
    if transform == "sqrt":
        return np.sqrt(y)
    raise ConfigurationError(f"unknown transform {transform!r}")


def invert_transform(q, transform="identity"):
    """Map quantiles fitted on the working scale back to the response scale.

    Valid because quantiles are equivariant under monotone maps; the sqrt
    working scale is non-negative so squaring is the inverse.
    """
    q = np.asarray(q, dtype=float)
    if transform == "identity":
        return q.copy()
    if transform == "sqrt":
        return np.square(np.maximum(q, 0.0))
    raise ConfigurationError(f"unknown transform {transform!r}")


# --------------------------------------------------------------------------
# containers
# --------------------------------------------------------------------------

@dataclass
class Dataset:
    """Response on its original scale plus both design matrices.

    Intercept columns are never added here; callers supply them.
    """

    y: np.ndarray
    X: np.ndarray
    Z: np.ndarray
    transform: str = "identity"
    x_names: list = None
    z_names: list = None

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float).ravel()
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.Z = np.atleast_2d(np.asarray(self.Z, dtype=float))
        n = self.y.shape[0]
        if self.X.shape[0] != n or self.Z.shape[0] != n:
            raise ConfigurationError(
                f"design rows ({self.X.shape[0]}, {self.Z.shape[0]}) do not match "
                f"response length {n}")
        for name, a in (("y", self.y), ("X", self.X), ("Z", self.Z)):
            if not np.all(np.isfinite(a)):
                raise ConfigurationError(f"{name} contains missing or non-finite values")
        if np.any(self.y < 0):
            raise ConfigurationError(
                f"negative response at row {int(np.argmax(self.y < 0))}")
        if self.transform not in TRANSFORMS:
            raise ConfigurationError(f"unknown transform {self.transform!r}")
        if self.x_names is None:
            self.x_names = [f"x{j}" for j in range(self.X.shape[1])]
        if self.z_names is None:
            self.z_names = [f"z{j}" for j in range(self.Z.shape[1])]

    @property
    def n(self):
        return self.y.shape[0]

    @property
    def k(self):
        return self.X.shape[1]

    @property
    def m(self):
        return self.Z.shape[1]

    @property
    def w(self):
        """Working response, after the transform."""
        return apply_transform(self.y, self.transform)

    @property
    def is_zero(self):
        return self.y == 0

    def permuted(self, order):
        order = np.asarray(order)
        return Dataset(self.y[order], self.X[order], self.Z[order], self.transform,
                       list(self.x_names), list(self.z_names))


@dataclass
class Priors:
    b0: np.ndarray
    B0: np.ndarray
    g0: np.ndarray
    G0: np.ndarray
    n0: float
    s0: float

    def __post_init__(self):
        self.b0 = np.asarray(self.b0, dtype=float).ravel()
        self.g0 = np.asarray(self.g0, dtype=float).ravel()
        self.B0 = np.atleast_2d(np.asarray(self.B0, dtype=float))
        self.G0 = np.atleast_2d(np.asarray(self.G0, dtype=float))
        for name, M in (("B0", self.B0), ("G0", self.G0)):
            if not np.allclose(M, M.T):
                raise ConfigurationError(f"{name} is not symmetric")
            try:
                np.linalg.cholesky(M)
            except np.linalg.LinAlgError:
                raise ConfigurationError(f"{name} is not positive definite") from None
        if not (self.n0 > 0 and self.s0 > 0):
            raise ConfigurationError("n0 and s0 must be positive")
        self.B0_inv = np.linalg.inv(self.B0)
        self.G0_inv = np.linalg.inv(self.G0)

    @classmethod
    def default(cls, k, m, scale=100.0, n0=1.5, s0=0.05):
        """Vague defaults: zero means, ``scale * I`` covariances, IG(3/2, 0.1/2)."""
        return cls(np.zeros(k), scale * np.eye(k), np.zeros(m), scale * np.eye(m), n0, s0)

    def to_dict(self):
        return {"b0": self.b0.tolist(), "B0": self.B0.tolist(), "g0": self.g0.tolist(),
                "G0": self.G0.tolist(), "n0": float(self.n0), "s0": float(self.s0)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["b0"], d["B0"], d["g0"], d["G0"], d["n0"], d["s0"])


@dataclass
class ModelConfig:
    tau: float = 0.5
    variant: str = "censored_mix"
    link: str = "logit"
    mh_step: float = 0.1
    mh_scale_matrix: np.ndarray = None
    iters: int = 2000
    burnin: int = 500
    thin: int = 1
    seed: int = 0
    stream_id: int = 0
    adapt: bool = True
    adapt_every: int = 25
    adapt_cov: bool = True
    gamma_update: str = "collapsed"
    gamma_init: str = "twopart_mode"

    def __post_init__(self):
        self.tau = validate_tau(self.tau)
        if self.gamma_init not in GAMMA_INITS:
            raise ConfigurationError(
                f"gamma_init must be one of {GAMMA_INITS}, got {self.gamma_init!r}")
        if self.gamma_update not in GAMMA_UPDATES:
            raise ConfigurationError(
                f"gamma_update must be one of {GAMMA_UPDATES}, got {self.gamma_update!r}")
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.link not in LINKS:
            raise ConfigurationError(f"link must be one of {LINKS}, got {self.link!r}")
        if not self.mh_step > 0:
            raise ConfigurationError("mh_step must be positive")
        if not 0 <= self.burnin < self.iters:
            raise ConfigurationError("need 0 <= burnin < iters")
        if self.thin < 1:
            raise ConfigurationError("thin must be a positive integer")
        if self.mh_scale_matrix is not None:
            self.mh_scale_matrix = np.atleast_2d(np.asarray(self.mh_scale_matrix, float))

    @property
    def n_retained(self):
        return len(range(self.burnin, self.iters, self.thin))

    def to_dict(self):
        d = {k: getattr(self, k) for k in (
            "tau", "variant", "link", "mh_step", "iters", "burnin", "thin", "seed",
            "stream_id", "adapt", "adapt_every", "adapt_cov", "gamma_update", "gamma_init")}
        d["mh_scale_matrix"] = (None if self.mh_scale_matrix is None
                                else self.mh_scale_matrix.tolist())
        return d


@dataclass
class ParamState:
    beta: np.ndarray
    gamma: np.ndarray
    sigma: float
    v: np.ndarray
    c: np.ndarray
    ystar: np.ndarray

    def copy(self):
        return ParamState(self.beta.copy(), self.gamma.copy(), float(self.sigma),
                          self.v.copy(), self.c.copy(), self.ystar.copy())


@dataclass
class IndexPartition:
    """C: censored zeros, D: true zeros, K: positive responses."""

    C: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))
    D: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))
    K: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))


def partition(y, c):
    y = np.asarray(y, dtype=float)
    c = np.asarray(c)
    zero = y == 0
    cens = zero & (c == 1)
    return IndexPartition(C=np.flatnonzero(cens), D=np.flatnonzero(zero & ~cens),
                          K=np.flatnonzero(~zero))


# --------------------------------------------------------------------------
# links
# --------------------------------------------------------------------------

def link_inverse(link, t):
    """Probability of a true zero for linear predictor ``t``."""
    t = np.asarray(t, dtype=float)
    if link == "logit":
        out = special.expit(t)
    elif link == "probit":
        out = special.ndtr(t)
    else:
        raise ConfigurationError(f"unknown link {link!r}")
    return out if out.ndim else float(out)


def _log_link_terms(link, t):
    """log p, log(1-p) and their derivatives in ``t``."""
    if link == "logit":
        log_p = -np.logaddexp(0.0, -t)
        log_q = -np.logaddexp(0.0, t)
        p = special.expit(t)
        return log_p, log_q, 1.0 - p, -p
    log_p = special.log_ndtr(t)
    log_q = special.log_ndtr(-t)
    log_phi = stats.norm.logpdf(t)
    return log_p, log_q, np.exp(log_phi - log_p), -np.exp(log_phi - log_q)


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------

def censor_prob(p, f0):
    """P(censored | y = 0) given the point-mass probability ``p`` and F(0).

    Bounded by ``1 - p``; returns 0 when there is no mass at zero at all.
    """
    p = np.asarray(p, dtype=float)
    f0 = np.asarray(f0, dtype=float)
    num = (1.0 - p) * f0
    den = p + num
    out = np.divide(num, den, out=np.zeros(np.broadcast(num, den).shape), where=den > 0)
    return out if out.ndim else float(out)


def log_post_gamma(gamma, part, data, priors, link, grad=False):
    """Unnormalised log full conditional of the zero-part coefficients.

    True zeros (D) contribute log p_i; everything feeding the continuous part
    (C and K) contributes log(1 - p_i).
    """
    gamma = np.asarray(gamma, dtype=float)
    Z = data.Z if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    n = Z.shape[0]
    in_d = np.zeros(n, dtype=bool)
    in_d[part.D] = True
    rest = np.zeros(n, dtype=bool)
    rest[part.C] = True
    rest[part.K] = True
    return _gamma_kernel(gamma, Z, in_d, rest, priors.g0, priors.G0_inv, link, grad)


def _gamma_kernel(gamma, Z, in_d, rest, g0, G0_inv, link, grad=False):
    diff = gamma - g0
    prec_diff = G0_inv @ diff
    val = -0.5 * diff @ prec_diff
    use = in_d | rest
    if np.any(use):
        t = Z[use] @ gamma
        log_p, log_q, dlog_p, dlog_q = _log_link_terms(link, t)
        d = in_d[use]
        val += np.sum(np.where(d, log_p, log_q))
        if grad:
            g = Z[use].T @ np.where(d, dlog_p, dlog_q) - prec_diff
            return float(val), g
    if grad:
        return float(val), -prec_diff
    return float(val)


def log_post_gamma_collapsed(gamma, data, f0, priors, link):
    """Log kernel of the zero-part coefficients with the censoring indicators
    summed out: each zero contributes log(p_i + (1 - p_i) F_i(0)), each
    positive response log(1 - p_i).

    ``f0`` holds F(0) for the zero observations, in row order.
    """
    gamma = np.asarray(gamma, dtype=float)
    Z = data.Z if isinstance(data, Dataset) else np.asarray(data[0], dtype=float)
    zero = data.is_zero if isinstance(data, Dataset) else np.asarray(data[1], dtype=bool)
    with np.errstate(divide="ignore"):
        log_f0 = np.log(np.asarray(f0, dtype=float))
    return _collapsed_kernel(gamma, Z, zero, log_f0, priors.g0, priors.G0_inv, link)


def _collapsed_kernel(gamma, Z, zero, log_f0, g0, G0_inv, link):
    diff = gamma - g0
    val = -0.5 * diff @ (G0_inv @ diff)
    log_p, log_q, _, _ = _log_link_terms(link, Z @ gamma)
    val += np.sum(np.logaddexp(log_p[zero], log_q[zero] + log_f0))
    val += np.sum(log_q[~zero])
    return float(val)


def _normal_logpdf(x, mean, var):
    return -0.5 * (np.log(2.0 * np.pi * var) + (x - mean) ** 2 / var)


def loglik_twopart(state, data, cfg):
    """Log augmented likelihood with every zero treated as a true zero."""
    mc = mixture_constants(cfg.tau)
    w = data.w
    zero = data.is_zero
    pos = ~zero
    t = data.Z @ state.gamma
    log_p, log_q, _, _ = _log_link_terms(cfg.link, t)
    total = np.sum(log_p[zero]) + np.sum(log_q[pos])
    v = state.v[pos]
    mean = data.X[pos] @ state.beta + mc.theta * v
    var = mc.psi2 * state.sigma * v
    total += np.sum(_normal_logpdf(w[pos], mean, var))
    total += np.sum(-np.log(state.sigma) - v / state.sigma)
    return float(total)


def zero_censor_probs(beta, gamma, sigma, data, cfg):
    """Per-observation P(censored | y = 0) at fixed parameters, for the zeros."""
    zero = data.is_zero
    mu = data.X[zero] @ beta
    f0 = ald_cdf_at_zero(mu, sigma, cfg.tau)
    p = link_inverse(cfg.link, data.Z[zero] @ gamma)
    return censor_prob(p, f0)


def check_fit_requirements(data, variant):
    """Reject data the chosen variant cannot be fitted to."""
    n_zero = int(np.count_nonzero(data.is_zero))
    if variant in ("twopart", "censored_mix") and n_zero == 0:
        raise ConfigurationError(f"variant {variant!r} needs at least one zero response")
    # censored zeros may join the continuous part, true zeros never do
    n_cont = data.n - n_zero if variant == "twopart" else data.n
    if n_cont < data.k:
        raise ConfigurationError(
            f"only {n_cont} observations can inform the {data.k} quantile coefficients")
