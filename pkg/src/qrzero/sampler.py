"""Gibbs sampler with a random-walk Metropolis step for the zero-part
coefficients and data augmentation for the censoring indicators.

Three model variants share the machinery:

``twopart``
    every zero is a true zero (hurdle model).
``censored_mix``
    each zero is a true zero or a left-censored continuous draw; the
    indicator is sampled every sweep.
``tobit``
    every zero is censored; the zero-part coefficients are not used.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize

from .ald import ald_cdf_at_zero, ald_ppf, mixture_constants
from .model import (
    ConfigurationError,
    ParamState,
    _collapsed_kernel,
    _gamma_kernel,
    apply_transform,
    censor_prob,
    check_fit_requirements,
    link_inverse,
)
from .stochastic import (
    draw_bernoulli,
    draw_gig_half,
    draw_inverse_gamma,
    draw_truncnorm_upper,
    make_rng,
)

SWEEP_ORDER = ("c", "ystar", "v", "beta", "sigma", "gamma")

# acceptance window for the gamma random walk; burn-in adaptation steers to
# its interior target so that batch noise does not leave the retained rate
# near an edge
MH_WINDOW = (0.15, 0.50)
MH_TARGET = 0.30


class SamplerError(RuntimeError):
    """A kernel produced a non-finite value."""

    def __init__(self, iteration, block, detail=""):
        self.iteration = iteration
        self.block = block
        msg = f"non-finite state at iteration {iteration} in block {block!r}"
        super().__init__(msg + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class FullCondBeta:
    b1: np.ndarray
    B1: np.ndarray


@dataclass(frozen=True)
class FullCondSigma:
    shape: float
    scale: float


@dataclass
class Chain:
    beta_draws: np.ndarray
    gamma_draws: np.ndarray
    sigma_draws: np.ndarray
    c_draws: np.ndarray
    zero_idx: np.ndarray
    iterations: np.ndarray
    mh_accepts: int
    mh_proposals: int
    mh_rate: float
    mh_step: float
    config: dict = field(default_factory=dict)
    mh_scale_matrix: np.ndarray = None

    @property
    def n_draws(self):
        return self.sigma_draws.shape[0]

    def thinned(self, every):
        """Keep every ``every``-th retained draw."""
        sl = slice(None, None, every)
        return Chain(self.beta_draws[sl], self.gamma_draws[sl], self.sigma_draws[sl],
                     self.c_draws[sl], self.zero_idx, self.iterations[sl],
                     self.mh_accepts, self.mh_proposals, self.mh_rate, self.mh_step,
                     dict(self.config), self.mh_scale_matrix)


def tune_mh_step(step, rate, gain=1.0):
    """Multiplicative burn-in adaptation of the random-walk variance.

    The step is scaled by ``exp(3 gain (rate - 0.3))``, clipped to [0.5, 2]:
    a batch at the target rate leaves it unchanged, low rates shrink it and
    high rates grow it. A gain below one damps the batch-to-batch noise.
    """
    return step * float(np.clip(np.exp(3.0 * gain * (rate - MH_TARGET)), 0.5, 2.0))


class GibbsSampler:
    """Full-conditional updates for one dataset and configuration.

    Each ``update_*`` method mutates ``state`` in place and returns it.
    """

    def __init__(self, data, cfg, priors):
        if priors.b0.shape[0] != data.k or priors.g0.shape[0] != data.m:
            raise ConfigurationError("prior dimensions do not match the design matrices")
        check_fit_requirements(data, cfg.variant)
        self.data = data
        self.cfg = cfg
        self.priors = priors
        mc = mixture_constants(cfg.tau)
        self.theta, self.psi2 = mc.theta, mc.psi2
        self.X, self.Z = data.X, data.Z
        self.set_response(data.y)
        omega = (np.eye(data.m) if cfg.mh_scale_matrix is None else cfg.mh_scale_matrix)
        self.set_scale_matrix(omega)
        self.prior_beta_term = priors.B0_inv @ priors.b0
        self.mh_step = cfg.mh_step
        self.accepts = 0
        self.proposals = 0

    def set_response(self, y):
        self.y = np.asarray(y, dtype=float)
        self.w = apply_transform(self.y, self.data.transform)
        self.zero = self.y == 0
        self.pos = ~self.zero
        self.zero_idx = np.flatnonzero(self.zero)

    # -- state helpers ------------------------------------------------------

    def continuous_mask(self, state):
        """Observations feeding the continuous part: positives and censored zeros."""
        return self.pos | (self.zero & (state.c == 1))

    def working_response(self, state):
        return np.where(self.pos, self.w, state.ystar)

    def set_scale_matrix(self, omega):
        self.omega = np.asarray(omega, dtype=float)
        self.omega_chol = np.linalg.cholesky(self.omega)

    def twopart_gamma_mode(self):
        """Posterior mode of the zero-part coefficients when every zero is
        taken as a true zero. Deterministic; used as a starting value."""
        def neg(g):
            val, grad = _gamma_kernel(g, self.Z, self.zero, ~self.zero, self.priors.g0,
                                      self.priors.G0_inv, self.cfg.link, grad=True)
            return -val, -grad

        res = optimize.minimize(neg, self.priors.g0.copy(), jac=True, method="BFGS")
        return res.x if np.all(np.isfinite(res.x)) else np.zeros(self.data.m)

    def initial_state(self, rng):
        """Neutral start: beta = 0, sigma = 1, v = 1, censored-mixture
        indicators at random. gamma starts at the two-part mode unless
        ``gamma_init="zero"``; from zero the chain can spend its burn-in in
        the region where every zero looks censored."""
        n = self.data.n
        gamma = np.zeros(self.data.m)
        if self.cfg.variant != "tobit" and self.cfg.gamma_init == "twopart_mode":
            gamma = self.twopart_gamma_mode()
        state = ParamState(beta=np.zeros(self.data.k), gamma=gamma,
                           sigma=1.0, v=np.ones(n), c=np.zeros(n, dtype=np.int8),
                           ystar=np.zeros(n))
        nz = self.zero_idx.size
        if self.cfg.variant == "censored_mix":
            state.c[self.zero_idx] = draw_bernoulli(0.5, rng, nz)
        elif self.cfg.variant == "tobit":
            state.c[self.zero_idx] = 1
        if nz:
            mean = self.X[self.zero_idx] @ state.beta + self.theta * state.v[self.zero_idx]
            var = self.psi2 * state.sigma * state.v[self.zero_idx]
            state.ystar[self.zero_idx] = draw_truncnorm_upper(mean, var, 0.0, rng)
        return state

    # -- full conditionals --------------------------------------------------

    def censor_probs(self, state):
        """P(censored | y = 0) and F(0) for the zero observations."""
        idx = self.zero_idx
        f0 = ald_cdf_at_zero(self.X[idx] @ state.beta, state.sigma, self.cfg.tau)
        p = link_inverse(self.cfg.link, self.Z[idx] @ state.gamma)
        return censor_prob(p, f0), f0

    def update_c(self, state, rng):
        """Redraw each zero's indicator and, when censored, its latents.

        The indicator comes from its law with (v, y*) integrated out, so the
        latents of every censored zero are then drawn jointly from their
        conditional given censoring: y* from the ALD truncated to (-inf, 0]
        by inverse CDF, then v given y*.
        """
        idx = self.zero_idx
        if idx.size == 0:
            return state
        prob, f0 = self.censor_probs(state)
        c = draw_bernoulli(prob, rng, idx.size)
        state.c[idx] = c
        on = idx[c == 1]
        if on.size:
            mu = self.X[on] @ state.beta
            u = 1.0 - rng.random(on.size)
            ys = np.minimum(ald_ppf(u * f0[c == 1], mu, state.sigma, self.cfg.tau), 0.0)
            state.ystar[on] = ys
            state.v[on] = self._draw_v(ys - mu, state.sigma, rng)
        return state

    def impute_ystar(self, state, rng):
        idx = self.zero_idx[state.c[self.zero_idx] == 1]
        if idx.size:
            v = state.v[idx]
            mean = self.X[idx] @ state.beta + self.theta * v
            state.ystar[idx] = draw_truncnorm_upper(mean, self.psi2 * state.sigma * v, 0.0, rng)
        return state

    def _draw_v(self, resid, sigma, rng):
        scale = self.psi2 * sigma
        delta = np.abs(resid) / np.sqrt(scale)
        xi = np.sqrt(self.theta ** 2 / scale + 2.0 / sigma)
        return draw_gig_half(delta, np.full(resid.shape, xi), rng)

    def update_v(self, state, rng):
        cont = self.continuous_mask(state)
        resid = self.working_response(state)[cont] - self.X[cont] @ state.beta
        state.v[cont] = self._draw_v(resid, state.sigma, rng)
        return state

    def beta_conditional(self, state):
        cont = self.continuous_mask(state)
        X = self.X[cont]
        v = state.v[cont]
        wts = 1.0 / (self.psi2 * state.sigma * v)
        prec = self.priors.B0_inv + (X.T * wts) @ X
        rhs = self.prior_beta_term + X.T @ (wts * (self.working_response(state)[cont]
                                                   - self.theta * v))
        chol = linalg.cho_factor(prec, lower=True)
        b1 = linalg.cho_solve(chol, rhs)
        return FullCondBeta(b1=b1, B1=linalg.cho_solve(chol, np.eye(prec.shape[0]))), chol

    def update_beta(self, state, rng):
        cond, (L, _) = self.beta_conditional(state)
        z = rng.standard_normal(cond.b1.shape[0])
        # prec = L L', so L'^{-1} z has covariance prec^{-1}
        state.beta = cond.b1 + linalg.solve_triangular(L, z, lower=True, trans="T")
        return state

    def sigma_conditional(self, state):
        cont = self.continuous_mask(state)
        v = state.v[cont]
        resid = self.working_response(state)[cont] - self.X[cont] @ state.beta - self.theta * v
        shape = self.priors.n0 + 1.5 * np.count_nonzero(cont)
        scale = self.priors.s0 + np.sum(v) + np.sum(resid ** 2 / (2.0 * self.psi2 * v))
        return FullCondSigma(shape=float(shape), scale=float(scale))

    def update_sigma(self, state, rng):
        cond = self.sigma_conditional(state)
        state.sigma = float(draw_inverse_gamma(cond.shape, cond.scale, rng))
        return state

    def gamma_log_post(self, gamma, state):
        in_d = self.zero & (state.c == 0)
        return _gamma_kernel(gamma, self.Z, in_d, ~in_d, self.priors.g0,
                             self.priors.G0_inv, self.cfg.link)

    def gamma_log_post_collapsed(self, gamma, state, log_f0=None):
        if log_f0 is None:
            with np.errstate(divide="ignore"):
                log_f0 = np.log(self.censor_probs(state)[1])
        return _collapsed_kernel(gamma, self.Z, self.zero, log_f0, self.priors.g0,
                                 self.priors.G0_inv, self.cfg.link)

    @property
    def collapsed_gamma(self):
        return self.cfg.variant == "censored_mix" and self.cfg.gamma_update == "collapsed"

    def update_gamma(self, state, rng, step=None):
        """One random-walk Metropolis step; returns ``(state, accepted)``.

        In the censored mixture with ``gamma_update="collapsed"`` the target
        has the indicators summed out, which must be followed directly by
        :meth:`update_c`; otherwise the target conditions on the current
        indicators.
        """
        step = self.mh_step if step is None else step
        z = rng.standard_normal(self.data.m)
        prop = state.gamma + np.sqrt(step) * (self.omega_chol @ z)
        if self.collapsed_gamma:
            with np.errstate(divide="ignore"):
                log_f0 = np.log(self.censor_probs(state)[1])
            log_ratio = (self.gamma_log_post_collapsed(prop, state, log_f0)
                         - self.gamma_log_post_collapsed(state.gamma, state, log_f0))
        else:
            log_ratio = (self.gamma_log_post(prop, state)
                         - self.gamma_log_post(state.gamma, state))
        accepted = bool(np.log(1.0 - rng.random()) < log_ratio)
        if accepted:
            state.gamma = prop
        self.proposals += 1
        self.accepts += accepted
        return state, accepted

    # -- sweep --------------------------------------------------------------

    def sweep(self, state, rng, iteration=0):
        """One full cycle in the fixed order c, y*, v, beta, sigma, gamma.

        With the collapsed gamma step the cycle is rotated to start at gamma,
        so the step that sums out the indicators is immediately followed by
        their redraw and the state returned is a coherent joint draw.
        """
        variant = self.cfg.variant
        accepted = False
        if self.collapsed_gamma:
            state, accepted = self.update_gamma(state, rng)
            self._check(state, iteration, "gamma")
        if variant == "censored_mix":
            self.update_c(state, rng)
            self._check(state, iteration, "c")
        if variant != "twopart":
            self.impute_ystar(state, rng)
            self._check(state, iteration, "ystar")
        self.update_v(state, rng)
        self._check(state, iteration, "v")
        self.update_beta(state, rng)
        self._check(state, iteration, "beta")
        self.update_sigma(state, rng)
        self._check(state, iteration, "sigma")
        if variant != "tobit" and not self.collapsed_gamma:
            state, accepted = self.update_gamma(state, rng)
            self._check(state, iteration, "gamma")
        return state, accepted

    @staticmethod
    def _check(state, iteration, block):
        if block == "c" or block == "ystar":
            if not np.all(np.isfinite(state.ystar)):
                raise SamplerError(iteration, block, "imputed latent")
        elif block == "v":
            if not (np.all(np.isfinite(state.v)) and np.all(state.v > 0)):
                raise SamplerError(iteration, block, "mixture scale")
        elif block == "beta":
            if not np.all(np.isfinite(state.beta)):
                raise SamplerError(iteration, block)
        elif block == "sigma":
            if not (np.isfinite(state.sigma) and state.sigma > 0):
                raise SamplerError(iteration, block)
        elif not np.all(np.isfinite(state.gamma)):
            raise SamplerError(iteration, block)


def learned_scale_matrix(draws):
    """Proposal shape from burn-in draws of gamma: their sample covariance,
    lightly regularised. ``None`` when the draws barely moved."""
    draws = np.asarray(draws, dtype=float)
    m = draws.shape[1]
    if draws.shape[0] <= 2 * m:
        return None
    cov = np.atleast_2d(np.cov(draws, rowvar=False))
    cov = cov + 1e-6 * max(np.trace(cov) / m, 1e-12) * np.eye(m)
    eig = np.linalg.eigvalsh(cov)
    if not np.all(np.isfinite(eig)) or eig[0] <= 1e-10:
        return None
    return cov


def _cov_update_points(cfg):
    # learn the proposal shape at the half and three-quarter marks of burn-in,
    # from draws after the first quarter
    if not (cfg.adapt and cfg.adapt_cov and cfg.mh_scale_matrix is None) or cfg.burnin < 100:
        return ()
    return (cfg.burnin // 2, 3 * cfg.burnin // 4)


def run_chain(data, cfg, priors, rng=None, init=None):
    """Run ``cfg.iters`` sweeps, drop the burn-in, thin, and collect a Chain.

    During burn-in only, the random-walk variance adapts in batches of
    ``cfg.adapt_every``. Unless a scale matrix was given, the proposal shape
    is also learned twice from the covariance of earlier burn-in draws: the
    first time the step restarts at 2.38^2 / m, the second time it is
    rescaled to keep the proposal volume. After the first shape update the
    step adapts with gain 1/sqrt(j) on the j-th batch, so the frozen value
    is not at the mercy of the last batch. The retained phase runs a fixed
    kernel.
    """
    if rng is None:
        rng = make_rng(cfg.seed, cfg.stream_id)
    sampler = GibbsSampler(data, cfg, priors)
    state = sampler.initial_state(rng) if init is None else init.copy()

    keep = np.arange(cfg.burnin, cfg.iters, cfg.thin)
    n_keep = keep.size
    beta_draws = np.empty((n_keep, data.k))
    gamma_draws = np.empty((n_keep, data.m))
    sigma_draws = np.empty(n_keep)
    c_draws = np.empty((n_keep, sampler.zero_idx.size), dtype=np.int8)

    uses_gamma = cfg.variant != "tobit"
    cov_points = _cov_update_points(cfg) if uses_gamma else ()
    burn_gamma = np.empty((cfg.burnin, data.m))
    batch_accepts = 0
    n_batches = 0
    damped = False
    kept_accepts = 0
    row = 0
    for it in range(cfg.iters):
        state, accepted = sampler.sweep(state, rng, it)
        if it < cfg.burnin:
            burn_gamma[it] = state.gamma
            batch_accepts += accepted
            if cfg.adapt and uses_gamma and (it + 1) % cfg.adapt_every == 0:
                n_batches += 1
                gain = 1.0 / np.sqrt(n_batches) if damped else 1.0
                sampler.mh_step = tune_mh_step(sampler.mh_step,
                                               batch_accepts / cfg.adapt_every, gain)
                batch_accepts = 0
            if it + 1 in cov_points:
                omega = learned_scale_matrix(burn_gamma[cfg.burnin // 4:it + 1])
                if omega is not None:
                    if damped:
                        ratio = np.linalg.det(sampler.omega) / np.linalg.det(omega)
                        sampler.mh_step *= ratio ** (1.0 / data.m)
                    else:
                        sampler.mh_step = 2.38 ** 2 / data.m
                        damped = True
                        n_batches = 0
                    sampler.set_scale_matrix(omega)
        else:
            kept_accepts += accepted
            if (it - cfg.burnin) % cfg.thin == 0:
                beta_draws[row] = state.beta
                gamma_draws[row] = state.gamma
                sigma_draws[row] = state.sigma
                c_draws[row] = state.c[sampler.zero_idx]
                row += 1

    n_post = cfg.iters - cfg.burnin
    rate = kept_accepts / n_post if uses_gamma else float("nan")
    return Chain(beta_draws=beta_draws, gamma_draws=gamma_draws, sigma_draws=sigma_draws,
                 c_draws=c_draws, zero_idx=sampler.zero_idx.copy(), iterations=keep,
                 mh_accepts=sampler.accepts, mh_proposals=sampler.proposals,
                 mh_rate=rate, mh_step=sampler.mh_step, config=cfg.to_dict(),
                 mh_scale_matrix=sampler.omega.copy())
