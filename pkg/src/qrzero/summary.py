"""Posterior summaries, per-observation censoring probabilities and ESS."""
import warnings
from dataclasses import dataclass

import numpy as np

QUANTILE_METHOD = "linear"


@dataclass(frozen=True)
class ParamSummary:
    name: str
    mean: float
    lower: float
    upper: float
    ess: float


@dataclass(frozen=True)
class CensorProfile:
    obs_id: int
    tau: float
    prob: float


def posterior_mean(draws):
    return float(np.mean(np.asarray(draws, dtype=float)))


def credible_interval(draws, level):
    """Equal-tailed interval from empirical quantiles (linear interpolation)."""
    if not 0 < level <= 1:
        raise ValueError(f"level must lie in (0, 1], got {level!r}")
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(np.asarray(draws, dtype=float), [alpha, 1.0 - alpha],
                         method=QUANTILE_METHOD)
    return float(lo), float(hi)


def autocorrelation(x):
    """Sample autocorrelation at all lags via FFT."""
    x = np.asarray(x, dtype=float)
    n = x.size
    xc = x - x.mean()
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:n] / n
    return acov / acov[0]


def effective_sample_size(draws):
    """ESS with Geyer's initial monotone positive sequence estimator.

    A constant series has no defined autocorrelation; it returns 0 with a
    warning.
    """
    x = np.asarray(draws, dtype=float)
    n = x.size
    if n < 4 or np.ptp(x) == 0:
        warnings.warn("constant or too-short series; ESS set to 0", RuntimeWarning)
        return 0.0
    rho = autocorrelation(x)
    n_pairs = (n - 1) // 2
    pair_sums = rho[0:2 * n_pairs:2] + rho[1:2 * n_pairs:2]
    # truncate at the first non-positive pair sum, then enforce monotonicity
    neg = np.flatnonzero(pair_sums <= 0)
    pair_sums = pair_sums[:neg[0]] if neg.size else pair_sums
    pair_sums = np.minimum.accumulate(pair_sums)
    tau_int = -1.0 + 2.0 * np.sum(pair_sums)
    if tau_int <= 0:
        return float(n)
    return float(min(n / tau_int, n))


def summarize_draws(name, draws, level):
    lo, hi = credible_interval(draws, level)
    return ParamSummary(name, posterior_mean(draws), lo, hi, effective_sample_size(draws))


def censor_profiles(chain, tau=None):
    """Posterior censoring probability for each zero observation.

    The mean of the retained indicator draws.
    """
    if tau is None:
        tau = chain.config.get("tau")
    probs = chain.c_draws.mean(axis=0) if chain.n_draws else np.full(chain.zero_idx.size, np.nan)
    return [CensorProfile(int(i), tau, float(p)) for i, p in zip(chain.zero_idx, probs)]


def group_censor_means(profiles, true_c):
    """Mean censoring probability over truly-censored and true-zero observations.

    ``true_c`` is indexed by observation id. Raises ``ValueError`` when either
    group is empty.
    """
    true_c = np.asarray(true_c)
    probs = np.array([pr.prob for pr in profiles])
    labels = np.array([true_c[pr.obs_id] for pr in profiles])
    n_c = np.count_nonzero(labels == 1)
    n_d = np.count_nonzero(labels == 0)
    if n_c == 0:
        raise ValueError("no truly censored zeros: zeta_C is undefined")
    if n_d == 0:
        raise ValueError("no true zeros: zeta_D is undefined")
    return float(probs[labels == 1].mean()), float(probs[labels == 0].mean())


def parameter_names(k, m):
    return [f"beta_{j}" for j in range(k)] + [f"gamma_{j}" for j in range(m)] + ["sigma"]


def draws_matrix(chain):
    return np.column_stack([chain.beta_draws, chain.gamma_draws, chain.sigma_draws])


def summarize_chain(chain, level, include_gamma=True):
    """Per-parameter summaries keyed by parameter name."""
    k = chain.beta_draws.shape[1]
    m = chain.gamma_draws.shape[1]
    names = parameter_names(k, m)
    mat = draws_matrix(chain)
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for j, name in enumerate(names):
            if name.startswith("gamma") and not include_gamma:
                continue
            out[name] = summarize_draws(name, mat[:, j], level)
    return out
