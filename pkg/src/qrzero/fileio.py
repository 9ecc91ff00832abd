"""CSV ingestion, fit requests, and the on-disk formats for draws, summaries,
censoring profiles, simulation results and run manifests.

Floats are written with ``repr`` so every file round-trips exactly.
"""
import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .ald import ald_cdf_at_zero, validate_tau
from .model import (
    ConfigurationError,
    Dataset,
    ModelConfig,
    Priors,
    censor_prob,
    invert_transform,
)
from .sampler import Chain, run_chain
from .simstudy import RepSummary, SimSpec, run_study
from .summary import QUANTILE_METHOD, censor_profiles, parameter_names, summarize_draws

SCHEMA_VERSION = 1


class CsvError(ConfigurationError):
    """Malformed input CSV; carries the offending row and column."""

    def __init__(self, msg, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{msg} ({', '.join(where)})" if where else msg)


def _fmt(x):
    x = float(x)
    return "nan" if math.isnan(x) else repr(x)


def _json_float(x):
    x = float(x)
    return None if not math.isfinite(x) else x


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _tau_tag(tau):
    return f"tau{tau:g}"


# --------------------------------------------------------------------------
# fit requests and CSV parsing
# --------------------------------------------------------------------------

@dataclass
class FitRequest:
    data_path: str
    response: str
    x_cols: list
    z_cols: list
    taus: list
    out_dir: str
    level: float
    transform: str = "identity"
    standardize: bool = False
    variant: str = "censored_mix"
    link: str = "logit"
    iters: int = 2000
    burnin: int = 500
    thin: int = 1
    seed: int = 0
    mh_step: float = 0.1
    adapt: bool = True
    prior_scale: float = 100.0
    n0: float = 1.5
    s0: float = 0.05
    priors: dict = None

    def __post_init__(self):
        self.x_cols = list(self.x_cols)
        self.z_cols = list(self.z_cols)
        self.taus = [validate_tau(t) for t in self.taus]
        if not self.taus:
            raise ConfigurationError("at least one tau is required")
        if self.level is None or not 0 < float(self.level) < 1:
            raise ConfigurationError("interval level must be given and lie in (0, 1)")
        self.level = float(self.level)
        for tau in self.taus:
            self.model_config(tau, 0)

    def model_config(self, tau, stream_id):
        return ModelConfig(tau=tau, variant=self.variant, link=self.link,
                           mh_step=self.mh_step, iters=self.iters, burnin=self.burnin,
                           thin=self.thin, seed=self.seed, stream_id=stream_id,
                           adapt=self.adapt)

    def resolve_priors(self, k, m):
        if self.priors is not None:
            priors = Priors.from_dict(self.priors)
        else:
            priors = Priors.default(k, m, scale=self.prior_scale, n0=self.n0, s0=self.s0)
        if priors.b0.shape[0] != k or priors.g0.shape[0] != m:
            raise ConfigurationError("prior dimensions do not match the design matrices")
        return priors

    def to_dict(self):
        return asdict(self)


def read_table(path):
    """Header plus rows of a UTF-8 CSV as lists of strings."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(line for line in fh if not line.startswith("#")))
    except FileNotFoundError:
        raise CsvError(f"no such file: {path}") from None
    except UnicodeDecodeError as exc:
        raise CsvError(f"{path} is not valid UTF-8: {exc}") from None
    rows = [r for r in rows if r]
    if not rows:
        raise CsvError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if len(rows) == 1:
        raise CsvError(f"{path} has a header but no data rows")
    return header, rows[1:]


def _numeric_column(header, rows, name, allow_nan=False):
    if name not in header:
        raise CsvError("missing column", column=name)
    j = header.index(name)
    out = np.empty(len(rows))
    for i, row in enumerate(rows):
        # data rows are numbered from 1, after the header
        if j >= len(row):
            raise CsvError("short row", row=i + 1, column=name)
        try:
            out[i] = float(row[j])
        except ValueError:
            raise CsvError(f"non-numeric cell {row[j]!r}", row=i + 1, column=name) from None
        if not math.isfinite(out[i]) and not (allow_nan and math.isnan(out[i])):
            raise CsvError(f"non-finite cell {row[j]!r}", row=i + 1, column=name)
    return out


def parse_csv(path, req):
    """Build a Dataset from ``req``'s columns.

    Intercept columns are prepended to both designs. With ``req.standardize``
    every covariate is centred and scaled; the constants are returned so they
    can be recorded. Returns ``(dataset, standardization)``.
    """
    header, rows = read_table(path)
    y = _numeric_column(header, rows, req.response)
    neg = np.flatnonzero(y < 0)
    if neg.size:
        raise CsvError(f"negative response {y[neg[0]]!r}", row=int(neg[0]) + 1,
                       column=req.response)
    cols = {}
    for name in dict.fromkeys(req.x_cols + req.z_cols):
        cols[name] = _numeric_column(header, rows, name)
    scaling = {}
    if req.standardize:
        for name, col in cols.items():
            sd = col.std(ddof=1) if col.size > 1 else 0.0
            if not sd > 0:
                raise CsvError("cannot standardize a constant column", column=name)
            scaling[name] = {"mean": float(col.mean()), "sd": float(sd)}
            cols[name] = (col - scaling[name]["mean"]) / sd
    n = y.size
    X = np.column_stack([np.ones(n)] + [cols[c] for c in req.x_cols])
    Z = np.column_stack([np.ones(n)] + [cols[c] for c in req.z_cols])
    data = Dataset(y, X, Z, transform=req.transform,
                   x_names=["intercept"] + req.x_cols, z_names=["intercept"] + req.z_cols)
    return data, scaling


# --------------------------------------------------------------------------
# draws, summaries, profiles
# --------------------------------------------------------------------------

def write_draws(path, chain):
    k, m = chain.beta_draws.shape[1], chain.gamma_draws.shape[1]
    names = parameter_names(k, m)
    mat = np.column_stack([chain.beta_draws, chain.gamma_draws, chain.sigma_draws])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# qrzero draws schema_version={SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter"] + names)
        for it, row in zip(chain.iterations, mat):
            w.writerow([int(it)] + [_fmt(x) for x in row])


def read_draws(path):
    """Returns ``(iterations, {name: column})`` from a draws file."""
    header, rows = read_table(path)
    if header[0] != "iter":
        raise CsvError("draws file must start with an 'iter' column", column=header[0])
    its = _numeric_column(header, rows, "iter").astype(int)
    return its, {name: _numeric_column(header, rows, name) for name in header[1:]}


def chain_from_draws(iterations, columns):
    """Rebuild a Chain (without indicator draws) from draws-file columns."""
    beta = np.column_stack([v for k, v in columns.items() if k.startswith("beta_")])
    gamma_cols = [v for k, v in columns.items() if k.startswith("gamma_")]
    n = len(iterations)
    gamma = np.column_stack(gamma_cols) if gamma_cols else np.empty((n, 0))
    return Chain(beta_draws=beta, gamma_draws=gamma, sigma_draws=columns["sigma"],
                 c_draws=np.empty((n, 0), dtype=np.int8), zero_idx=np.empty(0, int),
                 iterations=np.asarray(iterations), mh_accepts=0, mh_proposals=0,
                 mh_rate=float("nan"), mh_step=float("nan"))


def summary_record(chain, level, tau=None, variant=None, names=None):
    k, m = chain.beta_draws.shape[1], chain.gamma_draws.shape[1]
    keys = parameter_names(k, m)
    mat = np.column_stack([chain.beta_draws, chain.gamma_draws, chain.sigma_draws])
    params = {}
    for j, key in enumerate(keys):
        if key.startswith("gamma") and variant == "tobit":
            continue
        s = summarize_draws(key, mat[:, j], level)
        params[key] = {"mean": _json_float(s.mean), "lower": _json_float(s.lower),
                       "upper": _json_float(s.upper), "ess": _json_float(s.ess)}
        if names is not None and key in names:
            params[key]["covariate"] = names[key]
    return {
        "schema_version": SCHEMA_VERSION,
        "tau": tau,
        "variant": variant,
        "level": level,
        "interval": "equal-tailed",
        "quantile_method": QUANTILE_METHOD,
        "n_draws": int(chain.n_draws),
        "mh_acceptance_rate": _json_float(chain.mh_rate),
        "mh_step": _json_float(chain.mh_step),
        "parameters": params,
    }


def write_profiles(path, chain, data, tau):
    profiles = censor_profiles(chain, tau)
    back = data.transform != "identity"
    beta_mean = chain.beta_draws.mean(axis=0)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# qrzero censor-profile schema_version={SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["obs_id", "tau", "prob"] + (["quantile_fit", "quantile_response"]
                                                if back else []))
        for pr in profiles:
            row = [pr.obs_id, _fmt(tau), _fmt(pr.prob)]
            if back:
                q = float(data.X[pr.obs_id] @ beta_mean)
                row += [_fmt(q), _fmt(invert_transform(q, data.transform))]
            w.writerow(row)
    return profiles


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

@dataclass
class OutputBundle:
    out_dir: str
    draws: dict = field(default_factory=dict)
    summaries: dict = field(default_factory=dict)
    profiles: dict = field(default_factory=dict)
    manifest: str = ""


def fit_manifest(req, priors, scaling):
    # the output directory is not an input to the fit, so a replay elsewhere
    # reproduces the manifest too
    request = req.to_dict()
    del request["out_dir"]
    return {"schema_version": SCHEMA_VERSION, "command": "fit",
            "library_version": __version__, "request": request,
            "resolved_priors": priors.to_dict(), "standardization": scaling}


def cmd_fit(req, n_jobs=1):
    """Fit every requested tau and write the output bundle.

    The fit at the j-th tau uses RNG stream ``(seed, j)``.
    """
    data, scaling = parse_csv(req.data_path, req)
    priors = req.resolve_priors(data.k, data.m)
    os.makedirs(req.out_dir, exist_ok=True)
    configs = [req.model_config(tau, j) for j, tau in enumerate(req.taus)]
    if n_jobs == 1:
        chains = [run_chain(data, cfg, priors) for cfg in configs]
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            chains = list(pool.map(run_chain, [data] * len(configs), configs,
                                   [priors] * len(configs)))
    names = {f"beta_{j}": c for j, c in enumerate(data.x_names)}
    names.update({f"gamma_{j}": c for j, c in enumerate(data.z_names)})
    bundle = OutputBundle(out_dir=req.out_dir)
    for tau, chain in zip(req.taus, chains):
        tag = _tau_tag(tau)
        bundle.draws[tau] = os.path.join(req.out_dir, f"draws_{tag}.csv")
        bundle.summaries[tau] = os.path.join(req.out_dir, f"summary_{tag}.json")
        bundle.profiles[tau] = os.path.join(req.out_dir, f"censor_{tag}.csv")
        write_draws(bundle.draws[tau], chain)
        _write_json(bundle.summaries[tau],
                    summary_record(chain, req.level, tau, req.variant, names))
        write_profiles(bundle.profiles[tau], chain, data, tau)
    bundle.manifest = os.path.join(req.out_dir, "manifest.json")
    _write_json(bundle.manifest, fit_manifest(req, priors, scaling))
    return bundle


def load_fit_manifest(path, out_dir=None):
    """FitRequest recorded in a fit manifest, writing to ``out_dir``.

    Without ``out_dir`` the outputs go next to the manifest.
    """
    with open(path, encoding="utf-8") as fh:
        man = json.load(fh)
    if not isinstance(man, dict) or man.get("command") != "fit":
        raise ConfigurationError(f"{path} is not a fit manifest")
    # default priors are rebuilt from prior_scale, n0 and s0; resolved_priors is
    # recorded for the reader
    d = dict(man["request"])
    d["out_dir"] = out_dir if out_dir is not None else os.path.dirname(os.path.abspath(path))
    try:
        return FitRequest(**d)
    except TypeError as exc:
        raise ConfigurationError(f"malformed fit manifest {path}: {exc}") from None


def load_sim_spec(path):
    """SimSpec from a JSON file holding either a bare spec or a manifest."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{path} must hold a JSON object")
    if raw.get("command") == "simulate":
        raw = raw["spec"]
    return SimSpec.from_dict(raw)


def write_rep_summaries(path, reps):
    """One row per replication x tau."""
    k = len(reps[0].beta_mean) if reps else 0
    m = len(reps[0].gamma_mean) if reps else 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# qrzero simulation schema_version={SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replication", "tau", "zeta_c", "zeta_d"]
                   + [f"beta_{j}" for j in range(k)] + [f"gamma_{j}" for j in range(m)]
                   + ["zero_fraction", "censored_fraction", "mh_rate"])
        for r in reps:
            w.writerow([r.replication, _fmt(r.tau), _fmt(r.zeta_c), _fmt(r.zeta_d)]
                       + [_fmt(b) for b in r.beta_mean] + [_fmt(g) for g in r.gamma_mean]
                       + [_fmt(r.zero_fraction), _fmt(r.censored_fraction),
                          _fmt(r.mh_rate)])


def read_rep_summaries(path):
    header, rows = read_table(path)
    # an empty censoring group is recorded as nan
    cols = {h: _numeric_column(header, rows, h, allow_nan=True) for h in header}
    betas = sorted((h for h in header if h.startswith("beta_")), key=lambda h: int(h[5:]))
    gammas = sorted((h for h in header if h.startswith("gamma_")), key=lambda h: int(h[6:]))
    return [RepSummary(replication=int(cols["replication"][i]), tau=cols["tau"][i],
                       zeta_c=cols["zeta_c"][i], zeta_d=cols["zeta_d"][i],
                       beta_mean=[cols[b][i] for b in betas],
                       gamma_mean=[cols[g][i] for g in gammas],
                       zero_fraction=cols["zero_fraction"][i],
                       censored_fraction=cols["censored_fraction"][i],
                       mh_rate=cols["mh_rate"][i])
            for i in range(len(rows))]


def cmd_simulate(spec_path, out_path, n_jobs=1):
    """Run the study described in ``spec_path``; writes the results CSV and a
    manifest next to it. Returns the RepSummary list."""
    spec = load_sim_spec(spec_path)
    reps = run_study(spec, n_jobs=n_jobs)
    out_dir = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(out_dir, exist_ok=True)
    write_rep_summaries(out_path, reps)
    _write_json(os.path.splitext(out_path)[0] + ".manifest.json",
                {"schema_version": SCHEMA_VERSION, "command": "simulate",
                 "library_version": __version__, "spec": spec.to_dict()})
    return reps


def censor_curve_rows(mu, sigma, taus, p_grid):
    """Censoring probability as a function of p for each tau, at fixed mu, sigma."""
    rows = []
    for tau in taus:
        tau = validate_tau(tau)
        f0 = ald_cdf_at_zero(mu, sigma, tau)
        for p in p_grid:
            if not 0 <= p <= 1:
                raise ConfigurationError(f"p must lie in [0, 1], got {p!r}")
            rows.append((float(mu), float(sigma), tau, float(p), f0, censor_prob(p, f0)))
    return rows


def cmd_censor_curve(mu, sigma, taus, p_grid, out):
    """Write the curve table to the open text stream ``out``."""
    if not sigma > 0:
        raise ConfigurationError("sigma must be positive")
    rows = censor_curve_rows(mu, sigma, taus, p_grid)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["mu", "sigma", "tau", "p", "f0", "prob"])
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return rows


def cmd_summarize(draws_path, level, out_path=None, tau=None, variant=None):
    """Recompute a summary record from a draws file."""
    its, cols = read_draws(draws_path)
    chain = chain_from_draws(its, cols)
    rec = summary_record(chain, level, tau, variant)
    if out_path is not None:
        _write_json(out_path, rec)
    return rec
