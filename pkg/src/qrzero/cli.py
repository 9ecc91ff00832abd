"""Command-line entry point: ``qrzero {fit,simulate,censor-curve,summarize}``.

Exit status 0 on success, 2 for configuration or parse errors, 3 when the
sampler hits a non-finite state.
"""
import argparse
import json
import sys

import numpy as np

from .fileio import (
    FitRequest,
    cmd_censor_curve,
    cmd_fit,
    cmd_simulate,
    cmd_summarize,
    load_fit_manifest,
)
from .model import ConfigurationError
from .sampler import SamplerError

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _names(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="qrzero", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit the model to a CSV file")
    fit.add_argument("data", nargs="?", help="input CSV")
    fit.add_argument("--manifest", help="replay the request recorded in a manifest")
    fit.add_argument("--response", help="response column")
    fit.add_argument("--x", type=_names, default=[], help="comma-separated quantile covariates")
    fit.add_argument("--z", type=_names, default=[], help="comma-separated zero-part covariates")
    fit.add_argument("--tau", type=_floats, help="comma-separated quantile levels")
    fit.add_argument("--level", type=float, help="credible interval level, e.g. 0.9")
    fit.add_argument("--out", help="output directory")
    fit.add_argument("--transform", choices=["identity", "sqrt"], default="identity")
    fit.add_argument("--standardize", action="store_true")
    fit.add_argument("--variant", choices=["twopart", "censored_mix", "tobit"],
                     default="censored_mix")
    fit.add_argument("--link", choices=["logit", "probit"], default="logit")
    fit.add_argument("--iters", type=int, default=2000)
    fit.add_argument("--burnin", type=int, default=500)
    fit.add_argument("--thin", type=int, default=1)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--mh-step", type=float, default=0.1)
    fit.add_argument("--no-adapt", action="store_true", help="keep the MH step fixed")
    fit.add_argument("--prior-scale", type=float, default=100.0)
    fit.add_argument("--n0", type=float, default=1.5)
    fit.add_argument("--s0", type=float, default=0.05)
    fit.add_argument("--priors", help="JSON file with b0, B0, g0, G0, n0, s0")
    fit.add_argument("--jobs", type=int, default=1)

    sim = sub.add_parser("simulate", help="run the simulation study from a JSON spec")
    sim.add_argument("spec", help="JSON spec or simulate manifest")
    sim.add_argument("--out", required=True, help="output CSV")
    sim.add_argument("--jobs", type=int, default=1)

    curve = sub.add_parser("censor-curve", help="tabulate P(censored | y = 0) over p")
    curve.add_argument("--mu", type=float, required=True)
    curve.add_argument("--sigma", type=float, default=1.0)
    curve.add_argument("--tau", type=_floats, required=True)
    curve.add_argument("--p", type=_floats, default=None,
                       help="comma-separated p grid (default 0, 0.01, ..., 1)")
    curve.add_argument("--out", help="output CSV (default stdout)")

    summ = sub.add_parser("summarize", help="recompute a summary from a draws file")
    summ.add_argument("draws")
    summ.add_argument("--level", type=float, required=True)
    summ.add_argument("--out", help="output JSON (default stdout)")
    return parser


def _fit_request(args):
    if args.manifest:
        return load_fit_manifest(args.manifest, out_dir=args.out)
    missing = [flag for flag, val in (("data", args.data), ("--response", args.response),
                                      ("--tau", args.tau), ("--level", args.level),
                                      ("--out", args.out)) if val is None]
    if missing:
        raise ConfigurationError(f"fit needs {', '.join(missing)}")
    priors = None
    if args.priors:
        with open(args.priors, encoding="utf-8") as fh:
            priors = json.load(fh)
    return FitRequest(data_path=args.data, response=args.response, x_cols=args.x,
                      z_cols=args.z, taus=args.tau, out_dir=args.out, level=args.level,
                      transform=args.transform, standardize=args.standardize,
                      variant=args.variant, link=args.link, iters=args.iters,
                      burnin=args.burnin, thin=args.thin, seed=args.seed,
                      mh_step=args.mh_step, adapt=not args.no_adapt,
                      prior_scale=args.prior_scale, n0=args.n0, s0=args.s0, priors=priors)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fit":
            bundle = cmd_fit(_fit_request(args), n_jobs=args.jobs)
            print(f"wrote {bundle.out_dir}")
        elif args.command == "simulate":
            reps = cmd_simulate(args.spec, args.out, n_jobs=args.jobs)
            print(f"wrote {len(reps)} rows to {args.out}")
        elif args.command == "censor-curve":
            grid = args.p if args.p is not None else np.linspace(0.0, 1.0, 101).tolist()
            if args.out:
                with open(args.out, "w", newline="", encoding="utf-8") as fh:
                    cmd_censor_curve(args.mu, args.sigma, args.tau, grid, fh)
            else:
                cmd_censor_curve(args.mu, args.sigma, args.tau, grid, sys.stdout)
        elif args.command == "summarize":
            rec = cmd_summarize(args.draws, args.level, args.out)
            if not args.out:
                json.dump(rec, sys.stdout, indent=2, sort_keys=True)
                sys.stdout.write("\n")
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SamplerError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
