"""
Checking the sampler
====================

Two checks worth running after changing anything in the sampler.

The first is mixing: autocorrelation, effective sample size and the
random-walk acceptance rate of the zero-part coefficients.

The second is a short getting-it-right run. It alternates one Gibbs sweep
with a fresh draw of the data given the current parameters. If every update
leaves the joint distribution invariant, the parameter draws follow the prior,
so their moments must match direct prior draws.
"""
import sys
from pathlib import Path

from qrzero.model import ModelConfig, Priors
from qrzero.sampler import run_chain
from qrzero.simstudy import SimSpec, generate
from qrzero.stochastic import make_rng
from qrzero.summary import autocorrelation, effective_sample_size

data, _ = generate(SimSpec(n=300), make_rng(5))
chain = run_chain(data, ModelConfig(tau=0.5, iters=3000, burnin=1000, seed=5),
                  Priors.default(data.k, data.m))
print(f"MH acceptance after burn-in: {chain.mh_rate:.2f}, final step {chain.mh_step:.3f}")
for j in range(data.m):
    g = chain.gamma_draws[:, j]
    print(f"gamma_{j}: lag-1 acf {autocorrelation(g)[1]:.2f}, ess {effective_sample_size(g):.0f}")
print(f"sigma:   lag-1 acf {autocorrelation(chain.sigma_draws)[1]:.2f}, "
      f"ess {effective_sample_size(chain.sigma_draws):.0f}")

# the harness lives with the tests
sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from gir import compare, marginal_conditional, successive_conditional, tiny_problem  # noqa: E402

X, Z, priors, cfg = tiny_problem()
# the sweep-and-redraw chain is autocorrelated; 20000 cycles leave about a
# thousand effective draws per moment
mc = marginal_conditional(20_000, X, Z, priors, cfg, make_rng(6, 0))
sc = successive_conditional(20_000, X, Z, priors, cfg, make_rng(6, 1))
labels = ["b0", "b1", "g0", "g1", "sigma"]
labels += [f"{s}^2" for s in labels]
print("\ngetting-it-right z-scores (|z| well under 4 is expected)")
for name, z in zip(labels, compare(mc, sc)):
    print(f"  {name:8s} {z:6.2f}")
