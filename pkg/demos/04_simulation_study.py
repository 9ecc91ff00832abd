"""
A small simulation study
========================

Repeat the simulate-and-fit cycle a few times and summarise how the censoring
probabilities separate censored zeros (zeta_C) from true zeros (zeta_D). The
full-size study runs the same code with ``replications=100``; on one core it
takes around ten minutes, so this demo uses five.

The same study can be launched from the shell::

    qrzero simulate spec.json --out results/sim.csv
"""
import numpy as np

from qrzero.simstudy import SimSpec, run_study

spec = SimSpec(replications=5, seed=11)
rows = run_study(spec)

print(" tau   zeta_C  zeta_D  beta_2  MH rate")
for tau in spec.taus:
    sub = [r for r in rows if r.tau == tau]
    print(f" {tau:.2f}  {np.mean([r.zeta_c for r in sub]):6.3f}  "
          f"{np.mean([r.zeta_d for r in sub]):6.3f}  "
          f"{np.mean([r.beta_mean[2] for r in sub]):6.3f}  "
          f"{np.mean([r.mh_rate for r in sub]):6.3f}")
