"""Snake-ladder rung entry from the one-sided interface pattern."""
import time
from dataclasses import replace

import numpy as np

from pulse_atlas import cli, continuation, pulses
from pulse_atlas.config import ExperimentConfig
from pulse_atlas.continuation import LatticeSteadyStateProblem

D = 0.1
MU = 0.5

cfg = ExperimentConfig()
cfg = replace(cfg, stability=replace(cfg.stability, enabled=False))
problem = LatticeSteadyStateProblem(d=D)

for k in (9, 11):
    spec = pulses.PulseSpec((k,))
    base = pulses.singular_profile(spec, mu=MU)
    p = spec.pad
    v = np.array(base.values)
    v[p + k] = MU
    prof0 = base.with_values(v)
    t0 = time.time()
    prof = pulses.continue_in_d(prof0, MU, D)
    u = np.array(prof.values)
    asym = np.abs(u - u[::-1]).max()
    print(f"rung k={k}: converged, asym={asym:.3f} ({time.time()-t0:.1f}s)")
    start = cli._oriented_start(problem, prof, MU)
    settings = cli._branch_settings(cfg, None, snaking_detection=False,
                                    max_steps=40000)
    t0 = time.time()
    br = continuation.continue_branch(problem, start, settings)
    mus = np.array([pt.mu for pt in br.points])
    a = np.array([np.abs(np.array(pt.profile.values)
                         - np.array(pt.profile.values)[::-1]).max()
                  for pt in br.points])
    print(f"  topology={br.topology} pts={len(br.points)} "
          f"folds={len(br.folds())} mu range=({mus.min():.9f},{mus.max():.9f}) "
          f"asym range=({a.min():.2e},{a.max():.2e}) {time.time()-t0:.1f}s")
    idx = [i for i in range(1, len(a) - 1)
           if a[i] < 5e-2 and a[i] <= a[i - 1] and a[i] <= a[i + 1]]
    for i in idx[:6]:
        print(f"  junction? mu={mus[i]:.9f} asym={a[i]:.2e} "
              f"l2={br.points[i].measure:.6f}")
