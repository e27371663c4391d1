"""Anti-continuum entry onto the asymmetric companion branches."""
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

spec = pulses.PulseSpec((5, 7, 5))
base = pulses.singular_profile(spec, mu=MU)
p = spec.pad
variants = {}
v = np.array(base.values)
v[p + 5] = MU
variants["inner-left"] = v
v = np.array(base.values)
v[p - 1] = MU
v[p + 11] = MU
variants["shift-left"] = v

for name, vals in variants.items():
    prof0 = base.with_values(vals)
    t0 = time.time()
    try:
        prof = pulses.continue_in_d(prof0, MU, D)
    except Exception as exc:
        print(f"{name}: d-continuation failed: {exc}")
        continue
    u = np.array(prof.values)
    asym = np.abs(u - u[::-1]).max()
    print(f"{name}: converged at d={D}, asym={asym:.3f} "
          f"({time.time()-t0:.1f}s)")
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
          f"folds={len(br.folds())} pfs={len(br.pitchforks())} "
          f"mu range=({mus.min():.6f},{mus.max():.6f}) "
          f"asym range=({a.min():.2e},{a.max():.2e}) {time.time()-t0:.1f}s")
    idx = [i for i in range(1, len(a) - 1)
           if a[i] < 5e-2 and a[i] <= a[i - 1] and a[i] <= a[i + 1]]
    for i in idx:
        print(f"  junction? mu={mus[i]:.9f} asym={a[i]:.2e}")
