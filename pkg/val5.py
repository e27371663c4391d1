"""Criterion 7 second half: asymmetric branches from the isola pitchforks."""
import time
from dataclasses import replace

import numpy as np

from pulse_atlas import cli, continuation, pulses
from pulse_atlas.config import ExperimentConfig
from pulse_atlas.continuation import (ContinuationSettings, EventKind,
                                      LatticeSteadyStateProblem)

FOLD_LEFT = (0.454879222667, 0.455110400456)
FOLD_RIGHT = (0.544153160393, 0.544755729626)

cfg = ExperimentConfig()
cfg = replace(cfg, stability=replace(cfg.stability, enabled=False))
problem = LatticeSteadyStateProblem(d=cfg.model.d)
prof = cli._build_start(cfg, (5, 7, 5), problem)
center = cli._symmetry_center(prof)
settings = cli._branch_settings(cfg, center, snaking_detection=False)
start = cli._oriented_start(problem, prof, cfg.model.mu_start)
t0 = time.time()
br = continuation.continue_branch(problem, start, settings)
print(f"symmetric isola: {br.topology} folds={len(br.folds())} "
      f"pfs={len(br.pitchforks())} {time.time()-t0:.1f}s")

n = len(prof.values)


def asym(u):
    return float(np.abs(u - u[::-1]).max())


for k, pf in enumerate(br.pitchforks()):
    mu_pf = pf.data["point"].mu
    t0 = time.time()
    try:
        sw = continuation.branch_switch(problem, pf)
    except Exception as exc:
        print(f"pf{k} mu={mu_pf:.8f}: switch failed: {exc}")
        continue
    eps = 1e-3 * float(np.linalg.norm(pf.data["point"].profile.values))
    asw = replace(settings, symmetric_center=None, detect_pitchforks=False,
                  snaking_detection=False, max_steps=40000,
                  ds=0.25 * eps)
    ab = continuation.continue_branch(problem, sw, asw)
    mus = np.array([p.mu for p in ab.points])
    a = np.array([asym(np.array(p.profile.values)) for p in ab.points])
    # interior near-symmetric minima = terminating pitchfork junctions
    junctions = []
    for i in range(1, len(a) - 1):
        if a[i] < 2e-3 and a[i] <= a[i - 1] and a[i] <= a[i + 1]:
            junctions.append((mus[i], a[i]))
    print(f"pf{k} mu={mu_pf:.8f}: asym branch {ab.topology} "
          f"pts={len(ab.points)} folds={len(ab.folds())} "
          f"asym_range=({a.min():.2e},{a.max():.2e}) "
          f"{time.time()-t0:.1f}s")
    for mj, aj in junctions:
        side = "left" if mj < 0.5 else "right"
        near = min(FOLD_LEFT + FOLD_RIGHT, key=lambda f: abs(f - mj))
        print(f"   junction mu={mj:.8f} asym={aj:.2e} ({side}, "
              f"nearest fold {near:.8f}, dmu={mj-near:+.2e})")
