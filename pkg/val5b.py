"""Criterion 7: asymmetric loops from all four isola pitchforks, with retry."""
import time
from dataclasses import replace

import numpy as np

from pulse_atlas import cli, continuation
from pulse_atlas.config import ExperimentConfig
from pulse_atlas.continuation import LatticeSteadyStateProblem

cfg = ExperimentConfig()
cfg = replace(cfg, stability=replace(cfg.stability, enabled=False))
problem = LatticeSteadyStateProblem(d=cfg.model.d)
prof = cli._build_start(cfg, (5, 7, 5), problem)
center = cli._symmetry_center(prof)
settings = cli._branch_settings(cfg, center, snaking_detection=False)
start = cli._oriented_start(problem, prof, cfg.model.mu_start)
br = continuation.continue_branch(problem, start, settings)
pfs = br.pitchforks()
pf_mus = [pf.mu_at for pf in pfs]
print(f"symmetric isola: {br.topology} folds={len(br.folds())} pfs={len(pfs)}")
print("pf mus:", " ".join(f"{m:.8f}" for m in pf_mus))


def trace(pf, direction, eps, ds0):
    sw = continuation.branch_switch(problem, pf, direction=direction,
                                    epsilon=eps)
    asw = replace(settings, symmetric_center=None, detect_pitchforks=False,
                  snaking_detection=False, max_steps=40000, ds=ds0)
    return continuation.continue_branch(problem, sw, asw)


for k, pf in enumerate(pfs):
    t0 = time.time()
    got = None
    for direction, eps, ds0 in ((1, None, None), (-1, None, None),
                                (1, 0.01, 1e-3), (-1, 0.01, 1e-3),
                                (1, 0.02, 2e-3), (-1, 0.02, 2e-3)):
        e = eps if eps is not None else \
            1e-3 * float(np.linalg.norm(pf.data["point"].profile.values))
        d0 = ds0 if ds0 is not None else 0.25 * e
        try:
            ab = trace(pf, direction, e, d0)
        except continuation.BranchSwitchError as exc:
            print(f"pf{k}: switch failed ({direction},{e:g}): {exc}")
            continue
        a = np.array([np.abs(np.array(p.profile.values)
                             - np.array(p.profile.values)[::-1]).max()
                      for p in ab.points])
        if isinstance(ab.topology, continuation.Closed) and a.max() > 0.1:
            got = (ab, a, direction, e, d0)
            break
    if got is None:
        print(f"pf{k} mu={pf.mu_at:.8f}: no closed asymmetric loop "
              f"{time.time()-t0:.1f}s")
        continue
    ab, a, direction, e, d0 = got
    mus = np.array([p.mu for p in ab.points])
    junctions = []
    for i in range(1, len(a) - 1):
        if a[i] < 5e-3 and a[i] <= a[i - 1] and a[i] <= a[i + 1]:
            junctions.append((mus[i], a[i]))
    tag = " ".join(
        f"pf{int(np.argmin([abs(m - q) for q in pf_mus]))}"
        f"(d={m - pf_mus[int(np.argmin([abs(m - q) for q in pf_mus]))]:+.1e})"
        for m, _ in junctions)
    print(f"pf{k} mu={pf.mu_at:.8f}: dir={direction:+d} eps={e:g} ds0={d0:g} "
          f"{ab.topology} pts={len(ab.points)} folds={len(ab.folds())} "
          f"junctions: {tag} {time.time()-t0:.1f}s")
