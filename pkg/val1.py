"""Re-validate tracer outputs after stepper changes: snakes, hourglass
isola, asymmetric isola, and the wider multi-pulse specs."""
import time
from dataclasses import replace

import numpy as np

from pulse_atlas import cli, continuation
from pulse_atlas.config import ExperimentConfig
from pulse_atlas.continuation import LatticeSteadyStateProblem


def trace(lengths, snaking, **kw):
    cfg = ExperimentConfig()
    cfg = replace(cfg, stability=replace(cfg.stability, enabled=False))
    problem = LatticeSteadyStateProblem(d=cfg.model.d)
    prof = cli._build_start(cfg, lengths, problem)
    center = cli._symmetry_center(prof)
    settings = cli._branch_settings(cfg, center, snaking_detection=snaking, **kw)
    start = cli._oriented_start(problem, prof, cfg.model.mu_start)
    t0 = time.time()
    br = continuation.continue_branch(problem, start, settings)
    dt = time.time() - t0
    return br, dt


def report(name, br, dt):
    folds = [e.mu_at for e in br.folds()]
    pfs = [e.mu_at for e in br.pitchforks()]
    print(f"{name}: topology={br.topology}  pts={len(br.points)}  "
          f"folds={len(folds)}  pfs={len(pfs)}  {dt:.1f}s")
    if folds:
        print("  folds: " + " ".join(f"{m:.8f}" for m in folds))
    if pfs:
        print("  pfs:   " + " ".join(f"{m:.8f}" for m in pfs))
    return folds, pfs


# Criterion 3 seeds
for lengths in ((9,), (10,)):
    br, dt = report(f"snake {lengths}", *trace(lengths, True))


# Criterion 5/6 trace
folds, pfs = report("[5,7,5]", *trace((5, 7, 5), False))

# Criterion 7 part 1
report("[5,7,9]", *trace((5, 7, 9), False))
