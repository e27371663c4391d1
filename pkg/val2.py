"""Validate stability-count patterns (criterion 9) and the wide multi-pulse
specs (criterion 8)."""
import time
from dataclasses import replace

import numpy as np

from pulse_atlas import cli, continuation, stability
from pulse_atlas.config import ExperimentConfig
from pulse_atlas.continuation import LatticeSteadyStateProblem


def trace(lengths, snaking, annotate=False, **kw):
    cfg = ExperimentConfig()
    cfg = replace(cfg, stability=replace(cfg.stability, enabled=False))
    problem = LatticeSteadyStateProblem(d=cfg.model.d)
    prof = cli._build_start(cfg, lengths, problem)
    center = cli._symmetry_center(prof)
    settings = cli._branch_settings(cfg, center, snaking_detection=snaking, **kw)
    start = cli._oriented_start(problem, prof, cfg.model.mu_start)
    t0 = time.time()
    br = continuation.continue_branch(problem, start, settings)
    if annotate:
        stability.annotate_branch(br, cfg.model.d)
    dt = time.time() - t0
    return br, dt


def count_runs(br):
    runs = []
    for p in br.points:
        c = p.unstable_count
        if not runs or runs[-1][0] != c:
            runs.append([c, 1])
        else:
            runs[-1][1] += 1
    return [(c, k) for c, k in runs]


# Criterion 9a: on-site single-pulse snake counts
br, dt = trace((9,), True, annotate=True)
print(f"snake (9,): {br.topology}  {dt:.1f}s")
print("  count runs:", count_runs(br))

# Criterion 9b: symmetric 2-pulse isola counts
br2, dt2 = trace((5, 7, 5), False, annotate=True)
print(f"[5,7,5]: {br2.topology}  {dt2:.1f}s")
print("  count runs:", count_runs(br2))

# Criterion 8: asymmetric 4-pulse and symmetric 5-pulse
for lengths in ((5, 7, 5, 7, 5, 7, 7), (3, 5, 3, 5, 3, 5, 3, 5, 3),
                (3, 5, 3, 5, 4, 5, 3, 5, 3)):
    br3, dt3 = trace(lengths, False)
    folds = len(br3.folds())
    pfs = len(br3.pitchforks())
    print(f"{list(lengths)}: {br3.topology}  pts={len(br3.points)}  "
          f"folds={folds}  pfs={pfs}  {dt3:.1f}s")
