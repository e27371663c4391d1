"""Find an asymmetric 4-pulse spec that traces to a closed curve quickly."""
import time
from dataclasses import replace

from pulse_atlas import cli, continuation
from pulse_atlas.config import ExperimentConfig
from pulse_atlas.continuation import LatticeSteadyStateProblem

for lengths in ((3, 5, 3, 5, 3, 5, 5), (3, 5, 3, 5, 3, 7, 3),
                (3, 5, 3, 7, 3, 5, 3), (5, 7, 5, 7, 5, 9, 5)):
    cfg = ExperimentConfig()
    cfg = replace(cfg, stability=replace(cfg.stability, enabled=False))
    problem = LatticeSteadyStateProblem(d=cfg.model.d)
    prof = cli._build_start(cfg, lengths, problem)
    center = cli._symmetry_center(prof)
    settings = cli._branch_settings(cfg, center, snaking_detection=False)
    start = cli._oriented_start(problem, prof, cfg.model.mu_start)
    t0 = time.time()
    br = continuation.continue_branch(problem, start, settings)
    dt = time.time() - t0
    print(f"{list(lengths)}: {br.topology}  pts={len(br.points)}  "
          f"folds={len(br.folds())}  pfs={len(br.pitchforks())}  {dt:.1f}s",
          flush=True)
