"""Find a parameter regime where the pitchfork-fold separation is workable."""
from dataclasses import replace

import numpy as np

from pulse_atlas import cli, continuation, pulses
from pulse_atlas.config import ExperimentConfig, ModelConfig
from pulse_atlas.continuation import LatticeSteadyStateProblem

for lengths, d in (((3, 5, 3), 0.2), ((3, 5, 3), 0.15), ((5, 7, 5), 0.15)):
    cfg = ExperimentConfig()
    cfg = replace(cfg, model=replace(cfg.model, d=d),
                  stability=replace(cfg.stability, enabled=False))
    problem = LatticeSteadyStateProblem(d=d)
    try:
        prof = cli._build_start(cfg, lengths, problem)
    except Exception as exc:
        print(f"{lengths} d={d}: start failed: {exc}")
        continue
    center = cli._symmetry_center(prof)
    settings = cli._branch_settings(cfg, center, snaking_detection=False)
    start = cli._oriented_start(problem, prof, cfg.model.mu_start)
    br = continuation.continue_branch(problem, start, settings)
    print(f"{lengths} d={d}: {br.topology} folds={len(br.folds())} "
          f"pfs={len(br.pitchforks())}")
    for k, pf in enumerate(br.pitchforks()):
        point = pf.data["point"]
        u_pf = np.array(point.profile.values)
        jd = problem.jacobian(u_pf, point.mu).to_dense()
        w = np.linalg.eigvalsh(jd)
        near = w[np.argsort(np.abs(w))[:2]]
        try:
            sw = continuation.branch_switch(problem, pf)
            du = sw.profile.values - u_pf
            print(f"  pf{k} mu={point.mu:.8f} eigs={near} -> switch ok "
                  f"mu={sw.mu:.8f} amp={np.abs(du).max():.4f}")
        except Exception as exc:
            print(f"  pf{k} mu={point.mu:.8f} eigs={near} -> {exc}")
