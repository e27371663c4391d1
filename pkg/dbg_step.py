"""Why does the first arclength step from a switched point fail?"""
from dataclasses import replace

import numpy as np

from pulse_atlas import cli, continuation
from pulse_atlas.config import ExperimentConfig
from pulse_atlas.continuation import LatticeSteadyStateProblem, _State, _step_point

D = 0.1
cfg = ExperimentConfig()
cfg = replace(cfg, model=replace(cfg.model, d=D),
              stability=replace(cfg.stability, enabled=False))
problem = LatticeSteadyStateProblem(d=D)
prof = cli._build_start(cfg, (5, 7, 5), problem)
center = cli._symmetry_center(prof)
settings = cli._branch_settings(cfg, center, snaking_detection=False)
start = cli._oriented_start(problem, prof, cfg.model.mu_start)
br = continuation.continue_branch(problem, start, settings)

asym_settings = replace(settings, symmetric_center=None, detect_pitchforks=False,
                        snaking_detection=False, max_steps=40000)

for idx, pf in enumerate(br.pitchforks()):
    print(f"--- pf{idx} mu={pf.mu_at:.8f}")
    bp = continuation.branch_switch(problem, pf, direction=1)
    u = np.array(bp.profile.values)
    asym = np.abs(u - u[::-1]).max()
    rn = np.abs(problem.residual(u, bp.mu)).max()
    print(f"    switched: mu={bp.mu:.9f} asym={asym:.3e} |r|={rn:.3e} "
          f"dmu_pf={bp.mu - pf.mu_at:+.3e}")
    t = np.array(bp.tangent)
    state = _State(u=u.copy(), mu=bp.mu, t=t.copy(), s=0.0)
    for ds in (0.01, 1e-3, 1e-4, 1e-5):
        try:
            u1, mu1, its = _step_point(problem, state, ds, asym_settings)
            a1 = np.abs(u1 - u1[::-1]).max()
            print(f"    ds={ds:g}: ok mu={mu1:.9f} asym={a1:.3e} its={its}")
        except Exception as exc:
            print(f"    ds={ds:g}: {type(exc).__name__}: {exc}")
