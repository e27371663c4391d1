"""Measure the predictor-pull rejection for the switched-branch first step."""
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
asw = replace(settings, symmetric_center=None, detect_pitchforks=False,
              snaking_detection=False, max_steps=40000)

pf = br.pitchforks()[0]
sw = continuation.branch_switch(problem, pf)
u0 = np.array(sw.profile.values)
t0 = np.asarray(sw.tangent, dtype=float)
t0 = t0 / np.linalg.norm(t0)
state = _State(u=u0.copy(), mu=sw.mu, t=t0, s=0.0)
vec = np.array(pf.data["null_vector"])
u_pf = np.array(pf.data["point"].profile.values)

amp0 = float(vec @ (u0 - u_pf))
print(f"switched: mu={sw.mu:.9f} amp={amp0:+.5f}")
for h in (0.004, 0.002, 0.001, 5e-4, 2.5e-4):
    u1, mu1, its = _step_point(problem, state, h, asw)
    pull_u = np.linalg.norm(u1 - (u0 + h * t0[:-1]))
    pull_mu = mu1 - (sw.mu + h * float(t0[-1]))
    pull = float(np.hypot(pull_u, pull_mu))
    amp1 = float(vec @ (u1 - u_pf))
    print(f"h={h:g}: its={its} amp={amp1:+.5f} dmu={mu1 - sw.mu:+.3e} "
          f"pull_u={pull_u:.3e} pull_mu={pull_mu:+.3e} "
          f"pull/h={pull / h:.3f} reject={pull > 0.75 * h}")
