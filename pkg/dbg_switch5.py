"""Probe big-leap fixed-mu shooting from each pitchfork of the isola."""
from dataclasses import replace

import numpy as np

from pulse_atlas import cli, continuation
from pulse_atlas.config import ExperimentConfig
from pulse_atlas.continuation import LatticeSteadyStateProblem
from pulse_atlas.linalg import NewtonConfig, NewtonFailure, newton_solve

cfg = ExperimentConfig()
cfg = replace(cfg, stability=replace(cfg.stability, enabled=False))
problem = LatticeSteadyStateProblem(d=cfg.model.d)
prof = cli._build_start(cfg, (5, 7, 5), problem)
center = cli._symmetry_center(prof)
settings = cli._branch_settings(cfg, center, snaking_detection=False)
start = cli._oriented_start(problem, prof, cfg.model.mu_start)
br = continuation.continue_branch(problem, start, settings)
ncfg = NewtonConfig(abs_tol=1e-12, max_iter=30)

for k, pf in enumerate(br.pitchforks()):
    point = pf.data["point"]
    vec = pf.data["null_vector"]
    u_pf = np.array(point.profile.values)
    mu_pf = point.mu
    inward = 1.0 if mu_pf < 0.5 else -1.0
    print(f"=== pf{k} mu={mu_pf:.8f}")
    for delta in (0.005, 0.02, 0.045):
        for amp in (0.1, 0.2, 0.3):
            mu = mu_pf + inward * delta
            guess = u_pf + amp * vec
            try:
                res = newton_solve(lambda x: problem.residual(x, mu),
                                   lambda x: problem.jacobian(x, mu),
                                   guess, ncfg)
            except NewtonFailure:
                print(f"  d={delta:.3f} A={amp:.2f}: no convergence")
                continue
            du = res.x - u_pf
            proj = float(vec @ du)
            odd_part = 0.5 * (du - du[::-1])
            ortho = float(np.linalg.norm(odd_part - proj * vec * 0.5 * 2))
            asym = np.abs(res.x - res.x[::-1]).max()
            print(f"  d={delta:.3f} A={amp:.2f}: it={res.iterations} "
                  f"proj={proj:+.3f} ortho={ortho:.3f} asym={asym:.3f} "
                  f"|du|={np.abs(du).max():.3f}")
