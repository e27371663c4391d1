"""Probe fixed-mu shooting outcomes around pf0."""
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

pf = br.pitchforks()[0]
point = pf.data["point"]
vec = pf.data["null_vector"]
u_pf = point.profile.values
mu_pf = point.mu
ncfg = NewtonConfig(abs_tol=1e-13, max_iter=25)

for delta in (1e-4, 1e-3, 1e-2):
    for side in (-1.0, 1.0):
        mu = mu_pf + side * delta
        for amp in (0.05, 0.1, 0.2):
            guess = u_pf + amp * vec
            try:
                res = newton_solve(lambda x: problem.residual(x, mu),
                                   lambda x: problem.jacobian(x, mu),
                                   guess, ncfg)
            except NewtonFailure as exc:
                print(f"d={side*delta:+.0e} amp={amp:.2f}: fail {exc}")
                continue
            du = res.x - u_pf
            proj = float(vec @ du)
            asym = np.abs(res.x - res.x[::-1]).max()
            print(f"d={side*delta:+.0e} amp={amp:.2f}: conv it={res.iterations} "
                  f"proj={proj:+.3e} asym={asym:.2e} |du|={np.abs(du).max():.2e}")
