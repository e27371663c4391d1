"""Debug branch_switch failure at the isola pitchforks."""
from dataclasses import replace

import numpy as np

from pulse_atlas import cli, continuation
from pulse_atlas.config import ExperimentConfig
from pulse_atlas.continuation import LatticeSteadyStateProblem
from pulse_atlas.linalg import (BorderedSystem, SingularBorderedError,
                                SingularMatrixError, solve_bordered)

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
print("mu_pf", mu_pf, "|vec|", np.linalg.norm(vec),
      "antisym?", np.abs(vec + vec[::-1]).max())
print("residual at pf:", np.abs(problem.residual(u_pf, mu_pf)).max())
jac = problem.jacobian(u_pf, mu_pf).to_dense()
w = np.linalg.eigvalsh(jac)
print("eigs nearest 0:", w[np.argsort(np.abs(w))[:4]])

for eps in (3e-3, 1e-3, 1e-4):
    u = u_pf + eps * vec
    mu = mu_pf
    print(f"--- eps={eps:g}")
    for it in range(12):
        r = problem.residual(u, mu)
        c = float(vec @ (u - u_pf)) - eps
        print(f"  it{it} |r|={np.abs(r).max():.3e} c={c:.3e} mu={mu:.12f}")
        if np.abs(r).max() <= settings.newton_tol and abs(c) <= 1e-12:
            print("  converged")
            break
        system = BorderedSystem(core=problem.jacobian(u, mu),
                                border_col=problem.mu_derivative(u, mu),
                                border_row=vec, corner=0.0)
        try:
            du, dmu = solve_bordered(system, -r, -c)
        except (SingularBorderedError, SingularMatrixError) as exc:
            print("  bordered solve failed:", exc)
            break
        print(f"    |du|={np.abs(du).max():.3e} dmu={dmu:.3e}")
        u = u + du
        mu = mu + dmu
