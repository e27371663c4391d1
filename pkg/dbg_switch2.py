"""Verbose replay of the truncated-lstsq switch loop at each pitchfork."""
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

for k in (0, 1):
    pf = br.pitchforks()[k]
    point = pf.data["point"]
    vec = pf.data["null_vector"]
    u_pf = point.profile.values
    mu_pf = point.mu
    jd = problem.jacobian(u_pf, mu_pf).to_dense()
    w = np.linalg.eigvalsh(jd)
    print(f"=== pf{k} mu={mu_pf:.12f} eigs near 0:",
          w[np.argsort(np.abs(w))[:3]])
    for eps in (3e-3, 1.5e-3):
        u = u_pf + eps * vec
        mu = mu_pf
        print(f"  -- eps={eps:g}")
        for it in range(25):
            r = problem.residual(u, mu)
            c = float(vec @ (u - u_pf)) - eps
            rn = np.abs(r).max()
            a = np.abs(u - u[::-1]).max()
            print(f"    it{it:2d} |r|={rn:.3e} asym={a:.3e} "
                  f"mu-mu_pf={mu - mu_pf:+.3e}")
            if rn <= settings.newton_tol and abs(c) <= 1e-12:
                print("    converged")
                break
            m = np.column_stack([problem.jacobian(u, mu).to_dense(),
                                 problem.mu_derivative(u, mu)])
            m = np.vstack([m, np.append(vec, 0.0)])
            rhs = np.append(-r, -c)
            if rn > 1e-8:
                sol, *_ = np.linalg.lstsq(m, rhs, rcond=1e-6)
            else:
                sol = np.linalg.solve(m, rhs)
            du, dmu = sol[:-1], float(sol[-1])
            scale = np.abs(du).max()
            if scale > 0.2:
                du = du * (0.2 / scale)
                dmu = dmu * (0.2 / scale)
            u = u + du
            mu = mu + dmu
        break
