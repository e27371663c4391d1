"""Trace the reduced-corrector iterations at pf0."""
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

pf = br.pitchforks()[0]
point = pf.data["point"]
vec = pf.data["null_vector"]
u_pf = np.array(point.profile.values)
mu_pf = point.mu
n = u_pf.shape[0]

half = n // 2
inv = 1.0 / np.sqrt(2.0)
even = np.zeros((n, n - half))
odd = np.zeros((n, half))
for i in range(half):
    even[i, i] = even[n - 1 - i, i] = inv
    odd[i, i] = inv
    odd[n - 1 - i, i] = -inv
if n % 2:
    even[half, n - half - 1] = 1.0
coeff = odd.T @ vec
print("norm coeff", np.linalg.norm(coeff))
basis, _ = np.linalg.qr(np.column_stack([coeff, np.eye(half)]))
print("qr col0 vs coeff:", np.abs(basis[:, 0] - coeff / np.linalg.norm(coeff)).max(),
      np.abs(basis[:, 0] + coeff / np.linalg.norm(coeff)).max())
odd_rest = odd @ basis[:, 1:half]
print("odd_rest shape", odd_rest.shape, "orthonormal?",
      np.abs(odd_rest.T @ odd_rest - np.eye(half - 1)).max(),
      "perp to vec?", np.abs(odd_rest.T @ vec).max())
n_even = even.shape[1]

for eps in (5e-3, 1e-3, 2e-4):
    print(f"=== eps={eps:g}")
    u = u_pf + eps * vec
    mu = mu_pf
    rn = np.abs(problem.residual(u, mu)).max()
    for it in range(40):
        print(f"it{it:2d} |r|={rn:.3e} mu-mu_pf={mu - mu_pf:+.3e} "
              f"amp={vec @ (u - u_pf):+.6f}")
        if rn <= settings.newton_tol:
            print("converged")
            break
        jac = problem.jacobian(u, mu).to_dense()
        m = np.column_stack([jac @ even, jac @ odd_rest,
                             problem.mu_derivative(u, mu)])
        dz = np.linalg.solve(m, -problem.residual(u, mu))
        du = even @ dz[:n_even] + odd_rest @ dz[n_even:-1]
        dmu = float(dz[-1])
        print(f"   cond={np.linalg.cond(m):.2e} |du|={np.abs(du).max():.3e} "
              f"dmu={dmu:+.3e}")
        lam, stepped = 1.0, False
        while lam >= 1.0 / 64.0:
            rt = np.abs(problem.residual(u + lam * du, mu + lam * dmu)).max()
            if rt < rn or rt <= settings.newton_tol:
                u = u + lam * du
                mu = mu + lam * dmu
                rn = rt
                stepped = True
                break
            lam *= 0.5
        if not stepped:
            print("   no descent")
            break
