"""Decompose the reduced-corrector step at the seed into singular directions."""
from dataclasses import replace

import numpy as np

from pulse_atlas import cli, continuation
from pulse_atlas.config import ExperimentConfig
from pulse_atlas.continuation import LatticeSteadyStateProblem

D = 0.15
cfg = ExperimentConfig()
cfg = replace(cfg, model=replace(cfg.model, d=D),
              stability=replace(cfg.stability, enabled=False))
problem = LatticeSteadyStateProblem(d=D)
prof = cli._build_start(cfg, (5, 7, 5), problem)
center = cli._symmetry_center(prof)
settings = cli._branch_settings(cfg, center, snaking_detection=False)
start = cli._oriented_start(problem, prof, cfg.model.mu_start)
br = continuation.continue_branch(problem, start, settings)

pf = br.pitchforks()[0]
point = pf.data["point"]
vec = np.array(pf.data["null_vector"])
u_pf = np.array(point.profile.values)
mu_pf = point.mu
n = u_pf.shape[0]
print(f"n={n} mu_pf={mu_pf:.9f} |vec|={np.linalg.norm(vec):.3e}")
rev = vec[::-1]
print(f"vec antisym defect |vec+rev|={np.abs(vec + rev).max():.3e}")

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
print(f"|odd part|={np.linalg.norm(coeff):.6f} "
      f"|even part|={np.linalg.norm(even.T @ vec):.3e}")
basis, _ = np.linalg.qr(np.column_stack([coeff, np.eye(half)]))
print(f"qr col0 vs coeff: {np.abs(basis[:, 0] - coeff / np.linalg.norm(coeff)).max():.3e} "
      f"(or flipped {np.abs(basis[:, 0] + coeff / np.linalg.norm(coeff)).max():.3e})")
odd_rest = odd @ basis[:, 1:half]
n_even = even.shape[1]

a = 5e-3
u = u_pf + a * vec
mu = mu_pf
r = problem.residual(u, mu)
jac = problem.jacobian(u, mu).to_dense()
m = np.column_stack([jac @ even, jac @ odd_rest, problem.mu_derivative(u, mu)])
U, S, Vt = np.linalg.svd(m)
print(f"sigma tail: {S[-6:]}")
proj = U.T @ (-r)
comp = proj / S
print("per-direction solution coefficients (last 6):")
for k in range(n - 6, n):
    z = Vt[k]
    print(f"  sigma={S[k]:.3e} |<u_k,-r>|={abs(proj[k]):.3e} coeff={comp[k]:+.3e} "
          f"z_mu={z[-1]:+.3f} |z_even|={np.linalg.norm(z[:n_even]):.3f} "
          f"|z_odd|={np.linalg.norm(z[n_even:-1]):.3f}")

dz = Vt.T @ comp
du = even @ dz[:n_even] + odd_rest @ dz[n_even:-1]
print(f"full |du|={np.abs(du).max():.3e} dmu={dz[-1]:+.3e}")

# Same with the smallest singular direction truncated.
comp_t = comp.copy()
comp_t[-1] = 0.0
dz_t = Vt.T @ comp_t
du_t = even @ dz_t[:n_even] + odd_rest @ dz_t[n_even:-1]
dmu_t = float(dz_t[-1])
print(f"trunc1 |du|={np.abs(du_t).max():.3e} dmu={dmu_t:+.3e} -> "
      f"|r_new|={np.abs(problem.residual(u + du_t, mu + dmu_t)).max():.3e}")

# And the raw jacobian spectrum near zero for reference.
w = np.linalg.eigvalsh(0.5 * (jac + jac.T))
w_small = w[np.argsort(np.abs(w))[:5]]
print(f"jac eigs nearest 0: {w_small}")
