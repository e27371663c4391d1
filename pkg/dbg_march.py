"""Watch the equilibrated reduced corrector during the amplitude march."""
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
basis, _ = np.linalg.qr(np.column_stack([coeff, np.eye(half)]))
odd_rest = odd @ basis[:, 1:half]
n_even = even.shape[1]


def correct(u0, mu0, label, verbose=True):
    u, mu = u0, mu0
    rn = np.abs(problem.residual(u, mu)).max()
    for it in range(40):
        if rn <= settings.newton_tol:
            return u, mu
        jac = problem.jacobian(u, mu).to_dense()
        m = np.column_stack([jac @ even, jac @ odd_rest,
                             problem.mu_derivative(u, mu)])
        row_scale = np.abs(m).max(axis=1)
        row_scale[row_scale == 0.0] = 1.0
        dz = np.linalg.solve(m / row_scale[:, None],
                             -problem.residual(u, mu) / row_scale)
        du = even @ dz[:n_even] + odd_rest @ dz[n_even:-1]
        dmu = float(dz[-1])
        if verbose:
            print(f"    {label} it{it} |r|={rn:.3e} |du|={np.abs(du).max():.3e} "
                  f"dmu={dmu:+.3e}")
        lam, stepped = 1.0, False
        while lam >= 1.0 / 64.0:
            rt = np.abs(problem.residual(u + lam * du, mu + lam * dmu)).max()
            if rt < rn or rt <= settings.newton_tol:
                u, mu, rn = u + lam * du, mu + lam * dmu, rt
                stepped = True
                break
            lam *= 0.5
        if not stepped:
            if verbose:
                print(f"    {label} it{it}: no descent at |r|={rn:.3e}")
            return None
    if verbose:
        print(f"    {label}: out of iterations |r|={rn:.3e}")
    return None


for a in (5e-3, 5e-4, 5e-5, 5e-6):
    print(f"--- direct a={a:g}")
    res = correct(u_pf + a * vec, mu_pf, f"a={a:g}")
    if res is not None:
        u, mu = res
        print(f"    OK mu-mu_pf={mu - mu_pf:+.3e} "
              f"|u-u_pf|={np.abs(u - u_pf).max():.3e}")
