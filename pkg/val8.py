"""Criteria 1 and 2: reversibility identity and fixed-point eigenvalues."""
import time

import numpy as np

from pulse_atlas import planar_map
from pulse_atlas.lattice import LatticeParams

# Criterion 1: max over 1e4 sampled points of |F^-1(x) - R F(R x)|_inf
# at d = 0.1 for mu in {0.1, 0.5, 0.9}.
rng = np.random.default_rng(7)
for mu in (0.1, 0.5, 0.9):
    params = LatticeParams(d=0.1, mu=mu)
    worst = 0.0
    pts = rng.uniform(-2.0, 3.0, size=(10, 10000, 2))[0]
    for xy in pts:
        p = planar_map.MapPoint(*xy)
        a = planar_map.map_backward(p, params)
        b = planar_map.reverser(planar_map.map_forward(
            planar_map.reverser(p), params))
        worst = max(worst, abs(a.u - b.u), abs(a.v - b.v))
    print(f"mu={mu}: reversibility defect {worst:.3e} "
          f"({'PASS' if worst <= 1e-12 else 'FAIL'})")

rep = planar_map.check_reversibility(LatticeParams(d=0.1, mu=0.5),
                                     n_samples=10000,
                                     rng=np.random.default_rng(11))
print("check_reversibility:", rep)

# Criterion 2: eigenvalues of both fixed points real and > 0 for all mu on a
# 0.001 grid over [0.05, 0.95]; lambda at origin for mu = 0.5 equals
# (7 + sqrt(45))/2 to 1e-12; runtime < 1 s.
t0 = time.time()
grid = np.arange(0.05, 0.95 + 1e-12, 0.001)
ok = True
for mu in grid:
    for which in ("origin", "u_star"):
        info = planar_map.fixed_point_eigen(LatticeParams(d=0.1, mu=mu), which)
        lams = (info.lambda_unstable, info.lambda_stable)
        if any(not np.isreal(v) or v <= 0 for v in lams):
            ok = False
elapsed = time.time() - t0
info = planar_map.fixed_point_eigen(LatticeParams(d=0.1, mu=0.5), "origin")
lam_big = info.lambda_unstable
target = (7.0 + np.sqrt(45.0)) / 2.0
print(f"grid real>0: {ok}, elapsed {elapsed:.2f}s "
      f"({'PASS' if ok and elapsed < 1.0 else 'FAIL'})")
print(f"lambda(origin, mu=0.5) = {lam_big:.15f} vs (7+sqrt45)/2 = "
      f"{target:.15f}, diff {abs(lam_big - target):.3e} "
      f"({'PASS' if abs(lam_big - target) <= 1e-12 else 'FAIL'})")
