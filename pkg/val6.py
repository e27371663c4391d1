"""Criterion 11: heteroclinic loop closure at d = 0.05 vs tangency values."""
import time

import numpy as np

from pulse_atlas import planar_map

D = 0.05

t0 = time.time()
left = planar_map.find_tangency(D, (0.05, 0.5))
print(f"left tangency mu- = {left.mu_star:.10f} width={left.bracket_width:.2e} "
      f"{time.time()-t0:.1f}s", flush=True)
t0 = time.time()
right = planar_map.find_tangency(D, (0.5, 0.95))
print(f"right tangency mu+ = {right.mu_star:.10f} width={right.bracket_width:.2e} "
      f"{time.time()-t0:.1f}s", flush=True)
print(f"|mu- + mu+ - 1| = {abs(left.mu_star + right.mu_star - 1.0):.3e}",
      flush=True)

margin = 0.02
grid = np.linspace(left.mu_star - margin, right.mu_star + margin, 400)
t0 = time.time()
trace = planar_map.verify_heteroclinic_loop(D, grid)
print(f"loop: closed={trace.closed} gap={trace.gap:.3e} "
      f"fragments={trace.fragments} {time.time()-t0:.1f}s", flush=True)
for turn in trace.turns:
    mu_t = turn["mu"]
    ref = left.mu_star if turn["end"] == "lower" else right.mu_star
    print(f"  turn {turn['end']}: mu={mu_t:.10f} vs tangency {ref:.10f} "
          f"diff={abs(mu_t - ref):.3e} gap={turn['gap']:.3e}", flush=True)
ok = (trace.closed and trace.gap < 1e-3
      and all(abs(t["mu"] - (left.mu_star if t["end"] == "lower"
                             else right.mu_star)) <= 1e-6
              for t in trace.turns)
      and len(trace.turns) == 2)
print("criterion 11:", "PASS" if ok else "FAIL")
