"""Resolve the arm structure at the G=7 isola's deep right fold with full
precision: enumerate every sheet passing nearby and match arms by the fold
each one actually turns at."""
import numpy as np

from pulse_atlas import continuation, pulses
from pulse_atlas.continuation import LatticeSteadyStateProblem
from pulse_atlas.linalg import NewtonConfig, NewtonFailure, newton_solve

D = 0.1
MU0 = 0.5
CFG = NewtonConfig(abs_tol=1e-12, max_iter=20)
G = 7


def null_vector(problem, u, mu):
    J = problem.jacobian(u, mu).to_dense()
    w, V = np.linalg.eigh(J)
    return V[:, int(np.argmin(np.abs(w)))]


def solve_at(problem, u, mu):
    return newton_solve(lambda x: problem.residual(x, mu),
                        lambda x: problem.jacobian(x, mu), u, CFG).x


def march_to(problem, u, mu, target, step=2e-4):
    sgn = 1.0 if target > mu else -1.0
    while abs(target - mu) > 1e-14:
        dh = min(step, abs(target - mu))
        try:
            u = solve_at(problem, u, mu + sgn * dh)
        except NewtonFailure:
            step *= 0.5
            if step < 1e-10:
                raise
            continue
        mu += sgn * dh
    return u


def show(profile, n_min, label):
    nz = [(n_min + i, v) for i, v in enumerate(profile) if abs(v) > 5e-3]
    body = "  ".join(f"{k}:{v:.2f}" for k, v in nz)
    print(f"    {label}: {body}")


problem = LatticeSteadyStateProblem(d=D)
spec = pulses.PulseSpec((5, G, 5))
base = pulses.singular_profile(spec, mu=MU0)
p0 = pulses.continue_in_d(base, MU0, D)
n_min = p0.n_min
n = p0.values.shape[0]
center = n_min + (n - 1) / 2.0

v1 = np.array(base.values)
v1[spec.pad + 5] = MU0
v1[spec.pad + G + 4] = MU0
from pulse_atlas.lattice import LatticeProfile
p1 = pulses.continue_in_d(
    LatticeProfile(n_min=base.n_min, values=v1, boundary=base.boundary),
    MU0, D)

# A: P0 up -> fold4A
uA, mA = continuation.approach_fold(problem, p0.values, MU0, +1)
uf4, muf4 = continuation.locate_fold(problem, uA, mA, n_min, center)
print(f"fold4A (P0 up):  mu = {muf4:.15f}")

# B: P1 up -> fold2, far arm -> X, X down -> fold3, far arm -> Z, Z up -> ?
uB, mB = continuation.approach_fold(problem, p1.values, MU0, +1)
uf2, muf2 = continuation.locate_fold(problem, uB, mB, n_min, center)
print(f"fold2A (P1 up):  mu = {muf2:.15f}")


def collect_sheets(problem, u_end, mu_end, uf, muf, side, delta=1e-5):
    v = null_vector(problem, uf, muf)
    a_in = float(v @ (u_end - uf))
    s_near = 1.0 if a_in > 0 else -1.0
    c_est = abs(muf - mu_end) / max(a_in * a_in, 1e-30)
    a0 = np.sqrt(delta / c_est)
    mu_t = muf - side * delta
    sheets = []
    for s in (-s_near, s_near):
        for f in (1.0, 0.5, 2.0, 0.25, 4.0):
            try:
                cand = solve_at(problem, uf + s * f * a0 * v, mu_t)
            except NewtonFailure:
                continue
            if not any(np.abs(cand - c).max() < 1e-9 for c in sheets):
                sheets.append(cand)
    return v, s_near, mu_t, sheets


v4, s_near4, mu_t4, sheets4 = collect_sheets(problem, uA, mA, uf4, muf4, +1)
print(f"\nsheets at mu = muf4 - 1e-5 = {mu_t4:.10f}: {len(sheets4)}")
for i, sh in enumerate(sheets4):
    a = float(v4 @ (sh - uf4))
    side_lbl = "near" if np.sign(a) == s_near4 else "far "
    ue, me = continuation.approach_fold(problem, sh, mu_t4, +1)
    ufi, mufi = continuation.locate_fold(problem, ue, me, n_min, center)
    dmu = mufi - muf4
    dup = float(np.abs(ufi - uf4).max())
    print(f"  sheet {i} [{side_lbl}] a={a:+.4e}: own fold mu = {mufi:.15f} "
          f"(dmu vs fold4A = {dmu:+.3e}, |du| = {dup:.3e})")
    cross = march_to(problem, sh, mu_t4, MU0)
    show(cross, n_min, f"sheet {i} @0.5")

print("\npairwise sheet separations at mu_t4:")
for i in range(len(sheets4)):
    for j in range(i + 1, len(sheets4)):
        print(f"  |{i}-{j}| = {float(np.abs(sheets4[i]-sheets4[j]).max()):.3e}")
