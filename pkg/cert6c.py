"""Identify the unknown crossings of the genuine [5,G,5] isola: step around
its right folds onto the far arm and walk back to mu = 0.5."""
import numpy as np

from pulse_atlas import continuation, pulses
from pulse_atlas.continuation import LatticeSteadyStateProblem
from pulse_atlas.linalg import NewtonConfig, NewtonFailure, newton_solve

D = 0.1
MU0 = 0.5
CFG = NewtonConfig(abs_tol=1e-12, max_iter=20)


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
        trial = mu + sgn * dh
        try:
            u = solve_at(problem, u, trial)
        except NewtonFailure:
            step *= 0.5
            if step < 1e-9:
                raise
            continue
        mu = trial
    return u


def far_arm_crossing(problem, near_u, uf, muf, back=3e-4):
    """Return the mu=0.5 profile of the fold arm opposite the one through
    near_u (right fold: both arms live below muf)."""
    v = null_vector(problem, uf, muf)
    target = muf - back
    arms = []
    for s in (+1.0, -1.0):
        for amp in (0.02, 0.01, 0.04, 0.005):
            try:
                cand = solve_at(problem, uf + s * amp * v, target)
            except NewtonFailure:
                continue
            if not any(np.abs(cand - a).max() < 1e-8 for a in arms):
                arms.append(cand)
            break
    if len(arms) != 2:
        raise RuntimeError(f"found {len(arms)} arms at fold {muf:.8f}")
    near = march_to(problem, np.array(near_u), MU0, target)
    d0 = float(np.abs(arms[0] - near).max())
    d1 = float(np.abs(arms[1] - near).max())
    far = arms[1] if d0 < d1 else arms[0]
    return march_to(problem, far, target, MU0)


def show(profile, n_min, label):
    nz = [(n_min + i, v) for i, v in enumerate(profile) if abs(v) > 5e-3]
    body = "  ".join(f"{k}:{v:.3f}" for k, v in nz)
    print(f"  {label}: {body}")


G = 7
problem = LatticeSteadyStateProblem(d=D)
spec = pulses.PulseSpec((5, G, 5))
base = pulses.singular_profile(spec, mu=MU0)
p0 = pulses.continue_in_d(base, MU0, D)
v1 = np.array(base.values)
v1[spec.pad + 5] = MU0
v1[spec.pad + G + 4] = MU0
from pulse_atlas.lattice import LatticeProfile
p1 = pulses.continue_in_d(
    LatticeProfile(n_min=base.n_min, values=v1, boundary=base.boundary),
    MU0, D)

n_min = p0.n_min
n = p0.values.shape[0]
center = n_min + (n - 1) / 2.0

show(p0.values, n_min, "P0 @0.5")
show(p1.values, n_min, "P1 @0.5")

# fold2 via P1 up, fold4 via P0 up
u2, m2 = continuation.approach_fold(problem, p1.values, MU0, +1)
uf2, muf2 = continuation.locate_fold(problem, u2, m2, n_min, center)
print(f"fold2 mu = {muf2:.12f}")
X = far_arm_crossing(problem, p1.values, uf2, muf2)
show(X, n_min, "X  @0.5")

u4, m4 = continuation.approach_fold(problem, p0.values, MU0, +1)
uf4, muf4 = continuation.locate_fold(problem, u4, m4, n_min, center)
print(f"fold4 mu = {muf4:.12f}")
Y = far_arm_crossing(problem, p0.values, uf4, muf4)
show(Y, n_min, "Y  @0.5")

# Both X and Y should march down to the same fold3.
ux, mx = continuation.approach_fold(problem, X, MU0, -1)
ufx, mufx = continuation.locate_fold(problem, ux, mx, n_min, center)
uy, my = continuation.approach_fold(problem, Y, MU0, -1)
ufy, mufy = continuation.locate_fold(problem, uy, my, n_min, center)
print(f"X down fold mu = {mufx:.12f}")
print(f"Y down fold mu = {mufy:.12f}")
print(f"fold3 shared: dmu = {abs(mufx-mufy):.3e}, "
      f"du = {float(np.abs(ufx-ufy).max()):.3e}")
print("traced-loop fold3 was 0.4548792227")
