"""Seal the G=7 isola: precise arm enumeration at the remaining two folds
must close the loop P1 - P0 - Y - C and give the certified quadruple."""
import numpy as np

from pulse_atlas import continuation, pulses
from pulse_atlas.continuation import LatticeSteadyStateProblem
from pulse_atlas.lattice import LatticeProfile
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


def far_arm(problem, u_end, mu_end, uf, muf, side, n_min, center, delta=1e-5):
    """The genuine opposite arm of the fold (uf, muf): the distinct nearby
    solution on the far side of the null direction whose own fold matches
    (uf, muf) to machine precision."""
    v = null_vector(problem, uf, muf)
    a_in = float(v @ (u_end - uf))
    s_near = 1.0 if a_in > 0 else -1.0
    c_est = abs(muf - mu_end) / max(a_in * a_in, 1e-30)
    a0 = np.sqrt(delta / c_est)
    mu_t = muf - side * delta
    for f in (1.0, 0.5, 2.0, 0.25, 4.0):
        try:
            cand = solve_at(problem, uf - s_near * f * a0 * v, mu_t)
        except NewtonFailure:
            continue
        if np.sign(float(v @ (cand - uf))) == s_near:
            continue
        ue, me = continuation.approach_fold(problem, cand, mu_t, side)
        ufi, mufi = continuation.locate_fold(problem, ue, me, n_min, center)
        if abs(mufi - muf) < 1e-12 and float(np.abs(ufi - uf).max()) < 1e-10:
            return cand, mu_t
    raise RuntimeError(f"no machine-precision far arm at fold {muf:.12f}")


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
p1 = pulses.continue_in_d(
    LatticeProfile(n_min=base.n_min, values=v1, boundary=base.boundary),
    MU0, D)

# Reference folds
uA, mA = continuation.approach_fold(problem, p0.values, MU0, +1)
uf4, muf4 = continuation.locate_fold(problem, uA, mA, n_min, center)
uB, mB = continuation.approach_fold(problem, p1.values, MU0, +1)
uf2, muf2 = continuation.locate_fold(problem, uB, mB, n_min, center)
print(f"f23 (P0 up) = {muf4:.15f}")
print(f"f41 (P1 up) = {muf2:.15f}")

# Step 1: far arm of f23 -> Y, march down -> f34
farY, mu_tY = far_arm(problem, uA, mA, uf4, muf4, +1, n_min, center)
Y = march_to(problem, farY, mu_tY, MU0)
show(Y, n_min, "Y @0.5")
uY, mY = continuation.approach_fold(problem, Y, MU0, -1)
uf34, muf34 = continuation.locate_fold(problem, uY, mY, n_min, center)
print(f"f34 (Y down) = {muf34:.15f}")

# Step 2: far arm of f34 -> C, march up: must hit f41
farC, mu_tC = far_arm(problem, uY, mY, uf34, muf34, -1, n_min, center)
C = march_to(problem, farC, mu_tC, MU0)
show(C, n_min, "C @0.5")
uC, mC = continuation.approach_fold(problem, C, MU0, +1)
ufC, mufC = continuation.locate_fold(problem, uC, mC, n_min, center)
print(f"C up fold    = {mufC:.15f}")
print(f"   vs f41: dmu = {mufC - muf2:+.3e}, |du| = "
      f"{float(np.abs(ufC - uf2).max()):.3e}")

# Step 3: cross-check, far arm of f41 from the P1 side must be C
farX, mu_tX = far_arm(problem, uB, mB, uf2, muf2, +1, n_min, center)
X2 = march_to(problem, farX, mu_tX, MU0)
show(X2, n_min, "far(f41) @0.5")
print(f"far(f41) vs C: |du| = {float(np.abs(X2 - C).max()):.3e}")

# Step 4: close downward, far arm of f12 from P0 must be P1
uD, mD = continuation.approach_fold(problem, p0.values, MU0, -1)
uf1, muf1 = continuation.locate_fold(problem, uD, mD, n_min, center)
print(f"f12 (P0 down) = {muf1:.15f}")
farP, mu_tP = far_arm(problem, uD, mD, uf1, muf1, -1, n_min, center)
P1b = march_to(problem, farP, mu_tP, MU0)
print(f"far(f12) vs P1: |du| = {float(np.abs(P1b - p1.values).max()):.3e}")
print()
print(f"certified quadruple: {muf1:.12f} {muf2:.12f} {muf34:.12f} {muf4:.12f}")
