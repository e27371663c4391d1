"""Walk the [5,G,5] isola fold to fold with validated arm switches and
confirm closure, yielding certified fold/pitchfork quadruples."""
import sys
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
            if step < 1e-10:
                raise
            continue
        mu = trial
    return u


def round_fold(problem, u_in, mu_in, n_min, center, side):
    """From a point marching toward a fold (side=+1: right fold, arms below;
    side=-1: left fold, arms above), locate the fold, hop to the far arm with
    a curvature-scaled punch, validate the landing by marching back to the
    same fold, and return (fold_u, fold_mu, far_u, far_mu)."""
    u_end, mu_end = continuation.approach_fold(problem, u_in, mu_in, side)
    uf, muf = continuation.locate_fold(problem, u_end, mu_end, n_min, center)
    v = null_vector(problem, uf, muf)
    a_in = float(v @ (u_end - uf))
    c_est = abs(muf - mu_end) / max(a_in * a_in, 1e-30)
    s_near = np.sign(a_in) if a_in != 0 else 1.0
    for delta in (1e-5, 4e-5, 2.5e-6):
        a_far = -s_near * np.sqrt(delta / c_est)
        mu_t = muf - side * delta
        try:
            far = solve_at(problem, uf + a_far * v, mu_t)
        except NewtonFailure:
            continue
        if np.sign(float(v @ (far - uf))) == s_near:
            continue  # fell back on the near arm
        # validation: the far arm must march back to this same fold
        ue2, me2 = continuation.approach_fold(problem, far, mu_t, side)
        uf2, muf2 = continuation.locate_fold(problem, ue2, me2, n_min, center)
        if abs(muf2 - muf) < 1e-8 and float(np.abs(uf2 - uf).max()) < 1e-6:
            return uf, muf, far, mu_t
    raise RuntimeError(f"could not validate far arm at fold {muf:.10f}")


def show(profile, n_min, label):
    nz = [(n_min + i, v) for i, v in enumerate(profile) if abs(v) > 5e-3]
    body = "  ".join(f"{k}:{v:.2f}" for k, v in nz)
    print(f"    {label}: {body}")


def walk(G, verbose=True):
    problem = LatticeSteadyStateProblem(d=D)
    spec = pulses.PulseSpec((5, G, 5))
    base = pulses.singular_profile(spec, mu=MU0)
    p0 = pulses.continue_in_d(base, MU0, D)
    n_min = p0.n_min
    n = p0.values.shape[0]
    center = n_min + (n - 1) / 2.0

    print(f"G = {G}")
    u = np.array(p0.values)
    mu = MU0
    side = +1
    folds = []
    crossings = [np.array(p0.values)]
    for k in range(4):
        uf, muf, far, mu_t = round_fold(problem, u, mu, n_min, center, side)
        folds.append((muf, uf))
        cross = march_to(problem, far, mu_t, MU0)
        crossings.append(cross)
        if verbose:
            print(f"  fold {k+1}: mu = {muf:.12f}")
            show(cross, n_min, f"crossing {k+1}")
        u, mu = cross, MU0
        side = -side
    gap = float(np.abs(crossings[-1] - crossings[0]).max())
    print(f"  closure gap after 4 folds: {gap:.3e}")
    quad = [m for m, _ in folds]
    print(f"  quadruple: {quad[0]:.10f} {quad[1]:.10f} {quad[2]:.10f} {quad[3]:.10f}")

    # pitchforks adjacent to each fold, and the point-space separations
    deltas = []
    for k, (muf, uf) in enumerate(folds):
        upf, mupf = continuation.locate_pitchfork(problem, uf, muf, n_min, center)
        dd = float(np.hypot(np.linalg.norm(upf - uf), mupf - muf))
        deltas.append(dd)
        print(f"  pf {k+1}: mu = {mupf:.12f}  dmu = {abs(mupf-muf):.3e}  "
              f"delta = {dd:.6e}")
    print(f"  delta({G}) = {max(deltas):.6e}")
    return quad, max(deltas)


out = {}
for G in (7, 9, 11):
    out[G] = walk(G)
print()
print(f"delta(9)/delta(7)  = {out[9][1]/out[7][1]:.4f}")
print(f"delta(11)/delta(9) = {out[11][1]/out[9][1]:.4f}")
