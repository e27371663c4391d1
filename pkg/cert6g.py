"""Final criterion-6 measurement: fold/pitchfork pairs at the four turning
regions of the [5,G,5] hourglass for G in {7, 9, 11}."""
import numpy as np

from pulse_atlas import continuation, pulses
from pulse_atlas.continuation import LatticeSteadyStateProblem
from pulse_atlas.lattice import LatticeProfile

D = 0.1
MU0 = 0.5


def patterns(G):
    spec = pulses.PulseSpec((5, G, 5))
    base = pulses.singular_profile(spec, mu=MU0)
    p = spec.pad
    v0 = np.array(base.values)

    v1 = v0.copy()                 # inner fronts bond-centered
    v1[p + 5] = MU0
    v1[p + G + 4] = MU0

    vx = np.zeros_like(v0)         # both pulses fully bond-centered, shifted
    vx[p] = MU0
    vx[p + 1:p + 5] = 1.0
    vx[p + 5] = MU0
    vx[p + G + 4] = MU0
    vx[p + G + 5:p + G + 9] = 1.0
    vx[p + G + 9] = MU0

    out = {}
    for name, v in (("P0", v0), ("P1", v1), ("X", vx)):
        out[name] = LatticeProfile(n_min=base.n_min, values=v,
                                   boundary=base.boundary)
    return out


problem = LatticeSteadyStateProblem(d=D)
results = {}
for G in (7, 9, 11):
    print(f"G = {G}")
    pats = patterns(G)
    legs = {k: pulses.continue_in_d(v, MU0, D) for k, v in pats.items()}
    n_min = legs["P0"].n_min
    n = legs["P0"].values.shape[0]
    center = n_min + (n - 1) / 2.0
    plan = [("f12", "P0", -1), ("f41", "P1", +1),
            ("fX ", "X", -1), ("f23", "P0", +1)]
    deltas = []
    quad = []
    for tag, name, direction in plan:
        u, mu = continuation.approach_fold(problem, legs[name].values,
                                           MU0, direction)
        uf, muf = continuation.locate_fold(problem, u, mu, n_min, center)
        upf, mupf = continuation.locate_pitchfork(problem, u, mu, n_min, center)
        dd = float(np.hypot(np.linalg.norm(upf - uf), mupf - muf))
        deltas.append(dd)
        quad.append(muf)
        print(f"  {tag}: fold mu = {muf:.12f}  pf mu = {mupf:.12f}  "
              f"dmu = {abs(mupf-muf):.3e}  delta = {dd:.6e}")
    dG = max(deltas)
    results[G] = dG
    print(f"  quadruple: " + " ".join(f"{m:.10f}" for m in quad))
    print(f"  delta({G}) = {dG:.6e}")

print()
print(f"delta(9)/delta(7)  = {results[9]/results[7]:.4f}")
print(f"delta(11)/delta(9) = {results[11]/results[9]:.4f}")
