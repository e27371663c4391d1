"""Disambiguate the [5,G,5] isola loop: march all four symmetric crossing
patterns both ways, locate each fold, and pair arcs that share a fold."""
import numpy as np

from pulse_atlas import continuation, pulses
from pulse_atlas.continuation import LatticeSteadyStateProblem
from pulse_atlas.lattice import LatticeProfile

D = 0.1
MU0 = 0.5


def all_patterns(G):
    spec = pulses.PulseSpec((5, G, 5))
    base = pulses.singular_profile(spec, mu=MU0)
    p = spec.pad
    v0 = np.array(base.values)

    v1 = v0.copy()                    # inner fronts bond-centered
    v1[p + 5] = MU0
    v1[p + G + 4] = MU0

    v2 = v1.copy()                    # all four fronts bond-centered
    v2[p - 1] = MU0
    v2[p + G + 10] = MU0

    v3 = v0.copy()                    # outer fronts bond-centered
    v3[p - 1] = MU0
    v3[p + G + 10] = MU0

    frames = {}
    for name, v in (("P0", v0), ("P1", v1), ("P2", v2), ("P3", v3)):
        frames[name] = LatticeProfile(n_min=base.n_min, values=v,
                                      boundary=base.boundary)
    return frames


problem = LatticeSteadyStateProblem(d=D)
for G in (7, 9):
    print(f"G = {G}")
    frames = all_patterns(G)
    legs = {k: pulses.continue_in_d(v, MU0, D) for k, v in frames.items()}
    n_min = legs["P0"].n_min
    n = legs["P0"].values.shape[0]
    center = n_min + (n - 1) / 2.0
    folds = {}
    for name in ("P0", "P1", "P2", "P3"):
        for direction, tag in ((-1, "dn"), (+1, "up")):
            u, mu = continuation.approach_fold(problem, legs[name].values,
                                               MU0, direction)
            uf, muf = continuation.locate_fold(problem, u, mu, n_min, center)
            folds[(name, tag)] = (muf, uf)
            print(f"  {name} {tag}: fold mu = {muf:.12f}")
    keys = list(folds)
    print("  pairs sharing a fold (dmu < 1e-9 and ||du||_inf < 1e-6):")
    for i in range(len(keys)):
        for j in range(i + 1, len(keys)):
            mi, ui = folds[keys[i]]
            mj, uj = folds[keys[j]]
            if abs(mi - mj) < 1e-9 and float(np.abs(ui - uj).max()) < 1e-6:
                print(f"    {keys[i]} <-> {keys[j]}  (mu = {mi:.12f})")
