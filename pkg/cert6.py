"""Certify the fold/pitchfork quadruples of the [5,G,5] isolas (hop-free)."""
import numpy as np

from pulse_atlas import continuation, pulses
from pulse_atlas.continuation import LatticeSteadyStateProblem
from pulse_atlas.lattice import LatticeProfile

D = 0.1
MU0 = 0.5

def leg_patterns(G):
    """d=0 value patterns for the four legs of the [5,G,5] isola.

    Frame comes from singular_profile([5,G,5]); plateau1 p..p+4,
    gap p+5..p+G+4, plateau2 p+G+5..p+G+9 with p = pad.
    P0: plain [1^5 0^G 1^5]            (down -> fold1, up -> fold4)
    P1: inner gap edges at 1/2         (up -> fold2)
    P2: all four front sites at 1/2    (down -> fold3)
    """
    spec = pulses.PulseSpec((5, G, 5))
    base = pulses.singular_profile(spec, mu=MU0)
    p = spec.pad
    v0 = np.array(base.values)

    v1 = v0.copy()
    v1[p + 5] = MU0        # first interior gap site
    v1[p + G + 4] = MU0    # last interior gap site
    # shrink plateau? no: P1 = [1^5 (1/2) 0^(G-2) (1/2) 1^5]

    v2 = v0.copy()
    v2[p - 1] = MU0        # outer edge left of plateau1
    v2[p + 5] = MU0
    v2[p + G + 4] = MU0
    v2[p + G + 10] = MU0   # outer edge right of plateau2

    out = {}
    for name, v in (("P0", v0), ("P1", v1), ("P2", v2)):
        out[name] = LatticeProfile(n_min=base.n_min, values=v,
                                   boundary=base.boundary)
    return out


def march_and_locate(problem, prof, direction, n_min, center, tag):
    u, mu = continuation.approach_fold(problem, prof.values, MU0, direction)
    uf, muf = continuation.locate_fold(problem, u, mu, n_min, center)
    up, mup = continuation.locate_pitchfork(problem, u, mu, n_min, center)
    delta = float(np.hypot(np.linalg.norm(up - uf), mup - muf))
    print(f"  {tag}: march end mu={mu:.10f}  fold mu={muf:.12f}  "
          f"pf mu={mup:.12f}  dmu={abs(mup-muf):.3e}  delta={delta:.6e}")
    return muf, mup, delta


problem = LatticeSteadyStateProblem(d=D)
results = {}
for G in (7, 9, 11):
    print(f"G = {G}")
    pats = leg_patterns(G)
    legs = {}
    for name, prof in pats.items():
        legs[name] = pulses.continue_in_d(prof, MU0, D)
    n_min = legs["P0"].n_min
    n = legs["P0"].values.shape[0]
    center = n_min + (n - 1) / 2.0
    rows = []
    rows.append(march_and_locate(problem, legs["P0"], -1, n_min, center, "fold1 (P0 down)"))
    rows.append(march_and_locate(problem, legs["P1"], +1, n_min, center, "fold2 (P1 up)  "))
    rows.append(march_and_locate(problem, legs["P2"], -1, n_min, center, "fold3 (P2 down)"))
    rows.append(march_and_locate(problem, legs["P0"], +1, n_min, center, "fold4 (P0 up)  "))
    dG = max(r[2] for r in rows)
    results[G] = (rows, dG)
    print(f"  delta({G}) = {dG:.6e}")

print()
for Ga, Gb in ((7, 9), (9, 11)):
    ra = results[Ga][1]
    rb = results[Gb][1]
    print(f"delta({Gb})/delta({Ga}) = {rb/ra:.4f}")

print()
print("G7 traced-loop reference folds: 0.4551104005 0.5447557296 0.4548792227 0.5441531604")
print("G9 certified-trace folds:      0.4550934269 0.5447572930 0.4548606558 0.5441528276")
