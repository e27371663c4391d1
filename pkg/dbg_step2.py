"""Trace the exact exception killing step 1 of the switched-branch trace."""
import traceback
from dataclasses import replace

import numpy as np

from pulse_atlas import cli, continuation
from pulse_atlas.config import ExperimentConfig
from pulse_atlas.continuation import LatticeSteadyStateProblem

D = 0.1
cfg = ExperimentConfig()
cfg = replace(cfg, model=replace(cfg.model, d=D),
              stability=replace(cfg.stability, enabled=False))
problem = LatticeSteadyStateProblem(d=D)
prof = cli._build_start(cfg, (5, 7, 5), problem)
center = cli._symmetry_center(prof)
settings = cli._branch_settings(cfg, center, snaking_detection=False)
start = cli._oriented_start(problem, prof, cfg.model.mu_start)
br = continuation.continue_branch(problem, start, settings)

orig = continuation._step_point
calls = {"n": 0}


def spy(problem, state, h, settings, prev=None):
    calls["n"] += 1
    try:
        out = orig(problem, state, h, settings, prev=prev)
        if calls["n"] <= 6:
            print(f"  call{calls['n']} h={h:g} s={state.s:.4f} "
                  f"t_mu={float(state.t[-1]):+.4f} -> ok its={out[2]}")
        return out
    except Exception as exc:
        print(f"  call{calls['n']} h={h:g} s={state.s:.4f} "
              f"t_mu={float(state.t[-1]):+.4f} -> {type(exc).__name__}: {exc}")
        if calls["n"] <= 3:
            traceback.print_exc(limit=6)
        raise


continuation._step_point = spy

pf = br.pitchforks()[0]
sw = continuation.branch_switch(problem, pf)
print(f"switched mu={sw.mu:.9f}")
asw = replace(settings, symmetric_center=None, detect_pitchforks=False,
              snaking_detection=False, max_steps=40000)
ab = continuation.continue_branch(problem, sw, asw)
print(f"result {ab.topology} pts={len(ab.points)}")
