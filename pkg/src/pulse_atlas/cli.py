"""Command-line experiment runner.

Subcommands build pulses, trace branches, compute stability, and analyze the
planar map, persisting branch CSVs, summary and manifest JSON, and plot
scripts.  Outputs are deterministic for a fixed config and seed: iteration
orders are fixed and all sampling flows from the single configured seed.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import continuation, lattice, planar_map, pulses, stability
from .config import ConfigError, ExperimentConfig, config_hash, parse_config
from .continuation import (
    Branch, BranchSwitchError, Closed, ContinuationSettings, EventKind,
    LatticeSteadyStateProblem, Open, Snaking,
)
from .lattice import LatticeParams
from .linalg import LinearSolveError, NewtonConfig, NewtonFailure, newton_solve
from .planar_map import BracketError, ManifoldBudgetError, ManifoldSettings
from .pulses import PulseContinuationError, PulseSpec

__all__ = ["RunManifest", "run", "emit_plot_script", "main"]

TOOL_VERSION = "0.1.0"

EXIT_OK = 0
EXIT_SOLVER = 2
EXIT_CONFIG = 3

_SOLVER_ERRORS = (NewtonFailure, PulseContinuationError, BranchSwitchError,
                  BracketError, ManifoldBudgetError, LinearSolveError)


@dataclass
class RunManifest:
    subcommand: str
    config_hash: str
    tool_version: str
    created: str
    seed: int
    threads: int
    files: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    status: str = "success"
    failure: str | None = None

    def add_file(self, path: Path, kind: str, rows: int | None = None):
        entry = {"name": path.name, "kind": kind,
                 "sha256": _sha256(path)}
        if rows is not None:
            entry["rows"] = rows
        self.files.append(entry)

    def write(self, out_dir: Path):
        path = out_dir / "manifest.json"
        _write_json(path, asdict(self))
        return path


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _json_default(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return str(obj)


def _write_json(path: Path, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _signature(values: np.ndarray, threshold: float) -> str:
    _, runs = pulses.run_lengths(values, threshold)
    if runs.size == 0:
        return ""
    return "-".join(str(int(r)) for r in runs)


def write_branch_csv(path: Path, branch: Branch, threshold: float = 0.5) -> int:
    """Branch CSV with columns step, s, mu, l2_norm, plateau_signature,
    unstable_count, event; floats carry 17 significant digits."""
    event_at: dict[int, list[str]] = {}
    s_values = np.array([p.s for p in branch.points])
    for ev in branch.events:
        idx = int(np.argmin(np.abs(s_values - ev.s_at)))
        event_at.setdefault(idx, []).append(ev.kind.value)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("step,s,mu,l2_norm,plateau_signature,unstable_count,event\n")
        for i, p in enumerate(branch.points):
            count = "" if p.unstable_count is None else str(p.unstable_count)
            events = "+".join(event_at.get(i, []))
            fh.write(f"{i},{_fmt(p.s)},{_fmt(p.mu)},{_fmt(p.measure)},"
                     f"{_signature(p.profile.values, threshold)},{count},{events}\n")
    return len(branch.points)


def write_profiles_npz(path: Path, branch: Branch):
    values = np.stack([p.profile.values for p in branch.points])
    mu = np.array([p.mu for p in branch.points])
    s = np.array([p.s for p in branch.points])
    np.savez_compressed(path, values=values, mu=mu, s=s,
                        n_min=branch.points[0].profile.n_min)


def write_arc_csv(path: Path, arc: planar_map.ManifoldArc) -> int:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("u,v,tau\n")
        rows = 0
        for ok, xy, tau in zip(arc.valid, arc.points, arc.params):
            if not ok:
                continue
            fh.write(f"{_fmt(xy[0])},{_fmt(xy[1])},{_fmt(tau)}\n")
            rows += 1
    return rows


def write_loop_csv(path: Path, trace: planar_map.LoopTrace) -> int:
    rows = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("mu,sigma,side\n")
        for mu, sigmas, sides in zip(trace.mu_values, trace.sigma_sets,
                                     trace.side_sets):
            for sig, side in zip(np.atleast_1d(sigmas), np.atleast_1d(sides)):
                fh.write(f"{_fmt(mu)},{_fmt(sig)},{int(side)}\n")
                rows += 1
    return rows


def _topology_dict(branch: Branch) -> dict:
    t = branch.topology
    if isinstance(t, Closed):
        return {"kind": "closed", "gap_mu": t.gap_mu,
                "gap_profile": t.gap_profile, "gap": t.gap,
                "tangent_alignment": t.tangent_alignment}
    if isinstance(t, Snaking):
        return {"kind": "snaking", "p": t.p, "growth": t.growth,
                "periods": t.periods}
    return {"kind": "open", "reason": t.reason}


def branch_summary(branch: Branch) -> dict:
    folds = [{"mu": e.mu_at, "s": e.s_at, "side": e.data.get("side"),
              "refined": e.refined} for e in branch.folds()]
    pitchforks = [{"mu": e.mu_at, "s": e.s_at, "sector": e.sector,
                   "refined": e.refined} for e in branch.pitchforks()]
    summary = {
        "points": len(branch.points),
        "arc_length": branch.points[-1].s if branch.points else 0.0,
        "topology": _topology_dict(branch),
        "folds": folds,
        "pitchforks": pitchforks,
        "warnings": list(branch.warnings),
        "stop_reason": branch.meta.get("stop_reason"),
    }
    closure = branch.meta.get("closure")
    if closure is not None:
        summary["closure_gap"] = max(closure["gap_mu"], closure["gap_profile"])
    periods = branch.meta.get("periods")
    if periods:
        summary["periods"] = periods
    return summary


def emit_plot_script(manifest: RunManifest, figure_id: str,
                     out_dir: Path) -> Path:
    """Write a gnuplot script drawing mu against the l2 norm for every branch
    file in the manifest, solid for stable arcs, dashed for unstable ones,
    and dots at folds."""
    out_dir = Path(out_dir)
    branches = [f for f in manifest.files if f["kind"] == "branch"]
    path = out_dir / f"figure-{figure_id}.gp"
    lines = [
        f"# figure: {figure_id}",
        "set datafile separator ','",
        "set key outside",
        "set xlabel 'mu'",
        "set ylabel 'l2 norm'",
    ]
    plots = []
    for i, entry in enumerate(branches):
        name = entry["name"]
        rows = entry.get("rows", 0)
        if rows < 2:
            lines.append(f"# warning: branch file {name} has no usable data")
            continue
        lt = i + 1
        label = name.replace(".csv", "")
        plots.append(
            f"'{name}' skip 1 using 3:(strcol(6) eq '' || column(6) == 0 ? $4 : 1/0) "
            f"with lines lt {lt} title '{label} stable'")
        plots.append(
            f"'{name}' skip 1 using 3:(strcol(6) ne '' && column(6) > 0 ? $4 : 1/0) "
            f"with lines dt 2 lt {lt} title '{label} unstable'")
        plots.append(
            f"'{name}' skip 1 using (strstrt(strcol(7), 'fold') > 0 ? $3 : 1/0):4 "
            f"with points pt 7 ps 1.5 lc black notitle")
    if plots:
        lines.append("plot \\")
        lines.append(", \\\n".join("  " + p for p in plots))
    else:
        lines.append("# warning: empty dataset, nothing to plot")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _build_start(cfg: ExperimentConfig, lengths: tuple[int, ...],
                 problem: LatticeSteadyStateProblem):
    spec = PulseSpec(lengths=lengths)
    singular = pulses.singular_profile(spec, mu=cfg.model.mu_start,
                                       interface=cfg.pulse.pattern == "interface")
    prof = pulses.continue_in_d(singular, cfg.model.mu_start, cfg.model.d)
    prof = pulses.embed_in_window(prof, cfg.domain.half_width)

    def res(u):
        return problem.residual(u, cfg.model.mu_start)

    def jac(u):
        return problem.jacobian(u, cfg.model.mu_start)

    polished = newton_solve(res, jac, prof.values,
                            NewtonConfig(abs_tol=1e-12, max_iter=10))
    return prof.with_values(polished.x)


def _symmetry_center(prof) -> float | None:
    sym = pulses.classify_symmetry(prof)
    if isinstance(sym, pulses.Asymmetric):
        return None
    return float(sym.center)


def _branch_settings(cfg: ExperimentConfig, center: float | None,
                     **extra) -> ContinuationSettings:
    c = cfg.continuation
    base = dict(ds=c.ds, ds_min=c.ds_min, ds_max=c.ds_max,
                max_steps=c.max_steps, max_periods=c.max_periods,
                mu_interval=(cfg.model.mu_min, cfg.model.mu_max),
                symmetric_center=center)
    base.update(extra)
    return ContinuationSettings(**base)


def _oriented_start(problem, prof, mu, grow_norm=True):
    t = continuation.initial_tangent(problem, prof.values, mu)
    drift = float(prof.values @ t[:-1])
    if (drift < 0.0) == grow_norm:
        t = -t
    return continuation.branch_point(problem, prof, mu, tangent=t)


def _trace_branch(cfg: ExperimentConfig, lengths: tuple[int, ...],
                  problem: LatticeSteadyStateProblem,
                  snaking: bool) -> Branch:
    prof = _build_start(cfg, lengths, problem)
    center = _symmetry_center(prof)
    settings = _branch_settings(cfg, center, snaking_detection=snaking)
    start = _oriented_start(problem, prof, cfg.model.mu_start)
    branch = continuation.continue_branch(problem, start, settings)
    if cfg.stability.enabled:
        stability.annotate_branch(branch, cfg.model.d,
                                  margin=cfg.stability.margin)
    return branch


def _branch_asymmetry(branch: Branch) -> np.ndarray:
    return np.array([float(np.abs(p.profile.values
                                  - p.profile.values[::-1]).max())
                     for p in branch.points])


def _junction_key(rung: Branch, pf_mus: list[float]) -> frozenset:
    """Identify a symmetry-broken loop by the symmetric-branch pitchforks it
    terminates at: interior asymmetry minima mapped to the nearest
    pitchfork mu."""
    a = _branch_asymmetry(rung)
    mus = [p.mu for p in rung.points]
    hits = set()
    for i in range(1, len(a) - 1):
        if a[i] < 5e-3 and a[i] <= a[i - 1] and a[i] <= a[i + 1] and pf_mus:
            hits.add(round(min(pf_mus, key=lambda q: abs(q - mus[i])), 8))
    return frozenset(hits)


def _switched_branch(cfg: ExperimentConfig, problem,
                     event) -> Branch | None:
    """Trace the symmetry-broken branch through a pitchfork.

    The cold start sits a small amplitude from the symmetric family, so the
    first arclength steps must stay below that amplitude or the corrector
    can fall back onto the symmetric branch.  A ladder of switch directions
    and amplitudes retries when the trace degenerates; a closed genuinely
    asymmetric loop wins, otherwise the best open asymmetric trace is kept.
    """
    point = event.data.get("point")
    base = float(np.linalg.norm(point.profile.values)) if point else 1.0
    fallback: Branch | None = None
    for direction, eps in ((1, None), (-1, None), (1, 0.01), (-1, 0.01),
                           (1, 0.02), (-1, 0.02)):
        amp = eps if eps is not None else 1e-3 * base
        try:
            start = continuation.branch_switch(problem, event,
                                               direction=direction,
                                               epsilon=amp)
        except BranchSwitchError:
            continue
        settings = _branch_settings(cfg, None, snaking_detection=False,
                                    asymmetry_probe=event.data["null_vector"])
        settings = replace(settings, ds=min(settings.ds, 0.25 * amp, 2e-3),
                           max_steps=min(settings.max_steps, 4000))
        rung = continuation.continue_branch(problem, start, settings)
        asym_max = float(_branch_asymmetry(rung).max())
        if asym_max > 0.1:
            if isinstance(rung.topology, Closed):
                return rung
            if fallback is None:
                fallback = rung
    return fallback


def _rung_branches(cfg: ExperimentConfig, problem, branch: Branch,
                   limit: int) -> list[Branch]:
    """Symmetry-broken branches switched from the pitchforks of a symmetric
    branch.  Each closed loop terminates at two pitchforks, so switches from
    paired pitchforks reproduce the same loop; branches are deduplicated by
    the pitchforks their asymmetry minima point back to."""
    pf_mus = [e.mu_at for e in branch.pitchforks()]
    rungs: list[Branch] = []
    seen: list[frozenset] = []
    for event in branch.pitchforks():
        if len(rungs) >= limit:
            break
        if "null_vector" not in event.data:
            continue
        rung = _switched_branch(cfg, problem, event)
        if rung is None:
            continue
        key = _junction_key(rung, pf_mus)
        if key and key in seen:
            continue
        if cfg.stability.enabled:
            stability.annotate_branch(rung, cfg.model.d,
                                      margin=cfg.stability.margin)
        seen.append(key)
        rungs.append(rung)
    return rungs


def _persist_branches(out_dir: Path, manifest: RunManifest,
                      named: list[tuple[str, Branch]], cfg: ExperimentConfig):
    for name, branch in named:
        csv_path = out_dir / f"{name}.csv"
        rows = write_branch_csv(csv_path, branch)
        manifest.add_file(csv_path, "branch", rows=rows)
        if "npz" in cfg.output.formats:
            npz_path = out_dir / f"{name}.npz"
            write_profiles_npz(npz_path, branch)
            manifest.add_file(npz_path, "profiles")
        manifest.summary.setdefault("branches", {})[name] = branch_summary(branch)


def _snake_seeds(cfg: ExperimentConfig) -> tuple[int, int]:
    """Plateau widths for the site-centered and bond-centered single-pulse
    ladders, at least as wide as the configured pulse."""
    base = max(cfg.pulse.lengths[0], 1) if len(cfg.pulse.lengths) == 1 else 1
    onsite = base if base % 2 == 1 else base + 1
    offsite = base if base % 2 == 0 else base + 1
    return onsite, offsite


def _cmd_snake(cfg: ExperimentConfig, out_dir: Path, manifest: RunManifest,
               rng: np.random.Generator):
    problem = LatticeSteadyStateProblem(d=cfg.model.d)
    onsite, offsite = _snake_seeds(cfg)
    named: list[tuple[str, Branch]] = []
    for name, width in (("branch-onsite", onsite),
                        ("branch-offsite", offsite)):
        # A narrow plateau may not exist at the working coupling (each width
        # has its own existence fold in d); enter the ladder at the first
        # width that continues.  The traced ladder is the same either way.
        branch = None
        error: PulseContinuationError | None = None
        for w in range(width, width + 13, 2):
            try:
                branch = _trace_branch(cfg, (w,), problem, snaking=True)
                break
            except PulseContinuationError as exc:
                error = exc
        if branch is None:
            raise error
        named.append((name, branch))
        for i, rung in enumerate(_rung_branches(cfg, problem, branch, limit=2)):
            named.append((f"{name}-rung-{i + 1}", rung))
    _persist_branches(out_dir, manifest, named, cfg)
    if "gp" in cfg.output.formats:
        script = emit_plot_script(manifest, "snaking", out_dir)
        manifest.add_file(script, "plot-script")


def _cmd_isola(cfg: ExperimentConfig, out_dir: Path, manifest: RunManifest,
               rng: np.random.Generator):
    problem = LatticeSteadyStateProblem(d=cfg.model.d)
    branch = _trace_branch(cfg, cfg.pulse.lengths, problem, snaking=False)
    named = [("branch-isola", branch)]
    for i, rung in enumerate(_rung_branches(cfg, problem, branch, limit=2)):
        named.append((f"branch-asym-{i + 1}", rung))
    _persist_branches(out_dir, manifest, named, cfg)
    if "gp" in cfg.output.formats:
        script = emit_plot_script(manifest, "isola", out_dir)
        manifest.add_file(script, "plot-script")


def _cmd_stability(cfg: ExperimentConfig, out_dir: Path, manifest: RunManifest,
                   rng: np.random.Generator):
    cfg = replace(cfg, stability=replace(cfg.stability, enabled=True))
    problem = LatticeSteadyStateProblem(d=cfg.model.d)
    snaking = sum(cfg.pulse.lengths[::2]) <= 2
    branch = _trace_branch(cfg, cfg.pulse.lengths, problem, snaking=snaking)
    _persist_branches(out_dir, manifest, [("branch-stability", branch)], cfg)
    flagged = [i for i in range(1, len(branch.points))
               if branch.points[i].unstable_count
               != branch.points[i - 1].unstable_count]
    if flagged:
        spectra = []
        for i in flagged:
            p = branch.points[i]
            summary = stability.spectrum(p.profile,
                                         LatticeParams(d=cfg.model.d, mu=p.mu),
                                         margin=cfg.stability.margin)
            spectra.append(summary.eigenvalues)
        path = out_dir / "spectra-flagged.npz"
        np.savez_compressed(path, point_index=np.array(flagged),
                            eigenvalues=np.stack(spectra))
        manifest.add_file(path, "spectra")
    manifest.summary["count_changes"] = len(flagged)
    if "gp" in cfg.output.formats:
        script = emit_plot_script(manifest, "stability", out_dir)
        manifest.add_file(script, "plot-script")


def _cmd_manifold(cfg: ExperimentConfig, out_dir: Path, manifest: RunManifest,
                  rng: np.random.Generator):
    d = cfg.model.d
    params = LatticeParams(d=d, mu=cfg.model.mu_start)
    settings = ManifoldSettings()
    arc_u, arc_s = planar_map.heteroclinic_arcs(params, settings)
    for name, arc in (("arc-unstable-origin", arc_u),
                      ("arc-stable-upper", arc_s)):
        path = out_dir / f"{name}.csv"
        rows = write_arc_csv(path, arc)
        manifest.add_file(path, "manifold-arc", rows=rows)

    brackets = {"left": (cfg.model.mu_min, 0.5),
                "right": (0.5, cfg.model.mu_max)}

    def locate(bracket):
        return planar_map.find_tangency(d, bracket)

    if manifest.threads > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            futures = {k: pool.submit(locate, b) for k, b in brackets.items()}
            events = {k: f.result() for k, f in futures.items()}
    else:
        events = {k: locate(b) for k, b in brackets.items()}
    mu_minus = events["left"].mu_star
    mu_plus = events["right"].mu_star
    report = {
        "d": d,
        "mu_minus": mu_minus,
        "mu_plus": mu_plus,
        "sum_deviation": abs(mu_minus + mu_plus - 1.0),
        "brackets": {k: list(v) for k, v in brackets.items()},
        "events": {k: {"mu_star": e.mu_star, "side": e.side,
                       "bracket_width": e.bracket_width,
                       "count_inner": e.count_inner,
                       "count_outer": e.count_outer}
                   for k, e in events.items()},
    }
    path = out_dir / "tangency.json"
    _write_json(path, report)
    manifest.add_file(path, "tangency-report")
    manifest.summary["tangency"] = report


def _cmd_verify(cfg: ExperimentConfig, out_dir: Path, manifest: RunManifest,
                rng: np.random.Generator):
    d = cfg.model.d
    checks: dict[str, dict] = {}

    devs = {}
    for mu in (0.1, 0.5, 0.9):
        devs[str(mu)] = planar_map.check_reversibility(
            LatticeParams(d=d, mu=mu), n_samples=10000, rng=rng)
    worst = max(devs.values())
    checks["reversibility"] = {"deviations": devs, "max": worst,
                               "pass": worst <= 1e-12}

    grid = np.arange(cfg.model.mu_min, cfg.model.mu_max + 1e-12, 0.001)
    lam_min = np.inf
    det_err = 0.0
    for mu in grid:
        p = LatticeParams(d=d, mu=float(mu))
        for which in (planar_map.ORIGIN, planar_map.U_STAR):
            info = planar_map.fixed_point_eigen(p, which)
            lam_min = min(lam_min, info.lambda_unstable)
            det_err = max(det_err,
                          abs(info.lambda_unstable * info.lambda_stable - 1.0))
    checks["eigenvalues"] = {"grid_points": int(grid.size),
                             "lambda_min": lam_min,
                             "det_deviation": det_err,
                             "pass": lam_min > 1.0 and det_err <= 1e-12}

    n = 21
    u = rng.uniform(-0.2, 1.2, size=n)
    mu0 = cfg.model.mu_start
    jac = lattice.jacobian_values(u, d, mu0)
    h = 1e-6
    fd_err = 0.0
    r0 = lattice.residual_values(u, d, mu0, 0.0, 0.0)
    dense = jac.to_dense()
    for j in range(n):
        up = u.copy()
        up[j] += h
        um = u.copy()
        um[j] -= h
        col = (lattice.residual_values(up, d, mu0, 0.0, 0.0)
               - lattice.residual_values(um, d, mu0, 0.0, 0.0)) / (2.0 * h)
        fd_err = max(fd_err, float(np.abs(col - dense[:, j]).max()))
    checks["jacobian_fd"] = {"max_error": fd_err, "residual_norm":
                             float(np.abs(r0).max()), "pass": fd_err <= 1e-6}

    # The composition of u -> 1 - u with mu -> 1 - mu maps steady states to
    # steady states, so the folds of a closed branch and of its image branch
    # must mirror each other exactly.  A closed loop, unlike a snaking
    # segment, carries its complete fold set on both sides.
    problem = LatticeSteadyStateProblem(d=d)
    short = replace(cfg, continuation=replace(cfg.continuation, max_steps=4000))
    branch = _trace_branch(short, (5, 7, 5), problem, snaking=False)
    prof0 = branch.points[0].profile
    image, params_img = lattice.involution_u_to_one_minus_u(
        prof0, LatticeParams(d=d, mu=branch.points[0].mu))
    problem_img = LatticeSteadyStateProblem(d=d, boundary=image.boundary)
    start_img = _oriented_start(problem_img, image, params_img.mu,
                                grow_norm=False)
    settings = _branch_settings(short, _symmetry_center(prof0),
                                snaking_detection=False)
    branch_img = continuation.continue_branch(problem_img, start_img, settings)
    folds = sorted(e.mu_at for e in branch.folds())
    folds_img = sorted(1.0 - e.mu_at for e in branch_img.folds())
    if folds and len(folds) == len(folds_img):
        pairing = max(abs(a - b) for a, b in zip(folds, folds_img))
    else:
        pairing = np.nan
    checks["involution_folds"] = {
        "folds": folds, "image_folds_reflected": folds_img,
        "max_pairing_error": pairing,
        "pass": bool(folds) and len(folds) == len(folds_img)
        and pairing <= 1e-6,
    }

    ok = all(c["pass"] for c in checks.values())
    checks["all_pass"] = ok
    path = out_dir / "verify.json"
    _write_json(path, checks)
    manifest.add_file(path, "verify-report")
    manifest.summary["verify"] = checks
    if not ok:
        raise NewtonFailure("verification checks failed; see verify.json", None)


_COMMANDS = {
    "snake": _cmd_snake,
    "isola": _cmd_isola,
    "manifold": _cmd_manifold,
    "verify": _cmd_verify,
    "stability": _cmd_stability,
}


def run(cfg: ExperimentConfig, subcommand: str,
        out_dir: str | Path | None = None,
        seed: int | None = None, threads: int | None = None
        ) -> tuple[int, RunManifest]:
    """Execute one subcommand; returns (exit_code, manifest).

    Partial outputs are flushed and the manifest carries a failure marker
    when a solver gives up.
    """
    if subcommand not in _COMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    out = Path(out_dir) if out_dir is not None else Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    use_seed = cfg.run.seed if seed is None else seed
    use_threads = cfg.run.threads if threads is None else threads
    manifest = RunManifest(
        subcommand=subcommand,
        config_hash=config_hash(cfg),
        tool_version=TOOL_VERSION,
        created=time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        seed=use_seed,
        threads=use_threads,
    )
    rng = np.random.default_rng(use_seed)
    code = EXIT_OK
    try:
        _COMMANDS[subcommand](cfg, out, manifest, rng)
    except _SOLVER_ERRORS as exc:
        manifest.status = "failure"
        manifest.failure = f"{type(exc).__name__}: {exc}"
        code = EXIT_SOLVER
    summary_path = out / "summary.json"
    _write_json(summary_path, manifest.summary)
    manifest.add_file(summary_path, "summary")
    manifest.write(out)
    return code, manifest


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="pulse-atlas",
        description="Continuation and bifurcation analysis of lattice pulses")
    parser.add_argument("subcommand", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="config file path")
    parser.add_argument("--out", help="output directory override")
    parser.add_argument("--seed", type=int, help="seed override")
    parser.add_argument("--threads", type=int, help="worker thread count")
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config) if args.config else ExperimentConfig()
        code, manifest = run(cfg, args.subcommand, out_dir=args.out,
                             seed=args.seed, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if manifest.status != "success":
        print(f"run failed: {manifest.failure}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
