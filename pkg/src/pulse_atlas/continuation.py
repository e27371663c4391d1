"""Pseudo-arclength continuation of lattice steady states in mu.

Keller-style predictor/corrector on the bordered system, with adaptive step
control, fold and pitchfork refinement, symmetry-breaking branch switching,
and closed/snaking/open topology classification.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Protocol

import numpy as np

from . import lattice, pulses
from .lattice import Boundary, DIRICHLET_ZERO, LatticeProfile
from .linalg import (
    BorderedSystem, NewtonConfig, NewtonFailure, SingularBorderedError,
    SingularMatrixError, TridiagonalMatrix, newton_solve, solve_bordered,
    solve_tridiagonal, smallest_eigenvalue, sturm_count, NewtonResult,
)

__all__ = [
    "ContinuationProblem",
    "LatticeSteadyStateProblem",
    "BranchPoint",
    "EventKind",
    "Event",
    "Closed",
    "Snaking",
    "Open",
    "Branch",
    "ContinuationSettings",
    "BranchSwitchError",
    "branch_point",
    "initial_tangent",
    "continue_branch",
    "detect_fold",
    "detect_pitchfork",
    "antisymmetric_eigenvalue",
    "branch_switch",
    "classify_topology",
    "approach_fold",
    "locate_fold",
    "locate_pitchfork",
]


class ContinuationProblem(Protocol):
    def residual(self, u: np.ndarray, mu: float) -> np.ndarray: ...

    def jacobian(self, u: np.ndarray, mu: float) -> TridiagonalMatrix: ...

    def mu_derivative(self, u: np.ndarray, mu: float) -> np.ndarray: ...


@dataclass(frozen=True)
class LatticeSteadyStateProblem:
    """Steady-state system of the lattice at fixed coupling, mu free."""

    d: float
    boundary: Boundary = DIRICHLET_ZERO

    def residual(self, u: np.ndarray, mu: float) -> np.ndarray:
        return lattice.residual_values(u, self.d, mu,
                                       self.boundary.left, self.boundary.right)

    def jacobian(self, u: np.ndarray, mu: float) -> TridiagonalMatrix:
        return lattice.jacobian_values(u, self.d, mu)

    def mu_derivative(self, u: np.ndarray, mu: float) -> np.ndarray:
        return lattice.nonlinearity_dmu(u, mu)


@dataclass
class BranchPoint:
    """One accepted continuation point.

    tangent is the unit tangent in combined (profile, mu) space; measure is
    the l2 norm of the profile, the ordinate used in bifurcation diagrams.
    """

    profile: LatticeProfile
    mu: float
    s: float
    tangent: np.ndarray | None
    measure: float
    unstable_count: int | None = None


class EventKind(Enum):
    FOLD = "fold"
    PITCHFORK = "pitchfork"
    WINDOW_EDGE = "window-edge"
    STEP_FAILURE = "step-failure"


@dataclass
class Event:
    kind: EventKind
    mu_at: float
    s_at: float
    sector: str = "none"
    refined: bool = True
    data: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Closed:
    gap_mu: float
    gap_profile: float
    tangent_alignment: float

    @property
    def gap(self) -> float:
        return max(self.gap_mu, self.gap_profile)


@dataclass(frozen=True)
class Snaking:
    p: int
    growth: int
    periods: int


@dataclass(frozen=True)
class Open:
    reason: str


Topology = Closed | Snaking | Open


@dataclass
class Branch:
    points: list[BranchPoint]
    events: list[Event]
    topology: Topology
    warnings: list[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def folds(self) -> list[Event]:
        return [e for e in self.events if e.kind is EventKind.FOLD]

    def pitchforks(self) -> list[Event]:
        return [e for e in self.events if e.kind is EventKind.PITCHFORK]


@dataclass
class ContinuationSettings:
    ds: float = 0.01
    ds_min: float = 1e-9
    ds_max: float = 0.05
    max_steps: int = 20000
    direction: int = 1
    mu_interval: tuple[float, float] = (0.05, 0.95)
    newton_tol: float = 1e-11
    corrector_max_iter: int = 8
    grow_after: int = 4
    growth_factor: float = 1.3
    closure_mu_tol: float = 1e-8
    closure_profile_tol: float = 1e-6
    closure_tangent_min: float = 0.999
    min_closure_steps: int = 10
    fold_tangent_tol: float = 1e-8
    detect_folds: bool = True
    symmetric_center: float | None = None
    detect_pitchforks: bool = True
    snaking_detection: bool = True
    max_periods: int = 6
    threshold: float = 0.5
    monitor_determinant: bool = True
    asymmetry_probe: np.ndarray | None = None
    edge_monitor_tol: float = 1e-10
    turning_tangent_mu: float = 0.05
    turning_ds_cap: float = 0.004

    def __post_init__(self):
        if self.direction not in (1, -1):
            raise ValueError(f"direction must be +1 or -1, got {self.direction}")
        if not (0.0 < self.ds_min <= self.ds <= self.ds_max):
            raise ValueError(
                f"need 0 < ds_min <= ds <= ds_max, got {self.ds_min}, {self.ds}, {self.ds_max}")
        if self.mu_interval[0] >= self.mu_interval[1]:
            raise ValueError(f"empty mu interval {self.mu_interval}")
        if self.turning_ds_cap < self.ds_min:
            raise ValueError(
                f"turning_ds_cap {self.turning_ds_cap} below ds_min {self.ds_min}")


class BranchSwitchError(RuntimeError):
    pass


def _norm_inf(v: np.ndarray) -> float:
    return float(np.abs(v).max(initial=0.0))


def branch_point(problem: ContinuationProblem, profile: LatticeProfile,
                 mu: float, tangent: np.ndarray | None = None,
                 s: float = 0.0, check_tol: float | None = 1e-9) -> BranchPoint:
    """Wrap a converged profile as a continuation start point."""
    if check_tol is not None:
        rn = _norm_inf(problem.residual(profile.values, mu))
        if rn > check_tol:
            raise ValueError(
                f"start point residual {rn:.3e} exceeds tolerance {check_tol:.3e}")
    return BranchPoint(profile=profile, mu=float(mu), s=float(s),
                       tangent=tangent, measure=profile.l2_norm())


def initial_tangent(problem: ContinuationProblem, u: np.ndarray,
                    mu: float) -> np.ndarray:
    """Natural-parameter tangent (du/dmu, 1), normalized.  Fails at folds."""
    jac = problem.jacobian(u, mu)
    tu = solve_tridiagonal(jac, -problem.mu_derivative(u, mu))
    t = np.append(tu, 1.0)
    return t / np.linalg.norm(t)


def _tangent_at(problem: ContinuationProblem, u: np.ndarray, mu: float,
                t_prev: np.ndarray) -> np.ndarray:
    """Tangent from the bordered system with the previous tangent as border
    row; the solution has positive inner product with t_prev by
    construction."""
    jac = problem.jacobian(u, mu)
    system = BorderedSystem(core=jac, border_col=problem.mu_derivative(u, mu),
                            border_row=t_prev[:-1], corner=float(t_prev[-1]))
    x, y = solve_bordered(system, np.zeros(u.shape[0]), 1.0)
    t = np.append(x, y)
    return t / np.linalg.norm(t)


def _correct(problem: ContinuationProblem, u_init: np.ndarray, mu_init: float,
             t: np.ndarray, anchor_u: np.ndarray, anchor_mu: float,
             settings: ContinuationSettings) -> tuple[np.ndarray, float, int]:
    """Newton corrector in the hyperplane through the anchor orthogonal to t.

    Raises NewtonFailure when the iteration stalls or exceeds its budget.
    """
    u = np.array(u_init, dtype=float)
    mu = float(mu_init)
    tu, tmu = t[:-1], float(t[-1])
    tol = settings.newton_tol
    for it in range(1, settings.corrector_max_iter + 1):
        r = problem.residual(u, mu)
        c = float(tu @ (u - anchor_u)) + tmu * (mu - anchor_mu)
        rn = _norm_inf(r)
        if rn <= tol and abs(c) <= 1e-10 * max(1.0, abs(mu)) and it > 1:
            return u, mu, it - 1
        if not np.isfinite(rn) or rn > 1e8:
            raise NewtonFailure("corrector diverged",
                                None)  # type: ignore[arg-type]
        jac = problem.jacobian(u, mu)
        system = BorderedSystem(core=jac,
                                border_col=problem.mu_derivative(u, mu),
                                border_row=tu, corner=tmu)
        du, dmu = solve_bordered(system, -r, -c)
        u = u + du
        mu = mu + dmu
        r = problem.residual(u, mu)
        rn = _norm_inf(r)
        if rn <= tol:
            return u, mu, it
    raise NewtonFailure(
        f"corrector did not converge in {settings.corrector_max_iter} iterations "
        f"(residual {rn:.3e})", None)  # type: ignore[arg-type]


def antisymmetric_eigenvalue(problem: ContinuationProblem, u: np.ndarray,
                             mu: float, n_min: int,
                             center: float) -> float:
    """Smallest eigenvalue of the antisymmetric reflection sector of the
    Jacobian; it crosses zero at a symmetry-breaking pitchfork."""
    jac = problem.jacobian(u, mu)
    _, anti = lattice.reflection_sectors(jac, n_min, center)
    return smallest_eigenvalue(anti)


def _antisym_det_sign(problem: ContinuationProblem, u: np.ndarray, mu: float,
                      n_min: int, center: float) -> int:
    jac = problem.jacobian(u, mu)
    _, anti = lattice.reflection_sectors(jac, n_min, center)
    negatives = sturm_count(anti, 0.0)
    return 1 if negatives % 2 == 0 else -1


def _bordered_det_sign(problem: ContinuationProblem, u: np.ndarray, mu: float,
                       t: np.ndarray) -> int | None:
    """Sign of the bordered determinant, stable across folds; a lone flip
    marks a transversal branch point."""
    jac = problem.jacobian(u, mu)
    try:
        z = solve_tridiagonal(jac, problem.mu_derivative(u, mu))
    except SingularMatrixError:
        return None
    denom = float(t[-1]) - float(t[:-1] @ z)
    if denom == 0.0 or not np.isfinite(denom):
        return None
    negatives = sturm_count(jac, 0.0)
    core_sign = 1 if negatives % 2 == 0 else -1
    return core_sign * (1 if denom > 0.0 else -1)


def _eig_nearest_zero(problem: ContinuationProblem, u: np.ndarray,
                      mu: float) -> float:
    lam = np.linalg.eigvalsh(problem.jacobian(u, mu).to_dense())
    return float(lam[np.argmin(np.abs(lam))])


def approach_fold(problem: ContinuationProblem, u: np.ndarray, mu: float,
                  direction: int, step: float = 2e-4, eig_stop: float = 5e-4,
                  fine_step: float = 2e-5, jump_tol: float = 0.05,
                  max_points: int = 100000,
                  newton: NewtonConfig | None = None) -> tuple[np.ndarray, float]:
    """Walk a solution leg toward a fold by fixed-mu Newton corrections.

    Natural continuation cannot round the fold, which makes the march immune
    to the sheet transfer that arclength stepping suffers where neighboring
    families pass exponentially close together.  The walk refines its mu
    step as the Jacobian eigenvalue nearest zero collapses and stops once
    its magnitude drops below eig_stop, on the near side of the fold.
    """
    if direction not in (1, -1):
        raise ValueError(f"direction must be +1 or -1, got {direction}")
    cfg = newton or NewtonConfig(abs_tol=1e-12, max_iter=12)
    u = np.array(u, dtype=float)
    mu = float(mu)
    lam = _eig_nearest_zero(problem, u, mu)
    for _ in range(max_points):
        if abs(lam) <= eig_stop:
            return u, mu
        dh = step if abs(lam) > 2e-3 else fine_step
        while True:
            trial = mu + direction * dh
            try:
                res = newton_solve(lambda x: problem.residual(x, trial),
                                   lambda x: problem.jacobian(x, trial),
                                   u, cfg)
            except NewtonFailure:
                dh *= 0.5
                if dh < 1e-9:
                    return u, mu
                continue
            if float(np.abs(res.x - u).max()) > jump_tol:
                dh *= 0.5
                if dh < 1e-9:
                    return u, mu
                continue
            break
        u = res.x
        mu = trial
        lam = _eig_nearest_zero(problem, u, mu)
    raise NewtonFailure(
        f"fold approach did not converge within {max_points} steps "
        f"(eigenvalue {lam:.3e} at mu = {mu:.8f})",
        NewtonResult(x=u, iterations=max_points,
                     residual_history=np.array([abs(lam)]), converged=False))


def _mirror_half(half: np.ndarray, n: int) -> np.ndarray:
    if n % 2 == 1:
        return np.concatenate([half, half[-2::-1]])
    return np.concatenate([half, half[::-1]])


def _sector_eig_nearest_zero(problem: ContinuationProblem, u: np.ndarray,
                             mu: float, n_min: int, center: float,
                             antisymmetric: bool) -> float:
    jac = problem.jacobian(u, mu)
    sym, anti = lattice.reflection_sectors(jac, n_min, center)
    sector = anti if antisymmetric else sym
    lam = np.linalg.eigvalsh(sector.to_dense())
    return float(lam[np.argmin(np.abs(lam))])


def _locate_sector_singularity(problem: ContinuationProblem, u: np.ndarray,
                               mu: float, n_min: int, center: float,
                               antisymmetric: bool, tol: float,
                               max_iter: int) -> tuple[np.ndarray, float]:
    """Newton on the minimally augmented system: lattice equations on a half
    window plus the requirement that the chosen reflection sector of the
    Jacobian is singular.  Quadratically convergent near regular folds
    (symmetric sector) and symmetry-breaking pitchforks (antisymmetric)."""
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    asym = float(np.abs(u - u[::-1]).max())
    if asym > 1e-6:
        raise ValueError(f"profile asymmetry {asym:.3e} too large for a "
                         "reflection-sector singularity search")
    u = 0.5 * (u + u[::-1])
    m = (n + 1) // 2

    def ext_residual(y: np.ndarray) -> np.ndarray:
        uf = _mirror_half(y[:m], n)
        muv = float(y[m])
        r = problem.residual(uf, muv)
        lam = _sector_eig_nearest_zero(problem, uf, muv, n_min, center,
                                       antisymmetric)
        return np.append(r[:m], lam)

    y = np.append(u[:m], mu)
    for _ in range(max_iter):
        F = ext_residual(y)
        fn = float(np.abs(F).max())
        if fn <= tol:
            return _mirror_half(y[:m], n), float(y[m])
        J = np.empty((m + 1, m + 1))
        for j in range(m + 1):
            hj = 1e-7 * max(1.0, abs(float(y[j])))
            yp = y.copy()
            yp[j] += hj
            J[:, j] = (ext_residual(yp) - F) / hj
        try:
            dy = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise NewtonFailure(
                "augmented sector system is singular",
                NewtonResult(x=y, iterations=0,
                             residual_history=np.array([fn]),
                             converged=False)) from exc
        nm = float(np.abs(dy).max())
        if nm > 0.05:
            dy *= 0.05 / nm
        y = y + dy
    raise NewtonFailure(
        f"sector singularity search stalled (residual {fn:.3e})",
        NewtonResult(x=y, iterations=max_iter,
                     residual_history=np.array([fn]), converged=False))


def locate_fold(problem: ContinuationProblem, u: np.ndarray, mu: float,
                n_min: int, center: float, tol: float = 1e-12,
                max_iter: int = 40) -> tuple[np.ndarray, float]:
    """Converge to the exact fold of a reflection-symmetric branch near a
    seed solution; returns the fold profile values and its mu."""
    return _locate_sector_singularity(problem, u, mu, n_min, center,
                                      antisymmetric=False, tol=tol,
                                      max_iter=max_iter)


def locate_pitchfork(problem: ContinuationProblem, u: np.ndarray, mu: float,
                     n_min: int, center: float, tol: float = 1e-12,
                     max_iter: int = 40) -> tuple[np.ndarray, float]:
    """Converge to the exact symmetry-breaking pitchfork of a
    reflection-symmetric branch near a seed solution."""
    return _locate_sector_singularity(problem, u, mu, n_min, center,
                                      antisymmetric=True, tol=tol,
                                      max_iter=max_iter)


def _antisymmetry_measure(u: np.ndarray) -> float:
    return _norm_inf(u - u[::-1])


@dataclass
class _State:
    u: np.ndarray
    mu: float
    t: np.ndarray
    s: float


def _hermite_predict(prev: _State, state: _State, h: float) -> np.ndarray | None:
    """Cubic Hermite extrapolation of the branch in combined (u, mu) space.

    The quartic-order predictor error keeps the corrector inside the basin of
    the traced family even where a neighboring family passes close by, as
    happens near the folds of stacked multi-pulse isolas.
    """
    h0 = state.s - prev.s
    if h0 <= 0.0:
        return None
    ratio = h / h0
    if not 0.05 <= ratio <= 4.0:
        return None
    x0 = np.append(prev.u, prev.mu)
    x1 = np.append(state.u, state.mu)
    m0 = h0 * prev.t
    m1 = h0 * state.t
    r = 1.0 + ratio
    r2 = r * r
    r3 = r2 * r
    return ((2.0 * r3 - 3.0 * r2 + 1.0) * x0 + (r3 - 2.0 * r2 + r) * m0
            + (3.0 * r2 - 2.0 * r3) * x1 + (r3 - r2) * m1)


def _step_point(problem: ContinuationProblem, state: _State, h: float,
                settings: ContinuationSettings,
                prev: _State | None = None) -> tuple[np.ndarray, float, int]:
    # The corrector plane stays anchored at the linear predictor so that the
    # arclength parametrization remains exact; the cubic prediction only
    # serves as the Newton starting point, keeping the iteration in the basin
    # of the traced family where neighboring families pass close by.
    au = state.u + h * state.t[:-1]
    amu = state.mu + h * float(state.t[-1])
    pu, pmu = au, amu
    if prev is not None and prev.t is not None:
        pred = _hermite_predict(prev, state, h)
        if pred is not None:
            pu = pred[:-1]
            pmu = float(pred[-1])
    return _correct(problem, pu, pmu, state.t, au, amu, settings)


def detect_fold(problem: ContinuationProblem, before: BranchPoint,
                after: BranchPoint,
                settings: ContinuationSettings | None = None) -> Event:
    """Refine the fold bracketed by two consecutive points whose tangent
    mu-components change sign."""
    settings = settings or ContinuationSettings()
    if before.tangent is None or after.tangent is None:
        raise ValueError("both points need tangents to refine a fold")
    sign0 = np.sign(before.tangent[-1])
    if sign0 == 0 or np.sign(after.tangent[-1]) == sign0:
        raise ValueError("tangent mu-component does not change sign across the pair")
    state = _State(u=before.profile.values.copy(), mu=before.mu,
                   t=before.tangent, s=before.s)
    return _refine_fold(problem, state, after.s - before.s, settings,
                        before.profile)


def _refine_fold(problem: ContinuationProblem, state: _State, ds: float,
                 settings: ContinuationSettings,
                 template: LatticeProfile,
                 prev: _State | None = None) -> Event:
    sign0 = 1.0 if state.t[-1] > 0 else -1.0
    lo, hi = 0.0, ds
    u_best, mu_best, tmu_best = None, None, None
    failures = 0
    refined = False
    for _ in range(70):
        mid = 0.5 * (lo + hi)
        try:
            u, mu, _ = _step_point(problem, state, mid, settings, prev=prev)
            t_mid = _tangent_at(problem, u, mu, state.t)
        except (NewtonFailure, SingularBorderedError, SingularMatrixError):
            failures += 1
            if failures > 6:
                break
            hi = mid
            continue
        u_best, mu_best, tmu_best = u, mu, float(t_mid[-1])
        if abs(tmu_best) <= settings.fold_tangent_tol:
            refined = True
            break
        if np.sign(tmu_best) == sign0:
            lo = mid
        else:
            hi = mid
    if u_best is None:
        mu_best = state.mu
        mid = 0.5 * ds
        tmu_best = float(state.t[-1])
    side = "left" if sign0 < 0 else "right"
    event = Event(kind=EventKind.FOLD, mu_at=float(mu_best),
                  s_at=state.s + mid, sector="none", refined=refined,
                  data={"side": side, "tangent_mu": tmu_best})
    if u_best is not None:
        event.data["point"] = BranchPoint(
            profile=template.with_values(u_best), mu=float(mu_best),
            s=state.s + mid, tangent=None,
            measure=float(np.linalg.norm(u_best)))
    return event


def detect_pitchfork(problem: ContinuationProblem, before: BranchPoint,
                     after: BranchPoint, center: float,
                     settings: ContinuationSettings | None = None) -> Event | None:
    """Refine the symmetry-breaking pitchfork between two consecutive points
    of a reflection-symmetric branch, or None when the antisymmetric sector
    determinant keeps its sign."""
    settings = settings or ContinuationSettings()
    prof = before.profile
    if not lattice.is_reflection_symmetric(prof, center, tol=1e-6):
        raise ValueError(
            f"profile is not reflection symmetric about {center}; pitchfork "
            "detection requires a symmetric branch")
    s0 = _antisym_det_sign(problem, prof.values, before.mu, prof.n_min, center)
    s1 = _antisym_det_sign(problem, after.profile.values, after.mu,
                           prof.n_min, center)
    if s0 == s1:
        return None
    state = _State(u=prof.values.copy(), mu=before.mu,
                   t=before.tangent, s=before.s)
    return _refine_pitchfork(problem, state, after.s - before.s, s0, center,
                             settings, prof)


def _refine_pitchfork(problem: ContinuationProblem, state: _State, ds: float,
                      sign0: int, center: float,
                      settings: ContinuationSettings,
                      template: LatticeProfile,
                      prev: _State | None = None) -> Event:
    n_min = template.n_min
    lo, hi = 0.0, ds
    u_best, mu_best = state.u, state.mu
    failures = 0
    refined = True
    for _ in range(64):
        if hi - lo < 1e-10:
            break
        mid = 0.5 * (lo + hi)
        try:
            u, mu, _ = _step_point(problem, state, mid, settings, prev=prev)
        except (NewtonFailure, SingularBorderedError, SingularMatrixError):
            failures += 1
            if failures > 6:
                refined = False
                break
            hi = mid
            continue
        u = 0.5 * (u + u[::-1])
        if _antisym_det_sign(problem, u, mu, n_min, center) == sign0:
            lo = mid
        else:
            hi = mid
        u_best, mu_best = u, mu
    eig = antisymmetric_eigenvalue(problem, u_best, mu_best, n_min, center)
    jac = problem.jacobian(u_best, mu_best)
    _, anti = lattice.reflection_sectors(jac, n_min, center)
    vec = _antisym_null_vector(anti, u_best.shape[0], n_min, center)
    event = Event(kind=EventKind.PITCHFORK, mu_at=float(mu_best),
                  s_at=state.s + 0.5 * (lo + hi), sector="antisymmetric",
                  refined=refined,
                  data={"eigenvalue": eig, "null_vector": vec})
    event.data["point"] = BranchPoint(
        profile=template.with_values(u_best), mu=float(mu_best),
        s=state.s + 0.5 * (lo + hi), tangent=None,
        measure=float(np.linalg.norm(u_best)))
    return event


def _antisym_null_vector(anti: TridiagonalMatrix, n: int, n_min: int,
                         center: float) -> np.ndarray:
    """Antisymmetric eigenvector of the smallest sector eigenvalue, embedded
    into the full window and normalized."""
    vals, vecs = np.linalg.eigh(anti.to_dense())
    a = vecs[:, int(np.argmin(np.abs(vals)))]
    w = np.zeros(n)
    doubled = round(2.0 * center)
    if doubled % 2 == 0:
        ci = doubled // 2 - n_min
        for k in range(1, a.shape[0] + 1):
            w[ci + k] = a[k - 1]
            w[ci - k] = -a[k - 1]
    else:
        mi = (doubled - 1) // 2 - n_min
        for k in range(1, a.shape[0] + 1):
            w[mi + k] = a[k - 1]
            w[mi + 1 - k] = -a[k - 1]
    return w / np.linalg.norm(w)


def continue_branch(problem: ContinuationProblem, start: BranchPoint,
                    settings: ContinuationSettings | None = None) -> Branch:
    """Trace a solution branch from a converged start point.

    Steps with an adaptive pseudo-arclength predictor/corrector; records fold
    and pitchfork events (refined by bisection), stops on closure, on a
    quasi-period budget for snaking branches, when mu leaves the working
    interval, or when the step size underflows.

    Parameters
    ----------
    problem : residual/jacobian/mu_derivative triple at fixed coupling.
    start : converged BranchPoint; its tangent, when present, fixes the
        initial direction, otherwise the natural tangent scaled by
        settings.direction is used.
    """
    settings = settings or ContinuationSettings()
    prof0 = start.profile
    u0 = prof0.values.copy()
    mu0 = float(start.mu)
    n = u0.shape[0]
    rn0 = _norm_inf(problem.residual(u0, mu0))
    if rn0 > 50.0 * settings.newton_tol:
        raise ValueError(f"start residual {rn0:.3e} too large for continuation")

    sym_center = settings.symmetric_center
    if sym_center is not None:
        if not lattice.is_reflection_symmetric(prof0, sym_center, tol=1e-6):
            raise ValueError(
                f"start profile not reflection symmetric about {sym_center}")
        u0 = 0.5 * (u0 + u0[::-1])

    if start.tangent is not None and np.linalg.norm(start.tangent) > 0:
        t0 = np.asarray(start.tangent, dtype=float)
        t0 = t0 / np.linalg.norm(t0)
    else:
        t0 = settings.direction * initial_tangent(problem, u0, mu0)

    first = BranchPoint(profile=prof0.with_values(u0), mu=mu0, s=0.0,
                        tangent=t0, measure=float(np.linalg.norm(u0)))
    points: list[BranchPoint] = [first]
    events: list[Event] = []
    warnings: list[str] = []
    meta: dict = {
        "mu0": mu0,
        "d": getattr(problem, "d", None),
        "boundary": getattr(problem, "boundary", None),
        "symmetric_center": sym_center,
        "threshold": settings.threshold,
        "periods": [],
        "closure": None,
        "stop_reason": "max-steps",
    }

    runs0_first, runs0 = pulses.run_lengths(u0, settings.threshold)
    anti_sign_prev: int | None = None
    if sym_center is not None and settings.detect_pitchforks:
        anti_sign_prev = _antisym_det_sign(problem, u0, mu0, prof0.n_min, sym_center)
    det_sign_prev: int | None = None
    if settings.monitor_determinant and sym_center is None:
        det_sign_prev = _bordered_det_sign(problem, u0, mu0, t0)
    probe = settings.asymmetry_probe
    probe_sign_prev: float | None = None
    if probe is not None:
        phi0 = float(probe @ (u0 - u0[::-1]))
        probe_sign_prev = np.sign(phi0) if phi0 != 0.0 else None

    ds = settings.ds
    easy_streak = 0
    last_period_s = 0.0
    edge_warned = False
    closure_armed = False
    mu_lo, mu_hi = settings.mu_interval

    state = _State(u=u0, mu=mu0, t=t0, s=0.0)
    pred_prev: _State | None = None
    h_prev: float | None = None

    for step_index in range(1, settings.max_steps + 1):
        # Near a turning point nearby families pass exponentially close to
        # each other, so the step is capped there to keep the corrector basin
        # from straddling two branches.  Leaving the capped zone the step may
        # only grow by a bounded factor per step, otherwise the first free
        # step would leap across the squeeze region next to the fold.
        h = ds
        capped = False
        if abs(float(state.t[-1])) < settings.turning_tangent_mu:
            if h > settings.turning_ds_cap:
                h = settings.turning_ds_cap
                capped = True
        if h_prev is not None:
            h = min(h, 2.0 * h_prev)
        # One predictor/corrector attempt; halve the step until it lands.
        while True:
            try:
                u_new, mu_new, iters = _step_point(problem, state, h, settings,
                                                   prev=pred_prev)
                break
            except (NewtonFailure, SingularBorderedError, SingularMatrixError):
                h *= 0.5
                ds = max(0.5 * ds, settings.ds_min)
                easy_streak = 0
                if h < settings.ds_min:
                    events.append(Event(kind=EventKind.STEP_FAILURE,
                                        mu_at=state.mu, s_at=state.s))
                    meta["stop_reason"] = "step-failure"
                    return _finish(points, events, warnings, meta, settings)

        if sym_center is not None:
            u_new = 0.5 * (u_new + u_new[::-1])
        # Independent residual re-check on the accepted values, plus a guard
        # on the corrector displacement: a corrected point far from the
        # predictor marks a sharp turn or a close branch passage, both of
        # which need a shorter step to stay on the traced family.
        rn = _norm_inf(problem.residual(u_new, mu_new))
        pull = np.hypot(float(np.linalg.norm(u_new - (state.u + h * state.t[:-1]))),
                        mu_new - (state.mu + h * float(state.t[-1])))
        if rn > 50.0 * settings.newton_tol or pull > 0.75 * h:
            h *= 0.5
            ds = max(0.5 * ds, settings.ds_min)
            easy_streak = 0
            if h < settings.ds_min:
                events.append(Event(kind=EventKind.STEP_FAILURE,
                                    mu_at=state.mu, s_at=state.s))
                meta["stop_reason"] = "step-failure"
                return _finish(points, events, warnings, meta, settings)
            continue

        t_new = _tangent_at(problem, u_new, mu_new, state.t)
        s_new = state.s + h
        point = BranchPoint(profile=prof0.with_values(u_new), mu=float(mu_new),
                            s=s_new, tangent=t_new,
                            measure=float(np.linalg.norm(u_new)))
        prev_state = state
        points.append(point)

        if iters <= 3 and not capped:
            easy_streak += 1
            if easy_streak >= settings.grow_after:
                ds = min(ds * settings.growth_factor, settings.ds_max)
                easy_streak = 0
        else:
            easy_streak = 0

        # Fold: tangent mu-component changes sign.
        if settings.detect_folds and prev_state.t[-1] * t_new[-1] < 0.0:
            events.append(_refine_fold(problem, prev_state, h, settings, prof0,
                                       prev=pred_prev))

        # Pitchfork on a symmetric branch: antisymmetric determinant flips.
        if anti_sign_prev is not None:
            anti_sign = _antisym_det_sign(problem, u_new, mu_new, prof0.n_min,
                                          sym_center)
            if anti_sign != anti_sign_prev:
                events.append(_refine_pitchfork(problem, prev_state, h,
                                                anti_sign_prev, sym_center,
                                                settings, prof0,
                                                prev=pred_prev))
            anti_sign_prev = anti_sign

        # Asymmetry probe: sign change marks passage through a pitchfork of
        # the symmetric family (used on switched branches).
        if probe is not None:
            phi = float(probe @ (u_new - u_new[::-1]))
            sign = np.sign(phi) if phi != 0.0 else None
            if (sign is not None and probe_sign_prev is not None
                    and sign != probe_sign_prev):
                events.append(_refine_probe_crossing(problem, prev_state, h,
                                                     probe, settings, prof0,
                                                     prev=pred_prev))
            if sign is not None:
                probe_sign_prev = sign

        # Bordered determinant monitor on branches without symmetry tracking.
        if det_sign_prev is not None:
            det_sign = _bordered_det_sign(problem, u_new, mu_new, t_new)
            if det_sign is not None:
                if det_sign != det_sign_prev and not _event_near(events, s_new, 2.0 * max(h, ds)):
                    warnings.append(
                        f"bordered determinant sign flip near s = {s_new:.6g} "
                        "without a recorded event")
                det_sign_prev = det_sign

        if not edge_warned:
            d_val = meta["d"]
            bnd = meta["boundary"]
            if d_val is not None and bnd is not None:
                edge = d_val * max(abs(u_new[0] - bnd.left), abs(u_new[-1] - bnd.right))
                if edge > settings.edge_monitor_tol:
                    warnings.append(
                        f"edge residual monitor {edge:.3e} exceeds "
                        f"{settings.edge_monitor_tol:.1e} at s = {s_new:.6g}; "
                        "window may be too small")
                    edge_warned = True

        # Leave the working mu interval.
        if not mu_lo <= mu_new <= mu_hi:
            bound = mu_lo if mu_new < mu_lo else mu_hi
            events.append(Event(kind=EventKind.WINDOW_EDGE, mu_at=bound,
                                s_at=s_new))
            meta["stop_reason"] = "window-edge"
            return _finish(points, events, warnings, meta, settings)

        # Closure test against the start point, armed only once the trace has
        # genuinely left the start neighborhood so that a run of short capped
        # steps cannot close onto its own departure segment.
        if step_index >= settings.min_closure_steps:
            du = float(np.linalg.norm(u_new - u0))
            dist = float(np.hypot(du, mu_new - mu0))
            if not closure_armed:
                if dist > 4.0 * settings.ds:
                    closure_armed = True
            elif dist < 2.0 * max(h, settings.ds) and float(t_new @ t0) > 0.9:
                closure = _attempt_closure(problem, u_new, mu_new, t_new,
                                           u0, mu0, t0, settings)
                if closure is not None:
                    cu, cmu, ct, gaps = closure
                    points.append(BranchPoint(
                        profile=prof0.with_values(cu), mu=float(cmu),
                        s=s_new + dist, tangent=ct,
                        measure=float(np.linalg.norm(cu))))
                    meta["closure"] = gaps
                    meta["stop_reason"] = "closed"
                    return _finish(points, events, warnings, meta, settings)

        # Quasi-period detection for snaking branches.
        if (settings.snaking_detection and runs0.size > 0
                and (prev_state.mu - mu0) * (mu_new - mu0) < 0.0
                and t_new[-1] * t0[-1] > 0.0
                and s_new - last_period_s > 10.0 * settings.ds):
            period = _check_period(problem, prev_state, u_new, mu_new, mu0,
                                   u0, runs0_first, runs0, prof0.n_min,
                                   settings)
            if period is not None:
                meta["periods"].append(period)
                last_period_s = s_new
                if len(meta["periods"]) >= settings.max_periods:
                    meta["stop_reason"] = "period-budget"
                    return _finish(points, events, warnings, meta, settings)

        pred_prev = state
        state = _State(u=u_new, mu=float(mu_new), t=t_new, s=s_new)
        h_prev = h

    meta["stop_reason"] = "max-steps"
    return _finish(points, events, warnings, meta, settings)


def _event_near(events: list[Event], s: float, window: float) -> bool:
    return any(abs(e.s_at - s) <= window for e in events)


def _attempt_closure(problem, u_new, mu_new, t_new, u0, mu0, t0, settings):
    """Correct the current point into the hyperplane through the start; the
    result measures the true closure gap of the loop."""
    try:
        cu, cmu, _ = _correct(problem, u_new, mu_new, t_new, u0, mu0, settings)
    except (NewtonFailure, SingularBorderedError, SingularMatrixError):
        return None
    gap_mu = abs(cmu - mu0)
    gap_profile = _norm_inf(cu - u0)
    if gap_mu > settings.closure_mu_tol or gap_profile > settings.closure_profile_tol:
        return None
    try:
        ct = _tangent_at(problem, cu, cmu, t_new)
    except (SingularBorderedError, SingularMatrixError):
        return None
    alignment = float(ct @ t0)
    if alignment < settings.closure_tangent_min:
        return None
    return cu, cmu, ct, {"gap_mu": gap_mu, "gap_profile": gap_profile,
                         "tangent_alignment": alignment}


def _check_period(problem, prev_state, u_new, mu_new, mu0, u0,
                  runs0_first, runs0, n_min, settings):
    """Newton-correct onto mu = mu0 and compare run-length structure with the
    start; uniform plateau growth at unchanged gaps is one snaking period."""
    frac = (mu0 - prev_state.mu) / (mu_new - prev_state.mu)
    guess = prev_state.u + frac * (u_new - prev_state.u)

    def res(u):
        return problem.residual(u, mu0)

    def jac(u):
        return problem.jacobian(u, mu0)

    try:
        result = newton_solve(res, jac, guess,
                              NewtonConfig(abs_tol=settings.newton_tol,
                                           max_iter=12))
    except NewtonFailure:
        return None
    first, runs = pulses.run_lengths(result.x, settings.threshold)
    if runs.size != runs0.size or runs.size == 0:
        return None
    growth = runs[0] - runs0[0]
    if growth <= 0:
        return None
    plateaus_ok = all(runs[i] - runs0[i] == growth for i in range(0, runs.size, 2))
    gaps_ok = all(runs[i] == runs0[i] for i in range(1, runs.size, 2))
    if not (plateaus_ok and gaps_ok):
        return None
    p = first - runs0_first
    return {"p": int(p), "growth": int(growth), "s": float(prev_state.s),
            "norm": float(np.linalg.norm(result.x))}


def _refine_probe_crossing(problem, state, ds, probe, settings, template,
                           prev=None):
    """Bisect the sign change of the asymmetry probe; the crossing is a
    pitchfork where the switched branch meets the symmetric family."""
    phi0 = float(probe @ (state.u - state.u[::-1]))
    sign0 = np.sign(phi0)
    lo, hi = 0.0, ds
    u_best, mu_best = state.u, state.mu
    refined = True
    failures = 0
    for _ in range(60):
        if hi - lo < 1e-11:
            break
        mid = 0.5 * (lo + hi)
        try:
            u, mu, _ = _step_point(problem, state, mid, settings, prev=prev)
        except (NewtonFailure, SingularBorderedError, SingularMatrixError):
            failures += 1
            if failures > 6:
                refined = False
                break
            hi = mid
            continue
        phi = float(probe @ (u - u[::-1]))
        if np.sign(phi) == sign0 and phi != 0.0:
            lo = mid
        else:
            hi = mid
        u_best, mu_best = u, mu
    asym = _antisymmetry_measure(u_best)
    event = Event(kind=EventKind.PITCHFORK, mu_at=float(mu_best),
                  s_at=state.s + 0.5 * (lo + hi), sector="antisymmetric",
                  refined=refined,
                  data={"asymmetry": asym})
    event.data["point"] = BranchPoint(
        profile=template.with_values(u_best), mu=float(mu_best),
        s=state.s + 0.5 * (lo + hi), tangent=None,
        measure=float(np.linalg.norm(u_best)))
    return event


def _finish(points, events, warnings, meta, settings) -> Branch:
    branch = Branch(points=points, events=events, topology=Open("unclassified"),
                    warnings=warnings, meta=meta)
    branch.topology = classify_topology(branch)
    return branch


def classify_topology(branch: Branch) -> Topology:
    """Closed when the branch returned to its start within the closure
    tolerances; Snaking when quasi-periods with uniform plateau growth were
    detected; Open otherwise, carrying the stop reason."""
    closure = branch.meta.get("closure")
    if closure is not None:
        return Closed(gap_mu=closure["gap_mu"],
                      gap_profile=closure["gap_profile"],
                      tangent_alignment=closure["tangent_alignment"])
    periods = branch.meta.get("periods") or []
    if periods:
        # Recorded growth and shift values are cumulative relative to the
        # start, so a steady snake shows uniform per-period increments.
        growths = [p["growth"] for p in periods]
        shifts = [p["p"] for p in periods]
        d_growth = {b - a for a, b in zip([0] + growths[:-1], growths)}
        d_shift = {b - a for a, b in zip([0] + shifts[:-1], shifts)}
        if len(d_growth) > 1 or len(d_shift) > 1:
            branch.warnings.append(
                f"inconsistent period structure: growth increments "
                f"{sorted(d_growth)}, shift increments {sorted(d_shift)}")
        return Snaking(p=shifts[0], growth=growths[0], periods=len(periods))
    return Open(branch.meta.get("stop_reason", "unknown"))


def branch_switch(problem: ContinuationProblem, pitchfork: Event,
                  settings: ContinuationSettings | None = None,
                  direction: int = 1,
                  epsilon: float | None = None) -> BranchPoint:
    """Step off a refined pitchfork onto the symmetry-broken branch.

    The new start is the symmetric profile displaced by epsilon along the
    antisymmetric null vector (epsilon defaults to 1e-3 times the profile
    norm), corrected by a Newton iteration that keeps mu free.  The
    iteration works in symmetry-adapted coordinates with the amplitude
    along the null vector pinned, so the corrector never sees the singular
    direction; the free mu regularizes the second small eigenvalue that
    appears when the pitchfork sits close to a fold.  On corrector failure
    the displacement is halved, up to 5 times.  The returned point carries
    the bordered-system tangent of the symmetry-broken branch, which at
    small amplitude already bends sharply toward the fold direction.
    """
    settings = settings or ContinuationSettings()
    if pitchfork.kind is not EventKind.PITCHFORK:
        raise ValueError("branch_switch needs a pitchfork event")
    if direction not in (1, -1):
        raise ValueError(f"direction must be +1 or -1, got {direction}")
    point = pitchfork.data.get("point")
    vec = pitchfork.data.get("null_vector")
    if point is None or vec is None:
        raise ValueError("pitchfork event lacks refined point or null vector")
    u_pf = np.array(point.profile.values, dtype=float)
    mu_pf = point.mu
    n = u_pf.shape[0]
    if _norm_inf(u_pf - u_pf[::-1]) > 1e-8:
        raise BranchSwitchError(
            "branch switch needs a reflection-symmetric base point")
    eps0 = epsilon if epsilon is not None else 1e-3 * float(np.linalg.norm(u_pf))
    if eps0 <= 0.0:
        raise ValueError("perturbation amplitude must be positive")

    # Orthonormal bases for the reflection-even subspace and for the
    # reflection-odd subspace with the null direction removed.  The odd
    # amplitude along vec is then pinned exactly by construction, so the
    # corrector never sees the singular direction, while the second
    # near-zero (fold) eigenvalue of the even sector stays regularized by
    # the free mu.
    half = n // 2
    inv = 1.0 / np.sqrt(2.0)
    even = np.zeros((n, n - half))
    odd = np.zeros((n, half))
    for i in range(half):
        even[i, i] = even[n - 1 - i, i] = inv
        odd[i, i] = inv
        odd[n - 1 - i, i] = -inv
    if n % 2:
        even[half, n - half - 1] = 1.0
    coeff = odd.T @ vec
    basis, _ = np.linalg.qr(np.column_stack([coeff, np.eye(half)]))
    odd_rest = odd @ basis[:, 1:half]
    n_even = even.shape[1]

    def correct(u0: np.ndarray, mu0: float):
        """Damped Newton in the pinned-amplitude coordinates."""
        u, mu = u0, mu0
        rn = _norm_inf(problem.residual(u, mu))
        for _ in range(40):
            if rn <= settings.newton_tol:
                return u, mu
            jac = problem.jacobian(u, mu).to_dense()
            m = np.column_stack([jac @ even, jac @ odd_rest,
                                 problem.mu_derivative(u, mu)])
            # The row carrying the bifurcation equation shrinks linearly
            # with the pinned amplitude; equilibrate so the solve stays
            # accurate at small amplitudes.
            row_scale = np.abs(m).max(axis=1)
            row_scale[row_scale == 0.0] = 1.0
            try:
                dz = np.linalg.solve(m / row_scale[:, None],
                                     -problem.residual(u, mu) / row_scale)
            except np.linalg.LinAlgError:
                return None
            du = even @ dz[:n_even] + odd_rest @ dz[n_even:-1]
            dmu = float(dz[-1])
            if not np.all(np.isfinite(du)):
                return None
            lam, stepped = 1.0, False
            while lam >= 1.0 / 64.0:
                rt = _norm_inf(problem.residual(u + lam * du, mu + lam * dmu))
                if rt < rn or rt <= settings.newton_tol:
                    u = u + lam * du
                    mu = mu + lam * dmu
                    rn = rt
                    stepped = True
                    break
                lam *= 0.5
            if not stepped:
                return None
        return None

    def local(u: np.ndarray, mu: float) -> bool:
        return abs(mu - mu_pf) < 0.05 and _norm_inf(u - u_pf) < 0.5

    def finish(u: np.ndarray, mu: float) -> BranchPoint:
        hint = np.append(direction * vec, 0.0)
        try:
            tangent = _tangent_at(problem, u, mu, hint)
        except (SingularBorderedError, SingularMatrixError):
            tangent = hint / np.linalg.norm(hint)
        return BranchPoint(profile=point.profile.with_values(u),
                           mu=float(mu), s=0.0, tangent=tangent,
                           measure=float(np.linalg.norm(u)))

    for k in range(6):
        res = correct(u_pf + direction * eps0 * 0.5 ** k * vec, mu_pf)
        if res is not None and local(*res):
            return finish(*res)
    raise BranchSwitchError(
        f"no symmetry-broken solution found near the pitchfork at "
        f"mu={mu_pf:.6f}")
