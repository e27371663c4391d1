"""Self-contained linear algebra for the continuation machinery.

Tridiagonal and bordered solves, symmetric-tridiagonal eigenvalues via
Sturm-sequence bisection, a damped Newton iteration, and a sampled
Newton-Kantorovich ball certificate.  Everything operates on small dense
windows (a few hundred sites), so robustness and exact eigenvalue counting
matter more than asymptotic speed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

__all__ = [
    "TridiagonalMatrix",
    "BorderedSystem",
    "NewtonConfig",
    "NewtonResult",
    "KantorovichCertificate",
    "LinearSolveError",
    "SingularMatrixError",
    "SingularBorderedError",
    "NewtonFailure",
    "solve_tridiagonal",
    "solve_bordered",
    "sturm_count",
    "eig_symmetric_tridiagonal",
    "smallest_eigenvalue",
    "newton_solve",
    "kantorovich_check",
]

# Thomas pivots below this magnitude trigger the partial-pivoted fallback.
PIVOT_FLOOR = 1e-13

# When True every tridiagonal/bordered solve re-verifies its own residual.
# The test suite switches this on; production runs leave it off and rely on
# the callers' independent residual checks.
VERIFY_SOLVES = False

_SOLVE_RESIDUAL_FACTOR = 1e-12
_BORDERED_RESIDUAL_TOL = 1e-10


class LinearSolveError(RuntimeError):
    """Base class for linear-solve failures."""


class SingularMatrixError(LinearSolveError):
    def __init__(self, message: str, pivot_index: int | None = None):
        super().__init__(message)
        self.pivot_index = pivot_index


class SingularBorderedError(LinearSolveError):
    """Bordered system singular; at a continuation point this signals a
    genuine branch point rather than a numerical accident."""


class NewtonFailure(RuntimeError):
    def __init__(self, message: str, result: "NewtonResult"):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class TridiagonalMatrix:
    """Real tridiagonal matrix stored as three bands.

    ``sub[i]`` couples row i+1 to column i, ``sup[i]`` row i to column i+1.
    A 1x1 matrix has empty off-diagonal bands.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        sub = np.asarray(self.sub, dtype=float)
        diag = np.asarray(self.diag, dtype=float)
        sup = np.asarray(self.sup, dtype=float)
        n = diag.shape[0]
        if n < 1:
            raise ValueError("empty matrix")
        if sub.shape != (max(n - 1, 0),) or sup.shape != (max(n - 1, 0),):
            raise ValueError(
                f"band lengths {sub.shape}/{sup.shape} inconsistent with size {n}"
            )
        if not (np.all(np.isfinite(sub)) and np.all(np.isfinite(diag)) and np.all(np.isfinite(sup))):
            raise ValueError("non-finite matrix entry")
        object.__setattr__(self, "sub", sub)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "sup", sup)

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        if self.n > 1:
            y[:-1] += self.sup * x[1:]
            y[1:] += self.sub * x[:-1]
        return y

    def inf_norm(self) -> float:
        n = self.n
        if n == 1:
            return abs(float(self.diag[0]))
        rows = np.abs(self.diag)
        rows[:-1] += np.abs(self.sup)
        rows[1:] += np.abs(self.sub)
        return float(rows.max())

    def is_symmetric(self, rtol: float = 0.0) -> bool:
        if self.n == 1:
            return True
        if rtol == 0.0:
            return bool(np.array_equal(self.sub, self.sup))
        scale = max(np.abs(self.sub).max(), np.abs(self.sup).max(), 1.0)
        return bool(np.abs(self.sub - self.sup).max() <= rtol * scale)

    def to_dense(self) -> np.ndarray:
        a = np.diag(self.diag)
        if self.n > 1:
            a += np.diag(self.sup, 1) + np.diag(self.sub, -1)
        return a


@dataclass(frozen=True)
class BorderedSystem:
    """Square system [[core, border_col], [border_row, corner]].

    Used for pseudo-arclength correctors: the core is the state Jacobian and
    stays well-conditioned away from folds, while the border keeps the full
    system invertible at folds of the core.
    """

    core: TridiagonalMatrix
    border_col: np.ndarray
    border_row: np.ndarray
    corner: float

    def __post_init__(self):
        col = np.asarray(self.border_col, dtype=float)
        row = np.asarray(self.border_row, dtype=float)
        n = self.core.n
        if col.shape != (n,) or row.shape != (n,):
            raise ValueError(f"border shapes {col.shape}/{row.shape} do not match core size {n}")
        object.__setattr__(self, "border_col", col)
        object.__setattr__(self, "border_row", row)
        object.__setattr__(self, "corner", float(self.corner))

    @property
    def n(self) -> int:
        return self.core.n

    def matvec(self, x: np.ndarray, y: float) -> tuple[np.ndarray, float]:
        top = self.core.matvec(x) + self.border_col * y
        bottom = float(self.border_row @ x) + self.corner * y
        return top, bottom

    def to_dense(self) -> np.ndarray:
        n = self.n
        a = np.zeros((n + 1, n + 1))
        a[:n, :n] = self.core.to_dense()
        a[:n, n] = self.border_col
        a[n, :n] = self.border_row
        a[n, n] = self.corner
        return a

    def inf_norm(self) -> float:
        dense_free = self.core.inf_norm() + float(np.abs(self.border_col).max(initial=0.0))
        last = float(np.abs(self.border_row).sum() + abs(self.corner))
        return max(dense_free, last)


@dataclass
class NewtonConfig:
    abs_tol: float = 1e-11
    max_iter: int = 25
    damping: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.damping <= 1.0:
            raise ValueError(f"damping {self.damping} outside (0, 1]")
        if self.abs_tol <= 0.0:
            raise ValueError("abs_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class NewtonResult:
    x: np.ndarray
    iterations: int
    residual_history: np.ndarray
    converged: bool


@dataclass(frozen=True)
class KantorovichCertificate:
    """Sampled contraction certificate for a Newton iteration.

    kappa estimates sup over the rho-ball of ||I - A^{-1} DH(x)||_inf from a
    finite sample, so `holds` is a strong diagnostic, not a proof.  When it
    holds, the damped Newton iteration from the base point stays in the ball
    and converges to the unique root inside it.
    """

    kappa: float
    rho: float
    initial_bound: float
    holds: bool
    samples: int

    def __post_init__(self):
        if self.rho <= 0.0:
            raise ValueError("rho must be positive")
        if self.holds and not (0.0 <= self.kappa < 1.0):
            raise ValueError("certificate cannot hold with kappa outside [0, 1)")
        if self.holds and self.initial_bound > (1.0 - self.kappa) * self.rho:
            raise ValueError("holds=True inconsistent with initial_bound and kappa")


def _thomas(sub: Sequence[float], diag: Sequence[float], sup: Sequence[float],
            rhs: Sequence[float]) -> list[float] | None:
    """Thomas elimination without pivoting.  Returns None when a pivot falls
    below PIVOT_FLOOR, in which case the caller re-solves with pivoting."""
    n = len(diag)
    cp = [0.0] * n
    dp = [0.0] * n
    piv = diag[0]
    if abs(piv) < PIVOT_FLOOR:
        return None
    cp[0] = sup[0] / piv if n > 1 else 0.0
    dp[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - sub[i - 1] * cp[i - 1]
        if abs(piv) < PIVOT_FLOOR:
            return None
        if i < n - 1:
            cp[i] = sup[i] / piv
        dp[i] = (rhs[i] - sub[i - 1] * dp[i - 1]) / piv
    x = [0.0] * n
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def _gtsv_fallback(m: TridiagonalMatrix, rhs: np.ndarray) -> np.ndarray:
    """LAPACK gtsv: tridiagonal LU with partial pivoting."""
    n = m.n
    if n == 1:
        if m.diag[0] == 0.0:
            raise SingularMatrixError("singular 1x1 matrix", pivot_index=0)
        return np.asarray(rhs, dtype=float) / m.diag[0]
    dl = np.array(m.sub, dtype=float)
    d = np.array(m.diag, dtype=float)
    du = np.array(m.sup, dtype=float)
    b = np.array(rhs, dtype=float)
    _, _, _, x, info = lapack.dgtsv(dl, d, du, b)
    if info > 0:
        raise SingularMatrixError(
            f"singular tridiagonal matrix (zero pivot at index {info - 1})",
            pivot_index=info - 1,
        )
    if info < 0:
        raise LinearSolveError(f"gtsv illegal argument {-info}")
    return x


def solve_tridiagonal(m: TridiagonalMatrix, rhs: np.ndarray) -> np.ndarray:
    """Solve m x = rhs.

    Thomas elimination with pivot monitoring; pivots below 1e-13 in magnitude
    trigger a partial-pivoted re-solve.  An exactly singular matrix raises
    SingularMatrixError carrying the offending pivot index.
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (m.n,):
        raise ValueError(f"rhs shape {rhs.shape} does not match matrix size {m.n}")
    sol = _thomas(m.sub.tolist(), m.diag.tolist(), m.sup.tolist(), rhs.tolist())
    if sol is None:
        x = _gtsv_fallback(m, rhs)
    else:
        x = np.array(sol)
    if VERIFY_SOLVES:
        res = np.abs(m.matvec(x) - rhs).max()
        bound = _SOLVE_RESIDUAL_FACTOR * (
            m.inf_norm() * np.abs(x).max(initial=0.0) + np.abs(rhs).max(initial=0.0)
        )
        if res > max(bound, 1e-300):
            raise LinearSolveError(
                f"tridiagonal solve residual {res:.3e} exceeds bound {bound:.3e}"
            )
    return x


def _bordered_residual(b: BorderedSystem, x: np.ndarray, y: float,
                       rhs: np.ndarray, rhs_corner: float) -> float:
    top, bottom = b.matvec(x, y)
    res = max(np.abs(top - rhs).max(initial=0.0), abs(bottom - rhs_corner))
    scale = b.inf_norm() * max(np.abs(x).max(initial=0.0), abs(y)) + max(
        np.abs(rhs).max(initial=0.0), abs(rhs_corner), 1e-300
    )
    return res / scale


def _bordered_dense_solve(b: BorderedSystem, rhs: np.ndarray,
                          rhs_corner: float) -> tuple[np.ndarray, float]:
    a = b.to_dense()
    full = np.append(rhs, rhs_corner)
    try:
        sol = scipy.linalg.solve(a, full)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SingularBorderedError(f"bordered system singular: {exc}") from exc
    if not np.all(np.isfinite(sol)):
        raise SingularBorderedError("bordered system singular (non-finite solution)")
    return sol[:-1], float(sol[-1])


def solve_bordered(b: BorderedSystem, rhs: np.ndarray,
                   rhs_corner: float) -> tuple[np.ndarray, float]:
    """Solve the bordered system for (x, y).

    Block elimination through the tridiagonal core, verified against the full
    residual; near-singular cores (the fold case) get one refinement round and
    then a dense partial-pivoted solve.  A genuinely singular bordered matrix
    raises SingularBorderedError.
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (b.n,):
        raise ValueError(f"rhs shape {rhs.shape} does not match system size {b.n}")
    rhs_corner = float(rhs_corner)

    x: np.ndarray | None = None
    y = 0.0
    try:
        z1 = solve_tridiagonal(b.core, rhs)
        z2 = solve_tridiagonal(b.core, b.border_col)
        denom = b.corner - float(b.border_row @ z2)
        if denom != 0.0 and np.isfinite(denom):
            y = (rhs_corner - float(b.border_row @ z1)) / denom
            x = z1 - y * z2
    except SingularMatrixError:
        x = None

    if x is not None and np.all(np.isfinite(x)) and np.isfinite(y):
        rel = _bordered_residual(b, x, y, rhs, rhs_corner)
        if rel <= _BORDERED_RESIDUAL_TOL:
            return x, y
        # One round of iterative refinement before giving up on the fast path.
        try:
            top, bottom = b.matvec(x, y)
            dres = rhs - top
            dcorner = rhs_corner - bottom
            w1 = solve_tridiagonal(b.core, dres)
            w2 = solve_tridiagonal(b.core, b.border_col)
            denom = b.corner - float(b.border_row @ w2)
            if denom != 0.0:
                dy = (dcorner - float(b.border_row @ w1)) / denom
                dx = w1 - dy * w2
                x2, y2 = x + dx, y + dy
                if np.all(np.isfinite(x2)) and _bordered_residual(
                        b, x2, y2, rhs, rhs_corner) <= _BORDERED_RESIDUAL_TOL:
                    return x2, y2
        except SingularMatrixError:
            pass

    x, y = _bordered_dense_solve(b, rhs, rhs_corner)
    rel = _bordered_residual(b, x, y, rhs, rhs_corner)
    if rel > 1e-6:
        raise SingularBorderedError(
            f"bordered system effectively singular (relative residual {rel:.3e})"
        )
    return x, y


def _sturm_counts(diag: np.ndarray, off2: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """Number of eigenvalues strictly below each shift, vectorized over shifts."""
    tiny = np.finfo(float).tiny
    q = diag[0] - shifts
    count = (q < 0.0).astype(np.int64)
    for i in range(1, diag.shape[0]):
        q = np.where(q == 0.0, -tiny, q)
        q = diag[i] - shifts - off2[i - 1] / q
        count += q < 0.0
    return count


def sturm_count(m: TridiagonalMatrix, x: float) -> int:
    """Exact count of eigenvalues of a symmetric tridiagonal matrix below x."""
    if not m.is_symmetric(rtol=1e-12):
        raise ValueError("Sturm count requires a symmetric matrix (sub == sup)")
    if m.n == 1:
        return int(m.diag[0] < x)
    # Scalar recurrence on plain floats; faster than numpy for single shifts.
    tiny = np.finfo(float).tiny
    diag = m.diag.tolist()
    off2 = (m.sub * m.sup).tolist()
    q = diag[0] - x
    count = 1 if q < 0.0 else 0
    for i in range(1, len(diag)):
        if q == 0.0:
            q = -tiny
        q = diag[i] - x - off2[i - 1] / q
        if q < 0.0:
            count += 1
    return count


def eig_symmetric_tridiagonal(m: TridiagonalMatrix, tol: float | None = None) -> np.ndarray:
    """All eigenvalues of a symmetric tridiagonal matrix, ascending.

    Sturm-sequence bisection: every returned eigenvalue is bracketed by exact
    counts, so interval counts of the output agree with sturm_count for probe
    points further than tol from any eigenvalue.  Default accuracy is
    1e-10 * ||m||_inf.
    """
    if not m.is_symmetric(rtol=1e-12):
        raise ValueError("eigenvalue solve requires a symmetric matrix (sub == sup)")
    n = m.n
    if n == 1:
        return np.array([float(m.diag[0])])
    scale = m.inf_norm()
    if tol is None:
        tol = 1e-10 * max(scale, 1e-300)
    off = np.abs(m.sub)
    radius = np.zeros(n)
    radius[:-1] += off
    radius[1:] += off
    lo_all = float((m.diag - radius).min())
    hi_all = float((m.diag + radius).max())
    width = max(hi_all - lo_all, 1e-300)
    lo = np.full(n, lo_all - 1e-3 * width)
    hi = np.full(n, hi_all + 1e-3 * width)
    off2 = m.sub * m.sup
    wanted = np.arange(1, n + 1)
    while float((hi - lo).max()) > tol:
        mid = 0.5 * (lo + hi)
        counts = _sturm_counts(m.diag, off2, mid)
        below = counts >= wanted
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
    return np.sort(0.5 * (lo + hi))


def smallest_eigenvalue(m: TridiagonalMatrix, tol: float | None = None) -> float:
    """Smallest eigenvalue only, by bisection on the Sturm count."""
    if m.n == 1:
        return float(m.diag[0])
    scale = m.inf_norm()
    if tol is None:
        tol = 1e-12 * max(scale, 1.0)
    lo, hi = -scale - 1.0, scale + 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if sturm_count(m, mid) >= 1:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


ResidualFn = Callable[[np.ndarray], np.ndarray]
JacobianFn = Callable[[np.ndarray], TridiagonalMatrix]

_DAMPING_FLOOR = 2.0 ** -24


def newton_solve(residual_fn: ResidualFn, jacobian_fn: JacobianFn,
                 x0: np.ndarray, config: NewtonConfig | None = None) -> NewtonResult:
    """Damped Newton iteration on a tridiagonal system.

    The damping factor halves whenever a trial step increases the max-norm
    residual and resets to its configured value after every accepted step.
    Raises NewtonFailure (carrying the partial result) on non-convergence.
    """
    cfg = config or NewtonConfig()
    x = np.array(x0, dtype=float)
    r = np.asarray(residual_fn(x), dtype=float)
    rn = float(np.abs(r).max(initial=0.0))
    history = [rn]
    if rn <= cfg.abs_tol:
        return NewtonResult(x, 0, np.array(history), True)
    for it in range(1, cfg.max_iter + 1):
        jac = jacobian_fn(x)
        step = solve_tridiagonal(jac, -r)
        lam = cfg.damping
        while True:
            xt = x + lam * step
            rt = np.asarray(residual_fn(xt), dtype=float)
            rtn = float(np.abs(rt).max(initial=0.0))
            if rtn < rn or rtn <= cfg.abs_tol:
                break
            lam *= 0.5
            if lam < _DAMPING_FLOOR:
                history.append(rtn)
                raise NewtonFailure(
                    f"Newton stalled at iteration {it} (residual {rn:.3e})",
                    NewtonResult(x, it, np.array(history), False),
                )
        x, r, rn = xt, rt, rtn
        history.append(rn)
        if rn <= cfg.abs_tol:
            return NewtonResult(x, it, np.array(history), True)
    raise NewtonFailure(
        f"Newton did not converge in {cfg.max_iter} iterations (residual {rn:.3e})",
        NewtonResult(x, cfg.max_iter, np.array(history), False),
    )


def _solve_tridiagonal_multi(m: TridiagonalMatrix, rhs: np.ndarray) -> np.ndarray:
    """Solve with a matrix right-hand side via the pivoted LAPACK path."""
    if m.n == 1:
        if m.diag[0] == 0.0:
            raise SingularMatrixError("singular 1x1 matrix", pivot_index=0)
        return rhs / m.diag[0]
    _, _, _, x, info = lapack.dgtsv(m.sub.copy(), m.diag.copy(), m.sup.copy(), rhs.copy())
    if info > 0:
        raise SingularMatrixError(
            f"singular tridiagonal matrix (zero pivot at index {info - 1})",
            pivot_index=info - 1,
        )
    return x


def kantorovich_check(residual_fn: ResidualFn, jacobian_fn: JacobianFn,
                      x0: np.ndarray, rho: float = 0.25, kappa_target: float | None = None,
                      n_samples: int = 64,
                      rng: np.random.Generator | None = None) -> KantorovichCertificate:
    """Sampled Newton-Kantorovich certificate around x0 in the inf-norm ball
    of radius rho.

    kappa is the max of ||I - A^{-1} DH(x)||_inf over sampled x (half drawn
    uniformly inside the ball, half on its corners), with A the Jacobian at
    x0.  holds is True when kappa < 1 and ||A^{-1} H(x0)||_inf <=
    (1 - kappa) rho; kappa_target, when given, additionally requires
    kappa <= kappa_target.  Sampled, hence a diagnostic rather than a proof.
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    if n_samples < 1:
        raise ValueError("need at least one sample")
    rng = rng or np.random.default_rng(0)
    x0 = np.array(x0, dtype=float)
    n = x0.shape[0]
    a = jacobian_fn(x0)
    eye = np.eye(n)

    kappa = 0.0
    for k in range(n_samples):
        if k % 2 == 0:
            offset = rho * rng.uniform(-1.0, 1.0, size=n)
        else:
            offset = rho * rng.choice([-1.0, 1.0], size=n)
        dh = jacobian_fn(x0 + offset).to_dense()
        z = _solve_tridiagonal_multi(a, dh)
        kappa = max(kappa, float(np.abs(eye - z).sum(axis=1).max()))

    h0 = np.asarray(residual_fn(x0), dtype=float)
    initial_bound = float(np.abs(solve_tridiagonal(a, h0)).max(initial=0.0))
    holds = kappa < 1.0 and initial_bound <= (1.0 - kappa) * rho
    if kappa_target is not None:
        holds = holds and kappa <= kappa_target
    return KantorovichCertificate(
        kappa=kappa, rho=rho, initial_bound=initial_bound,
        holds=holds, samples=n_samples,
    )
