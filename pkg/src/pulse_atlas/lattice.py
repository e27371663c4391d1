"""Steady states of the bistable lattice equation on a finite window.

Site dynamics follow u' = d (u_{n+1} + u_{n-1} - 2 u_n) + f(u_n, mu) with the
cubic f(u, mu) = u (u - mu) (1 - u); steady states solve the zero set of the
right-hand side on a window with fixed ghost values just outside it.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .linalg import TridiagonalMatrix

__all__ = [
    "LatticeParams",
    "Boundary",
    "DIRICHLET_ZERO",
    "DIRICHLET_ONE",
    "LatticeProfile",
    "HomogeneousState",
    "nonlinearity",
    "nonlinearity_du",
    "nonlinearity_du2",
    "nonlinearity_dmu",
    "residual",
    "residual_values",
    "jacobian",
    "jacobian_values",
    "involution_u_to_one_minus_u",
    "reflect",
    "shift",
    "homogeneous_profile",
    "edge_residual_monitor",
    "reflection_sectors",
    "reflect_values",
    "is_reflection_symmetric",
]

MIN_WINDOW = 3


@dataclass(frozen=True)
class LatticeParams:
    """Coupling strength d >= 0 and detuning mu of the cubic."""

    d: float
    mu: float

    def __post_init__(self):
        if not np.isfinite(self.d) or self.d < 0.0:
            raise ValueError(f"coupling d must be finite and nonnegative, got {self.d}")
        if not np.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu}")


@dataclass(frozen=True)
class Boundary:
    """Fixed ghost values immediately outside the window.

    The zero-background case is the default; the complemented variant (ghosts
    at 1) exists so the u -> 1 - u involution stays exact, and mixed values
    support front-like profiles with different tails on each side.
    """

    left: float
    right: float

    def complement(self) -> "Boundary":
        return Boundary(1.0 - self.left, 1.0 - self.right)


DIRICHLET_ZERO = Boundary(0.0, 0.0)
DIRICHLET_ONE = Boundary(1.0, 1.0)


class HomogeneousState(Enum):
    """The three spatially constant steady states."""

    ZERO = "zero"
    MU = "mu"
    ONE = "one"


@dataclass(frozen=True)
class LatticeProfile:
    """Real values on the integer window n_min .. n_min + len - 1.

    Immutable; operations on profiles return new instances.
    """

    values: np.ndarray
    n_min: int = 0
    boundary: Boundary = DIRICHLET_ZERO

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError(f"profile values must be one-dimensional, got shape {vals.shape}")
        if vals.shape[0] < MIN_WINDOW:
            raise ValueError(f"window must span at least {MIN_WINDOW} sites, got {vals.shape[0]}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("profile contains non-finite values")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "n_min", int(self.n_min))

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def n_max(self) -> int:
        return self.n_min + len(self) - 1

    def sites(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def value_at(self, n: int) -> float:
        if not self.n_min <= n <= self.n_max:
            raise ValueError(f"site {n} outside window [{self.n_min}, {self.n_max}]")
        return float(self.values[n - self.n_min])

    def with_values(self, values: np.ndarray) -> "LatticeProfile":
        return LatticeProfile(values, self.n_min, self.boundary)


def nonlinearity(u, mu):
    """f(u, mu) = u (u - mu) (1 - u)."""
    return u * (u - mu) * (1.0 - u)


def nonlinearity_du(u, mu):
    return -3.0 * u * u + 2.0 * (1.0 + mu) * u - mu


def nonlinearity_du2(u, mu):
    return -6.0 * u + 2.0 * (1.0 + mu)


def nonlinearity_dmu(u, mu):
    return -u * (1.0 - u)


def residual_values(u: np.ndarray, d: float, mu: float,
                    left_ghost: float, right_ghost: float) -> np.ndarray:
    """Steady-state residual on raw values; ghosts supply the sites just
    outside the window."""
    left = np.empty_like(u)
    left[0] = left_ghost
    left[1:] = u[:-1]
    right = np.empty_like(u)
    right[-1] = right_ghost
    right[:-1] = u[1:]
    return d * (left + right - 2.0 * u) + nonlinearity(u, mu)


def residual(p: LatticeProfile, params: LatticeParams) -> np.ndarray:
    return residual_values(p.values, params.d, params.mu,
                           p.boundary.left, p.boundary.right)


def jacobian_values(u: np.ndarray, d: float, mu: float) -> TridiagonalMatrix:
    n = u.shape[0]
    off = np.full(n - 1, d)
    diag = -2.0 * d + nonlinearity_du(u, mu)
    return TridiagonalMatrix(sub=off, diag=diag, sup=off.copy())


def jacobian(p: LatticeProfile, params: LatticeParams) -> TridiagonalMatrix:
    """Jacobian of the residual: symmetric tridiagonal with off-diagonal d."""
    return jacobian_values(p.values, params.d, params.mu)


def involution_u_to_one_minus_u(
        p: LatticeProfile, params: LatticeParams) -> tuple[LatticeProfile, LatticeParams]:
    """Map (u, mu) -> (1 - u, 1 - mu), which negates the residual entrywise.

    The image profile carries complemented ghost values so the identity is
    exact including the window edges; the returned boundary records that
    convention.
    """
    image = LatticeProfile(1.0 - p.values, p.n_min, p.boundary.complement())
    return image, LatticeParams(params.d, 1.0 - params.mu)


def _center_to_doubled(center: float) -> int:
    doubled = round(2.0 * center)
    if abs(2.0 * center - doubled) > 1e-9:
        raise ValueError(f"reflection center must be a site or bond midpoint, got {center}")
    return int(doubled)


def reflect(p: LatticeProfile, center: float) -> LatticeProfile:
    """Mirror the profile about a site (integer center) or bond midpoint
    (integer + 1/2).  The window maps to its mirror image."""
    doubled = _center_to_doubled(center)
    if not (2 * p.n_min <= doubled <= 2 * p.n_max):
        raise ValueError(
            f"center {center} outside window [{p.n_min}, {p.n_max}]")
    new_n_min = doubled - p.n_max
    return LatticeProfile(p.values[::-1], new_n_min,
                          Boundary(p.boundary.right, p.boundary.left))


def shift(p: LatticeProfile, k: int) -> LatticeProfile:
    """Index translation: the result takes at site n the value of p at n + k."""
    return LatticeProfile(p.values, p.n_min - int(k), p.boundary)


def homogeneous_profile(state: HomogeneousState, params: LatticeParams,
                        length: int, n_min: int = 0,
                        boundary: Boundary | None = None) -> LatticeProfile:
    """Constant profile at one of the homogeneous roots; by default the ghost
    values match the constant, making the residual zero everywhere."""
    value = {"zero": 0.0, "mu": params.mu, "one": 1.0}[state.value]
    if boundary is None:
        boundary = Boundary(value, value)
    return LatticeProfile(np.full(length, value), n_min, boundary)


def edge_residual_monitor(p: LatticeProfile, params: LatticeParams) -> float:
    """Truncation-error proxy: coupling strength times the worst mismatch
    between an edge value and its ghost.  Small values mean the window is wide
    enough that the fixed ghosts do not distort the solution."""
    return params.d * max(abs(p.values[0] - p.boundary.left),
                          abs(p.values[-1] - p.boundary.right))


def reflect_values(values: np.ndarray) -> np.ndarray:
    return values[::-1]


def is_reflection_symmetric(p: LatticeProfile, center: float, tol: float = 1e-8) -> bool:
    """True when the window is symmetric about center and the values match
    their mirror image within tol."""
    doubled = _center_to_doubled(center)
    if p.n_min + p.n_max != doubled:
        return False
    return bool(np.abs(p.values - p.values[::-1]).max() <= tol)


def reflection_sectors(jac: TridiagonalMatrix, n_min: int,
                       center: float) -> tuple[TridiagonalMatrix, TridiagonalMatrix]:
    """Block-diagonalize a symmetric tridiagonal Jacobian under the window
    reflection about center.

    Requires the window to be symmetric about the center and the diagonal to
    respect the reflection.  Returns (symmetric sector, antisymmetric sector);
    their sizes sum to the window length.  For a site center the antisymmetric
    sector drops the center row; for a bond center the leading diagonal
    entries pick up +/- the coupling.
    """
    n = jac.n
    n_max = n_min + n - 1
    doubled = _center_to_doubled(center)
    if n_min + n_max != doubled:
        raise ValueError(
            f"window [{n_min}, {n_max}] is not symmetric about center {center}")
    diag = jac.diag
    sub = jac.sub
    if np.abs(diag - diag[::-1]).max() > 1e-8 * max(1.0, float(np.abs(diag).max())):
        raise ValueError("Jacobian diagonal is not reflection symmetric")

    if doubled % 2 == 0:
        # Site center: index ci in the values array.
        ci = (doubled // 2) - n_min
        half = n - 1 - ci
        anti_diag = diag[ci + 1:].copy()
        anti_off = sub[ci + 1:].copy()
        sym_diag = np.concatenate(([diag[ci]], diag[ci + 1:]))
        sym_off = np.concatenate(([np.sqrt(2.0) * sub[ci]], sub[ci + 1:]))
        assert anti_diag.shape[0] == half and sym_diag.shape[0] == half + 1
    else:
        # Bond center between mi and mi + 1.
        mi = (doubled - 1) // 2 - n_min
        anti_diag = diag[mi + 1:].copy()
        anti_diag[0] -= sub[mi]
        anti_off = sub[mi + 1:].copy()
        sym_diag = diag[mi + 1:].copy()
        sym_diag[0] += sub[mi]
        sym_off = sub[mi + 1:].copy()
    sym = TridiagonalMatrix(sub=sym_off.copy(), diag=sym_diag, sup=sym_off.copy())
    anti = TridiagonalMatrix(sub=anti_off.copy(), diag=anti_diag, sup=anti_off.copy())
    return sym, anti
