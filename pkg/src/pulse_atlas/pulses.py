"""Construction of multi-pulse profiles from the uncoupled limit.

A k-pulse is described by an odd-length list of run lengths: plateaus near 1
at the odd positions, gaps near 0 in between.  At d = 0 these patterns are
exact steady states; homotopy in the coupling carries them to the target d.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import lattice
from .lattice import (
    Boundary, DIRICHLET_ZERO, LatticeParams, LatticeProfile,
)
from .linalg import NewtonConfig, NewtonFailure, newton_solve

__all__ = [
    "PulseSpec",
    "SymmetryClass",
    "OnSite",
    "OffSite",
    "Asymmetric",
    "PulseContinuationError",
    "singular_profile",
    "singular_front",
    "continue_in_d",
    "classify_symmetry",
    "measure_pulse_structure",
    "run_lengths",
    "embed_in_window",
    "build_pulse",
]


@dataclass(frozen=True)
class PulseSpec:
    """k pulses encoded as 2k - 1 run lengths plus background padding.

    lengths[0], lengths[2], ... are plateau widths (sites near 1);
    lengths[1], lengths[3], ... are gap widths (sites near 0) between them.
    pad counts background sites added on each side of the pattern.
    """

    lengths: tuple[int, ...]
    pad: int = 12

    def __post_init__(self):
        lengths = tuple(int(v) for v in self.lengths)
        if len(lengths) % 2 != 1:
            raise ValueError(f"need an odd number of run lengths, got {len(lengths)}")
        if any(v < 1 for v in lengths):
            raise ValueError(f"run lengths must be positive, got {lengths}")
        if self.pad < 1:
            raise ValueError(f"pad must be at least 1, got {self.pad}")
        object.__setattr__(self, "lengths", lengths)

    @property
    def k(self) -> int:
        return (len(self.lengths) + 1) // 2

    @property
    def total(self) -> int:
        return sum(self.lengths)

    @property
    def window(self) -> int:
        return self.total + 2 * self.pad

    def is_palindromic(self) -> bool:
        return self.lengths == self.lengths[::-1]


@dataclass(frozen=True)
class OnSite:
    center: int


@dataclass(frozen=True)
class OffSite:
    left_site: int

    @property
    def center(self) -> float:
        return self.left_site + 0.5


@dataclass(frozen=True)
class Asymmetric:
    pass


SymmetryClass = OnSite | OffSite | Asymmetric


class PulseContinuationError(RuntimeError):
    def __init__(self, message: str, d_reached: float,
                 last_profile: LatticeProfile | None = None):
        super().__init__(message)
        self.d_reached = d_reached
        self.last_profile = last_profile


def _pattern_n_min(spec: PulseSpec) -> int:
    # Center the activated pattern: site 0 for odd total, bond (0, 1) otherwise.
    total = spec.total
    if total % 2 == 1:
        return -spec.pad - (total - 1) // 2
    return -spec.pad - total // 2 + 1


def singular_profile(spec: PulseSpec, mu: float = 0.5,
                     interface: bool = False) -> LatticeProfile:
    """Exact steady state at d = 0: ones on plateaus, zeros elsewhere.

    With interface=True the background site immediately left of the first
    plateau takes the value mu instead of 0; that variant seeds the
    unstable-front family and is not used for pulse homotopy.
    """
    values = np.zeros(spec.window)
    pos = spec.pad
    for j, run in enumerate(spec.lengths):
        if j % 2 == 0:
            values[pos:pos + run] = 1.0
        pos += run
    if interface:
        values[spec.pad - 1] = mu
    return LatticeProfile(values, _pattern_n_min(spec), DIRICHLET_ZERO)


def singular_front(mu: float, half_width: int = 30,
                   interface: bool = False) -> LatticeProfile:
    """Step profile 0 -> 1 at d = 0 with matching mixed ghosts: zeros for
    n <= 0, ones for n > 0.  With interface=True site 0 sits at mu."""
    values = np.zeros(2 * half_width + 1)
    values[half_width + 1:] = 1.0
    if interface:
        values[half_width] = mu
    return LatticeProfile(values, -half_width, Boundary(0.0, 1.0))


def continue_in_d(profile: LatticeProfile, mu: float, d_target: float,
                  steps: int = 20, d_start: float = 1e-4,
                  newton: NewtonConfig | None = None) -> LatticeProfile:
    """Carry a d = 0 steady state to d_target by Newton correction along a
    geometric ladder of couplings (default 20 steps from 1e-4).

    mu should stay away from 0 and 1; near the edges of the bistability range
    the branch folds in d and the Newton correction fails, which is reported
    through PulseContinuationError carrying the last good coupling.
    """
    if d_target < 0.0:
        raise ValueError(f"d_target must be nonnegative, got {d_target}")
    if d_target == 0.0:
        return profile
    if not 0.0 < mu < 1.0:
        raise ValueError(f"mu must lie in (0, 1), got {mu}")
    cfg = newton or NewtonConfig()
    if d_target <= d_start:
        ladder = np.array([d_target])
    else:
        ladder = np.geomspace(d_start, d_target, steps)
        ladder[-1] = d_target
    boundary = profile.boundary

    def correct(u, d):
        def res(x):
            return lattice.residual_values(x, d, mu, boundary.left, boundary.right)

        def jac(x):
            return lattice.jacobian_values(x, d, mu)

        return newton_solve(res, jac, u, cfg).x

    x = profile.values
    d_reached = 0.0
    for d in ladder:
        # Retry a failed rung from intermediate couplings; a fold in d makes
        # the usable step collapse, which the relative floor turns into an
        # error carrying the last good coupling.
        trial = float(d)
        while True:
            try:
                x = correct(x, trial)
            except NewtonFailure as exc:
                trial = 0.5 * (d_reached + trial)
                if trial - d_reached < 1e-6 * max(d, d_start):
                    raise PulseContinuationError(
                        f"homotopy in d failed at d = {d:.6g} "
                        f"(reached {d_reached:.6g})",
                        d_reached=d_reached,
                        last_profile=profile.with_values(x),
                    ) from exc
                continue
            d_reached = trial
            if trial == d:
                break
            trial = float(d)
    return profile.with_values(x)


def build_pulse(spec: PulseSpec, params: LatticeParams,
                newton: NewtonConfig | None = None,
                steps: int = 20) -> LatticeProfile:
    """Convenience wrapper: singular pattern continued to params.d at params.mu."""
    return continue_in_d(singular_profile(spec, params.mu), params.mu,
                         params.d, steps=steps, newton=newton)


def classify_symmetry(p: LatticeProfile, tol: float = 1e-8) -> SymmetryClass:
    """Search all site and bond centers for a reflection match within tol.

    The mirrored profile is compared on the overlap of the two windows; the
    sites outside the overlap must sit within tol of the background for the
    candidate to count, so a symmetric pulse in an off-center window is still
    recognized.
    """
    vals = p.values
    n = len(vals)
    background = p.boundary.left
    for doubled in range(0, 2 * (n - 1) + 1):
        # doubled = 2 * (center - n_min); even for sites, odd for bonds.
        ci2 = doubled
        lo = max(0, ci2 - (n - 1))
        hi = min(n - 1, ci2)
        if hi - lo + 1 < 2:
            continue
        seg = vals[lo:hi + 1]
        if np.abs(seg - seg[::-1]).max() > tol:
            continue
        outside = np.concatenate((vals[:lo], vals[hi + 1:]))
        if outside.size and np.abs(outside - background).max() > tol:
            continue
        if doubled % 2 == 0:
            return OnSite(center=p.n_min + doubled // 2)
        return OffSite(left_site=p.n_min + (doubled - 1) // 2)
    return Asymmetric()


def run_lengths(values: np.ndarray, threshold: float = 0.5) -> tuple[int, np.ndarray]:
    """Run-length structure of the thresholded profile.

    Returns (offset of the first active site, run lengths from the first to
    the last active site).  Runs alternate active/background starting active.
    Empty profiles give (-1, []).
    """
    active = np.asarray(values) > threshold
    idx = np.flatnonzero(active)
    if idx.size == 0:
        return -1, np.zeros(0, dtype=int)
    first, last = int(idx[0]), int(idx[-1])
    segment = active[first:last + 1]
    boundaries = np.flatnonzero(np.diff(segment.astype(np.int8)))
    edges = np.concatenate(([-1], boundaries, [segment.shape[0] - 1]))
    return first, np.diff(edges).astype(int)


def measure_pulse_structure(p: LatticeProfile, threshold: float = 0.5) -> PulseSpec:
    """Recover a PulseSpec from a profile by thresholding at 0.5.

    pad is the distance from the window edges to the activated pattern (the
    smaller of the two sides when the window is off center).
    """
    first, runs = run_lengths(p.values, threshold)
    if runs.size == 0:
        raise ValueError("no activated sites above threshold")
    if runs.size % 2 != 1:
        raise ValueError(f"thresholded profile has {runs.size} runs; expected an odd count")
    left_pad = first
    right_pad = len(p) - (first + int(runs.sum()))
    return PulseSpec(lengths=tuple(int(r) for r in runs),
                     pad=max(1, min(left_pad, right_pad)))


def embed_in_window(p: LatticeProfile, half_width: int) -> LatticeProfile:
    """Extend a profile to the window [-half_width, half_width] (or the
    half-integer-centered analogue) by padding with the boundary values.

    The pattern keeps its absolute site indices; the call fails if the profile
    does not fit.
    """
    spec_center2 = p.n_min + p.n_max  # twice the window center
    if spec_center2 % 2 == 0:
        new_n_min = spec_center2 // 2 - half_width
        new_len = 2 * half_width + 1
    else:
        new_n_min = (spec_center2 + 1) // 2 - half_width
        new_len = 2 * half_width
    if new_n_min > p.n_min or new_n_min + new_len - 1 < p.n_max:
        raise ValueError(
            f"window half-width {half_width} too small for profile on "
            f"[{p.n_min}, {p.n_max}]")
    values = np.empty(new_len)
    lo = p.n_min - new_n_min
    values[:lo] = p.boundary.left
    values[lo:lo + len(p)] = p.values
    values[lo + len(p):] = p.boundary.right
    return LatticeProfile(values, new_n_min, p.boundary)
