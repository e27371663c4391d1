"""Spectral stability of lattice steady states.

The linearization about a steady state is the symmetric tridiagonal matrix
with the coupling on the off-diagonals, so real spectra are guaranteed and
eigenvalue counts can be read off Sturm sequences without forming dense
matrices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lattice
from .continuation import Branch, EventKind
from .lattice import LatticeParams, LatticeProfile
from .linalg import eig_symmetric_tridiagonal, sturm_count

__all__ = [
    "SpectrumSummary",
    "spectrum",
    "unstable_count",
    "annotate_branch",
]

DEFAULT_MARGIN = 1e-8


@dataclass(frozen=True)
class SpectrumSummary:
    """Eigenvalues of the steady-state linearization, sorted ascending.

    unstable is the number of eigenvalues above +margin, marginal the number
    within [-margin, +margin]; stable_strictly reports a spectrum entirely
    below -margin.
    """

    eigenvalues: np.ndarray
    unstable: int
    marginal: int
    margin: float

    @property
    def stable_strictly(self) -> bool:
        return self.unstable == 0 and self.marginal == 0

    @property
    def largest(self) -> float:
        return float(self.eigenvalues[-1])


def spectrum(profile: LatticeProfile, params: LatticeParams,
             margin: float = DEFAULT_MARGIN) -> SpectrumSummary:
    """Full spectrum of the linearization about a profile."""
    if margin < 0.0:
        raise ValueError(f"margin must be nonnegative, got {margin}")
    jac = lattice.jacobian(profile, params)
    vals = eig_symmetric_tridiagonal(jac)
    unstable = int(np.count_nonzero(vals > margin))
    marginal = int(np.count_nonzero(np.abs(vals) <= margin))
    return SpectrumSummary(eigenvalues=vals, unstable=unstable,
                           marginal=marginal, margin=margin)


def unstable_count(profile: LatticeProfile, params: LatticeParams,
                   margin: float = DEFAULT_MARGIN) -> tuple[int, int]:
    """(unstable, marginal) eigenvalue counts from Sturm sequences alone."""
    jac = lattice.jacobian(profile, params)
    n = jac.n
    below_hi = sturm_count(jac, margin)
    below_lo = sturm_count(jac, -margin)
    return n - below_hi, below_hi - below_lo


def annotate_branch(branch: Branch, d: float,
                    margin: float = DEFAULT_MARGIN,
                    check_events: bool = True) -> Branch:
    """Fill in unstable_count for every point of a branch, in place.

    When check_events is set, any change of the count between consecutive
    points that has no recorded event within one step is appended to the
    branch warnings; a count change at a smooth piece of branch means a
    missed bifurcation.
    """
    prev_count: int | None = None
    prev_s = 0.0
    for point in branch.points:
        params = LatticeParams(d=d, mu=point.mu)
        n_unstable, n_marginal = unstable_count(point.profile, params, margin)
        point.unstable_count = n_unstable
        if check_events and prev_count is not None and n_unstable != prev_count:
            window = (point.s - prev_s) * 1.5 + margin
            covered = any(prev_s - window <= e.s_at <= point.s + window
                          for e in branch.events
                          if e.kind in (EventKind.FOLD, EventKind.PITCHFORK))
            if not covered:
                branch.warnings.append(
                    f"unstable count changed {prev_count} -> {n_unstable} near "
                    f"s = {point.s:.6g} with no event recorded within one step")
        prev_count = n_unstable
        prev_s = point.s
    return branch
