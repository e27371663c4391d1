"""Planar reversible map whose orbits are lattice steady states.

Writing a steady profile as pairs of consecutive site values turns the
second-order steady-state recurrence into an explicit planar map with an
explicit inverse.  Swapping the two coordinates reverses the dynamics, the
homogeneous background states become hyperbolic fixed points on the diagonal,
and intersections of their one-dimensional invariant manifolds encode front
profiles.  The parameter range where the unstable manifold of the origin and
the stable manifold of the upper state intersect is the pinning region; its
boundaries are quadratic tangencies of the two curves.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import lattice
from .lattice import LatticeParams

__all__ = [
    "MapPoint",
    "FixedPointInfo",
    "ManifoldSettings",
    "ManifoldArc",
    "Crossing",
    "CrossingSet",
    "TangencyEvent",
    "SectionCluster",
    "LoopTrace",
    "SingularMapError",
    "HyperbolicityError",
    "ManifoldBudgetError",
    "BracketError",
    "ORIGIN",
    "U_STAR",
    "map_forward",
    "map_backward",
    "step_forward",
    "step_backward",
    "reverser",
    "jacobian_det",
    "map_orbit",
    "check_reversibility",
    "fixed_point_eigen",
    "grow_manifold",
    "reverser_image",
    "heteroclinic_arcs",
    "hausdorff_distance",
    "count_heteroclinic_intersections",
    "find_tangency",
    "section_crossings",
    "verify_heteroclinic_loop",
    "assemble_trace",
]

ORIGIN = "origin"
U_STAR = "u_star"


class SingularMapError(ValueError):
    pass


class HyperbolicityError(RuntimeError):
    pass


class ManifoldBudgetError(RuntimeError):
    pass


class BracketError(ValueError):
    pass


@dataclass(frozen=True)
class MapPoint:
    u: float
    v: float

    def __post_init__(self):
        if not (np.isfinite(self.u) and np.isfinite(self.v)):
            raise ValueError(f"map point must be finite, got ({self.u}, {self.v})")

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v])

    @classmethod
    def from_array(cls, xy) -> "MapPoint":
        return cls(u=float(xy[0]), v=float(xy[1]))


def _require_d(params: LatticeParams) -> float:
    if params.d <= 0.0:
        raise SingularMapError(
            f"the planar map needs d > 0, got d = {params.d}")
    return params.d


def step_forward(xy: np.ndarray, d: float, mu: float) -> np.ndarray:
    """Vectorized forward map on an (..., 2) array of points."""
    u = xy[..., 0]
    v = xy[..., 1]
    out = np.empty_like(xy)
    out[..., 0] = v
    out[..., 1] = 2.0 * v - u - lattice.nonlinearity(v, mu) / d
    return out


def step_backward(xy: np.ndarray, d: float, mu: float) -> np.ndarray:
    """Vectorized explicit inverse map."""
    u = xy[..., 0]
    v = xy[..., 1]
    out = np.empty_like(xy)
    out[..., 0] = 2.0 * u - v - lattice.nonlinearity(u, mu) / d
    out[..., 1] = u
    return out


def map_forward(p: MapPoint, params: LatticeParams) -> MapPoint:
    d = _require_d(params)
    return MapPoint.from_array(step_forward(p.as_array(), d, params.mu))


def map_backward(p: MapPoint, params: LatticeParams) -> MapPoint:
    d = _require_d(params)
    return MapPoint.from_array(step_backward(p.as_array(), d, params.mu))


def reverser(p: MapPoint) -> MapPoint:
    return MapPoint(u=p.v, v=p.u)


def jacobian_det(p: MapPoint, params: LatticeParams) -> float:
    """Determinant of the map linearization; identically 1 (the linearization
    is a companion-type matrix with unit off-diagonal block)."""
    _require_d(params)
    return 1.0


def map_orbit(p: MapPoint, params: LatticeParams, n: int) -> np.ndarray:
    """Forward orbit of length n+1 including the start, as an (n+1, 2) array."""
    d = _require_d(params)
    out = np.empty((n + 1, 2))
    out[0] = p.as_array()
    for k in range(n):
        out[k + 1] = step_forward(out[k], d, params.mu)
    return out


def check_reversibility(params: LatticeParams, n_samples: int = 1000,
                        rng: np.random.Generator | None = None,
                        box: tuple[float, float] = (-1.0, 2.0),
                        forward_fn=None, backward_fn=None) -> float:
    """Max deviation of the reversal identity over sampled points.

    With the built-in map the deviation of backward(x) against the
    swap-conjugated forward map is returned.  An injected forward_fn without
    a matching inverse is checked through the equivalent round-trip
    swap-forward-swap-forward = identity, which needs no inverse; this is how
    a deliberately broken map shows an O(1) violation.
    """
    d = _require_d(params)
    rng = rng or np.random.default_rng(0)
    lo, hi = box
    pts = rng.uniform(lo, hi, size=(n_samples, 2))
    if forward_fn is None:
        forward_fn = lambda xy: step_forward(xy, d, params.mu)
        if backward_fn is None:
            backward_fn = lambda xy: step_backward(xy, d, params.mu)
    swapped = pts[:, ::-1]
    if backward_fn is not None:
        lhs = backward_fn(pts)
        rhs = forward_fn(swapped)[:, ::-1]
    else:
        lhs = forward_fn(forward_fn(pts)[:, ::-1])[:, ::-1]
        rhs = pts
    return float(np.abs(lhs - rhs).max())


@dataclass(frozen=True)
class FixedPointInfo:
    """Hyperbolic fixed point on the diagonal with its multipliers.

    lambda_unstable > 1; the stable multiplier is its reciprocal because the
    map linearization has unit determinant.
    """

    location: MapPoint
    trace: float
    lambda_unstable: float
    eigvec_unstable: np.ndarray
    eigvec_stable: np.ndarray
    name: str

    @property
    def lambda_stable(self) -> float:
        return 1.0 / self.lambda_unstable


def fixed_point_eigen(params: LatticeParams, which: str) -> FixedPointInfo:
    """Eigendata of the fixed point at the zero or the upper background state.

    The trace of the linearization is 2 - f'(value)/d, giving 2 + mu/d at the
    origin and 2 + (1-mu)/d at the upper state; the unstable multiplier is
    the larger root of x^2 - T x + 1 = 0.
    """
    d = _require_d(params)
    mu = params.mu
    if which in (ORIGIN, "zero", "0"):
        value, name = 0.0, ORIGIN
    elif which in (U_STAR, "one", "1"):
        value, name = 1.0, U_STAR
    else:
        raise ValueError(f"unknown fixed point {which!r}; use {ORIGIN!r} or {U_STAR!r}")
    trace = 2.0 - float(lattice.nonlinearity_du(value, mu)) / d
    if trace <= 2.0 + 1e-14:
        raise HyperbolicityError(
            f"fixed point {name} loses hyperbolicity: trace {trace} <= 2 "
            f"(mu = {mu} at the edge of (0,1))")
    lam = 0.5 * (trace + np.sqrt(trace * trace - 4.0))
    eu = np.array([1.0, lam])
    es = np.array([1.0, 1.0 / lam])
    return FixedPointInfo(location=MapPoint(value, value), trace=trace,
                          lambda_unstable=float(lam),
                          eigvec_unstable=eu / np.linalg.norm(eu),
                          eigvec_stable=es / np.linalg.norm(es),
                          name=name)


@dataclass
class ManifoldSettings:
    seed_distance: float = 1e-7
    n_seed_points: int = 32
    max_spacing: float = 1e-3
    max_turn: float = 0.2
    turn_product_tol: float = 2e-6
    box: tuple[float, float, float, float] = (-0.5, 1.5, -0.5, 1.5)
    escape_radius: float = 4.0
    generations: int | None = None
    extra_generations: int = 4
    max_points: int = 400000
    max_arc_length: float = 400.0
    t_floor: float = 1e-12
    max_passes: int = 64
    fine_box: tuple[float, float, float, float] | None = None
    fine_spacing: float | None = None

    def __post_init__(self):
        if self.seed_distance <= 0.0:
            raise ValueError(f"seed distance must be positive, got {self.seed_distance}")
        if self.max_spacing <= 0.0:
            raise ValueError(f"max spacing must be positive, got {self.max_spacing}")
        if self.n_seed_points < 2:
            raise ValueError(f"need at least 2 seed points, got {self.n_seed_points}")
        if self.fine_box is not None and self.fine_spacing is None:
            raise ValueError("fine_box given without fine_spacing")


@dataclass
class ManifoldArc:
    """Adaptive polyline approximation of a one-dimensional invariant
    manifold.

    points has one row per sample; params holds the arc parameter
    (generation plus fundamental-domain fraction, increasing away from the
    fixed point); valid marks rows that stayed finite inside the escape
    radius.  Segments pair consecutive valid rows only, so escapes split
    the polyline instead of bridging it.
    """

    points: np.ndarray
    params: np.ndarray = None
    valid: np.ndarray = None
    origin: str = "synthetic"
    stability: str = "unstable"
    fixed_point: FixedPointInfo | None = None
    generations: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.points.shape[1] != 2:
            raise ValueError(f"points must be (n, 2), got {self.points.shape}")
        if self.params is None:
            self.params = np.arange(self.points.shape[0], dtype=float)
        else:
            self.params = np.asarray(self.params, dtype=float)
        if self.valid is None:
            self.valid = np.isfinite(self.points).all(axis=1)
        else:
            self.valid = np.asarray(self.valid, dtype=bool)
        if not (self.points.shape[0] == self.params.size == self.valid.size):
            raise ValueError("points, params and valid must have equal length")

    def segments(self):
        """(starts, ends, tau_starts, tau_ends) over consecutive valid rows."""
        ok = self.valid[:-1] & self.valid[1:]
        return (self.points[:-1][ok], self.points[1:][ok],
                self.params[:-1][ok], self.params[1:][ok])

    def vertices(self) -> np.ndarray:
        return self.points[self.valid]

    def arc_length(self) -> float:
        a, b, _, _ = self.segments()
        if a.shape[0] == 0:
            return 0.0
        return float(np.linalg.norm(b - a, axis=1).sum())


def _in_box(xy: np.ndarray, box) -> np.ndarray:
    x0, x1, y0, y1 = box
    return ((xy[..., 0] >= x0) & (xy[..., 0] <= x1)
            & (xy[..., 1] >= y0) & (xy[..., 1] <= y1))


def _expand_box(box, margin):
    x0, x1, y0, y1 = box
    return (x0 - margin, x1 + margin, y0 - margin, y1 + margin)


def _pair_touches_box(a: np.ndarray, b: np.ndarray, box) -> np.ndarray:
    x0, x1, y0, y1 = box
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    return ((hi[:, 0] >= x0) & (lo[:, 0] <= x1)
            & (hi[:, 1] >= y0) & (lo[:, 1] <= y1))


def grow_manifold(fp: FixedPointInfo, params: LatticeParams,
                  direction: int | None = None,
                  settings: ManifoldSettings | None = None,
                  stability: str = "unstable") -> ManifoldArc:
    """Grow one branch of a 1D invariant manifold of the planar map.

    Seeds a fundamental domain between a point at seed_distance along the
    eigenvector and its image, then advances it generation by generation
    (forward map for the unstable manifold, inverse map for the stable one),
    inserting points until consecutive samples respect the spacing, the turn
    angle, and the angle-times-spacing product bound.  Points leaving the
    escape radius are frozen and excluded from the polyline.  direction
    selects the branch; None picks the one pointing at the box center.

    Raises ManifoldBudgetError when max_points or max_arc_length is exhausted
    before refinement settles.
    """
    settings = settings or ManifoldSettings()
    d = _require_d(params)
    mu = params.mu
    if stability == "unstable":
        eig = fp.eigvec_unstable
        step = lambda xy: step_forward(xy, d, mu)
    elif stability == "stable":
        eig = fp.eigvec_stable
        step = lambda xy: step_backward(xy, d, mu)
    else:
        raise ValueError(f"stability must be 'stable' or 'unstable', got {stability!r}")
    lam = fp.lambda_unstable
    x_fp = fp.location.as_array()
    bx = settings.box
    center = np.array([0.5 * (bx[0] + bx[1]), 0.5 * (bx[2] + bx[3])])
    if direction is None:
        direction = 1 if float(eig @ (center - x_fp)) >= 0.0 else -1
    if direction not in (1, -1):
        raise ValueError(f"direction must be +1, -1 or None, got {direction}")

    delta = direction * settings.seed_distance

    def seed(t: np.ndarray) -> np.ndarray:
        return x_fp[None, :] + (delta * lam ** t)[:, None] * eig[None, :]

    def advance(xy: np.ndarray, alive: np.ndarray, times: int):
        xy = xy.copy()
        alive = alive.copy()
        for _ in range(times):
            if not alive.any():
                break
            with np.errstate(over="ignore", invalid="ignore"):
                moved = step(xy[alive])
            xy[alive] = moved
            bad = ~np.isfinite(xy).all(axis=1)
            bad |= np.abs(xy - center).max(axis=1) > settings.escape_radius
            xy[bad & alive] = np.nan
            alive &= ~bad
        return xy, alive

    if settings.generations is not None:
        n_gen = settings.generations
    else:
        diag = float(np.hypot(bx[1] - bx[0], bx[3] - bx[2]))
        n_gen = int(np.ceil(np.log(2.5 * diag / settings.seed_distance)
                            / np.log(lam))) + settings.extra_generations

    relevant_box = _expand_box(bx, 0.15 * max(bx[1] - bx[0], bx[3] - bx[2]))
    t = np.linspace(0.0, 1.0, settings.n_seed_points + 1)
    xy = seed(t)
    alive = np.ones(t.size, dtype=bool)

    out_t: list[np.ndarray] = []
    out_xy: list[np.ndarray] = []
    out_alive: list[np.ndarray] = []
    total_points = 0
    total_length = 0.0

    for g in range(n_gen):
        if g > 0:
            xy, alive = advance(xy, alive, 1)
        # Refine this generation until spacing and turning criteria hold.
        for _ in range(settings.max_passes):
            a, b = xy[:-1], xy[1:]
            pair_ok = alive[:-1] & alive[1:]
            with np.errstate(invalid="ignore"):
                dist = np.linalg.norm(b - a, axis=1)
            spacing = np.full(dist.shape, settings.max_spacing)
            if settings.fine_box is not None:
                fine = _pair_touches_box(np.nan_to_num(a, nan=1e30),
                                         np.nan_to_num(b, nan=1e30),
                                         settings.fine_box)
                spacing[fine] = settings.fine_spacing
            viol = pair_ok & (dist > spacing)
            # Turning criteria from existing triples; refine both neighbors.
            if xy.shape[0] >= 3:
                v1 = xy[1:-1] - xy[:-2]
                v2 = xy[2:] - xy[1:-1]
                tri_ok = alive[:-2] & alive[1:-1] & alive[2:]
                with np.errstate(invalid="ignore", divide="ignore"):
                    cross = v1[:, 0] * v2[:, 1] - v1[:, 1] * v2[:, 0]
                    dot = (v1 * v2).sum(axis=1)
                    ang = np.abs(np.arctan2(cross, dot))
                pair_len = np.maximum(dist[:-1], dist[1:])
                sharp = tri_ok & ((ang > settings.max_turn)
                                  | (ang * pair_len > settings.turn_product_tol))
                sharp &= pair_len > 4.0 * settings.t_floor
                viol[:-1] |= sharp
                viol[1:] |= sharp
            viol &= pair_ok
            viol &= _pair_touches_box(np.nan_to_num(a, nan=1e30),
                                      np.nan_to_num(b, nan=1e30), relevant_box)
            viol &= (t[1:] - t[:-1]) > settings.t_floor
            idx = np.flatnonzero(viol)
            if idx.size == 0:
                break
            t_mid = 0.5 * (t[idx] + t[idx + 1])
            xy_mid, alive_mid = advance(seed(t_mid), np.ones(t_mid.size, bool), g)
            t = np.concatenate([t, t_mid])
            xy = np.concatenate([xy, xy_mid])
            alive = np.concatenate([alive, alive_mid])
            order = np.argsort(t, kind="stable")
            t, xy, alive = t[order], xy[order], alive[order]
            if total_points + t.size > settings.max_points:
                raise ManifoldBudgetError(
                    f"manifold point budget {settings.max_points} exhausted at "
                    f"generation {g}")

        last = g == n_gen - 1
        keep = slice(None) if last else slice(0, t.size - 1)
        out_t.append(g + t[keep])
        out_xy.append(xy[keep].copy())
        out_alive.append(alive[keep].copy())
        total_points += out_t[-1].size

        pair_ok = alive[:-1] & alive[1:]
        seg_a, seg_b = xy[:-1][pair_ok], xy[1:][pair_ok]
        if seg_a.shape[0]:
            inside = _pair_touches_box(seg_a, seg_b, bx)
            total_length += float(np.linalg.norm(
                seg_b[inside] - seg_a[inside], axis=1).sum())
        if total_length > settings.max_arc_length:
            raise ManifoldBudgetError(
                f"manifold arc-length budget {settings.max_arc_length} exhausted "
                f"at generation {g}")

    arc = ManifoldArc(points=np.concatenate(out_xy),
                      params=np.concatenate(out_t),
                      valid=np.concatenate(out_alive),
                      origin=fp.name, stability=stability, fixed_point=fp,
                      generations=n_gen,
                      meta={"direction": direction, "mu": mu, "d": d,
                            "seed_distance": settings.seed_distance})
    return arc


def reverser_image(arc: ManifoldArc) -> ManifoldArc:
    """Coordinate-swapped arc; maps a stable manifold onto the unstable one
    of the same fixed point and vice versa."""
    flipped = "stable" if arc.stability == "unstable" else "unstable"
    return ManifoldArc(points=arc.points[:, ::-1].copy(),
                       params=arc.params.copy(), valid=arc.valid.copy(),
                       origin=arc.origin, stability=flipped,
                       fixed_point=arc.fixed_point,
                       generations=arc.generations,
                       meta={**arc.meta, "reversed": True})


def heteroclinic_arcs(params: LatticeParams,
                      settings: ManifoldSettings | None = None
                      ) -> tuple[ManifoldArc, ManifoldArc]:
    """Unstable manifold of the origin and stable manifold of the upper
    state (via the reverser image of its unstable manifold)."""
    fp0 = fixed_point_eigen(params, ORIGIN)
    fp1 = fixed_point_eigen(params, U_STAR)
    arc_u = grow_manifold(fp0, params, settings=settings, stability="unstable")
    arc_u1 = grow_manifold(fp1, params, settings=settings, stability="unstable")
    return arc_u, reverser_image(arc_u1)


def hausdorff_distance(arc_a: ManifoldArc, arc_b: ManifoldArc,
                       box: tuple[float, float, float, float] | None = None,
                       max_vertices: int = 4000,
                       symmetric: bool = True) -> float:
    """Hausdorff distance between two polylines, vertices of one against
    segments of the other, optionally restricted to a box."""

    def directed(src: ManifoldArc, dst: ManifoldArc) -> float:
        pts = src.vertices()
        if box is not None:
            pts = pts[_in_box(pts, box)]
        if pts.shape[0] == 0:
            return 0.0
        if pts.shape[0] > max_vertices:
            stride = int(np.ceil(pts.shape[0] / max_vertices))
            pts = pts[::stride]
        a, b, _, _ = dst.segments()
        if box is not None:
            keep = _pair_touches_box(a, b, _expand_box(box, 0.05))
            a, b = a[keep], b[keep]
        if a.shape[0] == 0:
            raise ValueError("destination polyline empty in the comparison box")
        ab = b - a
        ab2 = (ab * ab).sum(axis=1)
        ab2[ab2 == 0.0] = 1.0
        worst = 0.0
        chunk = max(1, int(2e6 / max(a.shape[0], 1)))
        for k in range(0, pts.shape[0], chunk):
            p = pts[k:k + chunk]
            ap = p[:, None, :] - a[None, :, :]
            tt = np.clip((ap * ab[None, :, :]).sum(axis=2) / ab2[None, :], 0.0, 1.0)
            dd = ap - tt[:, :, None] * ab[None, :, :]
            dmin = np.sqrt((dd * dd).sum(axis=2)).min(axis=1)
            worst = max(worst, float(dmin.max()))
        return worst

    h = directed(arc_a, arc_b)
    if symmetric:
        h = max(h, directed(arc_b, arc_a))
    return h


@dataclass(frozen=True)
class Crossing:
    point: tuple[float, float]
    sign: int
    param_u: float
    param_s: float


@dataclass
class CrossingSet:
    crossings: list[Crossing]
    merge_tol: float = 1e-8

    @property
    def count(self) -> int:
        return len(self.crossings)

    def points(self) -> np.ndarray:
        if not self.crossings:
            return np.empty((0, 2))
        return np.array([c.point for c in self.crossings])

    def distinct_count(self, tol: float | None = None) -> int:
        """Number of crossings after merging those closer than tol."""
        tol = self.merge_tol if tol is None else tol
        pts = self.points()
        n = pts.shape[0]
        if n <= 1:
            return n
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in range(n):
            for j in range(i + 1, n):
                if np.hypot(*(pts[i] - pts[j])) < tol:
                    parent[find(i)] = find(j)
        return len({find(i) for i in range(n)})

    def tangency_flags(self, tol: float | None = None) -> list[tuple[int, int]]:
        """Index pairs of consecutive crossings (ordered along the first arc)
        closer than tol; candidates for an imminent tangency."""
        tol = self.merge_tol if tol is None else tol
        flags = []
        for i in range(len(self.crossings) - 1):
            p = np.array(self.crossings[i].point)
            q = np.array(self.crossings[i + 1].point)
            if float(np.hypot(*(p - q))) < tol:
                flags.append((i, i + 1))
        return flags

    def signs_alternating(self) -> bool:
        signs = [c.sign for c in self.crossings]
        return all(signs[i] != signs[i + 1] for i in range(len(signs) - 1))


def count_heteroclinic_intersections(arc_u: ManifoldArc, arc_s: ManifoldArc,
                                     box: tuple[float, float, float, float] | None = None,
                                     merge_tol: float = 1e-8) -> CrossingSet:
    """All transversal crossings between two polyline arcs, ordered along the
    first arc, with orientation signs; candidate-pair hashing keeps the scan
    near-linear."""
    a0, a1, ta0, ta1 = arc_u.segments()
    b0, b1, tb0, tb1 = arc_s.segments()
    if box is not None:
        keep = _pair_touches_box(a0, a1, box)
        a0, a1, ta0, ta1 = a0[keep], a1[keep], ta0[keep], ta1[keep]
        keep = _pair_touches_box(b0, b1, box)
        b0, b1, tb0, tb1 = b0[keep], b1[keep], tb0[keep], tb1[keep]
    if a0.shape[0] == 0 or b0.shape[0] == 0:
        return CrossingSet(crossings=[], merge_tol=merge_tol)

    all_pts = np.concatenate([a0, a1, b0, b1])
    xmin, ymin = all_pts.min(axis=0)
    xmax, ymax = all_pts.max(axis=0)
    span = max(xmax - xmin, ymax - ymin, 1e-12)
    seg_len = np.linalg.norm(b1 - b0, axis=1)
    cell = max(span / 192.0, 2.0 * float(np.median(seg_len)), 1e-12)

    grid: dict[tuple[int, int], list[int]] = {}
    blo = np.minimum(b0, b1)
    bhi = np.maximum(b0, b1)
    clo = np.floor((blo - [xmin, ymin]) / cell).astype(int)
    chi = np.floor((bhi - [xmin, ymin]) / cell).astype(int)
    for j in range(b0.shape[0]):
        for ix in range(clo[j, 0], chi[j, 0] + 1):
            for iy in range(clo[j, 1], chi[j, 1] + 1):
                grid.setdefault((ix, iy), []).append(j)

    alo = np.minimum(a0, a1)
    ahi = np.maximum(a0, a1)
    alo_c = np.floor((alo - [xmin, ymin]) / cell).astype(int)
    ahi_c = np.floor((ahi - [xmin, ymin]) / cell).astype(int)

    crossings: list[Crossing] = []
    eps = 1e-12
    for i in range(a0.shape[0]):
        cand: list[int] = []
        for ix in range(alo_c[i, 0], ahi_c[i, 0] + 1):
            for iy in range(alo_c[i, 1], ahi_c[i, 1] + 1):
                cand.extend(grid.get((ix, iy), ()))
        if not cand:
            continue
        j = np.unique(cand)
        p = a0[i]
        r = a1[i] - p
        q = b0[j]
        w = b1[j] - q
        denom = r[0] * w[:, 1] - r[1] * w[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            qp = q - p
            tt = (qp[:, 0] * w[:, 1] - qp[:, 1] * w[:, 0]) / denom
            ss = (qp[:, 0] * r[1] - qp[:, 1] * r[0]) / (-denom)
        hit = (np.abs(denom) > eps) & (tt >= -eps) & (tt < 1.0 - eps) \
            & (ss >= -eps) & (ss < 1.0 - eps)
        for k in np.flatnonzero(hit):
            pt = p + tt[k] * r
            if box is not None and not _in_box(pt, box):
                continue
            jj = j[k]
            crossings.append(Crossing(
                point=(float(pt[0]), float(pt[1])),
                sign=1 if denom[k] > 0 else -1,
                param_u=float(ta0[i] + tt[k] * (ta1[i] - ta0[i])),
                param_s=float(tb0[jj] + ss[k] * (tb1[jj] - tb0[jj]))))
    crossings.sort(key=lambda c: c.param_u)
    return CrossingSet(crossings=crossings, merge_tol=merge_tol)


@dataclass(frozen=True)
class TangencyEvent:
    """Parameter value where the two heteroclinic manifolds touch
    quadratically; the local crossing count drops by exactly 2 across it."""

    mu_star: float
    side: str
    bracket_width: float
    count_inner: int
    count_outer: int
    focus_box: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if abs(self.count_inner - self.count_outer) != 2:
            raise ValueError(
                f"tangency must change the local crossing count by 2, got "
                f"{self.count_inner} vs {self.count_outer}")


def _closest_pair(points: np.ndarray) -> tuple[float, np.ndarray]:
    n = points.shape[0]
    best = np.inf
    mid = points[0]
    for i in range(n):
        d = np.hypot(points[i + 1:, 0] - points[i, 0],
                     points[i + 1:, 1] - points[i, 1])
        if d.size and d.min() < best:
            j = int(np.argmin(d)) + i + 1
            best = float(d.min())
            mid = 0.5 * (points[i] + points[j])
    return best, mid


def find_tangency(d: float, bracket: tuple[float, float],
                  settings: ManifoldSettings | None = None,
                  width_tol: float = 1e-10,
                  coarse_width: float = 1e-6,
                  merge_tol: float = 1e-8) -> TangencyEvent:
    """Bisect mu for the tangency of the two heteroclinic manifolds.

    Stage one bisects on the merged crossing count over the whole study box;
    stage two focuses on the merging pair, sharpening the local spacing as
    the pair closes, until the bracket width reaches width_tol.
    """
    base = settings or ManifoldSettings(max_spacing=2e-3)
    mu_a, mu_b = float(bracket[0]), float(bracket[1])
    if not (0.0 < mu_a < mu_b < 1.0):
        raise BracketError(f"bracket {bracket} must lie inside (0, 1)")
    box = base.box

    def counts(mu: float, focus=None, spacing=None):
        s = replace(base, fine_box=focus, fine_spacing=spacing)
        arc_u, arc_s = heteroclinic_arcs(LatticeParams(d=d, mu=mu), s)
        cs = count_heteroclinic_intersections(arc_u, arc_s,
                                              box=focus if focus else box,
                                              merge_tol=merge_tol)
        return cs

    cs_a = counts(mu_a)
    cs_b = counts(mu_b)
    c_a, c_b = cs_a.distinct_count(), cs_b.distinct_count()
    if c_a == c_b:
        raise BracketError(
            f"crossing counts equal ({c_a}) at both bracket ends {bracket}")
    inner_is_a = c_a > c_b

    lo, hi = mu_a, mu_b
    c_lo, c_hi = c_a, c_b
    while hi - lo > coarse_width:
        mid = 0.5 * (lo + hi)
        c_mid = counts(mid).distinct_count()
        if (c_mid == c_a) == inner_is_a and c_mid == c_a:
            lo, c_lo = mid, c_mid
        elif c_mid == c_b:
            hi, c_hi = mid, c_mid
        else:
            # Unexpected intermediate count: move the end whose count differs
            # more from mid; keeps the bisection making progress.
            if abs(c_mid - c_a) <= abs(c_mid - c_b):
                lo, c_lo = mid, c_mid
            else:
                hi, c_hi = mid, c_mid

    inner_mu = lo if inner_is_a else hi
    cs_inner = counts(inner_mu)
    pts = cs_inner.points()
    if pts.shape[0] < 2:
        raise BracketError("no merging pair found at the inner bracket end")
    pair_dist, pair_mid = _closest_pair(pts)
    half = max(4.0 * pair_dist, 5e-3)
    focus = (pair_mid[0] - half, pair_mid[0] + half,
             pair_mid[1] - half, pair_mid[1] + half)

    def focus_count(mu: float, pd: float) -> CrossingSet:
        # Floor the refinement spacing at 1e-6: the merging pair separates
        # like sqrt(mu - mu_star), so counts stay resolvable down to bracket
        # widths far below width_tol, while a finer floor can exhaust the
        # point budget inside the focus box for strongly expanding maps.
        spacing = float(np.clip(pd / 25.0, 1e-6, 1e-4))
        return counts(mu, focus=focus, spacing=spacing)

    cs_lo = focus_count(lo, pair_dist)
    cs_hi = focus_count(hi, pair_dist)
    n_lo, n_hi = cs_lo.distinct_count(), cs_hi.distinct_count()
    if n_lo == n_hi:
        raise BracketError(
            f"focus-box counts equal ({n_lo}) across bracket [{lo}, {hi}]")
    while hi - lo > width_tol:
        mid = 0.5 * (lo + hi)
        cs_mid = focus_count(mid, pair_dist)
        n_mid = cs_mid.distinct_count()
        if n_mid == n_lo:
            lo = mid
            if n_mid > n_hi and cs_mid.count >= 2:
                pd, pm = _closest_pair(cs_mid.points())
                if pd > 0:
                    pair_dist = pd
        else:
            hi = mid
    mu_star = 0.5 * (lo + hi)
    side = "left" if mu_star < 0.5 else "right"
    return TangencyEvent(mu_star=mu_star, side=side, bracket_width=hi - lo,
                         count_inner=max(n_lo, n_hi),
                         count_outer=min(n_lo, n_hi), focus_box=focus)


def section_crossings(arc: ManifoldArc, v_level: float,
                      u_range: tuple[float, float] | None = None) -> np.ndarray:
    """Crossings of the polyline with the horizontal line v = v_level as rows
    (u, tau), ordered along the arc."""
    a, b, t0, t1 = arc.segments()
    f0 = a[:, 1] - v_level
    f1 = b[:, 1] - v_level
    hit = (f0 * f1 < 0.0) | ((f0 == 0.0) & (f1 != 0.0))
    if not hit.any():
        return np.empty((0, 2))
    frac = f0[hit] / (f0[hit] - f1[hit])
    u = a[hit, 0] + frac * (b[hit, 0] - a[hit, 0])
    tau = t0[hit] + frac * (t1[hit] - t0[hit])
    out = np.column_stack([u, tau])
    if u_range is not None:
        out = out[(out[:, 0] >= u_range[0]) & (out[:, 0] <= u_range[1])]
    return out[np.argsort(out[:, 1])]


@dataclass(frozen=True)
class SectionCluster:
    sigma: float
    side: int
    members: int
    r_min: float
    r_max: float


def _cluster_sigmas(sigma: np.ndarray, sides: np.ndarray, radii: np.ndarray,
                    tol: float) -> list[SectionCluster]:
    clusters: list[SectionCluster] = []
    for side in (-1, 1):
        mask = sides == side
        if not mask.any():
            continue
        s = sigma[mask]
        r = radii[mask]
        order = np.argsort(s)
        s, r = s[order], r[order]
        breaks = np.flatnonzero(np.diff(s) > tol)
        groups = np.split(np.arange(s.size), breaks + 1)
        # Wraparound: merge first and last group when they touch mod 1.
        if len(groups) > 1 and (s[0] + 1.0 - s[-1]) <= tol:
            groups[0] = np.concatenate([groups[-1], groups[0]])
            groups = groups[:-1]
        for g in groups:
            ang = 2.0 * np.pi * s[g]
            mean = np.arctan2(np.sin(ang).sum(), np.cos(ang).sum()) / (2.0 * np.pi)
            clusters.append(SectionCluster(sigma=float(mean % 1.0), side=side,
                                           members=int(g.size),
                                           r_min=float(r[g].min()),
                                           r_max=float(r[g].max())))
    return clusters


def _circular_gap(a: float, b: float) -> float:
    g = abs(a - b) % 1.0
    return min(g, 1.0 - g)


def _section_signature(d: float, mu: float, settings: ManifoldSettings,
                       offset: float, window: float, cluster_tol: float):
    """Per-mu section data: sigma clusters of the origin's unstable manifold
    against the primary stable-manifold crossing, plus the deep-crossing
    flag used to bracket tangencies."""
    params = LatticeParams(d=d, mu=mu)
    lam = fixed_point_eigen(params, U_STAR).lambda_unstable
    arc_u, arc_s = heteroclinic_arcs(params, settings)
    v_level = 1.0 - offset
    sec_s = section_crossings(arc_s, v_level, u_range=(0.5, 1.5))
    if sec_s.shape[0] == 0:
        return [], lam, np.nan, False, 0
    u_sec = float(sec_s[0, 0])
    sec_u = section_crossings(arc_u, v_level,
                              u_range=(u_sec - window, u_sec + window))
    r = sec_u[:, 0] - u_sec
    keep = np.abs(r) > 1e-13
    r = r[keep]
    if r.size == 0:
        return [], lam, u_sec, False,0
    sigma = (np.log(np.abs(r)) / np.log(lam)) % 1.0
    sides = np.where(r > 0, 1, -1)
    clusters = _cluster_sigmas(sigma, sides, np.abs(r), cluster_tol)
    r_deep = offset * lam ** -2.0
    deep = bool((np.abs(r) < r_deep).any())
    return clusters, lam, u_sec, deep, int(r.size)


@dataclass
class LoopTrace:
    """Quotient-circle trace of the heteroclinic structure over a mu grid.

    For each mu the crossings of the origin's unstable manifold with a fixed
    section near the upper state are reduced to circle coordinates
    sigma = frac(log r / log lambda); the trace of those clusters over mu
    closes into a single loop exactly when the pinning structure consists of
    one pair of connections merging at the two tangencies.
    """

    mu_values: np.ndarray
    sigma_sets: list[np.ndarray]
    side_sets: list[np.ndarray]
    turns: list[dict]
    closed: bool
    gap: float
    fragments: list[dict]
    lambda_values: np.ndarray
    u_section: np.ndarray
    meta: dict = field(default_factory=dict)

    def turn_mu_values(self) -> list[float]:
        return [t["mu"] for t in self.turns]


def assemble_trace(mu_values: np.ndarray, sigma_sets: list[np.ndarray],
                   gap_tol: float = 1e-3, match_tol: float = 0.25,
                   turn_gap_overrides: dict[int, float] | None = None):
    """Chain per-column sigma values into a polyline on the cylinder.

    Adjacent columns are joined by mutual nearest circular matching;
    unmatched values within one column pair up as turning points.  Returns
    (closed, max_turn_gap, turns, fragments); closed requires a single cycle
    through every node with all turn gaps at or below gap_tol.  Overrides
    replace the raw turn gap at given column indices with refined values.
    """
    overrides = turn_gap_overrides or {}
    nodes: list[tuple[int, float]] = []
    index: dict[tuple[int, int], int] = {}
    for i, sigmas in enumerate(sigma_sets):
        for j, s in enumerate(np.atleast_1d(sigmas)):
            index[(i, j)] = len(nodes)
            nodes.append((i, float(s)))
    adjacency: list[list[int]] = [[] for _ in nodes]

    def connect(a: int, b: int):
        adjacency[a].append(b)
        adjacency[b].append(a)

    unmatched_by_col: dict[int, list[int]] = {}
    for i in range(len(sigma_sets)):
        cur = [index[(i, j)] for j in range(np.atleast_1d(sigma_sets[i]).size)]
        unmatched_by_col[i] = list(cur)
    for i in range(len(sigma_sets) - 1):
        left = list(unmatched_by_col[i])
        right = [index[(i + 1, j)]
                 for j in range(np.atleast_1d(sigma_sets[i + 1]).size)]
        pairs = []
        for a in left:
            for b in right:
                g = _circular_gap(nodes[a][1], nodes[b][1])
                if g <= match_tol:
                    pairs.append((g, a, b))
        pairs.sort()
        used_l: set[int] = set()
        used_r: set[int] = set()
        for g, a, b in pairs:
            if a in used_l or b in used_r:
                continue
            connect(a, b)
            used_l.add(a)
            used_r.add(b)
        unmatched_by_col[i] = [a for a in left if a not in used_l]
        unmatched_by_col[i + 1] = [b for b in right if b not in used_r]

    turns: list[dict] = []
    fragments: list[dict] = []
    for i, rem in unmatched_by_col.items():
        rem = list(rem)
        while len(rem) >= 2:
            best = None
            for ai in range(len(rem)):
                for bi in range(ai + 1, len(rem)):
                    g = _circular_gap(nodes[rem[ai]][1], nodes[rem[bi]][1])
                    if best is None or g < best[0]:
                        best = (g, ai, bi)
            g, ai, bi = best
            a, b = rem[ai], rem[bi]
            connect(a, b)
            gap = overrides.get(i, g)
            turns.append({"column": i, "mu": float(mu_values[i]),
                          "sigma": 0.5 * (nodes[a][1] + nodes[b][1]),
                          "gap": float(gap)})
            rem = [x for k, x in enumerate(rem) if k not in (ai, bi)]
        for a in rem:
            fragments.append({"column": i, "mu": float(mu_values[i]),
                              "sigma": nodes[a][1], "reason": "unmatched"})

    single_cycle = len(nodes) > 0
    for k, nb in enumerate(adjacency):
        if len(nb) != 2:
            single_cycle = False
            if len(nb) < 2 and not any(f.get("sigma") == nodes[k][1]
                                       and f.get("column") == nodes[k][0]
                                       for f in fragments):
                fragments.append({"column": nodes[k][0],
                                  "mu": float(mu_values[nodes[k][0]]),
                                  "sigma": nodes[k][1],
                                  "reason": f"degree {len(nb)}"})
    if single_cycle:
        seen = {0}
        prev, cur = -1, 0
        while True:
            nxt = [x for x in adjacency[cur] if x != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            if cur == 0:
                break
            if cur in seen:
                single_cycle = False
                break
            seen.add(cur)
        if len(seen) != len(nodes):
            single_cycle = False

    max_gap = max((t["gap"] for t in turns), default=0.0)
    closed = single_cycle and len(turns) >= 2 and max_gap <= gap_tol
    return closed, max_gap, turns, fragments


def verify_heteroclinic_loop(d: float, mu_grid: np.ndarray,
                             settings: ManifoldSettings | None = None,
                             section_offset: float = 0.05,
                             section_window: float = 0.05,
                             cluster_tol: float = 0.02,
                             gap_tol: float = 1e-3,
                             refine_turns: bool = True,
                             turn_mu_tol: float = 1e-8) -> LoopTrace:
    """Trace the heteroclinic structure over a mu grid on the quotient circle
    and test whether it closes into a single loop.

    Clusters of section crossings with a confirmed geometric accumulation
    (at least two members reaching below offset/lambda) are kept as primary
    connections; the pinning interval is bracketed by the existence of deep
    crossings, and each end is refined by bisection, measuring the sigma
    separation of the merging pair just inside.  The trace is closed when the
    chained clusters form one cycle with refined turn gaps below gap_tol.
    """
    mu_grid = np.sort(np.asarray(mu_grid, dtype=float))
    base = settings or ManifoldSettings(
        max_spacing=5e-3,
        fine_box=(0.3, 1.45, 1.0 - section_offset - 0.03,
                  1.0 - section_offset + 0.03),
        fine_spacing=2e-4,
        extra_generations=6)

    def signature(mu: float):
        return _section_signature(d, mu, base, section_offset,
                                  section_window, cluster_tol)

    sigma_sets: list[np.ndarray] = []
    side_sets: list[np.ndarray] = []
    deep_flags = np.zeros(mu_grid.size, dtype=bool)
    lam_values = np.empty(mu_grid.size)
    u_sec_values = np.empty(mu_grid.size)
    for i, mu in enumerate(mu_grid):
        clusters, lam, u_sec, deep, _ = signature(mu)
        lam_values[i] = lam
        u_sec_values[i] = u_sec
        deep_flags[i] = deep
        primary = [c for c in clusters
                   if c.members >= 2 and c.r_min <= section_offset / lam]
        sigma_sets.append(np.array([c.sigma for c in primary]))
        side_sets.append(np.array([c.side for c in primary], dtype=int))

    inside = np.flatnonzero(deep_flags)
    overrides: dict[int, float] = {}
    refined_turns: list[dict] = []
    if refine_turns and inside.size > 0:
        i_lo, i_hi = int(inside[0]), int(inside[-1])
        for end, idx_in, idx_out in (("lower", i_lo, i_lo - 1),
                                     ("upper", i_hi, i_hi + 1)):
            if idx_out < 0 or idx_out >= mu_grid.size:
                continue
            mu_in, mu_out = mu_grid[idx_in], mu_grid[idx_out]
            while abs(mu_out - mu_in) > turn_mu_tol:
                mid = 0.5 * (mu_in + mu_out)
                _, _, _, deep, _ = signature(mid)
                if deep:
                    mu_in = mid
                else:
                    mu_out = mid
            clusters, lam, _, _, _ = signature(mu_in)
            primary = [c for c in clusters
                       if c.members >= 2 and c.r_min <= section_offset / lam]
            gap = np.inf
            sig_mid = np.nan
            for a in range(len(primary)):
                for b in range(a + 1, len(primary)):
                    g = _circular_gap(primary[a].sigma, primary[b].sigma)
                    if g < gap:
                        gap = g
                        sig_mid = 0.5 * (primary[a].sigma + primary[b].sigma)
            turn = {"end": end, "mu": 0.5 * (mu_in + mu_out),
                    "mu_bracket": (min(mu_in, mu_out), max(mu_in, mu_out)),
                    "sigma": float(sig_mid), "gap": float(gap)}
            refined_turns.append(turn)
            overrides[idx_in] = float(gap)

    closed, max_gap, raw_turns, fragments = assemble_trace(
        mu_grid, sigma_sets, gap_tol=gap_tol, turn_gap_overrides=overrides)
    turns = refined_turns if refined_turns else raw_turns
    if refined_turns:
        max_gap = max((t["gap"] for t in refined_turns), default=max_gap)
        closed = closed and max_gap <= gap_tol
    return LoopTrace(mu_values=mu_grid, sigma_sets=sigma_sets,
                     side_sets=side_sets, turns=turns, closed=closed,
                     gap=max_gap, fragments=fragments,
                     lambda_values=lam_values, u_section=u_sec_values,
                     meta={"d": d, "section_offset": section_offset,
                           "section_window": section_window,
                           "deep_flags": deep_flags,
                           "raw_turns": raw_turns})
