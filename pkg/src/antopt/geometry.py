"""Exact geometry for the minimum-separation projection of antenna positions.

All lengths are expressed in carrier wavelengths (lambda = 1 internally).
Points are 2-vectors; every function accepts anything convertible to a float
array of shape (2,) and returns plain numpy arrays.

The central routine is :func:`solve_separation_projection`, which finds the
point closest to a target subject to keeping a minimum distance ``d_min``
from a set of fixed points.  The optimum is always located on the boundary
of one of the conflict circles, so the candidate set built from pairwise
circle intersections and circle/line intersections contains the exact
solution.  A brute-force grid oracle is provided for verification and as a
last-resort fallback.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage

# Absolute tolerance for treating two points as coincident.
POINT_EQ_TOL = 1e-12

# Slack on the ">= d_min" feasibility test.  Candidates produced by the
# intersection formulas sit at distance exactly d_min from some centers;
# without slack floating point would discard valid optima.
FEAS_EPS = 1e-9


class Position2D(NamedTuple):
    """A point on an antenna panel, in wavelengths."""

    x: float
    y: float


class TooFewPoints(ValueError):
    """Raised when an operation needs at least two points."""


class NoFeasibleGridPoint(RuntimeError):
    """Raised by the grid oracle when every grid point is infeasible."""


class CandidateSetEmpty(RuntimeError):
    """Raised when the filtered candidate set contains no feasible point."""


@dataclass(frozen=True)
class SeparationConstraint:
    """Minimum pairwise distance between antennas, in wavelengths."""

    d_min: float

    def __post_init__(self):
        if not self.d_min > 0:
            raise ValueError(f"d_min must be positive, got {self.d_min}")


def _d_min(d) -> float:
    if isinstance(d, SeparationConstraint):
        return d.d_min
    d = float(d)
    if not d > 0:
        raise ValueError(f"d_min must be positive, got {d}")
    return d


def as_point(p) -> np.ndarray:
    """Coerce ``p`` to a finite float vector of shape (2,)."""
    a = np.asarray(p, dtype=float).reshape(2)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite coordinates: {p!r}")
    return a


def points_equal(a, b, tol: float = POINT_EQ_TOL) -> bool:
    return bool(np.all(np.abs(as_point(a) - as_point(b)) <= tol))


@dataclass(frozen=True)
class Panel:
    """Axis-aligned rectangular region antennas may occupy."""

    min_corner: tuple
    max_corner: tuple

    def __post_init__(self):
        lo, hi = as_point(self.min_corner), as_point(self.max_corner)
        if np.any(lo > hi):
            raise ValueError("min_corner must be <= max_corner componentwise")
        object.__setattr__(self, "min_corner", tuple(lo))
        object.__setattr__(self, "max_corner", tuple(hi))

    @classmethod
    def square(cls, side: float) -> "Panel":
        """Square panel of the given side length centered at the origin."""
        h = float(side) / 2.0
        return cls((-h, -h), (h, h))

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.min_corner)

    @property
    def hi(self) -> np.ndarray:
        return np.asarray(self.max_corner)

    def clip(self, points: np.ndarray) -> np.ndarray:
        """Componentwise box projection onto the panel."""
        return np.clip(np.asarray(points, dtype=float), self.lo, self.hi)

    def contains(self, point, tol: float = 0.0) -> bool:
        p = as_point(point)
        return bool(np.all(p >= self.lo - tol) and np.all(p <= self.hi + tol))

    def sample_uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, 2))


def circle_circle_intersections(c1, c2, d) -> list:
    """Intersection points of two circles of common radius ``d_min``.

    Returns an empty list when the centers coincide (within tolerance) or
    are more than ``2 * d_min`` apart; otherwise the one or two intersection
    points, each at distance exactly ``d_min`` from both centers.
    """
    dmin = _d_min(d)
    c1, c2 = as_point(c1), as_point(c2)
    delta = c2 - c1
    dist = float(np.hypot(delta[0], delta[1]))
    if dist <= POINT_EQ_TOL or dist > 2.0 * dmin:
        return []
    mid = (c1 + c2) / 2.0
    radicand = max(4.0 * dmin * dmin / (dist * dist) - 1.0, 0.0)
    off = 0.5 * np.sqrt(radicand) * np.array([delta[1], -delta[0]])
    p1, p2 = mid + off, mid - off
    if np.all(np.abs(p1 - p2) <= POINT_EQ_TOL):
        return [p1]  # tangent circles
    return [p1, p2]


def line_circle_intersections(center, through, d) -> list:
    """Intersections of a circle with the line through its center and ``through``.

    Empty when ``through`` coincides with the center; otherwise the two
    antipodal points at distance ``d_min`` from the center along the line.
    """
    dmin = _d_min(d)
    center, through = as_point(center), as_point(through)
    diff = center - through
    dist = float(np.hypot(diff[0], diff[1]))
    if dist <= POINT_EQ_TOL:
        return []
    u = diff / dist
    return [center + dmin * u, center - dmin * u]


def _others_array(others) -> np.ndarray:
    zs = np.asarray(others, dtype=float)
    if zs.size == 0:
        return zs.reshape(0, 2)
    return zs.reshape(-1, 2)


def build_conflict_set(target, others, d) -> list:
    """Indices of fixed points strictly closer than ``d_min`` to the target.

    The comparison is a strict ``<`` with no tolerance: a point at distance
    exactly ``d_min`` is not in conflict.
    """
    dmin = _d_min(d)
    t = as_point(target)
    zs = _others_array(others)
    if len(zs) == 0:
        return []
    dist = np.hypot(zs[:, 0] - t[0], zs[:, 1] - t[1])
    return [int(i) for i in np.nonzero(dist < dmin)[0]]


@dataclass
class CandidateSet:
    """Feasible candidate points for one separation-projection instance."""

    conflict_indices: list
    candidates: list  # (point, source tag in {"circle-circle", "line-circle"})
    n_generated: int = 0  # raw intersection count before feasibility filtering


def build_candidate_set(target, others, d, conflict=None) -> CandidateSet:
    """Build and filter the candidate set for a projection instance.

    For every conflict circle, collects its intersections with all other
    circles plus its intersections with the line through the target, then
    keeps only points at distance >= d_min - FEAS_EPS from every fixed point.
    """
    dmin = _d_min(d)
    t = as_point(target)
    zs = _others_array(others)
    if conflict is None:
        conflict = build_conflict_set(t, zs, dmin)
    raw = []
    for l in conflict:
        for k in range(len(zs)):
            if k == l:
                continue
            for p in circle_circle_intersections(zs[l], zs[k], dmin):
                raw.append((p, "circle-circle"))
        for p in line_circle_intersections(zs[l], t, dmin):
            raw.append((p, "line-circle"))
    kept = []
    thresh = dmin - FEAS_EPS
    for p, tag in raw:
        if len(zs) == 0 or np.min(np.hypot(zs[:, 0] - p[0], zs[:, 1] - p[1])) >= thresh:
            kept.append((p, tag))
    return CandidateSet(list(conflict), kept, n_generated=len(raw))


@dataclass
class SolveInfo:
    """Diagnostics from one :func:`solve_separation_projection` call."""

    conflict: list
    n_generated: int = 0
    n_candidates: int = 0
    degraded: bool = False
    stage: str = "unconstrained"


def _pick_best(candidates, target) -> np.ndarray:
    # Smallest squared distance; ties broken lexicographically by (x, y).
    best = None
    best_key = None
    for p, _tag in candidates:
        d2 = float((p[0] - target[0]) ** 2 + (p[1] - target[1]) ** 2)
        key = (d2, float(p[0]), float(p[1]))
        if best_key is None or key < best_key:
            best_key = key
            best = p
    return np.array(best, dtype=float)


def solve_separation_projection(target, others, d, full_output=False,
                                fallback_resolution=1.0 / 400.0):
    """Closest point to ``target`` at distance >= d_min from all ``others``.

    With an empty conflict set the target itself is returned.  Otherwise the
    optimum is selected from the candidate set of circle-circle and
    line-circle intersections.  Should the filtered candidate set come up
    empty (possible when a conflict circle's feasible boundary is covered
    entirely by non-conflict circles), the conflict set is enlarged to all
    indices and the candidates rebuilt; if that also fails, the grid oracle
    answers with a degraded-precision flag.
    """
    dmin = _d_min(d)
    t = as_point(target)
    zs = _others_array(others)
    conflict = build_conflict_set(t, zs, dmin)
    info = SolveInfo(conflict=conflict)
    if not conflict:
        result = t.copy()
    else:
        cs = build_candidate_set(t, zs, dmin, conflict)
        info.stage = "candidates"
        if not cs.candidates:
            cs = build_candidate_set(t, zs, dmin, conflict=list(range(len(zs))))
            info.stage = "enlarged"
        info.n_generated = cs.n_generated
        info.n_candidates = len(cs.candidates)
        if cs.candidates:
            result = _pick_best(cs.candidates, t)
        else:
            # Last resort for the uncovered corner case of the candidate
            # construction; see CandidateSetEmpty.
            result = brute_force_projection_oracle(t, zs, dmin, fallback_resolution)
            info.degraded = True
            info.stage = "oracle"
    if full_output:
        return result, info
    return result


# Tile size for the grid oracle scans, in cells.
_SCAN_TILE = 262144
# Above this many cells the oracle first locates the optimum with a coarse
# pass, then refines on the sub-grid that can still contain a better point.
_COARSE_THRESHOLD = 600000


def _best_feasible_cell(xs, ys, zs, dmin, t):
    """Nearest-to-target feasible grid point over the cross product xs x ys."""
    best_d2 = np.inf
    best = None
    thresh2 = (dmin - FEAS_EPS) ** 2
    rows_per_tile = max(1, _SCAN_TILE // max(1, len(xs)))
    for start in range(0, len(ys), rows_per_tile):
        yy = ys[start:start + rows_per_tile]
        X, Y = np.meshgrid(xs, yy, indexing="xy")
        if len(zs):
            mask = np.ones(X.shape, dtype=bool)
            for z in zs:
                mask &= (X - z[0]) ** 2 + (Y - z[1]) ** 2 >= thresh2
        else:
            mask = np.ones(X.shape, dtype=bool)
        if not mask.any():
            continue
        d2 = (X - t[0]) ** 2 + (Y - t[1]) ** 2
        d2[~mask] = np.inf
        idx = np.argmin(d2)
        if d2.flat[idx] < best_d2:
            best_d2 = float(d2.flat[idx])
            best = np.array([X.flat[idx], Y.flat[idx]])
    return best, best_d2


def brute_force_projection_oracle(target, others, d, resolution) -> np.ndarray:
    """Grid search for the separation projection.

    Scans the bounding box of {target} union others, inflated by
    ``2.5 * d_min``, at the given grid resolution and returns the feasible
    grid point nearest the target.  The answer's distance exceeds the true
    optimum by at most ``resolution * sqrt(2)``.
    """
    dmin = _d_min(d)
    resolution = float(resolution)
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    t = as_point(target)
    zs = _others_array(others)
    pts = np.vstack([t[None, :], zs]) if len(zs) else t[None, :]
    lo = pts.min(axis=0) - 2.5 * dmin
    hi = pts.max(axis=0) + 2.5 * dmin
    nx = int(np.floor((hi[0] - lo[0]) / resolution)) + 1
    ny = int(np.floor((hi[1] - lo[1]) / resolution)) + 1
    xs = lo[0] + resolution * np.arange(nx)
    ys = lo[1] + resolution * np.arange(ny)

    if nx * ny > _COARSE_THRESHOLD and len(zs):
        # Coarse pass bounds the optimal distance, the fine pass then only
        # needs the sub-grid within that radius of the target.  Coarse grid
        # points are a subset of the fine grid, so the bound is valid.
        c = int(np.ceil(np.sqrt(nx * ny / _COARSE_THRESHOLD)))
        coarse, coarse_d2 = _best_feasible_cell(xs[::c], ys[::c], zs, dmin, t)
        if coarse is not None:
            r = np.sqrt(coarse_d2) + resolution
            xsub = xs[(xs >= t[0] - r) & (xs <= t[0] + r)]
            ysub = ys[(ys >= t[1] - r) & (ys <= t[1] + r)]
            best, _ = _best_feasible_cell(xsub, ysub, zs, dmin, t)
            return best
    best, _ = _best_feasible_cell(xs, ys, zs, dmin, t)
    if best is None:
        raise NoFeasibleGridPoint(
            f"no feasible grid point at resolution {resolution}")
    return best


def min_pairwise_distance(points) -> float:
    """Minimum distance over all unordered pairs of points."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < 2:
        raise TooFewPoints("need at least two points")
    diff = pts[:, None, :] - pts[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    iu = np.triu_indices(len(pts), k=1)
    return float(d[iu].min())


def feasible_raster(target_index, positions, panel: Panel, d, resolution):
    """Rasterized feasible region of one antenna given the others.

    Returns ``(mask, xs, ys)`` where mask[i, j] is True when the cell center
    (xs[j], ys[i]) is at least ``d_min`` from every other antenna.
    """
    dmin = _d_min(d)
    resolution = float(resolution)
    if resolution > dmin / 10.0:
        raise ValueError("resolution must be <= d_min / 10")
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    others = np.delete(positions, target_index, axis=0)
    lo, hi = panel.lo, panel.hi
    xs = np.arange(lo[0] + resolution / 2.0, hi[0], resolution)
    ys = np.arange(lo[1] + resolution / 2.0, hi[1], resolution)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    mask = np.ones(X.shape, dtype=bool)
    for z in others:
        mask &= (X - z[0]) ** 2 + (Y - z[1]) ** 2 >= dmin * dmin
    return mask, xs, ys


def count_feasible_components(target_index, positions, panel: Panel, d,
                              resolution) -> int:
    """Number of 4-connected components of one antenna's feasible region.

    The panel is rasterized at the given resolution; a cell is feasible when
    its center is at least ``d_min`` from every other antenna.  Returns 0
    when the other antennas cover the entire panel.
    """
    mask, _xs, _ys = feasible_raster(target_index, positions, panel, d,
                                     resolution)
    _labels, n = ndimage.label(mask)  # default structure: 4-connectivity
    return int(n)


def _count_1d(extent: float, subset: float, dmin: float) -> int:
    return int(np.floor((extent + dmin) / (subset + dmin)))


def conservative_capacity(panel_extent, subset_extent, d) -> int:
    """Antennas a panel can hold under conservative box-subset assignment.

    For a 1D panel of length A split into per-antenna segments of length B
    with separation d_min, the count is floor((A + D) / (B + D)); in 2D the
    per-axis counts multiply.  Scalars give the 1D form, length-2 sequences
    the 2D form.
    """
    dmin = _d_min(d)
    a_scalar = np.isscalar(panel_extent)
    b_scalar = np.isscalar(subset_extent)
    if a_scalar != b_scalar:
        raise ValueError("panel and subset extents must both be scalar or both 2D")
    if a_scalar:
        a, b = float(panel_extent), float(subset_extent)
        if a <= 0 or b <= 0:
            raise ValueError("extents must be positive")
        return _count_1d(a, b, dmin)
    a = np.asarray(panel_extent, dtype=float).reshape(2)
    b = np.asarray(subset_extent, dtype=float).reshape(2)
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("extents must be positive")
    return _count_1d(a[0], b[0], dmin) * _count_1d(a[1], b[1], dmin)
