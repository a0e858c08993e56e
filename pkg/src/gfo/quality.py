"""Grasp wrench sets and the largest-minimum-resisted-wrench quality.

Friction cones are discretized into edge forces, each edge maps to a 6D
wrench, and the quality q_lrw is the radius of the largest origin-centered
ball inside the convex hull of those wrenches.  The exact method
enumerates hull facets by brute force; the sampled method lower-bounds
the hull boundary with random support directions.
"""

from dataclasses import dataclass

import numpy as np

from . import _backend
from .linalg import ConvergenceError, vec3

ORIGIN_TOL = 1e-9

WOLFE_GAP = 1e-10

WOLFE_MAX_ITER = 10_000

FACET_SIDE_TOL = 1e-9

EXACT_POINT_CAP = 30


@dataclass(frozen=True)
class WrenchSet:
    """Wrench points in R^6 with a torque scale applied before hulls.

    Rows hold force components then torque components; ``lam`` divides
    the torque half in ``scaled_points`` so force and torque units can be
    balanced without rebuilding the set.
    """

    points: object
    lam: float = 1.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 6 or pts.shape[0] == 0:
            raise ValueError("wrench set needs a nonempty N x 6 array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite wrench entries")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "lam", float(self.lam))
        if self.lam <= 0.0:
            raise ValueError("torque scale must be positive")

    def scaled_points(self):
        out = self.points.copy()
        out[:, 3:] /= self.lam
        return out


@dataclass(frozen=True)
class QualityReport:
    q_lrw: float
    contains_origin: bool
    method: str
    facet_count: int = 0
    direction_count: int = 0

    def __post_init__(self):
        if not self.contains_origin and self.q_lrw != 0.0:
            raise ValueError("quality must be zero when the origin is outside")


def cone_edges(contact, m):
    """Discretize a friction cone into m boundary rays of unit normal force.

    The tangent frame is deterministic: the first tangent is the
    normalized cross product of a fixed helper axis with the cone axis,
    the helper being x when the axis is nearly z and z otherwise.
    """
    if m < 3:
        raise ValueError("cone discretization needs at least 3 edges")
    if contact.mu <= 0.0:
        raise ValueError("cone edges need mu > 0")
    axis = contact.axis
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[2]) > 0.9 else np.array([0.0, 0.0, 1.0])
    t1 = np.cross(helper, axis)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(axis, t1)
    edges = []
    for j in range(m):
        ang = 2.0 * np.pi * j / m
        edges.append(axis + contact.mu * (np.cos(ang) * t1 + np.sin(ang) * t2))
    return edges


def contact_wrenches(contact, edges, lam=1.0):
    """Map edge forces to wrenches (f, (p x f)/lam)."""
    lam = float(lam)
    if lam <= 0.0:
        raise ValueError("torque scale must be positive")
    p = contact.position
    out = []
    for e in edges:
        f = vec3(e)
        out.append(np.concatenate([f, np.cross(p, f) / lam]))
    return out


def grasp_wrench_set(contacts, m=8, lam=1.0):
    """Union of all contacts' edge wrenches as one WrenchSet."""
    pts = []
    for c in contacts:
        pts.extend(contact_wrenches(c, cone_edges(c, m), lam))
    return WrenchSet(np.array(pts), lam=1.0)


def _affine_min_norm(s):
    # minimize ||S v|| subject to sum(v) = 1 over the affine hull of S
    k = s.shape[0]
    gram = s @ s.T
    lhs = np.zeros((k + 1, k + 1))
    lhs[:k, :k] = gram
    lhs[:k, k] = 1.0
    lhs[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError:
        sol, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    return sol[:k]


def min_norm_point(points):
    """Minimum-norm point of a convex hull by support-point descent.

    Maintains a small affinely independent working set, adds the support
    point of the current iterate's negative direction, and re-minimizes
    over the working set's affine hull, dropping points whose hull
    coefficients go nonpositive.  Stops when the duality gap
    ||x||^2 - min_j x.p_j falls to WOLFE_GAP.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("need a nonempty point array")
    norms = np.linalg.norm(pts, axis=1)
    active = [int(np.argmin(norms))]
    weights = np.array([1.0])
    best_gap = np.inf
    for _ in range(WOLFE_MAX_ITER):
        x = weights @ pts[active]
        support_vals = pts @ x
        j = int(np.argmin(support_vals))
        gap = float(x @ x - support_vals[j])
        best_gap = min(best_gap, gap)
        if gap <= WOLFE_GAP:
            return x, float(np.linalg.norm(x))
        if j not in active:
            active.append(j)
            weights = np.append(weights, 0.0)
        while True:
            v = _affine_min_norm(pts[active])
            if np.all(v > 0.0):
                weights = v
                break
            # step toward v until the first hull coefficient reaches zero
            neg = np.where(v <= 0.0)[0]
            theta = min(1.0, float(np.min(weights[neg] / (weights[neg] - v[neg]))))
            weights = (1.0 - theta) * weights + theta * v
            weights[weights < 1e-14] = 0.0
            keep = weights > 0.0
            active = [a for a, k in zip(active, keep) if k]
            weights = weights[keep]
            weights /= weights.sum()
    raise ConvergenceError(
        f"minimum-norm descent stalled, best gap {best_gap:.3e}"
    )


def q_lrw_exact(points):
    """Quality from explicit facet enumeration of the hull boundary.

    Only intended for small point sets: every 6-point subset is tested
    for being a facet.  The origin must be strictly interior for a
    positive value; sets that do not span all six dimensions score zero.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 6:
        raise ValueError("expected an N x 6 point array")
    if pts.shape[0] > EXACT_POINT_CAP:
        raise ValueError(
            f"exact method is capped at {EXACT_POINT_CAP} points, got {pts.shape[0]}"
        )
    _, dist = min_norm_point(pts)
    if dist > ORIGIN_TOL:
        return QualityReport(0.0, False, "exact")
    if np.linalg.matrix_rank(pts) < 6:
        return QualityReport(0.0, False, "exact")
    best, count = _backend.facet_scan(pts, FACET_SIDE_TOL)
    if count == 0:
        raise ConvergenceError("every candidate facet hyperplane was degenerate")
    return QualityReport(float(best), True, "exact", facet_count=int(count))


def q_lrw_sampled(points, n_dirs, seed):
    """Quality upper bound from seeded random support directions.

    Directions are drawn with independent uniform components and
    normalized, which favors diagonal directions; for hulls whose tight
    facets face diagonally this reaches the boundary faster than polar
    sampling while still covering every direction in the limit.
    """
    if n_dirs < 1:
        raise ValueError("need at least one direction")
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 6:
        raise ValueError("expected an N x 6 point array")
    _, dist = min_norm_point(pts)
    if dist > ORIGIN_TOL:
        return QualityReport(0.0, False, "sampled")
    rng = np.random.default_rng(seed)
    best = np.inf
    chunk = 20_000
    remaining = int(n_dirs)
    while remaining > 0:
        take = min(chunk, remaining)
        dirs = rng.uniform(-1.0, 1.0, size=(take, 6))
        norms = np.linalg.norm(dirs, axis=1)
        dirs = dirs[norms > 0.0] / norms[norms > 0.0, None]
        support = (dirs @ pts.T).max(axis=1)
        best = min(best, float(support.min()))
        remaining -= take
    return QualityReport(best, True, "sampled", direction_count=int(n_dirs))
