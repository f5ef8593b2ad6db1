"""Smallest enclosing ball of a finite point set.

Exact (Welzl-type, move-to-front) solver for target dimension m <= 3, and
Ritter's iterative heuristic above that.  Points are rows of an (k, m) array;
a ball is (center, radius).
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

# containment is checked with a small multiplicative slack, as customary
_EPS = 1.0 + 1e-12

EXACT_DIM_LIMIT = 3


def _circumball(pts):
    """Smallest ball with all given points on its boundary (center in their
    affine hull).  Returns None when the points are affinely degenerate."""
    p0 = pts[0]
    if len(pts) == 1:
        return p0.copy(), 0.0
    B = pts[1:] - p0
    G = 2.0 * (B @ B.T)
    rhs = np.sum(B * B, axis=1)
    try:
        lam = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(lam)):
        return None
    center = p0 + lam @ B
    radius = float(np.linalg.norm(center - p0))
    return center, radius


def _inside(ball, p):
    return float(np.linalg.norm(p - ball[0])) <= ball[1] * _EPS + 1e-300


def _ball_with_boundary(pts, boundary, dim):
    if len(boundary) == dim + 1:
        ball = _circumball(np.array(boundary))
        if ball is not None:
            return ball
    ball = _circumball(np.array(boundary)) if boundary else None
    for i in range(len(pts)):
        p = pts[i]
        if ball is None or not _inside(ball, p):
            trial = _ball_with_boundary(pts[:i], boundary + [p], dim)
            if trial is not None:
                ball = trial
    return ball


def _welzl(points, seed=0):
    rng = np.random.default_rng(seed)
    pts = points[rng.permutation(len(points))]
    ball = None
    for i in range(len(pts)):
        if ball is None or not _inside(ball, pts[i]):
            ball = _ball_with_boundary(pts[:i], [pts[i]], pts.shape[1])
    return ball


def _ritter(points):
    # two-pass diameter guess, then grow to cover stragglers
    p = points[0]
    q = points[np.argmax(np.sum((points - p) ** 2, axis=1))]
    r = points[np.argmax(np.sum((points - q) ** 2, axis=1))]
    center = 0.5 * (q + r)
    radius = 0.5 * float(np.linalg.norm(q - r))
    for _ in range(2):
        for p in points:
            d = float(np.linalg.norm(p - center))
            if d > radius:
                shift = 0.5 * (d - radius)
                radius += shift
                center = center + shift * (p - center) / d
    return center, radius


def smallest_enclosing_ball(points):
    """Return (center, radius) of the smallest ball covering all points.

    Exact for point dimension <= 3; Ritter's heuristic (radius within a few
    percent of optimal) in higher dimension.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise DomainError("empty point set")
    if pts.shape[1] <= EXACT_DIM_LIMIT:
        # deduplicate: Welzl degenerates on heavy duplication
        uniq = np.unique(pts, axis=0)
        center, radius = _welzl(uniq)
    else:
        center, radius = _ritter(pts)
    # tighten radius to the actual farthest point
    radius = max(radius, float(np.max(np.linalg.norm(pts - center, axis=1))))
    return center, radius
