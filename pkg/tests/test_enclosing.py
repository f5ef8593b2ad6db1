import itertools

import numpy as np
import pytest

from fracsys import smallest_enclosing_ball
from fracsys.errors import DomainError


def brute_force_ball_2d(points):
    """Exact O(k^3) oracle: best circle through all pairs (as diameter) and
    all triples (circumcircle) that covers the set."""
    pts = np.asarray(points, dtype=float)
    best = None
    candidates = []
    for i, j in itertools.combinations(range(len(pts)), 2):
        candidates.append(((pts[i] + pts[j]) / 2, np.linalg.norm(pts[i] - pts[j]) / 2))
    for i, j, k in itertools.combinations(range(len(pts)), 3):
        a, b, c = pts[i], pts[j], pts[k]
        d = 2 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
        if abs(d) < 1e-14:
            continue
        ux = ((a @ a) * (b[1] - c[1]) + (b @ b) * (c[1] - a[1]) + (c @ c) * (a[1] - b[1])) / d
        uy = ((a @ a) * (c[0] - b[0]) + (b @ b) * (a[0] - c[0]) + (c @ c) * (b[0] - a[0])) / d
        center = np.array([ux, uy])
        candidates.append((center, np.linalg.norm(a - center)))
    for center, radius in candidates:
        if np.max(np.linalg.norm(pts - center, axis=1)) <= radius * (1 + 1e-10):
            if best is None or radius < best[1]:
                best = (center, radius)
    return best


class TestExactLowDimension:
    def test_interval_1d(self):
        c, r = smallest_enclosing_ball(np.array([[-2.0], [5.0], [1.0]]))
        assert c[0] == pytest.approx(1.5)
        assert r == pytest.approx(3.5)

    def test_two_points(self):
        c, r = smallest_enclosing_ball(np.array([[0.0, 0.0], [2.0, 0.0]]))
        assert np.allclose(c, [1.0, 0.0])
        assert r == pytest.approx(1.0)

    def test_collinear(self):
        pts = np.array([[0.0, 0.0], [1.0, 1.0], [3.0, 3.0]])
        c, r = smallest_enclosing_ball(pts)
        assert r == pytest.approx(np.linalg.norm([1.5, 1.5]), rel=1e-9)

    def test_against_brute_force_random_unit_vectors(self):
        rng = np.random.default_rng(42)
        th = rng.uniform(0, 2 * np.pi, size=100)
        pts = np.stack([np.cos(th), np.sin(th)], axis=-1)
        c, r = smallest_enclosing_ball(pts)
        bc, br = brute_force_ball_2d(pts)
        assert r == pytest.approx(br, rel=1e-9)
        assert np.max(np.linalg.norm(pts - c, axis=1)) <= r * (1 + 1e-10)

    @pytest.mark.parametrize("seed", range(6))
    def test_against_brute_force_gaussian_clouds(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.normal(size=(rng.integers(4, 25), 2))
        c, r = smallest_enclosing_ball(pts)
        _, br = brute_force_ball_2d(pts)
        assert r == pytest.approx(br, rel=1e-8)

    def test_3d_tetrahedron(self):
        pts = np.array([[1.0, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]])
        c, r = smallest_enclosing_ball(pts)
        assert np.allclose(c, 0.0, atol=1e-9)
        assert r == pytest.approx(np.sqrt(3.0), rel=1e-9)

    def test_duplicates(self):
        pts = np.array([[1.0, 0.0]] * 7 + [[0.0, 0.0]])
        c, r = smallest_enclosing_ball(pts)
        assert r == pytest.approx(0.5, rel=1e-9)


class TestHighDimensionHeuristic:
    def test_covers_and_near_optimal(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(60, 5))
        c, r = smallest_enclosing_ball(pts)
        assert np.max(np.linalg.norm(pts - c, axis=1)) <= r * (1 + 1e-10)
        # half the diameter lower-bounds the optimum; 5% heuristic slack
        diam = max(np.linalg.norm(p - q) for p in pts for q in pts)
        assert r <= 1.05 * diam / np.sqrt(2.0)

    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            smallest_enclosing_ball(np.zeros((0, 2)))
