import math

import numpy as np
import pytest

from fractalgame.geometry import (
    Ball,
    Hyperplane,
    ball_in_ball,
    fit_affine_span,
    point_hyperplane_distance,
)


def test_point_plane_distance_2d():
    plane = Hyperplane(np.array([1.0, 1.0]) / math.sqrt(2), 1 / math.sqrt(2))
    assert point_hyperplane_distance([0.0, 0.0], plane) == pytest.approx(1 / math.sqrt(2))


def test_point_on_plane_distance_zero():
    plane = Hyperplane.through([0.3, 0.7], [2.0, -1.0])
    assert point_hyperplane_distance([0.3, 0.7], plane) == pytest.approx(0.0, abs=1e-15)


def test_point_plane_distance_1d():
    plane = Hyperplane([1.0], 1.0)
    assert point_hyperplane_distance([2.0], plane) == pytest.approx(1.0)


def test_distance_invariant_under_negation():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        off = rng.normal()
        p = rng.normal(size=3)
        d1 = point_hyperplane_distance(p, Hyperplane(n, off))
        d2 = point_hyperplane_distance(p, Hyperplane(-n, -off))
        assert d1 == pytest.approx(d2, abs=1e-12)


def test_ball_in_ball_tangent_and_not():
    assert ball_in_ball(Ball([0.5], 0.5), Ball([0.0], 1.0))
    assert not ball_in_ball(Ball([0.6], 0.5), Ball([0.0], 1.0))
    b = Ball([0.3, -0.1], 0.7)
    assert ball_in_ball(b, b)


def test_ball_in_ball_sampled_points():
    rng = np.random.default_rng(1)
    inner = Ball([0.2, -0.3], 0.4)
    outer = Ball([0.0, 0.0], 0.9)
    assert ball_in_ball(inner, outer)
    for _ in range(1000):
        v = rng.normal(size=2)
        v /= np.linalg.norm(v)
        p = inner.center + rng.uniform(0, inner.radius) * v
        assert outer.contains_point(p)


def test_fit_affine_span_collinear():
    pts = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]
    dim, plane, residual = fit_affine_span(pts)
    assert dim == 1
    assert plane is not None
    assert residual < 1e-12


def test_fit_affine_span_single_point():
    dim, plane, residual = fit_affine_span([[0.5, 0.25]])
    assert dim == 0
    assert plane is not None
    assert point_hyperplane_distance([0.5, 0.25], plane) == pytest.approx(0.0, abs=1e-15)


def test_fit_affine_span_triangle_full_rank():
    # rank oracle: the centered 3x2 matrix of a genuine triangle has rank 2
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    centered = pts - pts.mean(axis=0)
    assert np.linalg.matrix_rank(centered) == 2
    dim, plane, _ = fit_affine_span(pts)
    assert dim == 2
    assert plane is None


def test_fit_affine_span_empty_rejected():
    with pytest.raises(ValueError):
        fit_affine_span(np.empty((0, 2)))


def test_fit_affine_span_residual_bound_on_degenerate_sets():
    rng = np.random.default_rng(2)
    for _ in range(30):
        n = int(rng.integers(2, 4))
        normal = rng.normal(size=n)
        normal /= np.linalg.norm(normal)
        offset = rng.normal()
        basis = np.linalg.svd(normal.reshape(1, -1))[2][1:]
        pts = offset * normal + rng.normal(size=(6, n - 1)) @ basis
        dim, plane, residual = fit_affine_span(pts)
        diameter = max(
            np.linalg.norm(a - b) for a in pts for b in pts
        )
        assert dim <= n - 1
        assert residual <= 1e-9 * max(diameter, 1e-30)


def test_rank_threshold_uses_given_scale():
    # two points a float-ulp apart are one point at any humane scale
    pts = [[1 / 3], [0.3333333333333337]]
    dim, plane, _ = fit_affine_span(pts, scale=0.01)
    assert dim == 0
    assert plane is not None
