import itertools
import math

import numpy as np
import pytest

from fractalgame.geometry import Ball, ball_in_ball
from fractalgame.ifs import (
    IFSystem,
    Similarity,
    chaos_sample,
    cylinder_ball,
    cylinders_meeting,
    distance_to_attractor,
    ifs_from_dict,
    ifs_to_dict,
    measure_bounds,
    moran_dimension,
    preset,
    project_to_attractor,
)


def test_moran_closed_forms(cantor, sierpinski, koch):
    assert cantor.dimension == pytest.approx(math.log(2) / math.log(3), abs=1e-9)
    assert sierpinski.dimension == pytest.approx(math.log(3) / math.log(2), abs=1e-9)
    assert koch.dimension == pytest.approx(math.log(4) / math.log(3), abs=1e-9)


def test_moran_single_map_is_zero():
    ifs = IFSystem([Similarity(0.5, np.eye(1), [0.25])], seed_ball=Ball([0.5], 0.5))
    assert ifs.dimension == pytest.approx(0.0, abs=1e-12)


def test_moran_equal_ratio_formula():
    rng = np.random.default_rng(3)
    for _ in range(20):
        m = int(rng.integers(2, 5))
        rho = float(rng.uniform(0.05, 1 / m - 0.01))
        ratios = np.full(m, rho)

        class Stub:
            dim = 3

            @property
            def ratios(self):
                return ratios

        got = moran_dimension(Stub())
        assert got == pytest.approx(math.log(m) / math.log(1 / rho), abs=1e-9)


def test_cylinder_ball_empty_word_and_radius_law(cantor):
    assert cylinder_ball(cantor, ()).radius == cantor.seed_ball.radius
    for k in range(1, 6):
        b = cylinder_ball(cantor, (0,) * k)
        assert b.radius == pytest.approx(0.5 * 3.0**-k)


def test_cylinder_ball_cantor_word_11(cantor):
    b = cylinder_ball(cantor, (0, 0))
    assert b.center[0] == pytest.approx(1 / 18)
    assert b.radius == pytest.approx(1 / 18)


def test_cylinder_nesting_under_prefix(cantor, koch):
    rng = np.random.default_rng(4)
    for ifs in (cantor, koch):
        for _ in range(50):
            k = int(rng.integers(1, 7))
            word = tuple(rng.integers(0, ifs.n_maps, size=k))
            cut = int(rng.integers(0, k))
            assert ball_in_ball(cylinder_ball(ifs, word), cylinder_ball(ifs, word[:cut]), tol=1e-9)


def test_cylinders_meeting_trivial_cases(cantor):
    whole = cylinders_meeting(cantor, cantor.seed_ball, max_diam=cantor.seed_ball.diameter)
    assert whole == [()]
    far = cylinders_meeting(cantor, Ball([5.0], 0.1), max_diam=0.1)
    assert far == []


def test_cylinders_meeting_cantor_depth2(cantor):
    words = cylinders_meeting(cantor, Ball([0.0], 0.01), max_diam=1 / 9)
    assert words == [(0, 0)]


def test_cylinders_meeting_lexicographic(cantor):
    words = cylinders_meeting(cantor, cantor.seed_ball, max_diam=1 / 9)
    assert words == sorted(words)
    assert len(words) == 4


def test_weights_sum_to_one(cantor, sierpinski, koch):
    for ifs, depth in ((cantor, 8), (sierpinski, 6), (koch, 5)):
        total = 0.0
        for word in itertools.product(range(ifs.n_maps), repeat=depth):
            total += ifs.cylinder_weight(word)
        assert total == pytest.approx(1.0, abs=1e-9)


def test_measure_bounds_whole_and_disjoint(cantor):
    assert measure_bounds(cantor, Ball([0.5], 2.0), 5) == (1.0, 1.0)
    assert measure_bounds(cantor, Ball([9.0], 0.5), 5) == (0.0, 0.0)


def test_measure_bounds_exact_cantor_corner(cantor):
    for m in (1, 2, 4, 6):
        lo, hi = measure_bounds(cantor, Ball([0.0], 3.0**-m), m)
        assert lo == pytest.approx(2.0**-m, rel=1e-9)
        assert hi == pytest.approx(2.0**-m, rel=1e-9)


def test_measure_bracket_tightens_with_depth(cantor):
    rng = np.random.default_rng(5)
    for _ in range(10):
        region = Ball([float(rng.uniform(0, 1))], float(rng.uniform(0.05, 0.4)))
        prev = measure_bounds(cantor, region, 2)
        for depth in range(3, 10):
            cur = measure_bounds(cantor, region, depth)
            assert cur[0] >= prev[0] - 1e-12
            assert cur[1] <= prev[1] + 1e-12
            prev = cur


def test_chaos_sample_determinism_and_exclusion(cantor):
    a = chaos_sample(cantor, 1000, 9)
    b = chaos_sample(cantor, 1000, 9)
    assert np.array_equal(a, b)
    c = chaos_sample(cantor, 10000, 10)
    assert c.min() >= 0.0 and c.max() <= 1.0
    assert not np.any((c > 1 / 3 + 1e-6) & (c < 2 / 3 - 1e-6))


def test_chaos_sample_rejects_zero():
    with pytest.raises(ValueError):
        chaos_sample(preset("cantor3"), 0, 1)


def test_distance_and_projection(cantor):
    lo, hi = distance_to_attractor(cantor, [0.5], rel_precision=1e-4)
    assert lo <= 1 / 6 + 1e-12
    assert hi >= 1 / 6 - 1e-12
    assert hi - lo <= 1e-3
    lo, _ = distance_to_attractor(cantor, [0.75], rel_precision=1e-4)
    assert lo <= 1e-9  # 0.75 = base-3 repeating 20 -> on the attractor
    p = project_to_attractor(cantor, [0.52])
    assert abs(p[0] - 2 / 3) < 1e-9


def test_seed_ball_rescaled_to_unit_diameter(koch):
    assert koch.seed_ball.diameter <= 1.0 + 1e-12


def test_load_rejects_escaping_seed():
    eye = np.eye(1)
    with pytest.raises(ValueError):
        IFSystem(
            [Similarity(1 / 3, eye, [0.9])],  # sends seed ball outside itself
            seed_ball=Ball([0.5], 0.5),
        )


def test_open_set_overlap_detected():
    eye = np.eye(1)
    from fractalgame.geometry import AxisBox

    with pytest.raises(ValueError):
        IFSystem(
            [Similarity(0.6, eye, [0.0]), Similarity(0.6, eye, [0.4])],
            seed_ball=Ball([0.5], 0.5),
            open_set=AxisBox([0.0], [1.0]),
        )


def test_ifs_json_round_trip(koch):
    d = ifs_to_dict(koch)
    back = ifs_from_dict(d)
    assert back.dimension == pytest.approx(koch.dimension, abs=1e-12)
    assert np.allclose(back.seed_ball.center, koch.seed_ball.center)
    for a, b in zip(back.maps, koch.maps):
        assert a.ratio == pytest.approx(b.ratio)
        assert np.allclose(a.rotation, b.rotation)
        assert np.allclose(a.translation, b.translation)
