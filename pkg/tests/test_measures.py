import math

import numpy as np
import pytest

from fractalgame.geometry import Ball
from fractalgame.ifs import IFSystem, Similarity
from fractalgame.measures import (
    MeasureCertificate,
    alpha_prime,
    certify_decay,
    certify_doubling,
    certify_measure,
    certify_power_law,
    decay_samples,
    required_depth,
)


def scaled_cantor(scale):
    eye = np.eye(1)
    return IFSystem(
        [Similarity(1 / 3, eye, [0.0]), Similarity(1 / 3, eye, [2 * scale / 3])],
        seed_ball=Ball([scale / 2], scale / 2),
    )


def test_alpha_prime_values():
    assert alpha_prime(1.0, 1.0, 1.0) == pytest.approx(1.0)
    assert alpha_prime(2.0, 0.5, 0.5) == pytest.approx(0.0625)
    assert alpha_prime(1.0, 2.0, 0.25) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        alpha_prime(-1.0, 1.0, 1.0)


def test_certificate_requires_consistent_fields():
    with pytest.raises(ValueError):
        MeasureCertificate(a_pl=1.0, b_pl=0.5, delta=0.6, D=0.5, C=1.0, a_decay=0.5, r0=1.0, alpha_prime=0.5)


def test_certificate_json_round_trip(cantor_cert):
    again = MeasureCertificate.from_json(cantor_cert.to_json())
    assert again == cantor_cert


def test_alpha_prime_consistency(cantor_cert):
    recomputed = alpha_prime(cantor_cert.C, cantor_cert.a_decay, cantor_cert.D)
    assert recomputed == cantor_cert.alpha_prime


def test_power_law_exponent_on_cantor(cantor):
    radii = [3.0**-k for k in range(2, 9)]
    depth = required_depth(cantor, min(radii))
    a_pl, b_pl, delta_hat = certify_power_law(cantor, 24, radii, depth, rng_seed=7)
    assert 0.58 <= delta_hat <= 0.68
    assert 0 < a_pl <= b_pl


def test_power_law_point_attractor_flat():
    ifs = IFSystem([Similarity(0.5, np.eye(1), [0.25])], seed_ball=Ball([0.5], 0.5))
    # attractor is the single point 0.5; every ball around it has mass 1
    a_pl, b_pl, delta_hat = certify_power_law(ifs, 4, [0.5, 0.25, 0.126], 40, rng_seed=1)
    assert delta_hat == pytest.approx(0.0, abs=1e-6)


def test_power_law_needs_two_radii(cantor):
    with pytest.raises(ValueError):
        certify_power_law(cantor, 8, [1 / 9], 6, rng_seed=0)


def test_doubling_ratio_one_when_ball_covers_attractor():
    ifs = scaled_cantor(0.3)
    d = certify_doubling(ifs, 4, [0.9], required_depth(ifs, 0.75), rng_seed=3)
    assert d == pytest.approx(1.0)


def test_doubling_meets_power_law_floor(cantor, cantor_cert):
    floor = (cantor_cert.a_pl / cantor_cert.b_pl) * (5 / 6) ** cantor.dimension
    assert cantor_cert.D >= floor - 1e-12


def test_decay_exponent_range_on_cantor(cantor, cantor_cert):
    assert 0.4 <= cantor_cert.a_decay <= 0.9


def test_decay_far_plane_contributes_zero_mass(cantor):
    from fractalgame.geometry import Hyperplane
    from fractalgame.ifs import BallRegion, IntersectionRegion, SlabRegion, measure_bounds

    ball = Ball([0.1], 0.05)
    plane = Hyperplane([1.0], 0.9)  # distance 0.8 >> r + eps
    region = IntersectionRegion(BallRegion(ball), SlabRegion(plane, 0.01))
    assert measure_bounds(cantor, region, 8) == (0.0, 0.0)


def test_decay_envelope_has_no_violations(cantor):
    eps_ratios = [3.0**-e for e in (1.0, 1.5, 2.0, 2.5, 3.0)] + [0.6, 1.0]
    radii = [0.5 * (1 / 3) ** k for k in range(1, 6)]
    depth = required_depth(cantor, min(radii) * min(eps_ratios))
    C_hat, a_hat = certify_decay(cantor, 24, 6, eps_ratios, depth, rng_seed=7, radii=radii)
    samples = decay_samples(cantor, 24, 6, eps_ratios, depth, rng_seed=7, radii=radii)
    violations = sum(1 for er, q in samples if q > C_hat * er**a_hat * (1 + 1e-9))
    assert violations == 0


def test_decay_envelope_monotone_in_eps_ratios(cantor):
    # extending the sample set with ratios above the fit cutoff cannot
    # shrink the envelope constant
    base = [3.0**-e for e in (1.0, 1.5, 2.0, 2.5, 3.0)]
    radii = [0.5 * (1 / 3) ** k for k in range(1, 5)]
    depth = required_depth(cantor, min(radii) * min(base))
    c1, a1 = certify_decay(cantor, 12, 4, base, depth, rng_seed=5, radii=radii)
    c2, a2 = certify_decay(cantor, 12, 4, base + [0.5, 0.8, 1.0], depth, rng_seed=5, radii=radii)
    assert a2 == pytest.approx(a1, abs=1e-12)  # fit set unchanged
    assert c2 >= c1 - 1e-12


def test_constants_only_weaken_with_shallower_depth(cantor):
    radii = [3.0**-k for k in range(2, 5)]
    shallow = required_depth(cantor, min(radii))
    deep = shallow + 2
    a_s, b_s, _ = certify_power_law(cantor, 12, radii, shallow, rng_seed=11)
    a_d, b_d, _ = certify_power_law(cantor, 12, radii, deep, rng_seed=11)
    assert a_s <= a_d + 1e-12
    assert b_s >= b_d - 1e-12
    d_shallow = certify_doubling(cantor, 12, radii, shallow, rng_seed=11)
    d_deep = certify_doubling(cantor, 12, radii, deep, rng_seed=11)
    assert d_shallow <= d_deep + 1e-12


def test_certify_measure_depth_precondition(cantor):
    with pytest.raises(ValueError):
        certify_power_law(cantor, 8, [3.0**-6], 4, rng_seed=0)


def test_certify_measure_delta_near_moran(cantor, cantor_cert):
    assert abs(cantor_cert.delta - cantor.dimension) <= 0.05
