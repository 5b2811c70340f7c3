import itertools
import math

import numpy as np
import pytest

from fractalgame.diophantine import (
    AffineMap,
    EnumerationCap,
    badness_witness,
    ball_badness_margin,
    continued_fraction,
    rational_targets_in_window,
    simplex_hyperplane,
    simplex_radius_bound,
    unit_ball_volume,
)
from fractalgame.geometry import Ball

GOLDEN = (math.sqrt(5) - 1) / 2
SILVER = math.sqrt(2) - 1


def brute_targets(lam, q_lo, q_hi, ball):
    """Independent enumeration oracle: plain loops over the integer box."""
    n = lam.dim
    found = []
    inv = np.linalg.inv(lam.matrix)
    for q in range(max(1, math.ceil(q_lo - 1e-12)), math.ceil(q_hi - 1e-12)):
        pre = lam.invert(ball.center)
        hw = ball.radius * np.linalg.norm(inv, axis=1)
        los = np.ceil((pre - hw) * q - 1e-9).astype(int)
        his = np.floor((pre + hw) * q + 1e-9).astype(int)
        for pv in itertools.product(*[range(los[d], his[d] + 1) for d in range(n)]):
            img = lam.apply(np.array(pv) / q)
            if np.linalg.norm(img - ball.center) <= ball.radius + 1e-12:
                found.append((pv, q))
    return found


def test_window_enumeration_examples():
    lam = AffineMap.identity(1)
    out = rational_targets_in_window(lam, 1, 3, Ball([0.5], 0.2))
    assert [(t.p, t.q) for t in out] == [((1,), 2)]
    out = rational_targets_in_window(lam, 1, 2, Ball([0.0], 0.5))
    assert [(t.p, t.q) for t in out] == [((0,), 1)]
    out = rational_targets_in_window(lam, 1, 50, Ball([10.5], 0.2))
    assert all(abs(t.image[0] - 10.5) <= 0.2 + 1e-12 for t in out)


def test_window_enumeration_empty_far_region():
    lam = AffineMap([[1.0]], [0.0])
    assert rational_targets_in_window(lam, 1, 4, Ball([0.5], 0.1)) == []


def test_window_enumeration_matches_brute_force():
    rng = np.random.default_rng(17)
    for n in (1, 2):
        for _ in range(25):
            m = rng.uniform(-2, 2, size=(n, n))
            if abs(np.linalg.det(m)) < 0.1:
                continue
            lam = AffineMap(m, rng.uniform(-1, 1, size=n))
            ball = Ball(rng.uniform(-2, 2, size=n), float(rng.uniform(0.05, 0.5)))
            q_hi = float(rng.uniform(3, 15))
            got = rational_targets_in_window(lam, 1, q_hi, ball)
            want = brute_targets(lam, 1, q_hi, ball)
            assert [(t.p, t.q) for t in got] == want


def test_window_cap():
    lam = AffineMap.identity(1)
    with pytest.raises(EnumerationCap):
        rational_targets_in_window(lam, 1, 10**7 + 2, Ball([0.0], 0.5))


def test_windows_partition_positive_integers():
    for R in (1.3, 2.0, 5.7):
        qs = np.arange(1, 2000)
        hits = np.zeros(len(qs), dtype=int)
        for k in range(1, 41):
            lo, hi = R ** (k - 1), R**k
            hits += ((qs >= lo) & (qs < hi)).astype(int)
            if lo > qs[-1]:
                break
        assert np.all(hits == 1)


def test_simplex_no_target_case():
    lam = AffineMap.identity(1)
    plane, targets = simplex_hyperplane(lam, 0.25, 1, [0.5], 0.1)
    assert plane is None and targets == []


def test_simplex_single_target_case():
    lam = AffineMap.identity(1)
    plane, targets = simplex_hyperplane(lam, 0.25, 1, [0.0], 0.1)
    assert [(t.p, t.q) for t in targets] == [((0,), 1)]
    assert plane is not None
    assert plane.offset / plane.normal[0] == pytest.approx(0.0, abs=1e-15)


def test_simplex_radius_precondition():
    lam = AffineMap.identity(1)
    bound = simplex_radius_bound(lam, 0.25, 1)
    assert bound == pytest.approx(0.125)
    with pytest.raises(ValueError):
        simplex_hyperplane(lam, 0.25, 1, [0.5], bound)


def test_unit_ball_volume():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def convergents(quotients):
    p0, q0, p1, q1 = 0, 1, 1, 0
    out = []
    for a in quotients:
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        out.append((p1, q1))
    return out


def test_badness_witness_golden_ratio():
    # oracle: convergent denominators of [1,1,1,...] give q^2 d(x,p/q) -> 1/sqrt(5)
    wit = badness_witness([GOLDEN], 100000, N=1)
    assert wit.delta_hat == pytest.approx(1 / math.sqrt(5), rel=0.02)


def test_badness_witness_silver_ratio():
    wit = badness_witness([SILVER], 100000, N=1)
    assert wit.delta_hat == pytest.approx(1 / (2 * math.sqrt(2)), rel=0.02)


def test_badness_witness_rational_hits_zero():
    wit = badness_witness([0.5], 2, N=1)
    assert wit.delta_hat == 0.0
    assert wit.argmin.q == 2


def test_badness_witness_monotone_in_Q():
    prev = math.inf
    for Q in (10, 100, 1000, 10000):
        wit = badness_witness([GOLDEN], Q, N=1)
        assert wit.delta_hat <= prev + 1e-15
        prev = wit.delta_hat


def test_badness_witness_classical_convergent_floor():
    # quotients bounded by M=1 imply q^2 |x - p/q| >= 1/(M+2) at convergents
    for pk, qk in convergents([1] * 24):
        if qk > 10**5:
            break
        assert qk * qk * abs(GOLDEN - pk / qk) >= 1 / 3 - 1e-9


def test_badness_witness_affine_scaling():
    lam = AffineMap([[2.0]], [1 / 7])
    x = lam.apply([GOLDEN])
    wit = badness_witness(x, 20000, N=1, lam=lam)
    # image distances are exactly twice the preimage ones
    assert wit.delta_hat == pytest.approx(2 / math.sqrt(5), rel=0.02)


def test_ball_badness_margin_subtracts_radius():
    margin, q = ball_badness_margin([GOLDEN], 0.0, 1000, lam=None)
    wit = badness_witness([GOLDEN], 1000, N=1)
    assert margin == pytest.approx(wit.delta_hat, rel=1e-12)
    m2, _ = ball_badness_margin([GOLDEN], 1e-4, 1000)
    assert m2 < margin


def test_continued_fraction_golden():
    cf = continued_fraction(GOLDEN, 40)
    assert cf.trusted_len >= 15
    assert all(a == 1 for a in cf.quotients[:15])
    assert not cf.terminated


def test_continued_fraction_silver():
    cf = continued_fraction(SILVER, 30)
    assert all(a == 2 for a in cf.quotients[:15])


def test_continued_fraction_rational_terminates():
    cf = continued_fraction(1 / 3, 20)
    assert cf.quotients == [3]
    assert cf.terminated


def test_continued_fraction_term_cap():
    with pytest.raises(ValueError):
        continued_fraction(GOLDEN, 41)
