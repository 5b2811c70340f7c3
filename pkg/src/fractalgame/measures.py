"""Empirical certification of friendliness conditions for an IFS measure.

Three conditions are sampled and bracketed conservatively (lower bounds in
numerators of ">=" claims, upper bounds in denominators):

  power law   a * r^delta <= mu(B(x,r)) <= b * r^delta
  doubling    mu(B(x, 5r/6)) > D * mu(B(x,r))
  decay       mu(B(x,r) within eps of a hyperplane) < C * (eps/r)^a * mu(B(x,r))

The certificate also stores alpha_prime = (D/C)^(1/a), the threshold below
which (divided by 12) the winning strategy's contraction must stay.

Certification is sampling, not proof: constants only weaken with shallower
refinement depth, and every run records its sample counts and seed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .geometry import Ball, Hyperplane
from .ifs import BallRegion, IFSystem, IntersectionRegion, SlabRegion, chaos_sample, measure_bounds

# Decay-exponent fits only use eps/r at or below this, avoiding the
# saturation plateau where the slab swallows most of the ball.
DECAY_FIT_MAX_RATIO = 1 / 3


@dataclass
class MeasureCertificate:
    """Empirically fitted friendliness constants for one system."""

    a_pl: float
    b_pl: float
    delta: float
    D: float
    C: float
    a_decay: float
    r0: float
    alpha_prime: float
    n_centers: int = 0
    depth: int = 0
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.a_pl <= self.b_pl:
            raise ValueError("power-law constants need 0 < a <= b")
        if not 0 < self.D <= 1:
            raise ValueError("doubling constant must be in (0, 1]")
        if self.C <= 0 or self.a_decay <= 0:
            raise ValueError("decay constants must be positive")
        if not 0 < self.r0 <= 1:
            raise ValueError("r0 must be in (0, 1]")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MeasureCertificate":
        return cls(**json.loads(text))


def alpha_prime(C: float, a_decay: float, D: float) -> float:
    """Threshold (D/C)^(1/a) combining decay and doubling constants."""
    if C <= 0 or a_decay <= 0 or D <= 0:
        raise ValueError("alpha_prime needs positive C, a, D")
    return (D / C) ** (1.0 / a_decay)


def _check_depth(ifs: IFSystem, radii, depth: int):
    radii = [float(r) for r in radii]
    if not radii or any(not 0 < r <= 1 for r in radii):
        raise ValueError("radii must lie in (0, 1]")
    max_ratio = float(np.max(ifs.ratios))
    cyl_diam = ifs.seed_ball.diameter * max_ratio**depth
    if cyl_diam > min(radii) / 10 + 1e-15:
        raise ValueError(
            f"depth {depth} too shallow: cylinder diameter {cyl_diam:.3g} exceeds "
            f"min radius/10 = {min(radii) / 10:.3g}"
        )
    return radii


def required_depth(ifs: IFSystem, min_radius: float) -> int:
    """Smallest depth whose cylinder diameter is at most min_radius/10."""
    max_ratio = float(np.max(ifs.ratios))
    d = 0
    diam = ifs.seed_ball.diameter
    while diam > min_radius / 10:
        diam *= max_ratio
        d += 1
        if d > 64:
            raise ValueError("radius too small for tractable refinement depth")
    return d


def certify_power_law(
    ifs: IFSystem, n_centers: int, radii, depth: int, rng_seed: int
) -> tuple[float, float, float]:
    """Fit (a_pl, b_pl, delta_hat) over sampled centers and the given radii.

    delta_hat is the least-squares slope of log mu against log r using the
    geometric mean of the measure bracket; a_pl and b_pl normalize by the
    Moran dimension so the certificate brackets mu(B(x,r)) / r^delta.
    """
    radii = _check_depth(ifs, radii, depth)
    if len(radii) < 2:
        raise ValueError("need at least two radii for a power-law fit")
    centers = chaos_sample(ifs, n_centers, rng_seed)
    delta = ifs.dimension

    log_r, log_mu = [], []
    a_pl, b_pl = np.inf, 0.0
    for x in centers:
        for r in radii:
            lo, hi = measure_bounds(ifs, Ball(x, r), depth)
            if hi <= 0.0:
                continue
            if lo > 0.0:
                log_r.append(np.log(r))
                log_mu.append(0.5 * (np.log(lo) + np.log(hi)))
            a_pl = min(a_pl, lo / r**delta)
            b_pl = max(b_pl, hi / r**delta)
    if len(log_mu) < 2:
        raise ValueError("degenerate power-law fit: fewer than two usable samples")
    slope = np.polyfit(log_r, log_mu, 1)[0]
    return float(a_pl), float(b_pl), float(slope)


def certify_doubling(ifs: IFSystem, n_centers: int, radii, depth: int, rng_seed: int) -> float:
    """Smallest sampled ratio mu(B(x, 5r/6)) / mu(B(x, r)), bracketed
    conservatively (lower bound over upper bound)."""
    radii = _check_depth(ifs, radii, depth)
    centers = chaos_sample(ifs, n_centers, rng_seed)
    worst = np.inf
    for x in centers:
        for r in radii:
            lo_num, _ = measure_bounds(ifs, Ball(x, (5 / 6) * r), depth)
            _, hi_den = measure_bounds(ifs, Ball(x, r), depth)
            if hi_den <= 0.0:
                continue
            worst = min(worst, lo_num / hi_den)
    if not np.isfinite(worst):
        raise ValueError("doubling certification: all samples had empty denominators")
    return float(worst)


def decay_samples(
    ifs: IFSystem,
    n_centers: int,
    n_planes: int,
    eps_ratios,
    depth: int,
    rng_seed: int,
    radii=None,
) -> list[tuple[float, float]]:
    """The decay sample cloud: (eps/r, q) pairs with q the conservative slab
    to ball mass ratio, for balls at chaos centers and hyperplanes through
    on-attractor anchors with random unit normals."""
    eps_ratios = [float(e) for e in eps_ratios]
    if not eps_ratios or any(not 0 < e <= 1 for e in eps_ratios):
        raise ValueError("eps_ratios must lie in (0, 1]")
    if radii is None:
        radii = [ifs.seed_ball.radius * f for f in (0.5, 0.25, 0.125)]
    radii = _check_depth(ifs, radii, depth)

    rng = np.random.default_rng(rng_seed)
    centers = chaos_sample(ifs, n_centers, rng_seed)
    anchors = chaos_sample(ifs, max(n_planes * 4, n_planes), rng_seed + 1)

    samples: list[tuple[float, float]] = []
    for x in centers:
        for r in radii:
            ball = Ball(x, r)
            lo_ball, _ = measure_bounds(ifs, ball, depth)
            if lo_ball <= 0.0:
                continue
            near = anchors[np.linalg.norm(anchors - x, axis=1) <= r / 2]
            planes = []
            for j in range(n_planes):
                anchor = near[j % len(near)] if len(near) else x
                normal = rng.standard_normal(ifs.dim)
                normal /= np.linalg.norm(normal)
                planes.append(Hyperplane.through(anchor, normal))
            for plane in planes:
                for er in eps_ratios:
                    eps = er * r
                    region = IntersectionRegion(BallRegion(ball), SlabRegion(plane, eps))
                    _, hi_slab = measure_bounds(ifs, region, depth)
                    samples.append((er, hi_slab / lo_ball))
    return samples


def certify_decay(
    ifs: IFSystem,
    n_centers: int,
    n_planes: int,
    eps_ratios,
    depth: int,
    rng_seed: int,
    radii=None,
) -> tuple[float, float]:
    """Fit hyperplane-decay constants (C_hat, a_hat).

    a_hat is the log-log slope of q against eps/r over eps/r <= 1/3 (larger
    ratios saturate near q = 1); C_hat is the empirical envelope
    max q * (eps/r)^(-a_hat) over every sample, so the reported pair has
    zero violations by construction.
    """
    samples = decay_samples(ifs, n_centers, n_planes, eps_ratios, depth, rng_seed, radii)
    fit = [(np.log(er), np.log(q)) for er, q in samples if q > 0 and er <= DECAY_FIT_MAX_RATIO]
    if len(fit) < 2:
        raise ValueError("decay certification: not enough informative samples to fit")
    xs, ys = zip(*fit)
    a_hat = float(np.polyfit(xs, ys, 1)[0])
    if a_hat <= 0:
        raise ValueError("decay fit produced a nonpositive exponent")
    C_hat = max(q * er ** (-a_hat) for er, q in samples)
    return float(max(C_hat, 1e-12)), a_hat


def certify_measure(
    ifs: IFSystem,
    n_centers: int = 24,
    n_planes: int = 6,
    radii=None,
    eps_ratios=None,
    depth: int | None = None,
    rng_seed: int = 0,
) -> MeasureCertificate:
    """Run all three certifications with shared centers and depth.

    The power-law pass includes both the doubling radii and their 5/6
    multiples, so the certified bracket really covers every ball that the
    doubling ratio touches.
    """
    if radii is None:
        rmax = min(1.0, ifs.seed_ball.diameter / 2)
        radii = [rmax * (1 / 3) ** k for k in range(1, 6)]
    radii = sorted({float(r) for r in radii}, reverse=True)
    if eps_ratios is None:
        eps_ratios = [3.0**-e for e in (1.0, 1.5, 2.0, 2.5, 3.0)] + [0.6, 1.0]
    if depth is None:
        depth = required_depth(ifs, min(radii) * min(eps_ratios))

    pl_radii = sorted({r for r in radii} | {(5 / 6) * r for r in radii}, reverse=True)
    a_pl, b_pl, delta_hat = certify_power_law(ifs, n_centers, pl_radii, depth, rng_seed)
    D_hat = certify_doubling(ifs, n_centers, radii, depth, rng_seed)
    C_hat, a_hat = certify_decay(
        ifs, n_centers, n_planes, eps_ratios, depth, rng_seed, radii=radii
    )
    return MeasureCertificate(
        a_pl=a_pl,
        b_pl=b_pl,
        delta=delta_hat,
        D=D_hat,
        C=C_hat,
        a_decay=a_hat,
        r0=1.0,
        alpha_prime=alpha_prime(C_hat, a_hat, D_hat),
        n_centers=n_centers,
        depth=depth,
        rng_seed=rng_seed,
    )
