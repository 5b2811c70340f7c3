"""Player A's constructive winning strategy against rational target families.

The scheme, for contraction parameters alpha (ours) and beta_eff (the
opponent's, as seen between our consecutive turns), with theta = alpha *
beta_eff and R = theta^(-N/(N+1)):

  pre phase    play concentric until the opponent's ball radius drops to
               r_I <= r0 while also clearing the simplex-lemma volume bound
               for theta. That single check suffices: the bound is
               scale-free across stages.
  stage k      (ball radius theta^k * r_I) fetch the targets lam(p/q) with
               R^k <= q < R^(k+1) inside the current ball. They lie on one
               hyperplane; pick a new center whose shrunken ball keeps
               distance > alpha * radius from that hyperplane and from the
               current ball's boundary.

Every target with q in the stage-k window needs final separation
delta * q^(-(N+1)/N) <= delta * theta^k, and the stage provides
alpha * theta^k * r_I, which dominates since alpha * r_I > delta for
delta = (alpha beta)^(k0+1) * beta^k0 * r0 with beta^(k0+1) r0 < r_I.
Nesting preserves each stage's separation forever after, which is what the
transcript replay re-checks.

Window bookkeeping note: the stage at radius theta^k * r_I handles the
window [R^k, R^(k+1)), one step finer than the radius exponent; coarser
windows would demand separations exceeding the current radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diophantine import AffineMap, simplex_hyperplane, simplex_radius_bound
from .game import GameConfig, GameState
from .geometry import Ball, Hyperplane, as_point, point_hyperplane_distance
from .ifs import IFSystem, cylinder_generic_point, cylinders_meeting
from .measures import MeasureCertificate

# Relative safety margin kept between the anchored radius and the exact
# simplex volume bound, absorbing float drift in the radius law.
VOLUME_SAFETY = 1e-6


class GeoSelectExhausted(RuntimeError):
    """No cylinder representative met the selection margins; the certificate
    constants are likely too optimistic and alpha should shrink."""


@dataclass
class TargetFamily:
    """One family of rational targets lam(p/q) with rate q^(-(N+1)/N).

    Stage thresholds F(k) = R^k are fixed once the family is bound to game
    contractions via theta = alpha * beta_eff.
    """

    lam: AffineMap
    n_dim: int
    R: float | None = None

    @property
    def exponent(self) -> float:
        return (self.n_dim + 1) / self.n_dim

    def rho(self, t: float) -> float:
        return float(t) ** (-self.exponent)

    def bind(self, alpha: float, beta_eff: float) -> "TargetFamily":
        theta = alpha * beta_eff
        self.R = theta ** (-self.n_dim / (self.n_dim + 1))
        return self

    def F(self, k: int) -> float:
        if self.R is None:
            raise ValueError("family is not bound to game parameters yet")
        return self.R**k


def stage_windows(alpha: float, beta: float, n_dim: int, k: int) -> tuple[float, float]:
    """Stage-k denominator window [R^(k-1), R^k), R = (alpha beta)^(-N/(N+1)).

    k = 0 gives [0, 1), which contains no positive integer: no denominator
    is ever skipped.
    """
    if k < 0:
        raise ValueError("stage index must be >= 0")
    R = (alpha * beta) ** (-n_dim / (n_dim + 1))
    if k == 0:
        return 0.0, 1.0
    return R ** (k - 1), R**k


def guaranteed_delta(alpha: float, beta: float, k0: int, r0: float) -> float:
    """Separation constant (alpha beta)^(k0+1) * beta^k0 * r0."""
    if alpha <= 0 or beta <= 0 or r0 <= 0 or k0 < 0:
        raise ValueError("inputs must be positive (k0 >= 0)")
    if alpha >= 1 or beta >= 1:
        raise ValueError("alpha and beta must be in (0,1)")
    return (alpha * beta) ** (k0 + 1) * beta**k0 * r0


def geo_select(
    ifs: IFSystem,
    certificate: MeasureCertificate,
    region: Ball,
    plane: Hyperplane | None,
    eps0: float,
    alpha: float,
) -> np.ndarray:
    """Center x0 on the attractor whose alpha-shrunken ball clears the
    plane's eps0-neighborhood and the region's boundary by more than
    alpha * radius.

    When the plane is absent or already far, the region's own center works.
    Otherwise candidates are exact attractor representatives of cylinders
    with diameter <= alpha*r/4 meeting B(x, 5r/6); the one farthest from the
    plane wins, ties resolved by word order. The friendliness certificate
    guarantees a qualifying cylinder exists for alpha below alpha_prime/12.
    """
    x, r = region.center, region.radius
    if alpha >= certificate.alpha_prime / 12:
        raise ValueError("alpha must stay below alpha_prime / 12")
    if eps0 < 0 or eps0 >= certificate.alpha_prime * r / 12:
        raise ValueError("eps0 must stay below alpha_prime * r / 12")
    if r > certificate.r0 * (1 + 1e-9):
        raise ValueError("region radius exceeds the certificate's r0")

    if plane is None:
        return x.copy()
    if point_hyperplane_distance(x, plane) - eps0 > 2 * alpha * r:
        return x.copy()

    words = cylinders_meeting(ifs, Ball(x, (5 / 6) * r), max_diam=alpha * r / 4)
    best = None
    best_dist = -math.inf
    for w in words:
        c = cylinder_generic_point(ifs, w)
        plane_gap = point_hyperplane_distance(c, plane) - eps0
        if plane_gap - 2 * alpha * r <= 0:
            continue
        if r - float(np.linalg.norm(c - x)) - 2 * alpha * r <= 0:
            continue
        if plane_gap > best_dist:
            best_dist = plane_gap
            best = c
    if best is None:
        raise GeoSelectExhausted(
            "geo_select exhausted: no cylinder cleared the margins; shrink alpha"
        )
    return best


@dataclass
class StrategyState:
    """Per-family bookkeeping for the staged strategy."""

    ifs: IFSystem
    certificate: MeasureCertificate
    family: TargetFamily
    alpha: float
    beta_eff: float
    r0: float = 1.0
    phase: str = "pre"
    k0: int = 0
    r_I: float = float("nan")
    r_prime: float = float("nan")
    delta_guaranteed: float = float("nan")
    stage: int = 0  # index of the next stage to play == completed stages
    last_move_info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.alpha >= self.certificate.alpha_prime / 12:
            raise ValueError("alpha must stay below alpha_prime / 12")
        self.family.bind(self.alpha, self.beta_eff)

    @property
    def theta(self) -> float:
        return self.alpha * self.beta_eff

    @property
    def activation_radius(self) -> float:
        bound = simplex_radius_bound(self.family.lam, self.theta, self.family.n_dim)
        return min(self.r0, bound * (1 - VOLUME_SAFETY))

    def handled_q_bound(self) -> float:
        """Every q below this is already separated by past stages."""
        return self.family.F(self.stage) if self.phase == "active" else 0.0


def schmidt_next(state: StrategyState, game: GameState, family: TargetFamily | None = None) -> np.ndarray:
    """Player A's next center for one target family.

    Concentric during the pre phase; on the first opponent ball whose radius
    clears both r0 and the simplex volume bound, fixes k0, r_prime and the
    guaranteed delta, then plays the staged avoidance described in the
    module docstring.
    """
    fam = family if family is not None else state.family
    ball = game.current_ball
    x, radius = ball.center, ball.radius

    if state.phase == "pre":
        if radius > state.activation_radius:
            state.last_move_info = {"phase": "pre"}
            return x.copy()
        state.phase = "active"
        state.r_I = radius
        t = math.log(radius / state.r0) / math.log(state.beta_eff)
        state.k0 = max(0, math.floor(t + 1e-12))
        state.r_prime = state.theta**state.k0 * state.r_I
        state.delta_guaranteed = guaranteed_delta(
            state.alpha, state.beta_eff, state.k0, state.r0
        )
        state.stage = 0

    k = state.stage
    # enumerate the stage window [R^k, R^(k+1)) in a hair-inflated copy of
    # the current ball so radius-law float drift cannot drop a target
    r_arg = radius * (1 + 1e-9) / state.theta**k
    plane, targets = simplex_hyperplane(fam.lam, state.theta, k + 1, x, r_arg)
    x0 = geo_select(state.ifs, state.certificate, ball, plane, 0.0, state.alpha)
    state.stage += 1
    state.last_move_info = {
        "phase": "active",
        "stage": k,
        "window": [fam.F(k), fam.F(k + 1)],
        "n_targets": len(targets),
        "concentric": bool(plane is None),
        "delta_guaranteed": state.delta_guaranteed,
    }
    return x0


class SchmidtStrategy:
    """Game-engine adapter around one StrategyState."""

    def __init__(
        self,
        ifs: IFSystem,
        certificate: MeasureCertificate,
        lam: AffineMap,
        alpha: float,
        beta: float,
        r0: float = 1.0,
    ):
        family = TargetFamily(lam, ifs.dim)
        self.state = StrategyState(ifs, certificate, family, alpha, beta, r0)
        self.last_move_info: dict = {}

    def __call__(self, game: GameState, config: GameConfig) -> np.ndarray:
        move = schmidt_next(self.state, game)
        self.last_move_info = self.state.last_move_info
        return move


def interleave_next(
    states: list[StrategyState], families: list[TargetFamily], game: GameState
) -> np.ndarray:
    """Round-robin move: at A-round t, family t mod m plays its own staged
    strategy; the other families' turns count as opponent shrinkage, which
    each state's beta_eff already prices in."""
    if not states:
        raise ValueError("need at least one strategy state")
    m = len(states)
    turn = game.round % m
    return schmidt_next(states[turn], game, families[turn])


class InterleavedStrategy:
    """Adapter playing m families in rotation. Family i sees an effective
    opponent contraction beta * (alpha*beta)^(m-1) between its turns, and
    all of its thresholds are computed from that."""

    def __init__(
        self,
        ifs: IFSystem,
        certificate: MeasureCertificate,
        lams: list[AffineMap],
        alpha: float,
        beta: float,
        r0: float = 1.0,
    ):
        if not lams:
            raise ValueError("need at least one affine map")
        if len(lams) > 16:
            raise ValueError("finite interleaving is capped at 16 families")
        m = len(lams)
        beta_eff = beta * (alpha * beta) ** (m - 1)
        self.states = [
            StrategyState(ifs, certificate, TargetFamily(lam, ifs.dim), alpha, beta_eff, r0)
            for lam in lams
        ]
        self.families = [s.family for s in self.states]
        self.last_move_info: dict = {}

    def __call__(self, game: GameState, config: GameConfig) -> np.ndarray:
        move = interleave_next(self.states, self.families, game)
        turn = game.round % len(self.states)
        self.last_move_info = dict(self.states[turn].last_move_info, family=turn)
        return move
