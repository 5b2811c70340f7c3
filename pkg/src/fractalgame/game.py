"""Schmidt game engine: turn alternation, move legality, transcripts, replay.

Player B opens with the configured initial ball; thereafter A and B
alternate, each shrinking the current ball by their contraction factor
(alpha for A, beta for B) and recentering anywhere that keeps the new ball
nested and the center close to the attractor. An illegal candidate from a
strategy is repaired to the concentric move and logged, never forfeited.

Strategies are callables (state, config) -> center.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import TAU, Ball, as_point, ball_in_ball
from .ifs import IFSystem, distance_to_attractor, project_to_attractor

PLAYER_A = "A"
PLAYER_B = "B"


@dataclass
class GameConfig:
    alpha: float
    beta: float
    initial_ball: Ball
    support: IFSystem
    support_tolerance: float = 1e-3  # relative to the current ball radius
    max_rounds: int | None = None
    target_radius: float | None = None

    def __post_init__(self):
        if not 0 < self.alpha < 1 or not 0 < self.beta < 1:
            raise ValueError("alpha and beta must be in (0,1)")
        if self.max_rounds is None and self.target_radius is None:
            raise ValueError("need max_rounds or target_radius to stop the game")


@dataclass
class Move:
    owner: str
    ball: Ball
    repaired: bool = False
    info: dict = field(default_factory=dict)


@dataclass
class GameState:
    history: list[Move]
    whose_turn: str

    @property
    def current_ball(self) -> Ball:
        return self.history[-1].ball

    @property
    def round(self) -> int:
        return sum(1 for m in self.history if m.owner == PLAYER_A)


@dataclass
class Transcript:
    config: GameConfig
    moves: list[Move]
    outcome_point: np.ndarray
    outcome_radius: float
    aborted: bool = False
    notes: dict = field(default_factory=dict)

    def to_jsonl(self) -> str:
        lines = [
            json.dumps(
                {
                    "type": "config",
                    "alpha": self.config.alpha,
                    "beta": self.config.beta,
                    "initial_center": self.config.initial_ball.center.tolist(),
                    "initial_radius": self.config.initial_ball.radius,
                    "support_tolerance": self.config.support_tolerance,
                    "target_radius": self.config.target_radius,
                    "max_rounds": self.config.max_rounds,
                    "notes": _jsonable(self.notes),
                },
                sort_keys=True,
            )
        ]
        for m in self.moves:
            lines.append(
                json.dumps(
                    {
                        "type": "move",
                        "owner": m.owner,
                        "center": m.ball.center.tolist(),
                        "radius": m.ball.radius,
                        "repaired": m.repaired,
                        "info": _jsonable(m.info),
                    },
                    sort_keys=True,
                )
            )
        lines.append(
            json.dumps(
                {
                    "type": "outcome",
                    "point": self.outcome_point.tolist(),
                    "radius": self.outcome_radius,
                    "aborted": self.aborted,
                },
                sort_keys=True,
            )
        )
        return "\n".join(lines) + "\n"


def _jsonable(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, np.ndarray):
            out[k] = v.tolist()
        elif isinstance(v, (np.floating, np.integer)):
            out[k] = v.item()
        else:
            out[k] = v
    return out


def _on_support(config: GameConfig, center: np.ndarray, scale: float) -> bool:
    tol = config.support_tolerance * scale
    lo, hi = distance_to_attractor(config.support, center, rel_precision=0.25)
    if hi <= tol + TAU:
        return True
    if lo > tol:
        return False
    lo, hi = distance_to_attractor(config.support, center, rel_precision=1e-3)
    return lo <= tol + TAU


def validate_move(state: GameState, config: GameConfig, center) -> tuple[bool, str]:
    """Check a proposed center for the player whose turn it is.

    The new radius is forced by the rules (alpha or beta times the current
    radius); legality is nesting plus proximity to the attractor. Returns
    (accepted, reason); reason is empty on acceptance.
    """
    center = as_point(center)
    cur = state.current_ball
    factor = config.alpha if state.whose_turn == PLAYER_A else config.beta
    new_ball = Ball(center, factor * cur.radius)
    if not ball_in_ball(new_ball, cur):
        return False, "not_nested"
    if not _on_support(config, center, cur.radius):
        return False, "off_support"
    return True, ""


def play_game(config: GameConfig, strat_A, strat_B) -> Transcript:
    """Run one game; returns the full transcript.

    B opens with config.initial_ball. Illegal strategy candidates are
    replaced by the concentric move (flagged in the transcript). The game
    stops when the current radius drops below target_radius or after
    max_rounds A-moves; an exception inside a strategy aborts with a
    partial transcript.
    """
    opening = Move(PLAYER_B, config.initial_ball, info={"opening": True})
    state = GameState(history=[opening], whose_turn=PLAYER_A)
    moves = [opening]
    aborted = False
    notes: dict = {}

    def finished() -> bool:
        if config.target_radius is not None and state.current_ball.radius < config.target_radius:
            return True
        if config.max_rounds is not None and state.round >= config.max_rounds:
            return True
        return False

    while not finished():
        strategy = strat_A if state.whose_turn == PLAYER_A else strat_B
        owner = state.whose_turn
        try:
            candidate = strategy(state, config)
        except Exception as err:  # noqa: BLE001 - abort semantics by contract
            aborted = True
            notes["abort_reason"] = f"{type(err).__name__}: {err}"
            break
        ok, reason = validate_move(state, config, candidate)
        repaired = False
        if not ok:
            candidate = state.current_ball.center
            repaired = True
        factor = config.alpha if owner == PLAYER_A else config.beta
        ball = Ball(as_point(candidate), factor * state.current_ball.radius)
        info = {} if ok else {"rejected": reason}
        extra = getattr(strategy, "last_move_info", None)
        if extra:
            info.update(extra)
        move = Move(owner, ball, repaired=repaired, info=info)
        moves.append(move)
        state.history.append(move)
        state.whose_turn = PLAYER_B if owner == PLAYER_A else PLAYER_A

    last = state.current_ball
    return Transcript(
        config=config,
        moves=moves,
        outcome_point=last.center.copy(),
        outcome_radius=last.radius,
        aborted=aborted,
        notes=notes,
    )


def concentric_strategy(state: GameState, config: GameConfig) -> np.ndarray:
    """Never moves the center; useful as a baseline for either player."""
    return state.current_ball.center


class GreedyAdversary:
    """Player B heuristic that steers toward the most threatening rational
    target (smallest distance relative to its required separation), walking
    candidate points on the segment toward it and projecting them onto the
    attractor. Falls back to the concentric move."""

    def __init__(self, ifs: IFSystem, lam, q_cap: int = 20000, n_steps: int = 8):
        from .diophantine import AffineMap, rational_targets_in_window

        self.ifs = ifs
        self.lam = lam if lam is not None else AffineMap.identity(ifs.dim)
        self.q_cap = q_cap
        self.n_steps = n_steps
        self._enum = rational_targets_in_window
        self.last_move_info: dict = {}

    def _nearest_target(self, ball: Ball):
        n = self.ifs.dim
        exponent = (n + 1) / n
        q_hi = min(self.q_cap, max(4.0, (ball.radius * 0.05) ** (-n / (n + 1)) * 4.0))
        search = Ball(ball.center, max(ball.radius * 2, 1e-6))
        try:
            targets = self._enum(self.lam, 1, q_hi, search)
        except Exception:
            return None
        best, best_score = None, np.inf
        for t in targets:
            score = float(np.linalg.norm(t.image - ball.center)) * t.q**exponent
            if score < best_score:
                best, best_score = t, score
        return best

    def __call__(self, state: GameState, config: GameConfig) -> np.ndarray:
        from .game import validate_move  # self-import keeps signature local

        ball = state.current_ball
        self.last_move_info = {}
        target = self._nearest_target(ball)
        if target is None:
            return ball.center
        reach = (1 - config.beta) * ball.radius
        gap = target.image - ball.center
        dist = float(np.linalg.norm(gap))
        if dist < TAU:
            return ball.center
        for s in np.linspace(1.0, 0.0, self.n_steps, endpoint=False):
            step = min(1.0, s * reach / dist)
            raw = ball.center + step * gap
            candidate = project_to_attractor(self.ifs, raw)
            ok, _ = validate_move(state, config, candidate)
            if ok:
                self.last_move_info = {"target_q": target.q, "target_dist": dist}
                return candidate
        return ball.center


def replay_transcript(transcript: Transcript, separation: dict | None = None) -> list[str]:
    """Independent replay of a transcript; returns a list of violations.

    Recomputes the radius law from the config, re-checks nesting and support
    proximity move by move, and confirms the outcome point sits inside every
    recorded ball. With `separation` given ({"lam", "delta", "q_max"}), also
    verifies that the final ball keeps distance delta * q^(-(N+1)/N) from
    every rational target with q <= q_max.
    """
    from .diophantine import AffineMap

    cfg = transcript.config
    violations: list[str] = []
    expected_radius = cfg.initial_ball.radius
    prev: Ball | None = None
    for i, move in enumerate(transcript.moves):
        ball = move.ball
        if i == 0:
            if move.owner != PLAYER_B:
                violations.append("move 0 must be player B's opening")
        else:
            factor = cfg.alpha if move.owner == PLAYER_A else cfg.beta
            expected_radius *= factor
            if not np.isclose(ball.radius, expected_radius, rtol=1e-9, atol=0):
                violations.append(
                    f"move {i}: radius {ball.radius!r} breaks the exact law "
                    f"(expected {expected_radius!r})"
                )
            if prev is not None and not ball_in_ball(ball, prev, tol=10 * TAU):
                violations.append(f"move {i}: ball not nested in its predecessor")
        scale = prev.radius if prev is not None else ball.radius
        lo, _ = distance_to_attractor(cfg.support, ball.center, rel_precision=1e-3)
        if lo > cfg.support_tolerance * scale * (1 + 1e-6) + TAU:
            violations.append(f"move {i}: center is off-support (distance >= {lo:.3g})")
        prev = ball

    for i, move in enumerate(transcript.moves):
        d = float(np.linalg.norm(transcript.outcome_point - move.ball.center))
        if d > move.ball.radius + transcript.outcome_radius + 10 * TAU:
            violations.append(f"outcome point escapes the ball of move {i}")

    if separation is not None:
        lam: AffineMap = separation["lam"]
        delta = float(separation["delta"])
        q_max = int(separation["q_max"])
        final = transcript.moves[-1].ball
        if q_max >= 1:
            from .diophantine import ball_badness_margin

            margin, q_at = ball_badness_margin(final.center, final.radius, q_max, lam=lam)
            if margin <= delta * (1 - 1e-9) - 1e-12:
                violations.append(
                    f"separation violated: ball margin {margin:.6g} at q={q_at} "
                    f"(needed {delta:.6g})"
                )
    return violations


def transcript_from_jsonl(text: str, support: IFSystem) -> Transcript:
    """Rebuild a transcript from its JSON-lines serialization."""
    config = None
    moves: list[Move] = []
    outcome_point = None
    outcome_radius = None
    aborted = False
    notes: dict = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        kind = rec.get("type")
        if kind == "config":
            config = GameConfig(
                alpha=rec["alpha"],
                beta=rec["beta"],
                initial_ball=Ball(rec["initial_center"], rec["initial_radius"]),
                support=support,
                support_tolerance=rec.get("support_tolerance", 1e-3),
                max_rounds=rec.get("max_rounds"),
                target_radius=rec.get("target_radius"),
            )
            notes = rec.get("notes", {})
        elif kind == "move":
            moves.append(
                Move(
                    rec["owner"],
                    Ball(rec["center"], rec["radius"]),
                    repaired=rec.get("repaired", False),
                    info=rec.get("info", {}),
                )
            )
        elif kind == "outcome":
            outcome_point = as_point(rec["point"])
            outcome_radius = float(rec["radius"])
            aborted = bool(rec.get("aborted", False))
    if config is None or outcome_point is None:
        raise ValueError("transcript stream is missing config or outcome records")
    return Transcript(config, moves, outcome_point, outcome_radius, aborted, notes)
