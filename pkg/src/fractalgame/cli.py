"""Command-line front end.

Subcommands: certify-measure, play, verify-ba, simplex-check, dim, demo.
Reports are JSON, sweeps are TSV, point clouds are CSV; a run with the same
spec and seed produces byte-identical files. Exit codes: 0 success, 1
validation error, 2 runtime error (caps, exhaustion).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dimension as dim_mod
from .diophantine import (
    AffineMap,
    EnumerationCap,
    badness_witness,
    continued_fraction,
    simplex_hyperplane,
    simplex_radius_bound,
)
from .game import GameConfig, GreedyAdversary, concentric_strategy, play_game, replay_transcript
from .geometry import Ball
from .ifs import IFSystem, RefinementTooDeep, chaos_sample, ifs_from_dict, ifs_to_dict, preset
from .measures import certify_measure
from .strategy import GeoSelectExhausted, InterleavedStrategy, SchmidtStrategy

_PRESET_NAMES = ("cantor3", "sierpinski", "koch")


class SessionSpecError(ValueError):
    """Carries every validation problem found in a session spec."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass
class SessionSpec:
    ifs_source: str | dict  # preset name or inline IFS dict
    maps: list[AffineMap]
    alpha: float | str  # number or "auto"
    beta: float
    adversary: str = "greedy"
    target_radius: float = 1e-8
    seed: int | None = None
    out: str = "."
    _ifs: IFSystem = field(init=False, repr=False, default=None)

    def load_ifs(self) -> IFSystem:
        if self._ifs is None:
            if isinstance(self.ifs_source, str):
                self._ifs = preset(self.ifs_source)
            else:
                self._ifs = ifs_from_dict(self.ifs_source)
        return self._ifs

    def to_json(self) -> str:
        ifs_part = self.ifs_source if isinstance(self.ifs_source, str) else self.ifs_source
        return json.dumps(
            {
                "ifs": ifs_part,
                "maps": [m.to_dict() for m in self.maps],
                "alpha": self.alpha,
                "beta": self.beta,
                "adversary": self.adversary,
                "target_radius": self.target_radius,
                "seed": self.seed,
                "out": self.out,
            },
            sort_keys=True,
            indent=2,
        )


def parse_session_spec(text: str) -> SessionSpec:
    """Parse and validate a session spec, reporting every error at once."""
    errors: list[str] = []
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise SessionSpecError([f"invalid JSON: {err}"]) from None
    if not isinstance(data, dict):
        raise SessionSpecError(["session spec must be a JSON object"])

    ifs_source = data.get("ifs", "cantor3")
    if isinstance(ifs_source, str):
        if ifs_source not in _PRESET_NAMES:
            errors.append(f"unknown preset {ifs_source!r} (available: {_PRESET_NAMES})")
    elif isinstance(ifs_source, dict):
        for i, m in enumerate(ifs_source.get("maps", [])):
            ratio = m.get("ratio")
            if ratio is None or not 0 < ratio < 1:
                errors.append(f"ifs map {i}: ratio must be in (0,1)")
            n = ifs_source.get("dim")
            rot = m.get("rotation")
            if n and rot is not None:
                r = np.asarray(rot, dtype=float).reshape(int(n), int(n))
                if np.max(np.abs(r.T @ r - np.eye(int(n)))) > 1e-10:
                    errors.append(f"ifs map {i}: rotation is not orthogonal")
    else:
        errors.append("ifs must be a preset name or an object")

    maps: list[AffineMap] = []
    for i, m in enumerate(data.get("maps", [])):
        try:
            maps.append(AffineMap.from_dict(m))
        except Exception as err:  # noqa: BLE001
            errors.append(f"affine map {i}: {err}")

    alpha = data.get("alpha", "auto")
    if alpha != "auto" and not (isinstance(alpha, (int, float)) and 0 < alpha < 1):
        errors.append("alpha must be a number in (0,1) or 'auto'")
    beta = data.get("beta", 0.5)
    if not (isinstance(beta, (int, float)) and 0 < beta < 1):
        errors.append("beta must be a number in (0,1)")

    adversary = data.get("adversary", "greedy")
    if adversary not in ("greedy", "concentric"):
        errors.append("adversary must be 'greedy' or 'concentric'")

    target_radius = data.get("target_radius", 1e-8)
    if not (isinstance(target_radius, (int, float)) and target_radius > 0):
        errors.append("target_radius must be positive")

    seed = data.get("seed")
    if seed is None:
        errors.append("seed is mandatory (all randomized steps must be reproducible)")
    elif not isinstance(seed, int) or seed < 0:
        errors.append("seed must be a non-negative integer")

    if errors:
        raise SessionSpecError(errors)
    return SessionSpec(
        ifs_source=ifs_source,
        maps=maps,
        alpha=alpha if alpha == "auto" else float(alpha),
        beta=float(beta),
        adversary=adversary,
        target_radius=float(target_radius),
        seed=seed,
        out=str(data.get("out", ".")),
    )


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    return path


def _json_report(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _load_session(args) -> SessionSpec:
    if args.spec:
        spec = parse_session_spec(Path(args.spec).read_text())
    else:
        spec = SessionSpec(
            ifs_source=args.preset,
            maps=[],
            alpha="auto",
            beta=0.5,
            seed=args.seed if args.seed is not None else 0,
        )
    if args.preset and args.spec is None:
        spec.ifs_source = args.preset
    if args.alpha is not None:
        spec.alpha = args.alpha
    if args.beta is not None:
        spec.beta = args.beta
    if args.seed is not None:
        spec.seed = args.seed
    if args.target_radius is not None:
        spec.target_radius = args.target_radius
    if args.out is not None:
        spec.out = args.out
    return spec


def _resolve_alpha(spec: SessionSpec, cert) -> float:
    if spec.alpha == "auto":
        return cert.alpha_prime / 13
    return float(spec.alpha)


def _cmd_certify(args) -> int:
    spec = _load_session(args)
    ifs = spec.load_ifs()
    cert = certify_measure(ifs, rng_seed=spec.seed)
    report = _json_report(
        {
            "system": ifs.name or "custom",
            "moran_dimension": ifs.dimension,
            "certificate": json.loads(cert.to_json()),
        }
    )
    path = _write(Path(spec.out), "certificate.json", report)
    print(f"alpha_prime = {cert.alpha_prime:.6g}  delta_hat = {cert.delta:.6g}  -> {path}")
    return 0


def _cmd_play(args) -> int:
    spec = _load_session(args)
    ifs = spec.load_ifs()
    cert = certify_measure(ifs, rng_seed=spec.seed)
    alpha = _resolve_alpha(spec, cert)
    lams = spec.maps or [AffineMap.identity(ifs.dim)]
    if len(lams) == 1:
        strat_a = SchmidtStrategy(ifs, cert, lams[0], alpha, spec.beta)
    else:
        strat_a = InterleavedStrategy(ifs, cert, lams, alpha, spec.beta)
    start = chaos_sample(ifs, 1, spec.seed)[0]
    config = GameConfig(
        alpha=alpha,
        beta=spec.beta,
        initial_ball=Ball(start, ifs.seed_ball.radius * 0.9),
        support=ifs,
        target_radius=spec.target_radius,
    )
    if spec.adversary == "greedy":
        strat_b = GreedyAdversary(ifs, lams[0])
    else:
        strat_b = concentric_strategy
    transcript = play_game(config, strat_a, strat_b)
    out_dir = Path(spec.out)
    _write(out_dir, "transcript.jsonl", transcript.to_jsonl())
    violations = replay_transcript(transcript)
    states = strat_a.states if hasattr(strat_a, "states") else [strat_a.state]
    summary = {
        "alpha": alpha,
        "beta": spec.beta,
        "rounds": sum(1 for m in transcript.moves if m.owner == "A"),
        "outcome_point": transcript.outcome_point.tolist(),
        "outcome_radius": transcript.outcome_radius,
        "replay_violations": violations,
        "families": [
            {
                "delta_guaranteed": s.delta_guaranteed,
                "stages": s.stage,
                "q_handled_below": s.handled_q_bound(),
            }
            for s in states
        ],
    }
    path = _write(out_dir, "play_report.json", _json_report(summary))
    print(
        f"outcome {np.array2string(transcript.outcome_point, precision=12)} "
        f"radius {transcript.outcome_radius:.3g}; replay violations: {len(violations)} -> {path}"
    )
    return 0 if not violations else 2


def _cmd_verify_ba(args) -> int:
    spec = _load_session(args)
    n = len(args.point)
    x = np.array(args.point, dtype=float)
    lam = spec.maps[0] if spec.maps else None
    wit = badness_witness(x, args.q_max, N=n, lam=lam)
    payload = {
        "point": x.tolist(),
        "q_max": wit.q_max_checked,
        "delta_hat": wit.delta_hat,
        "argmin_q": wit.argmin.q if wit.argmin else None,
        "argmin_p": list(wit.argmin.p) if wit.argmin else None,
    }
    if n == 1 and 0 < x[0] < 1:
        cf = continued_fraction(float(x[0]), 30)
        payload["continued_fraction"] = {
            "quotients": cf.quotients,
            "trusted_len": cf.trusted_len,
            "terminated": cf.terminated,
        }
    path = _write(Path(spec.out), "badness_report.json", _json_report(payload))
    print(f"delta_hat = {wit.delta_hat:.6g} at q = {payload['argmin_q']} -> {path}")
    return 0


def _cmd_simplex_check(args) -> int:
    spec = _load_session(args)
    rng = np.random.default_rng(spec.seed)
    n = args.dim
    trials = args.trials
    failures = 0
    max_residual = 0.0
    for _ in range(trials):
        lam = _random_affine(rng, n)
        theta = rng.uniform(0.15, 0.7)
        k = int(rng.integers(1, 6))
        r = 0.9 * simplex_radius_bound(lam, theta, n)
        x = rng.uniform(-2, 2, size=n)
        try:
            plane, targets = simplex_hyperplane(lam, theta, k, x, r)
        except ArithmeticError:
            failures += 1
            continue
        if plane is not None:
            res = max(
                abs(float(plane.normal @ t.image) - plane.offset) for t in targets
            )
            max_residual = max(max_residual, res / r)
    payload = {
        "dim": n,
        "trials": trials,
        "failures": failures,
        "max_relative_residual": max_residual,
    }
    path = _write(Path(spec.out), "simplex_report.json", _json_report(payload))
    print(f"simplex check: {failures}/{trials} failures -> {path}")
    return 0 if failures == 0 else 2


def _random_affine(rng, n: int) -> AffineMap:
    while True:
        m = rng.uniform(-2, 2, size=(n, n))
        if abs(np.linalg.det(m)) >= 0.1:
            return AffineMap(m, rng.uniform(-2, 2, size=n))


def _cmd_dim(args) -> int:
    spec = _load_session(args)
    ifs = spec.load_ifs()
    alpha = args.alpha if args.alpha is not None else 0.05
    x = ifs.seed_ball.center - ifs.seed_ball.radius  # left edge for cantor-like sets
    if ifs.dim > 1:
        x = ifs.seed_ball.center
    rows = ["beta\tn_beta\tbound\tbox_dim"]
    pts = chaos_sample(ifs, 20000, spec.seed)
    box = dim_mod.box_dimension(pts, [3.0**-m for m in range(3, 8)])
    for m in args.levels:
        beta = 3.0**-m
        count = dim_mod.pack_count(ifs, x, 1.0, beta)
        bound = dim_mod.dim_lower_bound(count, alpha, beta) if count >= 2 else 0.0
        rows.append(f"{beta:.12g}\t{count}\t{bound:.9f}\t{box:.6f}")
    path = _write(Path(spec.out), "dim_sweep.tsv", "\n".join(rows) + "\n")
    cloud = "\n".join(",".join(f"{v:.12g}" for v in p) for p in pts[:5000])
    _write(Path(spec.out), "points.csv", cloud + "\n")
    print(f"dimension sweep (box-count cross-check {box:.4f}) -> {path}")
    return 0


def _cmd_demo(args) -> int:
    spec = _load_session(args)
    ifs = spec.load_ifs()
    print(f"system: {ifs.name or 'custom'} (moran dimension {ifs.dimension:.10f})")
    cert = certify_measure(ifs, rng_seed=spec.seed)
    print(
        f"certificate: a={cert.a_pl:.4g} b={cert.b_pl:.4g} delta_hat={cert.delta:.4g} "
        f"D={cert.D:.4g} C={cert.C:.4g} a_decay={cert.a_decay:.4g}"
    )
    print(f"alpha_prime = {cert.alpha_prime:.6g}")
    alpha = _resolve_alpha(spec, cert)
    lam = spec.maps[0] if spec.maps else AffineMap.identity(ifs.dim)
    strat_a = SchmidtStrategy(ifs, cert, lam, alpha, spec.beta)
    start = chaos_sample(ifs, 1, spec.seed)[0]
    config = GameConfig(
        alpha=alpha,
        beta=spec.beta,
        initial_ball=Ball(start, ifs.seed_ball.radius * 0.9),
        support=ifs,
        target_radius=spec.target_radius,
    )
    transcript = play_game(config, strat_a, GreedyAdversary(ifs, lam))
    state = strat_a.state
    q_max = max(1, int(state.handled_q_bound()))
    wit = badness_witness(transcript.outcome_point, q_max, N=ifs.dim, lam=lam)
    print(f"alpha = {alpha:.6g}, beta = {spec.beta}, guaranteed delta = {state.delta_guaranteed:.6g}")
    print(f"outcome point: {np.array2string(transcript.outcome_point, precision=14)}")
    print(f"witness over q <= {q_max}: {wit.delta_hat:.6g} (>= delta: {wit.delta_hat >= state.delta_guaranteed})")
    out_dir = Path(spec.out)
    _write(out_dir, "transcript.jsonl", transcript.to_jsonl())
    _write(
        out_dir,
        "demo_report.json",
        _json_report(
            {
                "alpha": alpha,
                "beta": spec.beta,
                "delta_guaranteed": state.delta_guaranteed,
                "outcome_point": transcript.outcome_point.tolist(),
                "witness": wit.delta_hat,
                "q_max": q_max,
            }
        ),
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fractalgame", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--spec", help="session spec JSON file")
        p.add_argument("--preset", default="cantor3", choices=_PRESET_NAMES)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--beta", type=float, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--target-radius", dest="target_radius", type=float, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--threads", type=int, default=1, help="currently serial; kept for compatibility")

    p = sub.add_parser("certify-measure", help="emit a friendliness certificate")
    common(p)
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("play", help="run one game and its replay check")
    common(p)
    p.set_defaults(func=_cmd_play)

    p = sub.add_parser("verify-ba", help="badness witness for a point")
    common(p)
    p.add_argument("--point", type=float, nargs="+", required=True)
    p.add_argument("--q-max", dest="q_max", type=int, default=100000)
    p.set_defaults(func=_cmd_verify_ba)

    p = sub.add_parser("simplex-check", help="randomized coplanarity trials")
    common(p)
    p.add_argument("--dim", type=int, default=2, choices=(1, 2, 3))
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=_cmd_simplex_check)

    p = sub.add_parser("dim", help="packing-count dimension sweep (TSV)")
    common(p)
    p.add_argument("--levels", type=int, nargs="+", default=[4, 8, 12])
    p.set_defaults(func=_cmd_dim)

    p = sub.add_parser("demo", help="full pipeline on a preset")
    common(p)
    p.set_defaults(func=_cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SessionSpecError as err:
        for e in err.errors:
            print(f"spec error: {e}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as err:
        print(f"validation error: {err}", file=sys.stderr)
        return 1
    except (RefinementTooDeep, EnumerationCap, GeoSelectExhausted, ArithmeticError) as err:
        print(f"runtime error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
