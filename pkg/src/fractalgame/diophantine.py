"""Rational target sets, the simplex-lemma hyperplane, and badness witnesses.

Targets are affine images lam(p/q) of rational points. The central geometric
fact used by the winning strategy: inside a ball whose radius beats the
volume bound r^N < |det A| / (N! V_N) * theta^N, all targets with q in one
geometric window [R^(k-1), R^k), R = theta^(-N/(N+1)), lie on a single
affine hyperplane. That containment is asserted here, not assumed; a
violation signals an arithmetic bug.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Ball, Hyperplane, as_point, fit_affine_span, point_hyperplane_distance

Q_ENUM_CAP = 10**7


class EnumerationCap(RuntimeError):
    """Rational-point enumeration would exceed the configured cap."""


@dataclass
class AffineMap:
    """Non-singular affine map x -> matrix @ x + shift."""

    matrix: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        self.matrix = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        self.shift = as_point(self.shift)
        n = self.shift.shape[0]
        if self.matrix.shape != (n, n):
            raise ValueError("affine map matrix/shift dimension mismatch")
        self.det_abs = abs(float(np.linalg.det(self.matrix)))
        if self.det_abs <= 1e-12:
            raise ValueError("affine map must be non-singular")
        self._inv = np.linalg.inv(self.matrix)

    @classmethod
    def identity(cls, n: int) -> "AffineMap":
        return cls(np.eye(n), np.zeros(n))

    @property
    def dim(self) -> int:
        return self.shift.shape[0]

    def apply(self, x) -> np.ndarray:
        return self.matrix @ as_point(x) + self.shift

    def invert(self, y) -> np.ndarray:
        return self._inv @ (as_point(y) - self.shift)

    def to_dict(self) -> dict:
        return {"matrix": self.matrix.tolist(), "shift": self.shift.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "AffineMap":
        return cls(np.asarray(d["matrix"], dtype=float), d["shift"])


@dataclass
class RationalTarget:
    """One target lam(p/q); p is kept exact, image in floats."""

    p: tuple[int, ...]
    q: int
    image: np.ndarray


@dataclass
class BadnessWitness:
    """min over q <= q_max_checked of q^((N+1)/N) * d(x, nearest target)."""

    delta_hat: float
    argmin: RationalTarget | None
    q_max_checked: int


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def rational_targets_in_window(
    lam: AffineMap, q_lo: float, q_hi: float, region: Ball
) -> list[RationalTarget]:
    """All lam(p/q) in the region with ceil(q_lo) <= q < q_hi.

    The p-range per q comes from the integer box around q times the
    preimage of the region's bounding box; membership is then filtered
    exactly against the ball. Output is ordered by q, then p lexicographic.
    """
    if q_lo < 0 or q_hi <= q_lo:
        raise ValueError("need 0 <= q_lo < q_hi")
    if q_hi > Q_ENUM_CAP + 1:
        raise EnumerationCap(f"q window reaches {q_hi:.3g}, above cap {Q_ENUM_CAP}")
    n = lam.dim
    q_start = max(1, math.ceil(q_lo - 1e-12))
    q_end = math.ceil(q_hi - 1e-12)  # exclusive
    if q_end <= q_start:
        return []

    # bounding box of lam^{-1}(region): center +- r * row norms of inverse
    c_pre = lam.invert(region.center)
    half = region.radius * np.linalg.norm(lam._inv, axis=1)
    lo_box = c_pre - half - 1e-12
    hi_box = c_pre + half + 1e-12

    qs = np.arange(q_start, q_end, dtype=np.int64)
    p_lo = np.ceil(np.outer(qs, lo_box) - 1e-9).astype(np.int64)
    p_hi = np.floor(np.outer(qs, hi_box) + 1e-9).astype(np.int64)
    counts = np.prod(np.maximum(p_hi - p_lo + 1, 0), axis=1)
    total = int(counts.sum())
    if total > Q_ENUM_CAP:
        raise EnumerationCap(f"about {total} candidate rational points, above cap {Q_ENUM_CAP}")

    out: list[RationalTarget] = []
    tol = 1e-12
    for qi in np.nonzero(counts)[0]:
        q = qs[qi]
        ranges = [np.arange(p_lo[qi, d], p_hi[qi, d] + 1) for d in range(n)]
        if n == 1:
            pts = ranges[0].reshape(-1, 1)
        else:
            grids = np.meshgrid(*ranges, indexing="ij")
            pts = np.stack([g.ravel() for g in grids], axis=1)
        images = (pts / q) @ lam.matrix.T + lam.shift
        dist = np.linalg.norm(images - region.center, axis=1)
        keep = dist <= region.radius + tol
        for row, img in zip(pts[keep], images[keep]):
            out.append(RationalTarget(tuple(int(v) for v in row), int(q), img))
    return out


def simplex_radius_bound(lam: AffineMap, theta: float, n: int) -> float:
    """Largest r allowed by the volume condition r^N < |det A|/(N! V_N) theta^N."""
    return (lam.det_abs / (math.factorial(n) * unit_ball_volume(n))) ** (1.0 / n) * theta


def simplex_hyperplane(
    lam: AffineMap, theta: float, k: int, x, r: float
) -> tuple[Hyperplane | None, list[RationalTarget]]:
    """Targets with R^(k-1) <= q < R^k inside B(x, theta^(k-1) r), plus one
    hyperplane containing all of them.

    Requires the volume condition on r; the coplanarity of the enumerated
    targets (residual below 1e-9 * r) is asserted and its failure raised as
    an error, since the containment is a theorem once the precondition holds.
    """
    if not 0 < theta < 1:
        raise ValueError("theta must be in (0,1)")
    if k < 1:
        raise ValueError("window index k must be >= 1")
    n = lam.dim
    if r <= 0 or r >= simplex_radius_bound(lam, theta, n):
        raise ValueError("radius too large for simplex lemma")
    R = theta ** (-n / (n + 1))
    ball = Ball(as_point(x), theta ** (k - 1) * r)
    targets = rational_targets_in_window(lam, R ** (k - 1), R**k, ball)
    if not targets:
        return None, []
    span_dim, plane, residual = fit_affine_span([t.image for t in targets], scale=r)
    if plane is None or residual >= 1e-9 * r:
        raise ArithmeticError(
            f"simplex lemma violated: span_dim={span_dim}, residual={residual:.3g}"
        )
    return plane, targets


def badness_witness(x, Q: int, N: int | None = None, lam: AffineMap | None = None) -> BadnessWitness:
    """Scan q = 1..Q for the worst normalized distance q^((N+1)/N) * d(x, lam(p/q)).

    With lam given, the nearest p per q is found by rounding in preimage
    coordinates and checking the surrounding integer box in image space.
    """
    p = as_point(x)
    if N is None:
        N = p.shape[0]
    if Q < 1:
        raise ValueError("need Q >= 1")
    e = (N + 1) / N
    if lam is None:
        lam = AffineMap.identity(N)
    y = lam.invert(p)

    best = math.inf
    best_target = None
    qs = np.arange(1, Q + 1, dtype=np.int64)
    base = np.rint(np.outer(qs, y)).astype(np.int64)
    if N == 1:
        # scalar case: nearest preimage rational is nearest image rational
        images = (base / qs[:, None]) @ lam.matrix.T + lam.shift
        dist = np.linalg.norm(images - p, axis=1)
        scores = qs.astype(float) ** e * dist
        i = int(np.argmin(scores))
        best = float(scores[i])
        best_target = RationalTarget(tuple(int(v) for v in base[i]), int(qs[i]), images[i])
    else:
        offsets = np.stack(
            np.meshgrid(*([np.array([-1, 0, 1])] * N), indexing="ij"), axis=-1
        ).reshape(-1, N)
        for qi in range(len(qs)):
            cand = base[qi] + offsets
            images = (cand / qs[qi]) @ lam.matrix.T + lam.shift
            dist = np.linalg.norm(images - p, axis=1)
            j = int(np.argmin(dist))
            score = float(qs[qi]) ** e * float(dist[j])
            if score < best:
                best = score
                best_target = RationalTarget(
                    tuple(int(v) for v in cand[j]), int(qs[qi]), images[j]
                )
    return BadnessWitness(best, best_target, int(Q))


def ball_badness_margin(
    center, radius: float, Q: int, lam: AffineMap | None = None
) -> tuple[float, int]:
    """min over q = 1..Q of q^((N+1)/N) * (d(center, nearest lam(p/q)) - radius).

    This is the witness notion for a whole ball: positive margin means every
    point of B(center, radius) stays q^(-(N+1)/N)-separated from every target
    at that scale. Can be negative when a target enters the ball.
    """
    c = as_point(center)
    n = c.shape[0]
    if lam is None:
        lam = AffineMap.identity(n)
    e = (n + 1) / n
    qs = np.arange(1, Q + 1, dtype=np.int64)
    y = lam.invert(c)
    if n == 1:
        base = np.rint(np.outer(qs, y))
        images = (base / qs[:, None]) @ lam.matrix.T + lam.shift
        dist = np.linalg.norm(images - c, axis=1)
        scores = qs.astype(float) ** e * (dist - radius)
        i = int(np.argmin(scores))
        return float(scores[i]), int(qs[i])
    offsets = np.stack(
        np.meshgrid(*([np.array([-1, 0, 1])] * n), indexing="ij"), axis=-1
    ).reshape(-1, n)
    best, best_q = math.inf, 0
    for q in qs:
        cand = np.rint(q * y) + offsets
        images = (cand / q) @ lam.matrix.T + lam.shift
        dist = float(np.min(np.linalg.norm(images - c, axis=1)))
        score = float(q) ** e * (dist - radius)
        if score < best:
            best, best_q = score, int(q)
    return best, best_q


@dataclass
class ContinuedFraction:
    quotients: list[int]
    trusted_len: int
    terminated: bool


def continued_fraction(x: float, n_terms: int) -> ContinuedFraction:
    """Gauss-map expansion of x in (0,1): x = 1/(a1 + 1/(a2 + ...)).

    Terms are trusted while the convergent denominators q_k stay below the
    2^52 double-precision integer horizon; beyond that the quotients are
    reported but flagged untrusted. A fractional part below 1e-15 terminates
    the expansion (rational input).
    """
    if not 0 < x < 1:
        raise ValueError("continued_fraction expects x in (0,1)")
    if n_terms > 40:
        raise ValueError("n_terms capped at 40; doubles cannot support more")
    quotients: list[int] = []
    q_prev, q_cur = 0, 1
    trusted = 0
    terminated = False
    frac = x
    for _ in range(n_terms):
        inv = 1.0 / frac
        a = int(math.floor(inv))
        if a < 1:
            a = 1
        quotients.append(a)
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        if q_cur < 1 << 52:
            trusted += 1
        frac = inv - a
        if frac < 1e-15:
            terminated = True
            break
    return ContinuedFraction(quotients, trusted, terminated)
