"""Iterated function systems of contracting similarities.

An IFSystem carries the maps, a seed ball that every map sends into itself,
and the similarity dimension delta solving sum(ratio_i^delta) = 1. Cylinders
(images of the seed ball under finite map compositions) drive everything
else: natural-measure bounds, attractor distance queries, and sampling.

The natural measure assigns cylinder w the weight prod(ratio_{w_i})^delta,
normalized so the whole attractor has mass 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import TAU, AxisBox, Ball, as_point, ball_in_ball

# Hard cap on cylinder enumeration size.
ENUM_CAP = 10**7

CylinderWord = tuple[int, ...]


class RefinementTooDeep(RuntimeError):
    """Cylinder enumeration exceeded the size cap."""


@dataclass
class Similarity:
    """Contracting similarity x -> ratio * rotation @ x + translation."""

    ratio: float
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        self.ratio = float(self.ratio)
        self.rotation = np.asarray(self.rotation, dtype=float)
        self.translation = as_point(self.translation)
        n = self.translation.shape[0]
        if not 0.0 < self.ratio < 1.0:
            raise ValueError("similarity ratio must be in (0,1)")
        if self.rotation.shape != (n, n):
            raise ValueError("rotation shape does not match translation")
        if np.max(np.abs(self.rotation.T @ self.rotation - np.eye(n))) > 1e-10:
            raise ValueError("rotation matrix is not orthogonal")

    def apply(self, x) -> np.ndarray:
        return self.ratio * (self.rotation @ as_point(x)) + self.translation

    def apply_many(self, pts: np.ndarray) -> np.ndarray:
        return self.ratio * (pts @ self.rotation.T) + self.translation

    def fixed_point(self) -> np.ndarray:
        n = self.translation.shape[0]
        return np.linalg.solve(np.eye(n) - self.ratio * self.rotation, self.translation)


@dataclass
class IFSystem:
    """Finite system of contracting similarities with a declared open set.

    The seed ball must be mapped into itself by every map (checked here),
    which makes cylinder balls nested along words. Systems whose seed ball
    has diameter > 1 are rescaled at load so the power-law radius range
    r <= r0 = 1 covers the whole attractor.
    """

    maps: list[Similarity]
    seed_ball: Ball
    open_set: Ball | AxisBox | None = None
    claimed_irreducible: bool = True
    name: str = ""
    dimension: float = field(init=False)

    def __post_init__(self):
        if not self.maps:
            raise ValueError("need at least one similarity map")
        dim = self.seed_ball.dim
        for phi in self.maps:
            if phi.translation.shape[0] != dim:
                raise ValueError("map dimension mismatch with seed ball")

        if self.seed_ball.diameter > 1.0 + TAU:
            self._rescale(1.0 / self.seed_ball.diameter)

        for i, phi in enumerate(self.maps):
            image = Ball(phi.apply(self.seed_ball.center), phi.ratio * self.seed_ball.radius)
            if not ball_in_ball(image, self.seed_ball, tol=1e-9):
                raise ValueError(f"map {i} does not send the seed ball into itself")

        self.dimension = moran_dimension(self)
        self._check_open_set_disjointness()

    def _rescale(self, s: float):
        self.maps = [
            Similarity(phi.ratio, phi.rotation, s * phi.translation) for phi in self.maps
        ]
        self.seed_ball = Ball(s * self.seed_ball.center, s * self.seed_ball.radius)
        if isinstance(self.open_set, Ball):
            self.open_set = Ball(s * self.open_set.center, s * self.open_set.radius)
        elif isinstance(self.open_set, AxisBox):
            self.open_set = AxisBox(s * self.open_set.lo, s * self.open_set.hi)

    def _check_open_set_disjointness(self):
        """Sanity check of the declared open set: first-level images must be
        pairwise disjoint. Exact for ball open sets; for boxes only when all
        rotations are signed axis permutations (images stay axis-aligned);
        otherwise the declaration is trusted as-is."""
        u = self.open_set
        if u is None:
            return
        if isinstance(u, Ball):
            images = [(phi.apply(u.center), phi.ratio * u.radius) for phi in self.maps]
            for i in range(len(images)):
                for j in range(i + 1, len(images)):
                    ci, ri = images[i]
                    cj, rj = images[j]
                    if float(np.linalg.norm(ci - cj)) < ri + rj - TAU:
                        raise ValueError(f"open-set images {i} and {j} overlap")
            return
        for phi in self.maps:
            r = phi.rotation
            if np.max(np.abs(np.abs(r) @ np.ones(r.shape[0]) - 1.0)) > 1e-12 or np.max(
                np.abs(np.round(np.abs(r)) - np.abs(r))
            ) > 1e-12:
                return  # rotated boxes: trust the declaration
        boxes = []
        for phi in self.maps:
            a = phi.apply(u.lo)
            b = phi.apply(u.hi)
            boxes.append((np.minimum(a, b), np.maximum(a, b)))
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                lo = np.maximum(boxes[i][0], boxes[j][0])
                hi = np.minimum(boxes[i][1], boxes[j][1])
                if np.all(hi - lo > TAU):
                    raise ValueError(f"open-set images {i} and {j} overlap")

    @property
    def dim(self) -> int:
        return self.seed_ball.dim

    @property
    def n_maps(self) -> int:
        return len(self.maps)

    def linear_parts(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Cached (ratio * rotation, translation) pairs, one per map."""
        parts = getattr(self, "_linparts", None)
        if parts is None:
            parts = [(phi.ratio * phi.rotation, phi.translation) for phi in self.maps]
            self._linparts = parts
        return parts

    @property
    def ratios(self) -> np.ndarray:
        return np.array([phi.ratio for phi in self.maps])

    def cylinder_weight(self, word: CylinderWord) -> float:
        w = 1.0
        for i in word:
            w *= self.maps[i].ratio ** self.dimension
        return w


def moran_dimension(ifs: IFSystem) -> float:
    """Similarity dimension: the root of sum(ratio_i^s) = 1 on [0, N].

    The left side is strictly decreasing in s, so bisection to 1e-12 pins
    the unique root.
    """
    ratios = ifs.ratios
    if ratios.size == 0:
        raise ValueError("empty map list")

    def f(s):
        return float(np.sum(ratios**s)) - 1.0

    lo, hi = 0.0, float(ifs.dim)
    if f(lo) <= 0.0:
        return 0.0
    if f(hi) > 0.0:
        raise ValueError("similarity dimension exceeds the ambient dimension")
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cylinder_ball(ifs: IFSystem, word: CylinderWord) -> Ball:
    """Image of the seed ball under the composition indexed by `word`.

    Contains the attractor's intersection with that cylinder; its radius is
    the seed radius times the product of the word's ratios.
    """
    center = ifs.seed_ball.center
    radius = ifs.seed_ball.radius
    for i in reversed(word):
        phi = ifs.maps[i]
        center = phi.apply(center)
        radius *= phi.ratio
    return Ball(center, radius)


def cylinder_point(ifs: IFSystem, word: CylinderWord) -> np.ndarray:
    """An exact attractor point inside the cylinder: the image of map 0's
    fixed point under the word's composition. Extremal and low-complexity;
    use cylinder_generic_point when the point's digit expansion matters."""
    p = ifs.maps[0].fixed_point()
    for i in reversed(word):
        p = ifs.maps[i].apply(p)
    return p


def attractor_anchor(ifs: IFSystem) -> np.ndarray:
    """A deterministic attractor point with an aperiodic address.

    Uses 96 steps of the base-m digit-sum (Thue-Morse style) index sequence,
    so the point is not eventually periodic under the maps and its
    coordinates fill the double mantissa. Cached on the system.
    """
    cached = getattr(ifs, "_anchor", None)
    if cached is not None:
        return cached
    m = ifs.n_maps

    def digit_sum(k: int) -> int:
        s = 0
        while k:
            s += k % max(m, 2)
            k //= max(m, 2)
        return s % m

    p = ifs.maps[0].fixed_point()
    for k in reversed(range(96)):
        p = ifs.maps[digit_sum(k)].apply(p)
    ifs._anchor = p
    return p


def cylinder_generic_point(ifs: IFSystem, word: CylinderWord) -> np.ndarray:
    """Attractor point inside the cylinder whose coordinates carry full
    double-precision complexity (image of the aperiodic anchor)."""
    p = attractor_anchor(ifs)
    for i in reversed(word):
        p = ifs.maps[i].apply(p)
    return p


class _CylNode:
    """Composed transform for one cylinder word; children append a map on
    the inside, so child balls are nested inside their parent's."""

    __slots__ = ("word", "matrix", "trans", "scale")

    def __init__(self, word, matrix, trans, scale):
        self.word = word
        self.matrix = matrix
        self.trans = trans
        self.scale = scale

    @classmethod
    def root(cls, ifs: IFSystem) -> "_CylNode":
        n = ifs.dim
        return cls((), np.eye(n), np.zeros(n), 1.0)

    def child(self, ifs: IFSystem, i: int) -> "_CylNode":
        m, t = ifs.linear_parts()[i]
        return _CylNode(
            self.word + (i,),
            self.matrix @ m,
            self.matrix @ t + self.trans,
            self.scale * ifs.maps[i].ratio,
        )

    def ball(self, ifs: IFSystem) -> Ball:
        seed = ifs.seed_ball
        return Ball(self.matrix @ seed.center + self.trans, self.scale * seed.radius)


class _Region:
    """Predicate pair used by measure bounds: full containment and overlap
    tests against candidate balls."""

    def contains_ball(self, b: Ball) -> bool:
        raise NotImplementedError

    def intersects_ball(self, b: Ball) -> bool:
        raise NotImplementedError


class BallRegion(_Region):
    def __init__(self, ball: Ball):
        self.ball = ball

    def contains_ball(self, b: Ball) -> bool:
        return ball_in_ball(b, self.ball)

    def intersects_ball(self, b: Ball) -> bool:
        return self.ball.intersects_ball(b)


class SlabRegion(_Region):
    """Epsilon-neighborhood of a hyperplane, kept implicit as (plane, eps)."""

    def __init__(self, plane, eps: float):
        self.plane = plane
        self.eps = float(eps)

    def _dist(self, b: Ball) -> float:
        return abs(float(self.plane.normal @ b.center) - self.plane.offset)

    def contains_ball(self, b: Ball) -> bool:
        return self._dist(b) + b.radius <= self.eps + TAU

    def intersects_ball(self, b: Ball) -> bool:
        return self._dist(b) <= self.eps + b.radius + TAU


class IntersectionRegion(_Region):
    def __init__(self, *parts: _Region):
        self.parts = parts

    def contains_ball(self, b: Ball) -> bool:
        return all(p.contains_ball(b) for p in self.parts)

    def intersects_ball(self, b: Ball) -> bool:
        # conservative: may report an intersection that is actually empty,
        # which only loosens upper bounds
        return all(p.intersects_ball(b) for p in self.parts)


def _as_region(region) -> _Region:
    if isinstance(region, Ball):
        return BallRegion(region)
    if isinstance(region, _Region):
        return region
    raise TypeError("region must be a Ball or a region object")


def cylinders_meeting(ifs: IFSystem, region: Ball, max_diam: float) -> list[CylinderWord]:
    """All shallowest words whose cylinder ball has diameter <= max_diam and
    meets the region; branches whose parents miss the region are pruned.
    Output is in lexicographic word order.
    """
    if max_diam <= 0:
        raise ValueError("max_diam must be positive")
    reg = _as_region(region)
    out: list[CylinderWord] = []
    count = 0

    stack = [_CylNode.root(ifs)]
    while stack:
        node = stack.pop()
        ball = node.ball(ifs)
        if not reg.intersects_ball(ball):
            continue
        if ball.diameter <= max_diam + TAU:
            out.append(node.word)
            count += 1
            if count > ENUM_CAP:
                raise RefinementTooDeep(f"refinement too deep (> {ENUM_CAP} cylinders)")
            continue
        for i in reversed(range(ifs.n_maps)):
            stack.append(node.child(ifs, i))
            count += 1
            if count > ENUM_CAP:
                raise RefinementTooDeep(f"refinement too deep (> {ENUM_CAP} nodes)")
    return out


def measure_bounds(ifs: IFSystem, region, depth: int) -> tuple[float, float]:
    """Bracket the natural measure of a region by depth-`depth` cylinders.

    lower sums the weights of cylinders whose ball lies inside the region,
    upper those whose ball meets it. Subtrees entirely inside or outside are
    resolved without expansion (child weights sum to the parent weight).
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    reg = _as_region(region)
    lower = 0.0
    upper = 0.0
    count = 0
    delta = ifs.dimension

    stack: list[tuple[_CylNode, float]] = [(_CylNode.root(ifs), 1.0)]
    while stack:
        node, weight = stack.pop()
        ball = node.ball(ifs)
        if not reg.intersects_ball(ball):
            continue
        if reg.contains_ball(ball):
            lower += weight
            upper += weight
            continue
        if len(node.word) == depth:
            upper += weight
            continue
        for i in range(ifs.n_maps):
            stack.append((node.child(ifs, i), weight * ifs.maps[i].ratio**delta))
            count += 1
            if count > ENUM_CAP:
                raise RefinementTooDeep(f"refinement too deep (> {ENUM_CAP} nodes)")
    return lower, upper


def chaos_sample(ifs: IFSystem, n: int, rng_seed: int) -> np.ndarray:
    """n attractor-adjacent points from the chaos game with weights ratio^delta.

    One orbit from the seed center, 64 burn-in steps discarded; after burn-in
    every iterate lies in a cylinder of diameter ratio_max^64 * seed diameter.
    Deterministic given rng_seed. Returns an (n, N) array.
    """
    if n < 1:
        raise ValueError("need n >= 1 samples")
    rng = np.random.default_rng(rng_seed)
    probs = ifs.ratios**ifs.dimension
    probs = probs / probs.sum()
    burn = 64
    choices = rng.choice(ifs.n_maps, size=burn + n, p=probs)
    x = ifs.seed_ball.center.copy()
    out = np.empty((n, ifs.dim))
    for step, i in enumerate(choices):
        x = ifs.maps[i].apply(x)
        if step >= burn:
            out[step - burn] = x
    return out


def distance_to_attractor(ifs: IFSystem, point, rel_precision: float = 1e-3) -> tuple[float, float]:
    """Bracket d(point, K) by branch-and-bound over cylinder balls.

    Returns (lo, hi) with hi - lo <= rel_precision * max(hi, seed radius * 1e-9).
    """
    p = as_point(point)
    best_hi = float(np.linalg.norm(p - ifs.seed_ball.center)) + ifs.seed_ball.radius
    frontier: list[_CylNode] = [_CylNode.root(ifs)]
    floor = ifs.seed_ball.radius * 1e-9
    while True:
        gaps = []
        for node in frontier:
            b = node.ball(ifs)
            gaps.append(max(0.0, float(np.linalg.norm(p - b.center)) - b.radius))
        lo = min(gaps)
        if best_hi - lo <= rel_precision * max(best_hi, floor) or best_hi <= floor:
            return lo, best_hi
        nxt = []
        for node in frontier:
            for i in range(ifs.n_maps):
                child = node.child(ifs, i)
                b = child.ball(ifs)
                d = float(np.linalg.norm(p - b.center))
                best_hi = min(best_hi, d + b.radius)
                nxt.append((max(0.0, d - b.radius), child))
        frontier = [node for g, node in nxt if g <= best_hi + TAU]
        if len(frontier) > 100000:
            nxt.sort(key=lambda t: t[0])
            frontier = [node for _, node in nxt[:100000]]


def project_to_attractor(ifs: IFSystem, point, diam_tol: float = 1e-12) -> np.ndarray:
    """An attractor point nearly closest to `point`: descend into the nearest
    cylinder until its diameter drops below diam_tol (relative to the seed),
    then take its exact representative."""
    p = as_point(point)
    node = _CylNode.root(ifs)
    min_ratio = float(np.min(ifs.ratios))
    depth_cap = max(8, int(math.log(max(diam_tol, 1e-300)) / math.log(min_ratio)) + 2)
    for _ in range(depth_cap):
        if node.ball(ifs).diameter <= diam_tol * ifs.seed_ball.diameter:
            break
        best = None
        for i in range(ifs.n_maps):
            child = node.child(ifs, i)
            b = child.ball(ifs)
            d = float(np.linalg.norm(p - b.center)) - b.radius
            if best is None or d < best[0]:
                best = (d, child)
        node = best[1]
    return cylinder_generic_point(ifs, node.word)


# ---------------------------------------------------------------------------
# presets

def preset(name: str) -> IFSystem:
    """Built-in systems: cantor3, sierpinski, koch."""
    try:
        builder = _PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(_PRESETS)}") from None
    return builder()


def _cantor3() -> IFSystem:
    eye = np.eye(1)
    maps = [
        Similarity(1 / 3, eye, [0.0]),
        Similarity(1 / 3, eye, [2 / 3]),
    ]
    return IFSystem(
        maps,
        seed_ball=Ball([0.5], 0.5),
        open_set=AxisBox([0.0], [1.0]),
        claimed_irreducible=True,
        name="cantor3",
    )


def _sierpinski() -> IFSystem:
    s = 0.8  # side length; keeps the circumball diameter under 1
    eye = np.eye(2)
    verts = [np.array([0.0, 0.0]), np.array([s, 0.0]), np.array([s / 2, s * math.sqrt(3) / 2])]
    maps = [Similarity(0.5, eye, v / 2) for v in verts]
    center = np.array([s / 2, s * math.sqrt(3) / 6])
    return IFSystem(
        maps,
        seed_ball=Ball(center, s / math.sqrt(3)),
        open_set=AxisBox([0.0, 0.0], [s, s * math.sqrt(3) / 2]),
        claimed_irreducible=True,
        name="sierpinski",
    )


def _koch() -> IFSystem:
    rot = lambda deg: np.array(
        [
            [math.cos(math.radians(deg)), -math.sin(math.radians(deg))],
            [math.sin(math.radians(deg)), math.cos(math.radians(deg))],
        ]
    )
    eye = np.eye(2)
    maps = [
        Similarity(1 / 3, eye, [0.0, 0.0]),
        Similarity(1 / 3, rot(60), [1 / 3, 0.0]),
        Similarity(1 / 3, rot(-60), [0.5, math.sqrt(3) / 6]),
        Similarity(1 / 3, eye, [2 / 3, 0.0]),
    ]
    # circumscribing ball centered at the peak; load-time rescaling brings
    # its diameter 2/sqrt(3) down to 1
    seed = Ball([0.5, math.sqrt(3) / 6], 1 / math.sqrt(3))
    return IFSystem(maps, seed_ball=seed, open_set=None, claimed_irreducible=True, name="koch")


_PRESETS = {"cantor3": _cantor3, "sierpinski": _sierpinski, "koch": _koch}


# ---------------------------------------------------------------------------
# JSON wire format

def ifs_to_dict(ifs: IFSystem) -> dict:
    d: dict = {
        "dim": ifs.dim,
        "maps": [
            {
                "ratio": phi.ratio,
                "rotation": phi.rotation.flatten().tolist(),
                "translation": phi.translation.tolist(),
            }
            for phi in ifs.maps
        ],
        "seed_ball": {"center": ifs.seed_ball.center.tolist(), "radius": ifs.seed_ball.radius},
        "irreducible": ifs.claimed_irreducible,
    }
    if isinstance(ifs.open_set, Ball):
        d["open_set"] = {
            "type": "ball",
            "center": ifs.open_set.center.tolist(),
            "radius": ifs.open_set.radius,
        }
    elif isinstance(ifs.open_set, AxisBox):
        d["open_set"] = {
            "type": "box",
            "lo": ifs.open_set.lo.tolist(),
            "hi": ifs.open_set.hi.tolist(),
        }
    else:
        d["open_set"] = None
    if ifs.name:
        d["name"] = ifs.name
    return d


def ifs_from_dict(d: dict) -> IFSystem:
    n = int(d["dim"])
    maps = []
    for m in d["maps"]:
        rotation = np.asarray(m["rotation"], dtype=float).reshape(n, n)
        maps.append(Similarity(float(m["ratio"]), rotation, m["translation"]))
    sb = d["seed_ball"]
    seed = Ball(sb["center"], float(sb["radius"]))
    open_set = None
    os_spec = d.get("open_set")
    if os_spec:
        if os_spec.get("type") == "ball":
            open_set = Ball(os_spec["center"], float(os_spec["radius"]))
        elif os_spec.get("type") == "box":
            open_set = AxisBox(os_spec["lo"], os_spec["hi"])
        else:
            raise ValueError("open_set type must be 'ball' or 'box'")
    return IFSystem(
        maps,
        seed_ball=seed,
        open_set=open_set,
        claimed_irreducible=bool(d.get("irreducible", False)),
        name=str(d.get("name", "")),
    )
