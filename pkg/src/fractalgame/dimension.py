"""Ball-packing counts on the attractor and Hausdorff-dimension lower bounds.

pack_count greedily packs interior-disjoint balls of radius beta*r centered
at attractor points inside B(x, r); the count n(beta) feeds the bound
dim >= log n(beta) / |log(alpha beta)|. A box-counting estimator over
sampled point clouds serves as an independent cross-check.

The packing count is a certified lower bound only (maximum packing is not
attempted); a greedy count below the theoretical floor M * beta^(-delta)
with M = (a/b)/3/2^N falsifies the measure certificate, not the bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import TAU, Ball, as_point
from .ifs import IFSystem, cylinder_point, cylinders_meeting


@dataclass
class PackingReport:
    """Greedy packing counts for one beta, over (x, r) samples."""

    beta: float
    samples: list[tuple[np.ndarray, float, int]]
    alpha: float
    n_beta: int = field(init=False)
    M_expected: float = field(init=False, default=float("nan"))
    bound: float = field(init=False)

    def __post_init__(self):
        if not self.samples:
            raise ValueError("packing report needs at least one sample")
        self.n_beta = min(count for _, _, count in self.samples)
        if self.n_beta < 1:
            raise ValueError("packing count must be at least 1")
        self.bound = (
            dim_lower_bound(self.n_beta, self.alpha, self.beta) if self.n_beta >= 2 else 0.0
        )

    def attach_expectation(self, a_pl: float, b_pl: float, n_dim: int):
        self.M_expected = packing_constant_M(a_pl, b_pl, n_dim)
        return self


def pack_count(ifs: IFSystem, x, r: float, beta: float) -> int:
    """Greedy lower bound on the number of interior-disjoint balls of radius
    beta*r, centered at attractor points, contained in B(x, r).

    Candidates are exact attractor representatives of cylinders with diameter
    at most beta*r/2 meeting B(x, (1-beta)r); selection sweeps them in
    lexicographic word order, accepting a center when it keeps distance at
    least 2*beta*r (tangency allowed, within slack) from the accepted set.
    """
    if not 0 < beta < 1:
        raise ValueError("beta must be in (0,1)")
    x = as_point(x)
    r = float(r)
    inner = Ball(x, (1 - beta) * r)
    # refine past both the packing radius and the containment margin, so a
    # representative near x survives the exact filter even as beta -> 1
    words = cylinders_meeting(ifs, inner, max_diam=min(beta, 1 - beta) * r / 2)
    sep = 2 * beta * r
    slack = max(TAU, 1e-9 * sep)

    cell = sep
    grid: dict[tuple[int, ...], list[np.ndarray]] = {}
    count = 0
    for w in words:
        c = cylinder_point(ifs, w)
        if float(np.linalg.norm(c - x)) > (1 - beta) * r + slack:
            continue
        key = tuple(int(math.floor(v / cell)) for v in c)
        ok = True
        for nb in _neighbor_keys(key):
            for other in grid.get(nb, ()):
                if float(np.linalg.norm(c - other)) < sep - slack:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            grid.setdefault(key, []).append(c)
            count += 1
    return count


def _neighbor_keys(key):
    n = len(key)
    offsets = np.stack(np.meshgrid(*([np.array([-1, 0, 1])] * n), indexing="ij"), axis=-1)
    for off in offsets.reshape(-1, n):
        yield tuple(key[d] + int(off[d]) for d in range(n))


def packing_constant_M(a_pl: float, b_pl: float, n_dim: int) -> float:
    """Packing floor constant (a/b) * 3^-1 * 2^-N from the power law."""
    if a_pl <= 0 or b_pl <= 0:
        raise ValueError("power-law constants must be positive")
    return a_pl / b_pl / 3.0 / 2.0**n_dim


def dim_lower_bound(n_beta: int, alpha: float, beta: float) -> float:
    """Winning-set dimension lower bound log(n_beta) / |log(alpha*beta)|."""
    if n_beta < 2:
        raise ValueError("bound is vacuous for n_beta < 2")
    if not 0 < alpha < 1 or not 0 < beta < 1:
        raise ValueError("alpha and beta must be in (0,1)")
    return math.log(n_beta) / abs(math.log(alpha * beta))


def box_dimension(points, scales) -> float:
    """Box-counting slope: log(occupied boxes) against log(1/scale)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    scales = [float(s) for s in scales]
    if len(scales) < 2:
        raise ValueError("need at least two scales")
    origin = pts.min(axis=0)
    logs, counts = [], []
    for s in scales:
        cells = np.floor((pts - origin) / s).astype(np.int64)
        n = len(np.unique(cells, axis=0))
        logs.append(math.log(1.0 / s))
        counts.append(math.log(n))
    return float(np.polyfit(logs, counts, 1)[0])


def packing_sweep(
    ifs: IFSystem, x, r: float, alpha: float, betas
) -> list[PackingReport]:
    """pack_count at each beta around one (x, r) sample, reported with the
    dimension bound for the paired alpha."""
    out = []
    for beta in betas:
        count = pack_count(ifs, x, r, beta)
        out.append(PackingReport(beta=float(beta), samples=[(as_point(x), float(r), count)], alpha=alpha))
    return out
