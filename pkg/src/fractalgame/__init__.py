"""Schmidt games on self-similar fractals.

A library for playing Schmidt's game on attractors of similarity IFSs:
empirical certification of the friendliness of the natural measure, a
constructive winning strategy keeping the outcome away from affine images
of rational points, and packing-based Hausdorff-dimension lower bounds.
"""

from .geometry import AxisBox, Ball, Hyperplane, ball_in_ball, fit_affine_span, point_hyperplane_distance
from .ifs import (
    IFSystem,
    Similarity,
    chaos_sample,
    cylinder_ball,
    cylinders_meeting,
    measure_bounds,
    moran_dimension,
    preset,
)
from .measures import MeasureCertificate, alpha_prime, certify_measure
from .diophantine import (
    AffineMap,
    BadnessWitness,
    badness_witness,
    continued_fraction,
    rational_targets_in_window,
    simplex_hyperplane,
)
from .game import GameConfig, GreedyAdversary, Transcript, concentric_strategy, play_game, replay_transcript, validate_move
from .strategy import (
    InterleavedStrategy,
    SchmidtStrategy,
    TargetFamily,
    geo_select,
    guaranteed_delta,
    stage_windows,
)
from .dimension import box_dimension, dim_lower_bound, pack_count, packing_constant_M

__version__ = "0.1.0"
