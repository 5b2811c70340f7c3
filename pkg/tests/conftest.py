import numpy as np
import pytest

from fractalgame.diophantine import AffineMap
from fractalgame.game import GameConfig, GreedyAdversary, play_game
from fractalgame.geometry import Ball
from fractalgame.ifs import chaos_sample, preset
from fractalgame.measures import certify_measure
from fractalgame.strategy import SchmidtStrategy


@pytest.fixture(scope="session")
def cantor():
    return preset("cantor3")


@pytest.fixture(scope="session")
def sierpinski():
    return preset("sierpinski")


@pytest.fixture(scope="session")
def koch():
    return preset("koch")


@pytest.fixture(scope="session")
def cantor_cert(cantor):
    return certify_measure(cantor, rng_seed=7)


@pytest.fixture(scope="session")
def cantor_games(cantor, cantor_cert):
    """The 30 reference games: 3 betas x 10 seeds, greedy adversary, played
    to radius 1e-10. Shared by the end-to-end and replay criteria."""
    alpha = cantor_cert.alpha_prime / 13
    lam = AffineMap.identity(1)
    games = []
    for beta in (0.1, 0.25, 0.5):
        for seed in range(10):
            strat = SchmidtStrategy(cantor, cantor_cert, lam, alpha, beta)
            start = chaos_sample(cantor, 1, seed)[0]
            config = GameConfig(
                alpha=alpha,
                beta=beta,
                initial_ball=Ball(start, 0.45),
                support=cantor,
                target_radius=1e-10,
            )
            transcript = play_game(config, strat, GreedyAdversary(cantor, lam))
            games.append((beta, seed, transcript, strat.state))
    return games


@pytest.fixture(scope="session")
def cantor_pack_counts(cantor):
    """Greedy packing counts at beta = 3^-m for the dimension criteria."""
    from fractalgame.dimension import pack_count

    return {m: pack_count(cantor, [0.0], 1.0, 3.0**-m) for m in (1, 2, 4, 8, 12, 16)}
