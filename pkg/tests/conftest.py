import numpy as np
import pytest

from pggsolve.game import GameInstance, Graph


def make_game(n, edges, costs, cost_setting="HC", instance_id="t"):
    return GameInstance(Graph(n, edges), np.asarray(costs, dtype=np.float64),
                        cost_setting, instance_id)


@pytest.fixture
def star5():
    """Center 0 with four leaves, identical costs 0.5."""
    return make_game(5, [(0, 1), (0, 2), (0, 3), (0, 4)], [0.5] * 5, "IC")


@pytest.fixture
def path3():
    return make_game(3, [(0, 1), (1, 2)], [0.5] * 3, "IC")


@pytest.fixture
def triangle():
    return make_game(3, [(0, 1), (1, 2), (0, 2)], [0.3, 0.6, 0.2])
