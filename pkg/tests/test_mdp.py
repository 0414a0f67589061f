import numpy as np
import pytest

from pggsolve.game import is_maximal_independent_set, social_welfare
from pggsolve.graphgen import FamilyConfig, make_instance
from pggsolve.mdp import init_state, is_terminal, step, valid_actions


def test_initial_state_open(path3):
    s = init_state(path3)
    assert not is_terminal(s)
    assert list(valid_actions(s)) == [0, 1, 2]
    assert s.members == []


def test_step_blocks_closed_neighborhood(path3):
    s = init_state(path3)
    s1, r = step(s, 1, "sw")
    assert is_terminal(s1)                       # middle blocks both ends
    assert r == pytest.approx(2.5 / 3.0)         # terminal reward = objective
    assert s1.members == [1]
    # original state untouched
    assert list(valid_actions(s)) == [0, 1, 2]


def test_nonterminal_reward_zero(path3):
    s = init_state(path3)
    s1, r = step(s, 0, "sw")
    assert r == 0.0
    assert not is_terminal(s1)
    assert list(valid_actions(s1)) == [2]
    s2, r2 = step(s1, 2, "sw")
    assert is_terminal(s2)
    assert r2 == pytest.approx(social_welfare(path3, [1, 0, 1]))


def test_invalid_actions_rejected(path3):
    s = init_state(path3)
    s1, _ = step(s, 1, "sw")
    with pytest.raises(ValueError):
        step(s1, 0, "sw")
    with pytest.raises(ValueError):
        step(s, 5, "sw")


def test_terminal_states_are_maximal_sets():
    # every completion of the construction process must land on a maximal
    # independent set, whatever order the vertices are added
    for seed in range(30):
        inst = make_instance(FamilyConfig("ER", 10, "HC"), "train", seed, 2)
        rng = np.random.default_rng(seed)
        s = init_state(inst)
        while not is_terminal(s):
            acts = valid_actions(s)
            s, _ = step(s, int(rng.choice(acts)), "sw")
        assert is_maximal_independent_set(inst.graph, s.members)


def test_profile_reflects_members(triangle):
    s = init_state(triangle)
    s1, _ = step(s, 2, "fairness")
    assert list(s1.profile()) == [0, 0, 1]
