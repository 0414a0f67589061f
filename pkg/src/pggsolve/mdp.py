"""Sequential construction of maximal independent sets as a deterministic MDP.

States are (instance, partial independent set); the action set is the
vertices not yet in the closed neighborhood of the set ("blocked" mask kept
incrementally, O(deg) per step). Adding a vertex never unblocks anything, so
the episode ends exactly when the set is maximal, and the terminal transition
pays the configured objective of the induced profile (investors = members).
Intermediate rewards are zero. States copy on branch: stepping returns a new
state and leaves the input untouched.
"""

from __future__ import annotations

import numpy as np

from ._kernels import mdp_apply
from .game import GameInstance, objective_value, profile_from_set


class BuildState:
    """Partial independent set plus its blocked mask."""

    __slots__ = ("inst", "members", "blocked")

    def __init__(self, inst: GameInstance, members: list[int], blocked: np.ndarray):
        self.inst = inst
        self.members = members
        self.blocked = blocked

    def clone(self) -> "BuildState":
        return BuildState(self.inst, list(self.members), self.blocked.copy())

    def profile(self) -> np.ndarray:
        return profile_from_set(self.inst.n, self.members)


def init_state(inst: GameInstance) -> BuildState:
    return BuildState(inst, [], np.zeros(inst.n, dtype=np.bool_))


def valid_actions(state: BuildState) -> np.ndarray:
    """Unblocked vertices, ascending."""
    return np.flatnonzero(~state.blocked).astype(np.int64)


def is_terminal(state: BuildState) -> bool:
    return bool(state.blocked.all())


def step(state: BuildState, action: int, objective: str) -> tuple[BuildState, float]:
    """Apply one action; reward is 0.0, or the objective on entering the
    terminal (maximal) state."""
    action = int(action)
    if not (0 <= action < state.inst.n):
        raise ValueError(f"action {action} out of range for n={state.inst.n}")
    if state.blocked[action]:
        raise ValueError(f"action {action} is blocked in this state")
    nxt = state.clone()
    profile = nxt.profile()
    mdp_apply(state.inst.graph.indptr, state.inst.graph.indices,
              nxt.blocked, profile, action)
    nxt.members.append(action)
    if is_terminal(nxt):
        return nxt, objective_value(state.inst, nxt.profile(), objective)
    return nxt, 0.0
