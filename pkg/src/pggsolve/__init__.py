"""Equilibrium selection for best-shot public goods games on graphs.

Pure equilibria of these games are exactly the maximal independent sets of
the graph, so selecting a good equilibrium is a combinatorial search
problem. The package builds sets vertex by vertex with Monte Carlo tree
search, distills the search into a graph-embedding policy by imitation,
and ships the baselines and evaluation harness around them.
"""

from .backend import USING_NUMBA, backend_name
from .game import (
    COST_HC,
    COST_IC,
    COST_SETTINGS,
    GameInstance,
    Graph,
    OBJ_FAIR,
    OBJ_SW,
    OBJECTIVES,
    fairness,
    is_independent_set,
    is_maximal_independent_set,
    is_psne,
    objective_value,
    profile_from_set,
    set_from_profile,
    social_welfare,
    utilities,
)
from .graphgen import (
    FamilyConfig,
    MODELS,
    SPLITS,
    ensure_dataset,
    load_split,
    make_instance,
    resolve_data_root,
    write_dataset,
)
from .mdp import BuildState, init_state, is_terminal, step, valid_actions
from .uct import CP_GRID, Demonstration, UctConfig, plan_episode
from .baselines import (
    SaConfig,
    SolveResult,
    best_response,
    enumerate_psne,
    exhaustive_best_psne,
    payoff_transfer,
    random_equilibrium,
    simulated_annealing,
    target_hubs,
    target_lowest_cost,
)
from .gil import (
    K_GRID,
    LR_GRID,
    PolicyParams,
    TrainConfig,
    greedy_rollout,
    init_params,
    load_model,
    save_model,
    train_policy,
)
from .harness import (
    ExperimentSpec,
    mean_value_table,
    run_experiment,
    timing_report,
    win_rate_table,
)

__version__ = "0.1.0"
