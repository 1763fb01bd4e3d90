"""Policy-guided tree search with provable expansion guarantees.

Two families of search are provided over a shared domain/policy
abstraction: best-first enumeration ordered by depth/probability (with
Markov state cuts), and restart sampling on the universal power-of-two
schedule.  Policies can be mixed (Bayesian or per-step), served from an
external process over a stdio protocol, and benchmarked on Sokoban
levels in the boxoban format.
"""

from .core import (
    ActionId,
    ExactPolicy,
    MalformedSolution,
    NoGoalError,
    Policy,
    PolicyTSError,
    SearchDomain,
    SearchReport,
    SearchStatus,
    TrajectoryNode,
    ZeroProbabilityAction,
    exact_cost,
    exact_trajectory_probability,
    expand_children,
    extend,
    replay,
)
from .levin import ExpansionEvent, SearchTrace, greedy_prob_ts, levin_ts
from .luby import (
    HaltingDistribution,
    InfiniteExpectation,
    RuntimeEstimate,
    SampleResult,
    a6519,
    a6519_recursive,
    best_restart_runtime_bound,
    expected_runtime_universal,
    luby_ts,
    multi_ts,
    restart_runtime_bound,
    run_rng,
    sample_traj,
)
from .mixing import (
    BayesMixturePolicy,
    LocalMixPolicy,
    bayes_mix,
    local_mix_fixed,
    local_mix_varying,
)
from .policies import ConstantPolicy, TablePolicy, UniformPolicy, make_uniform_policy
from .synthetic import (
    AutomatonDomain,
    AutomatonPolicy,
    ChainAndBinDomain,
    CollapsedChainDomain,
    ExplicitTreeDomain,
    ExplicitTreePolicy,
    FullBinaryTreeDomain,
    GoalSpec,
    brute_force_min_cost,
    exact_min_cost,
    exact_min_goal_cost_search,
    random_automaton_instance,
    random_tree_instance,
)

__version__ = "0.1.0"

__all__ = [
    "ActionId",
    "AutomatonDomain",
    "AutomatonPolicy",
    "BayesMixturePolicy",
    "ChainAndBinDomain",
    "CollapsedChainDomain",
    "ConstantPolicy",
    "ExactPolicy",
    "ExpansionEvent",
    "ExplicitTreeDomain",
    "ExplicitTreePolicy",
    "FullBinaryTreeDomain",
    "GoalSpec",
    "HaltingDistribution",
    "InfiniteExpectation",
    "LocalMixPolicy",
    "MalformedSolution",
    "NoGoalError",
    "Policy",
    "PolicyTSError",
    "RuntimeEstimate",
    "SampleResult",
    "SearchDomain",
    "SearchReport",
    "SearchStatus",
    "SearchTrace",
    "TablePolicy",
    "TrajectoryNode",
    "UniformPolicy",
    "ZeroProbabilityAction",
    "a6519",
    "a6519_recursive",
    "bayes_mix",
    "best_restart_runtime_bound",
    "brute_force_min_cost",
    "exact_cost",
    "exact_min_cost",
    "exact_min_goal_cost_search",
    "exact_trajectory_probability",
    "expand_children",
    "expected_runtime_universal",
    "extend",
    "greedy_prob_ts",
    "levin_ts",
    "local_mix_fixed",
    "local_mix_varying",
    "luby_ts",
    "make_uniform_policy",
    "multi_ts",
    "random_automaton_instance",
    "random_tree_instance",
    "replay",
    "restart_runtime_bound",
    "run_rng",
    "sample_traj",
]
