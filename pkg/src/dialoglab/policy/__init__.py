from .features import ActionTemplate, FeatureVector, build_action_inventory, feature_dim, featurize, materialize
from .rule import decide_rule
from .rl import (
    QLearningPolicy,
    ReinforcePolicy,
    act_epsilon_greedy,
    load_checkpoint,
    q_update,
    reinforce_update,
    reward,
    save_checkpoint,
)

__all__ = [
    "ActionTemplate",
    "FeatureVector",
    "build_action_inventory",
    "feature_dim",
    "featurize",
    "materialize",
    "decide_rule",
    "QLearningPolicy",
    "ReinforcePolicy",
    "act_epsilon_greedy",
    "q_update",
    "reinforce_update",
    "reward",
    "save_checkpoint",
    "load_checkpoint",
]
