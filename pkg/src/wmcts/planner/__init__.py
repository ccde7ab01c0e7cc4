"""W-MCTS planner: Gaussian-posterior tree search with power-mean backups."""

from .config import PlannerConfig, Recommendation, Selection
from .search import (
    Belief,
    backup_q,
    backup_v,
    new_leaf,
    plan,
    recommend,
    rollout,
    run,
    select_action,
    selection_scores,
    simulate,
    step_root,
    transition_key,
    update_belief,
)
from .tree import QEdge, SearchTree, VNode

__all__ = [
    "Belief",
    "PlannerConfig",
    "QEdge",
    "Recommendation",
    "SearchTree",
    "Selection",
    "VNode",
    "backup_q",
    "backup_v",
    "new_leaf",
    "plan",
    "recommend",
    "rollout",
    "run",
    "select_action",
    "selection_scores",
    "simulate",
    "step_root",
    "transition_key",
    "update_belief",
]
