"""Public planner operations on top of the compiled kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..envs.model import GenerativeModel
from . import kernel as k
from .config import PlannerConfig
from .tree import QEdge, SearchTree, VNode

DEFAULT_BOUNDS = (0.0, 1.0)
REINVIGORATE_FRACTION = 0.1
REINVIGORATE_TRIES = 10


@dataclass
class Belief:
    """Unweighted particle set over hidden states (one int64 state per row)."""

    particles: np.ndarray

    def __post_init__(self):
        self.particles = np.ascontiguousarray(np.atleast_2d(self.particles), dtype=np.int64)
        if self.particles.shape[0] == 0:
            raise ValueError("a belief needs at least one particle")

    def __len__(self):
        return self.particles.shape[0]

    @classmethod
    def from_prior(cls, env: GenerativeModel, n: int, rng: np.random.Generator) -> "Belief":
        return cls(np.stack([env.initial(rng) for _ in range(n)]))

    @classmethod
    def point(cls, state) -> "Belief":
        return cls(np.asarray(state, dtype=np.int64)[None, :])


def _pack(config: PlannerConfig, env: GenerativeModel | None):
    if env is None:
        lo, hi = config.reward_bounds or DEFAULT_BOUNDS
        cf = np.array([config.p, config.exploration_c, config.gamma, config.init_std, lo, hi - lo])
        return cf, None
    return config.pack(env)


def new_leaf(config: PlannerConfig, tree: SearchTree | None = None) -> VNode:
    """A fresh, unvisited V-node (its mean is set by the first rollout through it)."""
    if tree is None:
        return SearchTree(init_std=config.init_std).root_node
    tree.reserve(1, 0)
    return VNode(tree, k.new_node(tree.arrays, -1, 0.0, config.init_std, k.OPEN))


def select_action(node: VNode, config: PlannerConfig, rng: np.random.Generator, score_offset: float = 0.0) -> int:
    """Action chosen by the configured rule; ``score_offset`` shifts every score (instrumentation only)."""
    a = node.tree.arrays
    if a.n_edge0[node.index] < 0 or a.n_nedges[node.index] == 0:
        raise RuntimeError("terminal node selection")
    scores = np.empty(int(a.n_nedges[node.index]))
    e = k.select_edge(a, node.index, config.selection.code, config.exploration_c, rng, scores, float(score_offset))
    return int(a.e_action[e])


def selection_scores(node: VNode, config: PlannerConfig, rng: np.random.Generator) -> np.ndarray:
    """The rule's per-edge scores (edges in action order); requires every edge to have been tried."""
    a = node.tree.arrays
    scores = np.empty(int(a.n_nedges[node.index]))
    k.selection_scores(a, node.index, config.selection.code, config.exploration_c, rng, scores)
    return scores


def backup_q(edge: QEdge, immediate_reward: float, config: PlannerConfig, env: GenerativeModel | None = None) -> QEdge:
    """Fold one visit with raw ``immediate_reward`` into ``edge`` (children must already be backed up)."""
    cf, _ = _pack(config, env)
    k.backup_q(edge.tree.arrays, edge.index, (immediate_reward - cf[k.CF_RMIN]) / cf[k.CF_RRANGE], config.gamma)
    return edge


def backup_v(node: VNode, config: PlannerConfig) -> VNode:
    k.backup_v(node.tree.arrays, node.index, float(config.p))
    return node


def rollout(state, depth: int, env: GenerativeModel, config: PlannerConfig, rng: np.random.Generator) -> float:
    """Normalised discounted return of the rollout policy from ``state`` at ``depth`` (runs to ``max_depth``)."""
    cf, ci = _pack(config, env)
    s = np.array(state, dtype=np.int64, copy=True)
    buf = np.empty(env.num_actions, dtype=np.int64)
    return float(k.rollout_kernel(s, max(config.max_depth - depth, 0), cf, ci, env.ip, env.fp, rng, buf))


def simulate(node: VNode, state, depth: int, env: GenerativeModel, config: PlannerConfig,
             rng: np.random.Generator) -> float:
    """One pass from ``node`` (treated as the search root) at ``depth``; returns the sampled normalised return."""
    tree = node.tree
    tree.reserve(1, env.num_actions)
    cf, ci = config.pack(env)
    budget = max(config.max_depth - depth, 0)
    a = tree.arrays
    s = np.array(state, dtype=np.int64, copy=True)
    path_n = np.empty(budget + 1, dtype=np.int64)
    path_e = np.empty(budget + 1, dtype=np.int64)
    path_r = np.empty(budget + 1)
    buf = np.empty(env.num_actions, dtype=np.int64)
    scores = np.empty(env.num_actions)
    return float(k.simulate_kernel(a, node.index, s, budget, cf, ci, env.ip, env.fp, rng,
                                   path_n, path_e, path_r, buf, scores))


def _particles(root_state, env: GenerativeModel) -> np.ndarray:
    if isinstance(root_state, Belief):
        return root_state.particles
    s = np.asarray(root_state, dtype=np.int64)
    return np.ascontiguousarray(s.reshape(1, -1) if s.ndim == 1 else s)


def run(tree: SearchTree, root_state, env: GenerativeModel, config: PlannerConfig, rng: np.random.Generator,
        horizon: int | None = None, num_simulations: int | None = None) -> None:
    """Grow ``tree`` by ``num_simulations`` passes (default: the configured budget)."""
    particles = _particles(root_state, env)
    cf, ci = config.pack(env)
    budget = config.max_depth if horizon is None else min(config.max_depth, horizon)
    remaining = config.num_simulations if num_simulations is None else num_simulations
    while remaining > 0:
        tree.reserve(min(remaining, 1 << 16) + 1, (min(remaining, 1 << 16) + 1) * env.num_actions)
        done = k.run_simulations(tree.arrays, tree.root, particles, remaining, budget, cf, ci, env.ip, env.fp, rng)
        remaining -= done


def recommend(tree: SearchTree, config: PlannerConfig, rng: np.random.Generator) -> int:
    return int(k.recommend_kernel(tree.arrays, tree.root, config.root_recommendation.code, rng))


def plan(tree: SearchTree, root_state, env: GenerativeModel, config: PlannerConfig, rng: np.random.Generator,
         horizon: int | None = None) -> int:
    """Run the simulation budget from the root and return the recommended action.

    ``root_state`` is a state vector or a :class:`Belief` (one particle is
    drawn per pass). ``horizon`` caps the search depth at the steps left in
    the episode.
    """
    run(tree, root_state, env, config, rng, horizon)
    action = recommend(tree, config, rng)
    if action < 0:
        # nothing could be searched (zero budget or depth); fall back to the first candidate
        a = tree.arrays
        if a.n_edge0[tree.root] >= 0 and a.n_nedges[tree.root] > 0:
            return int(a.e_action[a.n_edge0[tree.root]])
        return int(env.preferred_actions(_particles(root_state, env)[0])[0]) if config.knowledge[0] else 0
    return action


def step_root(tree: SearchTree, taken_action: int, observed_key: int, init_std: float = 30.0) -> SearchTree:
    """Re-root at the child reached by ``(taken_action, observed_key)``; everything else is dropped.

    A missing child yields a fresh root with ``init_std``.
    """
    edge = tree.root_node.edges.get(int(taken_action))
    child = edge.children.get(int(observed_key)) if edge is not None else None
    if child is None:
        return SearchTree(init_std=init_std)
    nodes, edges = k.subtree_size(tree.arrays, child.index)
    out = k.allocate(max(2 * nodes, 1024), max(2 * edges, 4096))
    k.compact_subtree(tree.arrays, child.index, out)
    return SearchTree.from_arrays(out, 0)


def update_belief(belief: Belief, taken_action: int, observation: int, env: GenerativeModel,
                  rng: np.random.Generator, size: int | None = None) -> Belief:
    """Rejection-sampling particle update with reinvigoration when fewer than 10% survive."""
    n_out = len(belief) if size is None else size
    out = np.empty((n_out, belief.particles.shape[1]), dtype=np.int64)
    k.belief_update_kernel(env.kind, env.ip, env.fp, belief.particles, int(taken_action), int(observation),
                           n_out, rng, out, REINVIGORATE_FRACTION, REINVIGORATE_TRIES)
    return Belief(out)


def transition_key(observation: int, terminal: bool) -> int:
    """Child key used by the tree for an observed transition."""
    return -1 - observation if terminal else observation
