"""Search tree container and read-only views of its records."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernel as k


class SearchTree:
    """Alternating V-nodes and Q-edges stored in growable arrays.

    ``root`` is a node index; :meth:`reserve` grows the arrays, and
    :func:`wmcts.planner.search.step_root` re-roots by copying a subtree
    into a fresh tree.
    """

    def __init__(self, node_capacity: int = 1024, edge_capacity: int = 4096, init_std: float = 30.0):
        self.arrays = k.allocate(node_capacity, edge_capacity)
        self.root = k.new_node(self.arrays, -1, 0.0, float(init_std), k.OPEN)

    @classmethod
    def from_arrays(cls, arrays: k.TreeArrays, root: int = 0) -> "SearchTree":
        tree = cls.__new__(cls)
        tree.arrays = arrays
        tree.root = root
        return tree

    @property
    def num_nodes(self) -> int:
        return int(self.arrays.counts[0])

    @property
    def num_edges(self) -> int:
        return int(self.arrays.counts[1])

    def reserve(self, nodes: int, edges: int) -> None:
        """Make room for at least ``nodes``/``edges`` more records."""
        a = self.arrays
        need_n = self.num_nodes + nodes
        need_e = self.num_edges + edges
        if need_n > a.n_visits.size or need_e > a.e_visits.size:
            self.arrays = k.grow(a, max(need_n, 2 * a.n_visits.size), max(need_e, 2 * a.e_visits.size))

    def node(self, index: int | None = None) -> "VNode":
        return VNode(self, self.root if index is None else index)

    @property
    def root_node(self) -> "VNode":
        return VNode(self, self.root)

    def walk(self):
        """Every node reachable from the root, depth first."""
        stack = [self.root_node]
        while stack:
            v = stack.pop()
            yield v
            for edge in v.edges.values():
                stack.extend(edge.children.values())


@dataclass(frozen=True)
class VNode:
    """View of one V-node: visit count N(s), posterior mean and std, edges by action."""

    tree: SearchTree
    index: int

    @property
    def visit_count(self) -> int:
        return int(self.tree.arrays.n_visits[self.index])

    @property
    def mean(self) -> float:
        return float(self.tree.arrays.n_mean[self.index])

    @property
    def std(self) -> float:
        return float(self.tree.arrays.n_std[self.index])

    @property
    def key(self) -> int:
        return int(self.tree.arrays.n_key[self.index])

    @property
    def terminal(self) -> bool:
        return bool(self.tree.arrays.n_flag[self.index] == k.TERMINAL)

    @property
    def expanded(self) -> bool:
        return bool(self.tree.arrays.n_edge0[self.index] >= 0)

    @property
    def edges(self) -> dict[int, "QEdge"]:
        a = self.tree.arrays
        e0 = int(a.n_edge0[self.index])
        if e0 < 0:
            return {}
        return {int(a.e_action[e]): QEdge(self.tree, e) for e in range(e0, e0 + int(a.n_nedges[self.index]))}


@dataclass(frozen=True)
class QEdge:
    """View of one Q-edge: count n(s,a), reward sum, posterior mean and std, children by transition key."""

    tree: SearchTree
    index: int

    @property
    def action(self) -> int:
        return int(self.tree.arrays.e_action[self.index])

    @property
    def visit_count(self) -> int:
        return int(self.tree.arrays.e_visits[self.index])

    @property
    def reward_sum(self) -> float:
        return float(self.tree.arrays.e_rsum[self.index])

    @property
    def mean(self) -> float:
        return float(self.tree.arrays.e_mean[self.index])

    @property
    def std(self) -> float:
        return float(self.tree.arrays.e_std[self.index])

    @property
    def children(self) -> dict[int, VNode]:
        a = self.tree.arrays
        out = {}
        c = int(a.e_head[self.index])
        while c >= 0:
            out[int(a.n_key[c])] = VNode(self.tree, c)
            c = int(a.n_next[c])
        return out
