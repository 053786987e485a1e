"""Ground-truth engines over an explicit component-instance tree.

A node fails intrinsically with probability ``1 - p``; it is effectively
alive only when it and all of its ancestors are intrinsically alive. The
service succeeds when, for every VNF type, at least ``k`` VMs of that type
are effectively alive.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from statistics import NormalDist

import numpy as np

from sfcrel.model import Scenario, ScenarioError, ServiceDemand, require_valid

DEFAULT_NODE_CAP = 24
MC_CHUNK = 1 << 16
_Z95 = NormalDist().inv_cdf(0.975)


@dataclass(frozen=True)
class Node:
    id: int
    level: int
    parent: int | None
    p: float
    cls: int | None = None  # 1-based class index, None for common roots
    root: int | None = None  # 1-based common-root index
    vnf_type: int | None = None  # 1-based; None on shared components


@dataclass(frozen=True)
class ComponentTree:
    nodes: tuple[Node, ...]
    psi: int
    depth: int

    def __len__(self) -> int:
        return len(self.nodes)

    @cached_property
    def order(self) -> tuple[int, ...]:
        """Node positions sorted so every parent precedes its children."""
        return tuple(sorted(range(len(self.nodes)), key=lambda i: self.nodes[i].level))

    @cached_property
    def _pos(self) -> dict[int, int]:
        return {node.id: i for i, node in enumerate(self.nodes)}

    @cached_property
    def vnf_index(self) -> dict[int, list[int]]:
        """VNF type -> ids of the VMs hosting that type."""
        index: dict[int, list[int]] = {t: [] for t in range(1, self.psi + 1)}
        for node in self.nodes:
            if node.level == self.depth:
                index[node.vnf_type].append(node.id)
        return index

    @cached_property
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(parent position or -1, reliability, VM-type one-hot matrix)."""
        pos = self._pos
        parent = np.array(
            [-1 if n.parent is None else pos[n.parent] for n in self.nodes], dtype=np.int64
        )
        p = np.array([n.p for n in self.nodes], dtype=np.float64)
        types = np.zeros((len(self.nodes), self.psi), dtype=np.int64)
        for i, n in enumerate(self.nodes):
            if n.level == self.depth:
                types[i, n.vnf_type - 1] = 1
        return parent, p, types

    def effective(self, alive: np.ndarray) -> np.ndarray:
        """Propagate failures down the tree for a (trials, nodes) boolean matrix."""
        parent = self.arrays[0]
        eff = alive.copy()
        for i in self.order:
            if parent[i] >= 0:
                eff[:, i] &= eff[:, parent[i]]
        return eff

    def successes(self, alive: np.ndarray, k: int) -> np.ndarray:
        counts = self.effective(alive).astype(np.int64) @ self.arrays[2]
        return (counts >= k).all(axis=1)


@dataclass(frozen=True)
class FailureState:
    """Intrinsic up/down draw: bit ``i`` of ``alive`` is node position ``i``."""

    alive: int

    @classmethod
    def all_alive(cls, tree: ComponentTree) -> FailureState:
        return cls((1 << len(tree)) - 1)

    def without(self, tree: ComponentTree, *node_ids: int) -> FailureState:
        mask = self.alive
        for nid in node_ids:
            mask &= ~(1 << tree._pos[nid])
        return FailureState(mask)

    def as_array(self, size: int) -> np.ndarray:
        return np.array([[(self.alive >> i) & 1 for i in range(size)]], dtype=bool)


def instantiate_tree(scenario: Scenario) -> ComponentTree:
    """Expand a scenario into its explicit component instances.

    Each class gets its shared levels (one component per sub-SFC position,
    serving every VNF type) and then, per VNF type, a disjoint copy of the
    remaining levels. Common roots are single nodes reused by every class
    they join.
    """
    require_valid(scenario)
    depth = scenario.depth
    psi = scenario.demand.psi
    nodes: list[Node] = []

    def add(**kw) -> int:
        nid = len(nodes)
        nodes.append(Node(id=nid, **kw))
        return nid

    root_node: list[int] = []
    for j, root in enumerate(scenario.common_roots):
        parent = None
        if root.level > 1:
            parent = next(
                root_node[i]
                for i, other in enumerate(scenario.common_roots[:j])
                if other.level == root.level - 1 and root.classes <= other.classes
            )
        p = scenario.classes[min(root.classes) - 1].reliabilities[root.level - 1]
        root_node.append(add(level=root.level, parent=parent, p=p, root=j + 1))

    for xi, cls in enumerate(scenario.classes, 1):
        own_roots = scenario.roots_of_class(xi)
        top = max(own_roots, default=0)
        if top and top > depth - cls.delta:
            raise ScenarioError(f"class {xi}: common root inside its disjoint levels")
        frontier = [root_node[own_roots[top]]] if top else [None]
        for c in range(top + 1, depth - cls.delta + 1):
            frontier = [
                add(level=c, parent=parent, p=cls.reliabilities[c - 1], cls=xi)
                for parent in frontier
                for _ in range(cls.epsilon[c - 1])
            ]
        for t in range(1, psi + 1):
            branch = frontier
            for c in cls.disjoint_levels:
                branch = [
                    add(level=c, parent=parent, p=cls.reliabilities[c - 1], cls=xi, vnf_type=t)
                    for parent in branch
                    for _ in range(cls.epsilon[c - 1])
                ]
    return ComponentTree(tuple(nodes), psi, depth)


def service_success(tree: ComponentTree, state: FailureState, demand: ServiceDemand) -> bool:
    return bool(tree.successes(state.as_array(len(tree)), demand.k)[0])


def exhaustive_reliability(
    tree: ComponentTree, demand: ServiceDemand, node_cap: int = DEFAULT_NODE_CAP
) -> float:
    """Sum the probability of every intrinsic failure pattern that keeps the service up."""
    size = len(tree)
    if size > node_cap:
        raise ScenarioError(f"tree has {size} nodes, exhaustive cap is {node_cap}")
    _, p, _ = tree.arrays
    q = 1.0 - p
    shifts = np.arange(size, dtype=np.int64)
    total = 2**size
    block = min(total, MC_CHUNK)
    partial = []
    for start in range(0, total, block):
        states = np.arange(start, min(start + block, total), dtype=np.int64)
        bits = ((states[:, None] >> shifts) & 1).astype(bool)
        prob = np.ones(len(states))
        for i in range(size):
            prob *= np.where(bits[:, i], p[i], q[i])
        partial.extend(prob[tree.successes(bits, demand.k)].tolist())
    return math.fsum(partial)


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    half_width: float
    successes: int
    trials: int

    @property
    def low(self) -> float:
        return self.mean - self.half_width

    @property
    def high(self) -> float:
        return self.mean + self.half_width

    def covers(self, value: float) -> bool:
        return self.low <= value <= self.high


def chunk_generator(seed: int, chunk: int) -> np.random.Generator:
    """Philox stream for one fixed-size block of trials.

    The 128-bit key packs the 64-bit seed with the block index, so the draw
    for (trial, node) never depends on how blocks are split across workers.
    """
    key = ((seed & 0xFFFFFFFFFFFFFFFF) << 64) | chunk
    return np.random.Generator(np.random.Philox(key=key))


def monte_carlo_estimate(
    tree: ComponentTree,
    demand: ServiceDemand,
    trials: int,
    seed: int = 0,
    workers: int = 1,
) -> MonteCarloEstimate:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _, p, _ = tree.arrays
    n_chunks = -(-trials // MC_CHUNK)

    def run(chunk: int) -> int:
        size = min(MC_CHUNK, trials - chunk * MC_CHUNK)
        draws = chunk_generator(seed, chunk).random((size, len(tree)))
        return int(tree.successes(draws < p, demand.k).sum())

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            successes = sum(pool.map(run, range(n_chunks)))
    else:
        successes = sum(map(run, range(n_chunks)))
    mean = successes / trials
    half = _Z95 * math.sqrt(mean * (1.0 - mean) / trials)
    return MonteCarloEstimate(mean, half, successes, trials)
