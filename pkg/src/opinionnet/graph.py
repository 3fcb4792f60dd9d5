"""Undirected social topology with directed influence weights.

Adjacency and weights are dense ``n x n`` arrays; the networks this package
targets have at most a few hundred nodes, where dense numpy beats adjacency
dicts by a wide margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ConfigError, SelfEdgeError

GeneratorKind = Literal["random", "small_world", "scale_free"]
GENERATORS = ("random", "small_world", "scale_free")


@dataclass(frozen=True)
class WeightInit:
    """How influence weights are assigned to a new edge.

    ``constant`` gives every orientation the weight ``value``;
    ``uniform_random`` draws each orientation independently from U[0, 1).
    """

    kind: Literal["constant", "uniform_random"] = "constant"
    value: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "uniform_random"):
            raise ConfigError({"weight_init": f"unknown kind {self.kind!r}"})
        if self.kind == "constant" and not 0.0 <= self.value <= 1.0:
            raise ConfigError({"weight_init": f"constant {self.value} outside [0, 1]"})

    def matrix(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """An ``n x n`` weight matrix; entry ``[i, j]`` is used for w_ij if (i, j) is an edge."""
        if self.kind == "constant":
            return np.full((n, n), float(self.value))
        return rng.random((n, n))

    def to_json(self):
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        return {"kind": "uniform_random"}

    @classmethod
    def from_json(cls, obj) -> "WeightInit":
        if isinstance(obj, str):
            return cls(kind=obj)
        if isinstance(obj, dict):
            extra = set(obj) - {"kind", "value"}
            if extra or "kind" not in obj:
                raise ConfigError({"weight_init": f"expected {{kind, value}}, got {sorted(obj)}"})
            return cls(kind=obj["kind"], value=float(obj.get("value", 1.0)))
        raise ConfigError({"weight_init": f"cannot parse {obj!r}"})


class SocialGraph:
    """Symmetric topology on nodes ``0..n-1`` plus per-orientation weights.

    ``weights[i, j]`` is w_ij, i's influence over j. It is zero whenever
    (i, j) is not an edge.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ConfigError({"n": f"need at least one node, got {n}"})
        self.n = int(n)
        self.adj = np.zeros((n, n), dtype=bool)
        self.weights = np.zeros((n, n), dtype=float)

    def copy(self) -> "SocialGraph":
        g = SocialGraph.__new__(SocialGraph)
        g.n = self.n
        g.adj = self.adj.copy()
        g.weights = self.weights.copy()
        return g

    def __eq__(self, other):
        if not isinstance(other, SocialGraph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.adj, other.adj)
            and np.array_equal(self.weights, other.weights)
        )

    def _check(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"node {i} out of range for graph with {self.n} nodes")
        return int(i)

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[self._check(i), self._check(j)])

    def add_edge(self, i: int, j: int, w_ij: float = 1.0, w_ji: float = 1.0) -> bool:
        """Add edge {i, j}. Returns False (and leaves weights alone) if it already exists."""
        i, j = self._check(i), self._check(j)
        if i == j:
            raise SelfEdgeError(f"self-edge ({i}, {i}) not allowed")
        if self.adj[i, j]:
            return False
        for w in (w_ij, w_ji):
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"weight {w} outside [0, 1]")
        self.adj[i, j] = self.adj[j, i] = True
        self.weights[i, j] = w_ij
        self.weights[j, i] = w_ji
        return True

    def remove_edge(self, i: int, j: int) -> bool:
        """Remove edge {i, j} and both weight orientations. Absent edges are a no-op."""
        i, j = self._check(i), self._check(j)
        if not self.adj[i, j]:
            return False
        self.adj[i, j] = self.adj[j, i] = False
        self.weights[i, j] = self.weights[j, i] = 0.0
        return True

    def neighbors(self, i: int) -> np.ndarray:
        """Open neighborhood of ``i`` in ascending order."""
        return np.flatnonzero(self.adj[self._check(i)])

    def degree(self) -> np.ndarray:
        return self.adj.sum(axis=1)

    def num_edges(self) -> int:
        return int(self.adj.sum()) // 2

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(i, j)`` with ``i < j``, sorted."""
        iu, ju = np.nonzero(np.triu(self.adj, k=1))
        return list(zip(iu.tolist(), ju.tolist()))

    def check_invariants(self) -> None:
        assert np.array_equal(self.adj, self.adj.T), "adjacency not symmetric"
        assert not self.adj.diagonal().any(), "self-edge present"
        assert not self.weights[~self.adj].any(), "weight on a non-edge"
        assert ((self.weights >= 0) & (self.weights <= 1)).all(), "weight outside [0, 1]"

    @classmethod
    def from_edges(cls, n: int, edges, weight: float = 1.0) -> "SocialGraph":
        g = cls(n)
        for i, j in edges:
            g.add_edge(i, j, weight, weight)
        return g

    def __repr__(self):
        return f"SocialGraph(n={self.n}, edges={self.num_edges()})"


@dataclass(frozen=True)
class GenSpec:
    """Seed-graph request. ``saturation`` is the target edge density.

    ``k`` optionally overrides the small-world lattice degree.
    """

    kind: GeneratorKind
    n: int
    saturation: float
    seed: int = 0
    k: int | None = None

    def validate(self) -> None:
        problems = {}
        if self.kind not in GENERATORS:
            problems["generator"] = f"must be one of {GENERATORS}, got {self.kind!r}"
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            problems["nodes"] = f"need n >= 2, got {self.n!r}"
        if not 0.0 < self.saturation <= 1.0:
            problems["saturation"] = f"must be in (0, 1], got {self.saturation!r}"
        if self.k is not None and (self.k < 2 or self.k % 2):
            problems["k"] = f"lattice degree must be even and >= 2, got {self.k!r}"
        if problems:
            raise ConfigError(problems)


def lattice_degree(n: int, saturation: float) -> int:
    """Even ring-lattice degree whose density does not exceed ``saturation`` (minimum 2)."""
    return max(2, 2 * math.floor(saturation * (n - 1) / 2))


def attachment_count(n: int, saturation: float) -> int:
    """Edges per new node for preferential attachment (minimum 1)."""
    return max(1, math.floor(saturation * (n - 1) / 2))


def gnp_edges(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Erdos-Renyi G(n, p) adjacency; each of the n(n-1)/2 pairs drawn once."""
    u = rng.random((n, n))
    upper = np.triu(u < p, k=1)
    return upper | upper.T


def watts_strogatz_edges(n: int, k: int, beta: float, rng: np.random.Generator) -> np.ndarray:
    """Ring lattice of degree ``k`` with each lattice edge rewired with probability ``beta``.

    Rewiring order and target rejection follow the classic Watts-Strogatz
    procedure: lattice offset outer loop, node inner loop, target uniform over
    nodes that are neither the source nor already adjacent to it.
    """
    adj = np.zeros((n, n), dtype=bool)
    if k >= n - 1:
        adj[:] = True
        np.fill_diagonal(adj, False)
        return adj
    half = k // 2
    nodes = np.arange(n)
    for j in range(1, half + 1):
        adj[nodes, (nodes + j) % n] = True
        adj[(nodes + j) % n, nodes] = True
    for j in range(1, half + 1):
        for u in range(n):
            v = (u + j) % n
            if rng.random() < beta:
                if adj[u].sum() >= n - 1:
                    continue
                w = int(rng.integers(n))
                while w == u or adj[u, w]:
                    w = int(rng.integers(n))
                adj[u, v] = adj[v, u] = False
                adj[u, w] = adj[w, u] = True
    return adj


def barabasi_albert_edges(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Preferential attachment: star on m+1 nodes, then each new node links to m
    distinct existing nodes drawn proportionally to degree."""
    m = min(m, n - 1)
    adj = np.zeros((n, n), dtype=bool)
    adj[0, 1 : m + 1] = adj[1 : m + 1, 0] = True
    repeated = [0] * m + list(range(1, m + 1))
    for source in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(repeated[int(rng.integers(len(repeated)))])
        for t in sorted(targets):
            adj[source, t] = adj[t, source] = True
        repeated.extend(sorted(targets))
        repeated.extend([source] * m)
    return adj


def generate(spec: GenSpec, weight_init: WeightInit = WeightInit()) -> SocialGraph:
    """Build a seed graph. Identical specs (including seed) give identical graphs."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n, s = spec.n, spec.saturation
    if spec.kind == "random":
        adj = gnp_edges(n, s, rng)
    elif spec.kind == "small_world":
        k = spec.k if spec.k is not None else lattice_degree(n, s)
        adj = watts_strogatz_edges(n, k, s, rng)
    else:
        adj = barabasi_albert_edges(n, attachment_count(n, s), rng)
    g = SocialGraph(n)
    g.adj = adj
    g.weights = np.where(adj, weight_init.matrix(n, rng), 0.0)
    return g


def triadic_candidates(g: SocialGraph) -> set[tuple[int, int]]:
    """Non-adjacent pairs ``(i, j)``, ``i < j``, sharing at least one neighbor."""
    return {(int(i), int(j)) for i, j in np.argwhere(_candidate_matrix(g))}


def _candidate_matrix(g: SocialGraph) -> np.ndarray:
    a = g.adj.astype(np.int32)
    shared = (a @ a) > 0
    return np.triu(shared & ~g.adj, k=1)


def grow(
    g: SocialGraph,
    friend_prob: float,
    rng: np.random.Generator,
    weight_init: WeightInit = WeightInit(),
) -> list[tuple[int, int]]:
    """Triadic closure: each candidate pair is added independently with ``friend_prob``.

    Candidates are fixed before any edge is added, so new edges never enable
    further closures in the same call. Draws are indexed by pair, which keeps
    the outcome independent of candidate enumeration order.
    """
    if not 0.0 <= friend_prob <= 1.0:
        raise ValueError(f"friend_prob must be in [0, 1], got {friend_prob}")
    cand = _candidate_matrix(g)
    u = rng.random((g.n, g.n))
    w = weight_init.matrix(g.n, rng)
    added = []
    for i, j in np.argwhere(cand & (u < friend_prob)).tolist():
        g.add_edge(i, j, w[i, j], w[j, i])
        added.append((i, j))
    return added
